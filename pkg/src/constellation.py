"""Gray-labelled PSK and square QAM constellations with unit average energy."""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from src.errors import ConfigError, LengthMismatchError, PreconditionError


class ConstellationKind(str, Enum):
    PSK = "PSK"
    QAM = "QAM"


def gray_code(value: int) -> int:
    return value ^ (value >> 1)


def is_power_of_two(value: int) -> bool:
    return value >= 1 and value & (value - 1) == 0


@dataclass(frozen=True)
class Constellation:
    """
    A labelled signal set. ``points[label]`` is the complex point carrying the
    bit label ``label`` (most significant bit first).
    """
    kind: ConstellationKind
    order: int
    points: np.ndarray

    @property
    def bits_per_symbol(self) -> int:
        return self.order.bit_length() - 1

    @property
    def labels(self) -> list[str]:
        return [format(label, f"0{self.bits_per_symbol}b") for label in range(self.order)]

    @property
    def is_real(self) -> bool:
        """True when every point lies on the real axis (BPSK)."""
        return bool(np.all(self.points.imag == 0.0))

    def neighbour_pairs(self) -> list[tuple[int, int]]:
        """
        Label pairs of geometrically adjacent points: consecutive phases for
        PSK, horizontal and vertical grid neighbours for QAM.
        """
        if self.kind is ConstellationKind.PSK:
            if self.order == 2:
                return [(0, 1)]
            positions = [_psk_label(p) for p in range(self.order)]
            return [(positions[p], positions[(p + 1) % self.order]) for p in range(self.order)]

        side = _qam_side(self.order)
        axis_bits = self.bits_per_symbol // 2
        pairs = []
        for i in range(side):
            for q in range(side):
                label = (gray_code(i) << axis_bits) | gray_code(q)
                if i + 1 < side:
                    pairs.append((label, (gray_code(i + 1) << axis_bits) | gray_code(q)))
                if q + 1 < side:
                    pairs.append((label, (gray_code(i) << axis_bits) | gray_code(q + 1)))
        return pairs


def _psk_label(position: int) -> int:
    return gray_code(position)


def _qam_side(order: int) -> int:
    side = int(round(np.sqrt(order)))
    if side * side != order:
        raise ConfigError(f"QAM requires a square constellation, got M={order}.")
    return side


def _psk_points(order: int) -> np.ndarray:
    if order == 2:
        return np.array([1.0 + 0.0j, -1.0 + 0.0j])
    points = np.zeros(order, dtype=complex)
    for position in range(order):
        # odd multiples of pi/M keep every point off both axes
        points[_psk_label(position)] = np.exp(1j * (2 * position + 1) * np.pi / order)
    return points


def _qam_points(order: int) -> np.ndarray:
    side = _qam_side(order)
    axis_bits = (order.bit_length() - 1) // 2
    levels = 2 * np.arange(side) - (side - 1)
    points = np.zeros(order, dtype=complex)
    for i, in_phase in enumerate(levels):
        for q, quadrature in enumerate(levels):
            label = (gray_code(i) << axis_bits) | gray_code(q)
            points[label] = in_phase + 1j * quadrature
    return points / np.sqrt(2.0 * (order - 1) / 3.0)


@lru_cache(maxsize=None)
def get_constellation(kind: ConstellationKind, order: int) -> Constellation:
    """Builds (and caches) the constellation of the given kind and order."""
    kind = ConstellationKind(kind)
    if order < 2 or not is_power_of_two(order):
        raise ConfigError(f"Constellation order must be a power of two >= 2, got {order}.")
    if kind is ConstellationKind.QAM:
        if (order.bit_length() - 1) % 2:
            raise ConfigError(f"QAM requires an even power of two, got M={order}.")
        points = _qam_points(order)
    else:
        points = _psk_points(order)
    points.setflags(write=False)
    return Constellation(kind=kind, order=order, points=points)


def map_symbol(constellation: Constellation, bits: str) -> complex:
    """Maps log2(M) bits to their labelled constellation point."""
    if len(bits) != constellation.bits_per_symbol:
        raise LengthMismatchError(
            f"Symbol field needs {constellation.bits_per_symbol} bits, got {len(bits)}."
        )
    if set(bits) - {"0", "1"}:
        raise PreconditionError(f"Not a bit string: {bits!r}")
    return complex(constellation.points[int(bits, 2)])


def demap_symbol(constellation: Constellation, symbol: complex) -> str:
    """Hard decision: the label of the nearest constellation point."""
    label = int(np.argmin(np.abs(constellation.points - symbol)))
    return format(label, f"0{constellation.bits_per_symbol}b")
