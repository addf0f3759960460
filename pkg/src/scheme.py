"""
Scheme configurations, the per-frame bit budget and the combinatorial
index <-> bit mappings shared by every other module.

Bit strings are plain ``str`` objects over {"0", "1"}, most significant bit
first. All log2-of-binomial terms use the floor: only 2^floor(log2 C) index
patterns are addressable with whole bits.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from src.constellation import Constellation, ConstellationKind, get_constellation, is_power_of_two
from src.errors import ConfigError, LengthMismatchError, PreconditionError, UnaddressablePatternError


def floor_log2_comb(n: int, k: int) -> int:
    """floor(log2 C(n, k)) from the exact integer binomial."""
    return math.comb(n, k).bit_length() - 1


@dataclass(frozen=True)
class SchemeConfig:
    """
    Unified parametrisation of every scheme in the family: GSM/GQSM, MBM and
    their time-indexed variants are all points of this space.
    """
    n_tx: int
    n_active: int
    m_rf: int
    t_total: int
    t_active: int
    mod_order: int
    taps: int = 1
    quadrature: bool = True
    constellation_kind: ConstellationKind = ConstellationKind.PSK

    def __post_init__(self):
        object.__setattr__(self, "constellation_kind", ConstellationKind(self.constellation_kind))
        for name in ("n_tx", "n_active", "t_total", "t_active", "taps"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be a positive integer, got {getattr(self, name)}.")
        if self.m_rf < 0:
            raise ConfigError(f"m_rf must be non-negative, got {self.m_rf}.")
        if self.n_active > self.n_tx:
            raise ConfigError(f"n_active ({self.n_active}) cannot exceed n_tx ({self.n_tx}).")
        if self.t_active > self.t_total:
            raise ConfigError(f"t_active ({self.t_active}) cannot exceed t_total ({self.t_total}).")
        if self.mod_order < 2 or not is_power_of_two(self.mod_order):
            raise ConfigError(f"mod_order must be a power of two >= 2, got {self.mod_order}.")
        # raises for non-square QAM
        get_constellation(self.constellation_kind, self.mod_order)

    @property
    def constellation(self) -> Constellation:
        return get_constellation(self.constellation_kind, self.mod_order)

    @property
    def antenna_index_bits(self) -> int:
        """Index bits of one antenna selection (one quadrature component)."""
        return floor_log2_comb(self.n_tx, self.n_active)

    @property
    def mirror_states(self) -> int:
        return 2 ** self.m_rf

    @property
    def slot_dim(self) -> int:
        """Length of one slot's effective transmit vector, N_t * 2^m_RF."""
        return self.n_tx * self.mirror_states

    @property
    def frame_dim(self) -> int:
        return self.t_total * self.slot_dim

    @property
    def is_detectable(self) -> bool:
        """
        A quadrature scheme on a real-valued constellation puts no energy on the
        imaginary-part antennas, so their index bits cannot be recovered.
        """
        return not (self.quadrature and self.antenna_index_bits > 0 and self.constellation.is_real)


@dataclass(frozen=True)
class BitBudget:
    time_bits: int
    antenna_bits_per_slot: int
    map_bits_per_slot: int
    symbol_bits_per_slot: int
    t_active: int

    @property
    def beta(self) -> int:
        return self.antenna_bits_per_slot + self.map_bits_per_slot + self.symbol_bits_per_slot

    @property
    def frame_bits(self) -> int:
        return self.time_bits + self.t_active * self.beta


@lru_cache(maxsize=None)
def bit_budget(cfg: SchemeConfig) -> BitBudget:
    """Exact integer bit counts of one frame."""
    quadrature_factor = 2 if cfg.quadrature else 1
    return BitBudget(
        time_bits=floor_log2_comb(cfg.t_total, cfg.t_active),
        antenna_bits_per_slot=quadrature_factor * cfg.antenna_index_bits,
        map_bits_per_slot=cfg.m_rf,
        symbol_bits_per_slot=cfg.constellation.bits_per_symbol,
        t_active=cfg.t_active,
    )


def beta(cfg: SchemeConfig) -> int:
    return bit_budget(cfg).beta


def achieved_rate(cfg: SchemeConfig) -> Fraction:
    """Frame bits per channel use, frame_bits / (T + L - 1), as an exact fraction."""
    return Fraction(bit_budget(cfg).frame_bits, cfg.t_total + cfg.taps - 1)


# --- Combination indexing ---

def unrank_combination(n: int, k: int, index: int) -> tuple[int, ...]:
    """The index-th k-subset of range(n) in lexicographic order."""
    if not 0 <= k <= n:
        raise PreconditionError(f"Need 0 <= k <= n, got n={n}, k={k}.")
    usable = 1 << floor_log2_comb(n, k)
    if not 0 <= index < usable:
        raise PreconditionError(f"Combination index {index} outside [0, {usable}) for C({n},{k}).")

    combo = []
    candidate = 0
    for slot in range(k):
        while True:
            block = math.comb(n - candidate - 1, k - slot - 1)
            if index < block:
                break
            index -= block
            candidate += 1
        combo.append(candidate)
        candidate += 1
    return tuple(combo)


def rank_combination(n: int, k: int, combo) -> int:
    """Lexicographic rank of a k-subset; inverse of unrank_combination."""
    combo = tuple(sorted(combo))
    if len(combo) != k or len(set(combo)) != k or any(not 0 <= c < n for c in combo):
        raise PreconditionError(f"{combo} is not a {k}-subset of range({n}).")

    rank = 0
    previous = -1
    for slot, chosen in enumerate(combo):
        for skipped in range(previous + 1, chosen):
            rank += math.comb(n - skipped - 1, k - slot - 1)
        previous = chosen

    usable = 1 << floor_log2_comb(n, k)
    if rank >= usable:
        raise UnaddressablePatternError(
            f"Combination {combo} has rank {rank}, only {usable} patterns of C({n},{k}) are addressable."
        )
    return rank


# --- Frame bit layout ---

@dataclass(frozen=True)
class SlotFields:
    antenna_real_field: str
    antenna_imag_field: str
    map_field: str
    symbol_field: str

    def join(self) -> str:
        return self.antenna_real_field + self.antenna_imag_field + self.map_field + self.symbol_field


@dataclass(frozen=True)
class FrameBits:
    time_field: str
    per_slot: tuple[SlotFields, ...] = field(default_factory=tuple)

    def join(self) -> str:
        return self.time_field + "".join(slot.join() for slot in self.per_slot)


def check_bits(bits: str, expected_length: int, what: str = "frame") -> str:
    if len(bits) != expected_length:
        raise LengthMismatchError(f"{what} needs {expected_length} bits, got {len(bits)}.")
    if set(bits) - {"0", "1"}:
        raise PreconditionError(f"Not a bit string: {bits!r}")
    return bits


def split_slot_bits(cfg: SchemeConfig, slot_bits: str) -> SlotFields:
    """Splits one slot's beta bits into antenna-real, antenna-imag, MAP and symbol fields."""
    check_bits(slot_bits, bit_budget(cfg).beta, what="slot")
    a = cfg.antenna_index_bits
    a_imag = a if cfg.quadrature else 0
    m = cfg.m_rf
    return SlotFields(
        antenna_real_field=slot_bits[:a],
        antenna_imag_field=slot_bits[a:a + a_imag],
        map_field=slot_bits[a + a_imag:a + a_imag + m],
        symbol_field=slot_bits[a + a_imag + m:],
    )


def partition_bits(cfg: SchemeConfig, raw: str) -> FrameBits:
    """Splits a frame payload into its time field and per-slot fields."""
    budget = bit_budget(cfg)
    check_bits(raw, budget.frame_bits)
    offset = budget.time_bits
    slots = []
    for _ in range(cfg.t_active):
        slots.append(split_slot_bits(cfg, raw[offset:offset + budget.beta]))
        offset += budget.beta
    return FrameBits(time_field=raw[:budget.time_bits], per_slot=tuple(slots))


def field_value(bits: str) -> int:
    return int(bits, 2) if bits else 0


def random_bits(rng: np.random.Generator, length: int) -> str:
    """Uniform random payload of the given length."""
    draws = rng.integers(0, 2, size=length, dtype=np.uint8)
    return (draws + ord("0")).tobytes().decode("ascii")


def hamming_distance(a: str, b: str) -> int:
    if len(a) != len(b):
        raise LengthMismatchError(f"Cannot compare bit strings of length {len(a)} and {len(b)}.")
    return sum(x != y for x, y in zip(a, b))


# --- Named scheme families ---

@dataclass(frozen=True)
class SchemeFamily:
    name: str
    quadrature: bool
    time_indexed: bool
    mirror_indexed: bool
    antenna_indexed: bool = True
    single_active: bool = False


SCHEME_FAMILIES = {
    family.name: family
    for family in (
        SchemeFamily("sm", quadrature=False, time_indexed=False, mirror_indexed=False, single_active=True),
        SchemeFamily("gsm", quadrature=False, time_indexed=False, mirror_indexed=False),
        SchemeFamily("qsm", quadrature=True, time_indexed=False, mirror_indexed=False, single_active=True),
        SchemeFamily("gqsm", quadrature=True, time_indexed=False, mirror_indexed=False),
        SchemeFamily("mbm", quadrature=False, time_indexed=False, mirror_indexed=True, antenna_indexed=False),
        SchemeFamily("gsm-mbm", quadrature=False, time_indexed=False, mirror_indexed=True),
        SchemeFamily("gqsm-mbm", quadrature=True, time_indexed=False, mirror_indexed=True),
        SchemeFamily("ti-sm", quadrature=False, time_indexed=True, mirror_indexed=False, single_active=True),
        SchemeFamily("ti-gsm", quadrature=False, time_indexed=True, mirror_indexed=False),
        SchemeFamily("ti-qsm", quadrature=True, time_indexed=True, mirror_indexed=False, single_active=True),
        SchemeFamily("ti-gqsm", quadrature=True, time_indexed=True, mirror_indexed=False),
        SchemeFamily("ti-mbm", quadrature=False, time_indexed=True, mirror_indexed=True, antenna_indexed=False),
        SchemeFamily("ti-gsm-mbm", quadrature=False, time_indexed=True, mirror_indexed=True),
        SchemeFamily("ti-qsm-mbm", quadrature=True, time_indexed=True, mirror_indexed=True, single_active=True),
        SchemeFamily("ti-gqsm-mbm", quadrature=True, time_indexed=True, mirror_indexed=True),
    )
}


def get_family(name: str) -> SchemeFamily:
    try:
        return SCHEME_FAMILIES[name.lower()]
    except KeyError:
        raise ConfigError(
            f"Unknown scheme '{name}'. Known schemes: {', '.join(sorted(SCHEME_FAMILIES))}"
        ) from None


def make_scheme(name: str, n_tx: int = 1, n_active: int = 1, m_rf: int = 0, t_total: int = 1,
                t_active: int = 1, mod_order: int = 2, taps: int = 1,
                constellation_kind: ConstellationKind = ConstellationKind.PSK) -> SchemeConfig:
    """Builds a SchemeConfig and checks it against the named family's constraints."""
    family = get_family(name)
    if not family.time_indexed and (t_total, t_active) != (1, 1):
        raise ConfigError(f"{family.name} does not index time slots; it needs t_total = t_active = 1.")
    if not family.mirror_indexed and m_rf != 0:
        raise ConfigError(f"{family.name} has no RF mirrors; it needs m_rf = 0.")
    if not family.antenna_indexed and (n_tx, n_active) != (1, 1):
        raise ConfigError(f"{family.name} uses a single MBM transmit unit; it needs n_tx = n_active = 1.")
    if family.single_active and n_active != 1:
        raise ConfigError(f"{family.name} activates one antenna per component; it needs n_active = 1.")
    if family.mirror_indexed and m_rf < 1:
        raise ConfigError(f"{family.name} indexes RF mirrors; it needs m_rf >= 1.")
    return SchemeConfig(
        n_tx=n_tx, n_active=n_active, m_rf=m_rf, t_total=t_total, t_active=t_active,
        mod_order=mod_order, taps=taps, quadrature=family.quadrature,
        constellation_kind=constellation_kind,
    )
