"""
Rayleigh block-fading channel, frame-level equivalent matrix, AWGN and
imperfect channel estimates.

Variance convention: a "per-dimension" variance applies to the real and the
imaginary part separately, so a complex entry with per-dimension variance v
has complex variance 2v. Channel taps are specified by their complex variance.
"""

from dataclasses import dataclass

import numpy as np

from src.errors import PreconditionError, ShapeError
from src.scheme import SchemeConfig
from src.signal_builder import TransmitFrame


@dataclass(frozen=True)
class ChannelRealization:
    taps: np.ndarray          # (L, N_r, N_t * 2^m_RF)
    equivalent: np.ndarray    # (T * N_r, T * N_t * 2^m_RF)
    estimate: np.ndarray      # same shape as equivalent
    error_variance: float = 0.0

    @property
    def n_rx(self) -> int:
        return self.taps.shape[1]


@dataclass(frozen=True)
class NoiseModel:
    sigma_n_sq: float

    def __post_init__(self):
        if self.sigma_n_sq < 0:
            raise PreconditionError(f"Noise variance must be non-negative, got {self.sigma_n_sq}.")


def complex_gaussian(rng: np.random.Generator, shape, per_dim_variance: float) -> np.ndarray:
    """i.i.d. zero-mean circular Gaussian entries with the given per-dimension variance."""
    scale = np.sqrt(per_dim_variance)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def equivalent_matrix(taps: np.ndarray, t_total: int) -> np.ndarray:
    """
    Block-circulant frame matrix: block (r, c) is tap (r - c) mod T when that
    offset is below L, else zero.
    """
    n_taps, n_rx, slot_dim = taps.shape
    matrix = np.zeros((t_total * n_rx, t_total * slot_dim), dtype=complex)
    for r in range(t_total):
        for c in range(t_total):
            offset = (r - c) % t_total
            if offset < n_taps:
                matrix[r * n_rx:(r + 1) * n_rx, c * slot_dim:(c + 1) * slot_dim] = taps[offset]
    return matrix


def draw_channel(cfg: SchemeConfig, n_rx: int, rng: np.random.Generator) -> ChannelRealization:
    """One quasi-static frame realisation, CN(0, 1/L) per tap entry, perfect estimate."""
    if n_rx < 1:
        raise PreconditionError(f"n_rx must be positive, got {n_rx}.")
    taps = complex_gaussian(rng, (cfg.taps, n_rx, cfg.slot_dim), per_dim_variance=0.5 / cfg.taps)
    equivalent = _frozen(equivalent_matrix(taps, cfg.t_total))
    return ChannelRealization(taps=_frozen(taps), equivalent=equivalent, estimate=equivalent, error_variance=0.0)


def corrupt_estimate(channel: ChannelRealization, sigma_e_sq: float, rng: np.random.Generator) -> ChannelRealization:
    """Receiver estimate H - E, E with per-dimension variance sigma_e_sq; the truth is untouched."""
    if sigma_e_sq < 0:
        raise PreconditionError(f"Estimation error variance must be non-negative, got {sigma_e_sq}.")
    if sigma_e_sq == 0:
        return ChannelRealization(channel.taps, channel.equivalent, channel.equivalent, 0.0)
    error = complex_gaussian(rng, channel.equivalent.shape, per_dim_variance=sigma_e_sq)
    return ChannelRealization(
        taps=channel.taps,
        equivalent=channel.equivalent,
        estimate=_frozen(channel.equivalent - error),
        error_variance=float(sigma_e_sq),
    )


def transmit(channel: ChannelRealization, frame: TransmitFrame, noise: NoiseModel,
             rng: np.random.Generator) -> np.ndarray:
    """y = H s + n over the whole frame."""
    stacked = np.asarray(frame.stacked)
    if channel.equivalent.shape[1] != stacked.size:
        raise ShapeError(
            f"Channel expects a transmit vector of length {channel.equivalent.shape[1]}, got {stacked.size}."
        )
    rows = channel.equivalent.shape[0]
    received = channel.equivalent @ stacked
    if noise.sigma_n_sq > 0:
        received = received + complex_gaussian(rng, rows, per_dim_variance=noise.sigma_n_sq)
    return received


def snr_to_sigma(snr_db: float) -> float:
    """Per-dimension noise variance for Es/N0 = snr_db with unit symbol energy."""
    return 10.0 ** (-snr_db / 10.0) / 2.0
