"""
Joint maximum-likelihood detection over the full frame codebook.

The search never forms the dense product H @ s per codeword. Each column
block of H (one per slot position) is multiplied once with the slot alphabet,
and every codeword's image H @ s is the sum of T_a of those per-slot images.
Codewords are visited in chunks of consecutive payload values and reduced by
(metric, index), so the result does not depend on the chunk size.
"""

from dataclasses import dataclass

import numpy as np

from src.errors import ShapeError
from src.scheme import SchemeConfig, bit_budget
from src.signal_builder import (
    DEFAULT_CODEBOOK_CAP,
    TransmitFrame,
    activation_patterns,
    codebook_matrix,
    codeword_bits,
    slot_alphabet,
)

DEFAULT_CHUNK_SIZE = 1 << 14


@dataclass(frozen=True)
class DetectionResult:
    bits: str
    metric: float
    codeword_index: int


def _check_shapes(cfg: SchemeConfig, y: np.ndarray, h_est: np.ndarray) -> None:
    if h_est.ndim != 2 or y.ndim != 1:
        raise ShapeError(f"Expected a vector y and a matrix H, got shapes {y.shape} and {h_est.shape}.")
    if h_est.shape[1] != cfg.frame_dim:
        raise ShapeError(f"H has {h_est.shape[1]} columns, the scheme needs {cfg.frame_dim}.")
    if h_est.shape[0] != y.size:
        raise ShapeError(f"H has {h_est.shape[0]} rows but y has {y.size} entries.")
    if y.size % cfg.t_total:
        raise ShapeError(f"Received length {y.size} is not a multiple of T = {cfg.t_total}.")


def metric(y: np.ndarray, h_est: np.ndarray, frame: TransmitFrame) -> float:
    """||y - H s||^2 using only the nonzero columns of the codeword."""
    y = np.asarray(y)
    h_est = np.asarray(h_est)
    stacked = np.asarray(frame.stacked)
    if h_est.shape != (y.size, stacked.size):
        raise ShapeError(f"H of shape {h_est.shape} does not map a length-{stacked.size} codeword onto y.")
    support = np.flatnonzero(stacked)
    residual = y - h_est[:, support] @ stacked[support]
    return float(np.vdot(residual, residual).real)


def slot_images(cfg: SchemeConfig, h_est: np.ndarray) -> np.ndarray:
    """H-images of every slot alphabet entry at every slot position: shape (T, 2^beta, rows)."""
    rows = h_est.shape[0]
    blocks = h_est.reshape(rows, cfg.t_total, cfg.slot_dim).transpose(1, 0, 2)
    return np.einsum("trd,sd->tsr", blocks, slot_alphabet(cfg))


def ml_detect(cfg: SchemeConfig, y: np.ndarray, h_est: np.ndarray,
              chunk_size: int = DEFAULT_CHUNK_SIZE) -> DetectionResult:
    """Exhaustive ML search; ties go to the lowest codeword index."""
    y = np.asarray(y, dtype=complex)
    h_est = np.asarray(h_est, dtype=complex)
    _check_shapes(cfg, y, h_est)

    budget = bit_budget(cfg)
    images = slot_images(cfg, h_est)
    patterns = activation_patterns(cfg)
    slot_shift = budget.beta
    slot_mask = (1 << budget.beta) - 1
    pattern_shift = cfg.t_active * budget.beta

    best_metric = np.inf
    best_index = 0
    total = 1 << budget.frame_bits
    for start in range(0, total, chunk_size):
        indices = np.arange(start, min(start + chunk_size, total), dtype=np.int64)
        positions = patterns[indices >> pattern_shift]
        received = np.zeros((indices.size, y.size), dtype=complex)
        for j in range(cfg.t_active):
            symbols = (indices >> ((cfg.t_active - 1 - j) * slot_shift)) & slot_mask
            received += images[positions[:, j], symbols]
        residual = y[np.newaxis, :] - received
        metrics = (residual.real ** 2 + residual.imag ** 2).sum(axis=1)
        k = int(np.argmin(metrics))
        if metrics[k] < best_metric:
            best_metric = float(metrics[k])
            best_index = start + k

    return DetectionResult(
        bits=codeword_bits(cfg, best_index),
        metric=best_metric,
        codeword_index=best_index,
    )


def ml_detect_materialized(cfg: SchemeConfig, y: np.ndarray, h_est: np.ndarray,
                           codebook: np.ndarray = None, cap: int = DEFAULT_CODEBOOK_CAP) -> DetectionResult:
    """Reference ML detector over the dense codebook matrix; same tie rule."""
    y = np.asarray(y, dtype=complex)
    h_est = np.asarray(h_est, dtype=complex)
    _check_shapes(cfg, y, h_est)
    if codebook is None:
        codebook = codebook_matrix(cfg, cap)
    residual = y[np.newaxis, :] - codebook @ h_est.T
    metrics = np.sum(np.abs(residual) ** 2, axis=1)
    index = int(np.argmin(metrics))
    return DetectionResult(bits=codeword_bits(cfg, index), metric=float(metrics[index]), codeword_index=index)


def ml_complexity(cfg: SchemeConfig, n_rx: int) -> float:
    """
    Order-of-magnitude ML search cost
    T^(T_a+1) * (N_t^2 M 2^m_RF)^T_a * N_r / T_a^(T_a-1). Advisory only.
    """
    numerator = cfg.t_total ** (cfg.t_active + 1) \
        * (cfg.n_tx ** 2 * cfg.mod_order * cfg.mirror_states) ** cfg.t_active * n_rx
    return numerator / cfg.t_active ** (cfg.t_active - 1)
