"""
Turns frame payloads into stacked effective transmit vectors (codewords) and
enumerates the frame codebook searched by the detector.

Layout of one slot vector: position ``k * 2^m_RF + map_index`` belongs to MBM
transmit unit ``k`` in mirror state ``map_index``. The real part of the symbol
is split as 1/sqrt(N_a) over the real-part antennas, the imaginary part over
the imaginary-part antennas; one MAP is shared by every active unit in a slot.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from src.constellation import map_symbol
from src.errors import CodebookTooLargeError
from src.scheme import (
    SchemeConfig,
    bit_budget,
    field_value,
    partition_bits,
    split_slot_bits,
    unrank_combination,
)

DEFAULT_CODEBOOK_CAP = 24


@dataclass(frozen=True)
class SlotSignal:
    antenna_real: tuple[int, ...]
    antenna_imag: tuple[int, ...]
    map_index: int
    symbol: complex
    vector: np.ndarray


@dataclass(frozen=True)
class TransmitFrame:
    active_slots: tuple[int, ...]
    slots: tuple[SlotSignal, ...]
    stacked: np.ndarray
    source_bits: str


def slot_vector(cfg: SchemeConfig, antenna_real, antenna_imag, map_index: int, symbol: complex) -> np.ndarray:
    """Places a symbol on its antennas and mirror state; overlapping parts add up."""
    vector = np.zeros(cfg.slot_dim, dtype=complex)
    scale = 1.0 / np.sqrt(cfg.n_active)
    states = cfg.mirror_states
    for k in antenna_real:
        vector[k * states + map_index] += symbol.real * scale
    for k in antenna_imag:
        vector[k * states + map_index] += 1j * symbol.imag * scale
    return vector


def build_slot(cfg: SchemeConfig, slot_bits: str) -> SlotSignal:
    """Builds one active slot's signal from its beta bits."""
    fields = split_slot_bits(cfg, slot_bits)
    antenna_real = unrank_combination(cfg.n_tx, cfg.n_active, field_value(fields.antenna_real_field))
    if cfg.quadrature:
        antenna_imag = unrank_combination(cfg.n_tx, cfg.n_active, field_value(fields.antenna_imag_field))
    else:
        antenna_imag = antenna_real
    map_index = field_value(fields.map_field)
    symbol = map_symbol(cfg.constellation, fields.symbol_field)
    return SlotSignal(
        antenna_real=antenna_real,
        antenna_imag=antenna_imag,
        map_index=map_index,
        symbol=symbol,
        vector=slot_vector(cfg, antenna_real, antenna_imag, map_index, symbol),
    )


def build_frame(cfg: SchemeConfig, bits: str) -> TransmitFrame:
    """Maps a frame payload to its codeword; inactive slots carry exact zeros."""
    frame_bits = partition_bits(cfg, bits)
    active_slots = unrank_combination(cfg.t_total, cfg.t_active, field_value(frame_bits.time_field))
    slots = tuple(build_slot(cfg, fields.join()) for fields in frame_bits.per_slot)

    stacked = np.zeros(cfg.frame_dim, dtype=complex)
    for position, slot in zip(active_slots, slots):
        stacked[position * cfg.slot_dim:(position + 1) * cfg.slot_dim] = slot.vector
    return TransmitFrame(active_slots=active_slots, slots=slots, stacked=stacked, source_bits=bits)


def codeword_bits(cfg: SchemeConfig, index: int) -> str:
    """The payload whose integer value is ``index`` (codebook enumeration order)."""
    frame_bits = bit_budget(cfg).frame_bits
    return format(index, f"0{frame_bits}b") if frame_bits else ""


def iter_codebook(cfg: SchemeConfig) -> Iterator[TransmitFrame]:
    """Streams every codeword in increasing payload order, without a size cap."""
    for index in range(2 ** bit_budget(cfg).frame_bits):
        yield build_frame(cfg, codeword_bits(cfg, index))


def enumerate_codebook(cfg: SchemeConfig, cap: int = DEFAULT_CODEBOOK_CAP) -> list[TransmitFrame]:
    """Materialises all 2^frame_bits codewords; use iter_codebook beyond the cap."""
    frame_bits = bit_budget(cfg).frame_bits
    if frame_bits > cap:
        raise CodebookTooLargeError(
            f"Codebook has 2^{frame_bits} codewords (cap 2^{cap}); use streaming enumeration."
        )
    return list(iter_codebook(cfg))


def codebook_matrix(cfg: SchemeConfig, cap: int = DEFAULT_CODEBOOK_CAP) -> np.ndarray:
    """All codewords as rows of a dense (2^frame_bits, T * N_t * 2^m_RF) matrix."""
    return np.array([frame.stacked for frame in enumerate_codebook(cfg, cap)]).reshape(-1, cfg.frame_dim)


@lru_cache(maxsize=None)
def slot_alphabet(cfg: SchemeConfig) -> np.ndarray:
    """Every slot vector indexed by the integer value of its beta bits: shape (2^beta, N_t * 2^m_RF)."""
    beta = bit_budget(cfg).beta
    alphabet = np.array([
        build_slot(cfg, format(value, f"0{beta}b")).vector
        for value in range(2 ** beta)
    ]).reshape(-1, cfg.slot_dim)
    alphabet.setflags(write=False)
    return alphabet


@lru_cache(maxsize=None)
def activation_patterns(cfg: SchemeConfig) -> np.ndarray:
    """Active slot positions per time-field value: shape (2^time_bits, T_a)."""
    time_bits = bit_budget(cfg).time_bits
    patterns = np.array([
        unrank_combination(cfg.t_total, cfg.t_active, value) for value in range(2 ** time_bits)
    ], dtype=np.int64).reshape(-1, cfg.t_active)
    patterns.setflags(write=False)
    return patterns
