import numpy as np
import pytest

from src.channel import (
    NoiseModel,
    corrupt_estimate,
    draw_channel,
    equivalent_matrix,
    snr_to_sigma,
    transmit,
)
from src.errors import PreconditionError, ShapeError
from src.scheme import SchemeConfig
from src.signal_builder import build_frame


def _cfg(t_total=1, t_active=1, taps=1, n_tx=2, m_rf=1):
    return SchemeConfig(n_tx=n_tx, n_active=1, m_rf=m_rf, t_total=t_total, t_active=t_active,
                        mod_order=4, taps=taps)


def test_single_block_equivalent_is_the_tap():
    channel = draw_channel(_cfg(), n_rx=3, rng=np.random.default_rng(0))
    np.testing.assert_array_equal(channel.equivalent, channel.taps[0])
    assert channel.n_rx == 3
    assert channel.error_variance == 0.0
    assert channel.estimate is channel.equivalent


def test_flat_channel_repeats_diagonal_blocks():
    cfg = _cfg(t_total=3)
    channel = draw_channel(cfg, n_rx=2, rng=np.random.default_rng(1))
    h = channel.equivalent
    rows, cols = 2, cfg.slot_dim
    for r in range(3):
        for c in range(3):
            block = h[r * rows:(r + 1) * rows, c * cols:(c + 1) * cols]
            expected = channel.taps[0] if r == c else np.zeros_like(block)
            np.testing.assert_array_equal(block, expected)


def test_two_tap_two_slot_structure():
    taps = np.arange(2 * 1 * 2, dtype=complex).reshape(2, 1, 2) + 1
    h = equivalent_matrix(taps, 2)
    expected = np.block([[taps[0], taps[1]], [taps[1], taps[0]]])
    np.testing.assert_array_equal(h, expected)


@pytest.mark.parametrize("n_taps, t_total", [(1, 4), (2, 3), (3, 6), (3, 3), (2, 6)])
def test_block_circulant_rule(n_taps, t_total):
    rng = np.random.default_rng(n_taps * 10 + t_total)
    taps = rng.standard_normal((n_taps, 2, 3)) + 1j * rng.standard_normal((n_taps, 2, 3))
    h = equivalent_matrix(taps, t_total)
    for r in range(t_total):
        for c in range(t_total):
            block = h[r * 2:(r + 1) * 2, c * 3:(c + 1) * 3]
            offset = (r - c) % t_total
            expected = taps[offset] if offset < n_taps else np.zeros((2, 3))
            np.testing.assert_array_equal(block, expected)


@pytest.mark.parametrize("taps", [1, 2, 4])
def test_tap_statistics(taps):
    """One realisation with many receive antennas gives 10^5 tap entries."""
    cfg = _cfg(taps=taps, n_tx=5, m_rf=2)
    n_rx = 100_000 // (taps * cfg.slot_dim) + 1
    channel = draw_channel(cfg, n_rx=n_rx, rng=np.random.default_rng(2))
    entries = channel.taps.ravel()
    assert np.mean(np.abs(entries) ** 2) == pytest.approx(1.0 / taps, rel=0.02)
    assert abs(np.mean(entries)) < 3 * np.sqrt(1.0 / taps / entries.size)


def test_draw_channel_is_reproducible():
    cfg = _cfg(t_total=2)
    first = draw_channel(cfg, 2, np.random.default_rng(42))
    second = draw_channel(cfg, 2, np.random.default_rng(42))
    np.testing.assert_array_equal(first.equivalent, second.equivalent)


def test_draw_channel_rejects_zero_receivers():
    with pytest.raises(PreconditionError):
        draw_channel(_cfg(), 0, np.random.default_rng(0))


def test_zero_error_variance_keeps_estimate_exact():
    channel = draw_channel(_cfg(t_total=2), 2, np.random.default_rng(3))
    corrupted = corrupt_estimate(channel, 0.0, np.random.default_rng(4))
    np.testing.assert_array_equal(corrupted.estimate, channel.equivalent)


def test_estimate_error_statistics():
    cfg = _cfg(n_tx=5, m_rf=2)
    channel = draw_channel(cfg, n_rx=5000, rng=np.random.default_rng(5))
    sigma_e_sq = 0.3
    corrupted = corrupt_estimate(channel, sigma_e_sq, np.random.default_rng(6))
    error = (corrupted.equivalent - corrupted.estimate).ravel()
    assert error.size >= 100_000
    assert np.var(error.real) == pytest.approx(sigma_e_sq, rel=0.02)
    assert np.var(error.imag) == pytest.approx(sigma_e_sq, rel=0.02)
    np.testing.assert_array_equal(corrupted.equivalent, channel.equivalent)
    assert corrupted.error_variance == sigma_e_sq


def test_negative_error_variance():
    channel = draw_channel(_cfg(), 2, np.random.default_rng(0))
    with pytest.raises(PreconditionError):
        corrupt_estimate(channel, -0.1, np.random.default_rng(0))


def test_noiseless_transmission_is_exact():
    cfg = _cfg(t_total=2)
    channel = draw_channel(cfg, 3, np.random.default_rng(7))
    frame = build_frame(cfg, "1" + "1" + "0" + "1" + "10")
    y = transmit(channel, frame, NoiseModel(0.0), np.random.default_rng(8))
    np.testing.assert_array_equal(y, channel.equivalent @ frame.stacked)


def test_noise_energy():
    cfg = _cfg(t_total=4, t_active=2)
    n_rx = 25_000
    channel = draw_channel(cfg, n_rx, np.random.default_rng(9))
    frame = build_frame(cfg, "0" * 12)
    sigma_n_sq = 0.2
    y = transmit(channel, frame, NoiseModel(sigma_n_sq), np.random.default_rng(10))
    noise = y - channel.equivalent @ frame.stacked
    assert np.vdot(noise, noise).real == pytest.approx(2 * sigma_n_sq * cfg.t_total * n_rx, rel=0.02)


def test_transmit_shape_mismatch():
    channel = draw_channel(_cfg(), 2, np.random.default_rng(0))
    frame = build_frame(_cfg(t_total=2), "0" * 6)
    with pytest.raises(ShapeError):
        transmit(channel, frame, NoiseModel(0.1), np.random.default_rng(0))


def test_negative_noise_variance():
    with pytest.raises(PreconditionError):
        NoiseModel(-1.0)


@pytest.mark.parametrize("snr_db, expected", [
    (0.0, 0.5),
    (10.0, 0.05),
    (6.0, 0.12559),
    (float("inf"), 0.0),
])
def test_snr_to_sigma(snr_db, expected):
    assert snr_to_sigma(snr_db) == pytest.approx(expected, abs=1e-5)
