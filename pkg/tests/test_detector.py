import numpy as np
import pytest

from src.channel import NoiseModel, draw_channel, transmit
from src.constellation import ConstellationKind
from src.detector import metric, ml_complexity, ml_detect, ml_detect_materialized
from src.errors import ShapeError
from src.scheme import SchemeConfig, bit_budget, random_bits
from src.signal_builder import build_frame, codebook_matrix, codeword_bits, iter_codebook

# frame_bits: 10, 11, 8, 7
DETECTOR_CONFIGS = [
    SchemeConfig(n_tx=3, n_active=2, m_rf=1, t_total=4, t_active=2, mod_order=4, quadrature=False),
    SchemeConfig(n_tx=3, n_active=2, m_rf=1, t_total=3, t_active=2, mod_order=4),
    SchemeConfig(n_tx=1, n_active=1, m_rf=2, t_total=4, t_active=2, mod_order=2, quadrature=False),
    SchemeConfig(n_tx=4, n_active=2, m_rf=0, t_total=2, t_active=1, mod_order=16,
                 constellation_kind=ConstellationKind.QAM, quadrature=False, taps=2),
]


def _random_problem(cfg, n_rx, seed, sigma_n_sq=0.3):
    rng = np.random.default_rng(seed)
    channel = draw_channel(cfg, n_rx, rng)
    bits = random_bits(rng, bit_budget(cfg).frame_bits)
    y = transmit(channel, build_frame(cfg, bits), NoiseModel(sigma_n_sq), rng)
    return bits, y, channel.equivalent


@pytest.mark.parametrize("cfg", DETECTOR_CONFIGS[:3])
def test_noiseless_detection_is_exact_for_every_codeword(cfg):
    channel = draw_channel(cfg, 2, np.random.default_rng(1))
    for frame in iter_codebook(cfg):
        y = channel.equivalent @ frame.stacked
        result = ml_detect(cfg, y, channel.equivalent)
        assert result.bits == frame.source_bits
        assert result.metric == pytest.approx(0.0, abs=1e-18 * max(1.0, np.vdot(y, y).real) + 1e-20)


def test_zero_estimate_ties_to_codeword_zero():
    cfg = DETECTOR_CONFIGS[0]
    y = np.random.default_rng(2).standard_normal(cfg.t_total * 2) + 0j
    result = ml_detect(cfg, y, np.zeros((cfg.t_total * 2, cfg.frame_dim), dtype=complex))
    assert result.codeword_index == 0
    assert result.bits == "0" * bit_budget(cfg).frame_bits
    assert result.metric == pytest.approx(np.vdot(y, y).real)


@pytest.mark.parametrize("cfg", DETECTOR_CONFIGS)
def test_streaming_matches_materialized_oracle(cfg):
    codebook = codebook_matrix(cfg)
    for seed in range(250):
        _, y, h = _random_problem(cfg, n_rx=2, seed=seed)
        streamed = ml_detect(cfg, y, h)
        oracle = ml_detect_materialized(cfg, y, h, codebook=codebook)
        assert streamed.codeword_index == oracle.codeword_index
        assert streamed.metric == pytest.approx(oracle.metric, rel=1e-9)


@pytest.mark.parametrize("chunk_size", [1, 7, 64, 1 << 20])
def test_result_does_not_depend_on_chunking(chunk_size):
    cfg = DETECTOR_CONFIGS[1]
    _, y, h = _random_problem(cfg, n_rx=2, seed=99)
    assert ml_detect(cfg, y, h, chunk_size=chunk_size) == ml_detect(cfg, y, h)


def test_argmin_is_invariant_under_common_scaling():
    cfg = DETECTOR_CONFIGS[1]
    for seed in range(20):
        _, y, h = _random_problem(cfg, n_rx=3, seed=seed, sigma_n_sq=0.5)
        scale = 0.3 * np.exp(1j * 0.7 * (seed + 1))
        assert ml_detect(cfg, scale * y, scale * h).bits == ml_detect(cfg, y, h).bits


def test_detected_bits_reproduce_the_metric():
    cfg = DETECTOR_CONFIGS[0]
    _, y, h = _random_problem(cfg, n_rx=2, seed=5, sigma_n_sq=0.8)
    result = ml_detect(cfg, y, h)
    assert metric(y, h, build_frame(cfg, result.bits)) == pytest.approx(result.metric, rel=1e-9)
    assert result.bits == codeword_bits(cfg, result.codeword_index)


def test_sparse_metric_matches_dense_product():
    cfg = DETECTOR_CONFIGS[1]
    rng = np.random.default_rng(12)
    for _ in range(100):
        _, y, h = _random_problem(cfg, n_rx=2, seed=int(rng.integers(1 << 30)))
        frame = build_frame(cfg, random_bits(rng, bit_budget(cfg).frame_bits))
        residual = y - h @ frame.stacked
        assert metric(y, h, frame) == pytest.approx(np.vdot(residual, residual).real, rel=1e-10)


def test_metric_of_zero_observation():
    cfg = DETECTOR_CONFIGS[2]
    channel = draw_channel(cfg, 2, np.random.default_rng(4))
    frame = build_frame(cfg, codeword_bits(cfg, 77))
    hs = channel.equivalent @ frame.stacked
    y = np.zeros(cfg.t_total * 2, dtype=complex)
    assert metric(y, channel.equivalent, frame) == pytest.approx(np.vdot(hs, hs).real)


def test_shape_errors():
    cfg = DETECTOR_CONFIGS[0]
    h = np.zeros((cfg.t_total * 2, cfg.frame_dim), dtype=complex)
    with pytest.raises(ShapeError):
        ml_detect(cfg, np.zeros(cfg.t_total * 2 + 1), h)
    with pytest.raises(ShapeError):
        ml_detect(cfg, np.zeros(cfg.t_total * 2), h[:, :-1])
    with pytest.raises(ShapeError):
        metric(np.zeros(3), h, build_frame(cfg, codeword_bits(cfg, 0)))


def test_ml_complexity_worked_example():
    cfg = SchemeConfig(n_tx=4, n_active=2, m_rf=2, t_total=4, t_active=2, mod_order=2)
    assert ml_complexity(cfg, n_rx=4) == 2_097_152


def test_ml_complexity_single_slot():
    cfg = SchemeConfig(n_tx=3, n_active=2, m_rf=1, t_total=1, t_active=1, mod_order=4)
    assert ml_complexity(cfg, n_rx=2) == 3 ** 2 * 4 * 2 * 2


def test_ml_complexity_is_monotone():
    base = dict(n_tx=3, n_active=1, m_rf=1, t_total=4, t_active=2, mod_order=4)
    reference = ml_complexity(SchemeConfig(**base), 2)
    for name, value in (("n_tx", 4), ("mod_order", 8), ("m_rf", 2)):
        assert ml_complexity(SchemeConfig(**{**base, name: value}), 2) >= reference
    assert ml_complexity(SchemeConfig(**base), 3) >= reference
