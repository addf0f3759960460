"""
Bundled scheme configurations for the rate figure and the BER comparisons.

Every BER preset carries 4 bits per channel use. Time-indexed presets use
T = 4 signalling slots with T_a = 2 active ones, so each frame holds 16 bits.
Quadrature presets avoid BPSK, whose zero imaginary part would leave the
imaginary-part antenna index undetectable.
"""

from dataclasses import dataclass

import pandas as pd

from src.constellation import ConstellationKind
from src.detector import ml_complexity
from src.errors import ConfigError
from src.scheme import SchemeConfig, achieved_rate, bit_budget, get_family, make_scheme
from src.simulator import CeeMode, EnergyNormalization, SimPlan


@dataclass(frozen=True)
class CurvePreset:
    label: str
    cfg: SchemeConfig


@dataclass(frozen=True)
class FigurePreset:
    figure: str
    title: str
    curves: tuple[CurvePreset, ...]
    n_rx: int = 4
    snr_grid: tuple[float, ...] = ()
    n_rx_grid: tuple[int, ...] = ()
    cee: bool = False

    @property
    def sweeps_snr(self) -> bool:
        return not self.n_rx_grid

    def plan(self, curve: CurvePreset, cee_mode: CeeMode, master_seed: int = 0,
             max_frames: int = 2_000_000, target_bit_errors: int = 200, batch_size: int = 256,
             normalization: EnergyNormalization = EnergyNormalization.CHANNEL_USE) -> SimPlan:
        return SimPlan(
            cfg=curve.cfg, n_rx=self.n_rx, snr_grid=self.snr_grid, n_rx_grid=self.n_rx_grid,
            cee_mode=cee_mode, normalization=normalization, master_seed=master_seed, max_frames=max_frames,
            target_bit_errors=target_bit_errors, scheme=curve.label, batch_size=batch_size,
        )


def _curve(label: str, **params) -> CurvePreset:
    return CurvePreset(label=label, cfg=make_scheme(label, **params))


# GSM family, N_t = 5 and N_a = 2
GSM = _curve("gsm", n_tx=5, n_active=2, mod_order=2)
TI_GSM = _curve("ti-gsm", n_tx=5, n_active=2, t_total=4, t_active=2, mod_order=16,
                constellation_kind=ConstellationKind.QAM)
TI_MBM = _curve("ti-mbm", m_rf=6, t_total=4, t_active=2, mod_order=2)
TI_GSM_MBM = _curve("ti-gsm-mbm", n_tx=5, n_active=2, m_rf=3, t_total=4, t_active=2, mod_order=2)

# GQSM family, N_a = 2
GQSM = _curve("gqsm", n_tx=3, n_active=2, mod_order=4)
TI_GQSM = _curve("ti-gqsm", n_tx=4, n_active=2, t_total=4, t_active=2, mod_order=8)
TI_GQSM_MBM = _curve("ti-gqsm-mbm", n_tx=3, n_active=2, m_rf=3, t_total=4, t_active=2, mod_order=4)
GQSM_MBM = _curve("gqsm-mbm", n_tx=2, n_active=2, m_rf=2, mod_order=4)

SNR_GRID = tuple(float(s) for s in range(0, 22, 2))
CEE_SNR_GRID = tuple(float(s) for s in range(0, 26, 2))

BER_FIGURES = {
    preset.figure: preset
    for preset in (
        FigurePreset("fig3", "GSM family, perfect CSI", (GSM, TI_GSM, TI_MBM, TI_GSM_MBM), snr_grid=SNR_GRID),
        FigurePreset("fig4", "GQSM family, perfect CSI", (GQSM, TI_GQSM, TI_MBM, TI_GQSM_MBM), snr_grid=SNR_GRID),
        FigurePreset("fig5", "GSM family, estimation error equal to noise variance",
                     (GSM, TI_GSM, TI_GSM_MBM), snr_grid=CEE_SNR_GRID, cee=True),
        FigurePreset("fig6", "GQSM family, estimation error equal to noise variance",
                     (GQSM, TI_GQSM, TI_GQSM_MBM), snr_grid=CEE_SNR_GRID, cee=True),
        FigurePreset("fig7", "Receive antenna sweep at 6 dB with estimation error",
                     (TI_GQSM, GQSM_MBM, TI_GQSM_MBM), snr_grid=(6.0,),
                     n_rx_grid=tuple(range(2, 18, 2)), cee=True),
    )
}

# Rate figure: T = 128, BPSK, per-slot bit counts 3, 4 and 6 plus the flat GQSM-MBM line
RATE_FIGURE_T = 128
RATE_FIGURE_SCHEMES = {
    "ti-gqsm": make_scheme("ti-gqsm", n_tx=3, n_active=2, t_total=RATE_FIGURE_T, mod_order=2),
    "ti-mbm": make_scheme("ti-mbm", m_rf=3, t_total=RATE_FIGURE_T, mod_order=2),
    "ti-gqsm-mbm": make_scheme("ti-gqsm-mbm", n_tx=3, n_active=2, m_rf=3, t_total=RATE_FIGURE_T, mod_order=2),
    "gqsm-mbm": make_scheme("gqsm-mbm", n_tx=3, n_active=2, m_rf=3, mod_order=2),
}
RATE_FIGURE_TIME_INDEXED = {name: get_family(name).time_indexed for name in RATE_FIGURE_SCHEMES}

FIGURES = ("fig2",) + tuple(BER_FIGURES)


def get_figure(figure: str) -> FigurePreset:
    try:
        return BER_FIGURES[figure.lower()]
    except KeyError:
        raise ConfigError(f"Unknown figure '{figure}'. Known figures: {', '.join(FIGURES)}") from None


def rate_equation(cfg: SchemeConfig) -> str:
    """Human-readable evaluation of the frame bit count and the rate."""
    budget = bit_budget(cfg)
    q = 2 if cfg.quadrature else 1
    slot_terms = []
    if budget.antenna_bits_per_slot:
        prefix = "2*" if q == 2 else ""
        slot_terms.append(f"{prefix}floor(log2 C({cfg.n_tx},{cfg.n_active}))")
    if cfg.m_rf:
        slot_terms.append(f"{cfg.m_rf}")
    slot_terms.append(f"log2 {cfg.mod_order}")
    slot = " + ".join(slot_terms)
    if cfg.t_total == 1:
        head = slot
    else:
        head = f"floor(log2 C({cfg.t_total},{cfg.t_active})) + {cfg.t_active}*({slot})"
    return (f"{head} = {budget.time_bits} + {cfg.t_active}*{budget.beta} = {budget.frame_bits} bits"
            f" / {cfg.t_total + cfg.taps - 1} = {float(achieved_rate(cfg)):g} bpcu")


def preset_ledger() -> pd.DataFrame:
    """One row per (figure, curve) with the solved configuration and its rate."""
    rows = []
    for preset in BER_FIGURES.values():
        for curve in preset.curves:
            cfg = curve.cfg
            rows.append({
                "figure": preset.figure,
                "scheme": curve.label,
                "n_tx": cfg.n_tx,
                "n_active": cfg.n_active,
                "m_rf": cfg.m_rf,
                "t_total": cfg.t_total,
                "t_active": cfg.t_active,
                "mod_order": cfg.mod_order,
                "constellation": cfg.constellation_kind.value,
                "n_rx": preset.n_rx if preset.sweeps_snr else "sweep",
                "frame_bits": bit_budget(cfg).frame_bits,
                "rate_bpcu": float(achieved_rate(cfg)),
                "equation": rate_equation(cfg),
            })
    return pd.DataFrame(rows)


def complexity_ledger(n_rx: int = None) -> pd.DataFrame:
    rows = []
    for preset in BER_FIGURES.values():
        receive = n_rx or preset.n_rx
        for curve in preset.curves:
            rows.append({
                "figure": preset.figure,
                "scheme": curve.label,
                "n_rx": receive,
                "codewords": 1 << bit_budget(curve.cfg).frame_bits,
                "ml_complexity": ml_complexity(curve.cfg, receive),
            })
    return pd.DataFrame(rows)
