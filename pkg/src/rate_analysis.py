"""
Closed-form achieved rates, rate-versus-active-slot sweeps and the optimal
number of active time slots.

Frame bit counts are exact integers (floor(log2 C) from big-integer
binomials); a rate is formed once, as a Fraction, at the end.
"""

import math
import os
from dataclasses import dataclass, replace
from fractions import Fraction

import pandas as pd

from src.logger import logger
from src.scheme import SchemeConfig, achieved_rate, bit_budget, floor_log2_comb


@dataclass(frozen=True)
class RateCurve:
    """
    Rate at every T_a in 1..T. ``plateau`` holds all maximisers; ``argmax`` is
    the plateau member closest to the continuous optimum t_opt (ties to the
    smaller T_a), since exact floors make the maximum flat over several T_a.
    """
    t_total: int
    taps: int
    beta: int
    t_active: tuple[int, ...]
    frame_bits: tuple[int, ...]
    argmax: int
    plateau: tuple[int, ...]
    t_opt: float

    @property
    def rates(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(bits, self.t_total + self.taps - 1) for bits in self.frame_bits)

    @property
    def max_rate(self) -> Fraction:
        return max(self.rates)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t_active": self.t_active,
            "frame_bits": self.frame_bits,
            "rate_bpcu": [float(rate) for rate in self.rates],
            "is_argmax": [t == self.argmax for t in self.t_active],
        })


def rate(cfg: SchemeConfig) -> float:
    """Achieved rate in bits per channel use."""
    return float(achieved_rate(cfg))


def t_opt(t_total: int, beta: int) -> float:
    """Continuous rate-maximising T_a = T * 2^beta / (1 + 2^beta)."""
    return float(Fraction(t_total * 2 ** beta, 1 + 2 ** beta))


def rate_bounds(t_total: int, t_active: int, beta: int) -> tuple[float, float]:
    """
    Real-valued bounds sandwiching the floored frame bits:
    log2 C + T_a beta - 1 < floor(log2 C) + T_a beta <= log2 C + T_a beta.
    """
    upper = math.log2(math.comb(t_total, t_active)) + t_active * beta
    return upper - 1.0, upper


def rate_sweep(cfg: SchemeConfig, t_total: int = None) -> RateCurve:
    """Sweeps T_a over 1..T with every other parameter of ``cfg`` fixed."""
    t_total = cfg.t_total if t_total is None else t_total
    return beta_sweep(t_total, bit_budget(cfg).beta, cfg.taps)


def beta_sweep(t_total: int, beta: int, taps: int = 1) -> RateCurve:
    """Rate curve of any scheme whose slots carry ``beta`` bits each."""
    t_values = tuple(range(1, t_total + 1))
    frame_bits = tuple(floor_log2_comb(t_total, t) + t * beta for t in t_values)

    best = max(frame_bits)
    plateau = tuple(t for t, bits in zip(t_values, frame_bits) if bits == best)
    optimum = t_opt(t_total, beta)
    argmax = min(plateau, key=lambda t: (abs(t - optimum), t))
    return RateCurve(
        t_total=t_total, taps=taps, beta=beta, t_active=t_values, frame_bits=frame_bits,
        argmax=argmax, plateau=plateau, t_opt=optimum,
    )


def beta_variants(n_tx: int, n_active: int, m_rf: int, mod_order: int) -> dict[str, int]:
    """Per-slot bit counts of the special cases of the time-indexed GQSM-MBM family."""
    log2_m = mod_order.bit_length() - 1
    antenna_bits = floor_log2_comb(n_tx, n_active)
    return {
        "ti-gqsm-mbm": 2 * antenna_bits + m_rf + log2_m,
        "ti-gqsm": 2 * antenna_bits + log2_m,
        "ti-mbm": m_rf + log2_m,
        "ti-gsm-mbm": antenna_bits + m_rf + log2_m,
        # single active antenna per component: log2(N_t^2 M) + m_RF
        "ti-qsm-mbm": 2 * floor_log2_comb(n_tx, 1) + log2_m + m_rf,
    }


class RateAnalyzer:
    """
    Builds rate-versus-T_a tables for several schemes and saves them for plotting.
    """
    def __init__(self, output_dir: str = None):
        self.output_dir = output_dir or os.path.join(os.path.dirname(__file__), '..', 'results')

    def curve_table(self, schemes: dict[str, SchemeConfig], t_total: int, time_indexed: dict[str, bool]) -> pd.DataFrame:
        """
        One column per scheme. Schemes without time indexing are evaluated at
        T = T_a = 1 and drawn as a constant line across all T_a rows.
        """
        table = pd.DataFrame({"t_active": range(1, t_total + 1)})
        for name, cfg in schemes.items():
            if time_indexed.get(name, True):
                curve = rate_sweep(cfg, t_total)
                table[name] = [float(r) for r in curve.rates]
                logger.info(f"[RateAnalyzer] {name}: beta={curve.beta}, argmax T_a={curve.argmax}, "
                            f"plateau={curve.plateau[0]}..{curve.plateau[-1]}, t_opt={curve.t_opt:.2f}, "
                            f"max rate={float(curve.max_rate):.4f} bpcu")
            else:
                constant = rate(replace(cfg, t_total=1, t_active=1))
                table[name] = constant
                logger.info(f"[RateAnalyzer] {name}: constant rate {constant:.4f} bpcu")
        return table

    def save(self, table: pd.DataFrame, stem: str) -> tuple[str, str]:
        """Writes ``<stem>.csv`` and a whitespace-separated ``<stem>.dat``."""
        os.makedirs(self.output_dir, exist_ok=True)
        csv_path = os.path.join(self.output_dir, f"{stem}.csv")
        dat_path = os.path.join(self.output_dir, f"{stem}.dat")
        table.to_csv(csv_path, index=False)
        write_dat(table, dat_path)
        logger.info(f"[RateAnalyzer] Rate table saved to {csv_path}")
        return csv_path, dat_path


def write_dat(table: pd.DataFrame, path: str) -> None:
    """gnuplot-friendly columns with a '#' header line."""
    with open(path, 'w') as f:
        f.write("# " + " ".join(str(c) for c in table.columns) + "\n")
        table.to_csv(f, sep=" ", header=False, index=False)
