"""Command-line entry point: rate analysis, BER sweeps and figure reproduction."""

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

# Add the project root to the Python path
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, project_root)

import pandas as pd

from src.config import Config, config_path
from src.detector import ml_complexity
from src.errors import ConfigError
from src.logger import logger, set_console_level
from src.notifier import Notifier
from src.presets import (
    FIGURES,
    RATE_FIGURE_SCHEMES,
    RATE_FIGURE_T,
    RATE_FIGURE_TIME_INDEXED,
    complexity_ledger,
    get_figure,
    preset_ledger,
    rate_equation,
)
from src.rate_analysis import RateAnalyzer, beta_sweep, beta_variants, rate_sweep, t_opt, write_dat
from src.scheme import bit_budget, get_family
from src.simulator import BerSimulator, CeeMode, EnergyNormalization, SimPlan, degradation_db, required_snr

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

TARGET_BER = 1e-3

BETA_CONFIG_KEYS = {
    "nt": "n_tx", "na": "n_active", "mrf": "m_rf", "m": "mod_order",
    "t": "t_total", "ta": "t_active", "l": "taps",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help="INI configuration file (default: config.ini)")
    common.add_argument('--out', help="Results directory")
    common.add_argument('--seed', type=int)
    common.add_argument('--workers', type=int)
    common.add_argument('--max-frames', type=int, dest='max_frames')
    common.add_argument('--target-errors', type=int, dest='target_errors')
    common.add_argument('--cee', choices=[mode.value for mode in CeeMode])
    common.add_argument('--sigma-e-sq', type=float, dest='sigma_e_sq')
    common.add_argument('--normalization', choices=[mode.value for mode in EnergyNormalization],
                        help="Transmit energy per channel use (default) or per active symbol")
    common.add_argument('--resume', action='store_true', help="Continue an interrupted sweep")
    common.add_argument('--quiet', action='store_true', help="Only warnings and errors on the console")

    scheme = common.add_argument_group('scheme')
    scheme.add_argument('--scheme')
    scheme.add_argument('--nt', type=int)
    scheme.add_argument('--na', type=int)
    scheme.add_argument('--mrf', type=int)
    scheme.add_argument('--T', type=int, dest='t_total')
    scheme.add_argument('--Ta', type=int, dest='t_active')
    scheme.add_argument('--M', type=int, dest='mod_order')
    scheme.add_argument('--L', type=int, dest='taps')
    scheme.add_argument('--constellation', choices=['psk', 'qam', 'PSK', 'QAM'])
    scheme.add_argument('--nr', type=int)
    scheme.add_argument('--snr', help="SNR grid in dB, start:step:stop or a comma list")
    scheme.add_argument('--nr-grid', dest='nr_grid', help="Receive antenna grid, start:step:stop or a comma list")
    scheme.add_argument('--beta-config', dest='beta_config', help="Compact scheme, e.g. Nt=3,Na=2,mrf=3,M=2")

    parser = argparse.ArgumentParser(prog='indexmod-sim', description=__doc__)
    commands = parser.add_subparsers(dest='command', required=True)
    commands.add_parser('rate', parents=[common], help="Rate versus active time slots")
    topt = commands.add_parser('topt', parents=[common], help="Optimal number of active time slots")
    topt.add_argument('--beta', type=int, help="Per-slot bit count; overrides the scheme")
    commands.add_parser('ber', parents=[common], help="BER versus SNR")
    commands.add_parser('nrsweep', parents=[common], help="BER versus receive antennas at one SNR")
    complexity = commands.add_parser('complexity', parents=[common], help="ML search complexity")
    complexity.add_argument('--all-presets', action='store_true', dest='all_presets')
    figure = commands.add_parser('reproduce-figure', parents=[common], help="Run the bundled figure presets")
    figure.add_argument('figure', choices=FIGURES)
    commands.add_parser('presets', parents=[common], help="List the bundled presets with their rate equations")
    return parser


def parse_beta_config(text: str) -> dict:
    """'Nt=3,Na=2,mrf=3,M=2' -> {'n_tx': 3, 'n_active': 2, 'm_rf': 3, 'mod_order': 2}"""
    values = {}
    for item in text.split(','):
        if not item.strip():
            continue
        key, sep, value = item.partition('=')
        name = BETA_CONFIG_KEYS.get(key.strip().lower())
        if not sep or name is None:
            raise ConfigError(f"Cannot read '{item}' in --beta-config; known keys: Nt, Na, mrf, M, T, Ta, L.")
        try:
            values[name] = int(value)
        except ValueError:
            raise ConfigError(f"--beta-config value for {key.strip()} must be an integer, got '{value}'.") from None
    return values


def resolve_config(args: argparse.Namespace) -> Config:
    """Loads the INI file and applies command-line overrides through the Config setters."""
    settings = Config(args.config) if args.config else Config(config_path)
    if args.beta_config:
        for name, value in parse_beta_config(args.beta_config).items():
            setattr(settings, name, value)

    overrides = {
        'scheme': args.scheme, 'n_tx': args.nt, 'n_active': args.na, 'm_rf': args.mrf,
        't_total': args.t_total, 't_active': args.t_active, 'mod_order': args.mod_order,
        'taps': args.taps, 'constellation': args.constellation, 'n_rx': args.nr,
        'snr_grid': args.snr, 'n_rx_grid': args.nr_grid, 'cee_mode': args.cee,
        'sigma_e_sq': args.sigma_e_sq, 'seed': args.seed, 'workers': args.workers,
        'max_frames': args.max_frames, 'target_bit_errors': args.target_errors,
        'normalization': args.normalization,
        # relative to where the command runs, unlike a relative INI entry
        'results_dir': os.path.abspath(args.out) if args.out else None,
    }
    for name, value in overrides.items():
        if value is not None:
            setattr(settings, name, value)
    return settings


def echo_config(settings: Config, stem: str) -> str:
    path = settings.save(os.path.join(settings.results_dir, f"{stem}_config.ini"))
    logger.info(f"Resolved configuration written to {path}")
    return path


def _is_time_indexed(settings: Config) -> bool:
    if settings.scheme == 'custom':
        return settings.t_total > 1
    return get_family(settings.scheme).time_indexed


def cmd_rate(settings: Config) -> pd.DataFrame:
    """
    Rate versus T_a. Schemes without time indexing give a constant line over
    the same T_a rows.
    """
    logger.info("--- Starting Rate Analysis ---")
    display_t = settings.t_total
    analyzer = RateAnalyzer(output_dir=settings.results_dir)
    name = settings.scheme

    if not _is_time_indexed(settings):
        cfg = settings.scheme_config(t_total=1, t_active=1)
        table = analyzer.curve_table({name: cfg}, display_t, {name: False})
    else:
        curve = rate_sweep(settings.scheme_config(t_active=1))
        table = curve.to_frame()
        logger.info(f"[RateAnalyzer] {name}: beta={curve.beta}, argmax T_a={curve.argmax} "
                    f"(plateau {curve.plateau[0]}..{curve.plateau[-1]}), t_opt={curve.t_opt:.2f}, "
                    f"max rate={float(curve.max_rate):.4f} bpcu")

    analyzer.save(table, f"rate_{name}_T{display_t}")
    echo_config(settings, f"rate_{name}_T{display_t}")
    print(table.to_string(index=False))
    logger.info("--- Rate Analysis Finished ---")
    return table


def cmd_topt(settings: Config, beta_override: int = None) -> pd.DataFrame:
    """
    t_opt with the integer plateau for the configured scheme (or a bare beta)
    and for each special case of the time-indexed family.
    """
    cfg = settings.scheme_config(t_active=1)
    beta = bit_budget(cfg).beta if beta_override is None else beta_override
    if beta < 0:
        raise ConfigError(f"beta must be non-negative, got {beta}.")

    variants = {"configured": beta}
    if beta_override is None:
        variants.update(beta_variants(cfg.n_tx, cfg.n_active, cfg.m_rf, cfg.mod_order))

    rows = []
    for label, value in variants.items():
        curve = beta_sweep(cfg.t_total, value, cfg.taps)
        rows.append({
            "variant": label,
            "beta": value,
            "t_opt": round(curve.t_opt, 4),
            "argmax": curve.argmax,
            "plateau": f"{curve.plateau[0]}..{curve.plateau[-1]}",
            "max_rate_bpcu": float(curve.max_rate),
        })

    table = pd.DataFrame(rows)
    logger.info(f"[RateAnalyzer] T={cfg.t_total}, beta={beta}: t_opt={t_opt(cfg.t_total, beta):.2f}")
    echo_config(settings, f"topt_T{cfg.t_total}")
    print(table.to_string(index=False))
    return table


def run_ber_pipeline(settings: Config, plan: SimPlan, resume: bool = False, stem: str = None):
    """
    Runs one sweep with persistence, echoing the resolved configuration.
    """
    notifier = Notifier(settings_obj=settings)
    simulator = BerSimulator(plan, workers=settings.workers, output_dir=settings.results_dir,
                             notifier=notifier, stem=stem)
    try:
        result = simulator.run_sweep(resume=resume)
    except Exception as e:
        logger.error(f"An error occurred during the BER pipeline: {e}")
        raise
    echo_config(settings, simulator.stem)
    write_dat(result.to_frame()[["abscissa", "ber", "bit_errors", "total_bits"]],
              os.path.join(settings.results_dir, f"{simulator.stem}.dat"))
    print(result.to_frame().to_string(index=False))
    return result


def cmd_ber(settings: Config, resume: bool = False):
    settings.n_rx_grid = ""
    return run_ber_pipeline(settings, settings.sim_plan(), resume)


def cmd_nrsweep(settings: Config, resume: bool = False):
    if not settings.n_rx_grid:
        raise ConfigError("nrsweep needs a receive antenna grid (--nr-grid or [SIMULATION] n_rx_grid).")
    return run_ber_pipeline(settings, settings.sim_plan(), resume)


def cmd_complexity(settings: Config, all_presets: bool = False) -> pd.DataFrame:
    if all_presets:
        table = complexity_ledger()
    else:
        cfg = settings.scheme_config()
        table = pd.DataFrame([{
            "scheme": settings.scheme,
            "n_rx": settings.n_rx,
            "codewords": 1 << bit_budget(cfg).frame_bits,
            "ml_complexity": ml_complexity(cfg, settings.n_rx),
            "materialisable": bit_budget(cfg).frame_bits <= settings.codebook_cap,
        }])
    echo_config(settings, "complexity")
    print(table.to_string(index=False))
    return table


def cmd_presets(settings: Config) -> pd.DataFrame:
    table = preset_ledger()
    os.makedirs(settings.results_dir, exist_ok=True)
    path = os.path.join(settings.results_dir, "preset_ledger.csv")
    table.to_csv(path, index=False)
    logger.info(f"Preset ledger saved to {path}")
    echo_config(settings, "presets")
    print(table.to_string(index=False))
    return table


def reproduce_rate_figure(settings: Config) -> pd.DataFrame:
    logger.info("--- Starting Rate Figure ---")
    analyzer = RateAnalyzer(output_dir=settings.results_dir)
    table = analyzer.curve_table(RATE_FIGURE_SCHEMES, RATE_FIGURE_T, RATE_FIGURE_TIME_INDEXED)
    for name, cfg in RATE_FIGURE_SCHEMES.items():
        if RATE_FIGURE_TIME_INDEXED[name]:
            cfg = replace(cfg, t_active=rate_sweep(cfg).argmax)
        logger.info(f"{name} at T_a={cfg.t_active}: {rate_equation(cfg)}")
    analyzer.save(table, "fig2_rates")
    echo_config(settings, "fig2")
    logger.info("--- Rate Figure Finished ---")
    return table


def reproduce_ber_figure(settings: Config, figure: str, resume: bool = False) -> dict:
    """
    Runs every curve of a BER figure. Figures with estimation error over an
    SNR grid also run the perfect-CSI companion curves and report the SNR
    penalty at the target BER.
    """
    preset = get_figure(figure)
    logger.info(f"--- Starting Figure {preset.figure}: {preset.title} ---")
    notifier = Notifier(settings_obj=settings)
    modes = [CeeMode.CEE_EQUAL_NOISE if preset.cee else CeeMode.PERFECT]
    if preset.cee and preset.sweeps_snr:
        modes.append(CeeMode.PERFECT)

    combined = pd.DataFrame({"abscissa": list(preset.n_rx_grid or preset.snr_grid)})
    summary = {"figure": preset.figure, "title": preset.title, "target_ber": TARGET_BER, "curves": []}
    try:
        for curve in preset.curves:
            results = {}
            for mode in modes:
                plan = preset.plan(curve, mode, master_seed=settings.seed, max_frames=settings.max_frames,
                                   target_bit_errors=settings.target_bit_errors, batch_size=settings.batch_size,
                                   normalization=settings.normalization)
                simulator = BerSimulator(plan, workers=settings.workers, output_dir=settings.results_dir,
                                         notifier=notifier, stem=f"{preset.figure}_{curve.label}_{mode.value}")
                result = simulator.run_sweep(resume=resume)
                results[mode] = result
                combined[f"{curve.label}_{mode.value}"] = [p.ber for p in result.points]
                summary["curves"].append({
                    "scheme": curve.label,
                    "cee_mode": mode.value,
                    "config_hash": simulator.config_hash,
                    "csv_file": os.path.basename(simulator.csv_path),
                    "rate": rate_equation(curve.cfg),
                    "required_snr_db": required_snr(result.points, TARGET_BER) if preset.sweeps_snr else None,
                })
            if len(results) == 2:
                penalty = degradation_db(results[CeeMode.PERFECT].points, results[CeeMode.CEE_EQUAL_NOISE].points,
                                         TARGET_BER)
                summary.setdefault("degradation_db", {})[curve.label] = penalty
                logger.info(f"{curve.label}: estimation error penalty at BER {TARGET_BER:g} = {penalty} dB")
    except Exception as e:
        logger.error(f"An error occurred while reproducing {preset.figure}: {e}")
        notifier.send_telegram_message(f"Figure {preset.figure} encountered an error: {e}")
        raise

    write_dat(combined, os.path.join(settings.results_dir, f"{preset.figure}.dat"))
    summary_path = os.path.join(settings.results_dir, f"{preset.figure}.json")
    with open(summary_path, 'w') as f:
        json.dump(summary, f, indent=4)
    logger.info(f"Figure summary saved to {summary_path}")
    echo_config(settings, preset.figure)
    logger.info(f"--- Figure {preset.figure} Finished ---")
    notifier.send_telegram_message(f"Figure {preset.figure} finished.")
    return summary


def dispatch(args: argparse.Namespace):
    settings = resolve_config(args)
    if args.command == 'rate':
        return cmd_rate(settings)
    if args.command == 'topt':
        return cmd_topt(settings, args.beta)
    if args.command == 'ber':
        return cmd_ber(settings, args.resume)
    if args.command == 'nrsweep':
        return cmd_nrsweep(settings, args.resume)
    if args.command == 'complexity':
        return cmd_complexity(settings, args.all_presets)
    if args.command == 'presets':
        return cmd_presets(settings)
    if args.figure == 'fig2':
        return reproduce_rate_figure(settings)
    return reproduce_ber_figure(settings, args.figure, args.resume)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.quiet:
        set_console_level(logging.WARNING)
    logger.info(f"--- Application Started: {args.command} ---")
    try:
        dispatch(args)
    except (ConfigError, FileNotFoundError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except Exception as e:
        logger.error(f"Run failed: {e!r}")
        return EXIT_RUNTIME
    logger.info("--- Application Finished ---")
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
