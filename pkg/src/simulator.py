"""
Seeded, parallel Monte Carlo BER engine.

Every frame draws its own generator from a seed derived from
(master_seed, point index, frame index) with a SplitMix64 chain, so the
frames of a point can be computed in any order by any number of workers.
Per-frame error counts are reduced in frame order, and early stopping happens
at the exact frame where the error target is reached. The outcome therefore
does not depend on the worker count or the batch size.
"""

import hashlib
import json
import os
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Iterator, Optional

import numpy as np
import pandas as pd

from src.channel import NoiseModel, corrupt_estimate, draw_channel, snr_to_sigma, transmit
from src.detector import ml_detect
from src.errors import ConfigError, SimulationError
from src.logger import logger
from src.notifier import Notifier
from src.scheme import SchemeConfig, bit_budget, hamming_distance, random_bits
from src.signal_builder import build_frame

MASK64 = (1 << 64) - 1

CSV_COLUMNS = ["scheme", "config_hash", "abscissa_kind", "abscissa", "frames",
               "bit_errors", "total_bits", "ber", "seed"]


class CeeMode(str, Enum):
    PERFECT = "perfect"
    CEE_EQUAL_NOISE = "cee_equal_noise"
    CEE_FIXED = "cee_fixed"


class EnergyNormalization(str, Enum):
    """
    CHANNEL_USE: unit average transmit energy per channel use, so a frame with
    T_a of T slots active spends T/T_a per active symbol.
    SYMBOL: unit energy per active symbol; idle slots radiate nothing.
    """
    CHANNEL_USE = "channel_use"
    SYMBOL = "symbol"


def transmit_gain_sq(cfg: SchemeConfig, normalization: EnergyNormalization) -> float:
    """Power gain applied to every active slot."""
    if EnergyNormalization(normalization) is EnergyNormalization.CHANNEL_USE:
        return cfg.t_total / cfg.t_active
    return 1.0


def splitmix64(value: int) -> int:
    value = (value + 0x9E3779B97F4A7C15) & MASK64
    value = ((value ^ (value >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    value = ((value ^ (value >> 27)) * 0x94D049BB133111EB) & MASK64
    return value ^ (value >> 31)


def derive_frame_seed(master_seed: int, point_index: int, frame_index: int) -> int:
    """64-bit seed of one frame: splitmix64(splitmix64(splitmix64(master) ^ point) ^ frame)."""
    seed = splitmix64(master_seed & MASK64)
    seed = splitmix64(seed ^ (point_index & MASK64))
    return splitmix64(seed ^ (frame_index & MASK64))


@dataclass(frozen=True)
class SimPlan:
    cfg: SchemeConfig
    n_rx: int
    snr_grid: tuple[float, ...]
    n_rx_grid: tuple[int, ...] = ()
    cee_mode: CeeMode = CeeMode.PERFECT
    sigma_e_sq: float = 0.0
    normalization: EnergyNormalization = EnergyNormalization.CHANNEL_USE
    master_seed: int = 0
    max_frames: int = 2_000_000
    target_bit_errors: int = 200
    scheme: str = "custom"
    batch_size: int = 256

    def __post_init__(self):
        object.__setattr__(self, "cee_mode", CeeMode(self.cee_mode))
        object.__setattr__(self, "normalization", EnergyNormalization(self.normalization))
        object.__setattr__(self, "snr_grid", tuple(float(s) for s in self.snr_grid))
        object.__setattr__(self, "n_rx_grid", tuple(int(n) for n in self.n_rx_grid))
        if self.max_frames < 1:
            raise ConfigError(f"max_frames must be at least 1, got {self.max_frames}.")
        if self.target_bit_errors < 1:
            raise ConfigError(f"target_bit_errors must be at least 1, got {self.target_bit_errors}.")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be at least 1, got {self.batch_size}.")
        if not self.snr_grid:
            raise ConfigError("The SNR grid is empty.")
        if self.n_rx_grid and len(self.snr_grid) != 1:
            raise ConfigError("A receive-antenna sweep runs at one fixed SNR; give a single snr value.")
        if any(n < 1 for n in self.n_rx_grid) or self.n_rx < 1:
            raise ConfigError("Receive antenna counts must be positive.")
        if self.sigma_e_sq < 0:
            raise ConfigError(f"sigma_e_sq must be non-negative, got {self.sigma_e_sq}.")
        if not 0 <= self.master_seed <= MASK64:
            raise ConfigError(f"The master seed must fit in 64 bits, got {self.master_seed}.")
        if not self.cfg.is_detectable:
            raise ConfigError(
                "Quadrature antenna indexing needs a constellation with an imaginary part; "
                f"M={self.cfg.mod_order} {self.cfg.constellation_kind.value} is real-valued."
            )

    @property
    def abscissa_kind(self) -> str:
        return "n_rx" if self.n_rx_grid else "snr_db"

    @property
    def abscissae(self) -> tuple:
        return self.n_rx_grid if self.n_rx_grid else self.snr_grid

    def conditions(self, point_index: int) -> tuple[float, int]:
        """(snr_db, n_rx) of one grid point."""
        if self.n_rx_grid:
            return self.snr_grid[0], self.n_rx_grid[point_index]
        return self.snr_grid[point_index], self.n_rx

    def error_variance(self, snr_db: float) -> float:
        if self.cee_mode is CeeMode.CEE_EQUAL_NOISE:
            return snr_to_sigma(snr_db)
        if self.cee_mode is CeeMode.CEE_FIXED:
            return self.sigma_e_sq
        return 0.0


def plan_record(plan: SimPlan) -> dict:
    """JSON-ready description of a plan (the metadata payload)."""
    cfg = asdict(plan.cfg)
    cfg["constellation_kind"] = plan.cfg.constellation_kind.value
    return {
        "scheme": plan.scheme,
        "scheme_config": cfg,
        "n_rx": plan.n_rx,
        "snr_grid": list(plan.snr_grid),
        "n_rx_grid": list(plan.n_rx_grid),
        "cee_mode": plan.cee_mode.value,
        "sigma_e_sq": plan.sigma_e_sq,
        "normalization": plan.normalization.value,
        "master_seed": plan.master_seed,
        "max_frames": plan.max_frames,
        "target_bit_errors": plan.target_bit_errors,
        "batch_size": plan.batch_size,
    }


def config_fingerprint(plan: SimPlan) -> str:
    """Stable 16-hex-digit hash of everything that determines the results."""
    record = plan_record(plan)
    # batching changes scheduling only, never results
    record.pop("batch_size")
    payload = json.dumps(record, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class BerPoint:
    abscissa_kind: str
    abscissa: float
    frames_run: int
    bit_errors: int
    total_bits: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.total_bits if self.total_bits else 0.0


@dataclass
class SweepResult:
    points: list[BerPoint]
    metadata: dict = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        return points_frame(self.points, self.metadata.get("scheme", "custom"),
                            self.metadata.get("config_hash", ""), self.metadata.get("master_seed", 0))


def points_frame(points: list[BerPoint], scheme: str, config_hash: str, seed: int) -> pd.DataFrame:
    rows = [{
        "scheme": scheme,
        "config_hash": config_hash,
        "abscissa_kind": p.abscissa_kind,
        "abscissa": p.abscissa,
        "frames": p.frames_run,
        "bit_errors": p.bit_errors,
        "total_bits": p.total_bits,
        "ber": p.ber,
        "seed": seed,
    } for p in points]
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


# --- Frame simulation (runs inside workers) ---

@dataclass(frozen=True)
class BatchTask:
    cfg: SchemeConfig
    n_rx: int
    snr_db: float
    sigma_e_sq: float
    estimate_error: bool
    master_seed: int
    point_index: int
    first_frame: int
    n_frames: int
    tx_gain_sq: float = 1.0


def simulate_frame(cfg: SchemeConfig, n_rx: int, sigma_n_sq: float, sigma_e_sq: float,
                   estimate_error: bool, rng: np.random.Generator, tx_gain_sq: float = 1.0) -> int:
    """
    One frame end to end; returns the number of bit errors.

    Scaling the transmitted frame by sqrt(tx_gain_sq) is applied as receiver
    noise divided by tx_gain_sq. ML decisions are unchanged by that rescaling
    and the estimate error keeps its own variance.
    """
    bits = random_bits(rng, bit_budget(cfg).frame_bits)
    frame = build_frame(cfg, bits)
    channel = draw_channel(cfg, n_rx, rng)
    if estimate_error:
        channel = corrupt_estimate(channel, sigma_e_sq, rng)
    received = transmit(channel, frame, NoiseModel(sigma_n_sq / tx_gain_sq), rng)
    detected = ml_detect(cfg, received, channel.estimate)
    return hamming_distance(bits, detected.bits)


def run_batch(task: BatchTask) -> np.ndarray:
    """Bit errors of frames first_frame .. first_frame + n_frames - 1 of one point."""
    sigma_n_sq = snr_to_sigma(task.snr_db)
    errors = np.zeros(task.n_frames, dtype=np.int64)
    for offset in range(task.n_frames):
        frame_index = task.first_frame + offset
        seed = derive_frame_seed(task.master_seed, task.point_index, frame_index)
        try:
            errors[offset] = simulate_frame(task.cfg, task.n_rx, sigma_n_sq, task.sigma_e_sq,
                                            task.estimate_error, np.random.default_rng(seed), task.tx_gain_sq)
        except Exception as e:
            raise SimulationError(
                f"Frame {frame_index} of point {task.point_index} (seed {seed}) failed: {e}"
            ) from e
    return errors


# --- Required SNR and CEE degradation ---

def required_snr(points: list[BerPoint], target_ber: float) -> Optional[float]:
    """
    SNR at which the BER curve crosses ``target_ber``, interpolating linearly
    in log10(BER) between the bracketing points that have errors.
    """
    usable = sorted((p for p in points if p.bit_errors > 0), key=lambda p: p.abscissa)
    for lower, upper in zip(usable, usable[1:]):
        if lower.ber >= target_ber >= upper.ber:
            if lower.ber == upper.ber:
                return float(lower.abscissa)
            fraction = (np.log10(lower.ber) - np.log10(target_ber)) / (np.log10(lower.ber) - np.log10(upper.ber))
            return float(lower.abscissa + fraction * (upper.abscissa - lower.abscissa))
    return None


def degradation_db(perfect: list[BerPoint], imperfect: list[BerPoint], target_ber: float) -> Optional[float]:
    """SNR penalty of imperfect channel knowledge at ``target_ber``."""
    reference = required_snr(perfect, target_ber)
    degraded = required_snr(imperfect, target_ber)
    if reference is None or degraded is None:
        return None
    return degraded - reference


class BerSimulator:
    """
    Runs a SimPlan point by point and persists the results.
    """
    def __init__(self, plan: SimPlan, workers: int = 1, output_dir: str = None,
                 notifier: Notifier = None, stem: str = None):
        if workers < 1:
            raise ConfigError(f"workers must be at least 1, got {workers}.")
        self.plan = plan
        self.workers = workers
        self.output_dir = output_dir or os.path.join(os.path.dirname(__file__), '..', 'results')
        self.notifier = notifier
        self.config_hash = config_fingerprint(plan)
        self.stem = stem or f"{plan.scheme}_{self.config_hash}"

    @property
    def csv_path(self) -> str:
        return os.path.join(self.output_dir, f"{self.stem}.csv")

    @property
    def metadata_path(self) -> str:
        return os.path.join(self.output_dir, f"{self.stem}.json")

    def _tasks(self, point_index: int, snr_db: float, n_rx: int) -> Iterator[BatchTask]:
        plan = self.plan
        for first in range(0, plan.max_frames, plan.batch_size):
            yield BatchTask(
                cfg=plan.cfg, n_rx=n_rx, snr_db=snr_db,
                sigma_e_sq=plan.error_variance(snr_db),
                estimate_error=plan.cee_mode is not CeeMode.PERFECT,
                master_seed=plan.master_seed, point_index=point_index,
                first_frame=first, n_frames=min(plan.batch_size, plan.max_frames - first),
                tx_gain_sq=transmit_gain_sq(plan.cfg, plan.normalization),
            )

    def _batch_errors(self, point_index: int, snr_db: float, n_rx: int) -> Iterator[np.ndarray]:
        """Per-frame error arrays in frame order, computed ahead by the worker pool."""
        tasks = self._tasks(point_index, snr_db, n_rx)
        if self.workers == 1:
            for task in tasks:
                yield run_batch(task)
            return

        with ProcessPoolExecutor(max_workers=self.workers) as executor:
            pending = deque()
            try:
                for task in tasks:
                    pending.append(executor.submit(run_batch, task))
                    if len(pending) >= 2 * self.workers:
                        yield pending.popleft().result()
                while pending:
                    yield pending.popleft().result()
            finally:
                for future in pending:
                    future.cancel()

    def run_point(self, point_index: int) -> BerPoint:
        """Simulates one grid point until max_frames or the bit-error target."""
        plan = self.plan
        snr_db, n_rx = plan.conditions(point_index)
        frame_bits = bit_budget(plan.cfg).frame_bits

        frames = 0
        errors = 0
        batches = self._batch_errors(point_index, snr_db, n_rx)
        try:
            for batch in batches:
                for frame_errors in batch:
                    frames += 1
                    errors += int(frame_errors)
                    if errors >= plan.target_bit_errors:
                        break
                if errors >= plan.target_bit_errors or frames >= plan.max_frames:
                    break
        finally:
            batches.close()

        point = BerPoint(
            abscissa_kind=plan.abscissa_kind,
            abscissa=plan.abscissae[point_index],
            frames_run=frames,
            bit_errors=errors,
            total_bits=frames * frame_bits,
        )
        logger.info(f"[BerSimulator] {plan.scheme} point {point_index + 1}/{len(plan.abscissae)} "
                    f"({plan.abscissa_kind}={point.abscissa}): frames={frames}, errors={errors}, ber={point.ber:.3e}")
        return point

    def _metadata(self, status: str, points: list[BerPoint], started: float) -> dict:
        return {
            "scheme": self.plan.scheme,
            "config_hash": self.config_hash,
            "master_seed": self.plan.master_seed,
            "status": status,
            "completed_points": len(points),
            "total_points": len(self.plan.abscissae),
            "workers": self.workers,
            "started_at": time.strftime('%Y-%m-%dT%H:%M:%S', time.localtime(started)),
            "wall_clock_seconds": round(time.time() - started, 3),
            "csv_file": os.path.basename(self.csv_path),
            "plan": plan_record(self.plan),
        }

    def _persist(self, points: list[BerPoint], metadata: dict) -> None:
        os.makedirs(self.output_dir, exist_ok=True)
        points_frame(points, self.plan.scheme, self.config_hash, self.plan.master_seed) \
            .to_csv(self.csv_path, index=False)
        with open(self.metadata_path, 'w') as f:
            json.dump(metadata, f, indent=4)

    def _resumable_points(self) -> list[BerPoint]:
        """Points of an interrupted run of the same plan, if any."""
        if not (os.path.exists(self.metadata_path) and os.path.exists(self.csv_path)):
            return []
        with open(self.metadata_path, 'r') as f:
            metadata = json.load(f)
        if metadata.get("config_hash") != self.config_hash or metadata.get("status") == "complete":
            return []
        table = pd.read_csv(self.csv_path)
        points = [
            BerPoint(abscissa_kind=row.abscissa_kind, abscissa=self.plan.abscissae[i],
                     frames_run=int(row.frames), bit_errors=int(row.bit_errors), total_bits=int(row.total_bits))
            for i, row in enumerate(table.itertuples(index=False))
        ]
        logger.info(f"[BerSimulator] Resuming {self.stem} after {len(points)} completed points.")
        return points

    def run_sweep(self, resume: bool = False) -> SweepResult:
        """Runs every grid point, persisting after each one."""
        plan = self.plan
        logger.info(f"--- Starting BER Sweep: {plan.scheme} ({plan.abscissa_kind}, {len(plan.abscissae)} points) ---")
        started = time.time()
        points = self._resumable_points() if resume else []
        if self.notifier:
            self.notifier.sweep_started(self.stem, len(plan.abscissae) - len(points))
        try:
            for point_index in range(len(points), len(plan.abscissae)):
                points.append(self.run_point(point_index))
                self._persist(points, self._metadata("running", points, started))
        except (Exception, KeyboardInterrupt) as e:
            self._persist(points, self._metadata("partial", points, started))
            logger.error(f"[BerSimulator] Sweep interrupted after {len(points)} points: {e!r}. "
                         f"Rerun with resume to continue from {self.metadata_path}")
            if self.notifier:
                self.notifier.sweep_failed(self.stem, e)
            raise

        metadata = self._metadata("complete", points, started)
        self._persist(points, metadata)
        logger.info(f"[BerSimulator] Results saved to {self.csv_path}")
        logger.info("--- BER Sweep Finished ---")
        if self.notifier:
            self.notifier.sweep_finished(self.stem, metadata["wall_clock_seconds"])
        return SweepResult(points=points, metadata=metadata)
