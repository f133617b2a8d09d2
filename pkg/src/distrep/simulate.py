"""Seeded synthetic CGM cohorts with known distributional ground truth.

Each subject follows a mean-reverting (Ornstein-Uhlenbeck) process around a
personal level, plus a zero-mean diurnal drift made of a sinusoid and meal
bumps at fixed clock times, plus white sensor noise; readings are saturated to
the device range. Because the drift is deterministic in clock time and the
process is stationary, the long-run distribution of the readings is an exact
mixture over the sampling phases of a day, from which the planted biomarkers
are computed.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Sequence

import numpy as np
from scipy import signal, special

from ._parallel import map_ordered, substream
from .ingest import DEVICE_RANGE, CgmRecord, CgmSeries

ARCHETYPES = ("normo", "prediabetic", "diabetic")
START = datetime(2021, 3, 1, tzinfo=timezone.utc)
MEAL_TIMES_H = (7.5, 13.0, 20.0)
MEAL_PEAK_H = 0.75

# per archetype: (level, ou_sd, diurnal_amplitude, meal_height) uniform ranges
_PARAMS = {
    "normo": ((87.0, 103.0), (6.0, 12.0), (2.0, 8.0), (8.0, 25.0)),
    "prediabetic": ((105.0, 135.0), (10.0, 20.0), (4.0, 12.0), (15.0, 45.0)),
    "diabetic": ((135.0, 200.0), (15.0, 35.0), (6.0, 20.0), (25.0, 80.0)),
}
_REVERSION_PER_H = (0.8, 2.0)
A1C_THRESHOLD = 180.0
A1C_EXCESS_SCALE = 250.0


@dataclass(frozen=True)
class CohortConfig:
    n_subjects: int = 100
    days: int = 4
    interval: timedelta = timedelta(minutes=5)
    archetype_mix: tuple[float, float, float] = (0.4, 0.3, 0.3)
    noise_sd: float = 4.0
    seed: int = 0

    def __post_init__(self):
        if self.n_subjects < 0:
            raise ValueError("n_subjects must be >= 0")
        if not 2 <= self.days <= 6:
            raise ValueError("days must be in [2, 6]")
        if self.interval <= timedelta(0) or timedelta(days=1) % self.interval:
            raise ValueError("interval must be positive and divide one day")
        mix = np.asarray(self.archetype_mix, dtype=float)
        if mix.shape != (3,) or np.any(mix < 0) or abs(mix.sum() - 1.0) > 1e-9:
            raise ValueError("archetype_mix must be 3 nonnegative proportions summing to 1")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")

    @property
    def readings_per_day(self) -> int:
        return timedelta(days=1) // self.interval


@dataclass(frozen=True)
class SubjectTruth:
    """Generating parameters and planted biomarkers of one subject."""

    subject_id: str
    archetype: str
    level: float
    ou_sd: float
    diurnal_amplitude: float
    diurnal_phase_h: float
    meal_height: float
    reversion_per_h: float
    noise_sd: float
    # planted biomarkers, all functionals of the stationary reading distribution
    mean: float = field(default=np.nan)
    variance: float = field(default=np.nan)
    a1c: float = field(default=np.nan)
    homa_ir: float = field(default=np.nan)


BIOMARKERS = ("a1c", "variance", "homa_ir")


def diurnal_drift(hours: np.ndarray, amplitude: float, phase_h: float, meal_height: float) -> np.ndarray:
    """Sinusoid plus gamma-shaped meal bumps; not yet centred."""
    h = np.mod(hours, 24.0)
    drift = amplitude * np.sin(2 * np.pi * (h - phase_h) / 24.0)
    for t in MEAL_TIMES_H:
        lag = np.mod(h - t, 24.0)
        drift += meal_height * (lag / MEAL_PEAK_H) * np.exp(1.0 - lag / MEAL_PEAK_H)
    return drift


def _phase_means(truth: SubjectTruth, per_day: int) -> np.ndarray:
    hours = np.arange(per_day) * 24.0 / per_day
    d = diurnal_drift(hours, truth.diurnal_amplitude, truth.diurnal_phase_h, truth.meal_height)
    return truth.level + d - d.mean()


def stationary_cdf(truth: SubjectTruth, x: np.ndarray, per_day: int = 288) -> np.ndarray:
    """Long-run CDF of the saturated readings at points ``x``."""
    centres = _phase_means(truth, per_day)
    scale = np.hypot(truth.ou_sd, truth.noise_sd)
    x = np.asarray(x, dtype=float)
    cdf = special.ndtr((x[..., None] - centres) / scale).mean(axis=-1)
    lo, hi = DEVICE_RANGE
    return np.where(x < lo, 0.0, np.where(x >= hi, 1.0, cdf))


def _cdf_table(truth: SubjectTruth, per_day: int, points: int = 1801) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = DEVICE_RANGE
    x = np.linspace(lo, hi, points)
    cdf = stationary_cdf(truth, x, per_day)
    cdf[-1] = 1.0
    return x, cdf


def _invert(x: np.ndarray, cdf: np.ndarray, prob_grid: np.ndarray) -> np.ndarray:
    p = np.asarray(prob_grid, dtype=float)
    j = np.clip(np.searchsorted(cdf, p, side="left"), 1, x.size - 1)
    f0, f1 = cdf[j - 1], cdf[j]
    frac = np.where(f1 > f0, (p - f0) / np.where(f1 > f0, f1 - f0, 1.0), 0.0)
    q = x[j - 1] + np.clip(frac, 0.0, 1.0) * (x[j] - x[j - 1])
    return np.where(p <= cdf[0], x[0], q)


def stationary_quantile(truth: SubjectTruth, prob_grid: np.ndarray, per_day: int = 288) -> np.ndarray:
    """Long-run quantile function on ``prob_grid`` (inverse of :func:`stationary_cdf`)."""
    x, cdf = _cdf_table(truth, per_day, 14401)
    return _invert(x, cdf, prob_grid)


def _expectation(x: np.ndarray, cdf: np.ndarray, fn) -> float:
    # Stieltjes sum; the atom at the lower device limit is carried by cdf[0]
    mids = 0.5 * (x[1:] + x[:-1])
    return float(fn(x[:1])[0] * cdf[0] + np.sum(fn(mids) * np.diff(cdf)))


def planted_biomarkers(truth: SubjectTruth, per_day: int = 288) -> dict[str, float]:
    """Biomarker analogues computed from the stationary reading distribution.

    * ``mean``, ``variance``: long-run moments of the readings.
    * ``a1c``: a glycation index, affine in the mean plus a convex
      hyperglycaemic-exposure term ``E[(X - 180)_+^2] / 250``.
    * ``homa_ir``: ``exp((q75 - 100) / 40)`` of the long-run upper quartile.
    """
    x, cdf = _cdf_table(truth, per_day)
    mean = _expectation(x, cdf, lambda v: v)
    second = _expectation(x, cdf, lambda v: v * v)
    excess = _expectation(x, cdf, lambda v: np.maximum(v - A1C_THRESHOLD, 0.0) ** 2)
    q75 = float(_invert(x, cdf, np.array([0.75]))[0])
    return {
        "mean": mean,
        "variance": second - mean * mean,
        "a1c": (mean + 46.7) / 28.7 + excess / A1C_EXCESS_SCALE,
        "homa_ir": float(np.exp((q75 - 100.0) / 40.0)),
    }


def _draw_truth(config: CohortConfig, i: int, rng: np.random.Generator) -> SubjectTruth:
    archetype = ARCHETYPES[int(rng.choice(3, p=np.asarray(config.archetype_mix, dtype=float)))]
    level, sd, amp, meal = _PARAMS[archetype]
    return SubjectTruth(
        subject_id=f"S{i + 1:04d}",
        archetype=archetype,
        level=float(rng.uniform(*level)),
        ou_sd=float(rng.uniform(*sd)),
        diurnal_amplitude=float(rng.uniform(*amp)),
        diurnal_phase_h=float(rng.uniform(0.0, 24.0)),
        meal_height=float(rng.uniform(*meal)),
        reversion_per_h=float(rng.uniform(*_REVERSION_PER_H)),
        noise_sd=config.noise_sd,
    )


def _simulate_subject(config: CohortConfig, i: int) -> tuple[CgmSeries, SubjectTruth]:
    rng = substream(config.seed, i)
    truth = _draw_truth(config, i, rng)
    per_day = config.readings_per_day
    steps = config.days * per_day
    dt_h = config.interval.total_seconds() / 3600.0

    rho = np.exp(-truth.reversion_per_h * dt_h)
    innov = rng.standard_normal(steps) * truth.ou_sd * np.sqrt(1.0 - rho * rho)
    z0 = rng.standard_normal() * truth.ou_sd
    ou, _ = signal.lfilter([1.0], [1.0, -rho], innov, zi=[rho * z0])
    noise = rng.standard_normal(steps) * truth.noise_sd
    phase = np.tile(_phase_means(truth, per_day), config.days)
    readings = np.clip(np.round(phase + ou + noise, 1), *DEVICE_RANGE)

    sid = truth.subject_id
    records = tuple(
        CgmRecord(sid, START + k * config.interval, float(v)) for k, v in enumerate(readings)
    )
    truth = SubjectTruth(**{**asdict(truth), **planted_biomarkers(truth, per_day)})
    return CgmSeries(sid, records, config.interval), truth


def simulate_cohort(config: CohortConfig, threads: int | None = None) -> tuple[list[CgmSeries], list[SubjectTruth]]:
    """Generate ``config.n_subjects`` series and their ground truth, deterministically."""
    results = map_ordered(lambda i: _simulate_subject(config, i), range(config.n_subjects), threads)
    return [r[0] for r in results], [r[1] for r in results]


def truth_table_csv(truths: Sequence[SubjectTruth]) -> str:
    out = io.StringIO()
    names = list(SubjectTruth.__dataclass_fields__)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(names)
    for t in truths:
        row = asdict(t)
        writer.writerow([repr(row[k]) if isinstance(row[k], float) else row[k] for k in names])
    return out.getvalue()
