"""Glucodensity estimation and quantile-function representations."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DegenerateSample, GridTooCoarse
from .ingest import CgmSeries

SUPPORT = (40.0, 400.0)
SUPPORT_POINTS = 721
PROB_POINTS = 500
_SQRT_2PI = np.sqrt(2.0 * np.pi)


class KernelKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    EPANECHNIKOV = "epanechnikov"


class BandwidthSelector(str, enum.Enum):
    RULE_OF_THUMB = "rule_of_thumb"
    LSCV = "lscv"  # least-squares CV, i.e. minimum estimated MISE
    LIKELIHOOD_CV = "likelihood_cv"


def default_support_grid(lo: float = SUPPORT[0], hi: float = SUPPORT[1], points: int = SUPPORT_POINTS) -> np.ndarray:
    return np.linspace(lo, hi, points)


def default_prob_grid(points: int = PROB_POINTS) -> np.ndarray:
    """Half-offset probability grid ``p_k = (k - 1/2) / M``, k = 1..M."""
    return (np.arange(1, points + 1) - 0.5) / points


@dataclass(frozen=True, eq=False)
class Glucodensity:
    support_grid: np.ndarray
    values: np.ndarray
    bandwidth: float
    subject_id: str = ""

    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.support_grid))


@dataclass(frozen=True, eq=False)
class QuantileFunction:
    """Quantile values of one distribution on a shared probability grid."""

    prob_grid: np.ndarray
    values: np.ndarray
    subject_id: str = ""

    def __post_init__(self):
        if self.prob_grid.shape != self.values.shape or self.values.ndim != 1:
            raise ValueError("prob_grid and values must be 1-D arrays of equal length")

    def shift(self, c: float) -> "QuantileFunction":
        return QuantileFunction(self.prob_grid, self.values + c, self.subject_id)


def _samples_of(data) -> np.ndarray:
    if isinstance(data, CgmSeries):
        return data.glucose
    return np.asarray(data, dtype=float).ravel()


def rule_of_thumb_bandwidth(samples) -> float:
    """Normal-reference bandwidth ``1.06 * sd * m**(-1/5)`` (sd with ddof=1)."""
    x = _samples_of(samples)
    if x.size < 2:
        raise DegenerateSample(f"need at least 2 samples, got {x.size}")
    sd = float(np.std(x, ddof=1))
    if sd == 0.0:
        raise DegenerateSample("all samples are equal")
    return 1.06 * sd * x.size ** (-0.2)


def _kernel(u: np.ndarray, kind: KernelKind) -> np.ndarray:
    if kind is KernelKind.GAUSSIAN:
        return np.exp(-0.5 * u * u) / _SQRT_2PI
    if kind is KernelKind.EPANECHNIKOV:
        return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)
    raise ValueError(f"unknown kernel {kind!r}")


def kde_on_grid(samples, grid: np.ndarray, bandwidth: float, kernel: KernelKind = KernelKind.GAUSSIAN) -> np.ndarray:
    """Raw kernel density estimate on ``grid`` (not renormalized)."""
    x = _samples_of(samples)
    grid = np.asarray(grid, dtype=float)
    kernel = KernelKind(kernel)
    out = np.zeros_like(grid)
    # chunk over samples to bound memory for long records
    step = max(1, 2_000_000 // max(grid.size, 1))
    for start in range(0, x.size, step):
        u = (grid[:, None] - x[None, start:start + step]) / bandwidth
        out += _kernel(u, kernel).sum(axis=1)
    return out / (x.size * bandwidth)


def _lscv_score(h: float, x: np.ndarray) -> float:
    # Gaussian closed form: int f^2 - 2/m sum_i f_{-i}(x_i)
    m = x.size
    d = x[:, None] - x[None, :]
    t2 = np.exp(-d * d / (4 * h * h)).sum() / (m * m * 2 * h * np.sqrt(np.pi))
    k = np.exp(-d * d / (2 * h * h))
    loo = (k.sum() - m) / (m * (m - 1) * h * _SQRT_2PI)
    return float(t2 - 2 * loo)


def _lcv_score(h: float, x: np.ndarray) -> float:
    m = x.size
    d = x[:, None] - x[None, :]
    k = np.exp(-d * d / (2 * h * h))
    np.fill_diagonal(k, 0.0)
    f = k.sum(axis=1) / ((m - 1) * h * _SQRT_2PI)
    return float(-np.mean(np.log(np.maximum(f, 1e-300))))


def select_bandwidth(samples, selector: BandwidthSelector = BandwidthSelector.RULE_OF_THUMB) -> float:
    """Bandwidth by the chosen selector; CV variants search around the rule of thumb."""
    selector = BandwidthSelector(selector)
    h0 = rule_of_thumb_bandwidth(samples)
    if selector is BandwidthSelector.RULE_OF_THUMB:
        return h0
    x = _samples_of(samples)
    score = _lscv_score if selector is BandwidthSelector.LSCV else _lcv_score
    res = optimize.minimize_scalar(
        lambda logh: score(float(np.exp(logh)), x),
        bounds=(np.log(h0 / 20), np.log(h0 * 5)),
        method="bounded",
        options={"xatol": 1e-4},
    )
    return float(np.exp(res.x))


def estimate_glucodensity(
    series,
    grid: np.ndarray | None = None,
    kernel: KernelKind = KernelKind.GAUSSIAN,
    bandwidth: float | None = None,
    selector: BandwidthSelector = BandwidthSelector.RULE_OF_THUMB,
    subject_id: str | None = None,
) -> Glucodensity:
    """Kernel density estimate renormalized to unit mass on ``grid``.

    ``series`` may be a :class:`CgmSeries` or a plain sample vector. Mass that
    the kernel spreads beyond the grid ends is compensated by rescaling so the
    trapezoidal integral is exactly one.
    """
    x = _samples_of(series)
    if subject_id is None:
        subject_id = series.subject_id if isinstance(series, CgmSeries) else ""
    grid = default_support_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing with at least 2 points")
    if x.size == 0:
        raise DegenerateSample("no samples")
    if bandwidth is None:
        bandwidth = select_bandwidth(x, selector)
    elif bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    spacing = float(np.max(np.diff(grid)))
    if spacing > bandwidth * (1 + 1e-9):
        raise GridTooCoarse(f"grid spacing {spacing:g} exceeds bandwidth {bandwidth:g}")

    values = kde_on_grid(x, grid, bandwidth, kernel)
    mass = float(np.trapezoid(values, grid))
    if not mass > 0.0:
        raise DegenerateSample("no kernel mass falls on the grid")
    return Glucodensity(grid, values / mass, float(bandwidth), subject_id)


def empirical_quantile(samples, prob_grid: np.ndarray | None = None, subject_id: str | None = None) -> QuantileFunction:
    """Left-continuous empirical quantile ``inf{x : F(x) >= p}`` on ``prob_grid``."""
    x = np.sort(_samples_of(samples))
    if subject_id is None:
        subject_id = samples.subject_id if isinstance(samples, CgmSeries) else ""
    if x.size == 0:
        raise ValueError("samples must be nonempty")
    p = default_prob_grid() if prob_grid is None else np.asarray(prob_grid, dtype=float)
    if np.any((p <= 0) | (p >= 1)) or np.any(np.diff(p) <= 0):
        raise ValueError("prob_grid must be increasing inside (0, 1)")
    levels = np.arange(1, x.size + 1) / x.size
    idx = np.searchsorted(levels, p, side="left")
    return QuantileFunction(p, x[np.minimum(idx, x.size - 1)], subject_id)


def density_to_quantile(g: Glucodensity, prob_grid: np.ndarray | None = None) -> QuantileFunction:
    """Invert the trapezoidal CDF of ``g`` by monotone linear interpolation."""
    p = default_prob_grid() if prob_grid is None else np.asarray(prob_grid, dtype=float)
    x = g.support_grid
    f = np.maximum(g.values, 0.0)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(x))])
    cdf /= cdf[-1]
    # drop nodes strictly inside flat runs; run ends stay as interpolation nodes
    flat_prev = np.r_[False, cdf[1:] == cdf[:-1]]
    flat_next = np.r_[cdf[:-1] == cdf[1:], False]
    keep = ~(flat_prev & flat_next)
    q = np.interp(p, cdf[keep], x[keep])
    q = np.clip(np.maximum.accumulate(q), x[0], x[-1])
    return QuantileFunction(p, q, g.subject_id)
