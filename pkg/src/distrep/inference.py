"""Distance-based hypothesis tests for samples of distributions.

Two families are provided: a Frechet-variance ANOVA calibrated by a pooled
empirical bootstrap, and energy-distance statistics calibrated by permutation.
Every resampling replicate draws from its own substream derived from
``(seed, replicate_index)``, so p-values do not depend on thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable, Sequence

import numpy as np

from ._parallel import chunked, map_ordered, resolve_threads, substream
from .densities import QuantileFunction
from .errors import DegenerateGroupVariance
from .wasserstein import pairwise_w2, stack_quantiles


@dataclass(frozen=True, eq=False)
class GroupedSample:
    """Quantile functions with a group label each.

    Labels may be any sortable values; groups are ordered by sorted label.
    """

    quantiles: Sequence[QuantileFunction]
    labels: Sequence[Hashable]

    def __post_init__(self):
        if len(self.quantiles) != len(self.labels):
            raise ValueError("quantiles and labels differ in length")
        if len(self.quantiles) == 0:
            raise ValueError("empty sample")

    @property
    def groups(self) -> list[Hashable]:
        return sorted(set(self.labels))

    @property
    def codes(self) -> np.ndarray:
        lookup = {g: j for j, g in enumerate(self.groups)}
        return np.array([lookup[g] for g in self.labels], dtype=int)

    @property
    def group_sizes(self) -> np.ndarray:
        return np.bincount(self.codes, minlength=len(self.groups))

    def values(self) -> np.ndarray:
        return stack_quantiles(self.quantiles)[1]


@dataclass
class TestResult:
    statistic: float
    p_value: float
    resamples: int
    seed: int
    components: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "resamples": self.resamples,
            "seed": self.seed,
            "components": _jsonable(self.components),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def resampling_p_value(observed: float, replicates: np.ndarray) -> float:
    """Add-one p-value ``(1 + #{T* >= T}) / (B + 1)``.

    Replicates within a relative ``1e-10`` of ``T`` count as ties, so that
    rounding in statistics that are equal in exact arithmetic cannot change
    the result.
    """
    replicates = np.asarray(replicates, dtype=float)
    scale = max(abs(observed), float(np.max(np.abs(replicates))) if replicates.size else 0.0)
    hits = np.count_nonzero(replicates >= observed - 1e-10 * scale)
    return float((1 + hits) / (replicates.size + 1))


# ---------------------------------------------------------------------------
# Frechet ANOVA


@dataclass
class AnovaStatistic:
    F_n: float
    R_n: float
    T_n: float
    proportions: np.ndarray
    group_means: np.ndarray  # (k, M) quantile values
    group_variances: np.ndarray
    group_sigma2: np.ndarray
    pooled_variance: float

    def components(self) -> dict[str, Any]:
        return {
            "F_n": self.F_n,
            "R_n": self.R_n,
            "T_n": self.T_n,
            "proportions": self.proportions,
            "group_variances": self.group_variances,
            "group_sigma2": self.group_sigma2,
            "pooled_variance": self.pooled_variance,
        }


def _anova_from_values(values: np.ndarray, codes: np.ndarray, k: int) -> AnovaStatistic:
    n = values.shape[0]
    sizes = np.bincount(codes, minlength=k)
    lam = sizes / n
    means = np.zeros((k, values.shape[1]))
    np.add.at(means, codes, values)
    means /= sizes[:, None]
    diff = values - means[codes]
    d2 = np.mean(diff * diff, axis=1)
    var = np.bincount(codes, weights=d2, minlength=k) / sizes
    fourth = np.bincount(codes, weights=d2 * d2, minlength=k) / sizes
    sigma2 = fourth - var**2
    # a group of copies of one curve leaves only rounding noise in sigma2
    floor = 1e-20 * float(np.mean(values * values)) ** 2
    if np.any(sigma2 <= floor):
        bad = np.flatnonzero(sigma2 <= floor).tolist()
        raise DegenerateGroupVariance(f"groups {bad} have zero spread of squared distances")

    pooled = values.mean(axis=0)
    pd = values - pooled
    v_pooled = float(np.mean(np.mean(pd * pd, axis=1)))

    f_n = v_pooled - float(lam @ var)
    j, l = np.triu_indices(k, k=1)
    r_n = float(np.sum(lam[j] * lam[l] / (sigma2[j] * sigma2[l]) * (var[j] - var[l]) ** 2))
    t_n = n * r_n / float(np.sum(lam / sigma2)) + n * f_n**2 / float(np.sum(lam * sigma2))
    return AnovaStatistic(f_n, r_n, t_n, lam, means, var, sigma2, v_pooled)


def _check_anova(sample: GroupedSample) -> None:
    sizes = sample.group_sizes
    if sizes.size < 2:
        raise ValueError("ANOVA needs at least 2 groups")
    if np.any(sizes < 2):
        raise ValueError(f"every group needs at least 2 members, sizes {sizes.tolist()}")


def anova_statistic(sample: GroupedSample) -> AnovaStatistic:
    """Frechet ANOVA statistic combining mean (F_n) and variance (R_n) contrasts.

    ``F_n`` is the pooled Frechet variance minus the weighted within-group
    variances, ``R_n`` the scaled squared differences of group variances, and
    ``T_n`` their combination; see :class:`AnovaStatistic`.
    """
    _check_anova(sample)
    return _anova_from_values(sample.values(), sample.codes, len(sample.groups))


def anova_test(
    sample: GroupedSample,
    bootstrap_reps: int = 1000,
    seed: int = 0,
    threads: int | None = None,
) -> TestResult:
    """Bootstrap-calibrated Frechet ANOVA.

    Each replicate resamples the pooled quantile functions with replacement into
    groups of the original sizes and recomputes ``T_n``. A replicate whose
    resample has a degenerate group is redrawn from the same substream.
    """
    _check_anova(sample)
    values = sample.values()
    codes = sample.codes
    k = len(sample.groups)
    observed = _anova_from_values(values, codes, k)
    n = values.shape[0]
    boot_codes = np.sort(codes)

    def run(block: range) -> tuple[np.ndarray, int]:
        out = np.empty(len(block))
        redraws = 0
        for pos, b in enumerate(block):
            rng = substream(seed, b)
            while True:
                idx = rng.integers(0, n, size=n)
                try:
                    out[pos] = _anova_from_values(values[idx], boot_codes, k).T_n
                    break
                except DegenerateGroupVariance:
                    redraws += 1
        return out, redraws

    parts = map_ordered(run, chunked(bootstrap_reps, resolve_threads(threads)), threads)
    reps = np.concatenate([p[0] for p in parts]) if parts else np.empty(0)
    comps = observed.components()
    comps["groups"] = [str(g) for g in sample.groups]
    comps["group_sizes"] = sample.group_sizes
    comps["redrawn_replicates"] = int(sum(p[1] for p in parts))
    return TestResult(observed.T_n, resampling_p_value(observed.T_n, reps), bootstrap_reps, seed, comps)


# ---------------------------------------------------------------------------
# energy distance


def energy_from_distances(dist: np.ndarray, in_a: np.ndarray) -> float:
    """V-statistic energy distance between the two sides of a boolean split."""
    a = np.flatnonzero(in_a)
    b = np.flatnonzero(~in_a)
    cross = dist[np.ix_(a, b)].mean()
    within_a = dist[np.ix_(a, a)].mean()
    within_b = dist[np.ix_(b, b)].mean()
    return float(2.0 * cross - within_a - within_b)


def energy_statistic(a: Sequence[QuantileFunction], b: Sequence[QuantileFunction]) -> float:
    """Sample energy distance with W2 as the ground semimetric (diagonal terms included)."""
    _, values = stack_quantiles(list(a) + list(b))
    in_a = np.zeros(len(a) + len(b), dtype=bool)
    in_a[: len(a)] = True
    return energy_from_distances(pairwise_w2(values), in_a)


def energy_permutation_test(
    a: Sequence[QuantileFunction],
    b: Sequence[QuantileFunction],
    permutations: int = 999,
    seed: int = 0,
    threads: int | None = None,
) -> TestResult:
    if len(a) == 0 or len(b) == 0:
        raise ValueError("both samples must be nonempty")
    _, values = stack_quantiles(list(a) + list(b))
    dist = pairwise_w2(values)
    total = dist.shape[0]
    in_a = np.zeros(total, dtype=bool)
    in_a[: len(a)] = True
    observed = energy_from_distances(dist, in_a)

    def run(block: range) -> np.ndarray:
        out = np.empty(len(block))
        for pos, b_idx in enumerate(block):
            perm = substream(seed, b_idx).permutation(total)
            out[pos] = energy_from_distances(dist, in_a[perm])
        return out

    parts = map_ordered(run, chunked(permutations, resolve_threads(threads)), threads)
    reps = np.concatenate(parts) if parts else np.empty(0)
    return TestResult(
        observed,
        resampling_p_value(observed, reps),
        permutations,
        seed,
        {"n_a": len(a), "n_b": len(b), "energy": observed},
    )


def k_sample_energy_from_distances(dist: np.ndarray, codes: np.ndarray) -> float:
    k = int(codes.max()) + 1
    n = codes.size
    sizes = np.bincount(codes, minlength=k)
    onehot = np.eye(k)[codes]
    g = onehot.T @ dist @ onehot / np.outer(sizes, sizes)
    j, l = np.triu_indices(k, k=1)
    return float(np.sum(sizes[j] * sizes[l] / (2.0 * n) * (2 * g[j, l] - g[j, j] - g[l, l])))


def k_sample_energy(sample: GroupedSample) -> float:
    """k-sample energy statistic ``sum_{j<l} n_j n_l / 2n * (2 g_jl - g_jj - g_ll)``."""
    if len(sample.groups) < 2:
        raise ValueError("need at least 2 groups")
    return k_sample_energy_from_distances(pairwise_w2(sample.values()), sample.codes)
