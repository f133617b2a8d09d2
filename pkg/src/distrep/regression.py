"""Regression with distributions as predictors or as responses."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .densities import SUPPORT, QuantileFunction
from .errors import (
    AllWeightsVanish,
    GridMismatch,
    SingularCovariance,
    ZeroFrechetVariance,
    ZeroResponseVariance,
)
from .wasserstein import pairwise_w2, stack_quantiles, w2_to_rows

N_BANDWIDTHS = 20


def gaussian_kernel(t: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * t * t) / np.sqrt(2.0 * np.pi)


def r2_score(y: np.ndarray, yhat: np.ndarray) -> float:
    """``1 - SS_res / SS_tot``; raises ZeroResponseVariance for constant ``y``."""
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise ZeroResponseVariance("responses have zero variance")
    return 1.0 - float(np.sum((y - yhat) ** 2)) / ss_tot


# ---------------------------------------------------------------------------
# scalar response, distributional predictor


@dataclass(eq=False)
class ScalarOnDistTraining:
    """Training data for Nadaraya-Watson regression on W2 distances.

    ``bandwidth`` may be left as ``None`` and chosen by :func:`nw_cv_bandwidth`.
    The training distance matrix is computed on first use and cached.
    """

    predictors: Sequence[QuantileFunction]
    responses: np.ndarray
    bandwidth: float | None = None
    _dist: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.responses = np.asarray(self.responses, dtype=float)
        if len(self.predictors) != self.responses.size:
            raise ValueError("predictors and responses differ in length")
        if self.responses.size < 1:
            raise ValueError("need at least one training pair")
        self.grid, self.values = stack_quantiles(self.predictors)

    @property
    def n(self) -> int:
        return self.responses.size

    def distances(self) -> np.ndarray:
        if self._dist is None:
            self._dist = pairwise_w2(self.values)
        return self._dist

    def with_bandwidth(self, bandwidth: float) -> "ScalarOnDistTraining":
        out = ScalarOnDistTraining(self.predictors, self.responses, bandwidth)
        out._dist = self._dist
        return out


def _nw_weights(dist: np.ndarray, h: float) -> np.ndarray:
    k = gaussian_kernel(dist / h)
    total = k.sum(axis=-1, keepdims=True)
    if np.any(total == 0.0):
        bad = np.flatnonzero(np.atleast_1d(total.squeeze(-1)) == 0.0)
        nearest = float(np.min(np.atleast_2d(dist)[bad[0]]))
        raise AllWeightsVanish(
            f"all kernel weights underflow at bandwidth {h:g} "
            f"(nearest training distance {nearest:g}, max {float(np.max(dist)):g})"
        )
    w = k / total
    assert np.all((w >= 0) & (w <= 1)), "NW weights out of [0, 1]"
    return w


def _require_bandwidth(model: ScalarOnDistTraining) -> float:
    if model.bandwidth is None:
        raise ValueError("model has no bandwidth; choose one with nw_cv_bandwidth")
    if model.bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    return float(model.bandwidth)


def nw_predict(model: ScalarOnDistTraining, query: QuantileFunction) -> float:
    h = _require_bandwidth(model)
    if not np.array_equal(query.prob_grid, model.grid):
        raise GridMismatch("query uses a different probability grid")
    w = _nw_weights(w2_to_rows(model.values, query.values), h)
    return float(w @ model.responses)


def nw_predict_many(model: ScalarOnDistTraining, queries: Sequence[QuantileFunction]) -> np.ndarray:
    h = _require_bandwidth(model)
    _, q = stack_quantiles(queries)
    dist = np.vstack([w2_to_rows(model.values, row) for row in q])
    return _nw_weights(dist, h) @ model.responses


def loo_predictions(dist: np.ndarray, responses: np.ndarray, h: float) -> np.ndarray:
    """Leave-one-out NW predictions from a training distance matrix."""
    k = gaussian_kernel(dist / h)
    np.fill_diagonal(k, 0.0)
    total = k.sum(axis=1)
    if np.any(total == 0.0):
        i = int(np.flatnonzero(total == 0.0)[0])
        others = np.delete(dist[i], i)
        raise AllWeightsVanish(
            f"held-out point {i} has no kernel support at bandwidth {h:g} "
            f"(nearest other distance {float(others.min()):g})"
        )
    return (k @ responses) / total


def loo_errors(dist: np.ndarray, responses: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Mean squared LOO error per candidate bandwidth (``inf`` where weights vanish)."""
    out = np.empty(len(candidates))
    for j, h in enumerate(candidates):
        try:
            pred = loo_predictions(dist, responses, float(h))
        except AllWeightsVanish:
            out[j] = np.inf
            continue
        out[j] = float(np.mean((responses - pred) ** 2))
    return out


def default_bandwidth_grid(dist: np.ndarray, points: int = N_BANDWIDTHS) -> np.ndarray:
    """Log-spaced grid from median/10 to 10*median of the off-diagonal distances."""
    off = dist[~np.eye(dist.shape[0], dtype=bool)]
    med = float(np.median(off[off > 0])) if np.any(off > 0) else 1.0
    return np.geomspace(med / 10.0, med * 10.0, points)


def nw_cv_bandwidth(model: ScalarOnDistTraining, candidate_grid: Sequence[float] | None = None) -> float:
    """Candidate minimizing leave-one-out squared error; ties go to the smaller one."""
    dist = model.distances()
    cand = default_bandwidth_grid(dist) if candidate_grid is None else np.asarray(candidate_grid, dtype=float)
    if cand.size == 0:
        raise ValueError("candidate_grid is empty")
    if cand.size == 1:
        return float(cand[0])
    if model.n < 3:
        raise ValueError("bandwidth cross-validation needs n >= 3")
    order = np.argsort(cand, kind="stable")
    errs = loo_errors(dist, model.responses, cand[order])
    if not np.any(np.isfinite(errs)):
        raise AllWeightsVanish("every candidate bandwidth leaves some point without support")
    return float(cand[order][int(np.argmin(errs))])


def loocv_r2(model: ScalarOnDistTraining) -> float:
    """Leave-one-out R^2; selects the bandwidth by CV when the model has none."""
    if model.n < 3:
        raise ValueError("LOO R^2 needs n >= 3")
    h = model.bandwidth if model.bandwidth is not None else nw_cv_bandwidth(model)
    return r2_score(model.responses, loo_predictions(model.distances(), model.responses, h))


def insample_r2(model: ScalarOnDistTraining) -> float:
    h = _require_bandwidth(model)
    pred = _nw_weights(model.distances(), h) @ model.responses
    return r2_score(model.responses, pred)


# ---------------------------------------------------------------------------
# distributional response, vector predictor


def isotonic_projection(y: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """Weighted least-squares projection onto nondecreasing sequences (PAV).

    Adjacent violating blocks are pooled into their weighted mean until the
    block means are nondecreasing. Runs in O(len(y)).
    """
    y = np.asarray(y, dtype=float)
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)
    n = y.size
    means = np.empty(n)
    wts = np.empty(n)
    sizes = np.empty(n, dtype=int)
    top = -1
    for i in range(n):
        top += 1
        means[top], wts[top], sizes[top] = y[i], w[i], 1
        while top > 0 and means[top - 1] > means[top]:
            wsum = wts[top - 1] + wts[top]
            means[top - 1] = (wts[top - 1] * means[top - 1] + wts[top] * means[top]) / wsum
            wts[top - 1] = wsum
            sizes[top - 1] += sizes[top]
            top -= 1
    return np.repeat(means[: top + 1], sizes[: top + 1])


@dataclass(frozen=True, eq=False)
class FrechetRegressionModel:
    covariate_mean: np.ndarray
    covariate_covariance: np.ndarray
    training_quantiles: tuple[QuantileFunction, ...]
    training_covariates: np.ndarray
    prob_grid: np.ndarray
    training_values: np.ndarray
    covariance_inverse: np.ndarray

    @property
    def n(self) -> int:
        return self.training_covariates.shape[0]

    @property
    def d(self) -> int:
        return self.training_covariates.shape[1]


def frechet_fit(covariates, responses: Sequence[QuantileFunction]) -> FrechetRegressionModel:
    """Store the moments needed by the global Wasserstein regression model.

    The covariance uses denominator ``n``. Raises SingularCovariance when the
    covariance is not positive definite.
    """
    u = np.asarray(covariates, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    grid, values = stack_quantiles(responses)
    n, d = u.shape
    if n != values.shape[0]:
        raise ValueError("covariates and responses differ in length")
    if n <= d:
        raise SingularCovariance(f"need n > d, got n={n}, d={d}")
    mean = u.mean(axis=0)
    centred = u - mean
    cov = centred.T @ centred / n
    eig = np.linalg.eigvalsh(cov)
    if eig.min() <= 1e-12 * max(eig.max(), 1.0):
        raise SingularCovariance(f"covariate covariance is singular (eigenvalues {eig})")
    return FrechetRegressionModel(
        covariate_mean=mean,
        covariate_covariance=cov,
        training_quantiles=tuple(responses),
        training_covariates=u,
        prob_grid=grid,
        training_values=values,
        covariance_inverse=np.linalg.inv(cov),
    )


def frechet_weights(model: FrechetRegressionModel, u) -> np.ndarray:
    """Empirical weights ``s_in(u) = 1 + (U_i - Ubar)' Sigma^-1 (u - Ubar)``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (model.d,):
        raise ValueError(f"query must have {model.d} components")
    centred = model.training_covariates - model.covariate_mean
    return 1.0 + centred @ model.covariance_inverse @ (u - model.covariate_mean)


def frechet_predict(
    model: FrechetRegressionModel,
    u,
    support: tuple[float, float] | None = SUPPORT,
) -> QuantileFunction:
    """Conditional Wasserstein mean quantile function at covariate ``u``.

    The weighted average of training quantiles is projected onto the
    nondecreasing cone; with ``support`` set, values outside it are clipped
    (with a warning).
    """
    s = frechet_weights(model, u)
    avg = s @ model.training_values / model.n
    q = isotonic_projection(avg)
    if support is not None:
        lo, hi = support
        if q[0] < lo or q[-1] > hi:
            warnings.warn(
                f"predicted quantiles outside support [{lo:g}, {hi:g}] were clipped",
                RuntimeWarning,
                stacklevel=2,
            )
            q = np.clip(q, lo, hi)
    return QuantileFunction(model.prob_grid, q, "prediction")


def frechet_fitted(model: FrechetRegressionModel, support: tuple[float, float] | None = SUPPORT) -> np.ndarray:
    """Fitted quantile values at every training covariate, shape ``(n, M)``."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return np.vstack(
            [frechet_predict(model, ui, support).values for ui in model.training_covariates]
        )


def frechet_r2(model: FrechetRegressionModel, support: tuple[float, float] | None = SUPPORT) -> float:
    """Fraction of Frechet variance explained by the fitted conditional means."""
    values = model.training_values
    centre = values.mean(axis=0)
    ss_tot = float(np.sum(w2_to_rows(values, centre) ** 2))
    # relative threshold: identical rows still leave rounding residue in the mean
    if ss_tot <= 1e-20 * float(np.sum(values * values)) / values.shape[1]:
        raise ZeroFrechetVariance("all response distributions coincide")
    fitted = frechet_fitted(model, support)
    diff = values - fitted
    ss_res = float(np.sum(np.mean(diff * diff, axis=1)))
    return 1.0 - ss_res / ss_tot
