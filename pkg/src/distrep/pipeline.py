"""End-to-end comparison of glucose representations as biomarker predictors.

Three representations are scored by leave-one-out R^2 for each response:

* ``glucodensity``: NW regression on W2 distances between empirical quantiles.
* ``tir_deciles`` / ``tir_ada``: time-in-range compositions, ilr, kNN (k=10).
* ``mean_glucose``: NW regression on the absolute difference of mean glucose.

Bandwidths are chosen by LOO cross-validation within each representation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ._parallel import map_ordered
from .baseline import ADA, CutoffScheme, decile_scheme, ilr_transform, knn_loo_predictions, tir_composition
from .densities import QuantileFunction, default_prob_grid, empirical_quantile
from .ingest import CgmSeries
from .regression import (
    default_bandwidth_grid,
    loo_errors,
    loo_predictions,
    r2_score,
)
from .wasserstein import pairwise_w2, stack_quantiles

REPRESENTATIONS = ("glucodensity", "tir_deciles", "tir_ada", "mean_glucose")


def nw_loo_r2(dist: np.ndarray, y: np.ndarray) -> tuple[float, float, np.ndarray]:
    """LOO R^2 with CV-selected bandwidth; returns ``(r2, bandwidth, predictions)``."""
    grid = default_bandwidth_grid(dist)
    errs = loo_errors(dist, y, grid)
    h = float(grid[int(np.argmin(errs))])
    pred = loo_predictions(dist, y, h)
    return r2_score(y, pred), h, pred


@dataclass
class Comparison:
    responses: tuple[str, ...]
    r2: dict[str, dict[str, float]]  # representation -> response -> R^2
    predictions: dict[str, dict[str, np.ndarray]]
    observed: dict[str, np.ndarray]
    subject_ids: tuple[str, ...]
    cutoffs: dict[str, tuple[float, ...]]

    def table_rows(self) -> list[dict]:
        return [
            {"representation": rep, **{r: self.r2[rep][r] for r in self.responses}}
            for rep in REPRESENTATIONS
        ]

    def glucodensity_wins(self) -> dict[str, bool]:
        """Whether glucodensity R^2 strictly beats every other representation, per response."""
        return {
            r: all(self.r2["glucodensity"][r] > self.r2[rep][r] for rep in REPRESENTATIONS[1:])
            for r in self.responses
        }

    def to_dict(self) -> dict:
        return {
            "r2": self.r2,
            "glucodensity_wins": self.glucodensity_wins(),
            "cutoffs": {k: list(v) for k, v in self.cutoffs.items()},
            "n_subjects": len(self.subject_ids),
        }

    def predictions_csv(self) -> str:
        """Long-format observed vs LOO-predicted values, one row per subject/response/representation."""
        lines = ["subject_id,response,representation,observed,predicted"]
        for r in self.responses:
            for rep in REPRESENTATIONS:
                for sid, obs, pred in zip(self.subject_ids, self.observed[r], self.predictions[rep][r]):
                    lines.append(f"{sid},{r},{rep},{obs!r},{float(pred)!r}")
        return "\n".join(lines) + "\n"


def compare_representations(
    series: Sequence[CgmSeries],
    responses: Mapping[str, Sequence[float]],
    normo_ids: Sequence[str],
    prob_grid: np.ndarray | None = None,
    ada: CutoffScheme = ADA,
    threads: int | None = None,
) -> Comparison:
    prob_grid = default_prob_grid() if prob_grid is None else prob_grid
    quantiles: list[QuantileFunction] = map_ordered(
        lambda s: empirical_quantile(s, prob_grid), series, threads
    )
    _, qvals = stack_quantiles(quantiles)
    d_density = pairwise_w2(qvals)

    means = np.array([s.glucose.mean() for s in series])
    d_mean = np.abs(means[:, None] - means[None, :])

    schemes = {"tir_deciles": decile_scheme(series, normo_ids), "tir_ada": ada}
    ilr = {
        name: ilr_transform(np.vstack([tir_composition(s, sch).proportions for s in series]))
        for name, sch in schemes.items()
    }

    names = tuple(responses)
    r2: dict[str, dict[str, float]] = {rep: {} for rep in REPRESENTATIONS}
    preds: dict[str, dict[str, np.ndarray]] = {rep: {} for rep in REPRESENTATIONS}
    observed = {}
    for name in names:
        y = np.asarray(responses[name], dtype=float)
        observed[name] = y
        r2["glucodensity"][name], _, preds["glucodensity"][name] = nw_loo_r2(d_density, y)
        r2["mean_glucose"][name], _, preds["mean_glucose"][name] = nw_loo_r2(d_mean, y)
        for rep, coords in ilr.items():
            p = knn_loo_predictions(coords, y)
            preds[rep][name] = p
            r2[rep][name] = r2_score(y, p)
    return Comparison(
        names,
        r2,
        preds,
        observed,
        tuple(s.subject_id for s in series),
        {k: v.cutoffs for k, v in schemes.items()},
    )
