"""Time-in-range compositions, ilr coordinates and kNN regression."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

from .densities import empirical_quantile
from .errors import DimensionMismatch, EmptyMask, EmptySeries, NonpositivePart
from .ingest import CgmSeries

Closed = Literal["left", "right"]

ZERO_REPAIR = 1e-6
KNN_NEIGHBORS = 10


@dataclass(frozen=True)
class CutoffScheme:
    """Range boundaries plus the side on which cells are closed.

    With ``closed="right"`` the cells are ``(-inf, c1], (c1, c2], ..., (cK, inf)``;
    with ``closed="left"`` they are ``(-inf, c1), [c1, c2), ..., [cK, inf)``.
    """

    cutoffs: tuple[float, ...]
    closed: Closed = "right"
    name: str = "custom"


# Printed ADA ranges <54, 54-69, 70-180, 181-250, >250 read with floor-compatible
# membership, i.e. left-closed real cells.
ADA = CutoffScheme((54.0, 70.0, 181.0, 251.0), "left", "ada")


@dataclass(frozen=True, eq=False)
class Composition:
    proportions: np.ndarray
    cutoffs: tuple[float, ...]
    subject_id: str = ""

    def __post_init__(self):
        if self.proportions.size != len(self.cutoffs) + 1:
            raise ValueError("need len(cutoffs) + 1 proportions")


def range_counts(values: np.ndarray, cutoffs: Sequence[float], closed: Closed = "right") -> np.ndarray:
    cuts = np.asarray(cutoffs, dtype=float)
    if np.any(np.diff(cuts) <= 0):
        raise ValueError("cutoffs must be strictly increasing")
    side = "left" if closed == "right" else "right"
    cells = np.searchsorted(cuts, np.asarray(values, dtype=float), side=side)
    return np.bincount(cells, minlength=cuts.size + 1)


def tir_composition(
    series: CgmSeries,
    cutoffs: Sequence[float] | CutoffScheme,
    zero_repair: float = ZERO_REPAIR,
    closed: Closed = "right",
) -> Composition:
    """Fraction of readings per glucose range, with zero cells repaired.

    ``zero_repair`` is added to every cell before renormalizing to one, so all
    parts are strictly positive.
    """
    if isinstance(cutoffs, CutoffScheme):
        closed = cutoffs.closed
        cutoffs = cutoffs.cutoffs
    if zero_repair <= 0:
        raise ValueError("zero_repair must be positive")
    values = series.glucose
    if values.size == 0:
        raise EmptySeries(f"subject {series.subject_id} has no records")
    counts = range_counts(values, cutoffs, closed)
    raw = counts / values.size
    repaired = raw + zero_repair
    return Composition(repaired / repaired.sum(), tuple(float(c) for c in cutoffs), series.subject_id)


def helmert_basis(parts: int) -> np.ndarray:
    """Orthonormal contrast matrix ``(D-1, D)``; row j compares parts 1..j to part j+1."""
    basis = np.zeros((parts - 1, parts))
    for j in range(1, parts):
        basis[j - 1, :j] = 1.0 / j
        basis[j - 1, j] = -1.0
        basis[j - 1] *= np.sqrt(j / (j + 1.0))
    return basis


def ilr_transform(c: Composition | np.ndarray) -> np.ndarray:
    """Isometric log-ratio coordinates in the Helmert basis.

    Coordinate j (1-based) is ``sqrt(j/(j+1)) * ln(gmean(x_1..x_j) / x_{j+1})``.
    Accepts a single composition or an ``(n, D)`` array of them.
    """
    x = c.proportions if isinstance(c, Composition) else np.asarray(c, dtype=float)
    if np.any(x <= 0):
        raise NonpositivePart("ilr needs strictly positive parts")
    return np.log(x) @ helmert_basis(x.shape[-1]).T


def knn_regress(train_x, train_y, query, k: int = KNN_NEIGHBORS) -> float:
    """Mean response of the k nearest training points (Euclidean, ties by index)."""
    x = np.atleast_2d(np.asarray(train_x, dtype=float))
    y = np.asarray(train_y, dtype=float)
    q = np.asarray(query, dtype=float)
    if q.shape != x.shape[1:]:
        raise DimensionMismatch(f"query has shape {q.shape}, training vectors {x.shape[1:]}")
    if not 1 <= k <= x.shape[0]:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={x.shape[0]}")
    dist = np.sqrt(np.sum((x - q) ** 2, axis=1))
    nearest = np.argsort(dist, kind="stable")[:k]
    return float(y[nearest].mean())


def knn_loo_predictions(train_x, train_y, k: int = KNN_NEIGHBORS) -> np.ndarray:
    x = np.atleast_2d(np.asarray(train_x, dtype=float))
    y = np.asarray(train_y, dtype=float)
    out = np.empty(y.size)
    for i in range(y.size):
        mask = np.arange(y.size) != i
        out[i] = knn_regress(x[mask], y[mask], x[i], k)
    return out


def decile_cutoffs(series_set: Iterable[CgmSeries], mask: Iterable[str]) -> np.ndarray:
    """Type-1 deciles of the pooled readings of the masked (normoglycemic) subjects."""
    mask = set(mask)
    if not mask:
        raise EmptyMask("normoglycemic mask is empty")
    pooled = [s.glucose for s in series_set if s.subject_id in mask]
    if not pooled:
        raise EmptyMask("no series match the mask")
    values = np.concatenate(pooled)
    return empirical_quantile(values, np.arange(1, 10) / 10).values


def decile_scheme(series_set: Iterable[CgmSeries], mask: Iterable[str]) -> CutoffScheme:
    cuts = decile_cutoffs(series_set, mask)
    if np.any(np.diff(cuts) <= 0):
        # tied deciles cannot bound distinct ranges; nudge them apart
        cuts = np.maximum.accumulate(cuts + np.arange(cuts.size) * 1e-9)
    return CutoffScheme(tuple(float(c) for c in cuts), "right", "deciles")
