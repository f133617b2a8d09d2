"""2-Wasserstein geometry on quantile-function representations.

For one-dimensional distributions the 2-Wasserstein distance is the L2 distance
between quantile functions, so everything here reduces to arithmetic on an
``n x M`` matrix of quantile values sharing one probability grid. Integrals over
``(0, 1)`` use the midpoint rule on the half-offset grid, i.e. a plain mean over
grid points.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .densities import QuantileFunction
from .errors import EmptySample, GridMismatch

DSTM_MAGIC = b"DSTM"


def stack_quantiles(sample: Sequence[QuantileFunction]) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(prob_grid, values)`` with ``values`` of shape ``(n, M)``.

    Raises GridMismatch unless every element uses the same probability grid.
    """
    if len(sample) == 0:
        raise EmptySample("sample is empty")
    grid = sample[0].prob_grid
    for q in sample[1:]:
        if q.prob_grid is not grid and not np.array_equal(q.prob_grid, grid):
            raise GridMismatch("quantile functions use different probability grids")
    return grid, np.vstack([q.values for q in sample])


def w2_distance(q1: QuantileFunction, q2: QuantileFunction) -> float:
    if q1.prob_grid is not q2.prob_grid and not np.array_equal(q1.prob_grid, q2.prob_grid):
        raise GridMismatch("quantile functions use different probability grids")
    diff = q1.values - q2.values
    return float(np.sqrt(np.mean(diff * diff)))


def w2_to_rows(values: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Distances from each row of ``values`` to the single quantile vector ``target``."""
    diff = values - target
    return np.sqrt(np.mean(diff * diff, axis=1))


def frechet_mean(sample: Sequence[QuantileFunction]) -> QuantileFunction:
    """Wasserstein barycenter: the pointwise average of quantile functions."""
    grid, values = stack_quantiles(sample)
    return QuantileFunction(grid, values.mean(axis=0), "frechet_mean")


def frechet_variance(sample: Sequence[QuantileFunction], mean: QuantileFunction | None = None) -> float:
    grid, values = stack_quantiles(sample)
    centre = values.mean(axis=0) if mean is None else mean.values
    if mean is not None and not np.array_equal(mean.prob_grid, grid):
        raise GridMismatch("mean uses a different probability grid")
    return float(np.mean(w2_to_rows(values, centre) ** 2))


def pairwise_w2(values: np.ndarray) -> np.ndarray:
    """Square matrix of W2 distances between the rows of a quantile matrix."""
    n, m = values.shape
    if n == 1:
        return np.zeros((1, 1))
    return np.sqrt(squareform(pdist(values, "sqeuclidean")) / m)


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric, zero-diagonal matrix of pairwise distances.

    Binary layout (``to_bytes``): the 4 magic bytes ``DSTM``, the size ``n`` as a
    little-endian unsigned 64-bit integer, then the strict lower triangle as
    little-endian float64 in row-major order (row i holds entries (i, 0..i-1)).
    """

    entries: np.ndarray
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        e = self.entries
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError("distance matrix must be square")
        if self.labels and len(self.labels) != e.shape[0]:
            raise ValueError("labels length does not match matrix size")

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def lower_triangle(self) -> np.ndarray:
        rows, cols = np.tril_indices(self.n, k=-1)
        return self.entries[rows, cols]

    def to_bytes(self) -> bytes:
        tri = np.ascontiguousarray(self.lower_triangle(), dtype="<f8")
        return DSTM_MAGIC + struct.pack("<Q", self.n) + tri.tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "DistanceMatrix":
        if len(blob) < 12 or blob[:4] != DSTM_MAGIC:
            raise ValueError("not a DSTM distance matrix")
        (n,) = struct.unpack("<Q", blob[4:12])
        count = n * (n - 1) // 2
        if len(blob) != 12 + 8 * count:
            raise ValueError("truncated or oversized DSTM payload")
        tri = np.frombuffer(blob, dtype="<f8", count=count, offset=12)
        entries = np.zeros((n, n))
        rows, cols = np.tril_indices(n, k=-1)
        entries[rows, cols] = tri
        entries[cols, rows] = tri
        return cls(entries)

    def to_csv(self) -> str:
        labels = self.labels or tuple(str(i) for i in range(self.n))
        lines = ["," + ",".join(labels)]
        for lab, row in zip(labels, self.entries):
            lines.append(lab + "," + ",".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "DistanceMatrix":
        rows = [line.split(",") for line in text.strip().splitlines()]
        labels = tuple(rows[0][1:])
        entries = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
        return cls(entries, labels)


def distance_matrix(sample: Sequence[QuantileFunction]) -> DistanceMatrix:
    _, values = stack_quantiles(sample)
    return DistanceMatrix(pairwise_w2(values), tuple(q.subject_id for q in sample))
