"""k-groups clustering on a precomputed distance matrix.

The within-cluster objective is ``W = sum_j |C_j| / 2 * g_jj`` where ``g_jj`` is
the mean of all pairwise distances inside cluster j (zero diagonal included).
Since the between-cluster energy ``S`` satisfies ``S + W = const``, minimizing W
maximizes the energy separation of the clusters.

Labels are 0-based (``0..k-1``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._parallel import map_ordered, substream
from .errors import EmptyCluster
from .wasserstein import DistanceMatrix


class Heuristic(str, enum.Enum):
    LLOYD = "lloyd"
    HARTIGAN = "hartigan"


@dataclass
class ClusteringResult:
    labels: np.ndarray
    within_objective: float
    iterations: int
    restarts_used: int
    seed: int
    best_restart: int = 0

    def to_dict(self) -> dict:
        return {
            "labels": self.labels.tolist(),
            "within_objective": self.within_objective,
            "iterations": self.iterations,
            "restarts_used": self.restarts_used,
            "seed": self.seed,
            "best_restart": self.best_restart,
        }


def _as_array(dm) -> np.ndarray:
    return dm.entries if isinstance(dm, DistanceMatrix) else np.asarray(dm, dtype=float)


def _codes(labels, k: int | None) -> tuple[np.ndarray, int]:
    labels = np.asarray(labels, dtype=int)
    if labels.ndim != 1 or labels.size == 0:
        raise ValueError("labels must be a nonempty vector")
    if labels.min() < 0:
        raise ValueError("labels must be nonnegative")
    k = int(labels.max()) + 1 if k is None else k
    sizes = np.bincount(labels, minlength=k)
    if sizes.size > k or np.any(sizes == 0):
        raise EmptyCluster(f"cluster sizes {sizes.tolist()} (k={k})")
    return labels, k


def _cluster_sums(d: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    onehot = np.eye(k)[labels]
    return onehot.T @ d @ onehot  # (k, k) block sums


def within_objective(dm, labels, k: int | None = None) -> float:
    """``W = sum_j (|C_j| / 2) * mean_{i, i' in C_j} rho(i, i')``."""
    d = _as_array(dm)
    labels, k = _codes(labels, k)
    sizes = np.bincount(labels, minlength=k)
    return float(np.sum(np.diag(_cluster_sums(d, labels, k)) / (2.0 * sizes)))


def between_objective(dm, labels, k: int | None = None) -> float:
    """``S = sum_{j<l} n_j n_l / 2n * (2 g_jl - g_jj - g_ll)``."""
    d = _as_array(dm)
    labels, k = _codes(labels, k)
    sizes = np.bincount(labels, minlength=k)
    g = _cluster_sums(d, labels, k) / np.outer(sizes, sizes)
    j, l = np.triu_indices(k, k=1)
    return float(np.sum(sizes[j] * sizes[l] / (2.0 * labels.size) * (2 * g[j, l] - g[j, j] - g[l, l])))


# ---------------------------------------------------------------------------
# initialisation


def _random_labels(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    labels = rng.integers(0, k, size=n)
    labels[rng.permutation(n)[:k]] = np.arange(k)
    return labels


def _farthest_point_labels(d: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ style seeding on the distance matrix, then nearest-centre labels."""
    n = d.shape[0]
    centres = [int(rng.integers(n))]
    for _ in range(1, k):
        near = d[:, centres].min(axis=1)
        weights = near**2
        total = weights.sum()
        if total <= 0:
            remaining = np.setdiff1d(np.arange(n), centres)
            centres.append(int(rng.choice(remaining)))
        else:
            centres.append(int(rng.choice(n, p=weights / total)))
    labels = np.argmin(d[:, centres], axis=1)
    labels[centres] = np.arange(k)
    return labels


# ---------------------------------------------------------------------------
# local search


class _State:
    """Cluster bookkeeping: per-point sums to each cluster and per-cluster totals."""

    def __init__(self, d: np.ndarray, labels: np.ndarray, k: int):
        self.d = d
        self.k = k
        self.labels = labels.copy()
        onehot = np.eye(k)[self.labels]
        self.sums = d @ onehot  # sums[i, j] = sum_{i' in C_j} rho(i, i')
        self.sizes = onehot.sum(axis=0)
        self.totals = np.array([self.sums[self.labels == j, j].sum() for j in range(k)])

    def objective(self) -> float:
        return float(np.sum(self.totals / (2.0 * self.sizes)))

    def move(self, i: int, b: int) -> None:
        a = self.labels[i]
        self.totals[a] -= 2.0 * self.sums[i, a]
        self.totals[b] += 2.0 * self.sums[i, b]
        self.sizes[a] -= 1
        self.sizes[b] += 1
        self.sums[:, a] -= self.d[:, i]
        self.sums[:, b] += self.d[:, i]
        self.labels[i] = b


def _hartigan(state: _State, max_iter: int, tol: float) -> int:
    n = state.d.shape[0]
    for it in range(1, max_iter + 1):
        moved = False
        for i in range(n):
            a = state.labels[i]
            if state.sizes[a] <= 1:
                continue
            na = state.sizes[a]
            ta = state.totals[a]
            remove = (ta - 2.0 * state.sums[i, a]) / (2.0 * (na - 1)) - ta / (2.0 * na)
            nb = state.sizes
            tb = state.totals
            add = (tb + 2.0 * state.sums[i]) / (2.0 * (nb + 1)) - tb / (2.0 * nb)
            delta = remove + add
            delta[a] = 0.0
            b = int(np.argmin(delta))
            if delta[b] < -tol:
                before = state.objective()
                state.move(i, b)
                assert state.objective() <= before + tol, "W increased on a Hartigan move"
                moved = True
        if not moved:
            return it
    return max_iter


def _lloyd(state: _State, max_iter: int, tol: float) -> int:
    d, k = state.d, state.k
    for it in range(1, max_iter + 1):
        before = state.objective()
        # squared embedding distance of each point to each cluster centroid
        cost = state.sums / state.sizes - state.totals / (2.0 * state.sizes**2)
        current = cost[np.arange(d.shape[0]), state.labels]
        best = np.argmin(cost, axis=1)
        keep = cost[np.arange(d.shape[0]), best] >= current - tol
        new = np.where(keep, state.labels, best)
        new = _repair_empty(d, new, k)
        if np.array_equal(new, state.labels):
            return it
        fresh = _State(d, new, k)
        if fresh.objective() > before + tol:
            return it
        state.__dict__.update(fresh.__dict__)
    return max_iter


def _repair_empty(d: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    labels = labels.copy()
    for j in range(k):
        if np.any(labels == j):
            continue
        state = _State(d, labels, k)
        sizes = np.maximum(state.sizes, 1)
        cost = state.sums / sizes - state.totals / (2.0 * sizes**2)
        own = cost[np.arange(labels.size), labels]
        own[state.sizes[labels] <= 1] = -np.inf
        labels[int(np.argmax(own))] = j
    return labels


def _single_restart(d: np.ndarray, k: int, heuristic: Heuristic, max_iter: int, seed: int, r: int):
    rng = substream(seed, r)
    n = d.shape[0]
    if k == 1:
        labels = np.zeros(n, dtype=int)
    elif k == n:
        labels = np.arange(n)
    elif r == 0:
        labels = _farthest_point_labels(d, k, rng)
    else:
        labels = _random_labels(n, k, rng)
    labels = _repair_empty(d, labels, k)
    state = _State(d, labels, k)
    tol = 1e-12 * max(float(d.max()), 1.0) * n
    if 1 < k < n:
        iters = (_hartigan if heuristic is Heuristic.HARTIGAN else _lloyd)(state, max_iter, tol)
    else:
        iters = 0
    return state.labels.copy(), within_objective(d, state.labels, k), iters


def kgroups_cluster(
    dm,
    k: int,
    heuristic: Heuristic | str = Heuristic.HARTIGAN,
    restarts: int = 20,
    max_iter: int = 100,
    seed: int = 0,
    squared: bool = False,
    threads: int | None = None,
) -> ClusteringResult:
    """Minimize the within-cluster energy objective by local search.

    Parameters
    ----------
    dm : DistanceMatrix or ndarray
        Pairwise distances (W2 by default).
    k : int
        Number of clusters, ``1 <= k <= n``.
    heuristic : {"hartigan", "lloyd"}
        Hartigan accepts single-point moves that strictly decrease W; Lloyd
        reassigns all points to their cheapest cluster and recomputes.
    restarts : int
        Independent starts; the first uses farthest-point seeding, the rest
        random labelings. The lowest W wins, ties to the earliest restart.
    squared : bool
        Cluster on squared distances instead (classical k-means behaviour).
    """
    d = _as_array(dm)
    if squared:
        d = d * d
    n = d.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    heuristic = Heuristic(heuristic)
    runs = map_ordered(
        lambda r: _single_restart(d, k, heuristic, max_iter, seed, r), range(restarts), threads
    )
    best = min(range(restarts), key=lambda r: (runs[r][1], r))
    labels, w, iters = runs[best]
    return ClusteringResult(labels, w, iters, restarts, seed, best)
