"""CSV and JSON serialization of densities, quantile functions and tables.

Bulk vectors go to CSV with the grid in the first column and one column per
subject. The JSON envelope carries the same numbers plus metadata::

    {"kind": "quantile_functions", "grid": [...], "subjects": [...],
     "values": [[...], ...], "metadata": {...}}
"""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Sequence

import numpy as np

from .densities import Glucodensity, QuantileFunction
from .errors import DistrepError, MalformedHeader


def _columns_csv(first: str, grid: np.ndarray, names: Sequence[str], columns: np.ndarray) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([first, *names])
    for i, g in enumerate(grid):
        writer.writerow([repr(float(g)), *(repr(float(v)) for v in columns[:, i])])
    return out.getvalue()


def _read_columns(text: str, first: str) -> tuple[np.ndarray, list[str], np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or not rows[0] or rows[0][0] != first:
        raise MalformedHeader(f"expected first column {first!r}")
    names = rows[0][1:]
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise DistrepError(f"non-numeric value in {first} table: {exc}") from None
    if data.ndim != 2 or data.shape[1] != len(names) + 1:
        raise DistrepError("ragged table")
    return data[:, 0], names, data[:, 1:].T


def quantiles_to_csv(quantiles: Sequence[QuantileFunction]) -> str:
    grid = quantiles[0].prob_grid
    return _columns_csv("p", grid, [q.subject_id for q in quantiles], np.vstack([q.values for q in quantiles]))


def quantiles_from_csv(text: str) -> list[QuantileFunction]:
    grid, names, values = _read_columns(text, "p")
    return [QuantileFunction(grid, v.copy(), n) for n, v in zip(names, values)]


def densities_to_csv(densities: Sequence[Glucodensity]) -> str:
    grid = densities[0].support_grid
    return _columns_csv("glucose", grid, [g.subject_id for g in densities], np.vstack([g.values for g in densities]))


def densities_from_csv(text: str, bandwidths: Sequence[float] | None = None) -> list[Glucodensity]:
    grid, names, values = _read_columns(text, "glucose")
    bws = bandwidths if bandwidths is not None else [float("nan")] * len(names)
    return [Glucodensity(grid, v.copy(), float(b), n) for n, v, b in zip(names, values, bws)]


def quantiles_envelope(quantiles: Sequence[QuantileFunction], metadata: dict[str, Any] | None = None) -> dict:
    return {
        "kind": "quantile_functions",
        "grid": quantiles[0].prob_grid.tolist(),
        "subjects": [q.subject_id for q in quantiles],
        "values": [q.values.tolist() for q in quantiles],
        "metadata": metadata or {},
    }


def densities_envelope(densities: Sequence[Glucodensity], metadata: dict[str, Any] | None = None) -> dict:
    meta = {"bandwidths": {g.subject_id: g.bandwidth for g in densities}}
    meta.update(metadata or {})
    return {
        "kind": "glucodensities",
        "grid": densities[0].support_grid.tolist(),
        "subjects": [g.subject_id for g in densities],
        "values": [g.values.tolist() for g in densities],
        "metadata": meta,
    }


def from_envelope(doc: dict) -> list[QuantileFunction] | list[Glucodensity]:
    grid = np.asarray(doc["grid"], dtype=float)
    if doc.get("kind") == "quantile_functions":
        return [QuantileFunction(grid, np.asarray(v, dtype=float), s) for s, v in zip(doc["subjects"], doc["values"])]
    if doc.get("kind") == "glucodensities":
        bws = doc.get("metadata", {}).get("bandwidths", {})
        return [
            Glucodensity(grid, np.asarray(v, dtype=float), float(bws.get(s, float("nan"))), s)
            for s, v in zip(doc["subjects"], doc["values"])
        ]
    raise DistrepError(f"unknown envelope kind {doc.get('kind')!r}")


def read_table(text: str) -> list[dict[str, str]]:
    """Rows of a headed CSV as dicts (leading/trailing spaces stripped)."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise MalformedHeader("table has no header")
    return [{k.strip(): (v or "").strip() for k, v in row.items() if k is not None} for row in reader]


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=True) + "\n"
