"""``distrep`` command-line interface.

Exit codes: 0 success, 1 data error, 2 usage error. Errors are written to
standard error as one line of JSON. JSON results embed a run manifest; CSV
outputs get a ``<file>.manifest.json`` sidecar.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from datetime import timedelta
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from ._parallel import map_ordered, resolve_threads
from .baseline import ADA, CutoffScheme, decile_scheme, ilr_transform, tir_composition
from .clustering import kgroups_cluster
from .densities import (
    BandwidthSelector,
    KernelKind,
    QuantileFunction,
    default_prob_grid,
    default_support_grid,
    density_to_quantile,
    empirical_quantile,
    estimate_glucodensity,
)
from .errors import AllDataDiscarded, DistrepError
from .ingest import CsvFormat, clean_series, discarded_days, parse_cgm_csv, write_cgm_csv
from .io import (
    densities_envelope,
    densities_to_csv,
    dumps,
    quantiles_envelope,
    quantiles_from_csv,
    quantiles_to_csv,
    read_table,
)
from .inference import GroupedSample, anova_test, energy_permutation_test, k_sample_energy
from .pipeline import compare_representations
from .regression import (
    ScalarOnDistTraining,
    frechet_fit,
    frechet_fitted,
    frechet_r2,
    insample_r2,
    loo_predictions,
    nw_cv_bandwidth,
    r2_score,
)
from .simulate import BIOMARKERS, CohortConfig, simulate_cohort, truth_table_csv
from .wasserstein import DistanceMatrix, distance_matrix, frechet_mean, frechet_variance


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# helpers


class Run:
    """Collects the manifest for one invocation."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        # thread count is excluded: outputs must not depend on it
        params = {k: v for k, v in vars(args).items() if k not in {"func", "command", "threads"}}
        self.parameters = {k: (str(v) if isinstance(v, Path) else v) for k, v in params.items()}
        self.input_digests: dict[str, str] = {}
        self.seed = getattr(args, "seed", None)

    def read_bytes(self, path: Path) -> bytes:
        data = Path(path).read_bytes()
        self.input_digests[str(path)] = "sha256:" + hashlib.sha256(data).hexdigest()
        return data

    def read_text(self, path: Path) -> str:
        return self.read_bytes(path).decode("utf-8-sig")

    def manifest(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "parameters": self.parameters,
            "input_digests": self.input_digests,
            "seed": self.seed,
            "tool_version": __version__,
        }

    def write_csv(self, path: Path, text: str) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        Path(str(path) + ".manifest.json").write_text(dumps(self.manifest()))

    def emit(self, result: dict[str, Any], out: Path | None = None) -> None:
        doc = {"result": result, "manifest": self.manifest()}
        text = dumps(doc)
        if out is not None:
            Path(out).parent.mkdir(parents=True, exist_ok=True)
            Path(out).write_text(text)
        sys.stdout.write(text)


def _load_series(run: Run, args, clean: bool = True):
    fmt = CsvFormat(
        timestamp_format=getattr(args, "timestamp_format", None),
        nominal_interval=timedelta(minutes=getattr(args, "interval_minutes", 5.0)),
    )
    series = parse_cgm_csv(run.read_bytes(args.input), fmt)
    if not clean:
        return series, []
    kept, dropped = [], []
    for s in series:
        try:
            kept.append(clean_series(s, timedelta(minutes=args.max_gap_minutes)))
        except AllDataDiscarded:
            dropped.append(s.subject_id)
    if not kept:
        raise AllDataDiscarded("no subject survives cleaning")
    return kept, dropped


def _load_quantiles(run: Run, path: Path):
    qs = quantiles_from_csv(run.read_text(path))
    if not qs:
        raise DistrepError(f"{path}: no quantile columns")
    return qs


def _column(run: Run, path: Path, column: str, id_column: str) -> dict[str, str]:
    rows = read_table(run.read_text(path))
    if rows and (column not in rows[0] or id_column not in rows[0]):
        raise DistrepError(f"{path}: needs columns {id_column!r} and {column!r}")
    return {r[id_column]: r[column] for r in rows}


def _aligned(qs, mapping: dict[str, str], what: str):
    missing = [q.subject_id for q in qs if q.subject_id not in mapping]
    if missing:
        raise DistrepError(f"{what} missing for subjects {missing[:5]}")
    return [mapping[q.subject_id] for q in qs]


def _floats(values: Sequence[str], what: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in values])
    except ValueError as exc:
        raise DistrepError(f"non-numeric {what}: {exc}") from None


# ---------------------------------------------------------------------------
# subcommands


def cmd_ingest(args) -> int:
    run = Run("ingest", args)
    fmt = CsvFormat(args.timestamp_format, nominal_interval=timedelta(minutes=args.interval_minutes))
    series = parse_cgm_csv(run.read_bytes(args.input), fmt)
    gap = timedelta(minutes=args.max_gap_minutes)
    summary, kept = [], []
    for s in series:
        days = [d.isoformat() for d in discarded_days(s, gap)]
        try:
            c = clean_series(s, gap)
            kept.append(c)
            n_out = len(c)
        except AllDataDiscarded:
            n_out = 0
        summary.append({"subject_id": s.subject_id, "records_in": len(s), "records_out": n_out, "discarded_days": days})
    if args.out:
        run.write_csv(args.out, write_cgm_csv(kept))
    run.emit({"subjects": summary, "subjects_kept": len(kept)})
    return 0


def cmd_density(args) -> int:
    run = Run("density", args)
    series, dropped = _load_series(run, args)
    grid = default_support_grid(args.grid_min, args.grid_max, args.grid_points)
    kernel, selector = KernelKind(args.kernel), BandwidthSelector(args.selector)
    dens = map_ordered(
        lambda s: estimate_glucodensity(s, grid, kernel, args.bandwidth, selector), series, args.threads
    )
    run.write_csv(args.out, densities_to_csv(dens))
    if args.json_out:
        Path(args.json_out).write_text(dumps({**densities_envelope(dens), "manifest": run.manifest()}))
    run.emit({"bandwidths": {g.subject_id: g.bandwidth for g in dens}, "dropped_subjects": dropped})
    return 0


def cmd_quantile(args) -> int:
    run = Run("quantile", args)
    series, dropped = _load_series(run, args)
    grid = default_prob_grid(args.points)
    if args.method == "empirical":
        qs = map_ordered(lambda s: empirical_quantile(s, grid), series, args.threads)
    else:
        support = default_support_grid()
        qs = map_ordered(
            lambda s: density_to_quantile(estimate_glucodensity(s, support), grid), series, args.threads
        )
    run.write_csv(args.out, quantiles_to_csv(qs))
    if args.json_out:
        meta = {"method": args.method, "points": args.points}
        Path(args.json_out).write_text(dumps({**quantiles_envelope(qs, meta), "manifest": run.manifest()}))
    run.emit({"subjects": [q.subject_id for q in qs], "dropped_subjects": dropped, "points": args.points})
    return 0


def cmd_distmat(args) -> int:
    run = Run("distmat", args)
    dm = distance_matrix(_load_quantiles(run, args.quantiles))
    run.write_csv(args.out, dm.to_csv())
    if args.binary:
        Path(args.binary).write_bytes(dm.to_bytes())
    run.emit({"n": dm.n})
    return 0


def cmd_frechet_mean(args) -> int:
    run = Run("frechet-mean", args)
    qs = _load_quantiles(run, args.quantiles)
    mean = frechet_mean(qs)
    if args.out:
        run.write_csv(args.out, quantiles_to_csv([mean]))
    run.emit({"n": len(qs), "frechet_variance": frechet_variance(qs, mean), "mean": mean.values.tolist()})
    return 0


def cmd_regress_scalar(args) -> int:
    run = Run("regress-scalar", args)
    qs = _load_quantiles(run, args.quantiles)
    y = _floats(_aligned(qs, _column(run, args.responses, args.response, args.id_column), "responses"), "response")
    model = ScalarOnDistTraining(qs, y, args.bandwidth)
    h = args.bandwidth if args.bandwidth is not None else nw_cv_bandwidth(model)
    model = model.with_bandwidth(h)
    loo = loo_predictions(model.distances(), y, h)
    run.emit(
        {
            "response": args.response,
            "bandwidth": h,
            "r2_loo": r2_score(y, loo),
            "r2_insample": insample_r2(model),
            "predictions": [{"subject_id": q.subject_id, "observed": float(o), "loo_predicted": float(p)} for q, o, p in zip(qs, y, loo)],
        }
    )
    return 0


def cmd_regress_density(args) -> int:
    run = Run("regress-density", args)
    qs = _load_quantiles(run, args.quantiles)
    rows = {r[args.id_column]: r for r in read_table(run.read_text(args.covariates))}
    cols = [c.strip() for c in args.columns.split(",")] if args.columns else None
    if cols is None:
        first = next(iter(rows.values()), {})
        cols = [c for c in first if c != args.id_column]
    missing = [q.subject_id for q in qs if q.subject_id not in rows]
    if missing:
        raise DistrepError(f"covariates missing for subjects {missing[:5]}")
    try:
        u = np.array([[float(rows[q.subject_id][c]) for c in cols] for q in qs])
    except (KeyError, ValueError) as exc:
        raise DistrepError(f"bad covariate value: {exc}") from None
    model = frechet_fit(u, qs)
    fitted = frechet_fitted(model)
    preds = [QuantileFunction(model.prob_grid, v, q.subject_id) for v, q in zip(fitted, qs)]
    run.write_csv(args.out, quantiles_to_csv(preds))
    run.emit(
        {
            "covariates": cols,
            "r2": frechet_r2(model),
            "covariate_mean": model.covariate_mean.tolist(),
            "covariate_covariance": model.covariate_covariance.tolist(),
        }
    )
    return 0


def _grouped(run: Run, args) -> GroupedSample:
    qs = _load_quantiles(run, args.quantiles)
    labels = _aligned(qs, _column(run, args.labels, args.groups, args.id_column), "group labels")
    return GroupedSample(qs, labels)


def cmd_anova(args) -> int:
    run = Run("anova", args)
    res = anova_test(_grouped(run, args), args.reps, args.seed, args.threads)
    run.emit(res.to_dict())
    return 0


def cmd_energy(args) -> int:
    run = Run("energy-test", args)
    sample = _grouped(run, args)
    groups = sample.groups
    if len(groups) != 2:
        raise DistrepError(f"energy-test needs exactly 2 groups, found {len(groups)}")
    a = [q for q, g in zip(sample.quantiles, sample.labels) if g == groups[0]]
    b = [q for q, g in zip(sample.quantiles, sample.labels) if g == groups[1]]
    res = energy_permutation_test(a, b, args.permutations, args.seed, args.threads)
    out = res.to_dict()
    out["components"]["groups"] = [str(g) for g in groups]
    out["components"]["k_sample_energy"] = k_sample_energy(sample)
    run.emit(out)
    return 0


def cmd_cluster(args) -> int:
    run = Run("cluster", args)
    if args.distmat:
        dm = DistanceMatrix.from_csv(run.read_text(args.distmat))
    else:
        dm = distance_matrix(_load_quantiles(run, args.quantiles))
    res = kgroups_cluster(dm, args.k, args.heuristic, args.restarts, args.max_iter, args.seed, args.squared, args.threads)
    ids = dm.labels or tuple(str(i) for i in range(dm.n))
    if args.out:
        run.write_csv(args.out, "subject_id,cluster\n" + "".join(f"{s},{int(c) + 1}\n" for s, c in zip(ids, res.labels)))
    doc = res.to_dict()
    doc["labels"] = [int(c) + 1 for c in res.labels]
    doc["subject_ids"] = list(ids)
    run.emit(doc)
    return 0


def _scheme(run: Run, args, series) -> CutoffScheme:
    if args.cutoffs == "ada":
        return ADA
    if args.cutoffs == "deciles":
        if not args.normo_ids:
            raise UsageError("--cutoffs deciles needs --normo-ids")
        ids = [line.strip() for line in run.read_text(args.normo_ids).splitlines() if line.strip()]
        if ids and ids[0] == "subject_id":
            ids = ids[1:]
        return decile_scheme(series, ids)
    text = run.read_text(Path(args.cutoffs))
    cuts = _floats([t for t in text.replace(",", " ").split() if t], "cutoff")
    return CutoffScheme(tuple(cuts), args.closed, "file")


def cmd_tir(args) -> int:
    run = Run("tir", args)
    series, dropped = _load_series(run, args)
    scheme = _scheme(run, args, series)
    comps = [tir_composition(s, scheme, args.zero_repair) for s in series]
    props = np.vstack([c.proportions for c in comps])
    ilr = ilr_transform(props)
    header = ["subject_id"] + [f"p{j + 1}" for j in range(props.shape[1])] + [f"ilr{j + 1}" for j in range(ilr.shape[1])]
    lines = [",".join(header)]
    for c, row_p, row_i in zip(comps, props, ilr):
        lines.append(",".join([c.subject_id, *(repr(float(v)) for v in row_p), *(repr(float(v)) for v in row_i)]))
    run.write_csv(args.out, "\n".join(lines) + "\n")
    run.emit({"scheme": scheme.name, "cutoffs": list(scheme.cutoffs), "closed": scheme.closed, "dropped_subjects": dropped})
    return 0


def _parse_config(text: str) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for item in text.replace(";", " ").split():
        if "=" not in item:
            raise UsageError(f"config item {item!r} is not key=value")
        key, value = item.split("=", 1)
        key = key.strip()
        if key == "n_subjects" or key == "days":
            out[key] = int(value)
        elif key == "noise_sd":
            out[key] = float(value)
        elif key == "interval_minutes":
            out["interval"] = timedelta(minutes=float(value))
        elif key == "archetype_mix":
            out[key] = tuple(float(v) for v in value.split(","))
        elif key == "seed":
            raise UsageError("pass the seed with --seed, not inside --config")
        else:
            raise UsageError(f"unknown config key {key!r}")
    return out


def cmd_simulate(args) -> int:
    run = Run("simulate", args)
    try:
        config = CohortConfig(seed=args.seed, **_parse_config(args.config))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"bad config: {exc}") from None
    series, truths = simulate_cohort(config, args.threads)
    out = Path(args.out)
    run.write_csv(out / "cgm.csv", write_cgm_csv(series))
    run.write_csv(out / "biomarkers.csv", truth_table_csv(truths))
    normo = [t.subject_id for t in truths if t.archetype == "normo"]
    run.write_csv(out / "normo_ids.txt", "\n".join(["subject_id", *normo]) + "\n")
    run.emit({"n_subjects": len(series), "days": config.days, "out": str(out)})
    return 0


def cmd_report(args) -> int:
    run = Run("report", args)
    cohort = Path(args.cohort) if args.cohort else None
    args.input = Path(args.input) if args.input else cohort / "cgm.csv"
    biomarker_path = Path(args.biomarkers) if args.biomarkers else cohort / "biomarkers.csv"
    series, dropped = _load_series(run, args)
    rows = {r["subject_id"]: r for r in read_table(run.read_text(biomarker_path))}
    series = [s for s in series if s.subject_id in rows]
    if len(series) < 11:
        raise DistrepError("report needs at least 11 subjects with biomarkers (kNN uses k=10)")
    names = [c.strip() for c in args.responses.split(",")] if args.responses else [b for b in BIOMARKERS if b in next(iter(rows.values()))]
    responses = {n: _floats([rows[s.subject_id][n] for s in series], n) for n in names}
    if args.normo_ids:
        normo = [t.strip() for t in run.read_text(args.normo_ids).splitlines() if t.strip() and t.strip() != "subject_id"]
    else:
        normo = [sid for sid, r in rows.items() if r.get("archetype") == "normo"]
    comp = compare_representations(series, responses, normo, threads=args.threads)
    doc = comp.to_dict()
    doc["dropped_subjects"] = dropped
    if args.out:
        out = Path(args.out)
        table = ["representation," + ",".join(names)]
        table += [r["representation"] + "," + ",".join(repr(float(r[n])) for n in names) for r in comp.table_rows()]
        run.write_csv(out / "r2_table.csv", "\n".join(table) + "\n")
        run.write_csv(out / "predictions.csv", comp.predictions_csv())
        run.emit(doc, out / "report.json")
    else:
        run.emit(doc)
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_cgm_input(p, clean_opts: bool = True):
    p.add_argument("--input", type=Path, required=True, help="CGM CSV with subject_id,timestamp,glucose")
    p.add_argument("--timestamp-format", default=None, help="strptime pattern (default ISO-8601)")
    p.add_argument("--interval-minutes", type=float, default=5.0, help="nominal sampling interval")
    if clean_opts:
        p.add_argument("--max-gap-minutes", type=float, default=120.0, help="daily skip budget before a day is discarded")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="distrep", description="Distributional representations of CGM data and 2-Wasserstein analysis.")
    parser.add_argument("--version", action="version", version=f"distrep {__version__}")
    parser.add_argument("--threads", type=int, default=None, help="worker cap (default $DISTREP_THREADS or 1)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="parse and clean a CGM CSV")
    _add_cgm_input(p)
    p.add_argument("--out", type=Path, help="write cleaned CGM CSV here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("density", help="kernel glucodensities on a support grid")
    _add_cgm_input(p)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--json-out", type=Path)
    p.add_argument("--grid-min", type=float, default=40.0)
    p.add_argument("--grid-max", type=float, default=400.0)
    p.add_argument("--grid-points", type=int, default=721)
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--selector", choices=[s.value for s in BandwidthSelector], default="rule_of_thumb")
    p.add_argument("--kernel", choices=[k.value for k in KernelKind], default="gaussian")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("quantile", help="quantile functions on the half-offset probability grid")
    _add_cgm_input(p)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--json-out", type=Path)
    p.add_argument("--points", type=int, default=500)
    p.add_argument("--method", choices=["empirical", "kde"], default="empirical")
    p.set_defaults(func=cmd_quantile)

    p = sub.add_parser("distmat", help="pairwise 2-Wasserstein distances")
    p.add_argument("--quantiles", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="square CSV")
    p.add_argument("--binary", type=Path, help="also write the DSTM lower-triangle binary")
    p.set_defaults(func=cmd_distmat)

    p = sub.add_parser("frechet-mean", help="Wasserstein barycenter and Frechet variance")
    p.add_argument("--quantiles", type=Path, required=True)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_frechet_mean)

    p = sub.add_parser("regress-scalar", help="NW regression of a scalar on quantile functions")
    p.add_argument("--quantiles", type=Path, required=True)
    p.add_argument("--responses", type=Path, required=True, help="CSV with subject ids and response columns")
    p.add_argument("--response", required=True, help="response column")
    p.add_argument("--id-column", default="subject_id")
    p.add_argument("--bandwidth", type=float, help="fixed bandwidth (default LOO-CV)")
    p.set_defaults(func=cmd_regress_scalar)

    p = sub.add_parser("regress-density", help="global Frechet regression of quantile functions on covariates")
    p.add_argument("--covariates", type=Path, required=True)
    p.add_argument("--quantiles", type=Path, required=True)
    p.add_argument("--columns", help="comma-separated covariate columns (default all but the id)")
    p.add_argument("--id-column", default="subject_id")
    p.add_argument("--out", type=Path, required=True, help="fitted quantile functions CSV")
    p.set_defaults(func=cmd_regress_density)

    for name, func, helptext in (
        ("anova", cmd_anova, "bootstrap Frechet ANOVA across groups"),
        ("energy-test", cmd_energy, "two-sample energy permutation test"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--quantiles", type=Path, required=True)
        p.add_argument("--labels", type=Path, required=True, help="CSV with subject ids and the group column")
        p.add_argument("--groups", required=True, help="group column")
        p.add_argument("--id-column", default="subject_id")
        p.add_argument("--seed", type=int, required=True)
        if name == "anova":
            p.add_argument("--reps", type=int, default=1000)
        else:
            p.add_argument("--permutations", type=int, default=999)
        p.set_defaults(func=func)

    p = sub.add_parser("cluster", help="k-groups clustering of quantile functions")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--quantiles", type=Path)
    src.add_argument("--distmat", type=Path, help="square distance CSV from `distmat`")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--heuristic", choices=["hartigan", "lloyd"], default="hartigan")
    p.add_argument("--squared", action="store_true", help="cluster on squared W2")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", type=Path, help="labels CSV (1-based clusters)")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("tir", help="time-in-range compositions and ilr coordinates")
    _add_cgm_input(p)
    p.add_argument("--cutoffs", required=True, help="ada | deciles | path to a file of cutoffs")
    p.add_argument("--closed", choices=["left", "right"], default="right", help="cell closure for file cutoffs")
    p.add_argument("--normo-ids", type=Path, help="subject ids defining decile cutoffs")
    p.add_argument("--zero-repair", type=float, default=1e-6)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_tir)

    p = sub.add_parser("simulate", help="generate a synthetic cohort")
    p.add_argument("--config", default="", help='e.g. "n_subjects=200 days=4 noise_sd=4 archetype_mix=0.4,0.3,0.3"')
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="R^2 comparison: glucodensity vs time in range vs mean glucose")
    p.add_argument("--cohort", type=Path, help="directory written by `simulate`")
    p.add_argument("--input", type=Path, help="CGM CSV (default <cohort>/cgm.csv)")
    p.add_argument("--biomarkers", type=Path, help="biomarker CSV (default <cohort>/biomarkers.csv)")
    p.add_argument("--responses", help="comma-separated response columns")
    p.add_argument("--normo-ids", type=Path, help="ids for decile cutoffs (default archetype == normo)")
    p.add_argument("--timestamp-format", default=None)
    p.add_argument("--interval-minutes", type=float, default=5.0)
    p.add_argument("--max-gap-minutes", type=float, default=120.0)
    p.add_argument("--out", type=Path, help="directory for report.json, r2_table.csv, predictions.csv")
    p.set_defaults(func=cmd_report)
    return parser


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "report" and not (args.cohort or (args.input and args.biomarkers)):
            raise UsageError("report needs --cohort or both --input and --biomarkers")
        try:
            args.threads = resolve_threads(args.threads)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return args.func(args)
    except UsageError as exc:
        return _fail("UsageError", str(exc), 2)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except DistrepError as exc:
        return _fail(type(exc).__name__, str(exc), 1)
    except (OSError, ValueError) as exc:
        return _fail(type(exc).__name__, str(exc), 1)


if __name__ == "__main__":
    sys.exit(main())
