"""Parsing and cleaning of raw CGM records."""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timedelta, timezone
from typing import BinaryIO, Iterable

import numpy as np

from .errors import AllDataDiscarded, EmptyInput, MalformedHeader, UnparseableRow

REQUIRED_COLUMNS = ("subject_id", "timestamp", "glucose")
DEVICE_RANGE = (40.0, 400.0)
NOMINAL_INTERVAL = timedelta(minutes=5)
MAX_DAILY_GAP = timedelta(hours=2)


@dataclass(frozen=True)
class CgmRecord:
    subject_id: str
    timestamp: datetime  # timezone-aware UTC, whole seconds
    glucose: float  # mg/dL


@dataclass(frozen=True)
class CgmSeries:
    """One subject's ordered glucose record."""

    subject_id: str
    records: tuple[CgmRecord, ...]
    nominal_interval: timedelta = NOMINAL_INTERVAL

    def __post_init__(self):
        if self.nominal_interval <= timedelta(0):
            raise ValueError("nominal_interval must be positive")
        for r in self.records:
            if r.subject_id != self.subject_id:
                raise ValueError(
                    f"record for {r.subject_id!r} in series for {self.subject_id!r}"
                )

    def __len__(self) -> int:
        return len(self.records)

    @property
    def glucose(self) -> np.ndarray:
        return np.array([r.glucose for r in self.records], dtype=float)

    @property
    def timestamps(self) -> list[datetime]:
        return [r.timestamp for r in self.records]

    def days(self) -> list[date]:
        """Distinct UTC calendar days covered by the records, in order."""
        return sorted({r.timestamp.date() for r in self.records})


@dataclass(frozen=True)
class CsvFormat:
    """How to read a CGM CSV file.

    ``timestamp_format`` of ``None`` means ISO-8601; otherwise it is passed to
    :meth:`datetime.strptime`. Naive timestamps are taken to be UTC.
    """

    timestamp_format: str | None = None
    delimiter: str = ","
    nominal_interval: timedelta = field(default=NOMINAL_INTERVAL)


def parse_timestamp(text: str, timestamp_format: str | None = None) -> datetime:
    text = text.strip()
    if timestamp_format is None:
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        ts = datetime.fromisoformat(text)
    else:
        ts = datetime.strptime(text, timestamp_format)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    else:
        ts = ts.astimezone(timezone.utc)
    return ts.replace(microsecond=0)


def _read_text(source: bytes | str | BinaryIO) -> str:
    if isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    elif isinstance(source, str):
        with open(source, "rb") as fh:
            raw = fh.read()
    else:
        raw = source.read()
        if isinstance(raw, str):
            return raw
    return raw.decode("utf-8-sig")


def parse_cgm_csv(source: bytes | str | BinaryIO, fmt: CsvFormat | None = None) -> list[CgmSeries]:
    """Parse a ``subject_id,timestamp,glucose`` CSV into per-subject series.

    Parameters
    ----------
    source : bytes, path or binary file object
        UTF-8 encoded CSV. Extra columns are ignored.
    fmt : CsvFormat, optional
        Timestamp pattern and delimiter.

    Returns
    -------
    list of CgmSeries
        One series per subject in order of first appearance, each sorted by
        timestamp (stable for equal timestamps).

    Raises
    ------
    EmptyInput
        The input holds no header or no data rows.
    MalformedHeader
        A required column is missing or duplicated.
    UnparseableRow
        Any row failed to parse; every bad row is reported with its line number.
    """
    fmt = fmt or CsvFormat()
    text = _read_text(source)
    if not text.strip():
        raise EmptyInput("input is empty")

    reader = csv.reader(io.StringIO(text, newline=""), delimiter=fmt.delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyInput("input is empty") from None
    header = [h.strip() for h in header]
    missing = [c for c in REQUIRED_COLUMNS if c not in header]
    dupes = [c for c in REQUIRED_COLUMNS if header.count(c) > 1]
    if missing or dupes:
        raise MalformedHeader(
            f"header {header!r}: missing {missing or 'none'}, duplicated {dupes or 'none'}"
        )
    idx = {c: header.index(c) for c in REQUIRED_COLUMNS}

    grouped: dict[str, list[CgmRecord]] = defaultdict(list)
    problems: list[tuple[int, str]] = []
    n_rows = 0
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        n_rows += 1
        if len(row) < len(header):
            problems.append((line, f"expected {len(header)} fields, got {len(row)}"))
            continue
        sid = row[idx["subject_id"]].strip()
        if not sid:
            problems.append((line, "empty subject_id"))
            continue
        try:
            ts = parse_timestamp(row[idx["timestamp"]], fmt.timestamp_format)
        except ValueError as exc:
            problems.append((line, f"bad timestamp {row[idx['timestamp']]!r}: {exc}"))
            continue
        try:
            value = float(row[idx["glucose"]])
        except ValueError:
            problems.append((line, f"bad glucose {row[idx['glucose']]!r}"))
            continue
        if not math.isfinite(value):
            problems.append((line, f"non-finite glucose {row[idx['glucose']]!r}"))
            continue
        grouped[sid].append(CgmRecord(sid, ts, value))

    if problems:
        raise UnparseableRow(problems)
    if n_rows == 0:
        raise EmptyInput("no data rows")

    return [
        CgmSeries(sid, tuple(sorted(recs, key=lambda r: r.timestamp)), fmt.nominal_interval)
        for sid, recs in grouped.items()
    ]


def daily_gap_totals(series: CgmSeries) -> dict[date, timedelta]:
    """Total gap duration per UTC day.

    A gap is a spacing between consecutive same-day records that is strictly
    longer than the nominal interval; its whole spacing is counted. Spacings
    that cross midnight are ignored so the total for a day depends only on
    that day's own timestamps.
    """
    totals: dict[date, timedelta] = {}
    for d in series.days():
        totals[d] = timedelta(0)
    recs = series.records
    for prev, cur in zip(recs, recs[1:]):
        day = cur.timestamp.date()
        if prev.timestamp.date() != day:
            continue
        spacing = cur.timestamp - prev.timestamp
        if spacing > series.nominal_interval:
            totals[day] += spacing
    return totals


def clean_series(
    series: CgmSeries,
    max_daily_gap: timedelta = MAX_DAILY_GAP,
    glucose_range: tuple[float, float] = DEVICE_RANGE,
) -> CgmSeries:
    """Drop out-of-range readings, then discard days with too many skips.

    Readings outside ``glucose_range`` (closed) are removed rather than
    clamped. Repeated timestamps keep their first reading. Every UTC day whose
    :func:`daily_gap_totals` exceeds ``max_daily_gap`` loses all its records.

    Raises
    ------
    AllDataDiscarded
        If nothing survives.
    """
    if not series.records:
        raise AllDataDiscarded(f"subject {series.subject_id}: empty series")
    lo, hi = glucose_range
    kept: list[CgmRecord] = []
    for r in series.records:
        if not (lo <= r.glucose <= hi):
            continue
        if kept and r.timestamp <= kept[-1].timestamp:
            continue
        kept.append(r)
    in_range = replace(series, records=tuple(kept))

    bad_days = {d for d, total in daily_gap_totals(in_range).items() if total > max_daily_gap}
    final = tuple(r for r in kept if r.timestamp.date() not in bad_days)
    if not final:
        raise AllDataDiscarded(f"subject {series.subject_id}: no records survive cleaning")
    return replace(series, records=final)


def discarded_days(
    series: CgmSeries,
    max_daily_gap: timedelta = MAX_DAILY_GAP,
    glucose_range: tuple[float, float] = DEVICE_RANGE,
) -> list[date]:
    """Days of ``series`` that :func:`clean_series` would remove entirely."""
    try:
        cleaned = clean_series(series, max_daily_gap, glucose_range)
        kept = set(cleaned.days())
    except AllDataDiscarded:
        kept = set()
    return [d for d in series.days() if d not in kept]


def write_cgm_csv(series: Iterable[CgmSeries]) -> str:
    """Serialize series back to the ingest CSV layout (ISO-8601 UTC timestamps)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(REQUIRED_COLUMNS)
    for s in series:
        for r in s.records:
            writer.writerow(
                [r.subject_id, r.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ"), repr(float(r.glucose))]
            )
    return out.getvalue()
