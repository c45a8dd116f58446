"""Patent record ingestion, time slicing and annual count series."""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Iterator

import numpy as np

from .errors import EmptyCorpus, EmptySpec, MalformedIpc, UnreadableSource
from .ipc import IpcCode, parse_ipc

CSV_HEADER = ("patent_id", "date", "ipc_codes")

# Convention mirroring the four analysis frames 2012-2014, 2015-2017,
# 2018-2019, 2020-2021; always overridable.
DEFAULT_WINDOW_BOUNDARIES = (2012, 2015, 2018, 2020, 2022)

_YEAR_RE = re.compile(r"^\d{4}$")


@dataclass(frozen=True)
class PatentRecord:
    patent_id: str
    date: dt.date
    codes: tuple[IpcCode, ...]

    def __post_init__(self):
        if not self.patent_id:
            raise ValueError("patent_id must be non-empty")
        if not self.codes:
            raise ValueError(f"patent {self.patent_id} has no IPC codes")

    @property
    def year(self) -> int:
        return self.date.year


@dataclass(frozen=True)
class PatentCorpus:
    records: tuple[PatentRecord, ...] = ()

    def __post_init__(self):
        ids = Counter(r.patent_id for r in self.records)
        dupes = sorted(k for k, v in ids.items() if v > 1)
        if dupes:
            raise ValueError(f"duplicate patent ids: {dupes[:5]}")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[PatentRecord]:
        return iter(self.records)

    @property
    def span(self) -> tuple[int, int] | None:
        if not self.records:
            return None
        years = [r.year for r in self.records]
        return min(years), max(years)


@dataclass
class IngestReport:
    rows_read: int = 0
    records: int = 0
    issues: Counter = field(default_factory=Counter)

    def to_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "records": self.records,
            "issues": dict(sorted(self.issues.items())),
        }


@dataclass(frozen=True)
class WindowSpec:
    """Half-open year intervals ``[b0, b1), [b1, b2), ...``."""

    boundaries: tuple[int, ...]

    def __post_init__(self):
        b = tuple(int(x) for x in self.boundaries)
        object.__setattr__(self, "boundaries", b)
        if len(b) < 2:
            raise EmptySpec("a window spec needs at least two boundaries")
        if any(hi <= lo for lo, hi in zip(b, b[1:])):
            raise EmptySpec(f"window boundaries must be strictly increasing: {b}")

    @property
    def intervals(self) -> list[tuple[int, int]]:
        return list(zip(self.boundaries, self.boundaries[1:]))

    @staticmethod
    def label(lo: int, hi: int) -> str:
        return f"{lo}-{hi - 1}"


@dataclass(frozen=True)
class TimeSeries:
    years: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        years = tuple(int(y) for y in self.years)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "values", values)
        if len(years) != len(values):
            raise ValueError("years and values differ in length")
        if any(b <= a for a, b in zip(years, years[1:])):
            raise ValueError("years must be strictly increasing")
        if any(not np.isfinite(v) or v < 0 for v in values):
            raise ValueError("values must be finite and non-negative")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> TimeSeries:
        pairs = list(pairs)
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    def __len__(self) -> int:
        return len(self.years)

    @property
    def points(self) -> list[tuple[int, float]]:
        return list(zip(self.years, self.values))

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.years, dtype=float), np.asarray(self.values, dtype=float)


def parse_date(text: str) -> dt.date:
    text = text.strip()
    if _YEAR_RE.match(text):
        year = int(text)
        if year < 1:
            raise ValueError(text)
        return dt.date(year, 1, 1)
    if not re.fullmatch(r"\d{4}-\d{2}-\d{2}", text):
        raise ValueError(f"unrecognised date {text!r}")
    return dt.date.fromisoformat(text)


def _iter_csv_rows(text: str) -> Iterator[dict]:
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        return
    except csv.Error as exc:
        raise UnreadableSource(f"CSV header unreadable: {exc}") from exc
    header = [h.strip() for h in header]
    if header and header[0].startswith("﻿"):
        header[0] = header[0][1:]
    missing = [h for h in CSV_HEADER if h not in header]
    if missing:
        raise UnreadableSource(f"CSV header lacks columns {missing}")
    idx = {h: header.index(h) for h in CSV_HEADER}
    try:
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            get = lambda h: row[idx[h]] if idx[h] < len(row) else ""  # noqa: E731
            yield {
                "patent_id": get("patent_id"),
                "date": get("date"),
                "ipc_codes": [c for c in get("ipc_codes").split(";") if c.strip()],
            }
    except csv.Error as exc:
        raise UnreadableSource(f"CSV structure error: {exc}") from exc


def _iter_jsonl_rows(text: str) -> Iterator[dict | None]:
    for line in text.splitlines():
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            yield None
            continue
        yield obj if isinstance(obj, dict) else None


def load_corpus(source: BinaryIO | bytes, format: str = "csv") -> tuple[PatentCorpus, IngestReport]:
    """Read patent records from a CSV or JSONL byte stream.

    Row-level problems are skipped and tallied in the report; only a
    stream that cannot be decoded or whose container is broken raises
    :class:`UnreadableSource`.
    """
    data = source if isinstance(source, (bytes, bytearray)) else source.read()
    try:
        text = bytes(data).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise UnreadableSource(f"input is not valid UTF-8: {exc}") from exc

    fmt = format.lower()
    if fmt == "csv":
        rows: Iterable[dict | None] = _iter_csv_rows(text)
    elif fmt == "jsonl":
        rows = _iter_jsonl_rows(text)
    else:
        raise UnreadableSource(f"unsupported format {format!r}")

    report = IngestReport()
    records: list[PatentRecord] = []
    seen: set[str] = set()
    for row in rows:
        report.rows_read += 1
        if row is None:
            report.issues["bad_row"] += 1
            continue
        pid = row.get("patent_id")
        if not isinstance(pid, str) or not pid.strip():
            report.issues["missing_id"] += 1
            continue
        pid = pid.strip()
        raw_date = row.get("date")
        try:
            if not isinstance(raw_date, str):
                raise ValueError(raw_date)
            date = parse_date(raw_date)
        except ValueError:
            report.issues["bad_date"] += 1
            continue
        raw_codes = row.get("ipc_codes")
        if not isinstance(raw_codes, list):
            report.issues["bad_row"] += 1
            continue
        codes = []
        for raw in raw_codes:
            try:
                codes.append(parse_ipc(raw))
            except MalformedIpc:
                report.issues["bad_code"] += 1
        if not codes:
            report.issues["no_valid_codes"] += 1
            continue
        if pid in seen:
            report.issues["duplicate_id"] += 1
            continue
        seen.add(pid)
        records.append(PatentRecord(pid, date, tuple(codes)))
    report.records = len(records)
    return PatentCorpus(tuple(records)), report


def load_corpus_file(path, format: str | None = None) -> tuple[PatentCorpus, IngestReport]:
    """Open ``path`` and load it; the format defaults to the file suffix."""
    path = str(path)
    if format is None:
        format = "jsonl" if path.endswith((".jsonl", ".ndjson")) else "csv"
    try:
        with open(path, "rb") as fh:
            return load_corpus(fh, format)
    except OSError as exc:
        raise UnreadableSource(f"cannot read {path}: {exc.strerror or exc}") from exc


def slice_windows(corpus: PatentCorpus, spec: WindowSpec) -> tuple[list[tuple[str, PatentCorpus]], int]:
    """Split ``corpus`` by year into the windows of ``spec``.

    Returns the labelled windows in boundary order and the number of
    records that fell outside every window.
    """
    intervals = spec.intervals
    buckets: list[list[PatentRecord]] = [[] for _ in intervals]
    excluded = 0
    for rec in corpus:
        for i, (lo, hi) in enumerate(intervals):
            if lo <= rec.year < hi:
                buckets[i].append(rec)
                break
        else:
            excluded += 1
    windows = [
        (WindowSpec.label(lo, hi), PatentCorpus(tuple(b)))
        for (lo, hi), b in zip(intervals, buckets)
    ]
    return windows, excluded


def annual_counts(corpus: PatentCorpus, mode: str = "cumulative") -> TimeSeries:
    if not len(corpus):
        raise EmptyCorpus("cannot count patents in an empty corpus")
    if mode not in ("incremental", "cumulative"):
        raise ValueError(f"mode must be incremental or cumulative, got {mode!r}")
    lo, hi = corpus.span
    counts = Counter(r.year for r in corpus)
    years = list(range(lo, hi + 1))
    values = [counts.get(y, 0) for y in years]
    if mode == "cumulative":
        values = list(np.cumsum(values))
    return TimeSeries(tuple(years), tuple(float(v) for v in values))
