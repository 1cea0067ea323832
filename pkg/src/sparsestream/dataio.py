"""CSV ingestion, stream persistence and report emission.

Dataset files are comma-separated with one object per row, numeric
feature cells and an optional trailing label column (labels are kept as
opaque strings). Reports are written one record per window plus a
trailing aggregate record, as JSON lines or CSV.
"""

from __future__ import annotations

import csv
import json
from typing import Iterator, List, Optional, Sequence

import numpy as np

from .errors import IoError, ParseError, RaggedRows
from .model import DataWindow, WindowReport

LABEL_LAST = "last"
LABEL_NONE = "none"


def load_csv(
    path,
    window_size: int,
    has_header: bool = False,
    label_column: str = LABEL_LAST,
    shuffle: bool = False,
    seed: int = 0,
) -> Iterator[DataWindow]:
    """Yield fixed-size windows of objects from a CSV file.

    Rows are objects; they become columns of each window's matrix in file
    order (or a seeded shuffle of it). The trailing window may be short.
    """
    if label_column not in (LABEL_LAST, LABEL_NONE):
        raise ParseError(f"unknown label_column {label_column!r}")
    if window_size < 1:
        raise ParseError("window_size must be positive")

    rows: List[List[str]] = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            for row in reader:
                if row:
                    rows.append(row)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if has_header and rows:
        rows = rows[1:]
    if not rows:
        return

    width = len(rows[0])
    n_features = width - (1 if label_column == LABEL_LAST else 0)
    if n_features < 1:
        raise ParseError("rows must carry at least one feature column")

    features = np.empty((len(rows), n_features))
    labels: Optional[List[str]] = [] if label_column == LABEL_LAST else None
    offset = 2 if has_header else 1  # 1-based file positions in errors
    for r, row in enumerate(rows):
        if len(row) != width:
            raise RaggedRows(
                f"row {r + offset} has {len(row)} fields, expected {width}")
        for c in range(n_features):
            try:
                features[r, c] = float(row[c])
            except ValueError as exc:
                raise ParseError(
                    f"row {r + offset}, column {c + 1}: "
                    f"not a number: {row[c]!r}",
                    row=r + offset, column=c + 1) from exc
        if labels is not None:
            labels.append(row[-1])

    order = np.arange(len(rows))
    if shuffle:
        order = np.random.default_rng(seed).permutation(len(rows))

    for w, start in enumerate(range(0, len(rows), window_size)):
        idx = order[start:start + window_size]
        yield DataWindow(
            matrix=features[idx].T,
            object_ids=tuple(int(i) for i in idx),
            labels=(tuple(labels[i] for i in idx) if labels is not None else None),
            window_index=w,
        )


def load_csv_matrix(path, has_header: bool = False,
                    label_column: str = LABEL_LAST):
    """Whole file at once: (d x n feature matrix, labels or None)."""
    windows = list(load_csv(path, window_size=1 << 62, has_header=has_header,
                            label_column=label_column))
    if not windows:
        raise ParseError("file holds no data rows")
    window = windows[0]
    return window.matrix, window.labels


def save_stream_csv(windows: Sequence[DataWindow], path) -> None:
    """Persist a stream as CSV (feature columns, then the label)."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            for window in windows:
                for i in range(window.n_objects):
                    row = [repr(float(v)) for v in window.matrix[:, i]]
                    if window.labels is not None:
                        row.append(str(window.labels[i]))
                    writer.writerow(row)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def report_records(reports: Sequence[WindowReport],
                   include_runtime: bool = False) -> List[dict]:
    """All emitted records in order: one per window plus the aggregate."""
    records = [_report_record(r, include_runtime) for r in reports]
    records.append(aggregate_reports(reports, include_runtime))
    return records


def _report_record(report: WindowReport, include_runtime: bool) -> dict:
    rec = {
        "record": "window",
        "window_index": report.window_index,
        "purity": report.purity,
        "f_measure": report.f_measure,
        "n_clusters": report.n_clusters,
        "n_outliers": report.n_outliers,
        "converged": report.converged,
        "skipped": report.skipped,
    }
    if include_runtime:
        rec["runtime_ms"] = report.runtime_ms
    return rec


def aggregate_reports(reports: Sequence[WindowReport],
                      include_runtime: bool = False) -> dict:
    """Trailing aggregate: stream-wide averages over the scored windows."""
    scored = [r for r in reports if not r.skipped]
    purities = [r.purity for r in scored if r.purity is not None]
    fs = [r.f_measure for r in scored if r.f_measure is not None]

    def mean(vals):
        return sum(vals) / len(vals) if vals else None

    rec = {
        "record": "aggregate",
        "window_index": None,
        "purity": mean(purities),
        "f_measure": mean(fs),
        "n_clusters": mean([r.n_clusters for r in scored]),
        "n_outliers": mean([r.n_outliers for r in scored]),
        "converged": all(r.converged for r in scored) if scored else True,
        "skipped": len(reports) - len(scored),
        "windows_scored": len(scored),
    }
    if include_runtime:
        rec["runtime_ms"] = mean([r.runtime_ms for r in scored])
    return rec


def emit_reports(
    reports: Sequence[WindowReport],
    path,
    format: str = "jsonl",
    include_runtime: bool = False,
) -> None:
    """Write one record per window plus the aggregate record.

    Wall-clock runtimes are left out unless asked for, keeping the
    default output byte-identical across reruns of a seeded stream.
    """
    records = report_records(reports, include_runtime)
    try:
        if format == "jsonl":
            with open(path, "w", encoding="utf-8") as fh:
                for rec in records:
                    fh.write(json.dumps(rec) + "\n")
        elif format == "csv":
            fields = list(records[-1].keys())
            if include_runtime:
                fields.remove("runtime_ms")
                fields.append("runtime_ms")
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(fields)
                for rec in records:
                    writer.writerow([_csv_cell(rec.get(f)) for f in fields])
        else:
            raise IoError(f"unknown report format {format!r}")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return value


def load_report_csv(path) -> List[dict]:
    """Parse a CSV report back into records (round-trip helper)."""
    out: List[dict] = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                rec = {}
                for key, raw in row.items():
                    if raw == "" or raw is None:
                        rec[key] = None
                    elif raw in ("true", "false"):
                        rec[key] = raw == "true"
                    else:
                        try:
                            num = float(raw)
                            rec[key] = int(num) if num.is_integer() and "." not in raw else num
                        except ValueError:
                            rec[key] = raw
                out.append(rec)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    return out
