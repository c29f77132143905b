"""Dataset/prediction ingestion, instance windowing and report serialization.

File formats
------------
Datasets
    ETT-style CSV: one timestamp column (default ``date``) followed by
    numeric channel columns.
Prediction dumps
    Long CSV with header ``model_id,channel,index,step,value``; one row per
    forecast step.
Instance records
    Long CSV with header ``channel,index,p,mse_lb,var_y,model_id,mse``.
Reports
    JSON envelope ``{"schema_version", "report_type", "config", "metadata",
    "data"}`` or, for tabular reports, CSV with one row per record.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import AlignmentError, DataError, InsufficientLengthError, InvalidConfigError, ReportFormatError
from .evaluation import (
    BandEnergyTable,
    BandLurSummary,
    CorrelationReport,
    DriftSeries,
    InstanceRecord,
    ScpAggregate,
    StratifiedReport,
    ToyStudyResult,
)
from .lur import LurReport
from .scp import BatchFailure, ScpReport, SegmentPair

SCHEMA_VERSION = 1
DEFAULT_FRACTIONS = (0.7, 0.1, 0.2)
SPLITS = ("train", "val", "test")


# --------------------------------------------------------------------------- datasets


@dataclass(frozen=True, eq=False)
class DatasetTable:
    timestamps: list
    channels: "OrderedDict[str, np.ndarray]"
    standardization: Optional[dict] = None  # channel -> (mean, std)

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def names(self) -> list:
        return list(self.channels)


def load_csv(
    path,
    timestamp_column: Optional[str] = "date",
    value_columns: Optional[Sequence[str]] = None,
    standardize: bool = False,
    train_fraction: float = DEFAULT_FRACTIONS[0],
) -> DatasetTable:
    """Read an ETT-style CSV into a :class:`DatasetTable`.

    With ``standardize=True`` every channel is z-scored with the mean and
    standard deviation of its first ``train_fraction`` rows.
    """
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if timestamp_column is not None and timestamp_column not in header:
            raise DataError(f"{path}: timestamp column {timestamp_column!r} not in header {header}")
        if value_columns is None:
            value_columns = [h for h in header if h != timestamp_column]
        missing = [c for c in value_columns if c not in header]
        if missing:
            raise DataError(f"{path}: columns {missing} not in header")
        if not value_columns:
            raise DataError(f"{path}: no value columns")
        ts_pos = header.index(timestamp_column) if timestamp_column is not None else None
        positions = [header.index(c) for c in value_columns]
        stamps, rows = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}")
            values = []
            for col, pos in zip(value_columns, positions):
                cell = row[pos].strip()
                if cell == "":
                    raise DataError(f"{path}:{line_no}: missing value in column {col!r}")
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(f"{path}:{line_no}: non-numeric value {cell!r} in column {col!r}") from None
                if not math.isfinite(v):
                    raise DataError(f"{path}:{line_no}: non-finite value {cell!r} in column {col!r}")
                values.append(v)
            stamps.append(row[ts_pos] if ts_pos is not None else str(line_no - 2))
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    channels = OrderedDict((c, data[:, j].copy()) for j, c in enumerate(value_columns))
    stats = None
    if standardize:
        n_train = max(int(len(data) * train_fraction), 2)
        stats = {}
        for c, v in channels.items():
            mu, sd = float(np.mean(v[:n_train])), float(np.std(v[:n_train]))
            if sd == 0:
                sd = 1.0
            stats[c] = (mu, sd)
            channels[c] = (v - mu) / sd
    return DatasetTable(stamps, channels, stats)


def split_bounds(n: int, split: str, fractions: Sequence[float] = DEFAULT_FRACTIONS) -> tuple:
    """``(start, stop)`` row range of ``split`` for a series of ``n`` rows."""
    if split not in SPLITS:
        raise InvalidConfigError(f"unknown split {split!r}; expected one of {SPLITS}")
    if len(fractions) != 3 or any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise InvalidConfigError(f"split fractions must be three nonnegative numbers summing to 1: {fractions}")
    n_train = int(n * fractions[0])
    n_val = int(n * fractions[1])
    bounds = {"train": (0, n_train), "val": (n_train, n_train + n_val), "test": (n_train + n_val, n)}
    return bounds[split]


def windowize(
    table: DatasetTable,
    history: int,
    horizon: Optional[int] = None,
    stride: int = 1,
    split: str = "test",
    fractions: Sequence[float] = DEFAULT_FRACTIONS,
    channels: Optional[Sequence[str]] = None,
) -> "OrderedDict[str, list]":
    """Cut contiguous (history, future) pairs inside one split, per channel.

    Every window that fits is kept (no drop-last); ``index`` is the window's
    start row relative to the split start.
    """
    horizon = history if horizon is None else horizon
    if horizon != history:
        raise InvalidConfigError("history and horizon must be equal")
    if history < 1 or stride < 1:
        raise InvalidConfigError("history and stride must be >= 1")
    start, stop = split_bounds(len(table), split, fractions)
    length = stop - start
    if length < history + horizon:
        raise InsufficientLengthError(
            f"{split} split has {length} rows, fewer than history + horizon = {history + horizon}"
        )
    count = (length - history - horizon) // stride + 1
    out = OrderedDict()
    for name in channels or table.names:
        if name not in table.channels:
            raise DataError(f"unknown channel {name!r}")
        v = table.channels[name][start:stop]
        out[name] = [
            SegmentPair(v[i : i + history], v[i + history : i + history + horizon], name, i)
            for i in (k * stride for k in range(count))
        ]
    return out


# --------------------------------------------------------------------------- predictions

PREDICTION_FIELDS = ("model_id", "channel", "index", "step", "value")


@dataclass(frozen=True, eq=False)
class PredictionDump:
    model_id: str
    forecasts: dict = field(default_factory=dict)  # (channel, index) -> ndarray

    def get(self, channel: str, index: int) -> np.ndarray:
        return self.forecasts[(channel, index)]


def write_predictions(dumps: Sequence[PredictionDump], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PREDICTION_FIELDS)
        for dump in dumps:
            for (channel, index), vec in dump.forecasts.items():
                for step, value in enumerate(vec):
                    w.writerow([dump.model_id, channel, index, step, _fmt(value)])


def read_predictions(path) -> "OrderedDict[str, PredictionDump]":
    """Read a prediction-dump CSV; returns dumps keyed by model id."""
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    steps = OrderedDict()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or any(f not in reader.fieldnames for f in PREDICTION_FIELDS):
            raise DataError(f"{path}: header must contain {PREDICTION_FIELDS}")
        for line_no, row in enumerate(reader, start=2):
            try:
                key = (row["channel"], int(row["index"]))
                step = int(row["step"])
                value = float(row["value"])
            except (TypeError, ValueError):
                raise DataError(f"{path}:{line_no}: malformed prediction row {row}") from None
            if not math.isfinite(value):
                raise DataError(f"{path}:{line_no}: non-finite prediction")
            steps.setdefault(row["model_id"], OrderedDict()).setdefault(key, {})[step] = value
    dumps = OrderedDict()
    for model, per_key in steps.items():
        forecasts = {}
        for key, by_step in per_key.items():
            n = max(by_step) + 1
            if sorted(by_step) != list(range(n)):
                raise DataError(f"{path}: model {model!r} {key} has missing steps")
            forecasts[key] = np.array([by_step[s] for s in range(n)])
        dumps[model] = PredictionDump(model, forecasts)
    return dumps


def align_predictions(dump: PredictionDump, pairs_by_channel: Mapping[str, Sequence[SegmentPair]]) -> list:
    """Match forecasts to windowed pairs; returns ``(pair, forecast)`` tuples.

    Raises :class:`AlignmentError` naming the first (channel, index) in the
    dump that the windowing does not produce or whose length is wrong.
    """
    lookup = {(p.channel_id, p.index): p for pairs in pairs_by_channel.values() for p in pairs}
    matched = []
    for key, vec in dump.forecasts.items():
        pair = lookup.get(key)
        if pair is None:
            raise AlignmentError(f"model {dump.model_id!r}: no instance for (channel={key[0]!r}, index={key[1]})")
        if len(vec) != len(pair.y):
            raise AlignmentError(
                f"model {dump.model_id!r}: forecast at (channel={key[0]!r}, index={key[1]}) has "
                f"{len(vec)} steps, horizon is {len(pair.y)}"
            )
        matched.append((pair, vec))
    return matched


# --------------------------------------------------------------------------- instance records

RECORD_FIELDS = ("channel", "index", "p", "mse_lb", "var_y", "model_id", "mse")


def write_records(records: Sequence[InstanceRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_FIELDS)
        for r in records:
            for model, mse in r.model_mse.items():
                w.writerow([r.channel_id, r.index, _fmt(r.p), _fmt(r.mse_lb), _fmt(r.var_y), model, _fmt(mse)])


def read_records(path) -> list:
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    merged = OrderedDict()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or any(f not in reader.fieldnames for f in RECORD_FIELDS):
            raise DataError(f"{path}: header must contain {RECORD_FIELDS}")
        for line_no, row in enumerate(reader, start=2):
            try:
                key = (row["channel"], int(row["index"]))
                vals = (float(row["p"]), float(row["mse_lb"]), float(row["var_y"]))
                mse = float(row["mse"])
            except (TypeError, ValueError):
                raise DataError(f"{path}:{line_no}: malformed record row") from None
            entry = merged.setdefault(key, [vals, OrderedDict()])
            entry[1][row["model_id"]] = mse
    return [InstanceRecord(c, i, v[0], v[1], v[2], dict(m)) for (c, i), (v, m) in merged.items()]


# --------------------------------------------------------------------------- reports

REPORT_TYPES = {
    cls.__name__: cls
    for cls in (
        ScpReport, LurReport, StratifiedReport, DriftSeries, CorrelationReport,
        ToyStudyResult, ScpAggregate, BandLurSummary, BandEnergyTable,
    )
}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _sanitize(obj):
    """Replace NaN/inf floats with None so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def _csv_rows(report) -> tuple:
    """``(fields, rows)`` for a report or a list of per-instance reports."""
    if isinstance(report, (list, tuple)):
        items = [r for r in report if not isinstance(r, BatchFailure)]
        if not items or not all(isinstance(r, (ScpReport, LurReport)) for r in items):
            raise ReportFormatError("CSV lists are supported for ScpReport/LurReport batches only")
        rows = [r.csv_row() for r in items]
        fields = list(OrderedDict((k, None) for row in rows for k in row))
        return fields, rows
    if isinstance(report, (ScpReport, LurReport)):
        return _csv_rows([report])
    if not hasattr(report, "csv_rows"):
        raise ReportFormatError(f"{type(report).__name__} has no CSV form")
    rows = report.csv_rows()
    fields = list(report.csv_fields()) if hasattr(report, "csv_fields") else list(report.CSV_FIELDS)
    return fields, rows


def render_report(report, fmt: str, config: Optional[dict] = None, metadata: Optional[dict] = None) -> str:
    """Text of a report (or a list of per-instance reports) as JSON or CSV."""
    if fmt == "json":
        if isinstance(report, (list, tuple)):
            items = [r for r in report if not isinstance(r, BatchFailure)]
            failures = [vars(r) for r in report if isinstance(r, BatchFailure)]
            kinds = {type(r).__name__ for r in items}
            if len(kinds) > 1:
                raise ReportFormatError(f"mixed report types in one list: {sorted(kinds)}")
            report_type = kinds.pop() if kinds else "ScpReport"
            if report_type not in ("ScpReport", "LurReport"):
                raise ReportFormatError(f"lists of {report_type} are not supported")
            data = {"items": [r.to_dict() for r in items], "failures": failures}
            envelope_type = report_type + "List"
        else:
            if type(report).__name__ not in REPORT_TYPES:
                raise ReportFormatError(f"unsupported report type {type(report).__name__}")
            data = report.to_dict()
            envelope_type = type(report).__name__
        envelope = OrderedDict(
            schema_version=SCHEMA_VERSION,
            report_type=envelope_type,
            config=config or {},
            metadata=metadata or {},
            data=data,
        )
        return json.dumps(_sanitize(_to_plain(envelope)), indent=2, default=_json_default) + "\n"
    if fmt == "csv":
        fields, rows = _csv_rows(report)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields)
        for row in rows:
            w.writerow([_fmt(row.get(k)) for k in fields])
        return buf.getvalue()
    raise ReportFormatError(f"unsupported format {fmt!r}")


def write_report(report, fmt: str, path, config: Optional[dict] = None, metadata: Optional[dict] = None) -> None:
    """Serialize a report to ``path``; see :func:`render_report`."""
    _write_text(path, render_report(report, fmt, config, metadata))


def _to_plain(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return OrderedDict((k, _to_plain(v)) for k, v in obj.items())
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    return obj


def _write_text(path, text: str) -> None:
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from None


def read_report(path):
    """Inverse of :func:`write_report` for JSON files.

    Returns the report object (or a list for ``*List`` envelopes).  CSV files
    come back as a list of row dicts with numeric cells converted to float.
    """
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    if str(path).endswith(".csv"):
        with open(path, newline="") as fh:
            return [{k: _parse_cell(v) for k, v in row.items()} for row in csv.DictReader(fh)]
    with open(path) as fh:
        try:
            envelope = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc})") from None
    if envelope.get("schema_version") != SCHEMA_VERSION:
        raise ReportFormatError(f"{path}: unsupported schema_version {envelope.get('schema_version')}")
    kind = envelope["report_type"]
    data = envelope["data"]
    if kind.endswith("List") and kind[:-4] in REPORT_TYPES:
        cls = REPORT_TYPES[kind[:-4]]
        items = [cls.from_dict(d) for d in data["items"]]
        items += [BatchFailure(**f) for f in data.get("failures", [])]
        return items
    if kind not in REPORT_TYPES:
        raise ReportFormatError(f"{path}: unknown report_type {kind!r}")
    return REPORT_TYPES[kind].from_dict(data)


def _parse_cell(v: str):
    if v == "":
        return None
    try:
        return float(v)
    except ValueError:
        return v


def write_report_config(path, config: dict, metadata: Optional[dict] = None) -> None:
    """Provenance sidecar for CSV reports: the resolved run configuration."""
    envelope = OrderedDict(schema_version=SCHEMA_VERSION, report_type="RunConfig",
                           config=config, metadata=metadata or {})
    _write_text(path, json.dumps(_sanitize(_to_plain(envelope)), indent=2, default=_json_default) + "\n")
