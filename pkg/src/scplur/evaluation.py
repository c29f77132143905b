"""Dataset-level evaluation: NMSE, correlation, stratification, drift, toy study."""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from .bands import BandPartition, band_sums, make_partition
from .baseline import DEFAULT_LENGTH, DEFAULT_RIDGE, apply_fir, fit_fir, one_step_pairs, predict_fir
from .errors import (
    EmptyInputError,
    InvalidConfigError,
    OrderingError,
    ShapeError,
    UndefinedCorrelationError,
    ZeroVarianceError,
)
from .lur import LurReport, PredictionTriple, Utilization, classify_band, compute_lur
from .scp import ScpReport, SegmentPair, compute_scp
from .spectral import WelchConfig, WelchFrame, frame_coherence
from .synth import MultibandSpec, NoiseSpec, add_bandlimited_noise, derive_seed, generate_multiband_gp


def _f(v):
    """Float for serialization; NaN becomes None."""
    if v is None:
        return None
    v = float(v)
    return None if math.isnan(v) else v


def _nan(v):
    return float("nan") if v is None else float(v)


# --------------------------------------------------------------------------- metrics


def nmse(mse: float, var_y: float) -> float:
    """MSE normalized by the instance's own future variance."""
    if not var_y > 0:
        raise ZeroVarianceError("NMSE undefined for a zero-variance future")
    return mse / var_y


def dataset_nmse(mses: Sequence[float], var_ys: Sequence[float]) -> float:
    """Mean of per-instance NMSE values."""
    if len(mses) != len(var_ys):
        raise ShapeError("mses and var_ys differ in length")
    if not len(mses):
        raise EmptyInputError("no instances")
    return float(np.mean([nmse(m, v) for m, v in zip(mses, var_ys)]))


def pearson_r(xs: Sequence[float], ys: Sequence[float]) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ShapeError(f"pearson_r needs equal-length vectors, got {x.shape} and {y.shape}")
    if len(x) < 3:
        raise UndefinedCorrelationError(f"need at least 3 points, got {len(x)}")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0 or sy == 0:
        raise UndefinedCorrelationError("correlation undefined for a constant input")
    return float(np.clip((dx @ dy) / (sx * sy), -1.0, 1.0))


# --------------------------------------------------------------------------- records


@dataclass(frozen=True)
class InstanceRecord:
    """Predictability and per-model error of one (channel, index) instance."""

    channel_id: str
    index: int
    p: float
    mse_lb: float
    var_y: float
    model_mse: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if any(v < 0 for v in self.model_mse.values()):
            raise ShapeError(f"negative MSE in record ({self.channel_id}, {self.index})")


def _model_ids(records: Sequence[InstanceRecord]) -> list:
    seen = OrderedDict()
    for r in records:
        for m in r.model_mse:
            seen.setdefault(m, None)
    return list(seen)


# --------------------------------------------------------------------------- stratification

DEFAULT_BIN_COUNT = 10
DEFAULT_MIN_COUNT = 20


@dataclass(frozen=True, eq=False)
class StratifiedReport:
    bin_edges: np.ndarray
    models: tuple
    counts: np.ndarray  # (bins, models)
    mean_mse: np.ndarray  # (bins, models); NaN where empty
    global_mean: np.ndarray  # (models,)
    min_count: int

    @property
    def flagged(self) -> np.ndarray:
        """Bins whose sample count falls below ``min_count`` (per model)."""
        return self.counts < self.min_count

    def column(self, model: str) -> np.ndarray:
        return self.mean_mse[:, self.models.index(model)]

    def reweighted_mean(self, model: str) -> float:
        j = self.models.index(model)
        c = self.counts[:, j]
        m = np.nan_to_num(self.mean_mse[:, j])
        return float(np.sum(c * m) / np.sum(c))

    def to_dict(self) -> dict:
        return {
            "bin_edges": self.bin_edges.tolist(),
            "models": list(self.models),
            "counts": self.counts.tolist(),
            "mean_mse": [[_f(v) for v in row] for row in self.mean_mse],
            "global_mean": [_f(v) for v in self.global_mean],
            "min_count": self.min_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StratifiedReport":
        return cls(
            np.asarray(d["bin_edges"], dtype=float),
            tuple(d["models"]),
            np.asarray(d["counts"], dtype=int),
            np.asarray([[_nan(v) for v in row] for row in d["mean_mse"]], dtype=float),
            np.asarray([_nan(v) for v in d["global_mean"]], dtype=float),
            int(d["min_count"]),
        )

    CSV_FIELDS = ("bin", "lo", "hi", "model_id", "count", "mean_mse", "flagged")

    def csv_rows(self) -> list:
        rows = []
        for b in range(len(self.bin_edges) - 1):
            for j, m in enumerate(self.models):
                rows.append({
                    "bin": b, "lo": self.bin_edges[b], "hi": self.bin_edges[b + 1], "model_id": m,
                    "count": int(self.counts[b, j]), "mean_mse": self.mean_mse[b, j],
                    "flagged": int(self.counts[b, j] < self.min_count),
                })
        return rows


def stratify_by_p(
    records: Sequence[InstanceRecord],
    bin_count: int = DEFAULT_BIN_COUNT,
    min_count: int = DEFAULT_MIN_COUNT,
) -> StratifiedReport:
    """Group instances into equal-width P bins and average each model's MSE."""
    records = list(records)
    if not records:
        raise EmptyInputError("no records to stratify")
    if bin_count < 2:
        raise InvalidConfigError(f"bin_count must be >= 2, got {bin_count}")
    edges = np.arange(bin_count + 1) / bin_count
    models = tuple(_model_ids(records))
    p = np.array([r.p for r in records], dtype=float)
    # half-open bins, last one closed at 1
    bins = np.clip(np.searchsorted(edges, p, side="right") - 1, 0, bin_count - 1)
    counts = np.zeros((bin_count, len(models)), dtype=int)
    sums = np.zeros((bin_count, len(models)))
    totals = np.zeros(len(models))
    n_model = np.zeros(len(models), dtype=int)
    for r, b in zip(records, bins):
        for j, m in enumerate(models):
            if m in r.model_mse:
                counts[b, j] += 1
                sums[b, j] += r.model_mse[m]
                totals[j] += r.model_mse[m]
                n_model[j] += 1
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(counts > 0, sums / counts, np.nan)
        global_mean = np.where(n_model > 0, totals / n_model, np.nan)
    return StratifiedReport(edges, models, counts, means, global_mean, min_count)


def crossover_bins(report: StratifiedReport, model_a: str, model_b: str) -> list:
    """Bin boundaries where the sign of ``mean(a) - mean(b)`` flips.

    Only bins meeting the count threshold for both models are compared.
    Returns the P edge at each flip.
    """
    ja, jb = report.models.index(model_a), report.models.index(model_b)
    diff = report.mean_mse[:, ja] - report.mean_mse[:, jb]
    ok = (report.counts[:, ja] >= report.min_count) & (report.counts[:, jb] >= report.min_count)
    flips = []
    prev = None
    for b in np.flatnonzero(ok & (diff != 0)):
        sign = np.sign(diff[b])
        if prev is not None and sign != prev[1]:
            flips.append(float(report.bin_edges[b]))
        prev = (b, sign)
    return flips


# --------------------------------------------------------------------------- drift


@dataclass(frozen=True, eq=False)
class DriftSeries:
    channel_id: str
    indices: np.ndarray
    labels: tuple
    shares: np.ndarray  # (instances, bands): linearly predictable energy / Var(y)
    model_mse: dict = field(default_factory=dict)  # model -> (instances,)

    @property
    def eta_linear(self) -> np.ndarray:
        return self.shares.sum(axis=1)

    def to_dict(self) -> dict:
        return {
            "channel_id": self.channel_id,
            "indices": self.indices.tolist(),
            "labels": list(self.labels),
            "shares": self.shares.tolist(),
            "model_mse": {m: v.tolist() for m, v in self.model_mse.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DriftSeries":
        return cls(
            d["channel_id"],
            np.asarray(d["indices"], dtype=int),
            tuple(d["labels"]),
            np.asarray(d["shares"], dtype=float).reshape(len(d["indices"]), len(d["labels"])),
            {m: np.asarray(v, dtype=float) for m, v in d["model_mse"].items()},
        )

    def csv_fields(self) -> tuple:
        return (("channel_id", "index") + tuple(f"share_{l}" for l in self.labels)
                + ("eta_linear",) + tuple(f"mse_{m}" for m in self.model_mse))

    def csv_rows(self) -> list:
        eta = self.eta_linear
        rows = []
        for i, idx in enumerate(self.indices):
            row = {"channel_id": self.channel_id, "index": int(idx)}
            row.update({f"share_{l}": self.shares[i, b] for b, l in enumerate(self.labels)})
            row["eta_linear"] = eta[i]
            row.update({f"mse_{m}": v[i] for m, v in self.model_mse.items()})
            rows.append(row)
        return rows


def predictable_shares(pair: SegmentPair, cfg: WelchConfig, partition: BandPartition) -> np.ndarray:
    """Per-band ``sum gamma_yx^2 * S_yy / Var(y)`` of one instance."""
    fx = WelchFrame.of(pair.x - pair.x.mean(), cfg)
    fy = WelchFrame.of(pair.y - pair.y.mean(), cfg)
    coh, s_yy, _ = frame_coherence(fy, fx, cfg.epsilon)
    var_y = s_yy.total
    if not var_y > 0:
        raise ZeroVarianceError(f"zero-variance future at index {pair.index}")
    return band_sums(coh.gamma_sq * s_yy.power, s_yy.grid, partition) / var_y


def drift_profile(
    pairs: Sequence[SegmentPair],
    cfg: Optional[WelchConfig] = None,
    partition: Optional[BandPartition] = None,
    predictions: Optional[Mapping[str, Sequence]] = None,
) -> DriftSeries:
    """Band-wise predictable-energy shares (and model MSE) along one channel."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyInputError("no instances for a drift profile")
    channels = {p.channel_id for p in pairs}
    if len(channels) > 1:
        raise OrderingError(f"drift profile expects one channel, got {sorted(channels)}")
    indices = np.array([p.index for p in pairs])
    if np.any(np.diff(indices) <= 0):
        raise OrderingError("instances must be strictly ordered by index")
    cfg = cfg or WelchConfig.default_for(len(pairs[0]))
    partition = partition or make_partition("equal_width")
    shares = np.array([predictable_shares(p, cfg, partition) for p in pairs])
    model_mse = {}
    for model, preds in (predictions or {}).items():
        preds = list(preds)
        if len(preds) != len(pairs):
            raise ShapeError(f"model {model!r}: {len(preds)} predictions for {len(pairs)} instances")
        model_mse[model] = np.array(
            [np.mean((np.asarray(yh, dtype=float) - p.y) ** 2) for yh, p in zip(preds, pairs)]
        )
    return DriftSeries(pairs[0].channel_id, indices, partition.labels, shares, model_mse)


# --------------------------------------------------------------------------- correlation


@dataclass(frozen=True, eq=False)
class CorrelationReport:
    channels: tuple
    mean_mse_lb: np.ndarray  # (channels,)
    mean_model_mse: dict  # model -> (channels,)
    r: dict  # model -> float or None
    scope: str = "per-channel means over instances"

    def to_dict(self) -> dict:
        return {
            "scope": self.scope,
            "channels": list(self.channels),
            "mean_mse_lb": self.mean_mse_lb.tolist(),
            "mean_model_mse": {m: [_f(v) for v in vals] for m, vals in self.mean_model_mse.items()},
            "r": dict(self.r),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CorrelationReport":
        return cls(
            tuple(d["channels"]),
            np.asarray(d["mean_mse_lb"], dtype=float),
            {m: np.asarray([_nan(v) for v in vals]) for m, vals in d["mean_model_mse"].items()},
            dict(d["r"]),
            d.get("scope", "per-channel means over instances"),
        )

    CSV_FIELDS = ("model_id", "channel_id", "mean_mse_lb", "mean_mse", "r")

    def csv_rows(self) -> list:
        rows = []
        for m, vals in self.mean_model_mse.items():
            for c, lb, v in zip(self.channels, self.mean_mse_lb, vals):
                rows.append({"model_id": m, "channel_id": c, "mean_mse_lb": lb, "mean_mse": v, "r": self.r[m]})
        return rows


def correlate(records: Sequence[InstanceRecord]) -> CorrelationReport:
    """Pearson R between per-channel mean model MSE and mean ``mse_lb``."""
    records = list(records)
    if not records:
        raise EmptyInputError("no records to correlate")
    channels = list(OrderedDict((r.channel_id, None) for r in records))
    models = _model_ids(records)
    lb = np.array([np.mean([r.mse_lb for r in records if r.channel_id == c]) for c in channels])
    mean_mse = {}
    r_values = {}
    for m in models:
        vals = np.array([
            np.mean([r.model_mse[m] for r in records if r.channel_id == c and m in r.model_mse] or [np.nan])
            for c in channels
        ])
        mean_mse[m] = vals
        ok = np.isfinite(vals)
        try:
            r_values[m] = pearson_r(lb[ok], vals[ok])
        except UndefinedCorrelationError:
            r_values[m] = None
    return CorrelationReport(tuple(channels), lb, mean_mse, r_values)


# --------------------------------------------------------------------------- aggregates


@dataclass(frozen=True)
class ScpAggregate:
    """Mean ``mse_lb`` and P per channel and over all instances."""

    channels: tuple
    channel_mse_lb: tuple
    channel_p: tuple
    channel_count: tuple
    mean_mse_lb: float
    mean_p: float
    count: int
    failures: int = 0
    band: Optional[tuple] = None

    def to_dict(self) -> dict:
        return {
            "band": list(self.band) if self.band is not None else None,
            "mean_mse_lb": self.mean_mse_lb,
            "mean_p": self.mean_p,
            "count": self.count,
            "failures": self.failures,
            "channels": [
                {"channel_id": c, "mean_mse_lb": lb, "mean_p": p, "count": n}
                for c, lb, p, n in zip(self.channels, self.channel_mse_lb, self.channel_p, self.channel_count)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScpAggregate":
        ch = d["channels"]
        return cls(
            tuple(c["channel_id"] for c in ch),
            tuple(c["mean_mse_lb"] for c in ch),
            tuple(c["mean_p"] for c in ch),
            tuple(c["count"] for c in ch),
            d["mean_mse_lb"], d["mean_p"], d["count"], d.get("failures", 0),
            tuple(d["band"]) if d.get("band") is not None else None,
        )

    CSV_FIELDS = ("channel_id", "mean_mse_lb", "mean_p", "count")

    def csv_rows(self) -> list:
        rows = [
            {"channel_id": c, "mean_mse_lb": lb, "mean_p": p, "count": n}
            for c, lb, p, n in zip(self.channels, self.channel_mse_lb, self.channel_p, self.channel_count)
        ]
        rows.append({"channel_id": "__all__", "mean_mse_lb": self.mean_mse_lb, "mean_p": self.mean_p,
                     "count": self.count})
        return rows


def aggregate_scp(results: Sequence) -> ScpAggregate:
    """Average SCP reports per channel and over the dataset; failures are counted."""
    reports = [r for r in results if isinstance(r, ScpReport)]
    failures = len(results) - len(reports)
    if not reports:
        raise EmptyInputError("no successful SCP reports to aggregate")
    channels = list(OrderedDict((r.channel_id, None) for r in reports))
    by = {c: [r for r in reports if r.channel_id == c] for c in channels}
    return ScpAggregate(
        tuple(channels),
        tuple(float(np.mean([r.mse_lb for r in by[c]])) for c in channels),
        tuple(float(np.mean([r.p for r in by[c]])) for c in channels),
        tuple(len(by[c]) for c in channels),
        float(np.mean([r.mse_lb for r in reports])),
        float(np.mean([r.p for r in reports])),
        len(reports),
        failures,
        reports[0].band,
    )


# --------------------------------------------------------------------------- band energy


@dataclass(frozen=True)
class BandEnergyTable:
    """Mean future energy share and band-restricted P per channel and band."""

    labels: tuple
    edges: tuple
    channels: tuple
    shares: tuple  # per channel: per-band mean energy share
    band_p: tuple  # per channel: per-band mean P (None where undefined)
    counts: tuple

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "edges": list(self.edges),
            "channels": [
                {"channel_id": c, "shares": list(s), "band_p": list(p), "count": n}
                for c, s, p, n in zip(self.channels, self.shares, self.band_p, self.counts)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BandEnergyTable":
        ch = d["channels"]
        return cls(
            tuple(d["labels"]), tuple(d["edges"]),
            tuple(c["channel_id"] for c in ch),
            tuple(tuple(c["shares"]) for c in ch),
            tuple(tuple(c["band_p"]) for c in ch),
            tuple(c["count"] for c in ch),
        )

    CSV_FIELDS = ("channel_id", "band", "lo", "hi", "energy_share", "p", "count")

    def csv_rows(self) -> list:
        rows = []
        for c, shares, ps, n in zip(self.channels, self.shares, self.band_p, self.counts):
            for b, label in enumerate(self.labels):
                rows.append({"channel_id": c, "band": label, "lo": self.edges[b], "hi": self.edges[b + 1],
                             "energy_share": shares[b], "p": ps[b], "count": n})
        return rows


def band_energy_table(pairs_by_channel: Mapping[str, Sequence[SegmentPair]], cfg: Optional[WelchConfig],
                      partition: BandPartition) -> BandEnergyTable:
    """Average band energy shares of the futures and per-band P, per channel."""
    channels, shares, band_p, counts = [], [], [], []
    for channel, pairs in pairs_by_channel.items():
        reps = []
        for pair in pairs:
            try:
                reps.append(compute_scp(pair, cfg, partition=partition))
            except ZeroVarianceError:
                continue
        if not reps:
            continue
        var_b = np.array([[b.var_y for b in r.band_breakdown] for r in reps])
        p_b = np.array([[b.p for b in r.band_breakdown] for r in reps])
        share = var_b / var_b.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore"):
            mean_p = [None if np.all(np.isnan(col)) else float(np.nanmean(col)) for col in p_b.T]
        channels.append(channel)
        shares.append(tuple(float(v) for v in share.mean(axis=0)))
        band_p.append(tuple(mean_p))
        counts.append(len(reps))
    if not channels:
        raise EmptyInputError("no instances with nonzero future variance")
    return BandEnergyTable(tuple(partition.labels), tuple(float(e) for e in partition.edges),
                           tuple(channels), tuple(shares), tuple(band_p), tuple(counts))


# --------------------------------------------------------------------------- band LUR summary


@dataclass(frozen=True)
class BandLurRow:
    model_id: str
    label: str
    lo: float
    hi: float
    energy_share: float
    mean_lur: Optional[float]
    pooled_lur: Optional[float]
    count: int
    classification: str

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class BandLurSummary:
    """Per-model, per-band mean energy share and LUR."""

    rows: tuple
    tolerance: float

    def for_model(self, model_id: str) -> list:
        return [r for r in self.rows if r.model_id == model_id]

    def to_dict(self) -> dict:
        return {"tolerance": self.tolerance, "rows": [r.to_dict() for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> "BandLurSummary":
        return cls(tuple(BandLurRow(**r) for r in d["rows"]), d["tolerance"])

    CSV_FIELDS = tuple(BandLurRow.__dataclass_fields__)

    def csv_rows(self) -> list:
        return [r.to_dict() for r in self.rows]


def summarize_band_lur(reports: Sequence[LurReport], tolerance: float = 0.05) -> BandLurSummary:
    """Average band shares and LUR_b per model.

    ``mean_lur`` averages the defined per-instance LUR_b values and drives
    the classification; ``pooled_lur`` is ``sum p_model_b / sum p_linear_b``.
    """
    reports = [r for r in reports if r.band_lur]
    if not reports:
        raise EmptyInputError("no band-resolved LUR reports")
    rows = []
    for model in OrderedDict((r.model_id, None) for r in reports):
        mine = [r for r in reports if r.model_id == model]
        for b, first in enumerate(mine[0].band_lur):
            entries = [r.band_lur[b] for r in mine]
            defined = [e.lur for e in entries if e.lur is not None]
            mean_lur = float(np.mean(defined)) if defined else None
            pl = sum(e.p_linear for e in entries)
            pooled = sum(e.p_model for e in entries) / pl if pl > 0 else None
            rows.append(BandLurRow(
                model, first.label, first.lo, first.hi,
                float(np.mean([e.energy_share for e in entries])),
                mean_lur, pooled, len(defined), classify_band(mean_lur, tolerance).value,
            ))
    return BandLurSummary(tuple(rows), tolerance)


# --------------------------------------------------------------------------- toy study

TOY_WELCH = WelchConfig(segment_length=256, overlap=128, window="hann")
TOY_PAIR_LENGTH = 512
STRATEGIES = ("recursive", "direct")


@dataclass(frozen=True)
class ToyRow:
    noise_level: float
    model_mse: float
    mse_lb: float
    p: float
    var_y: float

    @property
    def bound_ratio(self) -> float:
        return self.mse_lb / self.model_mse


@dataclass(frozen=True)
class ToyStudyResult:
    rows: tuple
    config: dict

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def to_dict(self) -> dict:
        return {"config": self.config, "rows": [vars(r) for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> "ToyStudyResult":
        return cls(tuple(ToyRow(**r) for r in d["rows"]), d.get("config", {}))

    CSV_FIELDS = ("noise_level", "model_mse", "mse_lb", "p", "var_y")

    def csv_rows(self) -> list:
        return [vars(r) for r in self.rows]

    @classmethod
    def from_csv_rows(cls, rows: list) -> "ToyStudyResult":
        return cls(tuple(ToyRow(**{k: float(r[k]) for k in cls.CSV_FIELDS}) for r in rows), {})


def toy_triples(
    spec: MultibandSpec,
    noise: NoiseSpec,
    level: float,
    fir_length: int = DEFAULT_LENGTH,
    ridge: float = DEFAULT_RIDGE,
    pair_length: int = TOY_PAIR_LENGTH,
    strategy: str = "recursive",
) -> list:
    """One (history, future, FIR forecast) triple per trial at one noise level.

    The series is split at ``total_length // 2``; the history window is the
    ``pair_length`` samples before the split and the future the samples after
    it.  The filter is refit for every (level, trial).  Trial ``t`` draws its
    clean series and its noise from seeds derived from ``(spec.seed, t)``, so
    all noise levels share the same underlying realizations.
    """
    if strategy not in STRATEGIES:
        raise InvalidConfigError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    noise.check_against(spec)
    boundary = spec.total_length // 2
    if pair_length > boundary:
        raise InvalidConfigError(f"pair_length {pair_length} exceeds the history length {boundary}")
    triples = []
    for trial in range(noise.trials):
        clean = generate_multiband_gp(_replace_seed(spec, derive_seed(spec.seed, trial, 0)))
        series = add_bandlimited_noise(clean, spec, noise, level, derive_seed(spec.seed, trial, 1))
        history = series[:boundary]
        x = series[boundary - pair_length : boundary]
        y = series[boundary : boundary + pair_length]
        if strategy == "recursive":
            filt = fit_fir(one_step_pairs(history), fir_length, ridge)
            y_hat = predict_fir(filt, history, pair_length)
        else:
            if boundary < 2 * pair_length:
                raise InvalidConfigError("direct strategy needs a history of at least two pair lengths")
            start = boundary - 2 * pair_length
            filt = fit_fir([(series[start : start + pair_length], x)], fir_length, ridge)
            y_hat = apply_fir(filt, x, warmup=series[:boundary - pair_length])
        triples.append(PredictionTriple(x, y, y_hat, model_id=f"fir_{strategy}", channel_id="toy", index=trial))
    return triples


def _replace_seed(spec: MultibandSpec, seed: int) -> MultibandSpec:
    return replace(spec, seed=seed)


def run_toy_study(
    spec: Optional[MultibandSpec] = None,
    noise: Optional[NoiseSpec] = None,
    welch: WelchConfig = TOY_WELCH,
    fir_length: int = DEFAULT_LENGTH,
    ridge: float = DEFAULT_RIDGE,
    pair_length: int = TOY_PAIR_LENGTH,
    strategy: str = "recursive",
) -> ToyStudyResult:
    """Noise sweep: realized FIR MSE next to ``mse_lb`` and P, averaged over trials."""
    spec = spec or MultibandSpec()
    noise = noise or NoiseSpec()
    rows = []
    for level in sorted(noise.noise_levels):
        mse, lb, p, var = [], [], [], []
        for t in toy_triples(spec, noise, level, fir_length, ridge, pair_length, strategy):
            rep = compute_scp(SegmentPair(t.x, t.y, t.channel_id, t.index), welch)
            mse.append(float(np.mean((t.y_hat - t.y) ** 2)))
            lb.append(rep.mse_lb)
            p.append(rep.p)
            var.append(rep.var_y)
        rows.append(ToyRow(level, float(np.mean(mse)), float(np.mean(lb)), float(np.mean(p)), float(np.mean(var))))
    config = {
        "spec": spec.to_dict(),
        "noise": noise.to_dict(),
        "welch": welch.to_dict(),
        "fir_length": fir_length,
        "ridge": ridge,
        "pair_length": pair_length,
        "strategy": strategy,
        "refit": "per (noise level, trial)",
    }
    return ToyStudyResult(tuple(rows), config)


def toy_band_lur(
    spec: Optional[MultibandSpec] = None,
    noise: Optional[NoiseSpec] = None,
    level: float = 0.0,
    welch: WelchConfig = TOY_WELCH,
    partition: Optional[BandPartition] = None,
    fir_length: int = DEFAULT_LENGTH,
    ridge: float = DEFAULT_RIDGE,
    strategy: str = "recursive",
    tolerance: float = 0.05,
) -> BandLurSummary:
    """Band-wise LUR of the FIR baseline at one noise level, summarized over trials."""
    spec = spec or MultibandSpec()
    noise = noise or NoiseSpec()
    partition = partition or make_partition("equal_width")
    reports = [
        compute_lur(t, welch, band_partition=partition)
        for t in toy_triples(spec, noise, level, fir_length, ridge, strategy=strategy)
    ]
    return summarize_band_lur(reports, tolerance)


def top_energy_bands(summary: BandLurSummary, model_id: str, k: int = 2) -> list:
    rows = summary.for_model(model_id)
    return sorted(rows, key=lambda r: r.energy_share, reverse=True)[:k]


__all__ = [
    "InstanceRecord", "StratifiedReport", "BandEnergyTable", "band_energy_table", "DriftSeries", "CorrelationReport", "ScpAggregate",
    "BandLurRow", "BandLurSummary", "ToyRow", "ToyStudyResult", "Utilization",
    "nmse", "dataset_nmse", "pearson_r", "stratify_by_p", "crossover_bins", "predictable_shares",
    "drift_profile", "correlate", "aggregate_scp", "summarize_band_lur", "toy_triples",
    "run_toy_study", "toy_band_lur", "top_energy_bands",
]
