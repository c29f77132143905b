"""Spectral Coherence Predictability: per-instance linear MSE bound and score.

For a history ``x`` and future ``y`` of equal length the score is

    mse_lb = (mean(y) - mean(x))**2 + sum_f S_yy(f) * (1 - gamma_xy(f)**2)
    p      = 1 - mse_lb / Var(y)

where spectra are Welch estimates of the mean-removed series.  Restricting the
sum to a band drops the mean-shift term, so band contributions add up to the
full-grid bound exactly.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .bands import BandPartition, band_mask, band_sums
from .errors import EmptyInputError, ScplurError, ShapeError, ZeroVarianceError
from .spectral import PowerSpectrum, WelchConfig, WelchFrame, frame_coherence


def _as_series(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True, eq=False)
class SegmentPair:
    """A history/future pair cut from one channel at position ``index``."""

    x: np.ndarray
    y: np.ndarray
    channel_id: str = ""
    index: int = 0

    def __post_init__(self):
        x = _as_series(self.x, "history")
        y = _as_series(self.y, "future")
        if len(x) != len(y):
            raise ShapeError(f"history and future lengths differ: {len(x)} vs {len(y)}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class BandScp:
    label: str
    lo: float
    hi: float
    var_y: float
    mse_lb: float
    p: float

    def to_dict(self) -> dict:
        return {"label": self.label, "lo": self.lo, "hi": self.hi,
                "var_y": self.var_y, "mse_lb": self.mse_lb, "p": _nan_to_none(self.p)}

    @classmethod
    def from_dict(cls, d: dict) -> "BandScp":
        return cls(d["label"], d["lo"], d["hi"], d["var_y"], d["mse_lb"], _none_to_nan(d["p"]))


def _nan_to_none(v):
    return None if v is None or (isinstance(v, float) and np.isnan(v)) else v


def _none_to_nan(v):
    return float("nan") if v is None else v


@dataclass(frozen=True, eq=False)
class ScpReport:
    delta_sq: float
    residual_spectrum: PowerSpectrum
    var_y: float
    mse_lb: float
    p_raw: float
    p: float
    config: WelchConfig
    epsilon: float
    band: Optional[tuple] = None
    band_breakdown: tuple = ()
    channel_id: str = ""
    index: int = 0

    def to_dict(self) -> dict:
        return {
            "channel_id": self.channel_id,
            "index": self.index,
            "delta_sq": self.delta_sq,
            "mse_lb": self.mse_lb,
            "var_y": self.var_y,
            "p_raw": self.p_raw,
            "p": self.p,
            "epsilon": self.epsilon,
            "band": list(self.band) if self.band is not None else None,
            "band_breakdown": [b.to_dict() for b in self.band_breakdown],
            "residual_spectrum": self.residual_spectrum.to_dict(),
            "config": self.config.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScpReport":
        return cls(
            delta_sq=d["delta_sq"],
            residual_spectrum=PowerSpectrum.from_dict(d["residual_spectrum"]),
            var_y=d["var_y"],
            mse_lb=d["mse_lb"],
            p_raw=d["p_raw"],
            p=d["p"],
            config=WelchConfig.from_dict(d["config"]),
            epsilon=d["epsilon"],
            band=tuple(d["band"]) if d.get("band") is not None else None,
            band_breakdown=tuple(BandScp.from_dict(b) for b in d.get("band_breakdown", [])),
            channel_id=d.get("channel_id", ""),
            index=d.get("index", 0),
        )

    CSV_FIELDS = ("channel_id", "index", "delta_sq", "mse_lb", "var_y", "p_raw", "p")

    def csv_row(self) -> dict:
        row = {k: getattr(self, k) for k in self.CSV_FIELDS}
        for b in self.band_breakdown:
            row[f"mse_lb_{b.label}"] = b.mse_lb
            row[f"var_y_{b.label}"] = b.var_y
            row[f"p_{b.label}"] = b.p
        return row


@dataclass(frozen=True)
class BatchFailure:
    """Placeholder for a batch element whose computation raised."""

    position: int
    channel_id: str
    index: int
    error: str
    message: str


def compute_scp(
    pair: SegmentPair,
    cfg: Optional[WelchConfig] = None,
    band: Optional[tuple] = None,
    partition: Optional[BandPartition] = None,
) -> ScpReport:
    """Linear MSE lower bound and predictability of one history/future pair.

    ``band=(lo, hi)`` restricts the aggregate to that frequency interval (the
    mean-shift term is then left out); ``partition`` adds a per-band
    breakdown next to the aggregate.
    """
    if cfg is None:
        cfg = WelchConfig.default_for(len(pair))
    x, y = pair.x, pair.y
    m_x, m_y = float(np.mean(x)), float(np.mean(y))
    delta_sq = (m_y - m_x) ** 2
    fx = WelchFrame.of(x - m_x, cfg)
    fy = WelchFrame.of(y - m_y, cfg)
    coh, _, s_yy = frame_coherence(fx, fy, cfg.epsilon)
    residual = s_yy.power * (1.0 - coh.gamma_sq)
    freqs = s_yy.grid.frequencies

    if band is None:
        var_y = float(np.sum(s_yy.power))
        mse_lb = delta_sq + float(np.sum(residual))
    else:
        mask = band_mask(freqs, band)
        var_y = float(np.sum(s_yy.power[mask]))
        mse_lb = float(np.sum(residual[mask]))
        band = (float(band[0]), float(band[1]))
    if not var_y > 0:
        raise ZeroVarianceError(
            f"future has zero variance{' in the selected band' if band else ''} "
            f"(channel {pair.channel_id!r}, index {pair.index})"
        )
    p_raw = 1.0 - mse_lb / var_y

    breakdown = ()
    if partition is not None:
        var_b = band_sums(s_yy.power, freqs, partition)
        mse_b = band_sums(residual, freqs, partition)
        with np.errstate(divide="ignore", invalid="ignore"):
            p_b = np.where(var_b > 0, 1.0 - mse_b / var_b, np.nan)
        breakdown = tuple(
            BandScp(label, lo, hi, float(v), float(m), float(p))
            for label, (lo, hi), v, m, p in zip(partition.labels, partition.bands, var_b, mse_b, p_b)
        )

    return ScpReport(
        delta_sq=delta_sq,
        residual_spectrum=PowerSpectrum(s_yy.grid, residual),
        var_y=var_y,
        mse_lb=mse_lb,
        p_raw=p_raw,
        p=min(max(p_raw, 0.0), 1.0),
        config=cfg,
        epsilon=coh.epsilon,
        band=band,
        band_breakdown=breakdown,
        channel_id=pair.channel_id,
        index=pair.index,
    )


def scp_batch(
    pairs: Sequence[SegmentPair],
    cfg: Optional[WelchConfig] = None,
    band_partition: Optional[BandPartition] = None,
    band: Optional[tuple] = None,
    threads: int = 1,
) -> list:
    """Apply :func:`compute_scp` element-wise, keeping input order.

    Elements that raise a package error come back as :class:`BatchFailure`
    instead of aborting the batch.
    """
    pairs = list(pairs)
    if not pairs:
        raise EmptyInputError("scp_batch needs at least one pair")

    def one(item) -> Union[ScpReport, BatchFailure]:
        pos, pair = item
        try:
            return compute_scp(pair, cfg, band=band, partition=band_partition)
        except ScplurError as exc:
            return BatchFailure(pos, pair.channel_id, pair.index, type(exc).__name__, str(exc))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, enumerate(pairs)))
    return [one(item) for item in enumerate(pairs)]
