"""Linear Utilization Ratio: model-captured versus linearly available energy.

``p_linear`` weights the history/future coherence by the target spectrum,
``p_model`` does the same with the prediction/future coherence, and
``lur = p_model / p_linear``.  All three series are mean-removed on their own,
so a constant forecast bias never enters the ratio.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .bands import BandPartition, band_mask, band_sums
from .errors import ShapeError, ZeroVarianceError
from .scp import _as_series
from .spectral import WelchConfig, WelchFrame, frame_coherence

# p_linear must exceed this fraction of Var(y) for the ratio to be reported
LUR_THRESHOLD = 1e-10
SATURATION_TOLERANCE = 0.05


class Utilization(str, Enum):
    UNDER_UTILIZING = "under_utilizing"
    SATURATING = "saturating"
    BEYOND_LINEAR = "beyond_linear"
    UNDEFINED = "undefined"


@dataclass(frozen=True, eq=False)
class PredictionTriple:
    x: np.ndarray
    y: np.ndarray
    y_hat: np.ndarray
    model_id: str = ""
    channel_id: str = ""
    index: int = 0

    def __post_init__(self):
        x = _as_series(self.x, "history")
        y = _as_series(self.y, "future")
        y_hat = _as_series(self.y_hat, "prediction")
        if not len(x) == len(y) == len(y_hat):
            raise ShapeError(
                f"history/future/prediction lengths differ: {len(x)}, {len(y)}, {len(y_hat)}"
            )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "y_hat", y_hat)

    def __len__(self) -> int:
        return len(self.y)


@dataclass(frozen=True)
class BandLur:
    label: str
    lo: float
    hi: float
    p_model: float
    p_linear: float
    lur: Optional[float]
    energy_share: float

    def to_dict(self) -> dict:
        return {"label": self.label, "lo": self.lo, "hi": self.hi, "p_model": self.p_model,
                "p_linear": self.p_linear, "lur": self.lur, "energy_share": self.energy_share}

    @classmethod
    def from_dict(cls, d: dict) -> "BandLur":
        return cls(d["label"], d["lo"], d["hi"], d["p_model"], d["p_linear"], d["lur"], d["energy_share"])


@dataclass(frozen=True, eq=False)
class LurReport:
    p_model: float
    p_linear: float
    var_y: float
    eta_linear: float
    lur: Optional[float]
    config: WelchConfig
    band: Optional[tuple] = None
    band_lur: tuple = ()
    model_id: str = ""
    channel_id: str = ""
    index: int = 0

    @property
    def defined(self) -> bool:
        return self.lur is not None

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "channel_id": self.channel_id,
            "index": self.index,
            "p_model": self.p_model,
            "p_linear": self.p_linear,
            "var_y": self.var_y,
            "eta_linear": self.eta_linear,
            "lur": self.lur,
            "band": list(self.band) if self.band is not None else None,
            "band_lur": [b.to_dict() for b in self.band_lur],
            "config": self.config.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LurReport":
        return cls(
            p_model=d["p_model"],
            p_linear=d["p_linear"],
            var_y=d["var_y"],
            eta_linear=d["eta_linear"],
            lur=d["lur"],
            config=WelchConfig.from_dict(d["config"]),
            band=tuple(d["band"]) if d.get("band") is not None else None,
            band_lur=tuple(BandLur.from_dict(b) for b in d.get("band_lur", [])),
            model_id=d.get("model_id", ""),
            channel_id=d.get("channel_id", ""),
            index=d.get("index", 0),
        )

    CSV_FIELDS = ("model_id", "channel_id", "index", "p_model", "p_linear", "var_y", "eta_linear", "lur")

    def csv_row(self) -> dict:
        row = {k: getattr(self, k) for k in self.CSV_FIELDS}
        for b in self.band_lur:
            row[f"lur_{b.label}"] = b.lur
            row[f"share_{b.label}"] = b.energy_share
        return row


def _ratio(p_model: float, p_linear: float, var_y: float) -> Optional[float]:
    if p_linear > LUR_THRESHOLD * var_y:
        return p_model / p_linear
    return None


def compute_lur(
    triple: PredictionTriple,
    cfg: Optional[WelchConfig] = None,
    band_partition: Optional[BandPartition] = None,
    band: Optional[tuple] = None,
) -> LurReport:
    if cfg is None:
        cfg = WelchConfig.default_for(len(triple))
    fx = WelchFrame.of(triple.x - np.mean(triple.x), cfg)
    fy = WelchFrame.of(triple.y - np.mean(triple.y), cfg)
    fp = WelchFrame.of(triple.y_hat - np.mean(triple.y_hat), cfg)
    coh_yx, s_yy, _ = frame_coherence(fy, fx, cfg.epsilon)
    coh_yp, _, _ = frame_coherence(fy, fp, cfg.epsilon)

    power = s_yy.power
    explained_model = coh_yp.gamma_sq * power
    explained_linear = coh_yx.gamma_sq * power
    freqs = s_yy.grid.frequencies
    total_var = float(np.sum(power))

    if band is None:
        mask = slice(None)
    else:
        mask = band_mask(freqs, band)
        band = (float(band[0]), float(band[1]))
    var_y = float(np.sum(power[mask]))
    if not var_y > 0:
        raise ZeroVarianceError(
            f"future has zero variance (model {triple.model_id!r}, "
            f"channel {triple.channel_id!r}, index {triple.index})"
        )
    p_model = float(np.sum(explained_model[mask]))
    p_linear = float(np.sum(explained_linear[mask]))

    band_lur = ()
    if band_partition is not None:
        pm_b = band_sums(explained_model, freqs, band_partition)
        pl_b = band_sums(explained_linear, freqs, band_partition)
        share_b = band_sums(power, freqs, band_partition) / total_var
        band_lur = tuple(
            BandLur(label, lo, hi, float(pm), float(pl), _ratio(pm, pl, total_var), float(sh))
            for label, (lo, hi), pm, pl, sh in zip(
                band_partition.labels, band_partition.bands, pm_b, pl_b, share_b
            )
        )

    return LurReport(
        p_model=p_model,
        p_linear=p_linear,
        var_y=var_y,
        eta_linear=min(p_linear / var_y, 1.0),
        lur=_ratio(p_model, p_linear, var_y),
        config=cfg,
        band=band,
        band_lur=band_lur,
        model_id=triple.model_id,
        channel_id=triple.channel_id,
        index=triple.index,
    )


def classify_band(lur_b: Optional[float], tolerance: float = SATURATION_TOLERANCE) -> Utilization:
    """Three-way utilization diagnosis of one (band) LUR value."""
    if tolerance <= 0:
        raise ValueError(f"tolerance must be > 0, got {tolerance}")
    if lur_b is None or not np.isfinite(lur_b):
        return Utilization.UNDEFINED
    if abs(lur_b - 1.0) <= tolerance:
        return Utilization.SATURATING
    if lur_b < 1.0:
        return Utilization.UNDER_UTILIZING
    return Utilization.BEYOND_LINEAR
