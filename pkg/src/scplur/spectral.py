"""Welch power/cross spectra and magnitude-squared coherence.

All spectra live on the one-sided grid ``k / L`` (``k = 0 .. L // 2``) of the
segment length ``L`` and use a variance-preserving normalization: the bins of
a power spectrum sum to the mean square of the input, which is the sample
variance once the caller has removed the mean.

Normalization is done in two steps.  Each windowed segment periodogram is
divided by ``L * sum(w**2)`` and interior bins are doubled, so one segment's
bins sum to the window-weighted mean square of that segment.  Averaging over
segments only approximates the full-series mean square (overlapping Hann
segments weight samples unevenly, trailing samples are dropped), so the
average is finally rescaled by a single scalar to make the identity exact.
Cross spectra are rescaled by the geometric mean of the two series' factors,
which keeps ``cpsd(a, a) == psd(a)`` and leaves coherence untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    DegenerateSegmentationError,
    InsufficientLengthError,
    InvalidConfigError,
    ShapeError,
)

WINDOWS = ("hann", "rectangular")

# relative Tikhonov floor used when WelchConfig.epsilon is None
EPS_RELATIVE = 1e-8
EPS_ABSOLUTE_MIN = 1e-15


def make_window(kind: str, length: int) -> np.ndarray:
    """Return ``length`` taper weights.

    ``hann`` is the periodic (DFT-even) Hann window ``0.5 - 0.5 cos(2 pi n / L)``,
    so its first weight is 0; ``rectangular`` is all ones.
    """
    if length < 2:
        raise InvalidConfigError(f"window length must be >= 2, got {length}")
    if kind == "hann":
        n = np.arange(length)
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / length)
    if kind == "rectangular":
        return np.ones(length)
    raise InvalidConfigError(f"unknown window {kind!r}; expected one of {WINDOWS}")


@dataclass(frozen=True)
class WelchConfig:
    """Welch estimation parameters shared by every spectrum of one analysis.

    ``epsilon=None`` selects the relative Tikhonov floor computed per
    coherence from the two spectra involved (see :func:`default_epsilon`).
    """

    segment_length: int
    overlap: int = 0
    window: str = "hann"
    epsilon: Optional[float] = None
    detrend: str = "none"

    def __post_init__(self):
        if int(self.segment_length) != self.segment_length or self.segment_length < 2:
            raise InvalidConfigError(
                f"segment_length must be an integer >= 2, got {self.segment_length}"
            )
        if not 0 <= self.overlap < self.segment_length:
            raise InvalidConfigError(
                f"overlap must lie in [0, {self.segment_length}), got {self.overlap}"
            )
        if self.window not in WINDOWS:
            raise InvalidConfigError(f"unknown window {self.window!r}")
        if self.epsilon is not None and not self.epsilon > 0:
            raise InvalidConfigError(f"epsilon must be > 0, got {self.epsilon}")
        if self.detrend != "none":
            raise InvalidConfigError("only detrend='none' is supported; remove the mean upstream")

    @classmethod
    def default_for(cls, n: int, epsilon: Optional[float] = None) -> "WelchConfig":
        """Hann window of ``floor(n / 4)`` samples with 50% overlap."""
        seg = n // 4
        if seg < 2:
            raise InsufficientLengthError(f"series of length {n} is too short for the default Welch config")
        return cls(segment_length=seg, overlap=seg // 2, window="hann", epsilon=epsilon)

    @property
    def step(self) -> int:
        return self.segment_length - self.overlap

    def segment_count(self, n: int) -> int:
        if n < self.segment_length:
            return 0
        return 1 + (n - self.segment_length) // self.step

    def check(self, n: int) -> int:
        """Validate the config for a series of length ``n``; return the segment count."""
        if n < self.segment_length:
            raise InsufficientLengthError(
                f"series length {n} is shorter than segment_length {self.segment_length}"
            )
        k = self.segment_count(n)
        if k < 2:
            raise DegenerateSegmentationError(
                f"length {n} with segment_length {self.segment_length} and overlap "
                f"{self.overlap} gives {k} segment(s); coherence needs at least 2"
            )
        return k

    def grid(self) -> "FrequencyGrid":
        return FrequencyGrid.for_segment(self.segment_length)

    def to_dict(self) -> dict:
        return {
            "segment_length": self.segment_length,
            "overlap": self.overlap,
            "window": self.window,
            "epsilon": self.epsilon,
            "detrend": self.detrend,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WelchConfig":
        return cls(
            segment_length=int(d["segment_length"]),
            overlap=int(d["overlap"]),
            window=d.get("window", "hann"),
            epsilon=d.get("epsilon"),
            detrend=d.get("detrend", "none"),
        )


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Normalized one-sided frequencies (cycles/sample) of a segment length."""

    frequencies: np.ndarray
    segment_length: int

    @classmethod
    def for_segment(cls, segment_length: int) -> "FrequencyGrid":
        # k / L rather than k * (1 / L): exact rationals keep band edges exact
        freqs = np.arange(segment_length // 2 + 1) / segment_length
        freqs.setflags(write=False)
        return cls(freqs, segment_length)

    @property
    def bin_count(self) -> int:
        return len(self.frequencies)

    def __len__(self) -> int:
        return self.bin_count

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrequencyGrid):
            return NotImplemented
        return self.segment_length == other.segment_length and np.array_equal(
            self.frequencies, other.frequencies
        )

    __hash__ = object.__hash__


@dataclass(frozen=True, eq=False)
class PowerSpectrum:
    grid: FrequencyGrid
    power: np.ndarray

    @property
    def total(self) -> float:
        return float(np.sum(self.power))

    def to_dict(self) -> dict:
        return {
            "segment_length": self.grid.segment_length,
            "frequencies": self.grid.frequencies.tolist(),
            "power": self.power.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PowerSpectrum":
        grid = FrequencyGrid.for_segment(int(d["segment_length"]))
        return cls(grid, np.asarray(d["power"], dtype=float))


@dataclass(frozen=True, eq=False)
class CrossSpectrum:
    """Cross spectrum with the ``conj(A) * B`` convention.

    A delay ``b[n] = a[n - d]`` therefore shows up as phase ``-2 pi f d``.
    """

    grid: FrequencyGrid
    value: np.ndarray


@dataclass(frozen=True, eq=False)
class CoherenceProfile:
    grid: FrequencyGrid
    gamma_sq: np.ndarray
    epsilon: float


def _fold_weights(segment_length: int) -> np.ndarray:
    nbins = segment_length // 2 + 1
    fold = np.full(nbins, 2.0)
    fold[0] = 1.0
    if segment_length % 2 == 0:
        fold[-1] = 1.0
    return fold


@dataclass(frozen=True, eq=False)
class WelchFrame:
    """Windowed segment DFTs of one series plus its normalization factor.

    Build one frame per series with :meth:`of` and derive auto and cross
    spectra from frames sharing the same config, which avoids recomputing
    FFTs when a series takes part in several spectra.
    """

    cfg: WelchConfig
    segments: np.ndarray  # (K, bins) complex
    scale: float
    norm: np.ndarray  # per-bin fold / (L * sum(w^2) * K)
    length: int = field(default=0)

    @classmethod
    def of(cls, series, cfg: WelchConfig) -> "WelchFrame":
        x = np.asarray(series, dtype=float)
        if x.ndim != 1:
            raise ShapeError(f"expected a 1-D series, got shape {x.shape}")
        k = cfg.check(len(x))
        seg = cfg.segment_length
        w = make_window(cfg.window, seg)
        windows = np.lib.stride_tricks.sliding_window_view(x, seg)[:: cfg.step][:k]
        segments = np.fft.rfft(windows * w, axis=1)
        norm = _fold_weights(seg) / (seg * np.sum(w * w) * k)
        raw_total = float(np.sum(norm * np.sum(np.abs(segments) ** 2, axis=0)))
        target = float(np.mean(x * x))
        scale = target / raw_total if raw_total > 0.0 else 1.0
        return cls(cfg, segments, scale, norm, len(x))

    @property
    def grid(self) -> FrequencyGrid:
        return self.cfg.grid()

    def psd(self) -> PowerSpectrum:
        power = self.scale * self.norm * np.sum(np.abs(self.segments) ** 2, axis=0)
        return PowerSpectrum(self.grid, power)

    def cross(self, other: "WelchFrame") -> CrossSpectrum:
        if self.cfg != other.cfg or self.length != other.length:
            raise ShapeError("cross spectrum needs equal-length series and identical Welch configs")
        raw = self.norm * np.sum(np.conj(self.segments) * other.segments, axis=0)
        return CrossSpectrum(self.grid, np.sqrt(self.scale * other.scale) * raw)


def welch_psd(series, cfg: WelchConfig) -> PowerSpectrum:
    """One-sided Welch PSD; the caller is expected to have removed the mean."""
    return WelchFrame.of(series, cfg).psd()


def welch_cpsd(a, b, cfg: WelchConfig) -> CrossSpectrum:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ShapeError(f"length mismatch: {a.shape} vs {b.shape}")
    return WelchFrame.of(a, cfg).cross(WelchFrame.of(b, cfg))


def default_epsilon(s_aa: PowerSpectrum, s_bb: PowerSpectrum) -> float:
    """Relative Tikhonov floor: 1e-8 of the mean bin power of both spectra."""
    mean_power = 0.5 * (float(np.mean(s_aa.power)) + float(np.mean(s_bb.power)))
    return max(EPS_RELATIVE * mean_power, EPS_ABSOLUTE_MIN)


def coherence(
    s_ab: CrossSpectrum,
    s_aa: PowerSpectrum,
    s_bb: PowerSpectrum,
    epsilon: Optional[float] = None,
) -> CoherenceProfile:
    """Regularized magnitude-squared coherence, clamped into [0, 1]."""
    if not (s_ab.grid == s_aa.grid and s_aa.grid == s_bb.grid):
        raise ShapeError("coherence inputs must share one frequency grid")
    if epsilon is None:
        epsilon = default_epsilon(s_aa, s_bb)
    elif not epsilon > 0:
        raise InvalidConfigError(f"epsilon must be > 0, got {epsilon}")
    num = np.abs(s_ab.value) ** 2
    den = (s_aa.power + epsilon) * (s_bb.power + epsilon)
    gamma = np.clip(num / den, 0.0, 1.0)
    return CoherenceProfile(s_aa.grid, gamma, float(epsilon))


def frame_coherence(fa: WelchFrame, fb: WelchFrame, epsilon: Optional[float] = None):
    """Coherence of two frames; returns ``(profile, psd_a, psd_b)``."""
    s_aa = fa.psd()
    s_bb = fb.psd()
    return coherence(fa.cross(fb), s_aa, s_bb, epsilon), s_aa, s_bb
