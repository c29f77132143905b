"""Multiband Gaussian-process generator with band-limited additive noise.

Series are synthesized in the frequency domain: independent circular complex
Gaussian rFFT coefficients are multiplied by a sum of Gaussian bumps and
inverse-transformed.  The coefficient scaling makes the expected series
variance equal to ``sum_k shape(k)**2`` over the interior bins, so a bump of
amplitude ``a`` and width ``s`` contributes about ``a**2 * s * sqrt(pi)``.

Random numbers come from NumPy's PCG64 bit generator seeded with the integer
seed given in the spec, which makes outputs reproducible across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpecError

# bins within this many widths of a peak count as "in band"
BAND_HALF_WIDTH = 3.0


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(*keys: int) -> int:
    """Deterministic 32-bit seed derived from a tuple of integers."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


@dataclass(frozen=True)
class MultibandSpec:
    total_length: int = 2048
    peak_bins: tuple = (32, 96, 192, 384)
    peak_widths: tuple = (6, 10, 14, 18)
    peak_amplitudes: tuple = (3.0, 2.0, 1.5, 1.0)
    seed: int = 0

    def __post_init__(self):
        for name in ("peak_bins", "peak_widths", "peak_amplitudes"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        n = len(self.peak_bins)
        if not n or len(self.peak_widths) != n or len(self.peak_amplitudes) != n:
            raise InvalidSpecError("peak_bins, peak_widths and peak_amplitudes need equal, nonzero lengths")
        if self.total_length < 4:
            raise InvalidSpecError(f"total_length must be >= 4, got {self.total_length}")
        top = self.total_length // 2
        if any(not 0 < b <= top for b in self.peak_bins):
            raise InvalidSpecError(f"peak bins must lie in (0, {top}]: {self.peak_bins}")
        if list(self.peak_bins) != sorted(self.peak_bins):
            raise InvalidSpecError("peak bins must be sorted ascending")
        if any(w <= 0 for w in self.peak_widths):
            raise InvalidSpecError("peak widths must be positive")
        if any(a < 0 for a in self.peak_amplitudes):
            raise InvalidSpecError("peak amplitudes must be nonnegative")
        if self.seed < 0:
            raise InvalidSpecError("seed must be unsigned")

    @property
    def bins(self) -> np.ndarray:
        return np.arange(self.total_length // 2 + 1)

    def bump(self, i: int) -> np.ndarray:
        """Amplitude profile of peak ``i`` over the rFFT bins."""
        k = self.bins
        return self.peak_amplitudes[i] * np.exp(-0.5 * ((k - self.peak_bins[i]) / self.peak_widths[i]) ** 2)

    def shape(self) -> np.ndarray:
        return sum(self.bump(i) for i in range(len(self.peak_bins)))

    def band_bins(self, i: int) -> np.ndarray:
        """Boolean mask of rFFT bins within +-3 widths of peak ``i``."""
        return np.abs(self.bins - self.peak_bins[i]) <= BAND_HALF_WIDTH * self.peak_widths[i]

    def to_dict(self) -> dict:
        return {
            "total_length": self.total_length,
            "peak_bins": list(self.peak_bins),
            "peak_widths": list(self.peak_widths),
            "peak_amplitudes": list(self.peak_amplitudes),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class NoiseSpec:
    target_band_index: int = 1
    noise_levels: tuple = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0)
    trials: int = 3

    def __post_init__(self):
        object.__setattr__(self, "noise_levels", tuple(float(v) for v in self.noise_levels))
        if any(v < 0 for v in self.noise_levels):
            raise InvalidSpecError("noise levels must be nonnegative")
        if list(self.noise_levels) != sorted(self.noise_levels):
            raise InvalidSpecError("noise levels must be sorted ascending")
        if self.trials < 1:
            raise InvalidSpecError("trials must be >= 1")

    def check_against(self, spec: MultibandSpec) -> None:
        if not 0 <= self.target_band_index < len(spec.peak_bins):
            raise InvalidSpecError(
                f"target band {self.target_band_index} out of range for {len(spec.peak_bins)} peaks"
            )

    def to_dict(self) -> dict:
        return {
            "target_band_index": self.target_band_index,
            "noise_levels": list(self.noise_levels),
            "trials": self.trials,
        }


def _shaped_series(shape: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((2, len(shape)))
    coef = (z[0] + 1j * z[1]) * shape * (n / 2.0)
    coef[0] = 0.0  # zero mean
    if n % 2 == 0:
        coef[-1] = coef[-1].real
    return np.fft.irfft(coef, n=n)


def generate_multiband_gp(spec: MultibandSpec) -> np.ndarray:
    """Zero-mean multiband series of ``spec.total_length`` samples."""
    return _shaped_series(spec.shape(), spec.total_length, _rng(spec.seed))


def band_variance(series, spec: MultibandSpec, band_index: int) -> float:
    """Variance carried by ``series`` in the +-3-width bin range of one peak."""
    x = np.asarray(series, dtype=float)
    n = len(x)
    if n != spec.total_length:
        raise InvalidSpecError(f"series length {n} does not match total_length {spec.total_length}")
    coef = np.fft.rfft(x)
    fold = np.full(len(coef), 2.0)
    fold[0] = 1.0
    if n % 2 == 0:
        fold[-1] = 1.0
    power = fold * np.abs(coef) ** 2 / n**2
    return float(np.sum(power[spec.band_bins(band_index)]))


def bandlimited_noise(spec: MultibandSpec, band_index: int, variance: float, seed: int) -> np.ndarray:
    """Gaussian noise shaped by one peak's bump, rescaled to exactly ``variance``."""
    if variance == 0:
        return np.zeros(spec.total_length)
    shape = spec.bump(band_index) / max(spec.peak_amplitudes[band_index], 1e-300)
    noise = _shaped_series(shape, spec.total_length, _rng(seed))
    return noise * np.sqrt(variance / np.mean(noise**2))


def add_bandlimited_noise(
    series,
    spec: MultibandSpec,
    noise: NoiseSpec,
    level: float,
    seed: int,
) -> np.ndarray:
    """Add noise in the target band at ``level`` times the clean band variance."""
    noise.check_against(spec)
    if level < 0:
        raise InvalidSpecError(f"noise level must be >= 0, got {level}")
    x = np.asarray(series, dtype=float)
    if level == 0:
        return x.copy()
    target = noise.target_band_index
    return x + bandlimited_noise(spec, target, level * band_variance(x, spec, target), seed)
