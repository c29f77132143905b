"""Spectral coherence predictability (SCP) and linear utilization ratio (LUR)."""

__version__ = "0.1.0"

from .bands import BandPartition, band_energy_shares, band_mask, make_partition
from .baseline import FirFilter, apply_fir, fit_fir, one_step_pairs, predict_fir
from .errors import ScplurError
from .lur import LurReport, PredictionTriple, Utilization, classify_band, compute_lur
from .scp import ScpReport, SegmentPair, compute_scp, scp_batch
from .spectral import (
    CoherenceProfile,
    CrossSpectrum,
    FrequencyGrid,
    PowerSpectrum,
    WelchConfig,
    coherence,
    make_window,
    welch_cpsd,
    welch_psd,
)
from .synth import MultibandSpec, NoiseSpec, add_bandlimited_noise, generate_multiband_gp

__all__ = [
    "BandPartition", "CoherenceProfile", "CrossSpectrum", "FirFilter", "FrequencyGrid", "LurReport",
    "MultibandSpec", "NoiseSpec", "PowerSpectrum", "PredictionTriple", "ScpReport", "ScplurError",
    "SegmentPair", "Utilization", "WelchConfig", "add_bandlimited_noise", "apply_fir", "band_energy_shares",
    "band_mask", "classify_band", "coherence", "compute_lur", "compute_scp", "fit_fir",
    "generate_multiband_gp", "make_partition", "make_window", "one_step_pairs", "predict_fir", "scp_batch",
    "welch_cpsd", "welch_psd",
]
