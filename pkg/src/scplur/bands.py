"""Disjoint frequency-band partitions of the one-sided grid [0, 0.5]."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidPartitionError, ZeroEnergyError
from .spectral import FrequencyGrid, PowerSpectrum

SCHEMES = ("equal_width", "thirds", "custom")
NYQUIST = 0.5

DEFAULT_BAND_COUNT = 8


@dataclass(frozen=True)
class BandPartition:
    """Half-open intervals ``[edges[b], edges[b+1])``; the last one is closed at 0.5."""

    edges: tuple
    labels: tuple
    scheme: str = "custom"

    def __post_init__(self):
        edges = tuple(float(e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        if len(edges) < 2:
            raise InvalidPartitionError("a partition needs at least two edges")
        if edges[0] != 0.0 or edges[-1] != NYQUIST:
            raise InvalidPartitionError(f"edges must run from 0 to 0.5, got {edges[0]} .. {edges[-1]}")
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise InvalidPartitionError(f"edges must be strictly increasing: {edges}")
        if len(self.labels) != len(edges) - 1:
            raise InvalidPartitionError("need exactly one label per band")
        if self.scheme not in SCHEMES:
            raise InvalidPartitionError(f"unknown scheme {self.scheme!r}")

    def __len__(self) -> int:
        return len(self.edges) - 1

    @property
    def bands(self) -> list:
        return list(zip(self.edges[:-1], self.edges[1:]))

    def assign(self, frequencies) -> np.ndarray:
        """Band index of every frequency bin."""
        f = np.asarray(frequencies.frequencies if isinstance(frequencies, FrequencyGrid) else frequencies)
        idx = np.searchsorted(np.asarray(self.edges), f, side="right") - 1
        # Nyquist (and anything at the closed top edge) joins the last band
        return np.clip(idx, 0, len(self) - 1)

    def masks(self, frequencies) -> list:
        idx = self.assign(frequencies)
        return [idx == b for b in range(len(self))]

    def to_dict(self) -> dict:
        return {"scheme": self.scheme, "edges": list(self.edges), "labels": list(self.labels)}

    @classmethod
    def from_dict(cls, d: dict) -> "BandPartition":
        return cls(tuple(d["edges"]), tuple(d["labels"]), d.get("scheme", "custom"))


def band_mask(frequencies, band) -> np.ndarray:
    """Boolean mask of bins inside ``band = (lo, hi)``; ``hi == 0.5`` is inclusive."""
    f = np.asarray(frequencies.frequencies if isinstance(frequencies, FrequencyGrid) else frequencies)
    lo, hi = float(band[0]), float(band[1])
    if not 0.0 <= lo < hi <= NYQUIST:
        raise InvalidPartitionError(f"invalid band [{lo}, {hi})")
    if hi == NYQUIST:
        return (f >= lo) & (f <= hi)
    return (f >= lo) & (f < hi)


def make_partition(
    scheme: str = "equal_width",
    band_count: int = DEFAULT_BAND_COUNT,
    custom_edges: Optional[Sequence[float]] = None,
) -> BandPartition:
    if scheme == "custom":
        if custom_edges is None:
            raise InvalidPartitionError("custom scheme needs explicit edges")
        edges = tuple(float(e) for e in custom_edges)
        return BandPartition(edges, tuple(f"b{i}" for i in range(len(edges) - 1)), "custom")
    if scheme == "thirds":
        band_count = 3
    elif scheme != "equal_width":
        raise InvalidPartitionError(f"unknown scheme {scheme!r}")
    if band_count < 1:
        raise InvalidPartitionError(f"band_count must be >= 1, got {band_count}")
    # i / (2B) keeps every edge a correctly rounded rational, like the grid
    edges = tuple(np.arange(band_count + 1) / (2.0 * band_count))
    labels = ("low", "mid", "high") if scheme == "thirds" else tuple(f"b{i}" for i in range(band_count))
    return BandPartition(edges, labels, scheme)


def parse_edges(text: str) -> list:
    """Parse a comma-separated edge list such as ``"0,0.05,0.2,0.5"``."""
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise InvalidPartitionError(f"cannot parse band edges {text!r}: {exc}") from None


def band_sums(values, frequencies, partition: BandPartition) -> np.ndarray:
    """Sum a per-bin quantity within each band."""
    idx = partition.assign(frequencies)
    return np.bincount(idx, weights=np.asarray(values, dtype=float), minlength=len(partition))


def band_energy_shares(spectrum: PowerSpectrum, partition: BandPartition) -> np.ndarray:
    total = spectrum.total
    if not total > 0:
        raise ZeroEnergyError("spectrum has zero total power")
    return band_sums(spectrum.power, spectrum.grid, partition) / total
