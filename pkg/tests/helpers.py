"""Synthetic constructions shared by unit and acceptance tests."""

import numpy as np

from scplur.evaluation import InstanceRecord
from scplur.scp import SegmentPair


def crossover_records(n=4000, split=0.3, gap=0.1, seed=0):
    """Two models over uniform P: A beats B by ``gap`` below ``split`` and loses above.

    B's penalty above the split is chosen so both models have the same
    expected global mean.
    """
    rng = np.random.default_rng(seed)
    p = (np.arange(n) + rng.uniform(size=n)) / n
    base = 1.0 - p + 0.05 * rng.standard_normal(n) ** 2
    penalty = gap * split / (1 - split)
    a = np.where(p < split, base - gap, base + penalty) + 0.2
    b = base + 0.2
    return [InstanceRecord("c", i, float(p[i]), 0.0, 1.0, {"A": float(a[i]), "B": float(b[i])}) for i in range(n)]


def spliced_channel(seed=0, regime=1200, history=192, stride=48):
    """High-SNR two-tone regime followed by pure white noise, cut into pairs.

    Returns ``(pairs, clean_mask, noise_mask)``; instances whose window
    straddles the splice belong to neither mask.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(regime)
    tones = np.sin(2 * np.pi * t / 24) + 0.6 * np.sin(2 * np.pi * t / 8 + 1) + 0.05 * rng.standard_normal(regime)
    s = np.concatenate([tones, rng.standard_normal(regime)])
    starts = np.arange(0, len(s) - 2 * history + 1, stride)
    pairs = [SegmentPair(s[i:i + history], s[i + history:i + 2 * history], "spliced", int(i)) for i in starts]
    return pairs, starts + 2 * history <= regime, starts >= regime
