"""Acceptance suite: one test per primary criterion.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per
criterion is printed in the terminal summary.  The dataset-dependent check
runs only when ``SCPLUR_ETTH1`` points at ETTh1.csv.
"""

import os
import time

import numpy as np
import pytest

from scplur.bands import band_energy_shares, make_partition
from scplur.evaluation import (
    drift_profile,
    run_toy_study,
    stratify_by_p,
    crossover_bins,
    toy_band_lur,
    top_energy_bands,
)
from scplur.lur import PredictionTriple, compute_lur
from scplur.scp import SegmentPair, compute_scp
from scplur.spectral import WelchConfig, coherence, welch_cpsd, welch_psd

from conftest import oracle_psd, smooth_series
from helpers import crossover_records, spliced_channel

crit = pytest.mark.criterion


@pytest.fixture(scope="module")
def toy():
    start = time.perf_counter()
    result = run_toy_study()
    return result, time.perf_counter() - start


@crit("toy-study monotonicity")
def test_toy_monotonicity(toy):
    result, elapsed = toy
    p = result.column("p")
    print("noise levels", result.column("noise_level").tolist())
    print("mean P      ", np.round(p, 4).tolist())
    assert result.column("noise_level").tolist() == [0.0, 0.25, 0.5, 1.0, 2.0, 4.0]
    assert np.max(np.diff(p)) <= 0.01, f"adjacent increase {np.max(np.diff(p)):.4f} exceeds 0.01"
    assert elapsed < 30.0


@crit("bound validity")
def test_bound_validity(toy):
    result, _ = toy
    ratio = result.column("mse_lb") / result.column("model_mse")
    print("mse_lb / MSE", np.round(ratio, 3).tolist())
    assert np.all(ratio <= 1.05)
    assert ratio[0] >= 0.5


@crit("self-predictability")
def test_self_predictability():
    rng = np.random.default_rng(101)
    worst = 1.0
    for _ in range(1000):
        x = smooth_series(rng, 96, cutoff=rng.uniform(0.05, 0.3))
        worst = min(worst, compute_scp(SegmentPair(x, x)).p)
    print("min P", worst)
    assert worst >= 0.99


@crit("normalization identity")
def test_normalization_identity():
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(64, 1024))
        y = rng.standard_normal(n) * rng.uniform(1e-3, 1e3) + rng.uniform(-100, 100)
        y = y - y.mean()
        seg = int(rng.integers(8, n // 2 + 1))
        cfg = WelchConfig(seg, int(rng.integers(0, seg)), str(rng.choice(["hann", "rectangular"])))
        var = np.mean(y**2)
        worst = max(worst, abs(welch_psd(y, cfg).total - var) / var)
    print("max relative error", worst)
    assert worst <= 1e-9


@crit("oracle equivalence")
def test_oracle_equivalence():
    rng = np.random.default_rng(103)
    worst = 0.0
    for _ in range(100):
        L = int(rng.integers(4, 64))
        K = int(rng.integers(2, 9))
        x = rng.standard_normal(L * K)
        got = welch_psd(x, WelchConfig(L, 0, "rectangular")).power
        ref = oracle_psd(x, L)
        worst = max(worst, np.max(np.abs(got - ref)) / np.max(ref))
    print("max relative deviation", worst)
    assert worst <= 1e-10


@crit("coherence bias")
@pytest.mark.parametrize("K", [4, 8])
def test_coherence_bias(K):
    rng = np.random.default_rng(104 + K)
    L = 32
    cfg = WelchConfig(L, 0, "rectangular")
    means = []
    for _ in range(1000):
        a, b = rng.standard_normal(K * L), rng.standard_normal(K * L)
        g = coherence(welch_cpsd(a, b, cfg), welch_psd(a, cfg), welch_psd(b, cfg)).gamma_sq
        means.append(g.mean())
    print(f"K={K} mean gamma^2 {np.mean(means):.4f} vs 1/K {1 / K:.4f}")
    assert abs(np.mean(means) - 1 / K) <= 0.1 / K


@crit("band additivity")
def test_band_additivity():
    rng = np.random.default_rng(105)
    for count in (1, 3, 8):
        part = make_partition("equal_width", count)
        for _ in range(50):
            x = smooth_series(rng, 192, 0.35) + rng.uniform(-1, 1)
            y = 0.6 * x + rng.standard_normal(192) + rng.uniform(-1, 1)
            r = compute_scp(SegmentPair(x, y), partition=part)
            total = sum(b.mse_lb for b in r.band_breakdown) + r.delta_sq
            assert abs(total - r.mse_lb) <= 1e-9 * r.mse_lb
            yc = y - y.mean()
            shares = band_energy_shares(welch_psd(yc, r.config), part)
            assert abs(shares.sum() - 1.0) <= 1e-9


@crit("LUR extremes")
def test_lur_extremes():
    rng = np.random.default_rng(106)
    for _ in range(20):
        x = smooth_series(rng, 192, 0.3)
        y = 0.7 * x + 0.5 * rng.standard_normal(192)
        assert compute_lur(PredictionTriple(x, y, y)).lur >= 1
        assert compute_lur(PredictionTriple(x, y, np.full(192, 1.5))).lur == 0
    summary = toy_band_lur()
    top = top_energy_bands(summary, "fir_recursive", 2)
    for row in top:
        print(f"band {row.label} share {row.energy_share:.3f} mean LUR {row.mean_lur:.3f} -> {row.classification}")
    assert [row.classification for row in top] == ["saturating", "saturating"]


@crit("stratification consistency")
def test_stratification_consistency():
    rep = stratify_by_p(crossover_records(), 10, 20)
    for j, model in enumerate(rep.models):
        assert abs(rep.reweighted_mean(model) - rep.global_mean[j]) <= 1e-9 * rep.global_mean[j]
    ga, gb = rep.global_mean
    print("global means", ga, gb, "crossover at", crossover_bins(rep, "A", "B"))
    assert abs(ga - gb) / max(ga, gb) < 0.01
    assert crossover_bins(rep, "A", "B") == [pytest.approx(0.3)]
    assert np.all(rep.column("A")[:3] < rep.column("B")[:3])
    assert np.all(rep.column("A")[3:] > rep.column("B")[3:])


@crit("drift detection")
def test_drift_detection():
    pairs, clean, noise = spliced_channel()
    eta = drift_profile(pairs).eta_linear
    pre, post = eta[clean], eta[noise]
    print(f"clean regime {pre.mean():.3f}, noise regime {post.mean():.3f}")
    assert pre.mean() - post.mean() >= 0.3
    assert np.max(np.abs(pre - pre.mean())) <= 0.1
    assert np.max(np.abs(post - post.mean())) <= 0.1


@crit("ETTh1 reference values (dataset-dependent)")
def test_table1_etth1():
    path = os.environ.get("SCPLUR_ETTH1")
    if not path or not os.path.exists(path):
        pytest.skip("set SCPLUR_ETTH1 to ETTh1.csv to run the dataset-dependent check")
    from scplur.io import load_csv, windowize
    from scplur.scp import scp_batch
    from scplur.evaluation import aggregate_scp

    table = load_csv(path, standardize=True)
    pairs = [p for ps in windowize(table, 96).values() for p in ps]
    agg = aggregate_scp(scp_batch(pairs))
    print(f"mean mse_lb {agg.mean_mse_lb:.3f}, mean P {agg.mean_p:.3f}")
    assert abs(agg.mean_mse_lb - 0.354) <= 0.05
    assert abs(agg.mean_p - 0.422) <= 0.05


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
