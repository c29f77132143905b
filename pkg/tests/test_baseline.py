import numpy as np
import pytest

from scplur.baseline import FirFilter, apply_fir, fit_fir, one_step_pairs, predict_fir
from scplur.errors import InsufficientLengthError, InvalidConfigError, ShapeError, SingularSystemError
from scplur.evaluation import toy_triples
from scplur.scp import SegmentPair, compute_scp
from scplur.evaluation import TOY_WELCH
from scplur.synth import MultibandSpec, NoiseSpec


def test_recovers_known_filter(rng):
    true = rng.standard_normal(8)
    u = rng.standard_normal(4000)
    v = np.convolve(u, true)[: len(u)]
    w = fit_fir([(u, v)], 16, 1e-6).coefficients
    assert np.max(np.abs(w[:8] - true)) <= 1e-3
    assert np.max(np.abs(w[8:])) <= 1e-3


def test_independent_target_shrinks(rng):
    u, v = rng.standard_normal(10_000), rng.standard_normal(10_000)
    assert np.max(np.abs(fit_fir([(u, v)], 16).coefficients)) <= 0.05


def test_huge_ridge(rng):
    u = rng.standard_normal(500)
    assert np.linalg.norm(fit_fir([(u, u)], 8, 1e9).coefficients) <= 1e-6


def test_ridge_monotone(rng):
    u = rng.standard_normal(300)
    v = np.roll(u, 1) + 0.1 * rng.standard_normal(300)
    norms = [np.linalg.norm(fit_fir([(u, v)], 16, r).coefficients) for r in (0.0, 1e-3, 1.0, 10.0, 1e3)]
    assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))


def test_singular_without_ridge():
    u = np.ones(200)
    with pytest.raises(SingularSystemError):
        fit_fir([(u, u)], 8, 0.0)


def test_insufficient_rows():
    with pytest.raises(InsufficientLengthError):
        fit_fir([(np.ones(10), np.ones(10))], 8)


def test_bad_arguments():
    with pytest.raises(InvalidConfigError):
        fit_fir([], 0)
    with pytest.raises(InvalidConfigError):
        fit_fir([], 4, -1.0)
    with pytest.raises(ShapeError):
        fit_fir([(np.ones(10), np.ones(9))], 4)
    with pytest.raises(ShapeError):
        FirFilter(np.array([np.inf]))


def test_pooled_pairs_equal_concatenated_rows(rng):
    a, b = rng.standard_normal(100), rng.standard_normal(120)
    pairs = one_step_pairs(a) + one_step_pairs(b)
    w = fit_fir(pairs, 4).coefficients
    # explicit design matrix oracle
    rows, targets = [], []
    for s in (a, b):
        for t in range(4, len(s)):
            rows.append(s[t - 4:t][::-1])
            targets.append(s[t])
    X, y = np.array(rows), np.array(targets)
    ref = np.linalg.solve(X.T @ X + 1e-6 * np.eye(4), X.T @ y)
    np.testing.assert_allclose(w, ref, rtol=1e-9)


def test_identity_filter_constant_continuation():
    out = predict_fir(FirFilter(np.array([1.0, 0.0, 0.0])), np.array([3.0, 1.0, 4.0, 1.5]))
    assert out.tolist() == [1.5] * 4


def test_zero_filter():
    assert np.all(predict_fir(FirFilter(np.zeros(5)), np.arange(6.0)) == 0)


def test_ar2_rollout():
    w = np.array([1.5, -0.7])
    h = np.array([0.0, 0.0, 1.0, 2.0])
    out = predict_fir(FirFilter(w), h, 3)
    assert out[0] == pytest.approx(1.5 * 2 - 0.7 * 1)
    assert out[1] == pytest.approx(1.5 * out[0] - 0.7 * 2)
    assert out[2] == pytest.approx(1.5 * out[1] - 0.7 * out[0])


def test_short_history_zero_padded():
    out = predict_fir(FirFilter(np.array([0.5, 0.5, 0.5])), np.array([2.0]), 2)
    assert out.tolist() == [1.0, 1.5]


def test_causality(rng):
    s = rng.standard_normal(300)
    filt = fit_fir(one_step_pairs(s[:200]), 16)
    a = predict_fir(filt, s[:200], 50)
    t = s.copy()
    t[200:] = rng.standard_normal(100)  # perturb the ground truth after the boundary
    assert np.array_equal(a, predict_fir(filt, t[:200], 50))


def test_apply_fir_matches_loop(rng):
    w = rng.standard_normal(4)
    u, warm = rng.standard_normal(20), rng.standard_normal(10)
    out = apply_fir(FirFilter(w), u, warm)
    full = np.concatenate([warm, u])
    ref = [sum(w[l] * full[10 + t - l] for l in range(4)) for t in range(20)]
    np.testing.assert_allclose(out, ref, rtol=1e-12)


@pytest.mark.xfail(strict=True, reason=(
    "at noise 0 the recursive rollout's MSE is about 1.5x mse_lb on the toy study; the bound is loose "
    "because history/future coherence sits near its bias floor; see the decisions ledger"))
def test_toy_fir_mse_near_bound():
    mse, lb = [], []
    for t in toy_triples(MultibandSpec(), NoiseSpec(), 0.0):
        mse.append(np.mean((t.y_hat - t.y) ** 2))
        lb.append(compute_scp(SegmentPair(t.x, t.y), TOY_WELCH).mse_lb)
    assert np.mean(mse) <= 1.2 * np.mean(lb)
