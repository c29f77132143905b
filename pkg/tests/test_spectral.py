import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from scplur.errors import DegenerateSegmentationError, InsufficientLengthError, InvalidConfigError, ShapeError
from scplur.spectral import (
    FrequencyGrid,
    PowerSpectrum,
    WelchConfig,
    coherence,
    make_window,
    welch_cpsd,
    welch_psd,
)

from conftest import oracle_coherence, oracle_psd

RECT = dict(overlap=0, window="rectangular")

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)


class TestWindow:
    def test_rectangular(self):
        assert make_window("rectangular", 4).tolist() == [1.0, 1.0, 1.0, 1.0]

    def test_hann_two(self):
        np.testing.assert_allclose(make_window("hann", 2), [0.0, 1.0], atol=1e-15)

    def test_hann_closed_form(self):
        n = np.arange(8)
        np.testing.assert_allclose(make_window("hann", 8), 0.5 - 0.5 * np.cos(2 * np.pi * n / 8), atol=1e-15)

    @pytest.mark.parametrize("kind", ["hann", "rectangular"])
    def test_weights_in_unit_interval(self, kind):
        w = make_window(kind, 37)
        assert np.all((w >= 0) & (w <= 1))

    @pytest.mark.parametrize("length", [0, 1])
    def test_too_short(self, length):
        with pytest.raises(InvalidConfigError):
            make_window("hann", length)

    def test_unknown_kind(self):
        with pytest.raises(InvalidConfigError):
            make_window("kaiser", 8)


class TestConfig:
    def test_default_for(self):
        cfg = WelchConfig.default_for(96)
        assert (cfg.segment_length, cfg.overlap, cfg.window) == (24, 12, "hann")

    @pytest.mark.parametrize("kwargs", [
        dict(segment_length=1), dict(segment_length=8, overlap=8), dict(segment_length=8, overlap=-1),
        dict(segment_length=8, window="nope"), dict(segment_length=8, epsilon=0.0),
        dict(segment_length=8, detrend="linear"),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidConfigError):
            WelchConfig(**kwargs)

    def test_round_trip(self):
        cfg = WelchConfig(64, 32, "rectangular", 1e-6)
        assert WelchConfig.from_dict(cfg.to_dict()) == cfg

    def test_grid_is_exact_rationals(self):
        g = FrequencyGrid.for_segment(256)
        assert g.bin_count == 129
        assert g.frequencies[16] == 1 / 16 and g.frequencies[-1] == 0.5


class TestPsd:
    def test_zero_series(self):
        p = welch_psd(np.zeros(64), WelchConfig(16, 8))
        assert np.all(p.power == 0)

    def test_too_short(self):
        with pytest.raises(InsufficientLengthError):
            welch_psd(np.ones(10), WelchConfig(16))

    def test_single_segment(self):
        with pytest.raises(DegenerateSegmentationError):
            welch_psd(np.ones(20), WelchConfig(16))

    @settings(max_examples=60, deadline=None)
    @given(arrays(np.float64, st.integers(32, 300), elements=finite),
           st.sampled_from([(16, 8, "hann"), (16, 0, "rectangular"), (10, 3, "hann"), (15, 7, "rectangular")]))
    def test_variance_identity(self, x, cfg):
        x = x - x.mean()
        var = np.mean(x**2)
        p = welch_psd(x, WelchConfig(*cfg))
        if var == 0:
            assert p.total == 0
        else:
            assert abs(p.total - var) <= 1e-9 * var

    def test_white_noise_identity(self, rng):
        x = rng.standard_normal(1000)
        x -= x.mean()
        assert welch_psd(x, WelchConfig(128, 64)).total == pytest.approx(np.var(x), rel=1e-9)

    def test_cosine_single_bin(self):
        L, A, k0 = 32, 2.5, 5
        x = A * np.cos(2 * np.pi * k0 * np.arange(4 * L) / L)
        p = welch_psd(x, WelchConfig(L, **RECT)).power
        assert p[k0] == pytest.approx(A**2 / 2, rel=1e-12)
        np.testing.assert_allclose(np.delete(p, k0), 0, atol=1e-20)
        np.testing.assert_allclose(p, oracle_psd(x, L), rtol=1e-10, atol=1e-24)

    def test_matches_oracle_when_segments_tile(self, rng):
        for L, K in [(8, 3), (15, 4), (32, 2)]:
            x = rng.standard_normal(L * K)
            np.testing.assert_allclose(welch_psd(x, WelchConfig(L, **RECT)).power, oracle_psd(x, L), rtol=1e-10)

    def test_proportional_to_oracle_with_remainder(self, rng):
        # trailing samples are dropped; the variance rescale is one scalar
        x = rng.standard_normal(16 * 3 + 5)
        p = welch_psd(x, WelchConfig(16, **RECT)).power
        o = oracle_psd(x, 16)
        ratio = p / o
        np.testing.assert_allclose(ratio, ratio[0], rtol=1e-10)

    def test_hann_matches_windowed_oracle_up_to_scale(self, rng):
        x = rng.standard_normal(64)
        w = make_window("hann", 16)
        p = welch_psd(x, WelchConfig(16, 0, "hann")).power
        ratio = p / oracle_psd(x, 16, w)
        np.testing.assert_allclose(ratio, ratio[0], rtol=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(arrays(np.float64, 96, elements=st.floats(-10, 10)), st.floats(0.1, 100))
    def test_scale_equivariance(self, x, c):
        cfg = WelchConfig(24, 12)
        base = welch_psd(x, cfg).power
        # roundoff-level bins are compared against the total, not themselves
        floor = 1e-12 * c**2 * np.sum(base)
        np.testing.assert_allclose(welch_psd(c * x, cfg).power, c**2 * base, rtol=1e-12, atol=floor)


class TestCpsd:
    def test_self_is_psd(self, rng):
        a = rng.standard_normal(200)
        cfg = WelchConfig(32, 16)
        s = welch_cpsd(a, a, cfg).value
        np.testing.assert_allclose(s.real, welch_psd(a, cfg).power, rtol=1e-12)
        assert np.max(np.abs(s.imag)) <= 1e-12 * np.max(np.abs(s.real))

    def test_negation(self, rng):
        a = rng.standard_normal(200)
        cfg = WelchConfig(32, 16)
        np.testing.assert_allclose(welch_cpsd(a, -a, cfg).value, -welch_cpsd(a, a, cfg).value, rtol=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            welch_cpsd(np.ones(64), np.ones(63), WelchConfig(16))

    def test_delay_phase_slope(self, rng):
        d, L = 3, 64
        white = rng.standard_normal(8192 + d)
        a = white[d:]
        b = white[:-d]  # b[n] = a[n - d]
        s = welch_cpsd(a, b, WelchConfig(L, L // 2))
        f = s.grid.frequencies
        keep = (f > 0) & (f < 0.5)
        phase = np.unwrap(np.angle(s.value[keep]))
        slope = np.polyfit(f[keep], phase, 1)[0]
        assert slope == pytest.approx(-2 * np.pi * d, rel=0.02)


class TestCoherence:
    def test_self_coherence(self, rng):
        a = rng.standard_normal(256)
        cfg = WelchConfig(32, 16)
        g = coherence(welch_cpsd(a, a, cfg), welch_psd(a, cfg), welch_psd(a, cfg)).gamma_sq
        assert np.all(g > 1 - 1e-6)

    def test_zero_signal(self, rng):
        a = rng.standard_normal(256)
        cfg = WelchConfig(32, 16)
        z = np.zeros(256)
        prof = coherence(welch_cpsd(a, z, cfg), welch_psd(a, cfg), welch_psd(z, cfg))
        assert np.all(prof.gamma_sq == 0)

    def test_grid_mismatch(self, rng):
        a = rng.standard_normal(256)
        s32 = welch_psd(a, WelchConfig(32))
        s16 = welch_psd(a, WelchConfig(16))
        with pytest.raises(ShapeError):
            coherence(welch_cpsd(a, a, WelchConfig(32)), s32, s16)

    def test_explicit_epsilon_validated(self, rng):
        a = rng.standard_normal(64)
        cfg = WelchConfig(16)
        with pytest.raises(InvalidConfigError):
            coherence(welch_cpsd(a, a, cfg), welch_psd(a, cfg), welch_psd(a, cfg), epsilon=-1.0)

    @settings(max_examples=60, deadline=None)
    @given(arrays(np.float64, 64, elements=finite), arrays(np.float64, 64, elements=finite))
    def test_bounds(self, a, b):
        cfg = WelchConfig(16, 8)
        g = coherence(welch_cpsd(a, b, cfg), welch_psd(a, cfg), welch_psd(b, cfg)).gamma_sq
        assert np.all((g >= 0) & (g <= 1))

    def test_matches_oracle(self, rng):
        a, b = rng.standard_normal(128), rng.standard_normal(128)
        b = 0.5 * a + b
        cfg = WelchConfig(16, **RECT)
        g = coherence(welch_cpsd(a, b, cfg), welch_psd(a, cfg), welch_psd(b, cfg)).gamma_sq
        np.testing.assert_allclose(g, oracle_coherence(a, b, 16), rtol=1e-6)

    def test_joint_scale_invariance(self, rng):
        a, b = rng.standard_normal(256), rng.standard_normal(256) + 0.3 * rng.standard_normal(256)
        cfg = WelchConfig(32, 16)

        def gamma(u, v, eps=None):
            return coherence(welch_cpsd(u, v, cfg), welch_psd(u, cfg), welch_psd(v, cfg), eps).gamma_sq

        c = 7.0
        # default epsilon is relative, hence exactly scale-covariant
        np.testing.assert_allclose(gamma(c * a, c * b), gamma(a, b), rtol=1e-12)
        np.testing.assert_allclose(gamma(c * a, c * b, 1e-6 * c**2), gamma(a, b, 1e-6), rtol=1e-12)
        np.testing.assert_allclose(gamma(c * a, c * b, 1e-12), gamma(a, b, 1e-12), rtol=1e-6)

    @pytest.mark.parametrize("K", [4, 8])
    def test_white_noise_bias(self, K):
        rng = np.random.default_rng(K)
        L = 32
        cfg = WelchConfig(L, **RECT)
        vals = []
        for _ in range(300):
            a, b = rng.standard_normal(K * L), rng.standard_normal(K * L)
            vals.append(coherence(welch_cpsd(a, b, cfg), welch_psd(a, cfg), welch_psd(b, cfg)).gamma_sq.mean())
        assert np.mean(vals) == pytest.approx(1 / K, rel=0.1)


def test_power_spectrum_round_trip(rng):
    p = welch_psd(rng.standard_normal(64), WelchConfig(16, 8))
    q = PowerSpectrum.from_dict(p.to_dict())
    assert q.grid == p.grid and np.array_equal(q.power, p.power)
