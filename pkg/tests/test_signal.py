import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from harkit.exceptions import ConfigurationError, InputError
from harkit.signal import (FilterConfig, SensorSample, SensorWindow, fft, fft_magnitudes,
                           highpass, lowpass_gravity, magnitude, make_windows, smooth,
                           window_starts)

import oracles


class TestWindows:
    def test_exact_fit(self):
        assert len(make_windows(np.zeros((64, 9)))) == 1

    def test_too_short(self):
        assert make_windows(np.zeros((63, 9))) == []

    def test_half_overlap_starts(self):
        assert window_starts(96) == [0, 32]
        ws = make_windows(np.arange(96 * 9, dtype=float).reshape(96, 9))
        assert [int(w.data[0, 0]) // 9 for w in ws] == [0, 32]

    def test_samples_input(self):
        samples = [SensorSample.from_array(20 * i, np.full(9, i)) for i in range(64)]
        (w,) = make_windows(samples, label="staying")
        assert w.label == "staying"
        assert w.end_ms == 63 * 20

    def test_no_overlap(self):
        assert window_starts(200, 64, 0.0) == [0, 64, 128]

    @pytest.mark.parametrize("size,overlap", [(63, 0.5), (64, 0.25)])
    def test_rejects_bad_geometry(self, size, overlap):
        with pytest.raises(ConfigurationError):
            window_starts(128, size, overlap)

    def test_window_shape_guard(self):
        with pytest.raises(InputError):
            SensorWindow(np.zeros((63, 9)))


class TestLowpass:
    def test_alpha_zero_is_identity(self):
        g, lin = lowpass_gravity([1.0, -2.0, 5.0], 0.0)
        assert np.array_equal(g, [1.0, -2.0, 5.0])
        assert np.array_equal(lin, np.zeros(3))

    def test_constant_fixed_point(self):
        g, lin = lowpass_gravity(np.full(10, 9.81), 0.8, g0=9.81)
        assert np.allclose(lin, 0.0, atol=1e-15)

    def test_hand_recurrence(self):
        g, lin = lowpass_gravity([0.0, 1.0], 0.8, g0=0.0)
        assert np.allclose(g, [0.0, 0.2])
        assert np.allclose(lin, [0.0, 0.8])

    def test_matches_oracle(self, rng):
        x = rng.normal(size=64)
        g, _ = lowpass_gravity(x, 0.8, g0=0.3)
        assert np.allclose(g, oracles.lowpass(list(x), 0.8, 0.3), rtol=0, atol=1e-12)

    def test_default_seed_is_first_sample(self):
        g, _ = lowpass_gravity([4.0, 4.0, 4.0], 0.8)
        assert np.array_equal(g, [4.0, 4.0, 4.0])

    def test_alpha_out_of_range(self):
        with pytest.raises(ConfigurationError):
            lowpass_gravity([1.0], 1.5)


class TestHighpass:
    def test_constant(self):
        assert np.allclose(highpass(np.full(8, 3.0), 0.8, g0=3.0), 0.0)

    def test_alpha_zero(self):
        assert np.array_equal(highpass([1.0, 2.0, 3.0], 0.0), np.zeros(3))

    def test_hand_value(self):
        assert np.allclose(highpass([0.0, 1.0], 0.8, g0=0.0), [0.0, 0.8])


class TestSmooth:
    @pytest.mark.parametrize("kind", ["median", "mean"])
    def test_constant(self, kind):
        assert np.allclose(smooth(np.full(20, 2.5), kind, 11), 2.5)

    def test_median_edge_replication(self):
        assert np.array_equal(smooth([0.0, 10.0, 0.0], "median", 3), [0.0, 0.0, 0.0])

    def test_mean_edge_replication(self):
        assert np.allclose(smooth([0.0, 10.0, 0.0], "mean", 3), [10 / 3] * 3)

    @pytest.mark.parametrize("kernel", [0, 2, 4, 1.5])
    def test_bad_kernel(self, kernel):
        with pytest.raises(ConfigurationError):
            smooth(np.zeros(10), "median", kernel)

    def test_kernel_longer_than_series(self):
        with pytest.raises(ConfigurationError):
            smooth(np.zeros(5), "mean", 7)

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            smooth(np.zeros(5), "gauss", 3)


class TestMagnitude:
    @pytest.mark.parametrize("v,expected", [((0, 0, 0), 0.0), ((3, 4, 0), 5.0), ((1, 2, 2), 3.0)])
    def test_examples(self, v, expected):
        assert magnitude(*v) == expected

    @given(st.tuples(*[st.floats(-1e3, 1e3)] * 3), st.permutations([0, 1, 2]))
    def test_permutation_and_sign_invariance(self, v, perm):
        p = [v[i] for i in perm]
        assert magnitude(*p) == pytest.approx(magnitude(*v))
        assert magnitude(-v[0], v[1], -v[2]) == pytest.approx(magnitude(*v))

    @given(st.tuples(*[st.floats(-1e3, 1e3)] * 3), st.floats(0.01, 100))
    def test_scaling(self, v, c):
        assert magnitude(*(c * x for x in v)) == pytest.approx(c * magnitude(*v), rel=1e-9, abs=1e-9)


class TestFFT:
    def test_impulse_flat(self):
        x = np.zeros(64)
        x[0] = 1
        assert np.allclose(fft_magnitudes(x), 1.0)

    def test_constant_dc(self):
        mags = fft_magnitudes(np.ones(64))
        assert mags[0] == pytest.approx(64)
        assert np.allclose(mags[1:], 0.0, atol=1e-12)

    def test_matches_naive_dft(self, rng):
        x = rng.normal(size=64)
        assert np.allclose(fft(x), oracles.naive_dft(list(x)), rtol=0, atol=1e-9)

    @pytest.mark.parametrize("n", [1, 2, 8, 128])
    def test_other_powers_of_two(self, n, rng):
        x = rng.normal(size=n)
        assert np.allclose(fft(x), oracles.naive_dft(list(x)), atol=1e-9)

    def test_batched(self, rng):
        x = rng.normal(size=(3, 64))
        assert np.allclose(fft(x), np.stack([fft(r) for r in x]))

    def test_non_power_of_two(self):
        with pytest.raises(ConfigurationError):
            fft(np.zeros(48))


class TestFilterConfig:
    def test_defaults(self):
        f = FilterConfig()
        assert (f.gravity_alpha, f.highpass_alpha, f.smoothing_kind, f.kernel_size) == (0.8, None, "none", 11)

    def test_raw_is_identity(self, rng):
        d = rng.normal(size=(64, 9))
        assert np.array_equal(FilterConfig.raw().apply(d), d)

    def test_gravity_only_touches_accelerometer(self, rng):
        d = rng.normal(size=(64, 9))
        out = FilterConfig().apply(d)
        assert np.array_equal(out[:, 3:], d[:, 3:])
        assert np.allclose(out[:, 0], lowpass_gravity(d[:, 0], 0.8)[1])

    def test_highpass_on_gyro_and_mag(self, rng):
        d = rng.normal(size=(64, 9))
        out = FilterConfig(gravity_alpha=None, highpass_alpha=0.5).apply(d)
        assert np.array_equal(out[:, :3], d[:, :3])
        assert np.allclose(out[:, 7], highpass(d[:, 7], 0.5))

    def test_smoothing_after_gravity(self, rng):
        d = rng.normal(size=(64, 9))
        out = FilterConfig(smoothing_kind="median", kernel_size=5).apply(d)
        assert np.allclose(out[:, 0], smooth(lowpass_gravity(d[:, 0], 0.8)[1], "median", 5))

    @pytest.mark.parametrize("kw", [{"kernel_size": 4}, {"smoothing_kind": "box"},
                                    {"gravity_alpha": 2.0}])
    def test_invalid(self, kw):
        with pytest.raises(ConfigurationError):
            FilterConfig(**kw)
