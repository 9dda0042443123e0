import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from harkit.exceptions import ExtractionError, InputError
from harkit.features import (FEATURE_NAMES, REDUCED_DROP, REDUCED_FEATURE_NAMES,
                             X_FEATURE_NAMES, WindowFeatureExtractor, aptd, basic_stats,
                             extract_features, extract_x_features, feature_names_for,
                             kurtosis, mad, minmax_pos_diff, pearson_corr, quarter_means,
                             sma, spectral_energy, spectral_entropy)
from harkit.signal import FilterConfig, SensorWindow

import oracles

series64 = arrays(np.float64, 64, elements=st.floats(-100, 100, allow_nan=False))


class TestBasicStats:
    def test_constant(self):
        assert basic_stats([2.0] * 5) == (2.0, 2.0, 2.0, 0.0, 0.0)

    def test_one_to_four(self):
        lo, mean, hi, var, _ = basic_stats([1, 2, 3, 4])
        assert (lo, mean, hi, var) == (1.0, 2.5, 4.0, 1.25)

    def test_symmetric(self):
        _, mean, _, var, std = basic_stats([-1, 1])
        assert (mean, var, std) == (0.0, 1.0, 1.0)

    def test_empty(self):
        with pytest.raises(InputError):
            basic_stats([])


class TestPearson:
    def test_self(self):
        assert pearson_corr([1, 5, 2, 8], [1, 5, 2, 8]) == pytest.approx(1.0)

    def test_anti(self):
        assert pearson_corr([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_constant(self):
        assert pearson_corr([4, 4, 4], [1, 9, 2]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            pearson_corr([1, 2, 3], [1, 2])

    @given(series64, series64)
    def test_symmetric(self, a, b):
        assert pearson_corr(a, b) == pytest.approx(pearson_corr(b, a), abs=1e-12)


class TestSMA:
    def test_zero(self):
        assert sma(np.zeros((64, 3))) == 0.0

    def test_unit(self):
        assert sma(np.tile([1.0, 0, 0], (64, 1))) == 64.0

    def test_three_four_five(self):
        assert sma(np.tile([3.0, 4, 0], (64, 1))) == 320.0


class TestMAD:
    @pytest.mark.parametrize("x,expected", [([7] * 6, 0.0), ([1, 2, 3, 4, 5], 1.0),
                                            ([1, 1, 1, 100], 0.0)])
    def test_examples(self, x, expected):
        assert mad(x) == expected


class TestAPTD:
    @pytest.mark.parametrize("x,expected", [([3] * 10, 0.0), ([0, 2, 0], 2.0),
                                            ([0, 1, 2, 3], 3.0), ([0, 1, 1, 2], 2.0),
                                            ([0, 2, 2, 0], 2.0), ([5], 0.0)])
    def test_examples(self, x, expected):
        assert aptd(x) == expected

    @given(st.lists(st.integers(-3, 3), min_size=1, max_size=40))
    def test_matches_oracle_on_plateau_heavy_input(self, x):
        assert aptd(x) == pytest.approx(oracles.aptd(x))

    @given(series64)
    def test_negation_invariant(self, x):
        assert aptd(-x) == pytest.approx(aptd(x))


class TestKurtosis:
    def test_constant(self):
        assert kurtosis([1.5] * 10) == 0.0

    def test_alternating(self):
        assert kurtosis([1, -1] * 32) == pytest.approx(-2.0)

    def test_gaussian_sample(self):
        x = np.random.default_rng(0).standard_normal(100_000)
        assert abs(kurtosis(x)) < 0.1


class TestSpectral:
    def test_energy_zero(self):
        assert spectral_energy(np.zeros(64)) == 0.0

    def test_energy_constant(self):
        assert spectral_energy(np.ones(64)) == pytest.approx(4096)
        assert oracles.energy([1.0] * 64) == pytest.approx(4096)

    def test_energy_cosine(self):
        x = np.cos(2 * np.pi * np.arange(64) / 64)
        assert oracles.energy(list(x)) == pytest.approx(4096)
        assert spectral_energy(x) == pytest.approx(4096)

    def test_squared_magnitude_variant(self, rng):
        x = rng.normal(size=64)
        # Parseval: sum |X_k|^2 = N sum x^2
        assert spectral_energy(x, squared_magnitudes=True) == pytest.approx(64 * np.sum(x * x))

    def test_entropy_constant(self):
        assert spectral_entropy(np.full(64, 3.0)) == 0.0

    def test_entropy_zero(self):
        assert spectral_entropy(np.zeros(64)) == 0.0

    def test_entropy_two_equal_bins(self):
        # exp(2 pi i n / 64) has a single bin; its real part has bins 1 and 63 of equal size
        x = np.cos(2 * np.pi * 5 * np.arange(64) / 64)
        assert spectral_entropy(x) == pytest.approx(math.log10(2), abs=1e-9)


class TestQuarterAndPosition:
    def test_constant(self):
        assert quarter_means([2.0] * 64) == [2.0] * 4

    def test_ramp(self):
        assert quarter_means(np.arange(1, 65)) == [8.5, 24.5, 40.5, 56.5]

    def test_indicator(self):
        assert quarter_means([1.0] * 16 + [0.0] * 48) == [1.0, 0.0, 0.0, 0.0]

    def test_indivisible(self):
        with pytest.raises(InputError):
            quarter_means(np.zeros(10))

    @pytest.mark.parametrize("x,expected", [([1, 1, 1], 0), ([0, -1, 5, 0], 1), ([5, 0, -1], -2)])
    def test_minmax_pos_diff(self, x, expected):
        assert minmax_pos_diff(x) == expected


# Scaling covariance table: c > 0 scales the input.
scale = st.floats(0.1, 10)


@given(series64, scale)
def test_mad_scales_linearly(x, c):
    assert mad(c * x) == pytest.approx(c * mad(x), rel=1e-9, abs=1e-9)


@given(arrays(np.float64, (64, 3), elements=st.floats(-100, 100)), scale)
def test_sma_scales_linearly(w, c):
    assert sma(c * w) == pytest.approx(c * sma(w), rel=1e-9, abs=1e-9)


@given(series64, scale)
def test_kurtosis_scale_invariant(x, c):
    if np.ptp(x) < 1e-3:
        return
    assert kurtosis(c * x) == pytest.approx(kurtosis(x), rel=1e-6, abs=1e-6)


@given(series64, scale)
def test_energy_scales_quadratically(x, c):
    assert spectral_energy(c * x) == pytest.approx(c * c * spectral_energy(x), rel=1e-9, abs=1e-6)


class TestNames:
    def test_counts(self):
        assert len(FEATURE_NAMES) == 102 and len(set(FEATURE_NAMES)) == 102
        assert len(REDUCED_DROP) == 9
        assert len(REDUCED_FEATURE_NAMES) == 93
        assert len(X_FEATURE_NAMES) == 72

    def test_feature_set_lookup(self):
        assert feature_names_for("reduced94") == REDUCED_FEATURE_NAMES
        assert feature_names_for("hierarchical") == FEATURE_NAMES + X_FEATURE_NAMES
        with pytest.raises(ValueError):
            feature_names_for("bogus")


class TestExtraction:
    def test_zero_window(self):
        fv = extract_features(SensorWindow(np.zeros((64, 9))))
        assert np.array_equal(fv.values, np.zeros(102))

    def test_components_match_oracle(self, rng):
        block = rng.normal(size=(64, 9)) * [1, 1, 1, 2, 2, 2, 30, 30, 30]
        fv = extract_features(block)
        expected = oracles.window_features(FilterConfig().apply(block).tolist())
        for name in FEATURE_NAMES:
            assert fv[name] == pytest.approx(expected[name], rel=1e-9, abs=1e-9), name

    def test_label_carried(self):
        w = SensorWindow(np.zeros((64, 9)), label="fake_move")
        assert extract_features(w).label == "fake_move"

    def test_non_finite_names_feature(self):
        block = np.zeros((64, 9))
        block[3, 4] = np.inf
        with pytest.raises(ExtractionError, match="gyr-y"):
            extract_features(block)

    def test_x_features(self, rng):
        block = rng.normal(size=(64, 9))
        xf = extract_x_features(block, FilterConfig.raw())
        x = block[:, 0]
        assert xf.amp_range == xf.max - xf.min == x.max() - x.min()
        assert list(xf.quarter_means) == quarter_means(x)
        assert xf.values.shape == (72,)

    def test_x_features_zero(self):
        assert np.array_equal(extract_x_features(np.zeros((64, 9))).values, np.zeros(72))


class TestTransformer:
    def test_transform_matches_extract(self, rng):
        blocks = rng.normal(size=(3, 64, 9))
        out = WindowFeatureExtractor().fit(blocks).transform(blocks)
        assert out.shape == (3, 102)
        assert np.array_equal(out[1], extract_features(blocks[1]).values)

    def test_reduced(self, rng):
        ex = WindowFeatureExtractor(feature_set="reduced94").fit(None)
        assert ex.transform(rng.normal(size=(2, 64, 9))).shape == (2, 93)
        assert tuple(ex.get_feature_names_out()) == REDUCED_FEATURE_NAMES

    def test_hierarchical_width(self, rng):
        ex = WindowFeatureExtractor(feature_set="hierarchical").fit(None)
        assert ex.transform(rng.normal(size=(1, 64, 9))).shape == (1, 174)
