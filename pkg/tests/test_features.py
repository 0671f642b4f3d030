import math

import numpy as np
import pytest

import oracles
from rfmap import (
    CooccurrenceMatrix,
    FeatureVector,
    GLCM_FEATURES,
    GLRLM_FEATURES,
    FEATURE_NAMES,
    QuantizedPatch,
    RunLengthMatrix,
    feature_vector,
    glcm_accumulate,
    glcm_features,
    glrlm_accumulate,
    glrlm_features,
    quantize,
)

TOL = dict(rtol=1e-12, atol=1e-12)


def rand_patch(seed, h, w, ng):
    rng = np.random.default_rng(seed)
    return QuantizedPatch(rng.integers(0, ng, size=(h, w)), ng)


class TestQuantize:
    def test_full_range_32_levels(self):
        img = np.arange(256, dtype=np.uint8).reshape(16, 16)
        q = quantize(img, ng=32)
        assert np.array_equal(q.levels, (np.arange(256) // 8).reshape(16, 16))
        assert q.levels.max() == 31

    def test_two_levels_split_point(self):
        img = np.array([[0, 127], [128, 255]], dtype=np.uint8)
        q = quantize(img, ng=2)
        assert q.levels.tolist() == [[0, 0], [1, 1]]

    def test_constant_maps_to_zero(self):
        img = np.full((4, 4), 77, dtype=np.uint8)
        q = quantize(img, ng=32)
        assert not q.levels.any()

    def test_explicit_range(self):
        img = np.array([[10, 20, 30]], dtype=np.uint8)
        q = quantize(img, ng=4, lo=10, hi=30)
        # bucket width (30-10+1)/4 = 5.25
        assert q.levels.tolist() == [[0, 1, 3]]

    def test_monotone_non_decreasing(self):
        img = np.arange(256, dtype=np.uint8).reshape(1, 256)
        q = quantize(img, ng=7)
        assert (np.diff(q.levels[0]) >= 0).all()
        assert q.levels.min() == 0 and q.levels.max() == 6

    def test_levels_are_read_only(self):
        q = quantize(np.zeros((3, 3), dtype=np.uint8), ng=8)
        with pytest.raises(ValueError):
            q.levels[0, 0] = 1


class TestGlcmCounts:
    def test_constant_2x2(self):
        patch = QuantizedPatch(np.full((2, 2), 3), 8)
        m = glcm_accumulate(patch)
        expect = np.zeros((8, 8), dtype=np.int64)
        expect[3, 3] = 12
        assert np.array_equal(m.counts, expect)
        assert m.total == 12

    def test_single_horizontal_pair(self):
        m = glcm_accumulate(QuantizedPatch(np.array([[0, 1]]), 2))
        assert m.counts[0, 1] == 1 and m.counts[1, 0] == 1
        assert m.total == 2

    def test_single_pixel_has_no_pairs(self):
        with pytest.raises(ValueError, match="no pairs"):
            glcm_accumulate(QuantizedPatch(np.array([[0]]), 2))

    @pytest.mark.parametrize("k", [3, 5, 13])
    def test_square_window_pair_total(self, k):
        m = glcm_accumulate(rand_patch(k, k, k, 8))
        assert m.total == 4 * (k - 1) * (2 * k - 1)

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_pair_enumeration(self, seed):
        rng = np.random.default_rng(seed)
        h, w = rng.integers(2, 9, size=2)
        patch = rand_patch(seed + 100, h, w, 6)
        m = glcm_accumulate(patch)
        pairs = oracles.enumerate_pairs(patch.levels)
        expect = np.zeros((6, 6), dtype=np.int64)
        for (a, b), c in pairs.items():
            expect[a, b] = c
        assert np.array_equal(m.counts, expect)

    def test_symmetry(self):
        m = glcm_accumulate(rand_patch(7, 9, 9, 8))
        assert np.array_equal(m.counts, m.counts.T)


class TestGlcmFeatures:
    def test_single_cell_degenerate(self):
        counts = np.zeros((8, 8), dtype=np.int64)
        counts[2, 2] = 40
        f = glcm_features(CooccurrenceMatrix(counts, 8))
        assert f["Energy"] == 1.0
        assert f["Entropy"] == 0.0
        assert f["Contrast"] == 0.0
        assert f["MaximumProbability"] == 1.0
        assert f["Correlation"] == 1.0
        assert f["Imc1"] == 0.0
        assert f["Autocorrelation"] == 9.0  # level 2 weighs as 3

    def test_uniform_mass_entropy_is_log2_of_cells(self):
        counts = np.zeros((8, 8), dtype=np.int64)
        for i, j in ((0, 1), (1, 0), (4, 6), (6, 4)):
            counts[i, j] = 5
        f = glcm_features(CooccurrenceMatrix(counts, 8))
        assert f["Entropy"] == pytest.approx(2.0, abs=1e-12)
        assert f["Energy"] == pytest.approx(0.25, abs=1e-12)

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_direct_formulas(self, seed):
        patch = rand_patch(seed + 30, 7, 7, 8)
        f = glcm_features(glcm_accumulate(patch))
        ref = oracles.glcm_features_direct(oracles.enumerate_pairs(patch.levels), 8)
        for name in GLCM_FEATURES:
            assert np.isclose(f[name], ref[name], **TOL), name

    def test_transpose_invariance(self):
        patch = rand_patch(55, 6, 9, 8)
        f1 = glcm_features(glcm_accumulate(patch))
        f2 = glcm_features(glcm_accumulate(QuantizedPatch(patch.levels.T, 8)))
        for name in GLCM_FEATURES:
            assert np.isclose(f1[name], f2[name], **TOL), name

    def test_value_ranges(self):
        for seed in range(4):
            f = glcm_features(glcm_accumulate(rand_patch(seed, 8, 8, 8)))
            assert 0 < f["Energy"] <= 1
            assert 0 < f["MaximumProbability"] <= 1
            assert f["Entropy"] >= 0
            assert f["SumEntropy"] >= 0
            assert f["DifferenceEntropy"] >= 0
            assert -1 <= f["Correlation"] <= 1
            assert f["Imc1"] <= 0
            assert 0 <= f["Imc2"] < 1


class TestGlrlmCounts:
    def test_row_of_four(self):
        patch = QuantizedPatch(np.full((1, 4), 5), 8)
        m = glrlm_accumulate(patch)
        expect = np.zeros((8, 4), dtype=np.int64)
        expect[5, 3] = 1   # one horizontal run of length 4
        expect[5, 0] = 12  # vertical and both diagonals: all singletons
        assert np.array_equal(m.counts, expect)
        assert m.nruns == 13
        assert (m.counts * np.arange(1, 5)).sum() == 4 * patch.levels.size

    def test_constant_2x2(self):
        m = glrlm_accumulate(QuantizedPatch(np.full((2, 2), 1), 4))
        # two runs of 2 each for rows and columns, one of 2 plus two
        # singletons per diagonal direction
        assert m.counts[1, 1] == 6
        assert m.counts[1, 0] == 4
        assert m.nruns == 10

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_run_enumeration(self, seed):
        rng = np.random.default_rng(seed + 500)
        h, w = rng.integers(1, 9, size=2)
        patch = rand_patch(seed + 200, h, w, 5)
        m = glrlm_accumulate(patch)
        expect = np.zeros((5, max(h, w)), dtype=np.int64)
        for lvl, length in oracles.enumerate_runs(patch.levels):
            expect[lvl, length - 1] += 1
        assert np.array_equal(m.counts, expect)

    @pytest.mark.parametrize("seed", range(4))
    def test_pixel_conservation(self, seed):
        patch = rand_patch(seed + 300, 10, 7, 4)
        m = glrlm_accumulate(patch)
        j = np.arange(1, m.rmax + 1)
        assert (m.counts * j).sum() == 4 * patch.levels.size


class TestGlrlmFeatures:
    def test_single_unit_run(self):
        counts = np.zeros((4, 6), dtype=np.int64)
        counts[2, 0] = 1
        f = glrlm_features(RunLengthMatrix(counts, 4, 6, 1))
        assert f["ShortRunEmphasis"] == 1.0
        assert f["LongRunEmphasis"] == 1.0
        assert f["RunPercentage"] == 1.0
        assert f["RunEntropy"] == 0.0

    def test_single_run_of_length_four(self):
        counts = np.zeros((8, 4), dtype=np.int64)
        counts[5, 3] = 1
        f = glrlm_features(RunLengthMatrix(counts, 8, 4, 4))
        assert f["ShortRunEmphasis"] == 0.0625
        assert f["LongRunEmphasis"] == 16.0
        assert f["RunPercentage"] == 0.25

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_direct_formulas(self, seed):
        patch = rand_patch(seed + 400, 8, 8, 5)
        f = glrlm_features(glrlm_accumulate(patch))
        ref = oracles.glrlm_features_direct(
            oracles.enumerate_runs(patch.levels), patch.levels.size
        )
        for name in GLRLM_FEATURES:
            assert np.isclose(f[name], ref[name], **TOL), name

    def test_length_features_ignore_level_relabel(self):
        patch = rand_patch(77, 8, 8, 4)
        shifted = QuantizedPatch(patch.levels * 2 + 1, 9)
        f1 = glrlm_features(glrlm_accumulate(patch))
        f2 = glrlm_features(glrlm_accumulate(shifted))
        for name in (
            "ShortRunEmphasis",
            "LongRunEmphasis",
            "RunLengthNonUniformity",
            "RunLengthNonUniformityNormalized",
            "RunPercentage",
            "RunEntropy",
        ):
            assert np.isclose(f1[name], f2[name], **TOL), name

    def test_value_ranges(self):
        for seed in range(4):
            f = glrlm_features(glrlm_accumulate(rand_patch(seed + 20, 9, 9, 5)))
            assert 0 < f["ShortRunEmphasis"] <= 1
            assert f["LongRunEmphasis"] >= 1
            assert 0 < f["RunPercentage"] <= 1
            assert f["RunEntropy"] >= 0


class TestFeatureVector:
    def test_canonical_order(self):
        fv = feature_vector(rand_patch(1, 8, 8, 8))
        assert isinstance(fv, FeatureVector)
        assert tuple(fv.glcm) == GLCM_FEATURES
        assert tuple(fv.glrlm) == GLRLM_FEATURES
        arr = fv.as_array()
        assert arr.shape == (37,)
        for i, name in enumerate(FEATURE_NAMES):
            assert arr[i] == fv[name]

    def test_all_finite_on_degenerates(self):
        cases = [
            QuantizedPatch(np.zeros((2, 2), dtype=np.int64), 32),
            QuantizedPatch(np.array([[0, 1], [1, 0]]), 2),
            QuantizedPatch(np.arange(4).reshape(2, 2), 4),
        ]
        for patch in cases:
            arr = feature_vector(patch).as_array()
            assert np.isfinite(arr).all()
