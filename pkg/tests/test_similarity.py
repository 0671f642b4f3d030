import numpy as np
import pytest

import oracles
from rfmap import (
    FEATURE_NAMES,
    FloatMap,
    GrayImage,
    RfmConfig,
    extract_maps,
    normalized_mi,
    pearson_cc,
    rank_rfms,
    similarity_score,
    sm_cc_matrix,
)

TOL = dict(rtol=1e-12, atol=1e-12)


def rand_map(seed, h=12, w=12):
    rng = np.random.default_rng(seed)
    return FloatMap(rng.standard_normal((h, w)))


class TestPearson:
    def test_self_correlation_is_exactly_one(self):
        for seed in range(10):
            m = rand_map(seed)
            assert pearson_cc(m, m) == 1.0

    def test_negated_map_is_exactly_minus_one(self):
        m = rand_map(3)
        assert pearson_cc(m, FloatMap(-m.values)) == -1.0

    def test_small_example_against_direct_formula(self):
        a = FloatMap(np.array([[1.0, 2.0], [3.0, 4.0]]))
        b = FloatMap(np.array([[1.0, 2.0], [2.0, 5.0]]))
        got = pearson_cc(a, b)
        assert np.isclose(got, oracles.pearson_direct(a.values, b.values), **TOL)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_direct_formula(self, seed):
        a, b = rand_map(seed), rand_map(seed + 50)
        assert np.isclose(
            pearson_cc(a, b), oracles.pearson_direct(a.values, b.values), **TOL
        )

    def test_constant_map_scores_zero(self):
        c = FloatMap(np.full((5, 5), 3.7))
        assert pearson_cc(c, rand_map(1, 5, 5)) == 0.0
        assert pearson_cc(c, c) == 0.0

    def test_affine_invariance(self):
        a, b = rand_map(7), rand_map(8)
        base = pearson_cc(a, b)
        scaled = pearson_cc(FloatMap(2.5 * a.values + 11.0), b)
        flipped = pearson_cc(FloatMap(-3.0 * a.values + 0.25), b)
        assert np.isclose(scaled, base, **TOL)
        assert np.isclose(flipped, -base, **TOL)

    def test_symmetry(self):
        a, b = rand_map(9), rand_map(10)
        assert pearson_cc(a, b) == pearson_cc(b, a)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            pearson_cc(rand_map(0, 3, 3), rand_map(0, 3, 4))

    def test_bounded(self):
        for seed in range(8):
            v = pearson_cc(rand_map(seed, 4, 4), rand_map(seed + 1, 4, 4))
            assert -1.0 <= v <= 1.0


class TestNmi:
    def test_identical_maps_give_one(self):
        m = rand_map(1)
        assert normalized_mi(m, m) == 1.0

    def test_constant_gives_zero(self):
        c = FloatMap(np.zeros((6, 6)))
        assert normalized_mi(c, rand_map(2, 6, 6)) == 0.0

    def test_matching_two_level_partition(self):
        a = FloatMap(np.tile([0.0, 9.0], (4, 4)))
        b = FloatMap(np.tile([-5.0, 5.0], (4, 4)))
        assert normalized_mi(a, b) == 1.0

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_joint_histogram_oracle(self, seed):
        a, b = rand_map(seed + 20, 16, 16), rand_map(seed + 70, 16, 16)
        for bins in (8, 32):
            got = normalized_mi(a, b, bins)
            ref = oracles.nmi_direct(a.values, b.values, bins)
            assert np.isclose(got, ref, **TOL)

    def test_symmetry(self):
        a, b = rand_map(11), rand_map(12)
        assert np.isclose(normalized_mi(a, b), normalized_mi(b, a), **TOL)

    def test_independent_noise_scores_low(self):
        a = rand_map(100, 64, 64)
        b = rand_map(200, 64, 64)
        assert normalized_mi(a, b) < 0.05

    def test_invariant_when_bin_assignment_is_preserved(self):
        rng = np.random.default_rng(5)
        # values at bin centers; a positive affine map keeps every
        # assignment, so the score is reproduced exactly
        idx = rng.integers(0, 32, size=(10, 10))
        a = FloatMap((idx + 0.5) / 32.0)
        b = rand_map(6, 10, 10)
        assert normalized_mi(FloatMap(4.0 * a.values + 1.0), b) == normalized_mi(a, b)

    def test_bounded(self):
        for seed in range(6):
            v = normalized_mi(rand_map(seed, 8, 8), rand_map(seed + 30, 8, 8))
            assert 0.0 <= v <= 1.0

    def test_bins_validated(self):
        with pytest.raises(ValueError):
            normalized_mi(rand_map(0), rand_map(1), bins=1)


class TestScore:
    def test_fields(self):
        s = similarity_score(rand_map(0), rand_map(1))
        assert -1.0 <= s.cc <= 1.0
        assert 0.0 <= s.nmi <= 1.0


def extract_fixture(n_images=3, seed0=0):
    stacks = []
    for i in range(n_images):
        rng = np.random.default_rng(seed0 + i)
        img = GrayImage(rng.integers(0, 256, size=(14, 14), dtype=np.uint8))
        stacks.append(extract_maps(img, RfmConfig(kernel=5, ng=8)))
    return stacks


class TestRanking:
    def test_recovers_feature_used_as_saliency(self):
        stacks = extract_fixture()
        sms = [st["Contrast"] for st in stacks]
        r = rank_rfms(stacks, sms)
        assert r.selected_glcm == "Contrast"
        assert r.mean_cc["Contrast"] == 1.0

    def test_recovers_noisy_feature(self):
        stacks = extract_fixture(seed0=40)
        rng = np.random.default_rng(9)
        sms = []
        for st in stacks:
            v = st["ShortRunEmphasis"].values
            noise = rng.standard_normal(v.shape) * 0.01 * (v.max() - v.min())
            sms.append(FloatMap(v + noise))
        r = rank_rfms(stacks, sms)
        assert r.selected_glrlm == "ShortRunEmphasis"

    def test_mean_cc_matches_per_image_scores(self):
        stacks = extract_fixture(seed0=80)
        sms = [rand_map(500 + i, 14, 14) for i in range(len(stacks))]
        r = rank_rfms(stacks, sms)
        for name in ("Energy", "RunEntropy", "Imc2"):
            direct = np.mean([pearson_cc(st[name], sm) for st, sm in zip(stacks, sms)])
            assert np.isclose(r.mean_cc[name], direct, **TOL)
        assert tuple(r.mean_cc) == FEATURE_NAMES
        assert tuple(r.mean_nmi) == FEATURE_NAMES

    def test_selection_is_invariant_to_saliency_rescale(self):
        stacks = extract_fixture(seed0=120)
        sms = [rand_map(700 + i, 14, 14) for i in range(len(stacks))]
        r1 = rank_rfms(stacks, sms)
        r2 = rank_rfms(stacks, [FloatMap(0.01 * s.values + 40.0) for s in sms])
        assert r1.selected_glcm == r2.selected_glcm
        assert r1.selected_glrlm == r2.selected_glrlm

    def test_empty_and_misaligned_rejected(self):
        with pytest.raises(ValueError):
            rank_rfms([], [])
        stacks = extract_fixture(n_images=2, seed0=160)
        with pytest.raises(ValueError):
            rank_rfms(stacks, [rand_map(0, 14, 14)])

    def test_partial_stack_rejected(self):
        rng = np.random.default_rng(0)
        img = GrayImage(rng.integers(0, 256, size=(14, 14), dtype=np.uint8))
        st = extract_maps(img, RfmConfig(kernel=5, ng=8, features=("Energy",)))
        with pytest.raises(ValueError, match="37"):
            rank_rfms([st], [rand_map(3, 14, 14)])


class TestCcMatrix:
    def test_identical_maps(self):
        m = rand_map(31)
        cm = sm_cc_matrix([m, m, m], ["a", "a", "b"])
        assert (cm.entries == 1.0).all()
        assert cm.pair_means == {("a", "a"): 1.0, ("a", "b"): 1.0}

    def test_entries_match_pairwise_cc(self):
        sms = [rand_map(60 + i) for i in range(4)]
        cohorts = ("covid", "covid", "healthy", "pneumonia")
        cm = sm_cc_matrix(sms, cohorts)
        assert np.array_equal(cm.entries, cm.entries.T)
        for i in range(4):
            assert cm.entries[i, i] == 1.0
            for j in range(4):
                if i != j:
                    assert cm.entries[i, j] == pearson_cc(sms[i], sms[j])

    def test_pair_means_group_off_diagonal_cells(self):
        sms = [rand_map(90 + i) for i in range(4)]
        cohorts = ("a", "a", "b", "b")
        cm = sm_cc_matrix(sms, cohorts)
        e = cm.entries
        assert np.isclose(cm.pair_means[("a", "a")], e[0, 1], **TOL)
        assert np.isclose(cm.pair_means[("b", "b")], e[2, 3], **TOL)
        cross = (e[0, 2] + e[0, 3] + e[1, 2] + e[1, 3]) / 4
        assert np.isclose(cm.pair_means[("a", "b")], cross, **TOL)

    def test_needs_two_maps(self):
        with pytest.raises(ValueError):
            sm_cc_matrix([rand_map(0)], ["a"])
