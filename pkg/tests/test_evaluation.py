import numpy as np
import pytest

import oracles
from rfmap import (
    LABELS,
    PredictionError,
    PredictionSet,
    class_metrics,
    read_predictions,
    roc_auc,
    roc_band,
    wilcoxon_signed_rank,
    write_predictions,
)

TOL = dict(rtol=1e-12, atol=1e-12)


def onehot_scores(pred_labels, strength=0.8):
    rest = (1.0 - strength) / 2.0
    rows = []
    for lab in pred_labels:
        row = [rest, rest, rest]
        row[LABELS.index(lab)] = strength
        rows.append(row)
    return np.array(rows)


def covid_column_set(true_flags, covid_scores):
    """Embed a binary problem in the covid column; rows still sum to 1."""
    labels = ["covid" if f else "healthy" for f in true_flags]
    scores = [[(1.0 - s) / 2.0, (1.0 - s) / 2.0, s] for s in covid_scores]
    # make every class present so class_metrics stays usable elsewhere
    return PredictionSet(
        ids=tuple(f"s{i}" for i in range(len(labels))),
        true_labels=tuple(labels),
        scores=np.array(scores),
    )


def random_pset(seed, n=30):
    rng = np.random.default_rng(seed)
    raw = rng.random((n, 3)) + 0.05
    scores = raw / raw.sum(axis=1, keepdims=True)
    labels = tuple(LABELS[i] for i in rng.integers(0, 3, size=n))
    # reroll until every class appears; cheap for n = 30
    while len(set(labels)) < 3:
        labels = tuple(LABELS[i] for i in rng.integers(0, 3, size=n))
    return PredictionSet(
        ids=tuple(f"r{i}" for i in range(n)), true_labels=labels, scores=scores
    )


class TestPredictionSet:
    def test_argmax_tie_takes_lowest_class_index(self):
        p = PredictionSet(
            ids=("a",), true_labels=("covid",), scores=np.array([[0.4, 0.4, 0.2]])
        )
        assert p.predicted == ("healthy",)

    def test_duplicate_ids_rejected(self):
        with pytest.raises(PredictionError, match="duplicate"):
            PredictionSet(("a", "a"), ("covid", "covid"), onehot_scores(["covid"] * 2))

    def test_unknown_label_rejected(self):
        with pytest.raises(PredictionError, match="unknown label"):
            PredictionSet(("a",), ("flu",), onehot_scores(["covid"]))

    def test_score_sum_enforced(self):
        with pytest.raises(PredictionError, match="sum to 1"):
            PredictionSet(("a",), ("covid",), np.array([[0.5, 0.5, 0.5]]))

    def test_negative_score_rejected(self):
        with pytest.raises(PredictionError, match="negative"):
            PredictionSet(("a",), ("covid",), np.array([[-0.1, 0.6, 0.5]]))


class TestCsv:
    def test_round_trip(self, tmp_path):
        p = random_pset(0, n=12)
        f = tmp_path / "pred.csv"
        write_predictions(f, p)
        back = read_predictions(f)
        assert back.ids == p.ids
        assert back.true_labels == p.true_labels
        assert np.array_equal(back.scores, p.scores)

    def test_header_line_is_exact(self, tmp_path):
        f = tmp_path / "pred.csv"
        write_predictions(f, random_pset(1, n=6))
        first = f.read_text().splitlines()[0]
        assert first == "id,true_label,score_healthy,score_pneumonia,score_covid"

    def test_wrong_header_rejected(self, tmp_path):
        f = tmp_path / "bad.csv"
        f.write_text("id,label,s1,s2,s3\na,covid,1,0,0\n")
        with pytest.raises(PredictionError, match="header"):
            read_predictions(f)

    def test_bad_score_reports_line(self, tmp_path):
        f = tmp_path / "bad.csv"
        f.write_text(
            "id,true_label,score_healthy,score_pneumonia,score_covid\n"
            "a,covid,0.2,0.3,0.5\n"
            "b,covid,x,0.3,0.5\n"
        )
        with pytest.raises(PredictionError, match="bad score"):
            read_predictions(f)

    def test_empty_body_rejected(self, tmp_path):
        f = tmp_path / "empty.csv"
        f.write_text("id,true_label,score_healthy,score_pneumonia,score_covid\n")
        with pytest.raises(PredictionError, match="no prediction rows"):
            read_predictions(f)

    def test_missing_file_is_os_error(self, tmp_path):
        with pytest.raises(OSError):
            read_predictions(tmp_path / "nope.csv")


class TestClassMetrics:
    def test_all_correct(self):
        true = ("healthy", "pneumonia", "covid", "healthy", "pneumonia", "covid")
        p = PredictionSet(tuple("abcdef"), true, onehot_scores(true))
        m = class_metrics(p)
        for c in LABELS:
            assert m[c].sensitivity == 1.0
            assert m[c].specificity == 1.0
            assert m[c].accuracy == 1.0
            assert m[c].auc == 1.0

    def test_one_covid_sample_crossed_to_pneumonia(self):
        true = ("healthy", "healthy", "pneumonia", "pneumonia", "covid", "covid")
        pred = ("healthy", "healthy", "pneumonia", "pneumonia", "covid", "pneumonia")
        p = PredictionSet(tuple("abcdef"), true, onehot_scores(pred))
        m = class_metrics(p)
        assert m["covid"].sensitivity == 0.5
        assert m["covid"].specificity == 1.0
        assert m["covid"].accuracy == 5 / 6
        assert m["pneumonia"].sensitivity == 1.0
        assert m["pneumonia"].specificity == 0.75
        assert m["pneumonia"].accuracy == 5 / 6
        assert m["healthy"].sensitivity == 1.0
        assert m["healthy"].specificity == 1.0
        assert m["healthy"].accuracy == 1.0

    def test_counts_partition_the_samples(self):
        p = random_pset(7)
        pred = p.predicted
        n = len(p)
        for c in LABELS:
            tp = sum(t == c and q == c for t, q in zip(p.true_labels, pred))
            fn = sum(t == c and q != c for t, q in zip(p.true_labels, pred))
            fp = sum(t != c and q == c for t, q in zip(p.true_labels, pred))
            tn = n - tp - fn - fp
            assert tp + fn == sum(t == c for t in p.true_labels)
            assert class_metrics(p)[c].accuracy == (tp + tn) / n

    def test_missing_class_rejected(self):
        true = ("healthy", "pneumonia", "healthy")
        p = PredictionSet(("a", "b", "c"), true, onehot_scores(true))
        with pytest.raises(PredictionError, match="covid"):
            class_metrics(p)


class TestRocAuc:
    def test_perfect_separation(self):
        p = covid_column_set([0, 0, 1, 1], [0.1, 0.2, 0.7, 0.9])
        assert roc_auc(p, "covid").auc == 1.0

    def test_three_quarters_example(self):
        p = covid_column_set([1, 1, 0, 0], [0.35, 0.8, 0.1, 0.4])
        assert np.isclose(roc_auc(p, "covid").auc, 0.75, **TOL)

    def test_all_tied_scores(self):
        p = covid_column_set([0, 1, 0, 1], [0.5, 0.5, 0.5, 0.5])
        assert np.isclose(roc_auc(p, "covid").auc, 0.5, **TOL)

    def test_curve_shape(self):
        p = random_pset(3)
        for c in LABELS:
            pts = roc_auc(p, c).points
            assert pts[0] == (0.0, 0.0)
            assert pts[-1] == (1.0, 1.0)
            fpr = [q[0] for q in pts]
            tpr = [q[1] for q in pts]
            assert all(a <= b for a, b in zip(fpr, fpr[1:]))
            assert all(a <= b for a, b in zip(tpr, tpr[1:]))

    @pytest.mark.parametrize("seed", range(10))
    def test_trapezoid_equals_mann_whitney(self, seed):
        p = random_pset(seed + 100)
        for c in LABELS:
            col = LABELS.index(c)
            pos = [s for s, t in zip(p.scores[:, col], p.true_labels) if t == c]
            neg = [s for s, t in zip(p.scores[:, col], p.true_labels) if t != c]
            assert np.isclose(
                roc_auc(p, c).auc, oracles.auc_mann_whitney(pos, neg), **TOL
            )

    def test_invariant_under_increasing_transform(self):
        flags = [1, 0, 1, 0, 1, 0, 0, 1, 1, 0]
        rng = np.random.default_rng(8)
        s = rng.random(10)
        a = covid_column_set(flags, s)
        b = covid_column_set(flags, s**3)  # strictly increasing on [0, 1]
        assert np.isclose(roc_auc(a, "covid").auc, roc_auc(b, "covid").auc, **TOL)

    def test_degenerate_composition_rejected(self):
        p = PredictionSet(
            ("a", "b"), ("covid", "covid"), onehot_scores(["covid", "healthy"])
        )
        with pytest.raises(PredictionError, match="positives and negatives"):
            roc_auc(p, "covid")


class TestRocBand:
    def test_identical_curves_zero_band(self):
        p = random_pset(40)
        c = roc_auc(p, "covid")
        band = roc_band([c, c, c])
        assert (band.tpr_std == 0.0).all()
        assert np.array_equal(band.tpr_lo, band.tpr_mean)
        assert np.array_equal(band.tpr_hi, band.tpr_mean)
        assert band.fpr[0] == 0.0 and band.fpr[-1] == 1.0 and band.fpr.size == 101

    def test_two_curves_mean_is_pointwise_average(self):
        c1 = roc_auc(random_pset(41), "covid")
        c2 = roc_auc(random_pset(42), "covid")
        band = roc_band([c1, c2])
        ref_mean, _ = oracles.band_stats(
            [c1.points, c2.points], band.fpr.tolist()
        )
        assert np.allclose(band.tpr_mean, ref_mean, **TOL)

    @pytest.mark.parametrize("label", ["healthy", "covid"])
    def test_matches_grid_oracle(self, label):
        curves = [roc_auc(random_pset(50 + i), label) for i in range(5)]
        band = roc_band(curves)
        ref_mean, ref_std = oracles.band_stats(
            [c.points for c in curves], band.fpr.tolist()
        )
        assert np.allclose(band.tpr_mean, ref_mean, **TOL)
        assert np.allclose(band.tpr_std, ref_std, **TOL)
        assert (band.tpr_lo >= 0.0).all() and (band.tpr_hi <= 1.0).all()

    def test_needs_two_curves(self):
        with pytest.raises(ValueError, match="2 curves"):
            roc_band([roc_auc(random_pset(60), "covid")])

    def test_mixed_labels_rejected(self):
        p = random_pset(61)
        with pytest.raises(ValueError, match="one class"):
            roc_band([roc_auc(p, "covid"), roc_auc(p, "healthy")])


class TestWilcoxon:
    def test_equal_samples(self):
        x = np.arange(5.0)
        assert wilcoxon_signed_rank(x, x) == 1.0

    def test_five_positive_differences(self):
        x = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        y = x - np.array([0.1, 0.2, 0.3, 0.4, 0.5])
        assert wilcoxon_signed_rank(x, y) == 0.0625

    def test_six_positive_differences(self):
        x = np.arange(1.0, 7.0)
        y = x - np.linspace(0.1, 0.6, 6)
        assert wilcoxon_signed_rank(x, y) == 0.03125

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_sign_enumeration(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 11))
        x = rng.integers(-4, 5, size=n).astype(float) / 2.0
        y = np.zeros(n)
        got = wilcoxon_signed_rank(x, y)
        ref = oracles.wilcoxon_enumerate(x, y)
        if np.all(x == 0):
            assert got == ref == 1.0
        else:
            assert np.isclose(got, ref, **TOL)

    def test_symmetric_in_arguments(self):
        rng = np.random.default_rng(77)
        x, y = rng.random(12), rng.random(12)
        assert wilcoxon_signed_rank(x, y) == wilcoxon_signed_rank(y, x)

    def test_approximation_branch_is_continuous_with_exact(self):
        rng = np.random.default_rng(5)
        x = rng.random(18)
        y = x + rng.normal(0.3, 0.2, size=18)
        exact = wilcoxon_signed_rank(x, y)
        approx = wilcoxon_signed_rank(x, y, exact_limit=5)
        assert 0.0 <= approx <= 1.0
        assert abs(exact - approx) < 0.02

    def test_strong_signal_small_p(self):
        x = np.arange(30.0)
        y = x - 1.0
        p = wilcoxon_signed_rank(x, y)
        assert p < 1e-5

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            wilcoxon_signed_rank(np.arange(3.0), np.arange(4.0))
