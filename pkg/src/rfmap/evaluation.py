"""Three-class classifier evaluation.

Classes are fixed to (healthy, pneumonia, covid), matching the predictions
CSV column order. Metrics are one-vs-rest per class; ROC curves come from a
descending unique-score threshold sweep with trapezoid AUC; model pairs are
compared with a two-sided Wilcoxon signed-rank test (exact null for small
n, normal approximation with tie and continuity correction otherwise).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LABELS",
    "PredictionError",
    "PredictionSet",
    "ClassMetrics",
    "RocCurve",
    "RocBand",
    "read_predictions",
    "write_predictions",
    "class_metrics",
    "roc_auc",
    "roc_band",
    "wilcoxon_signed_rank",
]

LABELS = ("healthy", "pneumonia", "covid")
CSV_HEADER = ("id", "true_label", "score_healthy", "score_pneumonia", "score_covid")

_EXACT_LIMIT = 20  # exact Wilcoxon null up to this many nonzero differences


class PredictionError(ValueError):
    """Malformed prediction data."""


@dataclass(frozen=True)
class PredictionSet:
    """Per-sample ids, true labels, and 3-class scores (rows sum to 1)."""

    ids: tuple
    true_labels: tuple
    scores: np.ndarray  # (n, 3) float64, column order = LABELS

    def __post_init__(self):
        s = np.ascontiguousarray(self.scores, dtype=np.float64)
        n = len(self.ids)
        if s.shape != (n, 3) or n == 0:
            raise PredictionError("scores must be (n, 3) with n >= 1")
        if len(self.true_labels) != n:
            raise PredictionError("one true label per id")
        if len(set(self.ids)) != n:
            raise PredictionError("duplicate ids")
        bad = [t for t in self.true_labels if t not in LABELS]
        if bad:
            raise PredictionError(f"unknown label {bad[0]!r}")
        if s.min() < 0:
            raise PredictionError("negative score")
        off = np.abs(s.sum(axis=1) - 1.0)
        if off.max() > 1e-6:
            raise PredictionError("scores must sum to 1 within 1e-6")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "scores", s)
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "true_labels", tuple(self.true_labels))

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def predicted(self) -> tuple:
        # argmax takes the first maximum, i.e. the lowest class index on ties
        return tuple(LABELS[i] for i in np.argmax(self.scores, axis=1))


@dataclass(frozen=True)
class ClassMetrics:
    sensitivity: float
    specificity: float
    accuracy: float
    auc: float


@dataclass(frozen=True)
class RocCurve:
    label: str
    points: tuple  # ((fpr, tpr), ...) from (0,0) to (1,1)
    auc: float


@dataclass(frozen=True)
class RocBand:
    label: str
    fpr: np.ndarray
    tpr_mean: np.ndarray
    tpr_std: np.ndarray
    tpr_lo: np.ndarray
    tpr_hi: np.ndarray


def read_predictions(path) -> PredictionSet:
    """Parse a predictions CSV with the exact canonical header."""
    try:
        with open(path, "r", newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(f"{path}: {exc}") from None
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise PredictionError(f"{path}: expected header {','.join(CSV_HEADER)}")
    ids, labels, scores = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 5:
            raise PredictionError(f"{path}:{lineno}: expected 5 fields")
        ids.append(row[0])
        labels.append(row[1])
        try:
            scores.append([float(v) for v in row[2:]])
        except ValueError:
            raise PredictionError(f"{path}:{lineno}: bad score") from None
    if not ids:
        raise PredictionError(f"{path}: no prediction rows")
    try:
        return PredictionSet(tuple(ids), tuple(labels), np.array(scores))
    except PredictionError as exc:
        raise PredictionError(f"{path}: {exc}") from None


def write_predictions(path, pset: PredictionSet) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for i, (sid, lab) in enumerate(zip(pset.ids, pset.true_labels)):
            w.writerow([sid, lab] + [f"{v:.17g}" for v in pset.scores[i]])


def class_metrics(p: PredictionSet) -> dict:
    """One-vs-rest sensitivity/specificity/accuracy/AUC per class."""
    present = set(p.true_labels)
    missing = [c for c in LABELS if c not in present]
    if missing:
        raise PredictionError(f"class {missing[0]!r} absent from data")
    pred = p.predicted
    n = len(p)
    out = {}
    for c in LABELS:
        tp = sum(1 for t, q in zip(p.true_labels, pred) if t == c and q == c)
        fn = sum(1 for t, q in zip(p.true_labels, pred) if t == c and q != c)
        fp = sum(1 for t, q in zip(p.true_labels, pred) if t != c and q == c)
        tn = n - tp - fn - fp
        out[c] = ClassMetrics(
            sensitivity=tp / (tp + fn),
            specificity=tn / (tn + fp),
            accuracy=(tp + tn) / n,
            auc=roc_auc(p, c).auc,
        )
    return out


def roc_auc(p: PredictionSet, label: str) -> RocCurve:
    """One-vs-rest ROC for a class from its score column."""
    if label not in LABELS:
        raise PredictionError(f"unknown label {label!r}")
    col = LABELS.index(label)
    scores = p.scores[:, col]
    pos = np.array([t == label for t in p.true_labels])
    npos = int(pos.sum())
    nneg = len(p) - npos
    if npos == 0 or nneg == 0:
        raise PredictionError(f"class {label!r} needs positives and negatives")

    points = [(0.0, 0.0)]
    for t in np.unique(scores)[::-1]:
        hit = scores >= t
        points.append(
            (float((hit & ~pos).sum()) / nneg, float((hit & pos).sum()) / npos)
        )
    fpr = np.array([q[0] for q in points])
    tpr = np.array([q[1] for q in points])
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(label=label, points=tuple(points), auc=auc)


def roc_band(curves) -> RocBand:
    """Mean +- 1 sample standard deviation TPR band on a fixed FPR grid."""
    curves = list(curves)
    if len(curves) < 2:
        raise ValueError("need at least 2 curves")
    labels = {c.label for c in curves}
    if len(labels) != 1:
        raise ValueError("curves must describe one class")
    grid = np.linspace(0.0, 1.0, 101)
    tprs = np.empty((len(curves), grid.size))
    for i, c in enumerate(curves):
        fpr = np.array([q[0] for q in c.points])
        tpr = np.array([q[1] for q in c.points])
        # vertical curve segments repeat an fpr; keep the upper envelope so
        # interpolation is well defined
        uf, idx = np.unique(fpr, return_index=True)
        ut = np.maximum.reduceat(tpr, idx)
        tprs[i] = np.interp(grid, uf, ut)
    mean = tprs.mean(axis=0)
    std = tprs.std(axis=0, ddof=1)
    # grid points where every curve agrees must give a zero-width band
    # (identical repeats round to ~1e-17 otherwise)
    same = tprs.max(axis=0) == tprs.min(axis=0)
    mean[same] = tprs[0, same]
    std[same] = 0.0
    return RocBand(
        label=curves[0].label,
        fpr=grid,
        tpr_mean=mean,
        tpr_std=std,
        tpr_lo=np.clip(mean - std, 0.0, 1.0),
        tpr_hi=np.clip(mean + std, 0.0, 1.0),
    )


def _exact_tail_counts(double_ranks, w2: int):
    # distribution of doubled W+ over all sign assignments, by subset-sum
    total = int(sum(double_ranks))
    dist = np.zeros(total + 1, dtype=np.float64)
    dist[0] = 1.0
    for r in double_ranks:
        shifted = np.zeros_like(dist)
        shifted[r:] = dist[: dist.size - r]
        dist = dist + shifted
    m = 2.0 ** len(double_ranks)
    lower = dist[: w2 + 1].sum() / m
    upper = dist[w2:].sum() / m
    return lower, upper


def wilcoxon_signed_rank(x, y, exact_limit: int = _EXACT_LIMIT) -> float:
    """Two-sided signed-rank p-value for paired samples.

    Zero differences are dropped (all-zero pairs give p = 1.0). Tied
    absolute differences receive average ranks. The null distribution is
    enumerated exactly up to exact_limit nonzero differences (20 by
    default); beyond that a normal approximation with tie and continuity
    correction is used.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 1:
        raise ValueError("x and y must be equal-length 1D samples")
    d = x - y
    d = d[d != 0.0]
    n = d.size
    if n == 0:
        return 1.0

    order = np.argsort(np.abs(d), kind="stable")
    ad = np.abs(d)[order]
    ranks = np.empty(n, dtype=np.float64)
    i = 0
    tie_sizes = []
    while i < n:
        j = i
        while j < n and ad[j] == ad[i]:
            j += 1
        ranks[i:j] = 0.5 * (i + j + 1)  # average of ranks i+1 .. j
        tie_sizes.append(j - i)
        i = j
    signs = np.sign(d)[order]
    w_plus = float(ranks[signs > 0].sum())

    if n <= exact_limit:
        # double the ranks so tied (half-integer) ranks become integers
        double_ranks = np.rint(2.0 * ranks).astype(np.int64)
        w2 = int(round(2.0 * w_plus))
        lower, upper = _exact_tail_counts(double_ranks, w2)
        return min(1.0, 2.0 * min(lower, upper))

    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    var -= sum(t**3 - t for t in tie_sizes) / 48.0
    if var <= 0:
        return 1.0
    dev = w_plus - mean
    if dev > 0.5:
        dev -= 0.5
    elif dev < -0.5:
        dev += 0.5
    else:
        dev = 0.0
    z = dev / math.sqrt(var)
    return min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))
