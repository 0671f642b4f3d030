"""Map-to-map similarity and saliency-guided feature map selection.

Cross-correlation here means zero-mean normalized (Pearson) correlation
over all pixels. Normalized mutual information uses per-map equal-width
binning and the 2 I / (Ha + Hb) normalization, logs base 2. Constant maps
have no structure to share: their CC and NMI are defined as 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import FEATURE_NAMES, GLCM_FEATURES, GLRLM_FEATURES
from .imaging import FloatMap

__all__ = [
    "SimilarityScore",
    "RfmRanking",
    "CcMatrix",
    "pearson_cc",
    "normalized_mi",
    "similarity_score",
    "rank_rfms",
    "sm_cc_matrix",
]


@dataclass(frozen=True)
class SimilarityScore:
    cc: float
    nmi: float

    def __post_init__(self):
        if not -1.0 <= self.cc <= 1.0:
            raise ValueError("cc outside [-1, 1]")
        if not 0.0 <= self.nmi <= 1.0:
            raise ValueError("nmi outside [0, 1]")


@dataclass(frozen=True)
class RfmRanking:
    """Per-feature mean CC/NMI against the saliency maps, plus the winner
    of each category (highest mean CC, canonical order breaking ties)."""

    mean_cc: dict
    mean_nmi: dict
    selected_glcm: str
    selected_glrlm: str

    def __post_init__(self):
        if tuple(self.mean_cc) != FEATURE_NAMES or tuple(self.mean_nmi) != FEATURE_NAMES:
            raise ValueError("ranking must cover all features in canonical order")


@dataclass(frozen=True)
class CcMatrix:
    """Pairwise CC of saliency maps with per-cohort-pair off-diagonal means."""

    entries: np.ndarray
    cohorts: tuple
    pair_means: dict

    def __post_init__(self):
        e = np.ascontiguousarray(self.entries, dtype=np.float64)
        n = len(self.cohorts)
        if e.shape != (n, n):
            raise ValueError("entries must be n x n")
        e = e.copy()
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "cohorts", tuple(self.cohorts))


def _check_dims(a: FloatMap, b: FloatMap):
    if a.values.shape != b.values.shape:
        raise ValueError(
            f"dimension mismatch: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def pearson_cc(a: FloatMap, b: FloatMap) -> float:
    """Pearson correlation over pixels; 0 when either map is constant."""
    _check_dims(a, b)
    if a.values.size < 2:
        raise ValueError("need at least 2 pixels")
    # ptp, not the centered sum: subtracting an inexact mean leaves residue
    # on a constant map, which must score exactly 0
    if np.ptp(a.values) == 0 or np.ptp(b.values) == 0:
        return 0.0
    da = a.values.ravel() - a.values.mean()
    db = b.values.ravel() - b.values.mean()
    saa = float(np.dot(da, da))
    sbb = float(np.dot(db, db))
    if saa == 0.0 or sbb == 0.0:
        return 0.0
    cc = float(np.dot(da, db)) / np.sqrt(saa * sbb)
    return min(1.0, max(-1.0, cc))


def _bin_indices(v: np.ndarray, bins: int) -> np.ndarray:
    lo = v.min()
    hi = v.max()
    if hi == lo:
        return np.zeros(v.size, dtype=np.int64)
    idx = np.floor((v.ravel() - lo) * (bins / (hi - lo))).astype(np.int64)
    return np.minimum(idx, bins - 1)


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log2(p)).sum())


def normalized_mi(a: FloatMap, b: FloatMap, bins: int = 32) -> float:
    """NMI = 2 I(A;B) / (H(A) + H(B)) on equal-width per-map binnings.

    I is computed as H(A) + H(B) - H(A,B); a constant map has zero entropy
    and the result is defined as 0 when H(A) + H(B) = 0.
    """
    _check_dims(a, b)
    if bins < 2:
        raise ValueError("bins must be at least 2")
    ia = _bin_indices(a.values, bins)
    ib = _bin_indices(b.values, bins)
    ha = _entropy(np.bincount(ia, minlength=bins))
    hb = _entropy(np.bincount(ib, minlength=bins))
    if ha + hb == 0.0:
        return 0.0
    hab = _entropy(np.bincount(ia * bins + ib, minlength=bins * bins))
    nmi = 2.0 * (ha + hb - hab) / (ha + hb)
    return min(1.0, max(0.0, nmi))


def similarity_score(a: FloatMap, b: FloatMap, bins: int = 32) -> SimilarityScore:
    return SimilarityScore(cc=pearson_cc(a, b), nmi=normalized_mi(a, b, bins))


def rank_rfms(stacks, sms, bins: int = 32) -> RfmRanking:
    """Rank all 37 features by mean CC against per-image saliency maps.

    stacks and sms are aligned one-to-one per image. The winner of each
    category is the feature with the highest mean CC; ties go to the lower
    canonical index.
    """
    stacks = list(stacks)
    sms = list(sms)
    if not stacks:
        raise ValueError("empty collection")
    if len(stacks) != len(sms):
        raise ValueError("stacks and saliency maps must align one-to-one")
    for st in stacks:
        if tuple(st.names) != FEATURE_NAMES:
            raise ValueError("ranking needs stacks with all 37 features")

    cc = np.zeros(len(FEATURE_NAMES))
    nmi = np.zeros(len(FEATURE_NAMES))
    for st, sm in zip(stacks, sms):
        for f, name in enumerate(FEATURE_NAMES):
            fm = st[name]
            cc[f] += pearson_cc(fm, sm)
            nmi[f] += normalized_mi(fm, sm, bins)
    cc /= len(stacks)
    nmi /= len(stacks)

    n_glcm = len(GLCM_FEATURES)
    best_glcm = int(np.argmax(cc[:n_glcm]))
    best_glrlm = int(np.argmax(cc[n_glcm:]))
    return RfmRanking(
        mean_cc=dict(zip(FEATURE_NAMES, cc.tolist())),
        mean_nmi=dict(zip(FEATURE_NAMES, nmi.tolist())),
        selected_glcm=GLCM_FEATURES[best_glcm],
        selected_glrlm=GLRLM_FEATURES[best_glrlm],
    )


def sm_cc_matrix(sms, cohorts) -> CcMatrix:
    """Pairwise saliency CC matrix with off-diagonal cohort-pair means."""
    sms = list(sms)
    cohorts = tuple(cohorts)
    n = len(sms)
    if n < 2:
        raise ValueError("need at least 2 saliency maps")
    if len(cohorts) != n:
        raise ValueError("one cohort label per saliency map")
    entries = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        entries[i, i] = pearson_cc(sms[i], sms[i])
        for j in range(i + 1, n):
            entries[i, j] = entries[j, i] = pearson_cc(sms[i], sms[j])

    sums = {}
    for i in range(n):
        for j in range(i + 1, n):
            key = tuple(sorted((cohorts[i], cohorts[j])))
            tot, cnt = sums.get(key, (0.0, 0))
            sums[key] = (tot + entries[i, j], cnt + 1)
    pair_means = {key: tot / cnt for key, (tot, cnt) in sorted(sums.items())}
    return CcMatrix(entries=entries, cohorts=cohorts, pair_means=pair_means)
