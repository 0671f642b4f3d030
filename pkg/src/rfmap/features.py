"""Gray-level quantization and GLCM / GLRLM texture features for 2D patches.

Pairs are counted at Chebyshev distance 1 along the four directions
(0, 45, 90, 135 degrees), in both orders, and the directional matrices are
merged into a single symmetric matrix before normalization. Runs are maximal
same-level segments along the same four directions, likewise merged.

Gray levels and run lengths enter the formulas 1-based: a level stored as
``l`` weighs as ``i = l + 1``, a run of ``n`` pixels as ``j = n``. All
logarithms are base 2 and ``0 log 0 = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GLCM_FEATURES",
    "GLRLM_FEATURES",
    "FEATURE_NAMES",
    "FEATURE_INDEX",
    "QuantizedPatch",
    "CooccurrenceMatrix",
    "RunLengthMatrix",
    "FeatureVector",
    "quantize",
    "glcm_accumulate",
    "glcm_features",
    "glrlm_accumulate",
    "glrlm_features",
    "feature_vector",
]

# Canonical feature table. Map stacks, FMAP files and CSV columns all follow
# this ordering; formulas are spelled out in glcm_features/glrlm_features.
GLCM_FEATURES = (
    "Energy",
    "Contrast",
    "Correlation",
    "Variance",
    "InverseDifferenceMoment",
    "SumAverage",
    "SumVariance",
    "SumEntropy",
    "Entropy",
    "DifferenceVariance",
    "DifferenceEntropy",
    "Imc1",
    "Imc2",
    "MaximumProbability",
    "Autocorrelation",
    "Dissimilarity",
    "ClusterShade",
    "ClusterProminence",
    "ClusterTendency",
    "InverseDifference",
    "InverseDifferenceMomentNormalized",
)

GLRLM_FEATURES = (
    "ShortRunEmphasis",
    "LongRunEmphasis",
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "RunLengthNonUniformity",
    "RunLengthNonUniformityNormalized",
    "RunPercentage",
    "GrayLevelVariance",
    "RunLengthVariance",
    "RunEntropy",
    "LowGrayLevelRunEmphasis",
    "HighGrayLevelRunEmphasis",
    "ShortRunLowGrayLevelEmphasis",
    "ShortRunHighGrayLevelEmphasis",
    "LongRunLowGrayLevelEmphasis",
    "LongRunHighGrayLevelEmphasis",
)

FEATURE_NAMES = GLCM_FEATURES + GLRLM_FEATURES
FEATURE_INDEX = {name: i for i, name in enumerate(FEATURE_NAMES)}

# (dy, dx) offsets for 0, 90, 45, 135 degrees with dy pointing down
_DIRECTIONS = ((0, 1), (1, 0), (1, 1), (1, -1))


@dataclass(frozen=True)
class QuantizedPatch:
    """Rectangular patch of quantized levels in [0, ng)."""

    levels: np.ndarray
    ng: int

    def __post_init__(self):
        lv = np.ascontiguousarray(self.levels, dtype=np.int64)
        if lv.ndim != 2 or lv.shape[0] < 1 or lv.shape[1] < 1:
            raise ValueError("levels must be a non-empty 2D array")
        if self.ng < 2:
            raise ValueError("ng must be at least 2")
        if lv.min() < 0 or lv.max() >= self.ng:
            raise ValueError("level outside [0, ng)")
        lv = lv.copy()
        lv.flags.writeable = False
        object.__setattr__(self, "levels", lv)

    @property
    def height(self) -> int:
        return self.levels.shape[0]

    @property
    def width(self) -> int:
        return self.levels.shape[1]


@dataclass(frozen=True)
class CooccurrenceMatrix:
    """Symmetric merged-direction pair counts, shape (ng, ng)."""

    counts: np.ndarray
    ng: int

    def __post_init__(self):
        c = np.ascontiguousarray(self.counts, dtype=np.int64)
        if c.shape != (self.ng, self.ng):
            raise ValueError("counts must be (ng, ng)")
        if c.min() < 0 or not np.array_equal(c, c.T):
            raise ValueError("counts must be nonnegative and symmetric")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class RunLengthMatrix:
    """Merged-direction run counts, shape (ng, rmax), plus the pixel count."""

    counts: np.ndarray
    ng: int
    rmax: int
    npixels: int

    def __post_init__(self):
        c = np.ascontiguousarray(self.counts, dtype=np.int64)
        if c.shape != (self.ng, self.rmax):
            raise ValueError("counts must be (ng, rmax)")
        if c.min(initial=0) < 0:
            raise ValueError("counts must be nonnegative")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)

    @property
    def nruns(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class FeatureVector:
    """The 37 scalar features of one patch, canonically ordered."""

    glcm: dict
    glrlm: dict

    def __post_init__(self):
        if tuple(self.glcm) != GLCM_FEATURES or tuple(self.glrlm) != GLRLM_FEATURES:
            raise ValueError("feature names out of canonical order")
        vals = list(self.glcm.values()) + list(self.glrlm.values())
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite feature value")

    def as_array(self) -> np.ndarray:
        return np.array(
            list(self.glcm.values()) + list(self.glrlm.values()), dtype=np.float64
        )

    def __getitem__(self, name: str) -> float:
        return self.glcm[name] if name in self.glcm else self.glrlm[name]


def quantize(img, ng: int = 32, lo=None, hi=None) -> QuantizedPatch:
    """Bin intensities uniformly into ng levels over [lo, hi].

    level = min(ng - 1, floor(ng * (g - lo) / (hi - lo + 1)))

    lo/hi default to the input's own min/max; pass the global image min/max
    so every window of one image shares a single quantization. lo == hi
    yields all-zero levels.
    """
    g = np.asarray(getattr(img, "pixels", img), dtype=np.int64)
    if lo is None:
        lo = int(g.min())
    if hi is None:
        hi = int(g.max())
    if lo > hi:
        raise ValueError("lo must not exceed hi")
    if lo == hi:
        return QuantizedPatch(np.zeros_like(g), ng)
    lv = np.minimum(ng - 1, (ng * (g - lo)) // (hi - lo + 1))
    return QuantizedPatch(lv, ng)


def glcm_accumulate(patch: QuantizedPatch) -> CooccurrenceMatrix:
    """Count level pairs at distance 1 along the four directions.

    Each neighboring pair contributes to counts[a][b] and counts[b][a], and
    all directions land in the same matrix. A 1x1 patch has no pairs and is
    rejected.
    """
    lv = patch.levels
    ng = patch.ng
    if lv.size < 2:
        raise ValueError("no pairs in a 1x1 patch")
    acc = np.zeros(ng * ng, dtype=np.int64)
    for dy, dx in _DIRECTIONS:
        if dx >= 0:
            a = lv[: lv.shape[0] - dy, : lv.shape[1] - dx]
            b = lv[dy:, dx:]
        else:
            a = lv[: lv.shape[0] - dy, -dx:]
            b = lv[dy:, : lv.shape[1] + dx]
        if a.size == 0:
            continue
        codes = (a * ng + b).ravel()
        acc += np.bincount(codes, minlength=ng * ng)
        acc += np.bincount((b * ng + a).ravel(), minlength=ng * ng)
    return CooccurrenceMatrix(acc.reshape(ng, ng), ng)


def _xlog2(v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    nz = v > 0
    out[nz] = v[nz] * np.log2(v[nz])
    return out


def glcm_features(m: CooccurrenceMatrix) -> dict:
    """Evaluate the 21 co-occurrence features from a normalized matrix.

    With p(i,j) = counts/total, marginals px/py, means mux/muy, and the
    diagonal/cross sums p_(x+y)(k) = sum of p over i+j = k and
    p_(x-y)(d) = sum over |i-j| = d:

      Energy                  sum p^2
      Contrast                sum (i-j)^2 p
      Correlation             (sum ij p - mux muy) / (sx sy); 1 if sx sy = 0
      Variance                sum (i - mux)^2 p
      InverseDifferenceMoment sum p / (1 + (i-j)^2)
      SumAverage              sum k p_(x+y)
      SumVariance             sum (k - SumAverage)^2 p_(x+y)
      SumEntropy              -sum p_(x+y) log2 p_(x+y)
      Entropy                 -sum p log2 p
      DifferenceVariance      sum (d - mean)^2 p_(x-y)
      DifferenceEntropy       -sum p_(x-y) log2 p_(x-y)
      Imc1                    (HXY - HXY1) / max(HX, HY); 0 if the max is 0
      Imc2                    sqrt(1 - exp(-2 (HXY2 - HXY)))
      MaximumProbability      max p
      Autocorrelation         sum ij p
      Dissimilarity           sum |i-j| p
      ClusterShade            sum (i + j - mux - muy)^3 p
      ClusterProminence       sum (i + j - mux - muy)^4 p
      ClusterTendency         sum (i + j - mux - muy)^2 p
      InverseDifference       sum p / (1 + |i-j|)
      InverseDifferenceMomentNormalized  sum p / (1 + (i-j)^2 / ng^2)

    where HX/HY are marginal entropies, HXY = Entropy,
    HXY1 = -sum p log2(px py) and HXY2 = -sum px py log2(px py).
    """
    total = m.total
    if total <= 0:
        raise ValueError("zero-total matrix")
    ng = m.ng
    p = m.counts.astype(np.float64) / total
    i = np.arange(1, ng + 1, dtype=np.float64)
    ii, jj = np.meshgrid(i, i, indexing="ij")
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    mux = float(np.dot(i, px))
    muy = float(np.dot(i, py))
    varx = float(np.dot((i - mux) ** 2, px))
    vary = float(np.dot((i - muy) ** 2, py))

    ksum = np.bincount((ii + jj).ravel().astype(np.int64), weights=p.ravel(), minlength=2 * ng + 1)
    pxy_sum = ksum[2:]  # index k = 2 .. 2 ng
    k = np.arange(2, 2 * ng + 1, dtype=np.float64)
    dsum = np.bincount(
        np.abs(ii - jj).ravel().astype(np.int64), weights=p.ravel(), minlength=ng
    )
    pxy_diff = dsum[:ng]  # index d = 0 .. ng-1
    d = np.arange(ng, dtype=np.float64)

    hxy = -float(_xlog2(p).sum())
    hx = -float(_xlog2(px).sum())
    hy = -float(_xlog2(py).sum())
    pij = np.outer(px, py)
    nz = p > 0
    hxy1 = -float(np.sum(p[nz] * np.log2(pij[nz])))
    hxy2 = -float(_xlog2(pij).sum())

    sum_avg = float(np.dot(k, pxy_sum))
    diff_avg = float(np.dot(d, pxy_diff))
    denom = max(hx, hy)
    imc1 = (hxy - hxy1) / denom if denom > 0 else 0.0
    imc2 = float(np.sqrt(1.0 - np.exp(-2.0 * max(hxy2 - hxy, 0.0))))
    cdev = ii + jj - mux - muy
    sxsy = np.sqrt(varx) * np.sqrt(vary)
    corr = (float((ii * jj * p).sum()) - mux * muy) / sxsy if sxsy > 0 else 1.0

    # The third central moment of i+j cancels catastrophically when summed in
    # doubles (huge cubes, near-zero result), so ClusterShade is assembled
    # from exact integer power sums of the i+j count histogram.
    csum = np.bincount(
        (ii + jj).ravel().astype(np.int64), weights=m.counts.ravel(), minlength=2 * ng + 1
    ).astype(np.int64)
    s1 = s2 = s3 = 0
    for s, c in enumerate(csum[2:].tolist(), start=2):
        s1 += c * s
        s2 += c * s * s
        s3 += c * s * s * s
    t_i = int(total)
    shade = (s3 * t_i * t_i - 3 * s1 * s2 * t_i + 2 * s1**3) / t_i**3

    return {
        "Energy": float((p * p).sum()),
        "Contrast": float(((ii - jj) ** 2 * p).sum()),
        "Correlation": corr,
        "Variance": float(((ii - mux) ** 2 * p).sum()),
        "InverseDifferenceMoment": float((p / (1.0 + (ii - jj) ** 2)).sum()),
        "SumAverage": sum_avg,
        "SumVariance": float(np.dot((k - sum_avg) ** 2, pxy_sum)),
        "SumEntropy": -float(_xlog2(pxy_sum).sum()),
        "Entropy": hxy,
        "DifferenceVariance": float(np.dot((d - diff_avg) ** 2, pxy_diff)),
        "DifferenceEntropy": -float(_xlog2(pxy_diff).sum()),
        "Imc1": imc1,
        "Imc2": imc2,
        "MaximumProbability": float(p.max()),
        "Autocorrelation": float((ii * jj * p).sum()),
        "Dissimilarity": float((np.abs(ii - jj) * p).sum()),
        "ClusterShade": shade,
        "ClusterProminence": float((cdev**4 * p).sum()),
        "ClusterTendency": float((cdev**2 * p).sum()),
        "InverseDifference": float((p / (1.0 + np.abs(ii - jj))).sum()),
        "InverseDifferenceMomentNormalized": float(
            (p / (1.0 + (ii - jj) ** 2 / float(ng * ng))).sum()
        ),
    }


def _run_lengths(line: np.ndarray):
    # Maximal runs of a 1D array that may contain -1 sentinels; returns
    # (level, length) arrays for the non-sentinel runs.
    edge = np.flatnonzero(line[1:] != line[:-1])
    starts = np.concatenate(([0], edge + 1))
    ends = np.concatenate((edge + 1, [line.size]))
    vals = line[starts]
    keep = vals >= 0
    return vals[keep], (ends - starts)[keep]


def glrlm_accumulate(patch: QuantizedPatch) -> RunLengthMatrix:
    """Count maximal equal-level runs along the four directions.

    Rows, columns and both diagonal families are each decomposed into
    maximal runs; all runs land in one (ng, max(width, height)) matrix, so
    sum of counts[i][j] * j equals 4 * npixels.
    """
    lv = patch.levels
    ng = patch.ng
    h, w = lv.shape
    rmax = max(h, w)
    counts = np.zeros((ng, rmax), dtype=np.int64)

    # horizontal and vertical: rows (columns) separated by sentinels
    for arr in (lv, lv.T):
        flat = np.hstack((arr, np.full((arr.shape[0], 1), -1, dtype=np.int64))).ravel()
        vals, lens = _run_lengths(flat)
        np.add.at(counts, (vals, lens - 1), 1)

    # diagonals: shear so each diagonal becomes a column, then scan columns
    pad = np.full((h, h), -1, dtype=np.int64)
    for flip in (False, True):
        a = lv[:, ::-1] if flip else lv
        sheared = np.hstack((pad, a, pad))
        rows = np.arange(h)[:, np.newaxis]
        cols = np.arange(h + w - 1)[np.newaxis, :] + (h - 1) - rows + 1
        diag = np.take_along_axis(sheared, cols, axis=1)
        flat = np.vstack((diag, np.full((1, diag.shape[1]), -1, dtype=np.int64))).T.ravel()
        vals, lens = _run_lengths(flat)
        np.add.at(counts, (vals, lens - 1), 1)

    return RunLengthMatrix(counts, ng, rmax, h * w)


def glrlm_features(m: RunLengthMatrix) -> dict:
    """Evaluate the 16 run-length features.

    With r(i,j) the run counts, Nr = sum r, p = r/Nr, marginals
    r_i = sum_j r and r_j = sum_i r, and S = sum j r(i,j) (pixel mass):

      ShortRunEmphasis              (1/Nr) sum r / j^2
      LongRunEmphasis               (1/Nr) sum r j^2
      GrayLevelNonUniformity        (1/Nr) sum_i r_i^2
      GrayLevelNonUniformityNormalized   (1/Nr^2) sum_i r_i^2
      RunLengthNonUniformity        (1/Nr) sum_j r_j^2
      RunLengthNonUniformityNormalized   (1/Nr^2) sum_j r_j^2
      RunPercentage                 Nr / S
      GrayLevelVariance             sum p (i - mu_i)^2
      RunLengthVariance             sum p (j - mu_j)^2
      RunEntropy                    -sum p log2 p
      LowGrayLevelRunEmphasis       (1/Nr) sum r / i^2
      HighGrayLevelRunEmphasis      (1/Nr) sum r i^2
      ShortRunLowGrayLevelEmphasis  (1/Nr) sum r / (i^2 j^2)
      ShortRunHighGrayLevelEmphasis (1/Nr) sum r i^2 / j^2
      LongRunLowGrayLevelEmphasis   (1/Nr) sum r j^2 / i^2
      LongRunHighGrayLevelEmphasis  (1/Nr) sum r i^2 j^2
    """
    nr = m.nruns
    if nr <= 0:
        raise ValueError("empty run-length matrix")
    r = m.counts.astype(np.float64)
    i = np.arange(1, m.ng + 1, dtype=np.float64)[:, np.newaxis]
    j = np.arange(1, m.rmax + 1, dtype=np.float64)[np.newaxis, :]
    ri = r.sum(axis=1)
    rj = r.sum(axis=0)
    p = r / nr
    mu_i = float((p * i).sum())
    mu_j = float((p * j).sum())
    pixel_mass = float((r * j).sum())

    return {
        "ShortRunEmphasis": float((r / (j * j)).sum()) / nr,
        "LongRunEmphasis": float((r * j * j).sum()) / nr,
        "GrayLevelNonUniformity": float((ri * ri).sum()) / nr,
        "GrayLevelNonUniformityNormalized": float((ri * ri).sum()) / (nr * nr),
        "RunLengthNonUniformity": float((rj * rj).sum()) / nr,
        "RunLengthNonUniformityNormalized": float((rj * rj).sum()) / (nr * nr),
        "RunPercentage": nr / pixel_mass,
        "GrayLevelVariance": float((p * (i - mu_i) ** 2).sum()),
        "RunLengthVariance": float((p * (j - mu_j) ** 2).sum()),
        "RunEntropy": -float(_xlog2(p).sum()),
        "LowGrayLevelRunEmphasis": float((r / (i * i)).sum()) / nr,
        "HighGrayLevelRunEmphasis": float((r * i * i).sum()) / nr,
        "ShortRunLowGrayLevelEmphasis": float((r / (i * i * j * j)).sum()) / nr,
        "ShortRunHighGrayLevelEmphasis": float((r * i * i / (j * j)).sum()) / nr,
        "LongRunLowGrayLevelEmphasis": float((r * j * j / (i * i)).sum()) / nr,
        "LongRunHighGrayLevelEmphasis": float((r * i * i * j * j).sum()) / nr,
    }


def feature_vector(patch: QuantizedPatch) -> FeatureVector:
    """All 37 features of one patch, canonical order."""
    return FeatureVector(
        glcm=glcm_features(glcm_accumulate(patch)),
        glrlm=glrlm_features(glrlm_accumulate(patch)),
    )
