"""Vectorized numpy backend for the sliding-window feature map sweep.

Each output row is computed independently from the padded level image, so
results do not depend on how rows are grouped into bands. Per row, pair
counts for all windows are built from per-column code histograms plus a
cumulative-sum slide, and run counts from the band's maximal segments
clipped to each window.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _pair_views(band: np.ndarray, which: str):
    if which == "h":
        return band[:, :-1], band[:, 1:], band.shape[1] - 1
    if which == "v":
        return band[:-1, :], band[1:, :], band.shape[1]
    if which == "d1":
        return band[:-1, :-1], band[1:, 1:], band.shape[1] - 1
    return band[:-1, 1:], band[1:, :-1], band.shape[1] - 1


def _glcm_counts(band: np.ndarray, k: int, ng: int, w_out: int) -> np.ndarray:
    """Merged symmetric pair counts for every window of the band, (W, ng, ng)."""
    ng2 = ng * ng
    total = np.zeros((w_out, ng2), dtype=np.int64)
    for which in ("h", "v", "d1", "d2"):
        a, b, ncols = _pair_views(band, which)
        width = k if which == "v" else k - 1
        offs = np.arange(ncols, dtype=np.int64) * ng2
        code_ab = a.astype(np.int64) * ng + b
        code_ba = b.astype(np.int64) * ng + a
        m = np.bincount((code_ab + offs).ravel(), minlength=ncols * ng2)
        m += np.bincount((code_ba + offs).ravel(), minlength=ncols * ng2)
        m = m.reshape(ncols, ng2)
        z = np.vstack((np.zeros((1, ng2), dtype=np.int64), np.cumsum(m, axis=0)))
        x = np.arange(w_out)
        total += z[x + width] - z[x]
    return total.reshape(w_out, ng, ng)


def _xlog2(v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    nz = v > 0
    out[nz] = v[nz] * np.log2(v[nz])
    return out


def _eval_glcm(counts: np.ndarray, ng: int) -> np.ndarray:
    """21 features for a batch of count matrices (W, ng, ng) -> (W, 21)."""
    t = counts.sum(axis=(1, 2)).astype(np.float64)
    p = counts / t[:, np.newaxis, np.newaxis]
    i = np.arange(1, ng + 1, dtype=np.float64)
    ii, jj = np.meshgrid(i, i, indexing="ij")
    px = p.sum(axis=2)
    py = p.sum(axis=1)
    mux = px @ i
    muy = py @ i
    varx = ((i - mux[:, np.newaxis]) ** 2 * px).sum(axis=1)
    vary = ((i - muy[:, np.newaxis]) ** 2 * py).sum(axis=1)

    pf = p[:, ::-1, :]
    psum = np.stack(
        [
            np.diagonal(pf, offset=o, axis1=1, axis2=2).sum(axis=-1)
            for o in range(-(ng - 1), ng)
        ],
        axis=1,
    )  # column s-2 holds the i+j = s mass, s = 2 .. 2 ng
    pdiff = np.stack(
        [np.diagonal(p, offset=0, axis1=1, axis2=2).sum(axis=-1)]
        + [
            np.diagonal(p, offset=d, axis1=1, axis2=2).sum(axis=-1)
            + np.diagonal(p, offset=-d, axis1=1, axis2=2).sum(axis=-1)
            for d in range(1, ng)
        ],
        axis=1,
    )  # column d holds the |i-j| = d mass
    kv = np.arange(2, 2 * ng + 1, dtype=np.float64)
    dv = np.arange(ng, dtype=np.float64)

    # The third central moment of i+j cancels catastrophically when summed
    # in doubles (huge cubes, near-zero result), so ClusterShade is assembled
    # from exact integer power sums of the i+j count histogram instead.
    cf = counts[:, ::-1, :]
    ks = np.stack(
        [
            np.diagonal(cf, offset=o, axis1=1, axis2=2).sum(axis=-1)
            for o in range(-(ng - 1), ng)
        ],
        axis=1,
    )
    sv = np.arange(2, 2 * ng + 1, dtype=np.int64)
    s1 = ks @ sv
    s2 = ks @ (sv * sv)
    s3 = ks @ (sv * sv * sv)
    ti = counts.sum(axis=(1, 2))
    if 3 * (2 * ng) ** 3 * int(ti.max()) ** 3 < 2**63:
        n3 = s3 * ti * ti - 3 * s1 * s2 * ti + 2 * s1 * s1 * s1
        shade = n3.astype(np.float64) / (t * t * t)
    else:  # windows big enough to overflow int64: exact python ints, slow path
        shade = np.array(
            [
                (int(a3) * w * w - 3 * int(a1) * int(a2) * w + 2 * int(a1) ** 3) / w**3
                for a1, a2, a3, w in zip(s1, s2, s3, (int(v) for v in ti))
            ],
            dtype=np.float64,
        )

    hxy = -_xlog2(p).sum(axis=(1, 2))
    hx = -_xlog2(px).sum(axis=1)
    hy = -_xlog2(py).sum(axis=1)
    sum_avg = psum @ kv
    diff_avg = pdiff @ dv
    denom = np.maximum(hx, hy)
    info = hx + hy - hxy  # = HXY1 - HXY = HXY2 - HXY for empirical marginals
    imc1 = np.divide(-info, denom, out=np.zeros_like(denom), where=denom > 0)
    imc2 = np.sqrt(1.0 - np.exp(-2.0 * np.maximum(info, 0.0)))
    sxsy = np.sqrt(varx) * np.sqrt(vary)
    autoc = np.einsum("wij,ij->w", p, ii * jj)
    corr = np.where(
        sxsy > 0,
        (autoc - mux * muy) / np.where(sxsy > 0, sxsy, 1.0),
        1.0,
    )
    cdev = kv[np.newaxis, :] - (mux + muy)[:, np.newaxis]

    cols = [
        (p * p).sum(axis=(1, 2)),
        pdiff @ (dv * dv),
        corr,
        ((i - mux[:, np.newaxis]) ** 2 * px).sum(axis=1),
        pdiff @ (1.0 / (1.0 + dv * dv)),
        sum_avg,
        ((kv[np.newaxis, :] - sum_avg[:, np.newaxis]) ** 2 * psum).sum(axis=1),
        -_xlog2(psum).sum(axis=1),
        hxy,
        ((dv[np.newaxis, :] - diff_avg[:, np.newaxis]) ** 2 * pdiff).sum(axis=1),
        -_xlog2(pdiff).sum(axis=1),
        imc1,
        imc2,
        p.max(axis=(1, 2)),
        autoc,
        pdiff @ dv,
        shade,
        (cdev**4 * psum).sum(axis=1),
        (cdev**2 * psum).sum(axis=1),
        pdiff @ (1.0 / (1.0 + dv)),
        pdiff @ (1.0 / (1.0 + dv * dv / float(ng * ng))),
    ]
    return np.stack(cols, axis=1)


def _segments(flat: np.ndarray):
    # RLE of a sentinel-separated 1D array: (value, start, length) arrays
    edge = np.flatnonzero(flat[1:] != flat[:-1])
    starts = np.concatenate(([0], edge + 1))
    lens = np.diff(np.concatenate((starts, [flat.size])))
    vals = flat[starts]
    keep = vals >= 0
    return vals[keep], starts[keep], lens[keep]


def _expand_spans(lo: np.ndarray, hi: np.ndarray):
    # all integers of [lo_i, hi_i] per row, with the owning row index
    n = hi - lo + 1
    total = int(n.sum())
    seg = np.repeat(np.arange(lo.size), n)
    x = np.arange(total) - np.repeat(np.cumsum(n) - n, n) + np.repeat(lo, n)
    return x, seg


def _glrlm_counts(band: np.ndarray, k: int, ng: int, w_out: int) -> np.ndarray:
    """Run counts for every window of the band, (ng, k, W)."""
    kk = band.shape[0]
    wp = band.shape[1]
    neg_col = np.full((kk, 1), -1, dtype=np.int64)

    # vertical runs: never clipped; a column's runs belong to every window
    # containing that column, accumulated as interval differences over x
    diff = np.zeros((ng, k, w_out + 1), dtype=np.int64)
    flat = np.hstack((band.T, np.full((wp, 1), -1, dtype=np.int64))).ravel()
    vals, starts, lens = _segments(flat)
    col = starts // (kk + 1)
    lo = np.maximum(col - k + 1, 0)
    hi = np.minimum(col, w_out - 1)
    np.add.at(diff, (vals, lens - 1, lo), 1)
    np.add.at(diff, (vals, lens - 1, hi + 1), -1)
    counts = np.cumsum(diff, axis=2)[:, :, :w_out]

    # horizontal and diagonal segments: clipped length depends on the window
    segsets = []
    flat = np.hstack((band, neg_col)).ravel()
    vals, starts, lens = _segments(flat)
    cmin = starts % (wp + 1)
    segsets.append((vals, cmin, cmin + lens - 1))

    pad = np.full((kk, kk), -1, dtype=np.int64)
    rows = np.arange(kk)[:, np.newaxis]
    tcols = np.arange(kk + wp - 1)[np.newaxis, :] + kk - rows
    for flip in (False, True):
        a = band[:, ::-1] if flip else band
        sheared = np.hstack((pad, a, pad))
        diag = np.take_along_axis(sheared, tcols, axis=1)
        flat = np.vstack((diag, np.full((1, diag.shape[1]), -1, dtype=np.int64))).T.ravel()
        vals, starts, lens = _segments(flat)
        t = starts // (kk + 1)
        r0 = starts % (kk + 1)
        r1 = r0 + lens - 1
        cmin = t - r1
        cmax = t - r0
        if flip:
            cmin, cmax = wp - 1 - cmax, wp - 1 - cmin
        segsets.append((vals, cmin, cmax))

    for vals, cmin, cmax in segsets:
        lo = np.maximum(cmin - k + 1, 0)
        hi = np.minimum(cmax, w_out - 1)
        x, seg = _expand_spans(lo, hi)
        ln = np.minimum(cmax[seg], x + k - 1) - np.maximum(cmin[seg], x) + 1
        np.add.at(counts, (vals[seg], ln - 1, x), 1)
    return counts


def _eval_glrlm(counts: np.ndarray) -> np.ndarray:
    """16 features for batched run matrices (ng, k, W) -> (W, 16)."""
    ng, k, _ = counts.shape
    r = counts.astype(np.float64)
    nr = r.sum(axis=(0, 1))
    i = np.arange(1, ng + 1, dtype=np.float64)[:, np.newaxis, np.newaxis]
    j = np.arange(1, k + 1, dtype=np.float64)[np.newaxis, :, np.newaxis]
    ri = r.sum(axis=1)
    rj = r.sum(axis=0)
    p = r / nr
    mu_i = (p * i).sum(axis=(0, 1))
    mu_j = (p * j).sum(axis=(0, 1))

    cols = [
        (r / (j * j)).sum(axis=(0, 1)) / nr,
        (r * j * j).sum(axis=(0, 1)) / nr,
        (ri * ri).sum(axis=0) / nr,
        (ri * ri).sum(axis=0) / (nr * nr),
        (rj * rj).sum(axis=0) / nr,
        (rj * rj).sum(axis=0) / (nr * nr),
        nr / (r * j).sum(axis=(0, 1)),
        (p * (i - mu_i) ** 2).sum(axis=(0, 1)),
        (p * (j - mu_j) ** 2).sum(axis=(0, 1)),
        -_xlog2(p).sum(axis=(0, 1)),
        (r / (i * i)).sum(axis=(0, 1)) / nr,
        (r * i * i).sum(axis=(0, 1)) / nr,
        (r / (i * i * j * j)).sum(axis=(0, 1)) / nr,
        (r * i * i / (j * j)).sum(axis=(0, 1)) / nr,
        (r * j * j / (i * i)).sum(axis=(0, 1)) / nr,
        (r * i * i * j * j).sum(axis=(0, 1)) / nr,
    ]
    return np.stack(cols, axis=1)


def run_band(padded: np.ndarray, y0: int, y1: int, k: int, ng: int, out: np.ndarray) -> None:
    """Fill out[y0:y1] with all 37 features; out is (H, W, 37)."""
    w_out = out.shape[1]
    lv = padded.astype(np.int64)
    for y in range(y0, y1):
        band = lv[y : y + k]
        out[y, :, :21] = _eval_glcm(_glcm_counts(band, k, ng, w_out), ng)
        out[y, :, 21:] = _eval_glrlm(_glrlm_counts(band, k, ng, w_out))
