# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the sliding-window feature map sweep.

Per output row, the window's co-occurrence counts are updated incrementally
as the window slides one column (pairs touching the departing column are
subtracted, pairs touching the arriving column added); run counts are
rebuilt per window from precomputed per-band segment-end tables, so every
walk jumps segment to segment instead of scanning pixels. Features are
evaluated in double precision from exact integer counts, with n*log2(n)
lookup tables shared by all windows.

Rows are computed independently of band grouping; output is bitwise
identical for any thread count.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt
from libc.string cimport memset

cnp.import_array()

BACKEND = "compiled"

ctypedef long long i64

cdef extern from *:
    ctypedef long long i128 "__int128"

cdef struct Scratch:
    const double* logtab
    const double* invsq
    const double* w_idm
    const double* w_id
    const double* w_idmn
    int* glcm
    int* rlm
    i64* cx
    i64* ksum
    i64* dsum
    i64* ri
    i64* rj
    int* hend
    int* dend1
    int* dend2
    int* vr_val
    int* vr_len
    int* nv


cdef inline void _pair(int* g, int ng, int a, int b, int delta) noexcept nogil:
    g[a * ng + b] += delta
    g[b * ng + a] += delta


cdef void _glcm_build(const int* band, int wp, int k, int ng, int* g) noexcept nogil:
    cdef int i, c
    memset(g, 0, ng * ng * sizeof(int))
    for i in range(k):
        for c in range(k - 1):
            _pair(g, ng, band[i * wp + c], band[i * wp + c + 1], 1)
    for i in range(k - 1):
        for c in range(k):
            _pair(g, ng, band[i * wp + c], band[(i + 1) * wp + c], 1)
        for c in range(k - 1):
            _pair(g, ng, band[i * wp + c], band[(i + 1) * wp + c + 1], 1)
        for c in range(1, k):
            _pair(g, ng, band[i * wp + c], band[(i + 1) * wp + c - 1], 1)


cdef void _glcm_slide(const int* band, int wp, int k, int ng, int x0, int* g) noexcept nogil:
    # window moved from x0-1 to x0: drop pairs touching column x0-1 inside
    # the old window, add pairs touching column x0+k-1 inside the new one
    cdef int i, dep = x0 - 1, arr = x0 + k - 1
    for i in range(k):
        _pair(g, ng, band[i * wp + dep], band[i * wp + dep + 1], -1)
        _pair(g, ng, band[i * wp + arr - 1], band[i * wp + arr], 1)
    for i in range(k - 1):
        _pair(g, ng, band[i * wp + dep], band[(i + 1) * wp + dep], -1)
        _pair(g, ng, band[i * wp + dep], band[(i + 1) * wp + dep + 1], -1)
        _pair(g, ng, band[i * wp + dep + 1], band[(i + 1) * wp + dep], -1)
        _pair(g, ng, band[i * wp + arr], band[(i + 1) * wp + arr], 1)
        _pair(g, ng, band[i * wp + arr - 1], band[(i + 1) * wp + arr], 1)
        _pair(g, ng, band[i * wp + arr], band[(i + 1) * wp + arr - 1], 1)


cdef void _glcm_eval(Scratch* ws, int ng, double* o) noexcept nogil:
    cdef int i, j, s, d, n, nnzx = 0
    cdef i64 total = 0, e2 = 0, sij = 0, maxn = 0, sai = 0, dai = 0
    cdef i64 con_i = 0, ns, nd, c, sk2 = 0, sk3 = 0, svi
    cdef i128 n3, tt
    cdef double td, ent_s = 0, hx_s = 0, se_s = 0, de_s = 0
    cdef double mu, varx, hx, ent, sument, diffent, sumavg, diffavg
    cdef double sumvar = 0, diffvar = 0, m2 = 0, m3 = 0, m4 = 0
    cdef double idm = 0, invd = 0, idmn = 0, cd, c2, sv, info, denom, corr, imc1

    for i in range(ng):
        ws.cx[i] = 0
    for s in range(2 * ng - 1):
        ws.ksum[s] = 0
    for d in range(ng):
        ws.dsum[d] = 0
    for i in range(ng):
        for j in range(ng):
            n = ws.glcm[i * ng + j]
            if n != 0:
                ws.cx[i] += n
                ws.ksum[i + j] += n
                ws.dsum[i - j if i >= j else j - i] += n
                e2 += <i64> n * n
                ent_s += ws.logtab[n]
                if n > maxn:
                    maxn = n
                sij += <i64> n * (i + 1) * (j + 1)
    for i in range(ng):
        c = ws.cx[i]
        if c > 0:
            nnzx += 1
            total += c
            sai += c * (i + 1)
            hx_s += ws.logtab[c]
    td = <double> total
    mu = <double> sai / td
    varx = 0
    for i in range(ng):
        c = ws.cx[i]
        if c > 0:
            varx += <double> c * ((i + 1) - mu) * ((i + 1) - mu)
    varx /= td
    ent = (ws.logtab[total] - ent_s) / td
    if ent < 0:
        ent = 0
    hx = 0.0
    if nnzx > 1:
        hx = (ws.logtab[total] - hx_s) / td
        if hx < 0:
            hx = 0

    sai = 0
    for s in range(2 * ng - 1):
        ns = ws.ksum[s]
        if ns != 0:
            svi = s + 2
            sai += ns * svi
            sk2 += ns * svi * svi
            sk3 += ns * svi * svi * svi
            se_s += ws.logtab[ns]
    sumavg = <double> sai / td
    sument = (ws.logtab[total] - se_s) / td
    if sument < 0:
        sument = 0
    for s in range(2 * ng - 1):
        ns = ws.ksum[s]
        if ns != 0:
            sv = (s + 2) - sumavg
            sumvar += <double> ns * sv * sv
            cd = (s + 2) - 2 * mu
            c2 = cd * cd
            m2 += <double> ns * c2
            m4 += <double> ns * c2 * c2
    sumvar /= td
    m2 /= td
    m4 /= td
    # The third central moment cancels catastrophically when summed in
    # doubles (huge cubes, near-zero result), so it is assembled from exact
    # integer power sums of the i+j histogram instead; 128-bit intermediates
    # keep S3*T^2 exact for any window size.
    tt = total
    n3 = (<i128> sk3) * tt * tt - 3 * (<i128> sai) * sk2 * tt + 2 * (<i128> sai) * sai * sai
    m3 = <double> n3 / (td * td * td)

    for d in range(ng):
        nd = ws.dsum[d]
        if nd != 0:
            dai += nd * d
            de_s += ws.logtab[nd]
            con_i += nd * d * d
            idm += <double> nd * ws.w_idm[d]
            invd += <double> nd * ws.w_id[d]
            idmn += <double> nd * ws.w_idmn[d]
    diffavg = <double> dai / td
    diffent = (ws.logtab[total] - de_s) / td
    if diffent < 0:
        diffent = 0
    for d in range(ng):
        nd = ws.dsum[d]
        if nd != 0:
            sv = d - diffavg
            diffvar += <double> nd * sv * sv
    diffvar /= td

    corr = 1.0
    if varx > 0:
        corr = (<double> sij / td - mu * mu) / varx
    imc1 = 0.0
    denom = hx
    if denom > 0:
        imc1 = (ent - 2 * hx) / denom
    info = 2 * hx - ent
    if info < 0:
        info = 0

    o[0] = <double> e2 / (td * td)
    o[1] = <double> con_i / td
    o[2] = corr
    o[3] = varx
    o[4] = idm / td
    o[5] = sumavg
    o[6] = sumvar
    o[7] = sument
    o[8] = ent
    o[9] = diffvar
    o[10] = diffent
    o[11] = imc1
    o[12] = sqrt(1.0 - exp(-2.0 * info))
    o[13] = <double> maxn / td
    o[14] = <double> sij / td
    o[15] = <double> dai / td
    o[16] = m3
    o[17] = m4
    o[18] = m2
    o[19] = invd / td
    o[20] = idmn / td


cdef void _rlm_eval(Scratch* ws, int ng, int k, double* o) noexcept nogil:
    cdef int i, j, n
    cdef i64 nr = 0, pix = 0, gln_i = 0, rln_i = 0
    cdef double nrd, run_s = 0, mu, acc
    cdef double sre = 0, lre = 0, lgl = 0, hgl = 0, srl = 0, srh = 0, lrl = 0, lrh = 0
    cdef double di, wj, wi

    for i in range(ng):
        ws.ri[i] = 0
    for j in range(k):
        ws.rj[j] = 0
    for i in range(ng):
        for j in range(k):
            n = ws.rlm[i * k + j]
            if n != 0:
                ws.ri[i] += n
                ws.rj[j] += n
                nr += n
                pix += <i64> n * (j + 1)
                run_s += ws.logtab[n]
                di = <double> n
                wi = <double> ((i + 1) * (i + 1))
                wj = <double> ((j + 1) * (j + 1))
                sre += di * ws.invsq[j + 1]
                lre += di * wj
                lgl += di * ws.invsq[i + 1]
                hgl += di * wi
                srl += di * ws.invsq[i + 1] * ws.invsq[j + 1]
                srh += di * wi * ws.invsq[j + 1]
                lrl += di * wj * ws.invsq[i + 1]
                lrh += di * wi * wj
    nrd = <double> nr
    for i in range(ng):
        gln_i += ws.ri[i] * ws.ri[i]
    for j in range(k):
        rln_i += ws.rj[j] * ws.rj[j]

    acc = 0
    for i in range(ng):
        acc += <double> ws.ri[i] * (i + 1)
    mu = acc / nrd
    acc = 0
    for i in range(ng):
        if ws.ri[i] != 0:
            acc += <double> ws.ri[i] * ((i + 1) - mu) * ((i + 1) - mu)
    o[28] = acc / nrd

    acc = 0
    for j in range(k):
        acc += <double> ws.rj[j] * (j + 1)
    mu = acc / nrd
    acc = 0
    for j in range(k):
        if ws.rj[j] != 0:
            acc += <double> ws.rj[j] * ((j + 1) - mu) * ((j + 1) - mu)
    o[29] = acc / nrd

    acc = (ws.logtab[nr] - run_s) / nrd
    if acc < 0:
        acc = 0
    o[21] = sre / nrd
    o[22] = lre / nrd
    o[23] = <double> gln_i / nrd
    o[24] = <double> gln_i / (nrd * nrd)
    o[25] = <double> rln_i / nrd
    o[26] = <double> rln_i / (nrd * nrd)
    o[27] = nrd / <double> pix
    o[30] = acc
    o[31] = lgl / nrd
    o[32] = hgl / nrd
    o[33] = srl / nrd
    o[34] = srh / nrd
    o[35] = lrl / nrd
    o[36] = lrh / nrd


cdef void _row(const int* padded, int wp, int y, int k, int ng, int w_out,
               double* out_row, Scratch* ws) noexcept nogil:
    cdef const int* band = padded + y * wp
    cdef int i, c, j, t, x0, xe, e, lim, run_len, nruns
    cdef double* o

    # segment-end tables for the band: last column of the maximal segment
    # containing each cell, along rows and both diagonal families
    for i in range(k):
        ws.hend[i * wp + wp - 1] = wp - 1
        for c in range(wp - 2, -1, -1):
            if band[i * wp + c + 1] == band[i * wp + c]:
                ws.hend[i * wp + c] = ws.hend[i * wp + c + 1]
            else:
                ws.hend[i * wp + c] = c
    for c in range(wp):
        ws.dend1[(k - 1) * wp + c] = c
        ws.dend2[(k - 1) * wp + c] = c
    for i in range(k - 2, -1, -1):
        for c in range(wp):
            if c + 1 < wp and band[(i + 1) * wp + c + 1] == band[i * wp + c]:
                ws.dend1[i * wp + c] = ws.dend1[(i + 1) * wp + c + 1]
            else:
                ws.dend1[i * wp + c] = c
            if c - 1 >= 0 and band[(i + 1) * wp + c - 1] == band[i * wp + c]:
                ws.dend2[i * wp + c] = ws.dend2[(i + 1) * wp + c - 1]
            else:
                ws.dend2[i * wp + c] = c
    # vertical run list per column (window-independent: full band height)
    for c in range(wp):
        nruns = 0
        i = 0
        while i < k:
            j = i + 1
            while j < k and band[j * wp + c] == band[i * wp + c]:
                j += 1
            ws.vr_val[c * k + nruns] = band[i * wp + c]
            ws.vr_len[c * k + nruns] = j - i
            nruns += 1
            i = j
        ws.nv[c] = nruns

    for x0 in range(w_out):
        if x0 == 0:
            _glcm_build(band, wp, k, ng, ws.glcm)
        else:
            _glcm_slide(band, wp, k, ng, x0, ws.glcm)
        o = out_row + x0 * 37
        _glcm_eval(ws, ng, o)

        xe = x0 + k - 1
        memset(ws.rlm, 0, ng * k * sizeof(int))
        for c in range(x0, xe + 1):
            for t in range(ws.nv[c]):
                ws.rlm[ws.vr_val[c * k + t] * k + ws.vr_len[c * k + t] - 1] += 1
        for i in range(k):
            c = x0
            while c <= xe:
                e = ws.hend[i * wp + c]
                if e > xe:
                    e = xe
                run_len = e - c + 1
                ws.rlm[band[i * wp + c] * k + run_len - 1] += 1
                c += run_len
        for t in range(2 * k - 1):
            if t < k:
                i = 0
                c = x0 + t
            else:
                i = t - k + 1
                c = x0
            while i < k and c <= xe:
                e = ws.dend1[i * wp + c]
                lim = c + (k - 1 - i)
                if xe < lim:
                    lim = xe
                if e > lim:
                    e = lim
                run_len = e - c + 1
                ws.rlm[band[i * wp + c] * k + run_len - 1] += 1
                i += run_len
                c += run_len
        for t in range(2 * k - 1):
            if t < k:
                i = 0
                c = x0 + t
            else:
                i = t - k + 1
                c = xe
            while i < k and c >= x0:
                e = ws.dend2[i * wp + c]
                lim = c - (k - 1 - i)
                if lim < x0:
                    lim = x0
                if e < lim:
                    e = lim
                run_len = c - e + 1
                ws.rlm[band[i * wp + c] * k + run_len - 1] += 1
                i += run_len
                c -= run_len
        _rlm_eval(ws, ng, k, o)


def run_band(padded, int y0, int y1, int k, int ng, out):
    """Fill out[y0:y1] with all 37 features; out is (H, W, 37) float64."""
    cdef cnp.ndarray[cnp.int32_t, ndim=2, mode="c"] pad = np.ascontiguousarray(
        padded, dtype=np.int32
    )
    cdef cnp.ndarray[cnp.float64_t, ndim=3, mode="c"] res = out
    cdef int wp = pad.shape[1]
    cdef int w_out = res.shape[1]
    cdef i64 total = 4 * (k - 1) * (2 * k - 1)
    cdef int mx = ng if ng > k else k
    cdef int y

    n = np.arange(total + 1, dtype=np.float64)
    logtab_a = np.zeros(total + 1, dtype=np.float64)
    logtab_a[1:] = n[1:] * np.log2(n[1:])
    invsq_a = np.zeros(mx + 1, dtype=np.float64)
    invsq_a[1:] = 1.0 / (np.arange(1, mx + 1, dtype=np.float64) ** 2)
    d = np.arange(ng, dtype=np.float64)
    w_idm_a = 1.0 / (1.0 + d * d)
    w_id_a = 1.0 / (1.0 + d)
    w_idmn_a = 1.0 / (1.0 + d * d / float(ng * ng))

    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] logtab = logtab_a
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] invsq = invsq_a
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] w_idm = w_idm_a
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] w_id = w_id_a
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] w_idmn = w_idmn_a

    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] glcm = np.empty(ng * ng, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] rlm = np.empty(ng * k, dtype=np.int32)
    cdef cnp.ndarray[cnp.int64_t, ndim=1, mode="c"] cx = np.empty(ng, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1, mode="c"] ksum = np.empty(2 * ng - 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1, mode="c"] dsum = np.empty(ng, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1, mode="c"] ri = np.empty(ng, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1, mode="c"] rj = np.empty(k, dtype=np.int64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] hend = np.empty(k * wp, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] dend1 = np.empty(k * wp, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] dend2 = np.empty(k * wp, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] vr_val = np.empty(wp * k, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] vr_len = np.empty(wp * k, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] nv = np.empty(wp, dtype=np.int32)

    cdef Scratch ws
    ws.logtab = &logtab[0]
    ws.invsq = &invsq[0]
    ws.w_idm = &w_idm[0]
    ws.w_id = &w_id[0]
    ws.w_idmn = &w_idmn[0]
    ws.glcm = <int*> &glcm[0]
    ws.rlm = <int*> &rlm[0]
    ws.cx = <i64*> &cx[0]
    ws.ksum = <i64*> &ksum[0]
    ws.dsum = <i64*> &dsum[0]
    ws.ri = <i64*> &ri[0]
    ws.rj = <i64*> &rj[0]
    ws.hend = <int*> &hend[0]
    ws.dend1 = <int*> &dend1[0]
    ws.dend2 = <int*> &dend2[0]
    ws.vr_val = <int*> &vr_val[0]
    ws.vr_len = <int*> &vr_len[0]
    ws.nv = <int*> &nv[0]

    with nogil:
        for y in range(y0, y1):
            _row(<const int*> &pad[0, 0], wp, y, k, ng, w_out,
                 <double*> &res[y, 0, 0], &ws)
