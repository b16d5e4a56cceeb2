# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled detection kernels.

Per-trial loops over split real/imaginary storage; the operation order
matches ``_pykernels`` exactly.  Loops run without the GIL so harness
threads can share the work.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, round, exp

cnp.import_array()

cdef double SINGULAR_RTOL = 1e-12

# symbol s carries bits (s // 2, s % 2); hypothesis h = 4 * s1 + s2
cdef int[4] SYM_BR = [0, 0, 1, 1]
cdef int[4] SYM_BI = [0, 1, 0, 1]


cdef inline double sgn(double v) noexcept nogil:
    return 1.0 if v >= 0.0 else -1.0


cdef struct Tri:
    double r11, r12r, r12i, r22
    double w1r, w1i, w2r, w2i


cdef inline void qr_w(double ar, double ai, double br, double bi,
                      double cr, double ci, double dr, double di,
                      double y1r, double y1i, double y2r, double y2i,
                      Tri* t) noexcept nogil:
    cdef double r11 = sqrt(((ar * ar + ai * ai) + cr * cr) + ci * ci)
    cdef double q1ar = ar / r11, q1ai = ai / r11
    cdef double q1cr = cr / r11, q1ci = ci / r11
    cdef double detr = (ar * dr - ai * di) - (br * cr - bi * ci)
    cdef double deti = (ar * di + ai * dr) - (br * ci + bi * cr)
    cdef double absdet = sqrt(detr * detr + deti * deti)
    cdef double pr = 1.0, pi = 0.0
    cdef double q2ar, q2ai, q2cr, q2ci
    if absdet > 0.0:
        pr = detr / absdet
        pi = deti / absdet
    q2ar = -(q1cr * pr + q1ci * pi)
    q2ai = -(q1cr * pi - q1ci * pr)
    q2cr = q1ar * pr + q1ai * pi
    q2ci = q1ar * pi - q1ai * pr
    t.r11 = r11
    t.r12r = (q1ar * br + q1ai * bi) + (q1cr * dr + q1ci * di)
    t.r12i = (q1ar * bi - q1ai * br) + (q1cr * di - q1ci * dr)
    t.r22 = absdet / r11
    t.w1r = (q1ar * y1r + q1ai * y1i) + (q1cr * y2r + q1ci * y2i)
    t.w1i = (q1ar * y1i - q1ai * y1r) + (q1cr * y2i - q1ci * y2r)
    t.w2r = (q2ar * y1r + q2ai * y1i) + (q2cr * y2r + q2ci * y2i)
    t.w2i = (q2ar * y1i - q2ai * y1r) + (q2cr * y2i - q2ci * y2r)


cdef inline bint prepare(const double* hv, const double* yv, bint sorted_,
                         Tri* t) noexcept nogil:
    """Fill ``t`` for the chosen column order; return True if degenerate."""
    cdef double ar = hv[0], ai = hv[1], br = hv[2], bi = hv[3]
    cdef double cr = hv[4], ci = hv[5], dr = hv[6], di = hv[7]
    cdef double n1 = ((ar * ar + ai * ai) + cr * cr) + ci * ci
    cdef double n2 = ((br * br + bi * bi) + dr * dr) + di * di
    cdef double detr = (ar * dr - ai * di) - (br * cr - bi * ci)
    cdef double deti = (ar * di + ai * dr) - (br * ci + bi * cr)
    cdef double absdet = sqrt(detr * detr + deti * deti)
    if absdet <= SINGULAR_RTOL * (n1 + n2):
        return True
    if sorted_ and absdet / sqrt(n2) > absdet / sqrt(n1):
        qr_w(br, bi, ar, ai, dr, di, cr, ci, yv[0], yv[1], yv[2], yv[3], t)
    else:
        qr_w(ar, ai, br, bi, cr, ci, dr, di, yv[0], yv[1], yv[2], yv[3], t)
    return False


cdef inline void nc_bits(Tri* t, unsigned char* out) noexcept nogil:
    cdef double x2r = sgn(t.w2r / t.r22)
    cdef double x2i = sgn(t.w2i / t.r22)
    cdef double x1r = (t.w1r - (t.r12r * x2r - t.r12i * x2i)) / t.r11
    cdef double x1i = (t.w1i - (t.r12r * x2i + t.r12i * x2r)) / t.r11
    out[0] = (x1r < 0.0) ^ (x2r < 0.0)
    out[1] = (x1i < 0.0) ^ (x2i < 0.0)


cdef inline unsigned char pnc_bit(double e, double k) noexcept nogil:
    if k > 0.0:
        return 0 if fabs(e) - k >= 0.0 else 1
    return 0 if fabs(e) - fabs(k) <= 0.0 else 1


cdef inline void pnc_bits(Tri* t, unsigned char* out) noexcept nogil:
    cdef double k = round(t.r12r / t.r11)  # C round: half away from zero
    cdef double x2r, x2i, cfr, cfi, er, ei
    if k == 0.0:
        nc_bits(t, out)
        return
    x2r = sgn(t.w2r / t.r22)
    x2i = sgn(t.w2i / t.r22)
    cfr = t.r12r - k * t.r11
    cfi = t.r12i
    er = (t.w1r - (cfr * x2r - cfi * x2i)) / t.r11
    ei = (t.w1i - (cfr * x2i + cfi * x2r)) / t.r11
    out[0] = pnc_bit(er, k)
    out[1] = pnc_bit(ei, k)


cdef void run_vblast(const double* hv, const double* yv, Py_ssize_t n,
                     bint sorted_, bint pnc,
                     unsigned char* bits, unsigned char* degen) noexcept nogil:
    cdef Py_ssize_t i
    cdef Tri t
    for i in range(n):
        if prepare(hv + 8 * i, yv + 4 * i, sorted_, &t):
            degen[i] = 1
            bits[2 * i] = 0
            bits[2 * i + 1] = 0
            continue
        degen[i] = 0
        if pnc:
            pnc_bits(&t, bits + 2 * i)
        else:
            nc_bits(&t, bits + 2 * i)


cdef void run_zf(const double* hv, const double* yv, Py_ssize_t n,
                 unsigned char* bits, unsigned char* degen) noexcept nogil:
    cdef Py_ssize_t i
    cdef const double* h
    cdef const double* y
    cdef double ar, ai, br, bi, cr, ci, dr, di, y1r, y1i, y2r, y2i
    cdef double n1, n2, detr, deti, dd, u1r, u1i, u2r, u2i, x1r, x1i, x2r, x2i
    for i in range(n):
        h = hv + 8 * i
        y = yv + 4 * i
        ar = h[0]; ai = h[1]; br = h[2]; bi = h[3]
        cr = h[4]; ci = h[5]; dr = h[6]; di = h[7]
        y1r = y[0]; y1i = y[1]; y2r = y[2]; y2i = y[3]
        n1 = ((ar * ar + ai * ai) + cr * cr) + ci * ci
        n2 = ((br * br + bi * bi) + dr * dr) + di * di
        detr = (ar * dr - ai * di) - (br * cr - bi * ci)
        deti = (ar * di + ai * dr) - (br * ci + bi * cr)
        dd = detr * detr + deti * deti
        if sqrt(dd) <= SINGULAR_RTOL * (n1 + n2):
            degen[i] = 1
            bits[2 * i] = 0
            bits[2 * i + 1] = 0
            continue
        degen[i] = 0
        u1r = (dr * y1r - di * y1i) - (br * y2r - bi * y2i)
        u1i = (dr * y1i + di * y1r) - (br * y2i + bi * y2r)
        u2r = (ar * y2r - ai * y2i) - (cr * y1r - ci * y1i)
        u2i = (ar * y2i + ai * y2r) - (cr * y1i + ci * y1r)
        x1r = (u1r * detr + u1i * deti) / dd
        x1i = (u1i * detr - u1r * deti) / dd
        x2r = (u2r * detr + u2i * deti) / dd
        x2i = (u2i * detr - u2r * deti) / dd
        bits[2 * i] = (x1r < 0.0) ^ (x2r < 0.0)
        bits[2 * i + 1] = (x1i < 0.0) ^ (x2i < 0.0)


cdef void run_ml(const double* hv, const double* yv, Py_ssize_t n,
                 double sigma_sq, unsigned char* bits,
                 unsigned char* degen) noexcept nogil:
    cdef Py_ssize_t i
    cdef int hyp, s1, s2, best, dim
    cdef const double* h
    cdef const double* y
    cdef double[16] dist
    cdef double[16] p
    cdef double s1r, s1i, s2r, s2i, e1r, e1i, e2r, e2i, m, acc0, acc1
    cdef unsigned char xr, xi
    for i in range(n):
        h = hv + 8 * i
        y = yv + 4 * i
        degen[i] = 0
        for hyp in range(16):
            s1 = hyp // 4
            s2 = hyp % 4
            s1r = 1.0 - 2.0 * SYM_BR[s1]
            s1i = 1.0 - 2.0 * SYM_BI[s1]
            s2r = 1.0 - 2.0 * SYM_BR[s2]
            s2i = 1.0 - 2.0 * SYM_BI[s2]
            e1r = y[0] - ((h[0] * s1r - h[1] * s1i) + (h[2] * s2r - h[3] * s2i))
            e1i = y[1] - ((h[0] * s1i + h[1] * s1r) + (h[2] * s2i + h[3] * s2r))
            e2r = y[2] - ((h[4] * s1r - h[5] * s1i) + (h[6] * s2r - h[7] * s2i))
            e2i = y[3] - ((h[4] * s1i + h[5] * s1r) + (h[6] * s2i + h[7] * s2r))
            dist[hyp] = ((e1r * e1r + e1i * e1i) + e2r * e2r) + e2i * e2i
        if sigma_sq == 0.0:
            best = 0
            for hyp in range(1, 16):
                if dist[hyp] < dist[best]:
                    best = hyp
            s1 = best // 4
            s2 = best % 4
            bits[2 * i] = SYM_BR[s1] ^ SYM_BR[s2]
            bits[2 * i + 1] = SYM_BI[s1] ^ SYM_BI[s2]
            continue
        for hyp in range(16):
            p[hyp] = -dist[hyp] / (2.0 * sigma_sq)
        m = p[0]
        for hyp in range(1, 16):
            if p[hyp] > m:
                m = p[hyp]
        for hyp in range(16):
            p[hyp] = exp(p[hyp] - m)
        for dim in range(2):
            acc0 = 0.0
            acc1 = 0.0
            for hyp in range(16):
                s1 = hyp // 4
                s2 = hyp % 4
                if dim == 0:
                    xr = SYM_BR[s1] ^ SYM_BR[s2]
                else:
                    xr = SYM_BI[s1] ^ SYM_BI[s2]
                if xr:
                    acc1 = acc1 + p[hyp]
                else:
                    acc0 = acc0 + p[hyp]
            bits[2 * i + dim] = 0 if acc0 >= acc1 else 1


def detect_batch(int code, h, y, double sigma_sq):
    """Run detector ``code`` on ``n`` trials.

    ``h`` is complex128 of shape (n, 2, 2), ``y`` complex128 of shape (n, 2).
    Returns ``(xor_bits uint8 (n, 2), degenerate uint8 (n,))``.
    """
    if code < 0 or code > 5:
        raise ValueError(f"unknown detector code {code}")
    h = np.ascontiguousarray(h, dtype=np.complex128)
    y = np.ascontiguousarray(y, dtype=np.complex128)
    cdef Py_ssize_t n = h.shape[0]
    if h.shape[1] != 2 or h.shape[2] != 2 or y.shape[0] != n or y.shape[1] != 2:
        raise ValueError("expected h of shape (n, 2, 2) and y of shape (n, 2)")
    cdef const double[:, ::1] hv = h.view(np.float64).reshape(n, 8)
    cdef const double[:, ::1] yv = y.view(np.float64).reshape(n, 4)
    bits_arr = np.empty((n, 2), dtype=np.uint8)
    degen_arr = np.empty(n, dtype=np.uint8)
    cdef unsigned char[:, ::1] bits = bits_arr
    cdef unsigned char[::1] degen = degen_arr
    if n == 0:
        return bits_arr, degen_arr
    cdef const double* hp = &hv[0, 0]
    cdef const double* yp = &yv[0, 0]
    cdef unsigned char* bp = &bits[0, 0]
    cdef unsigned char* dp = &degen[0]
    with nogil:
        if code == 0:
            run_vblast(hp, yp, n, False, False, bp, dp)
        elif code == 1:
            run_vblast(hp, yp, n, False, True, bp, dp)
        elif code == 2:
            run_vblast(hp, yp, n, True, False, bp, dp)
        elif code == 3:
            run_vblast(hp, yp, n, True, True, bp, dp)
        elif code == 4:
            run_zf(hp, yp, n, bp, dp)
        else:
            run_ml(hp, yp, n, sigma_sq, bp, dp)
    return bits_arr, degen_arr
