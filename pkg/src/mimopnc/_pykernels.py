"""Vectorized numpy detection kernels (fallback backend).

Every arithmetic step is written on split real/imaginary arrays in the same
order as ``_ckernels.pyx``; with FMA contraction disabled in the extension
build, both backends make bit-identical decisions.
"""

import numpy as np

SINGULAR_RTOL = 1e-12

# Hypothesis h pairs user-1 symbol h // 4 with user-2 symbol h % 4; symbol s
# carries bits (s // 2, s % 2).
_SYM_BITS = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=np.uint8)
_HYP_B1 = _SYM_BITS[np.arange(16) // 4]
_HYP_B2 = _SYM_BITS[np.arange(16) % 4]
_HYP_XOR = _HYP_B1 ^ _HYP_B2
_HYP_S1R = 1.0 - 2.0 * _HYP_B1[:, 0]
_HYP_S1I = 1.0 - 2.0 * _HYP_B1[:, 1]
_HYP_S2R = 1.0 - 2.0 * _HYP_B2[:, 0]
_HYP_S2I = 1.0 - 2.0 * _HYP_B2[:, 1]


def _split(h, y):
    h = np.ascontiguousarray(h, dtype=np.complex128)
    y = np.ascontiguousarray(y, dtype=np.complex128)
    hv = h.view(np.float64).reshape(-1, 8)
    yv = y.view(np.float64).reshape(-1, 4)
    return (hv[:, i] for i in range(8)), (yv[:, i] for i in range(4))


def _sign(v):
    return np.where(v >= 0.0, 1.0, -1.0)


def _det(ar, ai, br, bi, cr, ci, dr, di):
    detr = (ar * dr - ai * di) - (br * cr - bi * ci)
    deti = (ar * di + ai * dr) - (br * ci + bi * cr)
    return detr, deti


def _qr_w(ar, ai, br, bi, cr, ci, dr, di, y1r, y1i, y2r, y2i):
    """Canonical QR of [[a, b], [c, d]] and the rotated observation Q^H y."""
    r11 = np.sqrt(((ar * ar + ai * ai) + cr * cr) + ci * ci)
    q1ar, q1ai = ar / r11, ai / r11
    q1cr, q1ci = cr / r11, ci / r11
    r12r = (q1ar * br + q1ai * bi) + (q1cr * dr + q1ci * di)
    r12i = (q1ar * bi - q1ai * br) + (q1cr * di - q1ci * dr)
    detr, deti = _det(ar, ai, br, bi, cr, ci, dr, di)
    absdet = np.sqrt(detr * detr + deti * deti)
    r22 = absdet / r11
    nz = absdet > 0.0
    safe = np.where(nz, absdet, 1.0)
    pr = np.where(nz, detr / safe, 1.0)
    pi = np.where(nz, deti / safe, 0.0)
    q2ar = -(q1cr * pr + q1ci * pi)
    q2ai = -(q1cr * pi - q1ci * pr)
    q2cr = q1ar * pr + q1ai * pi
    q2ci = q1ar * pi - q1ai * pr
    w1r = (q1ar * y1r + q1ai * y1i) + (q1cr * y2r + q1ci * y2i)
    w1i = (q1ar * y1i - q1ai * y1r) + (q1cr * y2i - q1ci * y2r)
    w2r = (q2ar * y1r + q2ai * y1i) + (q2cr * y2r + q2ci * y2i)
    w2i = (q2ar * y1i - q2ai * y1r) + (q2cr * y2i - q2ci * y2r)
    return r11, r12r, r12i, r22, w1r, w1i, w2r, w2i


def _prepare(h, y, sorted_):
    (ar, ai, br, bi, cr, ci, dr, di), (y1r, y1i, y2r, y2i) = _split(h, y)
    n1 = ((ar * ar + ai * ai) + cr * cr) + ci * ci
    n2 = ((br * br + bi * bi) + dr * dr) + di * di
    detr, deti = _det(ar, ai, br, bi, cr, ci, dr, di)
    absdet = np.sqrt(detr * detr + deti * deti)
    degenerate = absdet <= SINGULAR_RTOL * (n1 + n2)
    if sorted_:
        with np.errstate(divide="ignore", invalid="ignore"):
            swap = absdet / np.sqrt(n2) > absdet / np.sqrt(n1)
        ar, br = np.where(swap, br, ar), np.where(swap, ar, br)
        ai, bi = np.where(swap, bi, ai), np.where(swap, ai, bi)
        cr, dr = np.where(swap, dr, cr), np.where(swap, cr, dr)
        ci, di = np.where(swap, di, ci), np.where(swap, ci, di)
    with np.errstate(divide="ignore", invalid="ignore"):
        parts = _qr_w(ar, ai, br, bi, cr, ci, dr, di, y1r, y1i, y2r, y2i)
    return parts, degenerate


def _finish(bits, degenerate):
    bits = np.where(degenerate[:, None], 0, bits).astype(np.uint8)
    return bits, degenerate.astype(np.uint8)


def _nc_bits(r11, r12r, r12i, r22, w1r, w1i, w2r, w2i):
    x2r = _sign(w2r / r22)
    x2i = _sign(w2i / r22)
    x1r = (w1r - (r12r * x2r - r12i * x2i)) / r11
    x1i = (w1i - (r12r * x2i + r12i * x2r)) / r11
    return np.stack([(x1r < 0.0) ^ (x2r < 0.0), (x1i < 0.0) ^ (x2i < 0.0)], axis=-1)


def vblast_nc(h, y, sorted_=False):
    parts, degenerate = _prepare(h, y, sorted_)
    with np.errstate(divide="ignore", invalid="ignore"):
        bits = _nc_bits(*parts)
    return _finish(bits, degenerate)


def round_half_away(t):
    whole = np.trunc(t)
    return whole + np.where(np.abs(t - whole) >= 0.5, np.sign(t), 0.0)


def vblast_pnc(h, y, sorted_=False):
    parts, degenerate = _prepare(h, y, sorted_)
    r11, r12r, r12i, r22, w1r, w1i, w2r, w2i = parts
    with np.errstate(divide="ignore", invalid="ignore"):
        nc = _nc_bits(*parts)
        k = round_half_away(r12r / r11)
        x2r = _sign(w2r / r22)
        x2i = _sign(w2i / r22)
        cfr = r12r - k * r11
        cfi = r12i
        er = (w1r - (cfr * x2r - cfi * x2i)) / r11
        ei = (w1i - (cfr * x2i + cfi * x2r)) / r11
        ak = np.abs(k)
        pos = k > 0.0
        bit_r = np.where(pos, ~(np.abs(er) - k >= 0.0), ~(np.abs(er) - ak <= 0.0))
        bit_i = np.where(pos, ~(np.abs(ei) - k >= 0.0), ~(np.abs(ei) - ak <= 0.0))
    pnc = np.stack([bit_r, bit_i], axis=-1)
    bits = np.where((k == 0.0)[:, None], nc, pnc)
    return _finish(bits, degenerate)


def linear_zf_nc(h, y):
    (ar, ai, br, bi, cr, ci, dr, di), (y1r, y1i, y2r, y2i) = _split(h, y)
    n1 = ((ar * ar + ai * ai) + cr * cr) + ci * ci
    n2 = ((br * br + bi * bi) + dr * dr) + di * di
    detr, deti = _det(ar, ai, br, bi, cr, ci, dr, di)
    dd = detr * detr + deti * deti
    degenerate = np.sqrt(dd) <= SINGULAR_RTOL * (n1 + n2)
    # numerators d*y1 - b*y2 and a*y2 - c*y1, then multiply by conj(det)/|det|^2
    u1r = (dr * y1r - di * y1i) - (br * y2r - bi * y2i)
    u1i = (dr * y1i + di * y1r) - (br * y2i + bi * y2r)
    u2r = (ar * y2r - ai * y2i) - (cr * y1r - ci * y1i)
    u2i = (ar * y2i + ai * y2r) - (cr * y1i + ci * y1r)
    with np.errstate(divide="ignore", invalid="ignore"):
        x1r = (u1r * detr + u1i * deti) / dd
        x1i = (u1i * detr - u1r * deti) / dd
        x2r = (u2r * detr + u2i * deti) / dd
        x2i = (u2i * detr - u2r * deti) / dd
    bits = np.stack([(x1r < 0.0) ^ (x2r < 0.0), (x1i < 0.0) ^ (x2i < 0.0)], axis=-1)
    return _finish(bits, degenerate)


def ml_distances(h, y):
    """Squared distance ``||y - H x||^2`` for all 16 hypotheses, shape (n, 16)."""
    (ar, ai, br, bi, cr, ci, dr, di), (y1r, y1i, y2r, y2i) = _split(h, y)
    s1r, s1i, s2r, s2i = _HYP_S1R, _HYP_S1I, _HYP_S2R, _HYP_S2I
    col = (slice(None), None)
    ar, ai, br, bi = ar[col], ai[col], br[col], bi[col]
    cr, ci, dr, di = cr[col], ci[col], dr[col], di[col]
    y1r, y1i, y2r, y2i = y1r[col], y1i[col], y2r[col], y2i[col]
    e1r = y1r - ((ar * s1r - ai * s1i) + (br * s2r - bi * s2i))
    e1i = y1i - ((ar * s1i + ai * s1r) + (br * s2i + bi * s2r))
    e2r = y2r - ((cr * s1r - ci * s1i) + (dr * s2r - di * s2i))
    e2i = y2i - ((cr * s1i + ci * s1r) + (dr * s2i + di * s2r))
    return ((e1r * e1r + e1i * e1i) + e2r * e2r) + e2i * e2i


def ml_xor(h, y, sigma_sq):
    dist = ml_distances(h, y)
    n = dist.shape[0]
    if sigma_sq == 0.0:
        best = np.argmin(dist, axis=1)
        return _HYP_XOR[best].astype(np.uint8), np.zeros(n, dtype=np.uint8)
    logp = -dist / (2.0 * sigma_sq)
    p = np.exp(logp - logp.max(axis=1, keepdims=True))
    bits = np.empty((n, 2), dtype=np.uint8)
    for dim in range(2):
        s0 = np.zeros(n)
        s1 = np.zeros(n)
        # sequential accumulation, same order as the compiled kernel
        for hyp in range(16):
            if _HYP_XOR[hyp, dim]:
                s1 = s1 + p[:, hyp]
            else:
                s0 = s0 + p[:, hyp]
        bits[:, dim] = ~(s0 >= s1)
    return bits, np.zeros(n, dtype=np.uint8)


def detect_batch(code, h, y, sigma_sq):
    """Dispatch on the integer detector code used by :mod:`mimopnc.kernels`."""
    if code == 0:
        return vblast_nc(h, y, False)
    if code == 1:
        return vblast_pnc(h, y, False)
    if code == 2:
        return vblast_nc(h, y, True)
    if code == 3:
        return vblast_pnc(h, y, True)
    if code == 4:
        return linear_zf_nc(h, y)
    if code == 5:
        return ml_xor(h, y, sigma_sq)
    raise ValueError(f"unknown detector code {code}")
