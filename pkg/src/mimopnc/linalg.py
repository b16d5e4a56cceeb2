"""Small complex linear algebra for the 2x2 relay channel.

Scalars are Python ``complex``; vectors and matrices are ``complex128``
numpy arrays of shape ``(2,)`` and ``(2, 2)``.  The QR factorization uses a
canonical convention in which the diagonal of ``R`` is real and
non-negative, so that ``r11`` and ``r22`` can be treated as plain reals by
the detectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateChannel

__all__ = [
    "Cplx",
    "QrFactors",
    "apply_qh",
    "as_mat2",
    "as_vec2",
    "det2",
    "is_degenerate",
    "qr_decompose",
    "swap_columns",
]

Cplx = complex

# |det H| <= SINGULAR_RTOL * ||H||_F^2 is treated as singular.
SINGULAR_RTOL = 1e-12
_TINY_COLUMN = 1e-300


def as_vec2(v) -> np.ndarray:
    """Coerce ``v`` to a finite complex vector of length 2."""
    arr = np.asarray(v, dtype=np.complex128)
    if arr.shape != (2,):
        raise ValueError(f"expected a length-2 vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    return arr


def as_mat2(h) -> np.ndarray:
    """Coerce ``h`` to a finite complex 2x2 matrix."""
    arr = np.asarray(h, dtype=np.complex128)
    if arr.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    return arr


def swap_columns(h) -> np.ndarray:
    """Return a copy of ``h`` with its two columns exchanged."""
    h = as_mat2(h)
    return h[:, ::-1].copy()


def det2(h) -> complex:
    h = as_mat2(h)
    a, b = complex(h[0, 0]), complex(h[0, 1])
    c, d = complex(h[1, 0]), complex(h[1, 1])
    return a * d - b * c


def is_degenerate(h) -> bool:
    """True when ``h`` is too close to singular for zero-forcing detection."""
    h = as_mat2(h)
    fro2 = float(np.sum(h.real**2 + h.imag**2))
    return abs(det2(h)) <= SINGULAR_RTOL * fro2


@dataclass(frozen=True)
class QrFactors:
    """``H = Q R`` with ``Q`` unitary and ``R`` upper triangular.

    ``r11 > 0`` and ``r22 >= 0`` are stored with exactly zero imaginary part,
    and ``R[1, 0]`` is exactly zero.
    """

    q: np.ndarray
    r: np.ndarray

    @property
    def r11(self) -> float:
        return float(self.r[0, 0].real)

    @property
    def r12(self) -> complex:
        return complex(self.r[0, 1])

    @property
    def r22(self) -> float:
        return float(self.r[1, 1].real)


def qr_decompose(h) -> QrFactors:
    """Closed-form Gram-Schmidt QR of a 2x2 complex matrix.

    The first column of ``Q`` is the normalized first column of ``h``.  The
    second is the orthogonal complement of the first, rotated by the phase
    of ``det h`` so that ``r22 = |det h| / r11`` comes out real.  This is the
    Gram-Schmidt result written in a form that stays orthonormal to machine
    precision for ill-conditioned channels, and it keeps a rank-deficient
    ``h`` representable (``r22 = 0``).

    Raises
    ------
    DegenerateChannel
        If the first column of ``h`` is zero.
    """
    h = as_mat2(h)
    a, c = complex(h[0, 0]), complex(h[1, 0])
    b, d = complex(h[0, 1]), complex(h[1, 1])

    r11 = math.sqrt(a.real**2 + a.imag**2 + c.real**2 + c.imag**2)
    if r11 <= _TINY_COLUMN:
        raise DegenerateChannel("first column of the channel matrix is zero")
    q1a, q1c = a / r11, c / r11
    r12 = q1a.conjugate() * b + q1c.conjugate() * d

    det = a * d - b * c
    abs_det = abs(det)
    phase = det / abs_det if abs_det > 0.0 else 1.0 + 0.0j
    r22 = abs_det / r11
    q2a, q2c = -q1c.conjugate() * phase, q1a.conjugate() * phase

    q = np.array([[q1a, q2a], [q1c, q2c]], dtype=np.complex128)
    r = np.array([[r11, r12], [0.0, r22]], dtype=np.complex128)
    return QrFactors(q=q, r=r)


def apply_qh(f: QrFactors, y) -> np.ndarray:
    """Rotate a received vector into the triangular domain: ``W = Q^H y``."""
    y = as_vec2(y)
    return f.q.conj().T @ y
