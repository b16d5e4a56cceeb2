"""Relay-side detectors that estimate ``x1 XOR x2`` from one received vector.

These are the per-symbol reference implementations.  The Monte Carlo
harness runs the batched kernels in :mod:`mimopnc.kernels`, which implement
the same decision rules and are tested against this module.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import linalg
from .errors import DegenerateChannel, InvalidCoefficient
from .phy import BitPair, NoiseParams, demodulate_hard, modulate, xor_bits

__all__ = [
    "DetectorId",
    "DetectorInput",
    "XorEstimate",
    "choose_order",
    "compute_k",
    "detect_xor",
    "detect_linear_zf_nc",
    "detect_ml_xor",
    "detect_vblast_nc",
    "detect_vblast_pnc",
    "pnc_map",
]

XorEstimate = BitPair


class DetectorId(str, enum.Enum):
    VBLAST_NC = "vblast_nc"
    VBLAST_PNC = "vblast_pnc"
    SORTED_VBLAST_NC = "sorted_vblast_nc"
    SORTED_VBLAST_PNC = "sorted_vblast_pnc"
    LINEAR_ZF_NC = "linear_zf_nc"
    ML_ORACLE = "ml_oracle"

    def __str__(self):
        return self.value

    @property
    def cli_name(self) -> str:
        return self.value.replace("_", "-")

    @classmethod
    def parse(cls, name: str) -> DetectorId:
        """Accept either ``vblast-pnc`` or ``vblast_pnc`` spellings."""
        try:
            return cls(name.strip().lower().replace("-", "_"))
        except ValueError:
            known = ", ".join(d.cli_name for d in cls)
            raise ValueError(f"unknown detector {name!r} (known: {known})") from None


@dataclass(frozen=True)
class DetectorInput:
    y: np.ndarray
    h: np.ndarray
    noise: NoiseParams = NoiseParams(0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "y", linalg.as_vec2(self.y))
        object.__setattr__(self, "h", linalg.as_mat2(self.h))


def compute_k(r11: float, r12: complex) -> int:
    """Nearest integer to ``real(r12) / r11``, ties rounded away from zero."""
    if not r11 > 0:
        raise DegenerateChannel(f"r11 must be positive, got {r11!r}")
    t = complex(r12).real / r11
    whole = math.trunc(t)
    # t - trunc(t) is exact in floating point, so the tie test is too.
    if abs(t - whole) >= 0.5:
        whole += 1 if t > 0 else -1
    return int(whole)


def pnc_map(est: complex, k: int) -> BitPair:
    """Map an estimate of ``x1 + k*x2`` to the XOR bits with threshold ``|k|``.

    For ``k > 0`` equal bits produce the outer levels ``+-(k+1)``; for
    ``k < 0`` they produce the inner levels ``+-(|k|-1)``.
    """
    k = int(k)
    if k == 0:
        raise InvalidCoefficient("PNC mapping needs a nonzero coefficient")
    bits = []
    for v in (complex(est).real, complex(est).imag):
        if k > 0:
            bits.append(0 if abs(v) - k >= 0 else 1)
        else:
            bits.append(0 if abs(v) - abs(k) <= 0 else 1)
    return BitPair(*bits)


def _check_invertible(h: np.ndarray) -> None:
    if linalg.is_degenerate(h):
        raise DegenerateChannel("channel matrix is numerically singular")


def choose_order(h) -> tuple[linalg.QrFactors, bool]:
    """QR factors for the column order with the larger ``r22``.

    The columns are exchanged only if that makes ``r22`` strictly larger.
    Returns the factors in force and whether a swap happened.
    """
    plain = linalg.qr_decompose(h)
    swapped = linalg.qr_decompose(linalg.swap_columns(h))
    if swapped.r22 > plain.r22:
        return swapped, True
    return plain, False


def _factor(h, sorted_: bool) -> linalg.QrFactors:
    if sorted_:
        return choose_order(h)[0]
    return linalg.qr_decompose(h)


def _hard(z: complex) -> complex:
    return modulate(demodulate_hard(z))


def detect_vblast_nc(inp: DetectorInput, sorted: bool = False) -> BitPair:
    """Successive interference cancellation, then XOR of the two decisions.

    The XOR is symmetric in the two users, so a column swap needs no undoing.
    """
    _check_invertible(inp.h)
    f = _factor(inp.h, sorted)
    w1, w2 = linalg.apply_qh(f, inp.y)
    x2_hat = _hard(complex(w2) / f.r22)
    x1_soft = (complex(w1) - f.r12 * x2_hat) / f.r11
    return xor_bits(demodulate_hard(x1_soft), demodulate_hard(x2_hat))


def detect_vblast_pnc(
    inp: DetectorInput, sorted: bool = False, cancellation: str = "hard"
) -> BitPair:
    """Partial interference cancellation followed by PNC mapping.

    Only the residual ``(r12 - k r11) x2`` is removed from the first layer,
    leaving an estimate of ``x1 + k x2`` that is mapped straight to the XOR.
    ``cancellation="hard"`` subtracts the residual using the sliced second
    layer; ``"soft"`` uses the unsliced zero-forcing value ``w2 / r22``
    instead, which is the form used in the two-user illustration and turns
    the scheme into a purely linear one.  When ``k == 0`` the symbol falls
    back to full cancellation and separate decisions.
    """
    if cancellation not in ("hard", "soft"):
        raise ValueError("cancellation must be 'hard' or 'soft'")
    _check_invertible(inp.h)
    f = _factor(inp.h, sorted)
    k = compute_k(f.r11, f.r12)
    if k == 0:
        return detect_vblast_nc(inp, sorted=sorted)
    w1, w2 = linalg.apply_qh(f, inp.y)
    x2_soft = complex(w2) / f.r22
    x2 = _hard(x2_soft) if cancellation == "hard" else x2_soft
    est = (complex(w1) - (f.r12 - k * f.r11) * x2) / f.r11
    return pnc_map(est, k)


def detect_linear_zf_nc(inp: DetectorInput) -> BitPair:
    """Invert the channel, slice both users, XOR the decisions."""
    _check_invertible(inp.h)
    h, y = inp.h, inp.y
    a, b, c, d = (complex(v) for v in h.ravel())
    y1, y2 = complex(y[0]), complex(y[1])
    det = a * d - b * c
    x1 = (d * y1 - b * y2) / det
    x2 = (a * y2 - c * y1) / det
    return xor_bits(demodulate_hard(x1), demodulate_hard(x2))


_QPSK_BITS = [BitPair(i, j) for i in (0, 1) for j in (0, 1)]
_HYPOTHESES = [(b1, b2) for b1, b2 in product(_QPSK_BITS, repeat=2)]


def detect_ml_xor(inp: DetectorInput) -> BitPair:
    """Bitwise MAP decision on the XOR, marginalizing over all 16 symbol pairs.

    With zero noise the likelihoods collapse, so the XOR of the nearest
    hypothesis is returned instead.  Works for singular channels too.
    """
    h, y = inp.h, inp.y
    dists = []
    for b1, b2 in _HYPOTHESES:
        x = np.array([modulate(b1), modulate(b2)])
        e = y - h @ x
        dists.append(float(np.sum(e.real**2 + e.imag**2)))
    dists = np.array(dists)
    xors = np.array([xor_bits(b1, b2) for b1, b2 in _HYPOTHESES])

    if inp.noise.sigma_sq == 0.0:
        return BitPair(*(int(v) for v in xors[int(np.argmin(dists))]))

    logp = -dists / (2.0 * inp.noise.sigma_sq)
    out = []
    for dim in range(2):
        l0 = np.logaddexp.reduce(logp[xors[:, dim] == 0])
        l1 = np.logaddexp.reduce(logp[xors[:, dim] == 1])
        out.append(0 if l0 >= l1 else 1)
    return BitPair(*out)


def detect_xor(detector: DetectorId, inp: DetectorInput) -> BitPair:
    detector = DetectorId(detector)
    if detector is DetectorId.VBLAST_NC:
        return detect_vblast_nc(inp)
    if detector is DetectorId.SORTED_VBLAST_NC:
        return detect_vblast_nc(inp, sorted=True)
    if detector is DetectorId.VBLAST_PNC:
        return detect_vblast_pnc(inp)
    if detector is DetectorId.SORTED_VBLAST_PNC:
        return detect_vblast_pnc(inp, sorted=True)
    if detector is DetectorId.LINEAR_ZF_NC:
        return detect_linear_zf_nc(inp)
    return detect_ml_xor(inp)
