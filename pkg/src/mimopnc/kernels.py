"""Backend selection for the batched detection kernels.

The compiled extension ``mimopnc._ckernels`` is used when it imports;
otherwise the numpy implementation in ``mimopnc._pykernels`` takes over.
Set ``MIMOPNC_BACKEND=python`` (or ``cython``) to force a choice.  Both
backends return identical decisions for the same inputs.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels
from .detect import DetectorId

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

__all__ = ["BACKEND", "available_backends", "detect_batch", "get_backend"]

DETECTOR_CODES = {
    DetectorId.VBLAST_NC: 0,
    DetectorId.VBLAST_PNC: 1,
    DetectorId.SORTED_VBLAST_NC: 2,
    DetectorId.SORTED_VBLAST_PNC: 3,
    DetectorId.LINEAR_ZF_NC: 4,
    DetectorId.ML_ORACLE: 5,
}

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` ("cython", "python" or "auto")."""
    if name is None or name == "auto":
        return _BACKENDS.get("cython", _pykernels)
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"backend {name!r} not available (have: {', '.join(available_backends())})"
        ) from None


_default = get_backend(os.environ.get("MIMOPNC_BACKEND", "auto").strip().lower() or "auto")
BACKEND = "cython" if _default is _ckernels and _ckernels is not None else "python"


def detect_batch(detector, h: np.ndarray, y: np.ndarray, sigma_sq: float, backend=None):
    """Run one detector over a batch of trials.

    Parameters
    ----------
    detector : DetectorId or str
    h : complex array, shape (n, 2, 2)
    y : complex array, shape (n, 2)
    sigma_sq : float
        Per-dimension noise variance; only the ML oracle uses it.
    backend : str, optional
        Override the import-time backend choice.

    Returns
    -------
    xor_bits : uint8 array, shape (n, 2)
        Zero where the trial was degenerate.
    degenerate : uint8 array, shape (n,)
    """
    mod = _default if backend is None else get_backend(backend)
    code = DETECTOR_CODES[DetectorId(detector)]
    return mod.detect_batch(code, h, y, float(sigma_sq))
