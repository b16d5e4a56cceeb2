"""QPSK mapping, network-coded XOR, and random channel/noise generation.

Bit convention: bit 0 maps to level +1 and bit 1 to level -1, independently
on the real and imaginary dimension.  With this choice the product of two
levels is +1 exactly when their bits agree, i.e. when the XOR bit is 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "BitPair",
    "NoiseParams",
    "RngStream",
    "demodulate_array",
    "demodulate_hard",
    "draw_bits",
    "draw_channel",
    "draw_noise",
    "modulate",
    "modulate_array",
    "snr_to_sigma",
    "xor_bits",
]

_U64 = 1 << 64


class BitPair(NamedTuple):
    """Two bits carried by one QPSK symbol (real dimension first)."""

    b_re: int
    b_im: int


def _level(bit: int) -> float:
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    return 1.0 - 2.0 * bit


def modulate(bits: BitPair) -> complex:
    b_re, b_im = bits
    return complex(_level(b_re), _level(b_im))


def demodulate_hard(s: complex) -> BitPair:
    """Per-dimension sign decision; a value of exactly zero decides bit 0."""
    s = complex(s)
    return BitPair(0 if s.real >= 0 else 1, 0 if s.imag >= 0 else 1)


def xor_bits(a: BitPair, b: BitPair) -> BitPair:
    return BitPair(a[0] ^ b[0], a[1] ^ b[1])


def modulate_array(bits: np.ndarray) -> np.ndarray:
    """Vectorized :func:`modulate`; the trailing axis holds (b_re, b_im)."""
    bits = np.asarray(bits)
    levels = 1.0 - 2.0 * bits.astype(np.float64)
    return levels[..., 0] + 1j * levels[..., 1]


def demodulate_array(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s)
    return np.stack([s.real < 0, s.imag < 0], axis=-1).astype(np.uint8)


@dataclass(frozen=True)
class NoiseParams:
    """Per-dimension noise level; ``sigma_sq`` is the variance of each of
    the real and imaginary parts of every noise sample."""

    sigma: float
    sigma_sq: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and math.isfinite(self.sigma_sq)):
            raise ValueError("noise parameters must be finite")
        if self.sigma < 0 or self.sigma_sq < 0:
            raise ValueError("noise parameters must be non-negative")

    @classmethod
    def from_sigma(cls, sigma: float) -> NoiseParams:
        sigma = float(sigma)
        return cls(sigma=sigma, sigma_sq=sigma * sigma)

    @classmethod
    def from_sigma_sq(cls, sigma_sq: float) -> NoiseParams:
        sigma_sq = float(sigma_sq)
        if sigma_sq < 0:
            raise ValueError("variance must be non-negative")
        return cls(sigma=math.sqrt(sigma_sq), sigma_sq=sigma_sq)


def snr_to_sigma(snr_db: float) -> NoiseParams:
    """Noise level for a system SNR of ``1 / sigma^2`` expressed in dB."""
    snr_db = float(snr_db)
    if not math.isfinite(snr_db):
        raise ValueError("snr_db must be finite")
    return NoiseParams.from_sigma_sq(10.0 ** (-snr_db / 10.0))


class RngStream:
    """A reproducible random substream labelled by ``(seed, stream_id)``.

    Backed by numpy's counter-based Philox generator with the 128-bit key
    set directly to ``(seed, stream_id)``, so distinct labels give
    independent streams and the same label always replays the same
    sequence, whatever thread or process consumes it.
    """

    __slots__ = ("seed", "stream_id", "_gen")

    def __init__(self, seed: int, stream_id: int = 0):
        for name, value in (("seed", seed), ("stream_id", stream_id)):
            if not isinstance(value, (int, np.integer)) or not 0 <= int(value) < _U64:
                raise ValueError(f"{name} must be an integer in [0, 2**64)")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._gen = None

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            key = np.array([self.seed, self.stream_id], dtype=np.uint64)
            self._gen = np.random.Generator(np.random.Philox(key=key))
        return self._gen

    def reset(self) -> None:
        """Rewind to the start of the substream."""
        self._gen = None


def _shape(size, tail):
    if size is None:
        return tail
    if isinstance(size, (int, np.integer)):
        return (int(size), *tail)
    return (*tuple(size), *tail)


def draw_channel(rng: RngStream, size=None) -> np.ndarray:
    """Rayleigh channel matrices with unit average power per entry.

    Returns shape ``(2, 2)`` when ``size`` is None, else ``(size, 2, 2)``.
    """
    g = rng.generator.standard_normal(_shape(size, (2, 2, 2)))
    return math.sqrt(0.5) * (g[..., 0] + 1j * g[..., 1])


def draw_noise(rng: RngStream, p: NoiseParams, size=None) -> np.ndarray:
    """Complex noise vectors with per-dimension variance ``p.sigma_sq``."""
    g = rng.generator.standard_normal(_shape(size, (2, 2)))
    return p.sigma * (g[..., 0] + 1j * g[..., 1])


def draw_bits(rng: RngStream, size=None) -> np.ndarray:
    """Uniform BitPairs as a ``uint8`` array with trailing axis of length 2."""
    return rng.generator.integers(0, 2, size=_shape(size, (2,)), dtype=np.uint8)
