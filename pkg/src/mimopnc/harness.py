"""Monte Carlo BER engine for the relay's estimate of ``x1 XOR x2``.

Trials at SNR grid index ``i`` are cut into fixed-size blocks; block ``b``
draws everything it needs from ``RngStream(seed, (i << 32) | b)``.  Blocks
are independent, so they can be handed to any number of worker threads,
and the integer error counts are summed, which makes every result
bit-identical regardless of the worker count.

Within a block of ``n`` trials the draw order is fixed: channel
``(n, 2, 2)``, noise ``(n, 2)``, user bits ``(n, 2, 2)``, then one fair-coin
XOR guess ``(n, 2)`` used for trials whose channel is numerically singular.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .detect import DetectorId, DetectorInput, detect_xor
from .errors import ConfigError, DegenerateChannel, NoCrossing
from .linalg import as_mat2
from .phy import (
    NoiseParams,
    RngStream,
    draw_bits,
    draw_channel,
    draw_noise,
    modulate_array,
    snr_to_sigma,
)

__all__ = [
    "BLOCK_SIZE",
    "BerRecord",
    "SimConfig",
    "estimate_gap_db",
    "resolve_workers",
    "run_point",
    "run_sweep",
    "run_trial",
]

BLOCK_SIZE = 1 << 14
_MAX_BLOCKS = 1 << 32


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one SNR sweep.

    ``fixed_channel=None`` redraws a Rayleigh channel for every symbol;
    a 2x2 matrix holds the channel constant for the whole run.
    """

    snr_db_grid: tuple
    symbols_per_point: int = 1_000_000
    seed: int = 1
    detectors: tuple = tuple(DetectorId)
    fixed_channel: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "snr_db_grid", tuple(float(s) for s in self.snr_db_grid))
        try:
            dets = tuple(DetectorId(d) for d in self.detectors)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        object.__setattr__(self, "detectors", dets)
        if self.fixed_channel is not None:
            try:
                object.__setattr__(self, "fixed_channel", as_mat2(self.fixed_channel))
            except ValueError as exc:
                raise ConfigError(f"fixed channel: {exc}") from None
        self.validate()

    @property
    def channel_mode(self) -> str:
        return "rayleigh_block" if self.fixed_channel is None else "fixed"

    def validate(self) -> None:
        grid = self.snr_db_grid
        if not grid:
            raise ConfigError("SNR grid is empty")
        if not all(math.isfinite(s) for s in grid):
            raise ConfigError("SNR grid values must be finite")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("SNR grid must be strictly increasing")
        if not isinstance(self.symbols_per_point, (int, np.integer)) or self.symbols_per_point < 1:
            raise ConfigError("symbols_per_point must be a positive integer")
        if -(-self.symbols_per_point // BLOCK_SIZE) > _MAX_BLOCKS:
            raise ConfigError("symbols_per_point too large")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 1 << 64:
            raise ConfigError("seed must be an integer in [0, 2**64)")
        if not self.detectors:
            raise ConfigError("no detectors selected")
        if len(set(self.detectors)) != len(self.detectors):
            raise ConfigError("duplicate detectors")
        if len(grid) > _MAX_BLOCKS:
            raise ConfigError("SNR grid too long")


@dataclass(frozen=True)
class BerRecord:
    detector: DetectorId
    snr_db: float
    bits_total: int
    bit_errors: int
    ber: float
    degenerate_count: int = 0

    @classmethod
    def from_counts(cls, detector, snr_db, bits_total, bit_errors, degenerate_count=0):
        return cls(
            detector=DetectorId(detector),
            snr_db=float(snr_db),
            bits_total=int(bits_total),
            bit_errors=int(bit_errors),
            ber=int(bit_errors) / int(bits_total),
            degenerate_count=int(degenerate_count),
        )

    @property
    def std_error(self) -> float:
        """Binomial standard error of ``ber``."""
        p = self.ber
        return math.sqrt(p * (1.0 - p) / self.bits_total)


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit value, else ``MIMOPNC_THREADS``, else CPU count."""
    if workers is None:
        env = os.environ.get("MIMOPNC_THREADS")
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise ConfigError(f"MIMOPNC_THREADS must be a positive integer, got {env!r}") from None
        else:
            workers = os.cpu_count() or 1
    if workers < 1:
        raise ConfigError("worker count must be positive")
    return workers


def _draw_trials(rng: RngStream, noise: NoiseParams, n: int, fixed_channel):
    h = draw_channel(rng, n)
    nvec = draw_noise(rng, noise, n)
    bits = draw_bits(rng, (n, 2))
    coin = draw_bits(rng, n)
    if fixed_channel is not None:
        h = np.broadcast_to(fixed_channel, (n, 2, 2))
    x = modulate_array(bits)
    y = np.matmul(h, x[..., None])[..., 0] + nvec
    return h, y, bits[:, 0] ^ bits[:, 1], coin


def run_trial(rng: RngStream, sigma: NoiseParams, detectors, fixed_channel=None) -> dict:
    """One symbol through every requested detector, using the per-symbol
    reference implementations.

    Returns the number of wrong XOR bits (0, 1 or 2) per detector.  All
    detectors see the same bits, channel and noise.  A singular channel
    makes the affected detectors fall back to the drawn coin-flip guess.
    """
    if fixed_channel is not None:
        fixed_channel = as_mat2(fixed_channel)
    h, y, truth, coin = _draw_trials(rng, sigma, 1, fixed_channel)
    inp = DetectorInput(y=y[0], h=h[0], noise=sigma)
    out = {}
    for det in detectors:
        det = DetectorId(det)
        try:
            est = np.array(detect_xor(det, inp), dtype=np.uint8)
        except DegenerateChannel:
            est = coin[0]
        out[det] = int(np.count_nonzero(est != truth[0]))
    return out


def _run_block(seed, stream_id, n, noise, detectors, fixed_channel, backend):
    rng = RngStream(seed, stream_id)
    h, y, truth, coin = _draw_trials(rng, noise, n, fixed_channel)
    counts = {}
    for det in detectors:
        est, degen = kernels.detect_batch(det, h, y, noise.sigma_sq, backend=backend)
        degen = degen.astype(bool)
        if degen.any():
            est = np.where(degen[:, None], coin, est)
        counts[det] = (int(np.count_nonzero(est != truth)), int(np.count_nonzero(degen)))
    return counts


def _point_counts(cfg: SimConfig, snr_index: int, workers, backend):
    noise = snr_to_sigma(cfg.snr_db_grid[snr_index])
    n = cfg.symbols_per_point
    sizes = [min(BLOCK_SIZE, n - start) for start in range(0, n, BLOCK_SIZE)]
    jobs = [
        (cfg.seed, (snr_index << 32) | b, size, noise, cfg.detectors, cfg.fixed_channel, backend)
        for b, size in enumerate(sizes)
    ]
    workers = min(resolve_workers(workers), len(jobs))
    if workers == 1:
        results = [_run_block(*job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: _run_block(*job), jobs))
    totals = {det: [0, 0] for det in cfg.detectors}
    for res in results:
        for det, (errs, degen) in res.items():
            totals[det][0] += errs
            totals[det][1] += degen
    return totals


def run_point(cfg: SimConfig, snr_db: float, workers=None, backend=None) -> list[BerRecord]:
    """Simulate ``cfg.symbols_per_point`` symbols at one grid SNR.

    Returns one record per detector, in ``cfg.detectors`` order.
    """
    cfg.validate()
    try:
        snr_index = cfg.snr_db_grid.index(float(snr_db))
    except ValueError:
        raise ConfigError(f"{snr_db} dB is not on the configured grid") from None
    totals = _point_counts(cfg, snr_index, workers, backend)
    bits_total = 2 * cfg.symbols_per_point
    return [
        BerRecord.from_counts(det, snr_db, bits_total, errs, degen)
        for det, (errs, degen) in totals.items()
    ]


def run_sweep(cfg: SimConfig, workers=None, backend=None, progress=None) -> list[BerRecord]:
    """Run every grid point; records are ordered by (detector name, snr_db)."""
    records = []
    for snr in cfg.snr_db_grid:
        records.extend(run_point(cfg, snr, workers=workers, backend=backend))
        if progress is not None:
            progress(snr)
    records.sort(key=lambda r: (r.detector.value, r.snr_db))
    return records


def _crossing_snr(curve, target: float, detector) -> float:
    log_t = math.log10(target)
    for (s0, p0), (s1, p1) in zip(curve, curve[1:]):
        if p0 == target:
            return s0
        if p0 > target >= p1:
            if p1 == target:
                return s1
            if p1 == 0.0:
                raise NoCrossing(
                    f"{detector}: BER drops to zero between {s0} and {s1} dB; "
                    "more symbols needed to interpolate"
                )
            l0, l1 = math.log10(p0), math.log10(p1)
            return s0 + (log_t - l0) * (s1 - s0) / (l1 - l0)
    if curve[-1][1] == target:
        return curve[-1][0]
    raise NoCrossing(f"{detector}: BER never crosses {target:g} on the grid")


def estimate_gap_db(records, det_a, det_b, target_ber: float) -> float:
    """Horizontal distance in dB between two waterfall curves at ``target_ber``.

    Each curve's crossing SNR is found by linear interpolation of
    ``log10(ber)`` against SNR at the first downward crossing.  The result is
    ``snr_b - snr_a``, positive when ``det_a`` needs less SNR.
    """
    if not 0.0 < target_ber < 1.0:
        raise ValueError("target_ber must lie in (0, 1)")
    det_a, det_b = DetectorId(det_a), DetectorId(det_b)
    snrs = {}
    for det in (det_a, det_b):
        curve = sorted((r.snr_db, r.ber) for r in records if r.detector == det)
        if not curve:
            raise NoCrossing(f"no records for {det}")
        snrs[det] = _crossing_snr(curve, target_ber, det)
    return snrs[det_b] - snrs[det_a]
