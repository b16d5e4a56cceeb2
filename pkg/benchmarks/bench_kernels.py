"""Compare the compiled and numpy detection backends.

    python benchmarks/bench_kernels.py --trials 500000

Reports per-detector kernel throughput and the wall time of a full
``run_point`` (random draws included) for each available backend, and
checks that both backends made the same decisions.
"""

import argparse
import time

import numpy as np

from mimopnc import kernels
from mimopnc.detect import DetectorId
from mimopnc.harness import SimConfig, run_point
from mimopnc.phy import RngStream, draw_bits, draw_channel, draw_noise, modulate_array, snr_to_sigma


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=500_000)
    ap.add_argument("--snr", type=float, default=15.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = kernels.available_backends()
    noise = snr_to_sigma(args.snr)
    rng = RngStream(12345, 0)
    h = draw_channel(rng, args.trials)
    x = modulate_array(draw_bits(rng, (args.trials, 2)))
    y = np.matmul(h, x[..., None])[..., 0] + draw_noise(rng, noise, args.trials)

    print(f"backends: {', '.join(backends)} (import-time default: {kernels.BACKEND})")
    print(f"{args.trials} trials at {args.snr} dB, best of {args.repeat}\n")
    header = f"{'detector':<20}" + "".join(f"{b + ' Mtr/s':>16}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}{'identical':>11}"
    print(header)
    for det in DetectorId:
        rates, outs = [], []
        for b in backends:
            t, out = best_of(lambda: kernels.detect_batch(det, h, y, noise.sigma_sq, backend=b), args.repeat)
            rates.append(args.trials / t / 1e6)
            outs.append(out)
        line = f"{det.value:<20}" + "".join(f"{r:>16.2f}" for r in rates)
        if len(backends) == 2:
            same = all(np.array_equal(a, b) for a, b in zip(*outs))
            cy, py = rates[backends.index("cython")], rates[backends.index("python")]
            line += f"{cy / py:>9.1f}x{str(same):>11}"
        print(line)

    print("\nrun_point, four VBLAST detectors, single worker:")
    cfg = SimConfig(
        snr_db_grid=(args.snr,),
        symbols_per_point=args.trials,
        seed=1,
        detectors=(
            DetectorId.VBLAST_NC,
            DetectorId.VBLAST_PNC,
            DetectorId.SORTED_VBLAST_NC,
            DetectorId.SORTED_VBLAST_PNC,
        ),
    )
    results = {}
    for b in backends:
        t, recs = best_of(lambda: run_point(cfg, args.snr, workers=1, backend=b), 1)
        results[b] = recs
        print(f"  {b:<8} {t:7.2f} s")
    if len(results) == 2:
        print(f"  records identical: {results['cython'] == results['python']}")


if __name__ == "__main__":
    main()
