"""Exit criteria for the build, one test per criterion.

Every test prints a ``[PASS]``/``[FAIL]`` line (repeated in the pytest
summary).  Run just this module with::

    pytest tests/test_acceptance.py -s

The Monte Carlo sweep uses the CLI defaults (seed 1, 1e6 symbols per point)
on a 0..30 dB grid in 1 dB steps.
"""

import math

import numpy as np
import pytest

from mimopnc import kernels
from mimopnc.cli import write_csv
from mimopnc.detect import DetectorId, choose_order
from mimopnc.harness import SimConfig, estimate_gap_db, run_point, run_sweep
from mimopnc.linalg import qr_decompose
from mimopnc.phy import RngStream, draw_channel
from oracles import brute_force_ml_xor, pnc_levels, random_channels, xor_threshold_error

SWEEP_GRID = tuple(float(s) for s in range(0, 31))
SYMBOLS = 1_000_000
TARGET_BER = 1e-3

D = DetectorId
PAIRS = [(D.VBLAST_PNC, D.VBLAST_NC), (D.SORTED_VBLAST_PNC, D.SORTED_VBLAST_NC)]


@pytest.fixture(scope="module")
def sweep():
    cfg = SimConfig(
        snr_db_grid=SWEEP_GRID,
        symbols_per_point=SYMBOLS,
        seed=1,
        detectors=(D.VBLAST_NC, D.VBLAST_PNC, D.SORTED_VBLAST_NC, D.SORTED_VBLAST_PNC),
    )
    return run_sweep(cfg)


def test_gap_unsorted(sweep, report):
    gap = estimate_gap_db(sweep, D.VBLAST_PNC, D.VBLAST_NC, TARGET_BER)
    ok = abs(gap - 0.5) <= 0.3
    report("gap vblast_pnc vs vblast_nc @1e-3 = 0.5 +- 0.3 dB", ok, f"{gap:.3f} dB")
    assert ok


def test_gap_sorted(sweep, report):
    gap = estimate_gap_db(sweep, D.SORTED_VBLAST_PNC, D.SORTED_VBLAST_NC, TARGET_BER)
    ok = abs(gap - 1.0) <= 0.4
    report("gap sorted_vblast_pnc vs sorted_vblast_nc @1e-3 = 1.0 +- 0.4 dB", ok, f"{gap:.3f} dB")
    assert ok


def test_pnc_dominates_nc_at_every_point(sweep, report):
    table = {(r.detector, r.snr_db): r for r in sweep}
    all_ok = True
    for pnc, nc in PAIRS:
        bad = []
        for snr in SWEEP_GRID:
            a, b = table[pnc, snr], table[nc, snr]
            se = math.hypot(a.std_error, b.std_error)
            if a.ber > b.ber + 3 * se:
                bad.append(f"{snr:g} dB ({a.ber:.4e} > {b.ber:.4e} + 3*{se:.1e})")
        ok = not bad
        all_ok &= ok
        detail = "all points" if ok else "violated at " + "; ".join(bad)
        report(f"{pnc} <= {nc} + 3 SE at every grid point", ok, detail)
    assert all_ok


def test_sorted_mechanism(report):
    hs = draw_channel(RngStream(1, 0), 100_000)
    r11_plain, r11_sorted, r22_ok = 0.0, 0.0, True
    for h in hs:
        plain = qr_decompose(h)
        chosen, _ = choose_order(h)
        r11_plain += plain.r11
        r11_sorted += chosen.r11
        r22_ok &= chosen.r22 >= plain.r22
    n = len(hs)
    ok = r11_sorted / n < r11_plain / n and r22_ok
    report(
        "sorted: mean r11 smaller, r22 never smaller (1e5 channels)",
        ok,
        f"mean r11 {r11_sorted / n:.4f} vs {r11_plain / n:.4f}, r22 rule held: {r22_ok}",
    )
    assert ok


def test_illustrating_example(report):
    delta, sigma_sq, trials = 0.01, 0.25, 100_000
    snr_db = -10 * math.log10(sigma_sq)
    cfg = SimConfig(
        snr_db_grid=(snr_db,),
        symbols_per_point=trials,
        seed=1,
        detectors=(D.VBLAST_NC, D.VBLAST_PNC),
        fixed_channel=[[1, 1 + delta], [0, delta]],
    )
    nc, pnc = run_point(cfg, snr_db)
    nc_ok = nc.ber > 0.2
    report("illustration: vblast_nc BER > 0.2", nc_ok, f"{nc.ber:.4f}")

    expected = xor_threshold_error(math.sqrt(2 * sigma_sq))
    se = math.sqrt(expected * (1 - expected) / pnc.bits_total)
    pnc_ok = abs(pnc.ber - expected) <= 3 * se
    report(
        "illustration: vblast_pnc BER = closed form with noise variance 2 sigma^2 (3 SE)",
        pnc_ok,
        f"{pnc.ber:.4f} vs {expected:.4f} (3 SE = {3 * se:.4f})",
    )
    assert nc_ok and pnc_ok


def test_property_qr_invariants(report):
    hs = random_channels(np.random.default_rng(1), 10_000)
    worst_rec = worst_orth = 0.0
    canonical = True
    for h in hs:
        f = qr_decompose(h)
        worst_rec = max(worst_rec, np.max(np.abs(f.q @ f.r - h)) / np.max(np.abs(h)))
        worst_orth = max(worst_orth, np.max(np.abs(f.q.conj().T @ f.q - np.eye(2))))
        canonical &= f.r[1, 0] == 0 and f.r[0, 0].imag == 0 and f.r[1, 1].imag == 0 and f.r11 > 0 and f.r22 >= 0
    ok = worst_rec <= 1e-12 and worst_orth <= 1e-12 and canonical
    report("QR invariants on 1e4 channels", ok, f"max rel. reconstruction {worst_rec:.1e}, orthogonality {worst_orth:.1e}")
    assert ok


def test_property_noise_free_exactness(report):
    hs = random_channels(np.random.default_rng(2), 1000)
    hs = hs[np.linalg.cond(hs) < 1e6]
    levels = np.array([1.0, -1.0])
    bitpairs = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=np.uint8)
    i1, i2 = np.meshgrid(np.arange(4), np.arange(4), indexing="ij")
    b1, b2 = bitpairs[i1.ravel()], bitpairs[i2.ravel()]
    sym = lambda b: levels[b[:, 0]] + 1j * levels[b[:, 1]]  # noqa: E731
    x = np.tile(np.stack([sym(b1), sym(b2)], axis=1), (len(hs), 1))
    h = np.repeat(hs, 16, axis=0)
    y = np.einsum("nij,nj->ni", h, x)
    truth = np.tile(b1 ^ b2, (len(hs), 1))
    failures = []
    for det in DetectorId:
        bits, degen = kernels.detect_batch(det, h, y, 0.0)
        if degen.any() or not np.array_equal(bits, truth):
            failures.append(str(det))
    ok = not failures
    report(f"noise-free exactness, 16 pairs x {len(hs)} channels, all detectors", ok, ", ".join(failures) or "exact")
    assert ok


def test_property_pnc_map_enumeration(report):
    from mimopnc.detect import pnc_map

    ok = all(
        pnc_map(complex(level, -level), k) == (xor, xor)
        for k in (-3, -2, -1, 1, 2, 3)
        for level, xor in pnc_levels(k)
    )
    report("pnc_map vs level-sum enumeration, k in -3..3", ok)
    assert ok


def test_property_ml_vs_brute_force(report):
    rng = np.random.default_rng(3)
    n = 10_000
    h = random_channels(rng, n)
    s2 = 10 ** (-rng.uniform(-3, 25, n) / 10)
    x = rng.choice([-1.0, 1.0], (n, 2)) + 1j * rng.choice([-1.0, 1.0], (n, 2))
    noise = np.sqrt(s2)[:, None] * (rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2)))
    y = np.einsum("nij,nj->ni", h, x) + noise
    mismatches = 0
    for i in range(n):
        bits, _ = kernels.detect_batch(D.ML_ORACLE, h[i : i + 1], y[i : i + 1], s2[i])
        mismatches += tuple(bits[0]) != brute_force_ml_xor(y[i], h[i], s2[i])
    ok = mismatches == 0
    report("ML oracle vs brute-force enumerator, 1e4 trials", ok, f"{mismatches} mismatches")
    assert ok


def test_property_csv_identical_across_workers(tmp_path, report):
    cfg = SimConfig(snr_db_grid=(0.0, 8.0, 16.0), symbols_per_point=100_000, seed=1, detectors=tuple(DetectorId))
    write_csv(run_sweep(cfg, workers=1), tmp_path / "w1.csv")
    write_csv(run_sweep(cfg, workers=8), tmp_path / "w8.csv")
    ok = (tmp_path / "w1.csv").read_bytes() == (tmp_path / "w8.csv").read_bytes()
    report("CSV byte-identical for 1 vs 8 workers", ok)
    assert ok
