from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mimopnc.detect import (
    DetectorId,
    DetectorInput,
    choose_order,
    compute_k,
    detect_linear_zf_nc,
    detect_ml_xor,
    detect_vblast_nc,
    detect_vblast_pnc,
    detect_xor,
    pnc_map,
)
from mimopnc.errors import DegenerateChannel, InvalidCoefficient
from mimopnc.linalg import apply_qh, qr_decompose, swap_columns
from mimopnc.phy import BitPair, NoiseParams, modulate, xor_bits
from oracles import brute_force_ml_xor, pnc_levels, random_channels

ALL_BITS = [BitPair(a, b) for a, b in product((0, 1), repeat=2)]
PAIRS = list(product(ALL_BITS, repeat=2))


def example_channel(delta):
    return np.array([[1, 1 + delta], [0, delta]], dtype=complex)


# --- compute_k -------------------------------------------------------------

def test_compute_k_examples():
    assert compute_k(1.0, 1.1 + 0.4j) == 1
    assert compute_k(1.0, 0j) == 0
    assert compute_k(2.0, 3 + 5j) == 2
    assert compute_k(2.0, -3 + 5j) == -2
    assert compute_k(1.0, 0.5) == 1 and compute_k(1.0, -0.5) == -1
    assert compute_k(1.0, 0.49999999999999994) == 0


def test_compute_k_rejects_nonpositive_r11():
    with pytest.raises(DegenerateChannel):
        compute_k(0.0, 1.0)


@given(
    st.floats(0.01, 100),
    st.floats(-100, 100),
    st.floats(-100, 100),
    st.sampled_from([0.5, 2.0, 4.0, 1024.0]),
)
def test_compute_k_scale_invariant(r11, re, im, c):
    # power-of-two scales keep the ratio bit-exact
    assert compute_k(c * r11, complex(c * re, c * im)) == compute_k(r11, complex(re, im))


def test_residual_is_at_most_half_r11(np_rng):
    for h in random_channels(np_rng, 2000):
        for f in (qr_decompose(h), choose_order(h)[0]):
            k = compute_k(f.r11, f.r12)
            assert abs(f.r12.real - k * f.r11) <= f.r11 / 2 * (1 + 1e-12)


# --- pnc_map ---------------------------------------------------------------

def test_pnc_map_examples():
    assert pnc_map(2.1 + 0.05j, 1) == (0, 1)
    assert pnc_map(3 + 3j, 2) == (0, 0)
    assert pnc_map(0 - 2j, -1) == (0, 1)


def test_pnc_map_zero_k():
    with pytest.raises(InvalidCoefficient):
        pnc_map(1 + 1j, 0)


@pytest.mark.parametrize("k", [-3, -2, -1, 1, 2, 3])
def test_pnc_map_matches_level_enumeration(k):
    for level, xor in pnc_levels(k):
        assert pnc_map(complex(level, level), k) == (xor, xor)


@pytest.mark.parametrize("k", [-3, -2, -1, 1, 2, 3])
def test_pnc_map_symbol_domain(k):
    for b1, b2 in PAIRS:
        assert pnc_map(modulate(b1) + k * modulate(b2), k) == xor_bits(b1, b2)


# --- two-user illustration -------------------------------------------------

def test_illustration_partial_cancellation_noise_free():
    delta = 0.1
    h = example_channel(delta)
    f = qr_decompose(h)
    assert compute_k(f.r11, f.r12) == 1
    # residual left to cancel is delta * x2
    assert f.r12 - 1 * f.r11 == pytest.approx(delta)
    for b1, b2 in PAIRS:
        x1, x2 = modulate(b1), modulate(b2)
        y = h @ np.array([x1, x2])
        w1, _ = apply_qh(f, y)
        est = (w1 - (f.r12 - f.r11) * x2) / f.r11
        assert est == pytest.approx(x1 + x2, abs=1e-12)
        assert detect_vblast_pnc(DetectorInput(y, h)) == xor_bits(b1, b2)


def test_illustration_soft_subtraction_leaves_n1_minus_n2():
    # y1 - delta * (y2 / delta) = x1 + x2 + n1 - n2
    delta = 0.01
    h = example_channel(delta)
    x = np.array([1 - 1j, -1 - 1j])
    n = np.array([0.3 + 0.1j, -0.2 + 0.4j])
    y = h @ x + n
    f = qr_decompose(h)
    w1, w2 = apply_qh(f, y)
    x2_soft = w2 / f.r22
    est = (w1 - (f.r12 - f.r11) * x2_soft) / f.r11
    assert est == pytest.approx(x[0] + x[1] + n[0] - n[1], abs=1e-9)


def test_illustration_delta_half_rounds_to_two():
    f = qr_decompose(example_channel(0.5))
    assert compute_k(f.r11, f.r12) == 2


def test_identity_channel_falls_back_to_nc():
    h = np.eye(2, dtype=complex)
    f = qr_decompose(h)
    assert compute_k(f.r11, f.r12) == 0
    for b1, b2 in PAIRS:
        y = np.array([modulate(b1), modulate(b2)])
        assert detect_vblast_pnc(DetectorInput(y, h)) == xor_bits(b1, b2)


def test_zf_identity_is_two_independent_decisions(np_rng):
    h = np.eye(2, dtype=complex)
    for _ in range(200):
        y = np_rng.standard_normal(2) + 1j * np_rng.standard_normal(2)
        d1 = BitPair(int(y[0].real < 0), int(y[0].imag < 0))
        d2 = BitPair(int(y[1].real < 0), int(y[1].imag < 0))
        assert detect_linear_zf_nc(DetectorInput(y, h)) == xor_bits(d1, d2)


# --- noise-free exactness and symmetry -------------------------------------

@pytest.mark.parametrize("det", list(DetectorId))
def test_noise_free_exactness(det, np_rng):
    for h in random_channels(np_rng, 100):
        if np.linalg.cond(h) >= 1e6:
            continue
        for b1, b2 in PAIRS:
            y = h @ np.array([modulate(b1), modulate(b2)])
            assert detect_xor(det, DetectorInput(y, h)) == xor_bits(b1, b2)


@pytest.mark.parametrize("det", list(DetectorId))
def test_user_exchange_invariance(det, np_rng):
    for h in random_channels(np_rng, 50):
        for b1, b2 in PAIRS:
            x = np.array([modulate(b1), modulate(b2)])
            out = detect_xor(det, DetectorInput(h @ x, h))
            out_swapped = detect_xor(det, DetectorInput(swap_columns(h) @ x[::-1], swap_columns(h)))
            assert out == out_swapped


def test_sorted_picks_larger_r22(np_rng):
    swaps = 0
    for h in random_channels(np_rng, 2000):
        f, swapped = choose_order(h)
        other = qr_decompose(h if swapped else swap_columns(h))
        assert f.r22 >= other.r22
        swaps += swapped
    assert 0 < swaps < 2000


def test_sorted_detector_uses_swapped_factorization():
    # second column much weaker than the first, so the swap raises r22
    h = np.array([[2.0, 0.1], [0.5j, 0.3]], dtype=complex)
    f, swapped = choose_order(h)
    assert swapped and f.r22 > qr_decompose(h).r22
    for b1, b2 in PAIRS:
        y = h @ np.array([modulate(b1), modulate(b2)])
        assert detect_vblast_nc(DetectorInput(y, h), sorted=True) == xor_bits(b1, b2)


def test_singular_channel_raises_except_ml():
    h = np.array([[1, 2], [2, 4]], dtype=complex)
    inp = DetectorInput(np.array([1 + 1j, 0.5j]), h, NoiseParams.from_sigma_sq(0.1))
    for fn in (detect_vblast_nc, detect_vblast_pnc, detect_linear_zf_nc):
        with pytest.raises(DegenerateChannel):
            fn(inp)
    assert detect_ml_xor(inp) in ALL_BITS


# --- ML oracle -------------------------------------------------------------

def test_ml_noise_free():
    h = np.array([[0.4 + 1j, -0.7], [0.2j, 1.1 - 0.3j]])
    for b1, b2 in PAIRS:
        y = h @ np.array([modulate(b1), modulate(b2)])
        assert detect_ml_xor(DetectorInput(y, h)) == xor_bits(b1, b2)


def test_ml_matches_brute_force(np_rng):
    hs = random_channels(np_rng, 10_000)
    sigma_sq = 10 ** (-np_rng.uniform(-3, 25, 10_000) / 10)
    for h, s2 in zip(hs, sigma_sq):
        x = np_rng.choice([-1, 1], 2) + 1j * np_rng.choice([-1, 1], 2)
        y = h @ x + np.sqrt(s2) * (np_rng.standard_normal(2) + 1j * np_rng.standard_normal(2))
        got = detect_ml_xor(DetectorInput(y, h, NoiseParams.from_sigma_sq(s2)))
        assert got == brute_force_ml_xor(y, h, s2)


def test_detector_id_parsing():
    assert DetectorId.parse("vblast-pnc") is DetectorId.VBLAST_PNC
    assert DetectorId.parse("SORTED_VBLAST_NC") is DetectorId.SORTED_VBLAST_NC
    assert DetectorId.ML_ORACLE.cli_name == "ml-oracle"
    with pytest.raises(ValueError):
        DetectorId.parse("mmse")
