"""VBLAST physical-layer network coding for the 2x2 MIMO two-way relay channel."""

from .detect import (
    DetectorId,
    DetectorInput,
    compute_k,
    detect_xor,
    detect_linear_zf_nc,
    detect_ml_xor,
    detect_vblast_nc,
    detect_vblast_pnc,
    pnc_map,
)
from .errors import (
    ConfigError,
    DegenerateChannel,
    InvalidCoefficient,
    IoError,
    NoCrossing,
    ParseError,
    UsageError,
)
from .harness import BerRecord, SimConfig, estimate_gap_db, run_point, run_sweep
from .linalg import QrFactors, apply_qh, qr_decompose, swap_columns
from .phy import (
    BitPair,
    NoiseParams,
    RngStream,
    demodulate_hard,
    draw_channel,
    draw_noise,
    modulate,
    snr_to_sigma,
    xor_bits,
)

__version__ = "0.1.0"
