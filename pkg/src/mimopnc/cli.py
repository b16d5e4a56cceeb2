"""Command-line front end.

    mimopnc sweep --snr 0:1:30 --symbols 1000000 --seed 1 \\
        --detectors vblast-nc,vblast-pnc --out ber.csv
    mimopnc gap --in ber.csv --a vblast-pnc --b vblast-nc --at-ber 1e-3

Exit status is 0 on success, 2 on a usage error and 3 on a runtime error.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from dataclasses import dataclass

from .detect import DetectorId
from .errors import IoError, MimoPncError, ParseError, UsageError
from .harness import BerRecord, SimConfig, estimate_gap_db, run_sweep

__all__ = ["CSV_HEADER", "GapCommand", "SweepCommand", "main", "parse_args", "read_csv", "write_csv"]

CSV_HEADER = ("detector", "snr_db", "bits_total", "bit_errors", "ber", "degenerate_count")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3


@dataclass(frozen=True)
class SweepCommand:
    config: SimConfig
    out_path: str


@dataclass(frozen=True)
class GapCommand:
    in_path: str
    det_a: DetectorId
    det_b: DetectorId
    target_ber: float


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def parse_snr_grid(text: str) -> tuple[float, ...]:
    """Expand ``A:STEP:B`` into the inclusive grid A, A+STEP, ..., <= B."""
    parts = text.split(":")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"--snr: cannot parse {text!r}") from None
    if not all(math.isfinite(v) for v in values):
        raise UsageError("--snr: values must be finite")
    if len(values) == 1:
        return (values[0],)
    if len(values) != 3:
        raise UsageError("--snr expects A:STEP:B")
    start, step, stop = values
    if step <= 0:
        raise UsageError("--snr: STEP must be positive")
    if stop < start:
        raise UsageError("--snr: B must not be below A")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 10) for i in range(count))


def _positive_int(text: str, flag: str) -> int:
    try:
        value = float(text) if any(ch in text.lower() for ch in ".e") else int(text)
    except ValueError:
        raise UsageError(f"{flag}: not a number: {text!r}") from None
    if value != int(value) or value < 1:
        raise UsageError(f"{flag}: must be a positive integer")
    return int(value)


def _detectors(text: str) -> tuple[DetectorId, ...]:
    names = [n for n in text.split(",") if n.strip()]
    if not names:
        raise UsageError("--detectors: empty list")
    try:
        dets = tuple(DetectorId.parse(n) for n in names)
    except ValueError as exc:
        raise UsageError(f"--detectors: {exc}") from None
    if len(set(dets)) != len(dets):
        raise UsageError("--detectors: duplicate names")
    return dets


def _channel(text: str):
    try:
        entries = [complex(v.strip().replace(" ", "")) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--channel: cannot parse {text!r}") from None
    if len(entries) != 4:
        raise UsageError("--channel expects four entries h11,h12,h21,h22")
    return [[entries[0], entries[1]], [entries[2], entries[3]]]


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mimopnc", description="MIMO two-way relay PNC detection: BER sweeps and gap estimates.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sw = sub.add_parser("sweep", help="run a Monte Carlo SNR sweep and write CSV")
    sw.add_argument("--snr", required=True, help="grid as A:STEP:B in dB (inclusive)")
    sw.add_argument("--symbols", default="1000000", help="symbols per SNR point (default 1e6)")
    sw.add_argument("--seed", default="1", help="64-bit seed (default 1)")
    sw.add_argument(
        "--detectors",
        default=",".join(d.cli_name for d in DetectorId),
        help="comma list of: " + ", ".join(d.cli_name for d in DetectorId),
    )
    sw.add_argument("--channel", help="fixed channel h11,h12,h21,h22 instead of Rayleigh fading")
    sw.add_argument("--out", required=True, help="output CSV path")

    gp = sub.add_parser("gap", help="SNR gap in dB between two curves of a sweep CSV")
    gp.add_argument("--in", dest="in_path", required=True)
    gp.add_argument("--a", required=True, help="detector expected to be better")
    gp.add_argument("--b", required=True)
    gp.add_argument("--at-ber", default="1e-3")
    return parser


def parse_args(argv) -> SweepCommand | GapCommand:
    args = _build_parser().parse_args(list(argv))
    if args.command == "sweep":
        if not args.out:
            raise UsageError("--out: empty path")
        try:
            seed = int(args.seed)
        except ValueError:
            raise UsageError(f"--seed: not an integer: {args.seed!r}") from None
        if not 0 <= seed < 1 << 64:
            raise UsageError("--seed must lie in [0, 2**64)")
        try:
            config = SimConfig(
                snr_db_grid=parse_snr_grid(args.snr),
                symbols_per_point=_positive_int(args.symbols, "--symbols"),
                seed=seed,
                detectors=_detectors(args.detectors),
                fixed_channel=_channel(args.channel) if args.channel else None,
            )
        except MimoPncError as exc:
            if isinstance(exc, UsageError):
                raise
            raise UsageError(str(exc)) from None
        return SweepCommand(config=config, out_path=args.out)

    try:
        target = float(args.at_ber)
    except ValueError:
        raise UsageError(f"--at-ber: not a number: {args.at_ber!r}") from None
    if not 0.0 < target < 1.0:
        raise UsageError("--at-ber must lie in (0, 1)")
    if not args.in_path:
        raise UsageError("--in: empty path")
    try:
        det_a, det_b = DetectorId.parse(args.a), DetectorId.parse(args.b)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return GapCommand(in_path=args.in_path, det_a=det_a, det_b=det_b, target_ber=target)


def _format_row(r: BerRecord) -> list[str]:
    return [
        r.detector.value,
        f"{r.snr_db:.2f}",
        str(r.bits_total),
        str(r.bit_errors),
        f"{r.ber:.5e}",
        str(r.degenerate_count),
    ]


def write_csv(records, path) -> None:
    """Write records sorted by (detector, snr_db) with the fixed header."""
    records = list(records)
    if not records:
        raise IoError("refusing to write an empty record list")
    records.sort(key=lambda r: (DetectorId(r.detector).value, r.snr_db))
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            writer.writerows(_format_row(r) for r in records)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _parse_row(row, lineno) -> BerRecord:
    if len(row) != len(CSV_HEADER):
        raise ParseError(f"expected {len(CSV_HEADER)} fields, got {len(row)}", lineno)
    name, snr, total, errors, ber, degen = row
    try:
        det = DetectorId(name)
    except ValueError:
        raise ParseError(f"unknown detector {name!r}", lineno) from None
    try:
        snr_db, ber_val = float(snr), float(ber)
        bits_total, bit_errors, degenerate = int(total), int(errors), int(degen)
    except ValueError as exc:
        raise ParseError(str(exc), lineno) from None
    if not math.isfinite(snr_db):
        raise ParseError("snr_db must be finite", lineno)
    if bits_total < 1 or not 0 <= bit_errors <= bits_total or degenerate < 0:
        raise ParseError("inconsistent counts", lineno)
    exact = bit_errors / bits_total
    # ber is stored with 6 significant digits; compare against that rendering
    if abs(ber_val - float(f"{exact:.5e}")) > 1e-9:
        raise ParseError(f"ber {ber!r} does not match {bit_errors}/{bits_total}", lineno)
    return BerRecord(det, snr_db, bits_total, bit_errors, exact, degenerate)


def read_csv(path) -> list[BerRecord]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ParseError("bad header, expected " + ",".join(CSV_HEADER), 1)
    return [_parse_row(row, i) for i, row in enumerate(rows[1:], start=2)]


def _run(cmd) -> None:
    if isinstance(cmd, SweepCommand):
        def progress(snr):
            print(f"  {snr:6.2f} dB done", file=sys.stderr)

        records = run_sweep(cmd.config, progress=progress if os.environ.get("MIMOPNC_VERBOSE") else None)
        write_csv(records, cmd.out_path)
        print(f"wrote {len(records)} records to {cmd.out_path}")
    else:
        records = read_csv(cmd.in_path)
        gap = estimate_gap_db(records, cmd.det_a, cmd.det_b, cmd.target_ber)
        print(f"{gap:.4f}")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cmd = parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        _run(cmd)
    except (MimoPncError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
