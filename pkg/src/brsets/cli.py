"""Command-line front end.

Exit status: 0 success, 1 invalid configuration, 2 precision or boundary
ambiguity, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .cutproject import Scheme, SectionedScheme, bd_pairing, fold_offset, generate_points
from .dynamics import naive_returns, remainder_trace, renormalized_returns, verify_rauzy
from .errors import (
    BRSError,
    CardinalityViolation,
    EmptyColumn,
    InjectivityViolation,
    PrecisionError,
    SingularBasis,
    VerificationFailure,
)
from .formats import (
    csv_text,
    dumps_json,
    format_real,
    pairing_rows,
    points_rows,
    returns_rows,
    trace_rows,
    write_atomic,
)
from .lattice import DEFAULT_PRECISION, MIN_PRECISION, RotationContext
from .region import SpecialBasis, check_conditions, construct, geometry, round_robin

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PRECISION = 2
EXIT_VERIFY = 3

COMMANDS = ("construct", "verify", "trace", "returns", "cps", "bdmap")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    precision_bits: int = DEFAULT_PRECISION
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.precision_bits < MIN_PRECISION:
            raise ConfigError(f"precision must be at least {MIN_PRECISION} bits")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def default_precision() -> int:
    raw = os.environ.get("BRS_PRECISION_BITS")
    if raw is None or not raw.strip():
        return DEFAULT_PRECISION
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"BRS_PRECISION_BITS must be an integer, got {raw!r}") from None


def parse_steps(text: str, s: int) -> list[int]:
    """``"1,2,1"`` or ``"rr:<count>"``; an empty string means no steps."""
    text = text.strip()
    if not text:
        return []
    if text.startswith("rr:"):
        count = _positive_int(text[3:], "round-robin count", allow_zero=True)
        return round_robin(s, count)
    try:
        steps = [int(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"bad --steps value {text!r}") from None
    for j in steps:
        if not 1 <= j <= s:
            raise ConfigError(f"step index {j} outside 1..{s}")
    return steps


def parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise ConfigError(f"bad range {text!r}, expected lo:hi") from None
    if hi < lo:
        raise ConfigError(f"empty range {text!r}")
    return lo, hi


def _positive_int(text, what, allow_zero=False) -> int:
    try:
        v = int(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be an integer") from None
    if v < 0 or (v == 0 and not allow_zero):
        raise ConfigError(f"{what} must be positive")
    return v


def _reals(text: Optional[str]) -> Optional[list[str]]:
    if text is None:
        return None
    return [v.strip() for v in text.split(",") if v.strip()]


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None


def _load_basis(path, precision_bits: int) -> SpecialBasis:
    try:
        return SpecialBasis.from_json(_read_text(path), precision_bits)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid basis file {path}: {exc}") from None


def _load_scheme(path, precision_bits: int) -> Scheme:
    try:
        return Scheme.from_json(_read_text(path), precision_bits)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scheme file {path}: {exc}") from None


def _section(cfg: RunConfig) -> tuple[SectionedScheme, tuple]:
    p = cfg.params
    scheme = _load_scheme(p["scheme"], cfg.precision_bits)
    if p.get("basis"):
        basis = _load_basis(p["basis"], cfg.precision_bits)
    else:
        basis = construct(scheme.rotation, parse_steps(p.get("steps") or "", scheme.s))
    shift = ()
    offset = ()
    if p.get("x"):
        offset, shift = fold_offset(scheme, _reals(p["x"]))
    try:
        ss = SectionedScheme(scheme, geometry(basis, label="section"), offset)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return ss, shift


def _tail_box(text: Optional[str], d: int) -> list[tuple[int, int]]:
    if d == 1:
        return []
    if not text:
        raise ConfigError(f"--tails needs {d - 1} ranges")
    box = [parse_range(r) for r in text.split(",")]
    if len(box) != d - 1:
        raise ConfigError(f"--tails needs {d - 1} ranges")
    return box


def _emit(path, text):
    if path:
        write_atomic(path, text)


def cmd_construct(cfg: RunConfig) -> str:
    p = cfg.params
    alpha = _reals(p["alpha"])
    if not alpha:
        raise ConfigError("--alpha is required")
    try:
        ctx = RotationContext(tuple(alpha), cfg.precision_bits)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    basis = construct(ctx, parse_steps(p.get("steps") or "", ctx.s))
    _emit(p.get("out"), basis.to_json() + "\n")
    geom = geometry(basis)
    t = ",".join(format_real(v, cfg.precision_bits) for v in geom.t)
    return f"volume={format_real(geom.volume, cfg.precision_bits)} t={t}"


def cmd_verify(cfg: RunConfig) -> str:
    p = cfg.params
    basis = _load_basis(p["basis"], cfg.precision_bits)
    cond = check_conditions(basis)
    records = cond.as_records()
    rauzy = verify_rauzy(geometry(basis), sample_count=p.get("samples", 1000), seed=cfg.seed)
    records.extend(rauzy.as_records())
    _emit(p.get("out"), dumps_json(records, cfg.precision_bits))
    names = " ".join(f"{r['condition']}={'pass' if r['pass'] else 'FAIL'}" for r in records)
    if not cond.passed or not cond.sign_invariant:
        failed = [r for r in records if not r["pass"]]
        raise VerificationFailure(f"{names}", failed[0])
    rauzy.raise_for_failure()
    return names


def cmd_trace(cfg: RunConfig) -> str:
    p = cfg.params
    basis = _load_basis(p["basis"], cfg.precision_bits)
    geom = geometry(basis)
    tr = remainder_trace(geom, _reals(p.get("x0")), N_max=p["N"], stride=p.get("stride", 1))
    header, rows = trace_rows(tr, cfg.precision_bits)
    _emit(p.get("out"), csv_text(header, rows))
    return f"max_remainder={format_real(tr.max_abs, cfg.precision_bits)} at N={tr.argmax_N}"


def cmd_returns(cfg: RunConfig) -> str:
    p = cfg.params
    basis = _load_basis(p["basis"], cfg.precision_bits)
    geom = geometry(basis)
    x0 = _reals(p.get("x0"))
    if p.get("method", "renormalized") == "naive":
        seq = naive_returns(geom, x0, count=p["count"])
    else:
        if x0 and any(v not in ("0", "0.0") for v in x0):
            raise ConfigError("the renormalized method starts at the origin; use --method naive")
        seq = renormalized_returns(geom, p["count"])
    header, rows = returns_rows(seq, geom.s, cfg.precision_bits)
    _emit(p.get("out"), csv_text(header, rows))
    return f"returns={len(seq)} last_ell={seq.ells[-1] if seq.ells else 0}"


def cmd_cps(cfg: RunConfig) -> str:
    p = cfg.params
    ss, shift = _section(cfg)
    pts = generate_points(ss, _tail_box(p.get("tails"), ss.scheme.d), parse_range(p["n1"]))
    header, rows = points_rows(pts, shift or None, cfg.precision_bits)
    _emit(p.get("out"), csv_text(header, rows))
    return f"points={len(pts)} volume={format_real(ss.region.volume, cfg.precision_bits)}"


def cmd_bdmap(cfg: RunConfig) -> str:
    p = cfg.params
    ss, _ = _section(cfg)
    pairing = bd_pairing(ss, _tail_box(p.get("tails"), ss.scheme.d), parse_range(p["n1"]))
    header, rows = pairing_rows(pairing, ss.scheme.d, cfg.precision_bits)
    _emit(p.get("out"), csv_text(header, rows))
    return f"pairs={len(pairing)} sup_displacement={format_real(pairing.sup_displacement, cfg.precision_bits)}"


_DISPATCH = {
    "construct": cmd_construct,
    "verify": cmd_verify,
    "trace": cmd_trace,
    "returns": cmd_returns,
    "cps": cmd_cps,
    "bdmap": cmd_bdmap,
}


def run(cfg: RunConfig) -> int:
    """Run one command; returns the exit status. Errors are reported on stderr."""
    try:
        summary = _DISPATCH[cfg.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PrecisionError as exc:
        datum = getattr(exc, "datum", None)
        extra = f" datum={datum}" if datum is not None else ""
        print(f"precision error: {exc}{extra}", file=sys.stderr)
        return EXIT_PRECISION
    except (VerificationFailure, InjectivityViolation, CardinalityViolation) as exc:
        witness = getattr(exc, "witness", None)
        extra = f" witness={dumps_json(witness, cfg.precision_bits).strip()}" if witness is not None else ""
        print(f"verification failed: {exc}{extra}", file=sys.stderr)
        return EXIT_VERIFY
    except (SingularBasis, EmptyColumn, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BRSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    print(summary)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="brsets", description="Bounded remainder sets and cut-and-project sets.")
    parser.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    common.add_argument("--precision", type=int, default=None, help="working precision in bits")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output file (written atomically)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("construct", parents=[common], help="build a special basis")
    p.add_argument("--alpha", required=True, help="comma-separated decimal strings")
    p.add_argument("--steps", default="", help="comma list of j indices or rr:<count>")

    p = sub.add_parser("verify", parents=[common], help="check S1-S4, R1, R2")
    p.add_argument("--basis", required=True)
    p.add_argument("--samples", type=int, default=1000)

    p = sub.add_parser("trace", parents=[common], help="remainder trace")
    p.add_argument("--basis", required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--x0", default=None)

    p = sub.add_parser("returns", parents=[common], help="return times")
    p.add_argument("--basis", required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--method", choices=("naive", "renormalized"), default="renormalized")
    p.add_argument("--x0", default=None)

    for name, help_ in (("cps", "cut-and-project points"), ("bdmap", "bounded displacement pairing")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--scheme", required=True, help='JSON file {"k", "d", "alphas"}')
        p.add_argument("--steps", default="", help="construction steps for the section")
        p.add_argument("--basis", default=None, help="use this basis instead of --steps")
        p.add_argument("--tails", default=None, help="lo:hi ranges for n_2..n_d, comma separated")
        p.add_argument("--n1", required=True, help="lo:hi range for n_1")
        p.add_argument("--x", default=None, help="start point in R^k, comma separated")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    params = {k: v for k, v in vars(args).items() if k not in ("command", "precision", "seed")}
    for key, allow_zero in (("samples", False), ("N", False), ("stride", False), ("count", False)):
        if key in params:
            params[key] = _positive_int(params[key], f"--{key}", allow_zero)
    precision = args.precision if args.precision is not None else default_precision()
    return RunConfig(args.command, precision, args.seed, params)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
