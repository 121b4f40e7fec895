"""Bit-stable text output: shortest round-trip decimals, CSV tables, JSON reports, atomic writes."""

from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from mpmath import libmp

from .lattice import to_fraction

__all__ = [
    "format_real",
    "write_atomic",
    "to_jsonable",
    "dumps_json",
    "csv_text",
    "trace_rows",
    "returns_rows",
    "points_rows",
    "pairing_rows",
]


def _mpf(x: Fraction, precision_bits: int):
    return libmp.from_rational(x.numerator, x.denominator, precision_bits, libmp.round_nearest)


def format_real(x, precision_bits: int) -> str:
    """Shortest decimal that rounds back to the same ``precision_bits``-bit binary value.

    Integers print without a fractional part. The output depends only on the
    rounded value, so it is identical across platforms.
    """
    x = to_fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    v = _mpf(x, precision_bits)
    lo, hi = 1, libmp.repr_dps(precision_bits)
    while lo < hi:
        mid = (lo + hi) // 2
        if libmp.from_str(libmp.to_str(v, mid), precision_bits, libmp.round_nearest) == v:
            hi = mid
        else:
            lo = mid + 1
    return libmp.to_str(v, lo)


def write_atomic(path, text: str) -> None:
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def to_jsonable(obj, precision_bits: int):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return format_real(obj, precision_bits)
    if isinstance(obj, (float, np.floating)):
        return format_real(Fraction(float(obj)), 53)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v, precision_bits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [to_jsonable(v, precision_bits) for v in obj]
    if hasattr(obj, "coords"):
        return list(obj.coords)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj, precision_bits: int) -> str:
    return json.dumps(to_jsonable(obj, precision_bits), indent=2) + "\n"


def csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(r) for r in rows)
    return "\n".join(lines) + "\n"


def trace_rows(trace, precision_bits: int):
    header = ["N", "remainder"]
    rows = ((str(n), format_real(r, precision_bits)) for n, r in trace.samples)
    return header, rows


def returns_rows(seq, s: int, precision_bits: int):
    header = ["k", "ell"] + [f"u_{i + 1}" for i in range(s)]
    rows = (
        [str(k), str(ell)] + [format_real(v, precision_bits) for v in u]
        for k, ell, u in seq.entries
    )
    return header, rows


def points_rows(points, shift, precision_bits: int):
    scheme = points.scheme
    header = [f"n_{i + 1}" for i in range(scheme.d)] + [f"emb_{i + 1}" for i in range(scheme.k)]

    def gen():
        for row in points.points:
            n = [int(v) for v in row]
            emb = scheme.embed(n, shift)
            yield [str(v) for v in n] + [format_real(v, precision_bits) for v in emb]

    return header, gen()


def pairing_rows(pairing, d: int, precision_bits: int):
    header = [f"n_{i + 1}" for i in range(d)] + ["i", "target_1", "displacement"]
    vol = pairing.volume

    def gen():
        for src, i in zip(pairing.sources, pairing.index):
            n = [int(v) for v in src]
            target = int(i) / vol
            disp = abs(n[0] - target)
            yield [str(v) for v in n] + [str(int(i)), format_real(target, precision_bits),
                                         format_real(disp, precision_bits)]

    return header, gen()
