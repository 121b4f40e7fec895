"""Cut-and-project sets with a special section as window, and their BD map to a lattice.

The physical space V is the graph of the d x s matrix ``alphas``:
``V = {(y, y @ alphas)}`` in R^k with k = d + s. A point n in Z^d is selected
when ``n_1 * alpha + gamma(n_2, ..., n_d) + w`` lies in the section mod Z^s,
where alpha is the first row of ``alphas`` and gamma the contribution of the
remaining rows. In each column (fixed n_2, ..., n_d) the selected n_1 are
paired in order with the lattice |A|^{-1} Z, which moves every point by a
bounded amount when the section is a bounded remainder set.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from decimal import ROUND_FLOOR, Decimal, localcontext
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

from .dynamics import check_precision_budget
from .errors import EmptyColumn
from .lattice import DEFAULT_PRECISION, RotationContext, to_fixed, to_fraction
from .region import RegionGeometry, construct, geometry
from .scan import OrbitScanner

__all__ = [
    "Scheme",
    "SectionedScheme",
    "PointSet",
    "BDPairing",
    "gamma_shift",
    "special_section",
    "fold_offset",
    "generate_points",
    "bd_pairing",
]


def _frac_part_string(x: str) -> str:
    with localcontext() as ctx:
        ctx.prec = len(x) + 20
        d = Decimal(x)
        r = d - d.to_integral_value(rounding=ROUND_FLOOR)
        return str(r)


@dataclass(frozen=True)
class Scheme:
    k: int
    d: int
    alphas: tuple[tuple[str, ...], ...]
    precision_bits: int = DEFAULT_PRECISION
    alphas_fx: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 1 <= self.d < self.k:
            raise ValueError("need 1 <= d < k")
        alphas = tuple(tuple(a if isinstance(a, str) else str(a) for a in row) for row in self.alphas)
        object.__setattr__(self, "alphas", alphas)
        if len(alphas) != self.d or any(len(row) != self.s for row in alphas):
            raise ValueError(f"alphas must be a {self.d} x {self.s} matrix")
        fx = tuple(tuple(to_fixed(a, self.precision_bits) for a in row) for row in alphas)
        object.__setattr__(self, "alphas_fx", fx)

    @property
    def s(self) -> int:
        return self.k - self.d

    @property
    def rotation(self) -> RotationContext:
        """The rotation by the first row of alphas, reduced mod 1."""
        return RotationContext(tuple(_frac_part_string(a) for a in self.alphas[0]), self.precision_bits)

    def to_json_dict(self) -> dict:
        return {"k": self.k, "d": self.d, "alphas": [list(r) for r in self.alphas]}

    @classmethod
    def from_json_dict(cls, data: dict, precision_bits: int = DEFAULT_PRECISION) -> "Scheme":
        return cls(int(data["k"]), int(data["d"]), tuple(tuple(r) for r in data["alphas"]), precision_bits)

    @classmethod
    def from_json(cls, text: str, precision_bits: int = DEFAULT_PRECISION) -> "Scheme":
        return cls.from_json_dict(json.loads(text), precision_bits)

    def linear_map_norm(self) -> float:
        """Operator norm of y -> (y, y @ alphas), the passage from Z^d coordinates to V."""
        a = np.array([[float(to_fraction(x)) for x in row] for row in self.alphas])
        m = np.vstack([np.eye(self.d), a.T])
        return float(np.linalg.norm(m, 2))

    def embed(self, n: Sequence, shift: Optional[Sequence] = None) -> tuple[Fraction, ...]:
        """The point y = n - shift of V, written in R^k."""
        y = [to_fraction(v) for v in n]
        if shift is not None:
            y = [a - to_fraction(b) for a, b in zip(y, shift)]
        one = 1 << self.precision_bits
        internal = [
            sum(y[i] * Fraction(self.alphas_fx[i][j], one) for i in range(self.d)) for j in range(self.s)
        ]
        return tuple(y) + tuple(internal)


def gamma_shift(scheme: Scheme, tail: Sequence[int]) -> tuple[Fraction, ...]:
    """sum_{i >= 2} n_i * (alpha_i^(1), ..., alpha_i^(s)): the offset of column (n_2, ..., n_d)."""
    one = 1 << scheme.precision_bits
    return tuple(Fraction(v, one) for v in _gamma_fx(scheme, tail))


def _gamma_fx(scheme: Scheme, tail: Sequence[int]) -> tuple[int, ...]:
    if len(tail) != scheme.d - 1:
        raise ValueError(f"tail must have length {scheme.d - 1}")
    return tuple(
        sum(int(n) * scheme.alphas_fx[i + 1][j] for i, n in enumerate(tail)) for j in range(scheme.s)
    )


@dataclass(frozen=True, eq=False)
class SectionedScheme:
    scheme: Scheme
    region: RegionGeometry
    offset: tuple[Fraction, ...] = ()

    def __post_init__(self):
        rot = self.scheme.rotation
        if self.region.ctx.alpha_fx != rot.alpha_fx or self.region.ctx.precision_bits != rot.precision_bits:
            raise ValueError("region was not built for this scheme's rotation")
        if not self.offset:
            object.__setattr__(self, "offset", (Fraction(0),) * self.scheme.s)
        else:
            object.__setattr__(self, "offset", tuple(to_fraction(v) for v in self.offset))

    @property
    def offset_fx(self) -> tuple[int, ...]:
        return tuple(to_fixed(v, self.scheme.precision_bits) for v in self.offset)


def special_section(scheme: Scheme, j_sequence: Sequence[int], offset=()) -> SectionedScheme:
    basis = construct(scheme.rotation, j_sequence)
    return SectionedScheme(scheme, geometry(basis, label="section"), tuple(offset))


def fold_offset(scheme: Scheme, x: Sequence) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """Reduce a starting point x in R^k to (w, x_phys).

    Y_{S,x} consists of the points n - x_phys (n in Z^d, written in V) for the
    n selected with section offset w = x_int - x_phys @ alphas.
    """
    if len(x) != scheme.k:
        raise ValueError(f"x must have {scheme.k} coordinates")
    xs = [to_fraction(v) for v in x]
    x_phys, x_int = xs[: scheme.d], xs[scheme.d:]
    al = [[to_fraction(a) for a in row] for row in scheme.alphas]
    w = tuple(x_int[j] - sum(x_phys[i] * al[i][j] for i in range(scheme.d)) for j in range(scheme.s))
    return w, tuple(x_phys)


def _tails(scheme: Scheme, tail_box: Sequence[tuple[int, int]]) -> list[tuple[int, ...]]:
    if len(tail_box) != scheme.d - 1:
        raise ValueError(f"tail_box needs {scheme.d - 1} ranges")
    return list(itertools.product(*(range(lo, hi + 1) for lo, hi in tail_box)))


@dataclass
class PointSet:
    """Selected points of Z^d, grouped in columns keyed by (n_2, ..., n_d)."""

    scheme: Scheme
    columns: dict[tuple[int, ...], np.ndarray]

    @property
    def points(self) -> np.ndarray:
        rows = []
        for tail, n1 in self.columns.items():
            block = np.empty((len(n1), self.scheme.d), dtype=np.int64)
            block[:, 0] = n1
            block[:, 1:] = tail
            rows.append(block)
        if not rows:
            return np.empty((0, self.scheme.d), dtype=np.int64)
        return np.concatenate(rows)

    def __len__(self):
        return sum(len(v) for v in self.columns.values())

    def embeddings(self, shift: Optional[Sequence] = None) -> Iterator[tuple[Fraction, ...]]:
        for row in self.points:
            yield self.scheme.embed([int(v) for v in row], shift)


def generate_points(
    ss: SectionedScheme,
    tail_box: Sequence[tuple[int, int]],
    n1_range: tuple[int, int],
    backend: Optional[str] = None,
) -> PointSet:
    """Points n with n_1 in n1_range (inclusive) and tail in tail_box whose window test passes.

    Columns are produced in lexicographic tail order, n_1 increasing.
    """
    scheme = ss.scheme
    lo, hi = n1_range
    if hi < lo:
        raise ValueError("empty n_1 range")
    check_precision_budget(scheme.precision_bits, max(abs(lo), abs(hi)))
    scanner = OrbitScanner(ss.region, backend)
    w = ss.offset_fx
    columns = {}
    for tail in _tails(scheme, tail_box):
        x0 = tuple(g + wi for g, wi in zip(_gamma_fx(scheme, tail), w))
        member, _ = scanner.members(x0, lo, hi - lo + 1)
        columns[tail] = lo + np.flatnonzero(member).astype(np.int64)
    return PointSet(scheme, columns)


@dataclass
class BDPairing:
    """Pairing of each selected (l_i, tail) with (i / |A|, tail).

    The index i counts selected points in the column with l_{-1} < 0 <= l_0.
    ``sup_displacement`` and ``column_sup`` are exact maxima over the sample;
    they are lower bounds for the bounded-distance constant, not the constant.
    """

    volume: Fraction
    sources: np.ndarray
    index: np.ndarray
    displacement: np.ndarray
    sup_displacement: Fraction
    column_sup: dict[tuple[int, ...], Fraction]
    column_origin: dict[tuple[int, ...], int]
    linear_map_norm: float

    def target(self, i: int) -> Fraction:
        return i / self.volume

    def pairs(self) -> Iterator[tuple[tuple[int, ...], tuple, float]]:
        for src, i, disp in zip(self.sources, self.index, self.displacement):
            src = tuple(int(v) for v in src)
            yield src, (self.target(int(i)),) + src[1:], float(disp)

    def __len__(self):
        return len(self.index)


def bd_pairing(
    ss: SectionedScheme,
    tail_box: Sequence[tuple[int, int]],
    n1_range: tuple[int, int],
    backend: Optional[str] = None,
) -> BDPairing:
    lo, hi = n1_range
    if lo > 0:
        raise ValueError("n1_range must contain 0 so that the index origin l_0 is inside the window")
    pts = generate_points(ss, tail_box, n1_range, backend)
    geom = ss.region
    vol = geom.volume
    inv_f = float(1 / vol)
    scale = geom.ctx.one ** geom.s
    den = geom.den
    sources, index, disp = [], [], []
    col_sup, col_origin = {}, {}
    for tail, ells in pts.columns.items():
        if len(ells) == 0:
            raise EmptyColumn(f"column {tail} has no selected points in the n_1 range", tail)
        origin = int(np.searchsorted(ells, 0, side="left"))
        idx = np.arange(len(ells), dtype=np.int64) - origin
        d_f = np.abs(ells.astype(np.float64) - idx.astype(np.float64) * inv_f)
        top = d_f.max()
        best = Fraction(-1)
        for p in np.flatnonzero(d_f >= top - 1e-6 * (1.0 + top)):
            val = Fraction(abs(int(ells[p]) * den - int(idx[p]) * scale), den)
            best = max(best, val)
        col_sup[tail] = best
        col_origin[tail] = int(ells[origin]) if origin < len(ells) else None
        block = np.empty((len(ells), ss.scheme.d), dtype=np.int64)
        block[:, 0] = ells
        block[:, 1:] = tail
        sources.append(block)
        index.append(idx)
        disp.append(d_f)
    return BDPairing(
        volume=vol,
        sources=np.concatenate(sources),
        index=np.concatenate(index),
        displacement=np.concatenate(disp),
        sup_displacement=max(col_sup.values()),
        column_sup=col_sup,
        column_origin=col_origin,
        linear_map_norm=ss.scheme.linear_map_norm(),
    )
