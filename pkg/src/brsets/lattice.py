"""The lattice generated by e_1, ..., e_s and alpha' = (alpha, 1).

Elements are stored as exact integer coordinates ``(a, n)`` in the generating
basis. Real quantities are derived from the rotation vector rounded once to a
``P``-bit fixed-point grid, so every real computed here is an exact dyadic
rational; the only approximation in the whole package is that initial rounding
of alpha.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import mpmath

__all__ = [
    "DEFAULT_PRECISION",
    "RotationContext",
    "LatticeVector",
    "embed",
    "phys",
    "last",
    "basis_determinant",
    "integer_adjugate",
    "check_total_irrationality",
    "to_fraction",
]

DEFAULT_PRECISION = 256
MIN_PRECISION = 64


def to_fraction(x) -> Fraction:
    """Convert a decimal string, integer, Fraction or float to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, mpmath.mpf):
        man, exp = mpmath.mpf(x).man_exp
        return Fraction(man) * Fraction(2) ** exp
    return Fraction(x)


def to_fixed(x, precision_bits: int) -> int:
    """Round ``x`` to the nearest multiple of 2**-P, returned in units of 2**-P."""
    return round(to_fraction(x) * (1 << precision_bits))


@dataclass(frozen=True)
class RotationContext:
    """Rotation vector alpha in [0,1)^s together with the working precision.

    ``alpha`` keeps the caller's decimal strings so that serialization is
    lossless; ``alpha_fx`` holds the rounded values in units of 2**-P.
    Total irrationality is assumed, not checked (see
    :func:`check_total_irrationality` for an advisory test).
    """

    alpha: tuple[str, ...]
    precision_bits: int = DEFAULT_PRECISION
    alpha_fx: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        alpha = tuple(a if isinstance(a, str) else str(a) for a in self.alpha)
        object.__setattr__(self, "alpha", alpha)
        if not alpha:
            raise ValueError("alpha must have at least one component")
        if self.precision_bits < MIN_PRECISION:
            raise ValueError(f"precision_bits must be >= {MIN_PRECISION}")
        one = 1 << self.precision_bits
        fx = []
        for a in alpha:
            q = to_fraction(a)
            if not 0 <= q < 1:
                raise ValueError(f"alpha component {a} is not in [0, 1)")
            v = to_fixed(q, self.precision_bits)
            if v >= one:
                raise ValueError(f"alpha component {a} rounds to 1 at P={self.precision_bits}")
            fx.append(v)
        object.__setattr__(self, "alpha_fx", tuple(fx))

    @property
    def s(self) -> int:
        return len(self.alpha)

    @property
    def one(self) -> int:
        """The integer 1 in fixed-point units."""
        return 1 << self.precision_bits

    @property
    def alpha_exact(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(v, self.one) for v in self.alpha_fx)

    def with_precision(self, precision_bits: int) -> "RotationContext":
        return RotationContext(self.alpha, precision_bits)


@dataclass(frozen=True)
class LatticeVector:
    """The lattice point sum(a_i e_i) + n * alpha'."""

    a: tuple[int, ...]
    n: int

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def from_coords(cls, coords: Sequence[int]) -> "LatticeVector":
        coords = list(coords)
        return cls(tuple(coords[:-1]), coords[-1])

    @classmethod
    def zero(cls, s: int) -> "LatticeVector":
        return cls((0,) * s, 0)

    @property
    def coords(self) -> tuple[int, ...]:
        return self.a + (self.n,)

    def __add__(self, other: "LatticeVector") -> "LatticeVector":
        return LatticeVector(tuple(x + y for x, y in zip(self.a, other.a)), self.n + other.n)

    def __sub__(self, other: "LatticeVector") -> "LatticeVector":
        return LatticeVector(tuple(x - y for x, y in zip(self.a, other.a)), self.n - other.n)

    def __neg__(self) -> "LatticeVector":
        return LatticeVector(tuple(-x for x in self.a), -self.n)

    def __mul__(self, k: int) -> "LatticeVector":
        if not isinstance(k, int):
            return NotImplemented
        return LatticeVector(tuple(k * x for x in self.a), k * self.n)

    __rmul__ = __mul__


def phys_fixed(ctx: RotationContext, v: LatticeVector) -> tuple[int, ...]:
    """phi(v) in units of 2**-P (exact integers)."""
    one = ctx.one
    return tuple(v.n * al + a * one for al, a in zip(ctx.alpha_fx, v.a))


def embed(ctx: RotationContext, v: LatticeVector) -> tuple:
    """Real embedding ``(n*alpha + a, n)``; the last entry is the exact integer n."""
    if len(v.a) != ctx.s:
        raise ValueError("lattice vector dimension does not match the rotation")
    one = ctx.one
    return tuple(Fraction(x, one) for x in phys_fixed(ctx, v)) + (v.n,)


def phys(embedded: Sequence) -> tuple:
    """Drop the last coordinate (the map onto the first s coordinates)."""
    return tuple(embedded[:-1])


def last(v: LatticeVector) -> int:
    return v.n


def _bareiss_det(rows: list[list[int]]) -> int:
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * pivot - m[i][k] * m[k][j]) // prev
        prev = pivot
    return sign * m[n - 1][n - 1]


def integer_det(rows: Sequence[Sequence[int]]) -> int:
    """Exact determinant of a square integer matrix (fraction-free elimination)."""
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("matrix is not square")
    return _bareiss_det([[int(x) for x in r] for r in rows])


def integer_adjugate(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Adjugate matrix, so that ``M @ adj(M) == det(M) * I``."""
    n = len(rows)
    if n == 1:
        return [[1]]
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[rows[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            adj[j][i] = (-1) ** (i + j) * integer_det(minor)
    return adj


def basis_determinant(vectors: Iterable[LatticeVector]) -> int:
    """Determinant of the (s+1)x(s+1) matrix whose rows are the (a, n) coordinates.

    The vectors form a Z-basis of the lattice iff the result is +1 or -1.
    """
    vectors = list(vectors)
    if not vectors:
        raise ValueError("empty basis")
    s = len(vectors[0].a)
    if len(vectors) != s + 1 or any(len(v.a) != s for v in vectors):
        raise ValueError(f"expected {s + 1} vectors of dimension {s}")
    return integer_det([v.coords for v in vectors])


def check_total_irrationality(ctx: RotationContext, max_coeff: int = 1000):
    """Search for an integer relation among (alpha_1, ..., alpha_s, 1).

    Advisory only: a hit triggers a warning and is returned, never raised.
    """
    dps = max(15, int(ctx.precision_bits * 0.3010) // 2)
    with mpmath.workdps(dps):
        xs = [mpmath.mpf(a) for a in ctx.alpha] + [mpmath.mpf(1)]
        if any(x == 0 for x in xs):
            relation = [1 if x == 0 else 0 for x in xs]
        else:
            relation = mpmath.pslq(xs, maxcoeff=max_coeff, maxsteps=10**5)
    if relation is not None:
        warnings.warn(
            f"alpha satisfies the integer relation {relation}; the rotation is not totally irrational",
            RuntimeWarning,
            stacklevel=2,
        )
    return relation
