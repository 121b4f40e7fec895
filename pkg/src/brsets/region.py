"""Special regions: parallelotopes spanned by a unimodular basis of the lattice.

A :class:`SpecialBasis` is an ordered tuple ``v_1, ..., v_s, v_{s+1}`` of lattice
vectors; the region is the half-open parallelotope spanned by the projections of
``v_1, ..., v_s`` and ``v_{s+1}`` is the return vector. The basis-exchange step
``v_j <- v_j - v_{s+1}`` followed by reduction of ``v_{s+1}`` produces new special
regions from old ones; for s = 1 it reproduces the continued fraction algorithm.

All geometry is exact: coordinates are ratios of Python integers computed from
the fixed-point rotation vector held by :class:`~brsets.lattice.RotationContext`.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    BoundaryAmbiguity,
    DegenerateCoefficient,
    InjectivityViolation,
    SingularBasis,
)
from .lattice import (
    LatticeVector,
    RotationContext,
    basis_determinant,
    integer_adjugate,
    integer_det,
    phys_fixed,
    to_fraction,
    to_fixed,
)

__all__ = [
    "MAX_EXHAUSTIVE_S",
    "SpecialBasis",
    "RegionGeometry",
    "ConditionReport",
    "initial_basis",
    "geometry",
    "raw_parallelotope",
    "check_conditions",
    "exchange_step",
    "construct",
    "round_robin",
    "torus_membership",
]

MAX_EXHAUSTIVE_S = 20


def coordinate_state(num: int, den: int, half: int) -> int:
    """Classify the coordinate ``num/den`` (den > 0) against the cell [0, 1).

    Returns 0 (inside), 1 (outside) or 2 (within 2**-half of 0 or 1 without
    being exactly on it). Exact hits on 0 or 1 are decided by the half-open
    convention.
    """
    if num < 0:
        return 2 if ((-num) << half) < den else 1
    if num >= den:
        if num == den:
            return 1
        return 2 if ((num - den) << half) < den else 1
    if num and (num << half) < den:
        return 2
    if ((den - num) << half) < den:
        return 2
    return 0


@dataclass(frozen=True)
class SpecialBasis:
    ctx: RotationContext
    vectors: tuple[LatticeVector, ...]

    def __post_init__(self):
        vectors = tuple(self.vectors)
        object.__setattr__(self, "vectors", vectors)
        s = self.ctx.s
        if len(vectors) != s + 1 or any(len(v.a) != s for v in vectors):
            raise ValueError(f"a special basis for s={s} needs {s + 1} vectors of dimension {s}")

    @property
    def s(self) -> int:
        return self.ctx.s

    @property
    def lasts(self) -> tuple[int, ...]:
        return tuple(v.n for v in self.vectors)

    def coordinate_rows(self) -> list[list[int]]:
        return [list(v.coords) for v in self.vectors]

    def to_json_dict(self) -> dict:
        return {
            "s": self.s,
            "alpha": list(self.ctx.alpha),
            "vectors": self.coordinate_rows(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, data: dict, precision_bits: Optional[int] = None) -> "SpecialBasis":
        kwargs = {} if precision_bits is None else {"precision_bits": precision_bits}
        ctx = RotationContext(tuple(data["alpha"]), **kwargs)
        if int(data["s"]) != ctx.s:
            raise ValueError("field 's' disagrees with the length of 'alpha'")
        vectors = tuple(LatticeVector.from_coords(row) for row in data["vectors"])
        return cls(ctx, vectors)

    @classmethod
    def from_json(cls, text: str, precision_bits: Optional[int] = None) -> "SpecialBasis":
        return cls.from_json_dict(json.loads(text), precision_bits)


@dataclass(frozen=True, eq=False)
class RegionGeometry:
    """Exact data of the parallelotope ``origin + B [0,1)^s``.

    ``columns_fx`` are the spanning vectors and ``beta_fx`` the return vector, all
    in units of 2**-P. Coordinates of a point y are ``adj @ y / den``.
    ``lasts`` carries the last coordinates of the generating lattice vectors
    when the region comes from a :class:`SpecialBasis`; it is None for raw
    parallelotopes.
    """

    ctx: RotationContext
    columns_fx: tuple[tuple[int, ...], ...]
    beta_fx: tuple[int, ...]
    origin_fx: tuple[int, ...] = ()
    lasts: Optional[tuple[int, ...]] = None
    basis: Optional[SpecialBasis] = None
    label: str = "region"
    den: int = field(init=False, repr=False)
    adj: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    t_num: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        s = self.ctx.s
        if len(self.columns_fx) != s or any(len(c) != s for c in self.columns_fx):
            raise ValueError("expected s columns of length s")
        if not self.origin_fx:
            object.__setattr__(self, "origin_fx", (0,) * s)
        rows = self.matrix_fx
        det = integer_det(rows)
        if det == 0:
            raise SingularBasis("the spanning vectors are linearly dependent")
        adj = integer_adjugate(rows)
        if det < 0:
            det = -det
            adj = [[-x for x in r] for r in adj]
        object.__setattr__(self, "den", det)
        object.__setattr__(self, "adj", tuple(tuple(r) for r in adj))
        object.__setattr__(self, "t_num", self.coords_num(self.beta_fx))

    # exact views

    @property
    def s(self) -> int:
        return self.ctx.s

    @cached_property
    def matrix_fx(self) -> list[list[int]]:
        s = self.s
        return [[self.columns_fx[j][i] for j in range(s)] for i in range(s)]

    @property
    def B(self) -> tuple[tuple[Fraction, ...], ...]:
        one = self.ctx.one
        return tuple(tuple(Fraction(x, one) for x in row) for row in self.matrix_fx)

    @property
    def B_inv(self) -> tuple[tuple[Fraction, ...], ...]:
        one = self.ctx.one
        return tuple(tuple(Fraction(x * one, self.den) for x in row) for row in self.adj)

    @property
    def beta(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(x, self.ctx.one) for x in self.beta_fx)

    @property
    def origin(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(x, self.ctx.one) for x in self.origin_fx)

    @property
    def t(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(x, self.den) for x in self.t_num)

    @property
    def volume(self) -> Fraction:
        return Fraction(self.den, self.ctx.one ** self.s)

    @cached_property
    def shift_box(self) -> tuple[tuple[int, int], ...]:
        """Inclusive ranges of integer shifts m that can bring x in [0,1)^s into the region."""
        one = self.ctx.one
        box = []
        for i, row in enumerate(self.matrix_fx):
            lo = self.origin_fx[i] + sum(min(0, x) for x in row)
            hi = self.origin_fx[i] + sum(max(0, x) for x in row)
            box.append((lo // one, hi // one))
        return tuple(box)

    @property
    def diameter_box(self) -> tuple[int, ...]:
        """Integer upper bounds on the axis-aligned extent of the region."""
        one = self.ctx.one
        return tuple(-(-sum(abs(x) for x in row) // one) for row in self.matrix_fx)

    @cached_property
    def candidate_shifts(self) -> tuple[tuple[int, ...], ...]:
        return tuple(itertools.product(*(range(lo, hi + 1) for lo, hi in self.shift_box)))

    @cached_property
    def _candidate_nums(self) -> tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]:
        one = self.ctx.one
        return tuple(
            (m, self.coords_num([mi * one - oi for mi, oi in zip(m, self.origin_fx)]))
            for m in self.candidate_shifts
        )

    def coords_num(self, y_fx: Sequence[int]) -> tuple[int, ...]:
        """Numerators (over ``den``) of the coordinates of y, y given in units of 2**-P."""
        return tuple(sum(a * y for a, y in zip(row, y_fx)) for row in self.adj)

    # float views for the scan kernels

    def binv_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.B_inv], dtype=np.float64)

    def shift_coords_float(self, shifts: Sequence[Sequence[int]]) -> np.ndarray:
        """Coordinates of ``m - origin`` for each candidate shift m, as floats."""
        one = self.ctx.one
        out = np.empty((len(shifts), self.s), dtype=np.float64)
        for c, m in enumerate(shifts):
            y = [mi * one - oi for mi, oi in zip(m, self.origin_fx)]
            out[c] = [float(Fraction(v, self.den)) for v in self.coords_num(y)]
        return out

    # exact membership

    def locate_num(self, x_num: Sequence[int], q: int = 1, datum=None):
        """Decide whether ``x = x_num / (q * 2**P)`` (reduced mod 1) lies in the region.

        Returns ``(m, u_num)`` with coordinates ``u_num / (q * den)`` of ``x + m``,
        or None. Raises BoundaryAmbiguity or InjectivityViolation.
        """
        one = self.ctx.one
        mod = q * one
        x_num = [v % mod for v in x_num]
        qden = q * self.den
        half = self.ctx.precision_bits // 2
        found = None
        base = self.coords_num(x_num)
        for m, cnum in self._candidate_nums:
            u = [b + q * c for b, c in zip(base, cnum)]
            states = [coordinate_state(v, qden, half) for v in u]
            if 1 in states:
                continue
            if 2 in states:
                raise BoundaryAmbiguity(
                    f"point lies within 2^-{half} of the boundary of {self.label}", datum
                )
            if found is not None:
                raise InjectivityViolation(
                    f"two integer shifts {found[0]} and {m} both land in {self.label}"
                )
            found = (m, u)
        return found

    def translated(self, w: Sequence, label: Optional[str] = None) -> "RegionGeometry":
        """The same parallelotope translated by the real vector w."""
        p = self.ctx.precision_bits
        origin = tuple(o + to_fixed(x, p) for o, x in zip(self.origin_fx, w))
        return RegionGeometry(
            self.ctx, self.columns_fx, self.beta_fx, origin, self.lasts, self.basis,
            label or f"{self.label}+w",
        )


def initial_basis(ctx: RotationContext) -> SpecialBasis:
    """e_1, ..., e_s and alpha'; the region is the whole torus."""
    s = ctx.s
    vectors = [LatticeVector(tuple(int(i == j) for j in range(s)), 0) for i in range(s)]
    vectors.append(LatticeVector((0,) * s, 1))
    return SpecialBasis(ctx, tuple(vectors))


def geometry(basis: SpecialBasis, label: str = "region") -> RegionGeometry:
    ctx = basis.ctx
    s = ctx.s
    columns = tuple(phys_fixed(ctx, v) for v in basis.vectors[:s])
    beta = phys_fixed(ctx, basis.vectors[s])
    try:
        geom = RegionGeometry(ctx, columns, beta, (0,) * s, basis.lasts, basis, label)
    except SingularBasis:
        raise SingularBasis("region spanning vectors are dependent") from None
    if (geom.den << (ctx.precision_bits // 2)) < ctx.one ** s:
        raise SingularBasis(f"|det B| < 2^-{ctx.precision_bits // 2}")
    return geom


def raw_parallelotope(
    ctx: RotationContext,
    columns: Sequence[Sequence],
    beta: Sequence,
    origin: Optional[Sequence] = None,
    label: str = "raw",
) -> RegionGeometry:
    """A parallelotope not derived from a lattice basis (controls and experiments)."""
    p = ctx.precision_bits
    cols = tuple(tuple(to_fixed(x, p) for x in col) for col in columns)
    beta_fx = tuple(to_fixed(x, p) for x in beta)
    origin_fx = tuple(to_fixed(x, p) for x in origin) if origin is not None else ()
    return RegionGeometry(ctx, cols, beta_fx, origin_fx, None, None, label)


@dataclass
class ConditionReport:
    s1: bool
    s2: bool
    s3: bool
    s4: bool
    sign_invariant: bool
    determinant: int
    t: tuple[Fraction, ...]
    s4_exhaustive: bool
    messages: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.s1 and self.s2 and self.s3 and self.s4

    def as_records(self) -> list[dict]:
        return [
            {"condition": "S1", "pass": self.s1},
            {"condition": "S2", "pass": self.s2},
            {"condition": "S3", "pass": self.s3, "determinant": self.determinant},
            {"condition": "S4", "pass": self.s4, "exhaustive": self.s4_exhaustive},
            {"condition": "sign_invariant", "pass": self.sign_invariant},
        ]


def sign_invariant(basis: SpecialBasis) -> bool:
    lasts = basis.lasts
    return all(n <= 0 for n in lasts[:-1]) and lasts[-1] >= 1


def check_conditions(basis: SpecialBasis) -> ConditionReport:
    """Check (S1)-(S4) for a candidate basis.

    S3 and S4 are decided in exact integer arithmetic. S2 uses the exact
    coordinates of beta and raises BoundaryAmbiguity when one of them is within
    2**(-P/2) of 0 or 1.
    """
    s = basis.s
    msgs = []
    det = basis_determinant(basis.vectors)
    s3 = abs(det) == 1
    if not s3:
        msgs.append(f"S3: determinant {det} is not +-1")
    try:
        geom = geometry(basis)
        s1 = True
    except SingularBasis as exc:
        geom = None
        s1 = False
        msgs.append(f"S1: {exc}")
    t: tuple[Fraction, ...] = ()
    s2 = False
    if geom is not None:
        half = basis.ctx.precision_bits // 2
        states = [coordinate_state(v, geom.den, half) for v in geom.t_num]
        if 2 in states:
            raise BoundaryAmbiguity("a coordinate of beta is within 2^-P/2 of 0 or 1", geom.t)
        s2 = all(st == 0 for st in states)
        t = geom.t
        if not s2:
            msgs.append("S2: beta is not in the region")
    lasts = basis.lasts
    sign_ok = sign_invariant(basis)
    if s <= MAX_EXHAUSTIVE_S:
        exhaustive = True
        top = lasts[-1]
        s4 = True
        for r in range(s + 1):
            for subset in itertools.combinations(lasts[:-1], r):
                if top - sum(subset) <= 0:
                    s4 = False
                    break
            if not s4:
                msgs.append("S4: some subset sum is not positive")
                break
    else:
        exhaustive = False
        s4 = sign_ok
    return ConditionReport(s1, s2, s3, s4, sign_ok, det, t, exhaustive, msgs)


def exchange_step(basis: SpecialBasis, j: int) -> SpecialBasis:
    """One basis exchange in direction j (1-based).

    v_j <- v_j - v_{s+1}; beta is then expanded in the new spanning vectors with
    coefficients c_j = t_j/(1-t_j), c_i = t_i/(1-t_j), and
    v_{s+1} <- v_{s+1} - sum floor(c_i) v_i. The new coordinates of beta are the
    fractional parts of c.
    """
    s = basis.s
    if not 1 <= j <= s:
        raise ValueError(f"index j={j} outside 1..{s}")
    if not sign_invariant(basis):
        raise ValueError("basis violates the sign invariant on last coordinates")
    geom = geometry(basis)
    half = basis.ctx.precision_bits // 2
    den = geom.den
    T = geom.t_num
    jj = j - 1
    gap = den - T[jj]
    if gap <= 0 or (gap << half) < den:
        raise DegenerateCoefficient(f"t_{j} is within 2^-{half} of 1")
    b = []
    for i in range(s):
        q, r = divmod(T[i], gap)
        if r == 0 or (r << half) < gap or ((gap - r) << half) < gap:
            raise DegenerateCoefficient(f"cone coefficient c_{i + 1} is within 2^-{half} of an integer")
        b.append(q)
    v = list(basis.vectors)
    v[jj] = v[jj] - v[s]
    new_top = v[s]
    for i in range(s):
        if b[i]:
            new_top = new_top - b[i] * v[i]
    v[s] = new_top
    return SpecialBasis(basis.ctx, tuple(v))


def cone_coefficients(basis: SpecialBasis, j: int) -> tuple[Fraction, ...]:
    """Coefficients of beta in the spanning set after replacing v_j by v_j - v_{s+1}."""
    geom = geometry(basis)
    t = geom.t
    tj = t[j - 1]
    return tuple(ti / (1 - tj) for ti in t)


def construct(ctx: RotationContext, j_sequence: Iterable[int]) -> SpecialBasis:
    basis = initial_basis(ctx)
    for j in j_sequence:
        basis = exchange_step(basis, j)
    return basis


def round_robin(s: int, count: int) -> list[int]:
    return [(i % s) + 1 for i in range(count)]


def torus_membership(geom: RegionGeometry, x: Sequence) -> Optional[tuple[Fraction, ...]]:
    """Coordinates u in [0,1)^s of the representative of x mod Z^s inside the region.

    Returns None if x mod Z^s is not in the region.
    """
    one = geom.ctx.one
    xs = [to_fraction(v) * one for v in x]
    if len(xs) != geom.s:
        raise ValueError("point dimension does not match the region")
    q = 1
    for v in xs:
        q = math.lcm(q, v.denominator)
    num = [int(v * q) for v in xs]
    found = geom.locate_num(num, q, datum=tuple(x))
    if found is None:
        return None
    _, u = found
    return tuple(Fraction(v, q * geom.den) for v in u)

