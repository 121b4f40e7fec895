"""Orbits of x -> x + alpha: remainder traces, first returns and Rauzy's conditions.

Two independent routes compute the return times of the orbit of 0 to a special
region:

* :func:`naive_returns` scans n = 1, 2, ... and tests each orbit point;
* :func:`renormalized_returns` runs the exact recursion
  ``x_{k+1} = x_k + v_{s+1} - sum_{i in I_k} v_i`` in region coordinates, where
  I_k is the set of coordinates overflowing when t is added, at O(s) integer
  operations per return.

Their agreement is the main consistency check of the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    BoundaryAmbiguity,
    CardinalityViolation,
    InjectivityViolation,
    NonReturning,
    PrecisionError,
)
from .lattice import LatticeVector, integer_adjugate, integer_det, to_fixed, to_fraction
from .region import RegionGeometry, SpecialBasis, coordinate_state, geometry, torus_membership
from .scan import STATUS_OUT, OrbitScanner

__all__ = [
    "RemainderTrace",
    "ReturnSequence",
    "RauzyReport",
    "check_precision_budget",
    "remainder_trace",
    "naive_returns",
    "renormalized_returns",
    "recursion_points",
    "verify_rauzy",
    "hyperplane_points",
]

_CHUNK = 1 << 20


def check_precision_budget(precision_bits: int, n_max: int) -> None:
    """Require P >= 2*log2(N_max) + 64 for orbits of length N_max."""
    need = 2 * math.log2(max(n_max, 1)) + 64
    if precision_bits < need:
        raise PrecisionError(
            f"orbit length {n_max} needs at least {math.ceil(need)} bits, have {precision_bits}"
        )


def _x0_fixed(geom: RegionGeometry, x0) -> tuple[int, ...]:
    if x0 is None:
        return (0,) * geom.s
    if len(x0) != geom.s:
        raise ValueError("starting point has the wrong dimension")
    return tuple(to_fixed(v, geom.ctx.precision_bits) for v in x0)


def _exact_abs_max(ns: np.ndarray, hits: np.ndarray, geom: RegionGeometry):
    """Exact max of |hits - N*|A|| over the given samples, and the N attaining it."""
    if ns.size == 0:
        return Fraction(0), 0
    vol_f = float(geom.volume)
    r = np.abs(hits.astype(np.float64) - ns.astype(np.float64) * vol_f)
    top = r.max()
    scale = geom.ctx.one ** geom.s
    best, best_n = Fraction(-1), 0
    for idx in np.flatnonzero(r >= top - 1e-6):
        n, h = int(ns[idx]), int(hits[idx])
        val = Fraction(abs(h * scale - n * geom.den), scale)
        if val > best:
            best, best_n = val, n
    return best, best_n


@dataclass
class RemainderTrace:
    """Sampled values of sum_{n<N} chi_A(x0 + n*alpha) - N*|A|.

    ``sample_N``/``sample_hits`` hold every stride-th N and the visit count
    before it; ``max_abs`` is the exact maximum of |remainder| over all
    1 <= N <= N_max (not only the samples), attained at ``argmax_N``.
    ``window_max`` maps (lo, hi) to the exact max over lo < N <= hi.
    """

    region_id: str
    x0: tuple
    volume: Fraction
    N_max: int
    stride: int
    sample_N: np.ndarray
    sample_hits: np.ndarray
    max_abs: Fraction
    argmax_N: int
    window_max: dict = field(default_factory=dict)

    def remainder_at(self, idx: int) -> Fraction:
        return int(self.sample_hits[idx]) - int(self.sample_N[idx]) * self.volume

    @property
    def samples(self) -> list[tuple[int, Fraction]]:
        return [(int(n), self.remainder_at(i)) for i, n in enumerate(self.sample_N)]

    def remainder_floats(self) -> np.ndarray:
        return self.sample_hits - self.sample_N * float(self.volume)


def remainder_trace(
    geom: RegionGeometry,
    x0=None,
    N_max: int = 10**6,
    stride: int = 1,
    windows: Iterable[tuple[int, int]] = (),
    backend: Optional[str] = None,
) -> RemainderTrace:
    if N_max < 1 or stride < 1:
        raise ValueError("N_max and stride must be positive")
    check_precision_budget(geom.ctx.precision_bits, N_max)
    x0_fx = _x0_fixed(geom, x0)
    scanner = OrbitScanner(geom, backend)
    windows = [(int(lo), int(hi)) for lo, hi in windows]
    win_best = {w: (Fraction(-1), 0) for w in windows}
    best, best_n = Fraction(-1), 0
    sample_N, sample_hits = [], []
    hits_before = 0
    for start in range(0, N_max, _CHUNK):
        count = min(_CHUNK, N_max - start)
        member, _ = scanner.members(x0_fx, start, count)
        # N runs over start+1 .. start+count; hits(N) counts n < N
        hits = hits_before + np.cumsum(member, dtype=np.int64)
        ns = np.arange(start + 1, start + count + 1, dtype=np.int64)
        m, mn = _exact_abs_max(ns, hits, geom)
        if m > best:
            best, best_n = m, mn
        for (lo, hi) in windows:
            sel = (ns > lo) & (ns <= hi)
            if sel.any():
                wm, wn = _exact_abs_max(ns[sel], hits[sel], geom)
                if wm > win_best[(lo, hi)][0]:
                    win_best[(lo, hi)] = (wm, wn)
        keep = ns % stride == 0
        sample_N.append(ns[keep])
        sample_hits.append(hits[keep])
        hits_before = int(hits[-1])
    return RemainderTrace(
        region_id=geom.label,
        x0=tuple(to_fraction(v) for v in x0) if x0 is not None else (Fraction(0),) * geom.s,
        volume=geom.volume,
        N_max=N_max,
        stride=stride,
        sample_N=np.concatenate(sample_N),
        sample_hits=np.concatenate(sample_hits),
        max_abs=best,
        argmax_N=best_n,
        window_max={w: v[0] for w, v in win_best.items()},
    )


@dataclass
class ReturnSequence:
    """Successive returns k = 1, 2, ... of an orbit to a region.

    ``ells[k-1]`` is the k-th return time; ``u_num[k-1]`` are the numerators of
    the region coordinates of the orbit point, over ``den``.
    """

    method: str
    ells: list[int]
    u_num: list[tuple[int, ...]]
    den: int

    def __len__(self):
        return len(self.ells)

    @property
    def entries(self) -> list[tuple[int, int, tuple[Fraction, ...]]]:
        return [
            (k + 1, ell, tuple(Fraction(v, self.den) for v in u))
            for k, (ell, u) in enumerate(zip(self.ells, self.u_num))
        ]

    @property
    def increments(self) -> list[int]:
        prev = [0] + self.ells[:-1]
        return [b - a for a, b in zip(prev, self.ells)]


def naive_returns(
    geom: RegionGeometry,
    x0=None,
    count: int = 100,
    scan_cap: Optional[int] = None,
    backend: Optional[str] = None,
) -> ReturnSequence:
    """First ``count`` returns of x0 (which must lie in the region) by scanning the orbit."""
    x0_fx = _x0_fixed(geom, x0)
    if geom.locate_num(x0_fx, datum={"n": 0}) is None:
        raise ValueError("starting point is not in the region")
    vol = float(geom.volume)
    if scan_cap is None:
        scan_cap = max(10**7, int(64 / vol))
    scanner = OrbitScanner(geom, backend)
    ells: list[int] = []
    u_num: list[tuple[int, ...]] = []
    n = 1
    last_hit = 0
    while len(ells) < count:
        need = count - len(ells)
        chunk = int(min(_CHUNK, max(4096, 2 * need / vol)))
        check_precision_budget(geom.ctx.precision_bits, n + chunk)
        member, _ = scanner.members(x0_fx, n, chunk)
        for k in np.flatnonzero(member)[:need]:
            ell = n + int(k)
            if ell - last_hit > scan_cap:
                break
            _, u = scanner.exact_coords(x0_fx, ell)
            ells.append(ell)
            u_num.append(tuple(u))
            last_hit = ell
        n += chunk
        if len(ells) < count and n - last_hit > scan_cap:
            raise NonReturning(f"no return within {scan_cap} steps after n={last_hit}")
    return ReturnSequence("naive", ells, u_num, geom.den)


def _require_lasts(geom: RegionGeometry) -> tuple[int, ...]:
    if geom.lasts is None:
        raise ValueError("the recursion needs a region built from a special basis")
    return geom.lasts


def renormalized_returns(geom: RegionGeometry, count: int) -> ReturnSequence:
    """Returns of the orbit of 0 from the exact recursion in region coordinates.

    u_{k+1} = u_k + t (mod 1 per coordinate); the return time grows by
    last(v_{s+1}) - sum_{i in I_k} last(v_i) with I_k the overflowing coordinates.
    """
    lasts = _require_lasts(geom)
    s = geom.s
    den = geom.den
    T = geom.t_num
    top = lasts[s]
    half = geom.ctx.precision_bits // 2
    U = [0] * s
    ell = 0
    ells: list[int] = []
    u_num: list[tuple[int, ...]] = []
    for k in range(count):
        delta = top
        for i in range(s):
            v = U[i] + T[i]
            if v != den and (abs(v - den) << half) < den:
                raise BoundaryAmbiguity(
                    f"u_{k},{i + 1} + t_{i + 1} is within 2^-{half} of 1", {"k": k}
                )
            if v >= den:
                v -= den
                delta -= lasts[i]
            U[i] = v
        if delta <= 0:
            raise AssertionError(f"non-positive return increment {delta} at k={k}")
        ell += delta
        ells.append(ell)
        u_num.append(tuple(U))
    return ReturnSequence("renormalized", ells, u_num, den)


def recursion_points(basis: SpecialBasis, k_lo: int, k_hi: int) -> dict[int, LatticeVector]:
    """The lattice points x_k, k_lo <= k <= k_hi, of the recursion started at x_0 = 0."""
    geom = geometry(basis)
    s = geom.s
    den, T = geom.den, geom.t_num
    v = basis.vectors
    points = {0: LatticeVector.zero(s)}
    U = [0] * s
    x = points[0]
    for k in range(0, k_hi):
        step = v[s]
        for i in range(s):
            U[i] += T[i]
            if U[i] >= den:
                U[i] -= den
                step = step - v[i]
        x = x + step
        points[k + 1] = x
    U = [0] * s
    x = points[0]
    for k in range(0, k_lo, -1):
        step = -v[s]
        for i in range(s):
            U[i] -= T[i]
            if U[i] < 0:
                U[i] += den
                step = step + v[i]
        x = x + step
        points[k - 1] = x
    return {k: p for k, p in points.items() if k_lo <= k <= k_hi}


@dataclass
class RauzyReport:
    seed: int
    sample_count: int
    r1_pass: bool
    r2_pass: bool
    r1_checked: int
    r2_max_residual: Fraction
    max_return_time: int
    r1_witness: Optional[dict] = None
    r2_witness: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return self.r1_pass and self.r2_pass

    def as_records(self) -> list[dict]:
        r1 = {"condition": "R1", "pass": self.r1_pass, "max_residual": Fraction(0)}
        if self.r1_witness:
            r1["witness"] = self.r1_witness
        r2 = {"condition": "R2", "pass": self.r2_pass, "max_residual": self.r2_max_residual}
        if self.r2_witness:
            r2["witness"] = self.r2_witness
        return [r1, r2]

    def raise_for_failure(self):
        from .errors import VerificationFailure

        if not self.r1_pass:
            raise VerificationFailure("condition R1 failed", self.r1_witness)
        if not self.r2_pass:
            raise VerificationFailure("condition R2 failed", self.r2_witness)


_SAMPLE_BITS = 62


def _sample_coords(rng: np.random.Generator, count: int, s: int) -> np.ndarray:
    return rng.integers(0, 1 << _SAMPLE_BITS, size=(count, s), dtype=np.int64)


def _point_from_coords(geom: RegionGeometry, U: Sequence[int]) -> tuple[Fraction, ...]:
    """origin + B u for u = U / 2**62, exactly."""
    one = geom.ctx.one
    scale = one << _SAMPLE_BITS
    rows = geom.matrix_fx
    return tuple(
        Fraction(o << _SAMPLE_BITS, scale) + Fraction(sum(b * int(u) for b, u in zip(row, U)), scale)
        for o, row in zip(geom.origin_fx, rows)
    )


def _check_r1(geom: RegionGeometry, rng: np.random.Generator, count: int):
    """A injects into R^s / M and into the torus, on sampled points.

    For each sampled a in A: the torus representative of a must be a itself,
    and a + B m must leave A for a random nonzero m in Z^s.
    """
    s = geom.s
    one = geom.ctx.one
    scale = 1 << _SAMPLE_BITS
    Us = _sample_coords(rng, count, s)
    ms = rng.integers(-2, 3, size=(count, s))
    for U, m in zip(Us, ms):
        if not m.any():
            m[rng.integers(0, s)] = 1
        a = _point_from_coords(geom, U)
        if torus_membership(geom, a) != tuple(Fraction(int(x), scale) for x in U):
            return False, {"point": [str(x) for x in a], "reason": "torus representative differs"}
        b = _point_from_coords(geom, [int(x) + (int(mi) << _SAMPLE_BITS) for x, mi in zip(U, m)])
        y = [(bi * one - oi) for bi, oi in zip(b, geom.origin_fx)]
        ub = [sum(aij * yj for aij, yj in zip(row, y)) / geom.den for row in geom.adj]
        if all(0 <= c < 1 for c in ub):
            return False, {"point": [str(x) for x in a], "shift": [int(x) for x in m]}
    return True, None


def _difference_body(geom: RegionGeometry) -> RegionGeometry:
    """A - A = B (-1, 1)^s, as a parallelotope with spanning vectors 2*B."""
    s = geom.s
    cols = tuple(tuple(2 * x for x in c) for c in geom.columns_fx)
    origin = tuple(-sum(c[i] for c in geom.columns_fx) for i in range(s))
    return RegionGeometry(geom.ctx, cols, geom.beta_fx, origin, None, None, geom.label + "-diff")


def verify_rauzy(
    geom: RegionGeometry,
    sample_count: int = 1000,
    seed: int = 0,
    scan_cap: Optional[int] = None,
    backend: Optional[str] = None,
) -> RauzyReport:
    """Check (R1) and (R2) with M generated by the spanning vectors and beta the return vector.

    R2 is checked on seeded random points x of A: the first return time n of x
    and the landing shift are found by scanning the orbit of 0 for times n at
    which n*alpha (mod Z^s) lies in the difference body A - A, then testing
    every sample against each such n in increasing order. S(x) - x - beta must
    then have integer coordinates. All membership decisions are exact.
    """
    rng = np.random.default_rng(seed)
    r1_ok, r1_wit = _check_r1(geom, rng, sample_count)

    s = geom.s
    one = geom.ctx.one
    den = geom.den
    half = geom.ctx.precision_bits // 2
    scale = 1 << _SAMPLE_BITS
    Us = _sample_coords(rng, sample_count, s)
    U_obj = [tuple(int(x) for x in row) for row in Us]
    u_f = Us.astype(np.float64) / float(scale)
    ret_time = np.zeros(sample_count, dtype=np.int64)
    unresolved = np.ones(sample_count, dtype=bool)
    diff = _difference_body(geom)
    scanner = OrbitScanner(diff, backend)
    zero = (0,) * s
    if scan_cap is None:
        scan_cap = max(10**8, int(256 / float(geom.volume)))
    max_res = Fraction(0)
    witness = None
    n = 1
    chunk = 1 << 10
    while unresolved.any():
        if n > scan_cap:
            raise NonReturning(f"{int(unresolved.sum())} sample points did not return within {scan_cap} steps")
        check_precision_budget(geom.ctx.precision_bits, n + chunk)
        status, _ = scanner.raw_status(zero, n, chunk)
        for k in np.flatnonzero(status != STATUS_OUT):
            if not unresolved.any():
                break
            nn = n + int(k)
            X = [(nn * a) % one for a in geom.ctx.alpha_fx]
            for m in diff.candidate_shifts:
                c_num = geom.coords_num([x + mi * one for x, mi in zip(X, m)])
                if any(abs(c) >= den for c in c_num):
                    continue
                idx = np.flatnonzero(unresolved)
                if idx.size == 0:
                    break
                c_f = np.array([c / den for c in c_num])
                v = u_f[idx] + c_f[None, :]
                sure_in = ((v >= 1e-9) & (v <= 1 - 1e-9)).all(axis=1)
                sure_out = ((v < -1e-9) | (v >= 1 + 1e-9)).any(axis=1)
                hit = []
                for pos in np.flatnonzero(~sure_out):
                    j = int(idx[pos])
                    if not sure_in[pos]:
                        states = [
                            coordinate_state(U_obj[j][i] * den + (c_num[i] << _SAMPLE_BITS), den << _SAMPLE_BITS, half)
                            for i in range(s)
                        ]
                        if 2 in states:
                            raise BoundaryAmbiguity("sampled return lies on a region boundary", {"n": nn})
                        if 1 in states:
                            continue
                    hit.append(j)
                if not hit:
                    continue
                # coordinates of S(x) - x - beta are c - t; they must be integers
                res = Fraction(0)
                for i in range(s):
                    r = (c_num[i] - geom.t_num[i]) % den
                    res = max(res, Fraction(min(r, den - r), den))
                if res > max_res:
                    max_res = res
                    if witness is None and res * (1 << half) >= 1:
                        j = hit[0]
                        witness = {
                            "point": [str(x) for x in _point_from_coords(geom, U_obj[j])],
                            "return_time": nn,
                            "residual": res,
                        }
                hit_arr = np.array(hit, dtype=np.int64)
                if (ret_time[hit_arr] != 0).any():
                    raise InjectivityViolation("a sample returned through two shifts at once")
                ret_time[hit_arr] = nn
                unresolved[hit_arr] = False
        n += chunk
        chunk = min(chunk * 2, _CHUNK)
    r2_ok = max_res * (1 << half) < 1
    return RauzyReport(
        seed=seed,
        sample_count=sample_count,
        r1_pass=r1_ok,
        r2_pass=r2_ok,
        r1_checked=sample_count,
        r2_max_residual=max_res,
        max_return_time=int(ret_time.max()) if sample_count else 0,
        r1_witness=r1_wit,
        r2_witness=witness,
    )


def hyperplane_points(
    basis: SpecialBasis,
    k_range: tuple[int, int],
    backend: Optional[str] = None,
) -> list[LatticeVector]:
    """Lattice points of H_k inside the cylinder over A, one per k in k_range (inclusive).

    The points are found by an orbit scan over the time window spanned by the
    range (each hit n gives the unique lattice point (a, n) projecting into A),
    expressed in the special basis to read off k, and compared with the
    recursion points.
    """
    k_lo, k_hi = k_range
    if k_lo > 0 or k_hi < 0:
        raise ValueError("k_range must contain 0")
    geom = geometry(basis)
    s = geom.s
    expected = recursion_points(basis, k_lo, k_hi)
    n_lo, n_hi = expected[k_lo].n, expected[k_hi].n
    margin = basis.lasts[s] + sum(abs(x) for x in basis.lasts[:s])
    start, stop = n_lo - margin, n_hi + margin
    check_precision_budget(geom.ctx.precision_bits, max(abs(start), abs(stop)))
    scanner = OrbitScanner(geom, backend)
    member, which = scanner.members((0,) * s, start, stop - start + 1)
    rows = basis.coordinate_rows()
    det = integer_det(rows)
    adj = integer_adjugate(rows)
    one = geom.ctx.one
    found: dict[int, list[LatticeVector]] = {}
    for idx in np.flatnonzero(member):
        n = start + int(idx)
        m = scanner.shifts[int(which[idx])]
        a = tuple(mi - (n * al) // one for mi, al in zip(m, geom.ctx.alpha_fx))
        lam = a + (n,)
        # coordinates z with lam = z V  (rows of V are the basis vectors)
        z_last = sum(lam[r] * adj[r][s] for r in range(s + 1))
        if z_last % det:
            raise CardinalityViolation(f"lattice point at n={n} is not an integer combination", None)
        k = z_last // det
        if n_lo <= n <= n_hi and not k_lo <= k <= k_hi:
            raise CardinalityViolation(f"point at n={n} lies on H_{k}, outside the range", k)
        found.setdefault(k, []).append(LatticeVector(a, n))
    out = []
    for k in range(k_lo, k_hi + 1):
        pts = found.get(k, [])
        if len(pts) != 1:
            raise CardinalityViolation(f"H_{k} meets the cylinder in {len(pts)} lattice points", k)
        if pts[0] != expected[k]:
            raise CardinalityViolation(f"H_{k} point {pts[0]} differs from the recursion point {expected[k]}", k)
        out.append(pts[0])
    return out
