"""Orbit membership scans: which n in a range have x0 + n*alpha in a region (mod Z^s).

The hot loop runs in a float filter (compiled when the extension is built,
numpy otherwise). The filter works on the top 64 bits of the fixed-point orbit
and only decides points whose region coordinates clear every cell boundary by a
margin ``eps`` that dominates all rounding; every other point is re-decided in
exact integer arithmetic. Results are therefore identical for both backends.

Set ``BRSETS_BACKEND=python`` to force the numpy implementation.
"""

from __future__ import annotations

import os

import numpy as np

from . import _scan_py
from .region import RegionGeometry

try:
    from . import _scan_ext
except ImportError:  # extension not built
    _scan_ext = None

__all__ = ["BACKEND", "available_backends", "get_kernel", "OrbitScanner"]

STATUS_OUT = _scan_py.STATUS_OUT
STATUS_IN = _scan_py.STATUS_IN
STATUS_UNSURE = _scan_py.STATUS_UNSURE


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _scan_ext is not None else [])


def get_kernel(name: str | None = None):
    name = name or BACKEND
    if name == "cython":
        if _scan_ext is None:
            raise ImportError("the compiled scan kernel is not built")
        return _scan_ext.scan
    if name == "python":
        return _scan_py.scan
    raise ValueError(f"unknown backend {name!r}")


def _default_backend() -> str:
    forced = os.environ.get("BRSETS_BACKEND", "").strip().lower()
    if forced:
        if forced not in ("python", "cython"):
            raise ValueError("BRSETS_BACKEND must be 'python' or 'cython'")
        return forced
    return "cython" if _scan_ext is not None else "python"


BACKEND = _default_backend()


class OrbitScanner:
    """Membership of the orbit points ``x0 + n*step`` (mod Z^s) in a parallelotope."""

    def __init__(self, geom: RegionGeometry, backend: str | None = None):
        self.geom = geom
        self.backend = backend or BACKEND
        self._kernel = get_kernel(self.backend)
        self.shifts = geom.candidate_shifts
        self.binv = geom.binv_float()
        self.cand_u = geom.shift_coords_float(self.shifts)
        self._binv_norm = float(np.abs(self.binv).sum(axis=1).max())
        self._cand_norm = float(np.abs(self.cand_u).max()) if self.cand_u.size else 0.0
        self.P = geom.ctx.precision_bits

    def eps_for(self, n_abs_max: int) -> float:
        s = self.geom.s
        nb = self._binv_norm
        return (
            (s + 1) * nb * 2.0 ** -44
            + self._cand_norm * 2.0 ** -44
            + nb * (float(n_abs_max) + 2.0) * 2.0 ** -63
            + 2.0 ** -50
        )

    def _to64(self, values_fx) -> np.ndarray:
        shift = self.P - 64
        mask = (1 << 64) - 1
        return np.array([(v >> shift) & mask for v in values_fx], dtype=np.uint64)

    def raw_status(self, x0_fx, n_start: int, count: int, step_fx=None):
        """Filter statuses (0 out, 1 in, 2 undecided) and candidate indices."""
        one = self.geom.ctx.one
        step_fx = self.geom.ctx.alpha_fx if step_fx is None else step_fx
        x0 = self._to64([v % one for v in x0_fx])
        step = self._to64([v % one for v in step_fx])
        eps = self.eps_for(max(abs(n_start), abs(n_start + count)))
        return self._kernel(x0, step, int(n_start), int(count), self.binv, self.cand_u, eps)

    def members(self, x0_fx, n_start: int, count: int, step_fx=None):
        """Exact membership flags and shift indices for n in [n_start, n_start + count).

        Returns ``(member, which)``: a bool array and the index into
        ``self.shifts`` of the integer shift that brings the point into the
        region (-1 for non-members).
        """
        step_fx = self.geom.ctx.alpha_fx if step_fx is None else step_fx
        status, which = self.raw_status(x0_fx, n_start, count, step_fx)
        which = which.astype(np.int64)
        unsure = np.flatnonzero(status == STATUS_UNSURE)
        if unsure.size:
            index = {m: i for i, m in enumerate(self.shifts)}
            for k in unsure:
                n = n_start + int(k)
                x = [a + n * b for a, b in zip(x0_fx, step_fx)]
                found = self.geom.locate_num(x, datum={"n": n})
                if found is None:
                    status[k] = STATUS_OUT
                    which[k] = -1
                else:
                    status[k] = STATUS_IN
                    which[k] = index[found[0]]
        return status == STATUS_IN, which

    def exact_coords(self, x0_fx, n: int, step_fx=None) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Shift m and coordinate numerators (over ``geom.den``) of orbit point n, which must be a member."""
        step_fx = self.geom.ctx.alpha_fx if step_fx is None else step_fx
        x = [a + n * b for a, b in zip(x0_fx, step_fx)]
        found = self.geom.locate_num(x, datum={"n": n})
        if found is None:
            raise ValueError(f"orbit point {n} is not in the region")
        return found
