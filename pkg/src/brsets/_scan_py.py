"""Vectorized numpy implementation of the orbit membership filter.

Same contract as the compiled ``_scan_ext.scan``; see :mod:`brsets.scan`.
"""

import numpy as np

_CHUNK = 1 << 15
_TO_UNIT = 2.0 ** -53

STATUS_OUT = 0
STATUS_IN = 1
STATUS_UNSURE = 2


def scan(x0, step, n_start, count, binv, cand_u, eps):
    x0 = np.ascontiguousarray(x0, dtype=np.uint64)
    step = np.ascontiguousarray(step, dtype=np.uint64)
    binv = np.ascontiguousarray(binv, dtype=np.float64)
    cand_u = np.ascontiguousarray(cand_u, dtype=np.float64)
    status = np.empty(count, dtype=np.uint8)
    which = np.full(count, -1, dtype=np.int32)
    lo_in, hi_in = eps, 1.0 - eps
    lo_out, hi_out = -eps, 1.0 + eps
    for start in range(0, count, _CHUNK):
        stop = min(count, start + _CHUNK)
        n = np.arange(n_start + start, n_start + stop, dtype=np.int64).astype(np.uint64)
        # uint64 arithmetic wraps mod 2**64, i.e. reduces the orbit mod 1
        xi = x0[None, :] + n[:, None] * step[None, :]
        x = (xi >> np.uint64(11)).astype(np.float64) * _TO_UNIT
        y = x @ binv.T
        u = y[:, None, :] + cand_u[None, :, :]
        out = ((u < lo_out) | (u >= hi_out)).any(axis=2)
        near = ((u < lo_in) | (u > hi_in)).any(axis=2) & ~out
        inside = ~out & ~near
        n_inside = inside.sum(axis=1)
        unsure = near.any(axis=1) | (n_inside > 1)
        st = np.where(unsure, STATUS_UNSURE, np.where(n_inside == 1, STATUS_IN, STATUS_OUT))
        status[start:stop] = st
        w = np.where(st == STATUS_IN, inside.argmax(axis=1), -1)
        which[start:stop] = w
    return status, which
