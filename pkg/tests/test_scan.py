import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brsets import scan
from brsets.lattice import RotationContext, to_fixed
from brsets.region import construct, geometry
from brsets.scan import STATUS_IN, STATUS_OUT, STATUS_UNSURE, OrbitScanner, available_backends, get_kernel

from conftest import SQRT2M1, SQRT3M1

BACKENDS = available_backends()


def exact_members(geom, x0_fx, n_start, count):
    out = []
    for n in range(n_start, n_start + count):
        x = [a + n * b for a, b in zip(x0_fx, geom.ctx.alpha_fx)]
        out.append(geom.locate_num(x) is not None)
    return np.array(out)


def test_python_backend_always_available():
    assert "python" in BACKENDS
    assert scan.BACKEND in BACKENDS


def test_unknown_backend():
    with pytest.raises(ValueError):
        get_kernel("fortran")


@pytest.mark.parametrize("backend", BACKENDS)
def test_golden_members(golden_geom, backend):
    member, which = OrbitScanner(golden_geom, backend).members((0,), 0, 14)
    assert list(np.flatnonzero(member)) == [0, 2, 5, 7, 10, 13]
    assert (which[member] >= 0).all() and (which[~member] == -1).all()


@pytest.mark.parametrize("backend", BACKENDS)
def test_matches_exact_membership(s2_ctx, backend):
    geom = geometry(construct(s2_ctx, [1, 2, 1, 2, 2]))
    sc = OrbitScanner(geom, backend)
    x0 = (to_fixed("0.1", 256), to_fixed("0.7", 256))
    member, _ = sc.members(x0, -500, 3000)
    assert (member == exact_members(geom, x0, -500, 3000)).all()


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernel not built")
def test_backends_identical_raw_status(s2_ctx):
    geom = geometry(construct(s2_ctx, [1, 2, 2, 1, 1, 2, 1, 2]))
    a = OrbitScanner(geom, "python").raw_status((0, 0), 10**6, 200_000)
    b = OrbitScanner(geom, "cython").raw_status((0, 0), 10**6, 200_000)
    assert (a[0] == b[0]).all() and (a[1] == b[1]).all()


def test_filter_never_wrong(s2_ctx):
    """Points the float filter decides are decided correctly; the rest are flagged."""
    geom = geometry(construct(s2_ctx, [2, 1, 1]))
    sc = OrbitScanner(geom, "python")
    status, _ = sc.raw_status((0, 0), 0, 5000)
    exact = exact_members(geom, (0, 0), 0, 5000)
    assert not exact[status == STATUS_OUT].any()
    assert exact[status == STATUS_IN].all()
    assert set(np.unique(status)) <= {STATUS_OUT, STATUS_IN, STATUS_UNSURE}


def test_unsure_points_are_resolved():
    # alpha = 1/4 exactly: orbit points land on cell boundaries
    ctx = RotationContext(("0.25",))
    from brsets.region import raw_parallelotope

    geom = raw_parallelotope(ctx, [["0.5"]], ["0.25"])
    sc = OrbitScanner(geom, "python")
    status, _ = sc.raw_status((0,), 0, 8)
    assert (status == STATUS_UNSURE).any()
    member, _ = sc.members((0,), 0, 8)
    assert list(member) == [True, True, False, False] * 2


@settings(max_examples=25, deadline=None)
@given(
    st.lists(st.integers(1, 2), min_size=1, max_size=6),
    st.integers(-10**9, 10**9),
    st.sampled_from(BACKENDS),
)
def test_scan_equals_exact(steps, n_start, backend):
    ctx = RotationContext((SQRT2M1, SQRT3M1))
    geom = geometry(construct(ctx, steps))
    member, _ = OrbitScanner(geom, backend).members((0, 0), n_start, 300)
    assert (member == exact_members(geom, (0, 0), n_start, 300)).all()


def test_env_forces_fallback():
    import os
    import subprocess
    import sys

    env = dict(os.environ, BRSETS_BACKEND="python")
    r = subprocess.run([sys.executable, "-c", "from brsets import scan; print(scan.BACKEND)"],
                       capture_output=True, text=True, env=env)
    assert r.stdout.strip() == "python"
