from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brsets.cutproject import (
    Scheme,
    SectionedScheme,
    bd_pairing,
    fold_offset,
    gamma_shift,
    generate_points,
    special_section,
)
from brsets.dynamics import renormalized_returns
from brsets.errors import EmptyColumn
from brsets.region import geometry, initial_basis, torus_membership

from conftest import GOLDEN, SQRT2M1, SQRT3M1

GOLDEN_SCHEME = Scheme(2, 1, ((GOLDEN,),))
S2_SCHEME = Scheme(3, 2, ((SQRT2M1,), (SQRT3M1,)))


def test_scheme_validation():
    with pytest.raises(ValueError):
        Scheme(2, 2, ((GOLDEN,), (GOLDEN,)))
    with pytest.raises(ValueError):
        Scheme(3, 1, ((GOLDEN,),))


def test_scheme_json_round_trip():
    assert Scheme.from_json(__import__("json").dumps(S2_SCHEME.to_json_dict())) == S2_SCHEME


def test_rotation_reduces_mod_one():
    sch = Scheme(2, 1, (("1.25",),))
    assert sch.rotation.alpha == ("0.25",)


def test_gamma():
    assert gamma_shift(S2_SCHEME, (0,)) == (0,)
    g = gamma_shift(S2_SCHEME, (1,))
    assert abs(g[0] - Fraction(SQRT3M1)) < Fraction(1, 2**250)
    with pytest.raises(ValueError):
        gamma_shift(GOLDEN_SCHEME, (1,))
    assert gamma_shift(GOLDEN_SCHEME, ()) == (0,)


def test_golden_points():
    ss = special_section(GOLDEN_SCHEME, [1])
    pts = generate_points(ss, [], (0, 13))
    assert list(pts.columns[()]) == [0, 2, 5, 7, 10, 13]
    emb = list(pts.embeddings())
    assert emb[1][0] == 2 and abs(float(emb[1][1]) - 2 * 0.6180339887498949) < 1e-15


def test_full_torus_selects_everything():
    ss = SectionedScheme(S2_SCHEME, geometry(initial_basis(S2_SCHEME.rotation)))
    pts = generate_points(ss, [(-2, 2)], (-5, 5))
    assert len(pts) == 55
    bd = bd_pairing(ss, [(-2, 2)], (-5, 5))
    assert bd.sup_displacement == 0


def test_reduction_to_dynamics():
    ss = special_section(S2_SCHEME, [1])
    seq = renormalized_returns(ss.region, 400)
    pts = generate_points(ss, [(0, 1)], (0, seq.ells[-1]))
    assert list(pts.columns[(0,)]) == [0] + seq.ells
    # column tail=1 is the orbit of gamma(1), decided point by point
    g = gamma_shift(S2_SCHEME, (1,))
    alpha = ss.region.ctx.alpha_exact[0]
    expect = [n for n in range(0, 300) if torus_membership(ss.region, (g[0] + n * alpha,)) is not None]
    assert [int(v) for v in pts.columns[(1,)] if v < 300] == expect


def test_golden_pairing():
    ss = special_section(GOLDEN_SCHEME, [1])
    bd = bd_pairing(ss, [], (0, 13))
    targets = [float(bd.target(i)) for i in range(6)]
    assert np.allclose(targets, [0, 2.618034, 5.236068, 7.854102, 10.472136, 13.090170], atol=1e-6)
    assert abs(float(bd.sup_displacement) - 0.8541019662496845) < 1e-15
    assert [p[0] for p in bd.pairs()] == [(0,), (2,), (5,), (7,), (10,), (13,)]


def test_pairing_bijective():
    ss = special_section(S2_SCHEME, [1, 1])
    bd = bd_pairing(ss, [(-5, 5)], (-2000, 2000))
    for tail in bd.column_sup:
        sel = (bd.sources[:, 1] == tail[0])
        idx = bd.index[sel]
        assert (np.diff(idx) == 1).all()
        n1 = bd.sources[sel, 0]
        assert idx[np.searchsorted(n1, 0)] == 0
    assert max(bd.column_sup.values()) == bd.sup_displacement


def test_pairing_needs_zero_in_window():
    ss = special_section(GOLDEN_SCHEME, [1])
    with pytest.raises(ValueError):
        bd_pairing(ss, [], (5, 10))


def test_empty_column():
    ss = special_section(GOLDEN_SCHEME, [1, 1, 1, 1])
    with pytest.raises(EmptyColumn):
        bd_pairing(SectionedScheme(GOLDEN_SCHEME, ss.region, ("0.5",)), [], (-1, 0))


def test_section_must_match_scheme():
    other = special_section(GOLDEN_SCHEME, [1])
    with pytest.raises(ValueError):
        SectionedScheme(Scheme(2, 1, (("0.3",),)), other.region)


def test_fold_offset():
    w, xp = fold_offset(GOLDEN_SCHEME, ("0.5", "0.25"))
    assert xp == (Fraction(1, 2),)
    assert w == (Fraction(1, 4) - Fraction(1, 2) * Fraction(GOLDEN),)


@settings(max_examples=20, deadline=None)
@given(st.integers(-10**4, 10**4), st.integers(-50, 50))
def test_selected_iff_window_contains(n1, n2):
    ss = special_section(S2_SCHEME, [1, 1, 1])
    pts = generate_points(ss, [(n2, n2)], (n1, n1))
    one = 1 << 256
    x = sum(Fraction(n * a, one) for n, a in zip((n1, n2), (r[0] for r in S2_SCHEME.alphas_fx)))
    assert (len(pts) == 1) == (torus_membership(ss.region, (x,)) is not None)
