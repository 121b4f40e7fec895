from fractions import Fraction

import mpmath
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from brsets.errors import BoundaryAmbiguity, DegenerateCoefficient, SingularBasis
from brsets.lattice import LatticeVector, RotationContext, basis_determinant, embed
from brsets.region import (
    SpecialBasis,
    check_conditions,
    cone_coefficients,
    construct,
    exchange_step,
    geometry,
    initial_basis,
    raw_parallelotope,
    round_robin,
    sign_invariant,
    torus_membership,
)

from conftest import GOLDEN, SQRT2M1, SQRT3M1

TINY = Fraction(1, 2**100)
TOL = Fraction(1, 2**128)


def oracle_geometry(alpha, rows):
    """B, beta, t from an mpmath linear solve (independent of the integer code path)."""
    s = len(alpha)
    al = [mpmath.mpf(a) for a in alpha]
    phys = [[r[i] + r[s] * al[i] for i in range(s)] for r in rows]
    B = mpmath.matrix(s, s)
    for c in range(s):
        for i in range(s):
            B[i, c] = phys[c][i]
    beta = mpmath.matrix(phys[s])
    t = mpmath.lu_solve(B, beta)
    return B, beta, [t[i] for i in range(s)], abs(mpmath.det(B))


def test_initial_basis(golden_ctx, s2_ctx):
    g = geometry(initial_basis(golden_ctx))
    assert g.volume == 1 and g.B == ((1,),)
    assert abs(g.t[0] - Fraction(GOLDEN)) < TINY
    b2 = initial_basis(s2_ctx)
    assert b2.coordinate_rows() == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert geometry(b2).volume == 1
    assert check_conditions(b2).passed


def test_golden_one_step(golden_basis, golden_geom):
    assert golden_basis.coordinate_rows() == [[1, -1], [-1, 2]]
    assert abs(golden_geom.volume - (1 - Fraction(GOLDEN))) < TINY
    assert abs(float(golden_geom.beta[0]) - 0.2360679774997897) < 1e-15
    assert abs(golden_geom.t[0] - Fraction(GOLDEN)) < TINY
    rep = check_conditions(golden_basis)
    assert rep.passed and rep.sign_invariant and rep.determinant == 1


def test_s2_one_step_matches_oracle(s2_ctx, s2_basis, s2_geom):
    assert s2_basis.coordinate_rows() == [[1, 0, -1], [0, 1, 0], [0, -1, 1]]
    c = cone_coefficients(initial_basis(s2_ctx), 1)
    r2, r3 = mpmath.sqrt(2), mpmath.sqrt(3)
    assert abs(float(c[0]) - float((r2 - 1) / (2 - r2))) < 1e-15
    assert abs(float(c[1]) - float((r3 - 1) / (2 - r2))) < 1e-15
    B, beta, t, vol = oracle_geometry((SQRT2M1, SQRT3M1), s2_basis.coordinate_rows())
    for i in range(2):
        for j in range(2):
            assert abs(mpmath.mpf(s2_geom.B[i][j].numerator) / s2_geom.B[i][j].denominator - B[i, j]) < 1e-70
        assert abs(mpmath.mpf(s2_geom.t[i].numerator) / s2_geom.t[i].denominator - t[i]) < 1e-70
    assert abs(float(s2_geom.volume) - 0.5857864376269049) < 1e-15
    assert abs(float(s2_geom.t[0]) - 0.7071067811865476) < 1e-15
    assert abs(float(s2_geom.t[1]) - float((r3 - 1) / (2 - r2) - 1)) < 1e-15


def test_golden_self_similarity(golden_ctx):
    g = geometry(construct(golden_ctx, [1, 1]))
    assert abs(g.t[0] - Fraction(GOLDEN)) < TINY
    g3 = geometry(construct(golden_ctx, [1, 1, 1]))
    assert abs(float(g3.volume) - float(mpmath.mpf(GOLDEN) ** 6)) < 1e-15


def test_construct_empty_is_initial(golden_ctx):
    assert construct(golden_ctx, []) == initial_basis(golden_ctx)


def test_tampered_basis_fails_s3(golden_ctx):
    rep = check_conditions(SpecialBasis(golden_ctx, (LatticeVector((1,), 0), LatticeVector((0,), 2))))
    assert not rep.s3 and rep.determinant == 2 and not rep.passed


def test_s2_boundary_ambiguity():
    ctx = RotationContext(("0.5",))
    # beta = 1/2 + 2^-200 sits near no boundary, but beta = 1 - tiny does
    near = SpecialBasis(RotationContext((str(1 - Fraction(1, 2**200)),)), initial_basis(ctx).vectors)
    with pytest.raises(BoundaryAmbiguity):
        check_conditions(near)


def test_degenerate_coefficient_on_rational_alpha():
    ctx = RotationContext(("0.5",))
    with pytest.raises(DegenerateCoefficient):
        exchange_step(initial_basis(ctx), 1)


def test_singular_basis(golden_ctx):
    b = SpecialBasis(golden_ctx, (LatticeVector((0,), 0), LatticeVector((0,), 1)))
    with pytest.raises(SingularBasis):
        geometry(b)
    assert not check_conditions(b).s1


def test_torus_membership(golden_geom):
    assert torus_membership(golden_geom, (0,)) == (0,)
    assert torus_membership(golden_geom, ("0.5",)) is None
    u = torus_membership(golden_geom, (Fraction("0.2360679774997896964091736687"),))
    assert abs(float(u[0]) - 0.6180339887498949) < 1e-15
    assert torus_membership(golden_geom, ("3.0",)) == (0,)


def test_membership_boundary_ambiguity(golden_geom):
    with pytest.raises(BoundaryAmbiguity):
        torus_membership(golden_geom, (golden_geom.B[0][0] - Fraction(1, 2**200),))


def test_json_round_trip(s2_ctx):
    b = construct(s2_ctx, [1, 2, 2, 1])
    back = SpecialBasis.from_json(b.to_json())
    assert back == b
    assert back.coordinate_rows() == b.coordinate_rows()


def test_raw_parallelotope(golden_ctx):
    g = raw_parallelotope(golden_ctx, [["0.5"]], ["0.1"])
    assert g.volume == Fraction(1, 2)
    assert torus_membership(g, ("0.25",)) == (Fraction(1, 2),)


def test_round_robin():
    assert round_robin(3, 7) == [1, 2, 3, 1, 2, 3, 1]


alpha_digits = st.integers(10**39, 10**40 - 1).map(lambda v: "0." + str(v))


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 3).flatmap(
        lambda s: st.tuples(
            st.lists(alpha_digits, min_size=s, max_size=s),
            st.lists(st.integers(1, s), min_size=1, max_size=8),
        )
    )
)
def test_construction_invariants(data):
    alpha, steps = data
    ctx = RotationContext(tuple(alpha))
    basis = initial_basis(ctx)
    vol = Fraction(1)
    for j in steps:
        g = geometry(basis)
        c = cone_coefficients(basis, j)
        assert all(ci > 0 for ci in c)
        try:
            new = exchange_step(basis, j)
        except DegenerateCoefficient:
            # only legitimate for inputs close to a rational relation
            near = 1 - g.t[j - 1] < 2 * TOL or any(abs(ci - round(ci)) < 2 * TOL for ci in c)
            assert near
            return
        g_new = geometry(new)
        assert abs(basis_determinant(new.vectors)) == 1
        assert sign_invariant(new)
        assert new.lasts[-1] >= basis.lasts[-1]
        # volume shrinks by 1 - t_j, and the new t are the fractional parts of c
        assert g_new.volume == g.volume * (1 - g.t[j - 1])
        assert g_new.t == tuple(ci - (ci.numerator // ci.denominator) for ci in c)
        vol *= 1 - g.t[j - 1]
        basis = new
    assert geometry(basis).volume == vol
    assert check_conditions(basis).passed


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(-3, 3))
def test_shift_equivalence(x_num, m, ):
    ctx = RotationContext((GOLDEN,))
    g = geometry(construct(ctx, [1, 1]))
    x = Fraction(x_num, 10**6 + 7)
    a = torus_membership(g, (x,))
    b = torus_membership(g, (x + m,))
    assert a == b
