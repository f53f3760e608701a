from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
import hypothesis.strategies as st

from dphierarchy.coeff_ring import RingElem
from dphierarchy.diffpoly import (
    DiffSeries,
    classify,
    dseries_add,
    dseries_dx,
    dseries_invert,
    dseries_mul,
    recursion_residual,
    rho_seq,
    taylor_p,
)
from dphierarchy.errors import TruncMismatch

D = 4
C = sympy.Symbol("c", positive=True)
X = sympy.Symbol("x")
EPS = sympy.Symbol("eps")


def mono(q, k=0):
    return RingElem.monomial(Fraction(q), k)


def w(i, trunc=D):
    return DiffSeries.variable(i, trunc)


def to_sympy(x: RingElem):
    return sum(
        (sympy.Rational(q.a.numerator, q.a.denominator)
         + sympy.Rational(q.b.numerator, q.b.denominator) * sympy.sqrt(5)) * C ** sympy.Rational(k, 3)
        for k, q in x.terms.items()
    )


def sympy_density(expr, trunc, order):
    """Expand ``expr(w, w', ...)`` in powers of ``w`` and return its
    coefficient map ``alpha -> sympy`` through degree ``trunc``."""
    f = sympy.Function("w")(X)
    syms = sympy.symbols(f"w0:{order + 1}")
    e = expr(f)
    e = e.subs({f.diff(X, i): EPS * syms[i] for i in range(order, 0, -1)}).subs(f, EPS * syms[0])
    ser = sympy.series(e, EPS, 0, trunc + 1).removeO()
    poly = sympy.Poly(sympy.expand(ser.subs(EPS, 1)), *syms)
    out = {}
    for alpha, coeff in poly.terms():
        alpha = list(alpha)
        while alpha and alpha[-1] == 0:
            alpha.pop()
        out[tuple(alpha)] = sympy.simplify(coeff)
    return out


def assert_matches(series: DiffSeries, oracle: dict):
    keys = set(oracle) | set(series.terms)
    for alpha in keys:
        mine = to_sympy(series.coeff(alpha)) if alpha in series.terms else 0
        theirs = oracle.get(alpha, 0)
        assert sympy.simplify(mine - theirs) == 0, alpha


small_series = st.dictionaries(
    st.lists(st.integers(0, 2), min_size=1, max_size=3).map(tuple),
    st.integers(-3, 3).map(lambda q: mono(q, 1)),
    max_size=4,
).map(lambda t: DiffSeries(t, D))


# arithmetic -----------------------------------------------------------------


def test_add_examples():
    f = w(0) * w(1) + w(2)
    assert dseries_add(f, DiffSeries.zero(D)) == f
    assert dseries_add(w(0), -w(0)).is_zero()
    rho0 = rho_seq(0, D)[0]
    assert rho0.homogeneous(1) + rho0.degree_range(2, D) == rho0


def test_mul_examples():
    assert dseries_mul(w(0), w(1)) == DiffSeries.monomial((1, 1), mono(1), D)
    p = taylor_p(D)
    assert (p * p).constant_term() == mono(1, 2)
    assert (w(0) * w(0) ** D).is_zero()


def test_trunc_mismatch():
    with pytest.raises(TruncMismatch):
        w(0, 3) + w(0, 4)


def test_dx_examples():
    assert dseries_dx(w(0)) == w(1)
    assert dseries_dx(w(0) * w(0)) == (w(0) * w(1)).scale(2)
    assert dseries_dx(w(0) * w(2)) == w(1) * w(2) + w(0) * w(3)


@settings(max_examples=60)
@given(small_series, small_series)
def test_leibniz(f, g):
    assert dseries_dx(f * g) == dseries_dx(f) * g + f * dseries_dx(g)


@settings(max_examples=60)
@given(small_series, small_series)
def test_weight_closure(f, g):
    assert (f * g).max_weight() <= f.max_weight() + g.max_weight()
    assert dseries_dx(f).max_weight() <= f.max_weight() + 1


def test_taylor_p_coefficients():
    p = taylor_p(D)
    assert p.constant_term() == mono(-1, 1)
    assert p.coeff((1,)) == mono(Fraction(-1, 3), -2)
    assert p.coeff((2,)) == mono(Fraction(1, 9), -5)


def test_taylor_p_against_sympy():
    oracle = sympy_density(lambda f: -(C + f) ** sympy.Rational(1, 3), 6, 0)
    assert_matches(taylor_p(6), oracle)


def test_invert_examples():
    geo = dseries_invert(DiffSeries.constant(1, D) + w(0))
    expected = sum(((-w(0)) ** k for k in range(1, D + 1)), DiffSeries.constant(1, D))
    assert geo == expected
    p = taylor_p(D)
    assert dseries_invert(p) * p == DiffSeries.constant(1, D)
    assert dseries_invert(p * p).constant_term() == mono(1, -2)


# densities -------------------------------------------------------------------


def test_rho0_rho1_leading_coefficients():
    rho0, rho1 = rho_seq(1, D)
    assert rho0.coeff((0, 1)) == mono(Fraction(-1, 3), -3)
    assert rho0.coeff((1, 1)) == mono(Fraction(1, 3), -6)
    assert rho1.coeff((0, 0, 1)) == mono(Fraction(-2, 9), -4)
    assert rho1.coeff((0, 2)) == mono(Fraction(7, 27), -7)
    assert rho1.constant_term() == mono(Fraction(-1, 3), -1)


def test_rho0_rho1_against_sympy():
    rho0, rho1 = rho_seq(1, D)

    def r0(f):
        p = -(C + f) ** sympy.Rational(1, 3)
        return -p.diff(X) / p

    def r1(f):
        p = -(C + f) ** sympy.Rational(1, 3)
        px = p.diff(X)
        return -px**2 / p**3 + 2 * px.diff(X) / (3 * p**2) + 1 / (3 * p)

    assert_matches(rho0, sympy_density(r0, D, 1))
    assert_matches(rho1, sympy_density(r1, D, 2))


@pytest.mark.parametrize("scheme", ["unit", "riccati"])
def test_recursion_residual_is_zero(scheme):
    rhos = rho_seq(6, D, scheme)
    for n in range(5):
        assert recursion_residual(rhos, n, scheme).is_zero()


def test_base_identities():
    rho0, rho1 = rho_seq(1, D)
    p = taylor_p(D)
    assert (rho0 * p * p + p * dseries_dx(p)).is_zero()
    # The Riccati expansion at order zeta^-1 carries a factor 3 on rho1 p^2 and p rho0^2.
    lhs = p - dseries_dx(dseries_dx(p))
    rhs = (rho1 * p * p + p * rho0 * rho0 + dseries_dx(rho0 * p)).scale(3)
    assert (lhs - rhs).is_zero()


def test_base_identity_with_unit_weights_fails():
    rho0, rho1 = rho_seq(1, D)
    p = taylor_p(D)
    lhs = p - dseries_dx(dseries_dx(p))
    rhs = rho1 * p * p + (p * rho0 * rho0).scale(2) + dseries_dx(rho0 * p).scale(3)
    assert not (lhs - rhs).is_zero()


def test_schemes_agree_on_first_levels():
    a = rho_seq(1, D, "unit")
    b = rho_seq(1, D, "riccati")
    assert a == b


def test_classify_examples():
    rho1 = rho_seq(1, D)[1]
    cert = classify(rho1, 2)
    assert cert.in_sigma and cert.affine_top
    assert cert.min_degree == 0
    assert not classify(w(2) * w(2), 2).affine_top
    assert not classify(w(3), 2).in_sigma


def test_densities_in_class():
    rhos = rho_seq(8, D)
    for n, rho in enumerate(rhos):
        cert = classify(rho, n + 1)
        assert cert.in_sigma and cert.affine_top, n
        assert rho.order == n + 1


def test_json_round_trip():
    rho = rho_seq(2, D)[2]
    assert DiffSeries.from_json(rho.to_json()) == rho


def test_sqrt5_free():
    for rho in rho_seq(6, D):
        for coeff in rho.terms.values():
            assert all(q.b == 0 for q in coeff.terms.values())
