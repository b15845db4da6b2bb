from fractions import Fraction

import pytest
from hypothesis import assume, given

from instanton_rmatrix.ring import (
    ONE,
    ZERO,
    MultiPoly,
    PoleAtInfinity,
    PoleError,
    RatFunc,
    evaluate,
    gcd,
    hbar,
    parse,
    ratfunc_arith,
    series_expand,
    substitute,
)
from strategies import ratfuncs, rationals, regular_at_infinity

sympy = pytest.importorskip("sympy")

T1, T2, U = sympy.symbols("t1 t2 u")


def to_sympy(f: RatFunc):
    return sympy.sympify(f.to_text().replace("^", "**"), locals={"t1": T1, "t2": T2, "u": U})


# -- arithmetic -------------------------------------------------------------


def test_row_sum_of_fundamental_entries():
    assert parse("u/(u+h)") + parse("h/(u+h)") == ONE


def test_common_factor_cancels():
    assert parse("(u^2 - h^2)/(u + h)") == parse("u - h")


def test_inverse_pair():
    assert parse("u/(u+h)") * parse("(u+h)/u") == ONE


def test_hbar_is_expanded():
    assert hbar() == parse("t1 + t2")
    assert parse("ħ") == parse("hbar") == hbar()
    assert "h" not in hbar().variables()


def test_division_by_zero_raises():
    with pytest.raises(ZeroDivisionError):
        ratfunc_arith(parse("u"), ZERO, "div")


def test_arith_kinds():
    a, b = parse("u"), parse("t1")
    assert ratfunc_arith(a, b, "add") == parse("u+t1")
    assert ratfunc_arith(a, b, "sub") == parse("u-t1")
    assert ratfunc_arith(a, b, "mul") == parse("u*t1")
    assert ratfunc_arith(a, b, "div") == parse("u/t1")
    with pytest.raises(ValueError):
        ratfunc_arith(a, b, "pow")


def test_fraction_coefficients_stay_exact():
    f = parse("1/3*u + 2/7")
    assert evaluate(f, {"u": Fraction(3, 2)}) == Fraction(1, 2) + Fraction(2, 7)


def test_canonical_sign_of_denominator():
    f = RatFunc(MultiPoly.var("u"), -MultiPoly.var("t1"))
    assert f == parse("-u/t1")
    assert f.denominator == MultiPoly.var("t1")


def test_text_roundtrip_examples():
    for text in ("(-t2-t1)/(2*t1*t2)", "1/t1^2", "u*(u+t2)/((u+t1+t2)*(u+t1+2*t2))"):
        f = parse(text)
        assert parse(f.to_text()) == f


def test_json_roundtrip():
    f = parse("(3*u^2 - t1*t2)/(u + 2*t1)")
    assert RatFunc.from_json(f.to_json()) == f


@given(ratfuncs(), ratfuncs())
def test_canonical_form_matches_sympy_cancel(a, b):
    assume(b)
    got = (a / b) + a * b
    want = sympy.cancel(to_sympy(a) / to_sympy(b) + to_sympy(a) * to_sympy(b))
    assert sympy.simplify(to_sympy(got) - want) == 0
    num, den = sympy.fraction(sympy.cancel(to_sympy(got)))
    # reduced: no common factor survives in our numerator/denominator
    assert sympy.gcd(sympy.Poly(to_sympy(RatFunc(got.numerator)), T1, T2, U),
                     sympy.Poly(to_sympy(RatFunc(got.denominator)), T1, T2, U)).is_ground


@given(ratfuncs(), ratfuncs(), ratfuncs())
def test_confluence_of_normalization(a, b, c):
    assume(c)
    left = (a + b) / c
    right = a / c + b / c
    assert left == right
    assert hash(left) == hash(right)
    assert (a * b) * c == a * (b * c)


@given(ratfuncs())
def test_gcd_of_canonical_pair_is_trivial(f):
    g = gcd(f.numerator.terms, f.denominator.terms)
    assume(f)
    assert MultiPoly(g).is_constant()


# -- series -----------------------------------------------------------------


def test_series_of_fundamental_weight():
    h = hbar()
    assert series_expand(parse("u/(u+h)"), 2) == [ONE, -h, h * h]


def test_series_of_constant():
    assert series_expand(ONE, 3) == [ONE, ZERO, ZERO, ZERO]


def test_series_of_two_box_eigenvalue():
    f = parse("u*(u+t2)/((u+t1+t2)*(u+t1+2*t2))")
    assert series_expand(f, 1) == [ONE, parse("-2*(t1+t2)")]


def test_pole_at_infinity():
    with pytest.raises(PoleAtInfinity):
        series_expand(parse("u^2/(u+1)"), 2)


@given(regular_at_infinity(), regular_at_infinity())
def test_series_is_multiplicative(f, g):
    order = 4
    sf, sg, sfg = series_expand(f, order), series_expand(g, order), series_expand(f * g, order)
    conv = [sum((sf[i] * sg[k - i] for i in range(k + 1)), ZERO) for k in range(order + 1)]
    assert conv == sfg


@given(regular_at_infinity())
def test_series_agrees_with_sympy(f):
    order = 3
    ours = series_expand(f, order)
    w = sympy.Symbol("w")
    expr = to_sympy(f).subs(U, 1 / w)
    ref = sympy.series(expr, w, 0, order + 1).removeO()
    for k, c in enumerate(ours):
        assert sympy.simplify(to_sympy(c) - ref.coeff(w, k)) == 0


@given(regular_at_infinity(), rationals, rationals)
def test_series_remainder_is_high_order(f, t1, t2):
    # at a rational point the truncation error decays like u^(-order-1)
    order = 3
    coeffs = [evaluate(c, {"t1": t1, "t2": t2}) for c in series_expand(f, order)]
    g = substitute(f, {"t1": t1, "t2": t2})
    for big in (10**12, 10**13):
        try:
            val = evaluate(g, {"u": big})
        except PoleError:
            continue
        approx = sum(c * Fraction(1, big) ** k for k, c in enumerate(coeffs))
        assert abs(val - approx) * Fraction(big) ** order < Fraction(1, 10)


# -- substitution -----------------------------------------------------------


def test_restriction_to_a_point():
    assert substitute(parse("u2 - c"), {"c": parse("u1")}) == parse("u2 - u1")


def test_empty_substitution_is_identity():
    f = parse("(u+t1)/t2")
    assert substitute(f, {}) == f


def test_substitution_pole():
    with pytest.raises(PoleError):
        substitute(parse("1/(c - u1)"), {"c": parse("u1")})


def test_cannot_bind_hbar():
    with pytest.raises(ValueError):
        substitute(parse("u"), {"h": 1})


@given(ratfuncs(), rationals, rationals, rationals)
def test_substitution_agrees_with_evaluation(f, a, b, c):
    point = {"t1": a, "t2": b, "u": c}
    try:
        direct = evaluate(f, point)
    except PoleError:
        return
    staged = evaluate(substitute(substitute(f, {"t1": a}), {"t2": b, "u": c}), {})
    assert direct == staged
    assert direct == Fraction(str(sympy.Rational(to_sympy(f).subs({T1: a, T2: b, U: c}))))
