from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from instanton_rmatrix import BACKEND
from instanton_rmatrix import _kernels_py as pure

compiled = pytest.importorskip("instanton_rmatrix._kernels")

BITS = pure.FIELD_BITS


def pack(exps):
    return sum(e << (BITS * i) for i, e in enumerate(exps))


monomials = st.tuples(*[st.integers(0, 4)] * 3).map(pack)
coeffs = st.integers(-50, 50).filter(bool)
polys = st.dictionaries(monomials, coeffs, max_size=8)


def test_compiled_backend_selected():
    assert BACKEND == "cython"


@given(polys, polys)
def test_ring_ops_agree(a, b):
    for name in ("p_add", "p_sub", "p_mul"):
        assert getattr(compiled, name)(a, b) == getattr(pure, name)(a, b)
    assert compiled.p_neg(a) == pure.p_neg(a)
    assert compiled.p_scale(a, Fraction(3, 7)) == pure.p_scale(a, Fraction(3, 7))
    assert compiled.p_max_norm(a) == pure.p_max_norm(a)


@given(polys, polys)
def test_exact_division_agrees(a, b):
    if not b:
        return
    prod = pure.p_mul(a, b)
    assert compiled.p_divexact(prod, b) == pure.p_divexact(prod, b) == {k: c for k, c in a.items() if c}
    assert compiled.p_divexact(a, b) == pure.p_divexact(a, b)


@given(polys, st.integers(-5, 5), st.integers(0, 2))
def test_evaluation_agrees(a, x, var):
    assert compiled.p_eval_var(a, BITS * var, x) == pure.p_eval_var(a, BITS * var, x)


@given(polys, st.integers(3, 10**6))
def test_symmetric_split_agrees(a, x):
    g, h = pure.p_sym_split(a, x)
    assert compiled.p_sym_split(a, x) == (g, h)
    assert pure.p_add(g, pure.p_scale(h, x)) == a


def test_division_by_zero():
    for mod in (pure, compiled):
        with pytest.raises(ZeroDivisionError):
            mod.p_divexact({0: 1}, {})
