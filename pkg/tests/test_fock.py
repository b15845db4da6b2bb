from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from instanton_rmatrix.fock import (
    BosonExpr,
    FockVector,
    InconsistentSystemError,
    RankDeficientError,
    TailRule,
    apply_boson_word,
    apply_expr,
    decompose_to_boson,
    fcc_operator,
    identity_operator,
    lehn_operator,
    operator_matrix,
    rank_operator,
)
from instanton_rmatrix.jack import c1_eigenvalue
from instanton_rmatrix.linalg import Matrix, OverdeterminedError, UnderdeterminedError
from instanton_rmatrix.partition import Partition, partitions_of
from instanton_rmatrix.ring import ONE, RatFunc, hbar, parse
from strategies import partitions

P = FockVector.basis
VAC = FockVector.vacuum()


def test_creation_on_vacuum():
    assert apply_boson_word([-2], VAC) == P((2,))


def test_canonical_commutator_at_one():
    v = P((2, 1, 1)).scale(parse("t1"))
    assert apply_boson_word([1, -1], v) - apply_boson_word([-1, 1], v) == v


def test_derivative_kills_missing_variable():
    assert not apply_boson_word([2], P((1, 1)))


def test_zero_mode_rejected():
    with pytest.raises(ValueError):
        apply_boson_word([0], VAC)


def test_lehn_on_p1_squared():
    assert apply_expr(lehn_operator(), P((1, 1))) == P((2,)).scale(-1)


def test_lehn_on_vacuum():
    assert not apply_expr(lehn_operator(), VAC)


def test_rank_on_p3p1():
    assert apply_expr(rank_operator(), P((3, 1))) == P((3, 1)).scale(4)


def test_rank_matrix_is_scalar():
    assert operator_matrix(rank_operator(), 3) == Matrix.identity(3).scale(3)


def test_lehn_degree_two_eigenvalues():
    m = operator_matrix(lehn_operator(), 2)
    # characteristic polynomial x^2 - tr x + det = (x - t1)(x - t2)
    t1, t2 = parse("t1"), parse("t2")
    tr = m[(0, 0)] + m[(1, 1)]
    det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
    assert tr == t1 + t2
    assert det == t1 * t2


def test_lehn_self_commutator():
    m = operator_matrix(lehn_operator(), 4)
    assert m.commutator(m).is_zero()


def test_mixed_degree_tail_rejected():
    with pytest.raises(ValueError):
        BosonExpr(
            tails=(TailRule("bad", 0, lambda w: [((w,), (), ONE)] if w else []),)
        ).collected(2)


def test_mixed_shift_terms_rejected():
    with pytest.raises(ValueError):
        BosonExpr(terms=(((1,), (), ONE), ((1,), (1,), ONE)))


def test_degree_accessors():
    v = P((3, 1))
    assert v.degree() == 4
    assert v.cohomological_degree() == 4
    assert P((1, 1, 1)).cohomological_degree() == 0
    with pytest.raises(ValueError):
        (P((1,)) + P((2,))).degree()


def test_expr_json_and_latex():
    terms = lehn_operator().to_json(2)
    assert {"creation": [1, 1], "annihilation": [2], "coeff": "t1*t2/2"} in terms
    assert {"creation": [2], "annihilation": [1, 1], "coeff": "-1/2"} in terms
    tex = BosonExpr(terms=(((2,), (1, 1), RatFunc.const(Fraction(-1, 2))),)).to_latex()
    assert tex == r"-\frac{1}{2}\,\alpha_{-2}\alpha_{1}\alpha_{1}"
    with pytest.raises(ValueError):
        lehn_operator().to_json()


@pytest.mark.parametrize("n", range(1, 7))
@pytest.mark.parametrize("m", range(1, 7))
def test_heisenberg_relation(n, m):
    for d in range(9):
        for lam in partitions_of(d):
            v = P(lam)
            lhs = apply_boson_word([n, -m], v) - apply_boson_word([-m, n], v)
            assert lhs == (v.scale(n) if n == m else FockVector())


@pytest.mark.parametrize("d", range(9))
def test_lehn_limit_is_join(d):
    lim = operator_matrix(lehn_operator(), d).substitute({"t1": 0, "t2": 0})
    assert lim == operator_matrix(fcc_operator(), d)


@pytest.mark.parametrize("d", range(8))
def test_lehn_spectrum(d):
    from instanton_rmatrix.jack import jack_basis

    basis = jack_basis(d)
    diag = basis.inverse_matrix() @ operator_matrix(lehn_operator(), d) @ basis.matrix()
    assert diag.is_diagonal()
    assert sorted(v.to_text() for v in diag.diagonal()) == sorted(c1_eigenvalue(lam).to_text() for lam in partitions_of(d))


def test_decompose_rank_with_sign():
    h = hbar()
    mats = {d: Matrix.identity(len(partitions_of(d))).scale(-h * d) for d in range(5)}
    got = decompose_to_boson(mats, 2)
    assert got.equals_up_to(rank_operator().scale(-h), 4)


def test_decompose_lehn_round_trip():
    mats = {d: operator_matrix(lehn_operator(), d) for d in range(5)}
    assert decompose_to_boson(mats, 3).equals_up_to(lehn_operator(), 4)


def test_decompose_identity():
    mats = {d: Matrix.identity(len(partitions_of(d))) for d in range(4)}
    got = decompose_to_boson(mats, 0)
    assert got.collected(3) == identity_operator().collected(3)


def test_decompose_inconsistent():
    mats = {d: operator_matrix(lehn_operator(), d) for d in range(4)}
    with pytest.raises(InconsistentSystemError):
        decompose_to_boson(mats, 2)
    assert issubclass(InconsistentSystemError, OverdeterminedError)


def test_decompose_rank_deficient():
    with pytest.raises(RankDeficientError):
        decompose_to_boson({}, 2)
    assert issubclass(RankDeficientError, UnderdeterminedError)


@st.composite
def boson_exprs(draw, max_degree=3, max_bosons=4):
    terms = []
    for s in range(max_degree + 1):
        ps = partitions_of(s)
        for mu in ps:
            for nu in ps:
                if len(mu) + len(nu) <= max_bosons and draw(st.booleans()):
                    c = draw(st.sampled_from(["1", "-2", "t1", "t2/3", "t1*t2", "1/(t1+t2)"]))
                    terms.append((mu, nu, parse(c)))
    return BosonExpr(tuple(terms))


@given(boson_exprs())
def test_decompose_round_trip(e):
    mats = {d: operator_matrix(e, d) for d in range(4)}
    assert decompose_to_boson(mats, 4).equals_up_to(e, 3)


@given(partitions(max_size=5))
def test_matrix_columns_match_apply(lam):
    e = lehn_operator()
    d = sum(lam)
    m = operator_matrix(e, d)
    col = m.row_labels.index(Partition(lam)) if m.row_labels else partitions_of(d).index(lam)
    img = apply_expr(e, P(lam))
    for i, row_lam in enumerate(partitions_of(d)):
        assert m[(i, col)] == img[row_lam]
