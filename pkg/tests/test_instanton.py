from fractions import Fraction

import pytest
from hypothesis import given

from instanton_rmatrix.fock import lehn_operator, operator_matrix, rank_operator
from instanton_rmatrix.instanton import (
    contour_field_power,
    contour_identities,
    double,
    euler_nminus,
    ex2_residual,
    h_commutator,
    h_matrices,
    pair_basis,
    printed_h1,
    printed_h2,
    printed_r1,
    printed_r2,
    product_series_check,
    r1,
    r2,
    recover_chern,
    t_diagonal,
    truncated_product_r,
    undouble,
)
from instanton_rmatrix.jack import t_eigenvalue
from instanton_rmatrix.linalg import Matrix
from instanton_rmatrix.partition import partitions_of
from instanton_rmatrix.ring import ONE, hbar, parse
from strategies import partitions


def test_euler_empty():
    assert euler_nminus((), ()) == ONE


def test_euler_single_boxes():
    assert euler_nminus((), (1,)) == parse("u")
    # the box of λ sees leg l_∅ = -1 and arm 0, so both weights shift
    assert euler_nminus((1,), ()) == parse("u - t1 - t2")
    assert euler_nminus((1,), (1,)) == parse("(u - t1)*(u - t2)")


@given(partitions(max_size=6))
def test_euler_degree(lam):
    f = euler_nminus(lam, lam)
    assert f.denominator.is_constant()
    assert f.numerator.degree("u") == 2 * sum(lam)


def test_t_diagonal_single_box():
    t = t_diagonal()
    assert t((1,)) == parse("u/(u+h)")
    assert t.coefficient((1,), 1) == -hbar()


@given(partitions(max_size=7))
def test_t_first_coefficient_is_minus_h_rank(lam):
    assert t_diagonal().coefficient(lam, 1) == -hbar() * sum(lam)


@given(partitions(max_size=7))
def test_ex2_relation(lam):
    assert not ex2_residual(lam)


def test_h_examples():
    assert h_matrices(2, 1) == Matrix.from_rows([[hbar() ** 2]])
    assert h_matrices(1, 2) == Matrix.identity(2).scale(-2 * hbar())


def test_h_bad_arguments():
    with pytest.raises(ValueError):
        h_matrices(0, 2)
    with pytest.raises(ValueError):
        h_matrices(1, -1)


@pytest.mark.parametrize("d", range(7))
def test_h1_is_minus_h_rank(d):
    assert h_matrices(1, d) == operator_matrix(rank_operator(), d).scale(-hbar())


@pytest.mark.parametrize("d", range(6))
def test_h2_from_c1(d):
    h = hbar()
    want = operator_matrix(lehn_operator(), d).scale(h) + Matrix.identity(len(partitions_of(d))).scale(h * h * Fraction(d * (d + 1), 2))
    assert h_matrices(2, d) == want


@pytest.mark.parametrize("d", range(7))
def test_commuting_hamiltonians(d):
    for n in (1, 2, 3):
        for m in (1, 2, 3):
            assert h_commutator(n, m, d).is_zero()


def test_recovery_report():
    rep = recover_chern(5).report
    assert rep["rank_matches"] and rep["c1_matches_lehn"]
    assert rep["h1_sign_minus"] and not rep["h1_sign_plus"]
    assert rep["h2_matches_intro_form"]
    assert not rep["h2_matches_printed_r2_vacuum"]
    with pytest.raises(ValueError):
        recover_chern(0)


def test_recovered_h1_is_printed_h1_with_minus_sign():
    rec = recover_chern(4)
    assert rec.h1.equals_up_to(printed_h1(-1), 4)
    assert rec.h2.equals_up_to(printed_h2(), 4)


def test_pair_basis_counts():
    # Σ_a p(a) p(d - a)
    assert [len(pair_basis(d)) for d in range(5)] == [1, 2, 5, 10, 20]


@pytest.mark.parametrize("d", range(6))
def test_doubled_vacuum_blocks(d):
    assert r1().vacuum_block(d) == h_matrices(1, d)
    assert r2().vacuum_block(d) == h_matrices(2, d)
    assert r1().vacuum_block(d, "right") == h_matrices(1, d)


def test_printed_variants_differ_on_vacuum():
    assert printed_r1().vacuum_block(2) != h_matrices(1, 2)
    assert printed_r2().vacuum_block(2) != h_matrices(2, 2)


def test_vacuum_block_side_validation():
    with pytest.raises(ValueError):
        r1().vacuum_block(1, "middle")


@pytest.mark.parametrize("k", [1, -1, 2, -2, 3, -3, 4, -4])
def test_alpha_plus_commutes(k):
    for d in range(5):
        assert r1().alpha_plus_residual(k, d) == 0
        assert r2().alpha_plus_residual(k, d) == 0


def test_undouble_recovers_h1():
    assert undouble(r1(), 3, 2).equals_up_to(printed_h1(-1), 3)
    assert double(printed_h1(-1)).vacuum_block(2) == r1().vacuum_block(2)


def test_contour_power_bounds():
    assert contour_field_power(1).matrix(2).is_zero()
    with pytest.raises(ValueError):
        contour_field_power(4)


def test_contour_identities_do_not_hold():
    # with a_{-n} = -α^-_{-n}/(t1 t2) the closing identities fail from degree 1
    cc = contour_identities(3)
    assert not cc.r1_ok and not cc.r2_ok
    assert cc.r1_residual.startswith("degree 1: (0,0) = ")
    assert cc.r2_residual.startswith("degree 1: (0,0) = ")


def test_product_does_not_stabilize():
    res = truncated_product_r("u", 2, 2)
    assert not res.stabilized
    assert res.report["normalized_stabilized"]
    assert res.report["changed_entries"] == 28
    # vacuum eigenvalue Π_{n=1}^{M} (u + n t1)/(u + n t1 + n ħ)
    assert parse(res.report["vacuum_eigenvalue"]) == parse("(u+t1)*(u+2*t1)/((u+t1+h)*(u+2*t1+2*h))")


def test_normalized_product_series():
    series = product_series_check(truncated_product_r("u", 2, 2), normalize=True)
    assert series[1] == {"full_block": True, "vacuum_block": True}
    assert series[2] == {"full_block": False, "vacuum_block": False}


def test_product_arguments():
    with pytest.raises(ValueError):
        truncated_product_r("u", 0, 2)


def test_t_eigenvalue_agrees_with_diagonal_family():
    for lam in partitions_of(4):
        assert t_diagonal()(lam) == t_eigenvalue(lam)
