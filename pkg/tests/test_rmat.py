import pytest
from hypothesis import given, strategies as st

from instanton_rmatrix.linalg import Matrix, OverdeterminedError
from instanton_rmatrix.ring import ONE, ZERO, hbar, parse
from instanton_rmatrix.rmat import (
    BudgetExceeded,
    InvarianceError,
    TensorOp,
    WedgeSubspace,
    compare_fusion_with_wedge,
    extract_xi_coefficients,
    fundamental_family,
    fundamental_r,
    fusion_factors_text,
    fusion_r,
    gl_invariance_residuals,
    nonvanishing_range,
    omega_invariants,
    r_from_stabs,
    restriction_matrix,
    stab_tpn,
    stab_two_paths,
    wedge_coefficient,
    wedge_family,
    wedge_r,
    ybe_check,
)


def test_fundamental_n2_entries():
    r = fundamental_r("u", 2)
    assert r.entry((0, 1), (0, 1)) == parse("u/(u+h)")
    assert r.entry((0, 1), (1, 0)) == parse("h/(u+h)")
    assert r.entry((0, 0), (0, 0)) == ONE
    assert r.entry((0, 0), (1, 1)) == ZERO


def test_classical_limit_is_identity():
    r = fundamental_r("u", 3).substitute({"t2": parse("-t1")})
    assert r == TensorOp.identity((3, 3))


def test_fundamental_needs_two_states():
    with pytest.raises(ValueError):
        fundamental_r("u", 1)


def test_diagonal_vector_is_fixed():
    assert fundamental_r("u", 2).apply({(0, 0): 1}) == {(0, 0): ONE}


@pytest.mark.parametrize("N", [2, 3])
def test_ybe_fundamental(N):
    res = ybe_check(fundamental_family(N), (N, N, N))
    assert res.ok
    assert res.residual_text() == "0"


def test_ybe_mixed_wedges():
    assert ybe_check(wedge_family(3, (1, 1, 2)), (3, 3, 3)).ok


def test_ybe_needs_three_factors():
    with pytest.raises(ValueError):
        ybe_check(fundamental_family(2), (2, 2))


def test_unitarity():
    u = parse("u")
    assert fundamental_r(u, 3) @ fundamental_r(-u, 3) == TensorOp.identity((3, 3))


def test_xi_zero_and_one():
    assert omega_invariants(3, 1, 2, 0) == TensorOp.identity((3, 3))
    ident_minus_p = Matrix.from_rows([[0, 0, 0, 0], [0, 1, -1, 0], [0, -1, 1, 0], [0, 0, 0, 0]])
    assert omega_invariants(2, 1, 1, 1).matrix == ident_minus_p


def test_xi_negative_order():
    with pytest.raises(ValueError):
        omega_invariants(2, 1, 1, -1)


@pytest.mark.parametrize("N", range(2, 5))
def test_xi_support_is_min_n2_codim(N):
    # Ξ_m is nonzero exactly for m ≤ min(n2, N - n1); this can exceed min(n1, n2)
    for n1 in range(1, N):
        for n2 in range(1, N):
            top = nonvanishing_range(N, n1, n2)
            for m in range(N + 1):
                assert omega_invariants(N, n1, n2, m).is_zero() == (m > top)


def test_xi_beyond_min_on_two_two():
    # on ∧²⊗∧² at N=4 the vanishing bound is min(n1, n2) = 2
    assert omega_invariants(4, 2, 2, 3).is_zero()
    assert not omega_invariants(4, 1, 3, 2).is_zero()


def test_wedge_one_one_is_fundamental():
    for N in (2, 3):
        assert wedge_r("u", N, 1, 1) == fundamental_r("u", N)


def test_wedge_coefficients():
    assert wedge_coefficient("u", 0) == ONE
    assert wedge_coefficient("u", 1) == parse("-h/(u+h)")
    assert wedge_coefficient("u", 2) == parse("h^2/(2*(u+h)*(u+2*h))")


def test_wedge_bad_degree():
    with pytest.raises(ValueError):
        wedge_r("u", 2, 3, 1)


@given(st.integers(2, 4), st.data())
def test_wedge_is_gl_invariant(N, data):
    n1 = data.draw(st.integers(1, N - 1))
    n2 = data.draw(st.integers(1, N - 1))
    assert gl_invariance_residuals(wedge_r("u", N, n1, n2), N, n1, n2) == {}


def test_extract_round_trip():
    op = wedge_r("u", 4, 2, 2)
    assert extract_xi_coefficients(op, 4, 2, 2) == [wedge_coefficient("u", k) for k in range(3)]


def test_extract_rejects_outside_span():
    op = TensorOp.from_matrix((2, 2), Matrix.from_rows([[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]))
    with pytest.raises(OverdeterminedError):
        extract_xi_coefficients(op, 2, 1, 1)


def test_fusion_factor_order():
    assert fusion_factors_text(2, 3) == "R15(u+3h) R14(u+2h) R13(u+h) R25(u+2h) R24(u+h) R23(u)"
    assert fusion_factors_text(1, 1) == "R12(u)"


def test_fusion_one_one_is_fundamental():
    assert fusion_r("u", 3, 1, 1).restriction == fundamental_r("u", 3)


def test_fusion_budget():
    with pytest.raises(BudgetExceeded):
        fusion_r("u", 2, 4, 3)
    with pytest.raises(BudgetExceeded):
        fusion_r("u", 5, 3, 3, budget=8)
    with pytest.raises(ValueError):
        fusion_r("u", 3, 0, 1)


# The fused block preserves the wedge subspace on the right only; its relation
# to wedge_r is a scalar multiple at a shifted spectral parameter with the
# Ξ sum taken over the full nonvanishing range.
FUSION_RELATIONS = {
    (3, 1, 2): (0, "1", 2),
    (4, 2, 2): (1, "u/(u+2*h)", 2),
    (5, 2, 3): (1, "u/(u+3*h)", 3),
    (3, 2, 1): (1, "u/(u+h)", 1),
}


@pytest.mark.parametrize("case", sorted(FUSION_RELATIONS))
def test_fusion_relation_to_wedge(case):
    shift, scalar, kmax = FUSION_RELATIONS[case]
    cmp = compare_fusion_with_wedge(*case)
    assert not cmp.exact
    assert (cmp.shift, cmp.scalar, cmp.kmax) == (shift, parse(scalar), kmax)
    fr = fusion_r("u", *case)
    assert fr.preserves_wedge
    assert not fr.wedge_invariant_on_left


def test_fusion_full_operator_matches_restriction():
    fr = fusion_r("u", 2, 1, 1)
    assert fr.full() == fundamental_r("u", 2)


def test_fusion_invariance_error_not_raised_for_good_case():
    fusion_r("u", 3, 1, 2, require_invariance=True)
    assert issubclass(InvarianceError, ArithmeticError)


def test_wedge_subspace_dimensions():
    assert WedgeSubspace(4, 2).dim == 6
    assert WedgeSubspace(5, 0).dim == 1


# -- stable envelopes --------------------------------------------------------


def test_stab_tp1_first_point():
    assert stab_tpn(1, 0) == parse("u1 - c")
    assert stab_tpn(1, 1) == parse("u0 - c - h")
    assert stab_tpn(1, 1, "opposite") == parse("u0 - c")


def test_stab_bad_arguments():
    with pytest.raises(ValueError):
        stab_tpn(2, 3)
    with pytest.raises(ValueError):
        stab_tpn(1, 0, "sideways")
    with pytest.raises(ValueError):
        r_from_stabs(0)


def test_r_from_stabs_tp1():
    rmp = Matrix.from_rows([[parse("u/(u+h)"), parse("h/(u+h)")], [parse("h/(u+h)"), parse("u/(u+h)")]])
    assert r_from_stabs(1).matrix == rmp


@pytest.mark.parametrize("n", range(1, 5))
@pytest.mark.parametrize("chamber", ["fundamental", "opposite"])
def test_support_is_triangular(n, chamber):
    m = restriction_matrix(n, chamber)
    for (i, k), v in m.entries.items():
        assert v
        assert (i <= k) if chamber == "fundamental" else (i >= k)


@pytest.mark.parametrize("n", range(1, 4))
def test_r_from_stabs_row_sums(n):
    # the R-matrix fixes the sum of fixed-point classes
    m = r_from_stabs(n).matrix
    for i in range(n + 1):
        assert sum((m[(i, k)] for k in range(n + 1)), ZERO) == ONE


def test_two_path_identity():
    left, right = stab_two_paths()
    assert left == right
    assert r_from_stabs(2) == left


def test_tensor_json_and_latex():
    r = fundamental_r("u", 2)
    obj = r.to_json()
    assert obj["spaces"] == [2, 2]
    assert r"\frac" in r.to_latex()
