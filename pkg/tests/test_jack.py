import json
import random
from fractions import Fraction

import pytest
from hypothesis import given

from instanton_rmatrix.fermion import schur
from instanton_rmatrix.fock import FockVector, lehn_operator, operator_matrix
from instanton_rmatrix.jack import (
    CONVENTION_HASH,
    EigencheckError,
    JackBasis,
    c1_eigenvalue,
    clear_memo,
    jack_basis,
    t_eigenvalue,
    t_eigenvalue_text,
    to_monomial,
)
from instanton_rmatrix.linalg import Matrix
from instanton_rmatrix.partition import aut_factor, conjugate, dominance_leq, partitions_of
from instanton_rmatrix.ring import ONE, ZERO, evaluate, parse, substitute
from strategies import partitions

SWAP = {"t1": parse("t2"), "t2": parse("t1")}


def test_degree_one():
    assert jack_basis(1).vectors[(1,)] == FockVector.basis((1,))


def test_degree_two_eigenvalues():
    basis = jack_basis(2)
    m = operator_matrix(lehn_operator(), 2)
    for lam, want in (((2,), "t2"), ((1, 1), "t1")):
        v = basis.vectors[lam]
        col = m.apply({i: v[p] for i, p in enumerate(partitions_of(2)) if v[p]})
        got = FockVector({partitions_of(2)[i]: c for i, c in col.items()})
        assert got == v.scale(parse(want))


@pytest.mark.parametrize("n", range(1, 6))
def test_schur_limit(n):
    # θ = -t1/t2 = 1
    basis = jack_basis(n)
    for lam in basis.partitions:
        assert basis.vectors[lam].substitute({"t1": 1, "t2": -1}) == schur(tuple(lam))


def test_eigenvalue_examples():
    assert c1_eigenvalue(()) == ZERO
    assert t_eigenvalue(()) == ONE
    assert t_eigenvalue((1,)) == parse("u/(u+t1+t2)")
    assert c1_eigenvalue((2,)) == parse("t2")
    assert t_eigenvalue_text((2,)) == "u(u+t2)/((u+t1+t2)(u+t1+2t2))"


@given(partitions(max_size=7))
def test_eigenvalue_factor_counts(lam):
    from instanton_rmatrix.jack import t_eigenvalue_factors

    num, den = t_eigenvalue_factors(lam)
    assert len(num) == len(den) == sum(lam)


@given(partitions(max_size=8))
def test_transposition_symmetry(lam):
    lt = conjugate(lam)
    assert substitute(c1_eigenvalue(lam), SWAP) == c1_eigenvalue(lt)
    assert substitute(t_eigenvalue(lam), SWAP) == t_eigenvalue(lt)


@pytest.mark.parametrize("n", range(7))
def test_round_trip(n):
    basis = jack_basis(n)
    for lam in partitions_of(n):
        p = FockVector.basis(lam)
        assert basis.from_jack(basis.to_jack(p)) == p


def test_from_unit_vector():
    basis = jack_basis(3)
    for lam in basis.partitions:
        assert basis.from_jack({lam: 1}) == basis.vectors[lam]


def test_to_jack_rejects_other_degree():
    with pytest.raises(ValueError):
        jack_basis(2).to_jack(FockVector.basis((3,)))


@pytest.mark.parametrize("n", range(1, 6))
def test_p1_power_has_full_support(n):
    basis = jack_basis(n)
    coords = basis.to_jack(FockVector.basis((1,) * n))
    assert set(coords) == set(basis.partitions)
    # positive θ specialization: t1 = θ, t2 = -1
    rng = random.Random(n)
    theta = Fraction(rng.randint(1, 9), rng.randint(1, 9))
    for c in coords.values():
        assert evaluate(c, {"t1": theta, "t2": -1}) > 0


@pytest.mark.parametrize("n", range(8))
def test_lehn_diagonal_in_jack_basis(n):
    basis = jack_basis(n)
    d = basis.inverse_matrix() @ operator_matrix(lehn_operator(), n) @ basis.matrix()
    assert d == Matrix.diag([c1_eigenvalue(lam) for lam in basis.partitions])
    values = [c1_eigenvalue(lam) for lam in basis.partitions]
    assert len(set(values)) == len(values) or n >= 6


@pytest.mark.parametrize("n", range(7))
def test_orthogonality(n):
    # <p_λ, p_μ> = δ z_λ (-t1 t2)^(-ℓ(λ)) on the (t1, t2) vectors
    basis = jack_basis(n)
    w = parse("-t1*t2").inverse()
    parts = basis.partitions
    for i, lam in enumerate(parts):
        for mu in parts[i + 1:]:
            a, b = basis.vectors[lam], basis.vectors[mu]
            s = ZERO
            for nu in partitions_of(n):
                s = s + a[nu] * b[nu] * aut_factor(nu) * w ** len(nu)
            assert s == ZERO


@pytest.mark.parametrize("n", range(1, 7))
def test_triangularity(n):
    basis = jack_basis(n)
    for lam in basis.partitions:
        mono = to_monomial(FockVector(dict(basis.q_coeffs[lam])))
        assert mono[tuple(lam)] == ONE
        assert all(dominance_leq(mu, lam) for mu in mono)


def test_conjugate_diagonal_reproduces_lehn():
    basis = jack_basis(4)
    vals = {lam: c1_eigenvalue(lam) for lam in basis.partitions}
    assert basis.conjugate_diagonal(vals) == operator_matrix(lehn_operator(), 4)


def test_cache_round_trip(tmp_path):
    clear_memo()
    first = jack_basis(4, cache=tmp_path)
    files = list(tmp_path.iterdir())
    assert [f.name for f in files] == [f"jack_4_{CONVENTION_HASH}.json"]
    clear_memo()
    second = jack_basis(4, cache=tmp_path)
    assert second.matrix() == first.matrix()
    clear_memo()


def test_corrupt_cache_is_rebuilt(tmp_path):
    clear_memo()
    jack_basis(3, cache=tmp_path)
    path = tmp_path / f"jack_3_{CONVENTION_HASH}.json"
    data = json.loads(path.read_text())
    row = data["q_coeffs"][json.dumps([3])]
    row[json.dumps([3])] = parse("5").to_json()
    path.write_text(json.dumps(data))
    clear_memo()
    rebuilt = jack_basis(3, cache=tmp_path)
    rebuilt.verify()
    clear_memo()


def test_tampered_basis_fails_verification():
    b = jack_basis(3)
    q = {lam: dict(row) for lam, row in b.q_coeffs.items()}
    q[(2, 1)][(3,)] = q[(2, 1)].get((3,), ZERO) + ONE
    bad = JackBasis(b.degree, b.partitions, q, b.norms)
    with pytest.raises(EigencheckError):
        bad.verify()


def test_foreign_convention_rejected():
    obj = jack_basis(2).to_json()
    obj["convention_hash"] = "0" * 16
    with pytest.raises(ValueError):
        JackBasis.from_json(obj)
