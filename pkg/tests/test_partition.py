from functools import lru_cache
from math import factorial, prod

import pytest
from hypothesis import given

from instanton_rmatrix.partition import (
    EMPTY,
    Partition,
    arm_leg,
    aut_factor,
    conjugate,
    dominance_leq,
    hook_length,
    partitions_of,
    partitions_up_to,
)
from strategies import partitions


@lru_cache(maxsize=None)
def pentagonal_count(n: int) -> int:
    """Euler's recurrence p(n) = Σ_k (-1)^{k+1} (p(n - k(3k-1)/2) + p(n - k(3k+1)/2))."""
    if n < 0:
        return 0
    if n == 0:
        return 1
    total, k = 0, 1
    while k * (3 * k - 1) // 2 <= n:
        sign = 1 if k % 2 else -1
        total += sign * (pentagonal_count(n - k * (3 * k - 1) // 2) + pentagonal_count(n - k * (3 * k + 1) // 2))
        k += 1
    return total


def test_partitions_of_zero():
    assert partitions_of(0) == [EMPTY]


def test_five_partitions_of_four():
    assert partitions_of(4) == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]


def test_twenty_two_partitions_of_eight():
    assert len(partitions_of(8)) == 22


@pytest.mark.parametrize("n", range(13))
def test_counts_match_pentagonal_recurrence(n):
    parts = partitions_of(n)
    assert len(parts) == pentagonal_count(n)
    assert len(set(parts)) == len(parts)
    assert parts == sorted(parts, reverse=True)


def test_partitions_up_to():
    assert len(partitions_up_to(3)) == 1 + 1 + 2 + 3


def test_invalid_partitions_rejected():
    for bad in ((1, 2), (2, 0), (-1,)):
        with pytest.raises(ValueError):
            Partition(bad)


def test_arm_leg_examples():
    assert arm_leg((3, 1), (1, 1)) == (2, 1)
    assert arm_leg((), (1, 1)) == (-1, -1)
    assert arm_leg((2, 2), (2, 1)) == (1, 0)


def test_arm_leg_outside_diagram():
    assert arm_leg((1,), (2, 2)) == (-2, -2)


def test_aut_factor_examples():
    assert aut_factor((1, 1)) == 2
    assert aut_factor((2, 1)) == 2
    assert aut_factor((2, 2)) == 8
    assert aut_factor(()) == 1


def test_conjugate_example():
    assert conjugate((3, 1)) == (2, 1, 1)


def test_dominance_examples():
    assert dominance_leq((1, 1, 1), (3,))
    assert dominance_leq((2, 2), (3, 1))
    assert not dominance_leq((3, 1), (2, 2))


def test_dominance_needs_equal_sizes():
    with pytest.raises(ValueError):
        dominance_leq((2,), (1,))


def test_partition_json():
    assert Partition((3, 1)).to_json() == [3, 1]


@pytest.mark.parametrize("n", range(13))
def test_conjugate_is_involution(n):
    for lam in partitions_of(n):
        assert conjugate(conjugate(lam)) == lam
        assert sum(conjugate(lam)) == n


@given(partitions(max_size=8))
def test_hook_lengths(lam):
    n = sum(lam)
    hooks = [hook_length(lam, b) for b in lam.boxes()]
    assert hooks == [sum(arm_leg(lam, b)) + 1 for b in lam.boxes()]
    assert factorial(n) % prod(hooks) == 0


def test_hook_formula_counts_tableaux():
    # Σ_λ f_λ² = n! with f_λ = n!/Π hooks
    for n in range(1, 8):
        total = sum((factorial(n) // prod(hook_length(lam, b) for b in lam.boxes())) ** 2 for lam in partitions_of(n))
        assert total == factorial(n)


@given(partitions(max_size=8))
def test_aut_factor_is_centralizer_order(lam):
    # the class of cycle type λ in S_n has n!/z_λ elements
    n = sum(lam)
    assert factorial(n) % aut_factor(lam) == 0
    assert sum(factorial(n) // aut_factor(mu) for mu in partitions_of(n)) == factorial(n)


@given(partitions(max_size=8), partitions(max_size=8))
def test_dominance_is_reversed_by_conjugation(lam, mu):
    if sum(lam) != sum(mu):
        return
    assert dominance_leq(lam, mu) == dominance_leq(conjugate(mu), conjugate(lam))
