"""Young diagrams: enumeration, arm/leg lengths, conjugation and dominance."""

from __future__ import annotations

from collections import Counter
from functools import lru_cache
from math import factorial, prod
from typing import Iterable, Iterator, NamedTuple


class Box(NamedTuple):
    """A cell ``(i, j)``: 1-based row ``i`` and column ``j`` (English convention)."""

    i: int
    j: int


class Partition(tuple):
    """A weakly decreasing tuple of positive integers.

    Subclasses ``tuple`` so partitions hash and compare like plain tuples.
    """

    __slots__ = ()

    def __new__(cls, parts: Iterable[int] = ()):
        parts = tuple(int(p) for p in parts)
        for a, b in zip(parts, parts[1:]):
            if a < b:
                raise ValueError(f"parts must be weakly decreasing: {parts}")
        if parts and parts[-1] <= 0:
            raise ValueError(f"parts must be positive: {parts}")
        return super().__new__(cls, parts)

    @classmethod
    def _trusted(cls, parts: tuple) -> "Partition":
        return tuple.__new__(cls, parts)

    @property
    def size(self) -> int:
        return sum(self)

    @property
    def length(self) -> int:
        return len(self)

    def part(self, i: int) -> int:
        """``λ_i`` for 1-based ``i``; zero beyond the length."""
        return self[i - 1] if 1 <= i <= len(self) else 0

    def conjugate(self) -> "Partition":
        return conjugate(self)

    def boxes(self) -> Iterator[Box]:
        for i, row in enumerate(self, start=1):
            for j in range(1, row + 1):
                yield Box(i, j)

    def multiplicities(self) -> dict[int, int]:
        return dict(Counter(self))

    def __repr__(self):
        return f"Partition({list(self)})"

    def to_json(self) -> list[int]:
        return list(self)


EMPTY = Partition._trusted(())


def as_partition(x) -> Partition:
    return x if isinstance(x, Partition) else Partition(x)


@lru_cache(maxsize=None)
def _partitions(n: int, maxpart: int) -> tuple[tuple[int, ...], ...]:
    if n == 0:
        return ((),)
    out = []
    for first in range(min(n, maxpart), 0, -1):
        for rest in _partitions(n - first, first):
            out.append((first,) + rest)
    return tuple(out)


def partitions_of(n: int) -> list[Partition]:
    """All partitions of ``n`` in reverse-lexicographic order, e.g. ``(2), (1,1)``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return [Partition._trusted(p) for p in _partitions(n, n)]


def partitions_up_to(n: int) -> list[Partition]:
    return [p for k in range(n + 1) for p in partitions_of(k)]


def conjugate(lam: Iterable[int]) -> Partition:
    lam = tuple(lam)
    if not lam:
        return EMPTY
    return Partition._trusted(tuple(sum(1 for p in lam if p >= j) for j in range(1, lam[0] + 1)))


def arm_leg(lam: Iterable[int], box: tuple[int, int]) -> tuple[int, int]:
    """``(λ_i - j, λ'_j - i)``, defined for boxes outside the diagram too."""
    lam = as_partition(lam)
    i, j = box
    lam_i = lam.part(i)
    lam_j_conj = sum(1 for p in lam if p >= j) if j >= 1 else len(lam)
    return lam_i - j, lam_j_conj - i


def hook_length(lam: Iterable[int], box: tuple[int, int]) -> int:
    a, l = arm_leg(lam, box)
    return a + l + 1


def aut_factor(lam: Iterable[int]) -> int:
    """``z_λ = Π m_r! · Π λ_i``: automorphism count times the product of parts."""
    lam = tuple(lam)
    return prod(factorial(m) for m in Counter(lam).values()) * prod(lam)


z_lambda = aut_factor


def n_statistic(lam: Iterable[int]) -> int:
    """``n(λ) = Σ (i-1) λ_i``."""
    return sum(i * p for i, p in enumerate(lam))


def dominance_leq(lam: Iterable[int], mu: Iterable[int]) -> bool:
    """``λ ≤ μ`` in dominance order (partial sums of λ never exceed those of μ)."""
    lam = tuple(lam)
    mu = tuple(mu)
    if sum(lam) != sum(mu):
        raise ValueError("dominance order compares partitions of the same size")
    a = b = 0
    for k in range(max(len(lam), len(mu))):
        a += lam[k] if k < len(lam) else 0
        b += mu[k] if k < len(mu) else 0
        if a > b:
            return False
    return True


def remove_parts(lam: tuple, sub: tuple) -> tuple | None:
    """Multiset difference ``λ \\ ν`` as a sorted tuple, or None if ν ⊄ λ."""
    if not sub:
        return tuple(lam)
    rest = list(lam)
    for p in sub:
        try:
            rest.remove(p)
        except ValueError:
            return None
    return tuple(rest)


def merge_parts(a: tuple, b: tuple) -> tuple:
    if not a:
        return tuple(b)
    if not b:
        return tuple(a)
    return tuple(sorted(a + b, reverse=True))


def sub_multisets(lam: tuple) -> Iterator[tuple]:
    """All sub-multisets of the parts of λ, as partitions."""
    items = sorted(Counter(lam).items(), reverse=True)

    def rec(k):
        if k == len(items):
            yield ()
            return
        part, m = items[k]
        for rest in rec(k + 1):
            for c in range(m + 1):
                yield (part,) * c + rest

    for s in rec(0):
        yield tuple(sorted(s, reverse=True))
