"""Charged free fermions on half-integer modes and the boson-fermion correspondence.

Conventions:

* ``vac = e_{1/2} ∧ e_{3/2} ∧ ...``; the charge-``l`` reference state occupies
  every mode ``>= l + 1/2``, so adding a mode lowers the charge by one.
* A basis ray is ``(l, λ)`` with occupied modes ``{i - 1/2 - λ_i + l : i >= 1}``.
* ``ψ_j`` inserts ``e_j`` and ``ψ*_j`` removes it, both with the sign
  ``(-1)^(number of occupied modes below j)``.
* Energy is ``|λ| + l²/2``; ``ψ_j`` shifts it by ``-j`` and ``ψ*_j`` by ``+j``.
* ``α_n = Σ_j ψ_j ψ*_{j-n}``, so ``α_n`` with ``n > 0`` lowers energy by ``n``.

Modes are stored internally as integers ``m = j - 1/2``.
"""

from __future__ import annotations

import bisect
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple

from .fock import FockVector
from .linalg import sum_ratfuncs
from .partition import EMPTY, Partition, aut_factor, partitions_of
from .ring import ONE, ZERO, RatFunc, R


class WedgeState(NamedTuple):
    """Basis ray ``(charge, partition)``."""

    charge: int
    partition: Partition

    def to_json(self, sign: int = 1) -> dict:
        return {"charge": self.charge, "partition": list(self.partition), "sign": sign}


VACUUM = WedgeState(0, EMPTY)


def half_index(j) -> int:
    """Convert a half-integer mode label to the internal integer ``j - 1/2``."""
    if isinstance(j, str):
        j = Fraction(j)
    elif isinstance(j, float):
        j = Fraction(j)
    if isinstance(j, int) or (isinstance(j, Fraction) and j.denominator == 1):
        raise ValueError(f"fermion modes are half-integers, got {j}")
    if not isinstance(j, Fraction) or j.denominator != 2:
        raise ValueError(f"fermion modes are half-integers, got {j}")
    return int(j - Fraction(1, 2))


def mode_label(m: int) -> Fraction:
    return Fraction(2 * m + 1, 2)


# ---------------------------------------------------------------------------
# Maya diagrams


@lru_cache(maxsize=100000)
def modes(state: WedgeState) -> tuple[tuple[int, ...], int]:
    """``(explicit, tail)``: sorted occupied modes below ``tail``; all modes ``>= tail`` are occupied."""
    l, lam = state
    explicit = tuple(i - lam[i] + l for i in range(len(lam)))
    return explicit, len(lam) + l


def from_modes(explicit: Iterable[int], tail: int) -> WedgeState:
    s = sorted(explicit)
    k = len(s)
    l = tail - k
    parts = [i + l - s[i] for i in range(k)]
    while parts and parts[-1] == 0:
        parts.pop()
    return WedgeState(l, Partition._trusted(tuple(parts)))


@lru_cache(maxsize=400000)
def psi_state(m: int, state: WedgeState) -> tuple[int, WedgeState] | None:
    """``ψ`` at internal mode ``m``: ``(sign, new state)`` or None."""
    explicit, tail = modes(state)
    if m >= tail:
        return None
    pos = bisect.bisect_left(explicit, m)
    if pos < len(explicit) and explicit[pos] == m:
        return None
    new = explicit[:pos] + (m,) + explicit[pos:]
    return (-1 if pos % 2 else 1), from_modes(new, tail)


@lru_cache(maxsize=400000)
def psi_star_state(m: int, state: WedgeState) -> tuple[int, WedgeState] | None:
    """``ψ*`` at internal mode ``m``: ``(sign, new state)`` or None."""
    explicit, tail = modes(state)
    if m >= tail:
        explicit = explicit + tuple(range(tail, m + 1))
        tail = m + 1
    pos = bisect.bisect_left(explicit, m)
    if pos >= len(explicit) or explicit[pos] != m:
        return None
    new = explicit[:pos] + explicit[pos + 1 :]
    return (-1 if pos % 2 else 1), from_modes(new, tail)


def charge_energy(s: WedgeState) -> tuple[int, Fraction]:
    l, lam = s
    return l, sum(lam) + Fraction(l * l, 2)


# ---------------------------------------------------------------------------
# vectors


class FermionVector:
    """Sparse map from ``WedgeState`` rays to RatFunc coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping | None = None):
        out: dict[WedgeState, RatFunc] = {}
        for key, c in (coeffs or {}).items():
            l, lam = key
            key = WedgeState(int(l), lam if isinstance(lam, Partition) else Partition(lam))
            c = R(c)
            s = out.get(key, ZERO) + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        self.coeffs = out

    @classmethod
    def _raw(cls, coeffs: dict) -> "FermionVector":
        v = object.__new__(cls)
        v.coeffs = coeffs
        return v

    @classmethod
    def vacuum(cls, charge: int = 0) -> "FermionVector":
        return cls._raw({WedgeState(charge, EMPTY): ONE})

    @classmethod
    def basis(cls, lam: Iterable[int], charge: int = 0) -> "FermionVector":
        return cls._raw({WedgeState(charge, Partition(lam)): ONE})

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, FermionVector):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __add__(self, other: "FermionVector") -> "FermionVector":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            s = out.get(k)
            s = v if s is None else s + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return FermionVector._raw(out)

    def scale(self, c) -> "FermionVector":
        c = R(c)
        if not c:
            return FermionVector._raw({})
        return FermionVector._raw({k: v * c for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + other.scale(-1)

    def max_energy(self) -> Fraction:
        return max((charge_energy(s)[1] for s in self.coeffs), default=Fraction(0))

    def to_json(self) -> list:
        return [
            [s.to_json(), c.to_text()]
            for s, c in sorted(self.coeffs.items(), key=lambda kv: (kv[0].charge, kv[0].partition))
        ]

    def __repr__(self):
        body = " + ".join(f"({c.to_text()})|{s.charge};{list(s.partition)}>" for s, c in self.coeffs.items())
        return f"FermionVector({body or '0'})"


def _collect(acc: dict) -> FermionVector:
    return FermionVector._raw({k: s for k, t in acc.items() if (s := sum_ratfuncs(t))})


def apply_fermion(mode: str, index, v: FermionVector) -> FermionVector:
    """Apply ``ψ_index`` (``mode='psi'``) or ``ψ*_index`` (``mode='psi_star'``)."""
    m = half_index(index)
    if mode == "psi":
        op = psi_state
    elif mode in ("psi_star", "psi*"):
        op = psi_star_state
    else:
        raise ValueError(f"unknown fermion mode {mode!r}")
    acc: dict = {}
    for s, c in v.coeffs.items():
        hit = op(m, s)
        if hit is None:
            continue
        sign, t = hit
        acc.setdefault(t, []).append(c if sign > 0 else -c)
    return _collect(acc)


def gamma_shift(v: FermionVector, k: int = 1) -> FermionVector:
    """Translate every occupied mode by ``k``; the partition label is unchanged."""
    return FermionVector._raw({WedgeState(s.charge + k, s.partition): c for s, c in v.coeffs.items()})


@lru_cache(maxsize=200000)
def bilinear_state(i: int, j: int, state: WedgeState) -> tuple[int, WedgeState] | None:
    """``ψ_i ψ*_j`` on a basis ray (internal integer modes)."""
    hit = psi_star_state(j, state)
    if hit is None:
        return None
    s1, mid = hit
    hit = psi_state(i, mid)
    if hit is None:
        return None
    s2, out = hit
    return s1 * s2, out


def apply_E(i, j, v: FermionVector) -> FermionVector:
    """``E_ij = :ψ_i ψ*_j:`` (the vacuum expectation is subtracted when ``i = j``)."""
    mi, mj = half_index(i), half_index(j)
    acc: dict = {}
    for s, c in v.coeffs.items():
        hit = bilinear_state(mi, mj, s)
        if hit is not None:
            sign, t = hit
            acc.setdefault(t, []).append(c if sign > 0 else -c)
        if mi == mj and mi >= 0:
            acc.setdefault(s, []).append(-c)
    return _collect(acc)


@lru_cache(maxsize=200000)
def _boson_on_state(n: int, state: WedgeState) -> tuple[tuple[int, WedgeState], ...]:
    explicit, tail = modes(state)
    if n > 0:
        cands = explicit
    else:
        cands = explicit + tuple(range(tail, tail - n))
    out = []
    for k in cands:
        hit = bilinear_state(k + n, k, state)
        if hit is not None:
            out.append(hit)
    return tuple(out)


def boson_on_fermions(n: int, v: FermionVector) -> FermionVector:
    """``α_n = Σ_j ψ_j ψ*_{j-n}`` (no normal-ordering constant is needed for ``n != 0``)."""
    if n == 0:
        raise ValueError("alpha_0 is not part of the Heisenberg action used here")
    acc: dict = {}
    for s, c in v.coeffs.items():
        for sign, t in _boson_on_state(n, s):
            acc.setdefault(t, []).append(c if sign > 0 else -c)
    return _collect(acc)


def states_of_energy(charge: int, energy: int) -> list[WedgeState]:
    """Charge-``charge`` rays with ``|λ| = energy``."""
    return [WedgeState(charge, lam) for lam in partitions_of(energy)]


# ---------------------------------------------------------------------------
# Schur functions and the correspondence


@lru_cache(maxsize=None)
def complete_h(k: int) -> FockVector:
    """``h_k = Σ_{|μ|=k} p_μ / z_μ`` (the coefficients of ``exp Σ p_n z^n / n``)."""
    if k < 0:
        return FockVector._raw({})
    return FockVector._raw({mu: RatFunc.const(Fraction(1, aut_factor(mu))) for mu in partitions_of(k)})


@lru_cache(maxsize=None)
def schur(lam: tuple) -> FockVector:
    """Schur polynomial in the power-sum basis by the Jacobi-Trudi determinant."""
    lam = tuple(lam)
    n = len(lam)
    if n == 0:
        return FockVector.vacuum()

    def entry(i, j):
        return complete_h(lam[i] - i + j)

    memo: dict = {}

    def minor(row: int, cols: tuple) -> FockVector:
        # determinant of rows row..n-1 against the listed columns
        if row == n:
            return FockVector.vacuum()
        key = (row, cols)
        if key in memo:
            return memo[key]
        total = FockVector._raw({})
        for pos, c in enumerate(cols):
            e = entry(row, c)
            if not e:
                continue
            sub = minor(row + 1, cols[:pos] + cols[pos + 1 :])
            if not sub:
                continue
            term = e * sub
            total = total + (term if pos % 2 == 0 else term.scale(-1))
        memo[key] = total
        return total

    return minor(0, tuple(range(n)))


def bf_map(v: FermionVector) -> FockVector:
    """Charge-0 fermion vector to the boson Fock space via ``v_λ -> s_λ``."""
    out = FockVector._raw({})
    for s, c in v.coeffs.items():
        if s.charge != 0:
            raise ValueError(f"bf_map is defined on charge 0, got charge {s.charge}")
        out = out + schur(tuple(s.partition)).scale(c)
    return out
