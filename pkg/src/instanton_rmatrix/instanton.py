"""The vacuum matrix element T(u), its coefficients H_n, and the doubled R-matrix on F ⊗ F.

Sign and ordering conventions used here:

* ``T(u) j_λ = Π(u + (i-1)t1 + (j-1)t2) / Π(u + i t1 + j t2) · j_λ`` and
  ``T(u) = 1 + Σ_n H_n u^{-n}``.
* ``α^±_n = α_n ⊗ 1 ± 1 ⊗ α_n`` on ``F ⊗ F``; a doubled expression replaces
  every boson of a normally ordered expression by ``α^-``.
* The vacuum block of an operator on ``F ⊗ F`` is read on ``F ⊗ vac`` by
  default (``side="left"``); ``side="right"`` uses ``vac ⊗ F``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

from .fermion import (
    FermionVector,
    WedgeState,
    charge_energy,
    psi_star_state,
    psi_state,
    schur,
)
from .fock import (
    BosonExpr,
    FockVector,
    TailRule,
    annihilate,
    decompose_to_boson,
    lehn_operator,
    operator_matrix,
    rank_operator,
)
from .jack import ALPHA, alpha_to_t, c1_eigenvalue, jack_basis, t_eigenvalue
from .linalg import Matrix, sum_ratfuncs
from .partition import EMPTY, Partition, arm_leg, merge_parts, partitions_of
from .ring import ONE, ZERO, RatFunc, R, hbar, parse, series_expand, substitute


# ---------------------------------------------------------------------------
# Euler classes and T(u)


def euler_nminus(lam: Iterable[int], mu: Iterable[int], u="u") -> RatFunc:
    """``Π_{□∈λ}(u + t1 l_μ(□) - t2(a_λ(□)+1)) · Π_{□∈μ}(u - t1(l_λ(□)+1) + t2 a_μ(□))``.

    Arm and leg lengths are taken for boxes outside the diagram as well.
    """
    lam, mu = Partition(lam), Partition(mu)
    u = R(u)
    t1, t2 = parse("t1"), parse("t2")
    out = ONE
    for box in lam.boxes():
        a_lam, _ = arm_leg(lam, box)
        _, l_mu = arm_leg(mu, box)
        out = out * (u + t1 * l_mu - t2 * (a_lam + 1))
    for box in mu.boxes():
        a_mu, _ = arm_leg(mu, box)
        _, l_lam = arm_leg(lam, box)
        out = out * (u - t1 * (l_lam + 1) + t2 * a_mu)
    return out


@dataclass(frozen=True)
class DiagonalFamily:
    """An operator diagonal in the Jack basis, given by its eigenvalues."""

    eigenvalue: Callable[[Partition], RatFunc]
    tag: str

    def __call__(self, lam: Iterable[int]) -> RatFunc:
        return self.eigenvalue(Partition(lam))

    def coefficient(self, lam: Iterable[int], n: int) -> RatFunc:
        """Coefficient of ``u^{-n}`` at ``u = ∞``."""
        return series_expand(self(lam), n)[n]


def t_diagonal() -> DiagonalFamily:
    return DiagonalFamily(t_eigenvalue, "T(u) = e(V⊗u)/e(V⊗u⊗ħ) on j_λ")


# ---------------------------------------------------------------------------
# H_n as matrices


_H_MEMO: dict[tuple[int, int], Matrix] = {}


@lru_cache(maxsize=None)
def _alpha_coefficients(lam: Partition, order: int) -> tuple[RatFunc, ...]:
    """Series coefficients of the eigenvalue at ``t1 = 1, t2 = -α`` (univariate)."""
    f = substitute(t_eigenvalue(lam), {"t1": 1, "t2": -RatFunc.var(ALPHA)})
    return tuple(series_expand(f, order))


def h_matrices(order: int, degree: int, cache=None) -> Matrix:
    """``H_order`` on the degree-``degree`` p-basis (rows/cols in ``partitions_of`` order).

    The diagonal form is conjugated in the univariate Jack coordinates and
    rescaled, using homogeneity: ``H[μ,ν] = t1^n (-t2)^{ℓ(μ)-ℓ(ν)} K[μ,ν](α = -t2/t1)``.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    if degree < 0:
        raise ValueError("degree must be non-negative")
    key = (order, degree)
    if key in _H_MEMO:
        return _H_MEMO[key]
    parts = tuple(partitions_of(degree))
    basis = jack_basis(degree, cache=cache)
    eps = Matrix.diag([_alpha_coefficients(lam, order)[order] for lam in basis.partitions])
    k = basis.q_matrix() @ eps @ basis.q_inverse()
    t1, mt2 = parse("t1"), parse("-t2")
    scale_t1 = t1**order
    entries = {}
    for (i, j), v in k.entries.items():
        shift = len(parts[i]) - len(parts[j])
        entries[(i, j)] = alpha_to_t(v) * scale_t1 * (mt2**shift)
    out = Matrix._raw(len(parts), len(parts), entries, parts, parts)
    _H_MEMO[key] = out
    return out


def h_commutator(n: int, m: int, degree: int) -> Matrix:
    a, b = h_matrices(n, degree), h_matrices(m, degree)
    return a @ b - b @ a


# ---------------------------------------------------------------------------
# printed and recovered boson expressions


def _tail(name: str, gen, latex: str = "") -> BosonExpr:
    return BosonExpr(tails=(TailRule(name, 0, gen, latex),))


def _pairs(w: int):
    for m in range(1, w):
        yield tuple(sorted((m, w - m), reverse=True))


def cut_join(scale_cut=None, scale_join=None) -> BosonExpr:
    """``Σ_{m,n} (c_cut α_{-m}α_{-n}α_{m+n} + c_join α_{-m-n}α_mα_n)`` over ordered pairs."""
    cc = R(scale_cut if scale_cut is not None else parse("t1*t2"))
    cj = R(scale_join if scale_join is not None else -1)

    def gen(w):
        out = []
        for p in _pairs(w):
            out.append((p, (w,), cc))
            out.append(((w,), p, cj))
        return out

    return _tail("cut_join", gen)


def quartic_rank() -> BosonExpr:
    """``Σ_{m,n} α_{-m}α_{-n}α_mα_n`` (the normally ordered square of the rank)."""

    def gen(w):
        out = []
        for m in range(1, w):
            p = tuple(sorted((m, w - m), reverse=True))
            out.append((p, p, ONE))
        return out

    return _tail("rank_sq", gen)


def weighted_rank(weight: Callable[[int], object]) -> BosonExpr:
    """``Σ_n weight(n) α_{-n}α_n``."""
    return _tail("weighted_rank", lambda w: [((w,), (w,), R(weight(w)))] if w >= 1 and weight(w) else [])


def printed_h1(sign: int = -1) -> BosonExpr:
    """``sign · ħ Σ α_{-n}α_n``; ``sign = +1`` is the variant read off the doubled R_1."""
    return rank_operator().scale(hbar() * sign)


def printed_h2() -> BosonExpr:
    """``(ħ/2) CJ + (ħ²/2)(Σα_{-n}α_n)² + (ħ²/2)Σ nα_{-n}α_n``, normally ordered."""
    h = hbar()
    half = Fraction(1, 2)
    return (
        cut_join().scale(h * half)
        + quartic_rank().scale(h * h * half)
        + weighted_rank(lambda n: n).scale(h * h)
    )


def printed_r2_vacuum() -> BosonExpr:
    """Vacuum block of the printed R_2: ``(ħ/2) CJ + (ħ²/2) Σ α_{-n}α_{-m}α_nα_m``."""
    h = hbar()
    half = Fraction(1, 2)
    return cut_join().scale(h * half) + quartic_rank().scale(h * h * half)


@dataclass
class ChernRecovery:
    rank: BosonExpr
    c1: BosonExpr
    h1: BosonExpr
    h2: BosonExpr
    degree_max: int
    report: dict = field(default_factory=dict)


def recover_chern(degree_max: int, cache=None) -> ChernRecovery:
    """Decompose ``-H_1/ħ`` and ``(H_2 - ħ² rk(rk+1)/2)/ħ`` into normally ordered bosons.

    The report compares the recovered H_1, H_2 with the printed variants.
    """
    if degree_max < 1:
        raise ValueError("degree_max must be positive")
    h = hbar()
    hinv = h.inverse()
    h1m = {d: h_matrices(1, d, cache) for d in range(degree_max + 1)}
    h2m = {d: h_matrices(2, d, cache) for d in range(degree_max + 1)}
    rank = decompose_to_boson({d: m.scale(-hinv) for d, m in h1m.items()}, 2)
    c1m = {}
    for d, m in h2m.items():
        shift = Matrix.identity(m.nrows).scale(h * h * Fraction(d * (d + 1), 2))
        c1m[d] = (m - shift).scale(hinv)
    c1 = decompose_to_boson(c1m, 3)
    h1 = decompose_to_boson(h1m, 2)
    h2 = decompose_to_boson(h2m, 4)
    w = degree_max
    report = {
        "rank_matches": rank.equals_up_to(rank_operator(), w),
        "c1_matches_lehn": c1.equals_up_to(lehn_operator(), w),
        "h1_sign_minus": h1.equals_up_to(printed_h1(-1), w),
        "h1_sign_plus": h1.equals_up_to(printed_h1(+1), w),
        "h2_matches_intro_form": h2.equals_up_to(printed_h2(), w),
        "h2_matches_printed_r2_vacuum": h2.equals_up_to(printed_r2_vacuum(), w),
        "h2_matches_negated_intro_form": h2.equals_up_to(printed_h2().scale(-1), w),
    }
    return ChernRecovery(rank, c1, h1, h2, degree_max, report)


# ---------------------------------------------------------------------------
# F ⊗ F


Pair = tuple[Partition, Partition]


def pair_basis(degree: int) -> list[Pair]:
    """Pairs ``(λ, μ)`` with ``|λ| + |μ| = degree``, left degree descending."""
    out = []
    for a in range(degree, -1, -1):
        for lam in partitions_of(a):
            for mu in partitions_of(degree - a):
                out.append((lam, mu))
    return out


@lru_cache(maxsize=400000)
def _pair_word(mu: tuple, nu: tuple, a: tuple, b: tuple, sign: int) -> tuple[tuple[Pair, int], ...]:
    """``α^s_{-μ} α^s_ν (p_a ⊗ p_b)`` with ``α^s_n = α_n⊗1 + s·1⊗α_n``; integer coefficients."""
    cur: dict = {(a, b): 1}
    for n in nu:
        nxt: dict = {}
        for (x, y), c in cur.items():
            hit = annihilate(x, (n,))
            if hit is not None:
                key = (hit[0], y)
                nxt[key] = nxt.get(key, 0) + c * hit[1]
            hit = annihilate(y, (n,))
            if hit is not None:
                key = (x, hit[0])
                nxt[key] = nxt.get(key, 0) + sign * c * hit[1]
        cur = {k: v for k, v in nxt.items() if v}
    for m in mu:
        nxt = {}
        for (x, y), c in cur.items():
            key = (merge_parts(x, (m,)), y)
            nxt[key] = nxt.get(key, 0) + c
            key = (x, merge_parts(y, (m,)))
            nxt[key] = nxt.get(key, 0) + sign * c
        cur = {k: v for k, v in nxt.items() if v}
    return tuple(((Partition._trusted(x), Partition._trusted(y)), c) for (x, y), c in cur.items())


def _collect(acc: dict) -> dict:
    return {k: s for k, t in acc.items() if (s := sum_ratfuncs(t))}


def apply_alpha_pm(n: int, vec: Mapping[Pair, RatFunc], sign: int) -> dict[Pair, RatFunc]:
    """``α^±_n`` (``sign = ±1``) on a vector of ``F ⊗ F``."""
    if n == 0:
        raise ValueError("alpha_0 is not defined")
    mu, nu = ((-n,), ()) if n < 0 else ((), (n,))
    acc: dict = {}
    for (a, b), c in vec.items():
        for key, f in _pair_word(mu, nu, tuple(a), tuple(b), sign):
            acc.setdefault(key, []).append(c * f)
    return _collect(acc)


def pair_energy(p: Pair) -> int:
    return sum(p[0]) + sum(p[1])


@dataclass(frozen=True)
class DoubledExpr:
    """A normally ordered expression in ``α^-``, acting on ``F ⊗ F``."""

    expr: BosonExpr
    name: str = ""

    def apply(self, vec: Mapping[Pair, object]) -> dict[Pair, RatFunc]:
        vec = {(Partition(a), Partition(b)): R(c) for (a, b), c in vec.items()}
        if not vec:
            return {}
        terms = self.expr.collected(max(pair_energy(p) for p in vec))
        acc: dict = {}
        for (a, b), x in vec.items():
            for (mu, nu), c in terms.items():
                for key, f in _pair_word(tuple(mu), tuple(nu), tuple(a), tuple(b), -1):
                    acc.setdefault(key, []).append(c * x * f)
        return _collect(acc)

    def matrix(self, degree: int) -> Matrix:
        """Block on ``pair_basis(degree)`` (the expression must preserve energy)."""
        if self.expr.shift != 0:
            raise ValueError("matrix blocks need an energy-preserving expression")
        basis = pair_basis(degree)
        index = {p: i for i, p in enumerate(basis)}
        entries = {}
        for j, p in enumerate(basis):
            for q, c in self.apply({p: ONE}).items():
                entries[(index[q], j)] = c
        return Matrix._raw(len(basis), len(basis), entries, tuple(basis), tuple(basis))

    def vacuum_block(self, degree: int, side: str = "left") -> Matrix:
        """Block on ``F ⊗ vac`` (``side='left'``) or ``vac ⊗ F`` (``side='right'``)."""
        parts = partitions_of(degree)
        index = {lam: i for i, lam in enumerate(parts)}
        entries = {}
        for j, lam in enumerate(parts):
            start = (lam, EMPTY) if side == "left" else (EMPTY, lam)
            for (a, b), c in self.apply({start: ONE}).items():
                if side == "left" and not b:
                    entries[(index[a], j)] = c
                elif side == "right" and not a:
                    entries[(index[b], j)] = c
        if side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        return Matrix._raw(len(parts), len(parts), entries, tuple(parts), tuple(parts))

    def alpha_plus_residual(self, k: int, degree: int) -> int:
        """Number of nonzero entries of ``[self, α^+_k]`` on the degree-``degree`` block."""
        bad = 0
        for p in pair_basis(degree):
            lhs = self.apply(apply_alpha_pm(k, {p: ONE}, +1))
            rhs = apply_alpha_pm(k, self.apply({p: ONE}), +1)
            keys = set(lhs) | set(rhs)
            bad += sum(1 for q in keys if lhs.get(q, ZERO) != rhs.get(q, ZERO))
        return bad

    def scale(self, c) -> "DoubledExpr":
        return DoubledExpr(self.expr.scale(c), self.name)

    def __add__(self, other: "DoubledExpr") -> "DoubledExpr":
        return DoubledExpr(self.expr + other.expr)

    def to_json(self, max_weight: int) -> list[dict]:
        return self.expr.to_json(max_weight)

    def to_latex(self, max_weight: int | None = None) -> str:
        return self.expr.to_latex(max_weight).replace("\\alpha_", "\\alpha^{-}_")


def double(e: BosonExpr, name: str = "") -> DoubledExpr:
    """Replace each ``α_n`` of the normally ordered ``e`` by ``α^-_n``."""
    return DoubledExpr(e, name or e.name)


def undouble(d: DoubledExpr, max_degree: int, weight: int, side: str = "left") -> BosonExpr:
    """Recover the expression from vacuum blocks alone (the uniqueness statement, tested)."""
    return decompose_to_boson({k: d.vacuum_block(k, side) for k in range(max_degree + 1)}, weight)


def r1() -> DoubledExpr:
    """``R_1 = double(H_1) = -ħ Σ α^-_{-n} α^-_n``."""
    return double(printed_h1(-1), "R1")


def r2() -> DoubledExpr:
    """``R_2 = double(H_2)`` with H_2 in normally ordered form."""
    return double(printed_h2(), "R2")


def printed_r1() -> DoubledExpr:
    return double(printed_h1(+1), "R1 printed")


def printed_r2() -> DoubledExpr:
    return double(printed_r2_vacuum(), "R2 printed")


def block_product(a: DoubledExpr, b: DoubledExpr, degree: int) -> Matrix:
    return a.matrix(degree) @ b.matrix(degree)


# ---------------------------------------------------------------------------
# contour integrals of the scaled field


def contour_field_power(k: int) -> DoubledExpr:
    """Normally ordered ``∮ A(z)^k dz`` with ``a_{-n} = -α^-_{-n}/(t1t2)``, ``a_n = α^-_n``.

    ``a_0`` is absent, so ``k = 1`` gives zero.  For ``k = 2`` the divergent
    normal-ordering constant is dropped.
    """
    q = parse("t1*t2").inverse()
    if k == 1:
        return DoubledExpr(BosonExpr(), "contour1")
    if k == 2:
        return DoubledExpr(weighted_rank(lambda n: 1).scale(q * -2), "contour2")
    if k == 3:
        return DoubledExpr(cut_join(q * q * 3, q * -3), "contour3")
    raise ValueError("only k = 1, 2, 3 are implemented")


@dataclass(frozen=True)
class ContourCheck:
    r1_ok: bool
    r2_ok: bool
    r1_residual: str
    r2_residual: str


def contour_identities(max_degree: int) -> ContourCheck:
    """Compare ``R_1`` with ``-(ħ/t1t2)∮A²`` and ``R_2`` with ``(ħ/2t1²t2²)∮A³ + ½R_1²`` blockwise."""
    h = hbar()
    q = parse("t1*t2").inverse()
    a2 = contour_field_power(2)
    a3 = contour_field_power(3)
    c1 = a2.scale(-h * q)
    c3 = a3.scale(h * q * q * Fraction(1, 2))
    r1_res, r2_res = "0", "0"
    for d in range(max_degree + 1):
        m1 = r1().matrix(d) - c1.matrix(d)
        if not m1.is_zero() and r1_res == "0":
            r1_res = f"degree {d}: {_first_entry(m1)}"
        c1m = c1.matrix(d)
        m2 = r2().matrix(d) - (c3.matrix(d) + (c1m @ c1m).scale(Fraction(1, 2)))
        if not m2.is_zero() and r2_res == "0":
            r2_res = f"degree {d}: {_first_entry(m2)}"
    return ContourCheck(r1_res == "0", r2_res == "0", r1_res, r2_res)


def _first_entry(m: Matrix) -> str:
    (r, c), v = min(m.entries.items())
    return f"({r},{c}) = {v.to_text()}"


# ---------------------------------------------------------------------------
# the ordered product over walls (fermionic realization)


class WindowEscape(ArithmeticError):
    """A factor produced a state outside the energy window."""


FState = tuple[WedgeState, WedgeState]


@lru_cache(maxsize=400000)
def _omega_n_star(n: int, pair: FState) -> tuple[tuple[FState, int], ...]:
    """``Ω*_n = Σ_k ψ_k ⊗ ψ*_{k+n}`` on a basis pair (internal integer modes)."""
    from .fermion import modes

    left, right = pair
    exp_r, tail_r = modes(right)
    occupied_r = set(exp_r)
    explicit_l, tail_l = modes(left)
    occ_l = set(explicit_l)
    out: dict = {}
    # ψ*_{k+n} needs k+n occupied on the right, ψ_k needs k empty on the left
    lo = min(exp_r, default=tail_r) - n
    for k in range(lo, tail_l):
        if k in occ_l:
            continue
        kn = k + n
        if not (kn >= tail_r or kn in occupied_r):
            continue
        a = psi_star_state(kn, right)
        b = psi_state(k, left)
        if a is None or b is None:
            continue
        key = (b[1], a[1])
        out[key] = out.get(key, 0) + a[0] * b[0]
    return tuple((k, v) for k, v in out.items() if v)


@lru_cache(maxsize=400000)
def _omega_n(n: int, pair: FState) -> tuple[tuple[FState, int], ...]:
    """``Ω_n = Σ_k ψ*_k ⊗ ψ_{k+n}``."""
    from .fermion import modes

    left, right = pair
    explicit_l, tail_l = modes(left)
    exp_r, tail_r = modes(right)
    occ_r = set(exp_r)
    out: dict = {}
    # ψ*_k needs k occupied on the left; ψ_{k+n} needs k+n < tail_r and empty
    lo = min(explicit_l, default=tail_l)
    for k in range(lo, tail_r - n):
        kn = k + n
        if kn in occ_r:
            continue
        a = psi_star_state(k, left)
        b = psi_state(kn, right)
        if a is None or b is None:
            continue
        key = (a[1], b[1])
        out[key] = out.get(key, 0) + a[0] * b[0]
    return tuple((k, v) for k, v in out.items() if v)


def _apply_int(op, n: int, vec: dict) -> dict:
    out: dict = {}
    for p, c in vec.items():
        for q, f in op(n, p):
            out[q] = out.get(q, 0) + c * f
    return {k: v for k, v in out.items() if v}


def wall_coefficient(u, n: int, k: int) -> RatFunc:
    """``(-1)^k ħ^k / (k! Π_{m=1}^k (u + (m+n)t1 + m t2))``."""
    u = R(u)
    t1, t2 = parse("t1"), parse("t2")
    den = RatFunc.const(Fraction(1))
    for m in range(1, k + 1):
        den = den * (u + t1 * (m + n) + t2 * m) * m
    return (-hbar()) ** k / den


@lru_cache(maxsize=100000)
def _xi_terms(n: int, pair: FState) -> tuple[tuple[int, tuple[tuple[FState, int], ...]], ...]:
    """``Ω_n^k Ω*_n^k`` applied to ``pair`` for every ``k`` with a nonzero result."""
    out = []
    k = 0
    cur = {pair: 1}
    while cur:
        vec = cur
        for _ in range(k):
            vec = _apply_int(_omega_n, n, vec)
        if vec:
            out.append((k, tuple(vec.items())))
        k += 1
        cur = _apply_int(_omega_n_star, n, cur)
    return tuple(out)


def fermion_pair_basis(max_energy: int) -> list[FState]:
    out = []
    for d in range(max_energy + 1):
        for lam, mu in pair_basis(d):
            out.append((WedgeState(0, lam), WedgeState(0, mu)))
    return out


def _energy(p: FState) -> Fraction:
    return charge_energy(p[0])[1] + charge_energy(p[1])[1]


def wall_factor_apply(u, n: int, vec: Mapping[FState, RatFunc], max_energy: int) -> dict[FState, RatFunc]:
    acc: dict = {}
    for p, c in vec.items():
        for k, terms in _xi_terms(n, p):
            coeff = wall_coefficient(u, n, k) * c
            for q, f in terms:
                if _energy(q) > max_energy:
                    raise WindowEscape(f"wall {n} sends a state to energy {_energy(q)} > {max_energy}")
                acc.setdefault(q, []).append(coeff * f)
    return _collect(acc)


@dataclass
class ProductResult:
    """The ordered product ``Π_{n=-M}^{M}`` (``n = M`` leftmost) on the energy window."""

    u: RatFunc
    max_energy: int
    wall_range: int
    basis: list
    matrix: Matrix
    stabilized: bool
    report: dict


def _product_matrix(u, max_energy: int, wall_range: int, basis: list) -> Matrix:
    index = {p: i for i, p in enumerate(basis)}
    entries = {}
    for j, p in enumerate(basis):
        vec = {p: ONE}
        for n in range(-wall_range, wall_range + 1):
            vec = wall_factor_apply(u, n, vec, max_energy)
        for q, c in vec.items():
            entries[(index[q], j)] = c
    return Matrix._raw(len(basis), len(basis), entries, tuple(basis), tuple(basis))


def truncated_product_r(u, energy_cutoff: int, wall_range: int) -> ProductResult:
    """Experimental: the ordered product over walls on charge-0 states of energy ``<= cutoff``."""
    if energy_cutoff < 1 or wall_range < 1:
        raise ValueError("energy_cutoff and wall_range must be positive")
    basis = fermion_pair_basis(energy_cutoff)
    m = _product_matrix(u, energy_cutoff, wall_range, basis)
    prev = _product_matrix(u, energy_cutoff, wall_range - 1, basis)
    vac = (WedgeState(0, EMPTY), WedgeState(0, EMPTY))
    i0 = basis.index(vac)
    norm = m.scale(m[(i0, i0)].inverse())
    norm_prev = prev.scale(prev[(i0, i0)].inverse())
    report = {
        "stabilized": m == prev,
        "changed_entries": sum(1 for k in set(m.entries) | set(prev.entries) if m[k] != prev[k]),
        "vacuum_eigenvalue": m[(i0, i0)].to_text(),
        "normalized_stabilized": norm == norm_prev,
    }
    return ProductResult(R(u), energy_cutoff, wall_range, basis, m, m == prev, report)


def normalized(result: ProductResult) -> Matrix:
    """The product divided by its ``vac ⊗ vac`` eigenvalue."""
    i0 = result.basis.index((WedgeState(0, EMPTY), WedgeState(0, EMPTY)))
    return result.matrix.scale(result.matrix[(i0, i0)].inverse())


def _tensor_schur(pair: FState) -> dict[Pair, RatFunc]:
    a, b = schur(tuple(pair[0].partition)), schur(tuple(pair[1].partition))
    return {(x, y): c * d for x, c in a.coeffs.items() for y, d in b.coeffs.items()}


def product_series_check(result: ProductResult, orders: Sequence[int] = (1, 2), normalize: bool = False) -> dict:
    """Compare ``u^{-n}`` coefficients of the product with ``R_n`` through the correspondence.

    Returns, per order, whether the full block and the ``F ⊗ vac`` block agree.
    ``normalize`` first divides by the ``vac ⊗ vac`` eigenvalue.
    """
    targets = {1: r1(), 2: r2()}
    top = max(orders)
    out = {}
    basis = result.basis
    series_cache = {}
    mat = normalized(result) if normalize else result.matrix
    for key, v in mat.entries.items():
        series_cache[key] = series_expand(v, top)
    for n in orders:
        full_ok = True
        vac_ok = True
        for j, p in enumerate(basis):
            img: dict = {}
            for i, q in enumerate(basis):
                s = series_cache.get((i, j))
                if s is None:
                    continue
                c = s[n]
                if c:
                    for k, f in _tensor_schur(q).items():
                        img.setdefault(k, []).append(c * f)
            lhs = _collect(img)
            rhs = targets[n].apply(_tensor_schur(p))
            same = lhs == rhs
            full_ok &= same
            if not p[1].partition:
                vl = {k: v for k, v in lhs.items() if not k[1]}
                vr = {k: v for k, v in rhs.items() if not k[1]}
                vac_ok &= vl == vr
        out[n] = {"full_block": full_ok, "vacuum_block": vac_ok}
    return out


# ---------------------------------------------------------------------------
# consistency helpers


def ex2_residual(lam: Iterable[int]) -> RatFunc:
    """``[u^{-2}] T(u)|_λ - (ħ c1(λ) + ħ² |λ|(|λ|+1)/2)``; zero when the expansion is consistent."""
    lam = Partition(lam)
    h = hbar()
    n = sum(lam)
    return t_diagonal().coefficient(lam, 2) - (h * c1_eigenvalue(lam) + h * h * Fraction(n * (n + 1), 2))


def jack_eigen_residual(e: BosonExpr, degree: int, values: Callable[[Partition], RatFunc], cache=None) -> int:
    """Number of Jack vectors ``j_λ`` of the given degree that fail ``e j_λ = values(λ) j_λ``."""
    basis = jack_basis(degree, cache=cache)
    m = operator_matrix(e, degree)
    bad = 0
    for lam in basis.partitions:
        v = basis.vectors[lam]
        idx = {p: i for i, p in enumerate(m.col_labels)}
        img = m.apply({idx[k]: c for k, c in v.coeffs.items()})
        got = FockVector._raw({m.row_labels[i]: c for i, c in img.items()})
        if got != v.scale(values(lam)):
            bad += 1
    return bad
