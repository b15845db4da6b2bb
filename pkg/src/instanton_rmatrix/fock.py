"""The boson Fock space C[p1, p2, ...] and normally ordered boson operators.

``α_{-n}`` multiplies by ``p_n`` and ``α_n`` acts as ``n ∂/∂p_n`` (n > 0).
Vectors are sparse maps from partitions ``λ`` (the monomial ``p_λ``) to RatFunc.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .linalg import Matrix, OverdeterminedError, UnderdeterminedError, solve_rational_system, sum_ratfuncs
from .partition import EMPTY, Partition, merge_parts, partitions_of, remove_parts
from .ring import ONE, ZERO, RatFunc, R, hbar, parse


# ---------------------------------------------------------------------------
# vectors


class FockVector:
    """Sparse ``Σ c_λ p_λ`` with RatFunc coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[Iterable[int], object] | None = None):
        out: dict[Partition, RatFunc] = {}
        for lam, c in (coeffs or {}).items():
            c = R(c)
            if c:
                lam = lam if isinstance(lam, Partition) else Partition(lam)
                s = out.get(lam)
                s = c if s is None else s + c
                if s:
                    out[lam] = s
                else:
                    out.pop(lam, None)
        self.coeffs = out

    @classmethod
    def _raw(cls, coeffs: dict) -> "FockVector":
        v = object.__new__(cls)
        v.coeffs = coeffs
        return v

    @classmethod
    def vacuum(cls) -> "FockVector":
        return cls._raw({EMPTY: ONE})

    @classmethod
    def basis(cls, lam: Iterable[int]) -> "FockVector":
        return cls._raw({Partition(lam): ONE})

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FockVector):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __add__(self, other: "FockVector") -> "FockVector":
        return FockVector._raw(_add_dicts(self.coeffs, other.coeffs))

    def __sub__(self, other: "FockVector") -> "FockVector":
        return self + other.scale(-1)

    def __neg__(self) -> "FockVector":
        return self.scale(-1)

    def scale(self, c: object) -> "FockVector":
        c = R(c)
        if not c:
            return FockVector._raw({})
        return FockVector._raw({k: v * c for k, v in self.coeffs.items()})

    def __mul__(self, other: "FockVector") -> "FockVector":
        """Polynomial product in the ``p`` variables."""
        acc: dict = {}
        for a, x in self.coeffs.items():
            for b, y in other.coeffs.items():
                acc.setdefault(Partition._trusted(merge_parts(a, b)), []).append(x * y)
        return FockVector._raw({k: s for k, t in acc.items() if (s := sum_ratfuncs(t))})

    def degrees(self) -> set[int]:
        return {sum(lam) for lam in self.coeffs}

    def degree(self) -> int:
        """The |λ| grading; raises if the vector is not homogeneous."""
        ds = self.degrees()
        if len(ds) > 1:
            raise ValueError("vector is not homogeneous")
        return ds.pop() if ds else 0

    def cohomological_degree(self) -> int:
        """``2(|λ| - ℓ(λ))``, i.e. ``deg p_n = 2(n-1)``; raises if inhomogeneous."""
        ds = {2 * (sum(lam) - len(lam)) for lam in self.coeffs}
        if len(ds) > 1:
            raise ValueError("vector is not homogeneous in cohomological degree")
        return ds.pop() if ds else 0

    def __getitem__(self, lam) -> RatFunc:
        return self.coeffs.get(tuple(lam), ZERO)

    def substitute(self, bindings) -> "FockVector":
        return FockVector({k: v.substitute(bindings) for k, v in self.coeffs.items()})

    def to_json(self) -> list:
        return [[list(k), v.to_text()] for k, v in sorted(self.coeffs.items(), reverse=True)]

    def __repr__(self):
        body = " + ".join(f"({v.to_text()})*p{list(k)}" for k, v in sorted(self.coeffs.items(), reverse=True))
        return f"FockVector({body or '0'})"


def _add_dicts(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        s = out.get(k)
        s = v if s is None else s + v
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


# ---------------------------------------------------------------------------
# single bosons and normally ordered monomials


def _check_index(n: int) -> None:
    if n == 0:
        raise ValueError("alpha_0 is not defined")


@lru_cache(maxsize=200000)
def annihilate(lam: tuple, nu: tuple) -> tuple[tuple, int] | None:
    """``α_ν p_λ = factor · p_rest``; returns ``(rest, factor)`` or None when zero."""
    rest = remove_parts(lam, nu)
    if rest is None:
        return None
    if not nu:
        return tuple(lam), 1
    have = Counter(lam)
    factor = 1
    for r, c in Counter(nu).items():
        m = have[r]
        factor *= r**c * factorial(m) // factorial(m - c)
    return rest, factor


def apply_monomial(mu: tuple, nu: tuple, lam: tuple) -> tuple[Partition, int] | None:
    """``α_{-μ} α_ν p_λ`` as ``(partition, integer factor)`` or None."""
    hit = annihilate(tuple(lam), tuple(nu))
    if hit is None:
        return None
    rest, factor = hit
    return Partition._trusted(merge_parts(rest, mu)), factor


def apply_boson(n: int, v: FockVector) -> FockVector:
    _check_index(n)
    out: dict = {}
    if n < 0:
        for lam, c in v.coeffs.items():
            key = Partition._trusted(merge_parts(lam, (-n,)))
            out[key] = out[key] + c if key in out else c
    else:
        for lam, c in v.coeffs.items():
            hit = annihilate(lam, (n,))
            if hit is None:
                continue
            rest, f = hit
            key = Partition._trusted(rest)
            term = c * f
            out[key] = out[key] + term if key in out else term
    return FockVector._raw({k: x for k, x in out.items() if x})


def apply_boson_word(word: Sequence[int], v: FockVector) -> FockVector:
    """Apply ``α_{w1} ... α_{wk}`` (the rightmost factor acts first)."""
    for n in word:
        _check_index(n)
    for n in reversed(word):
        v = apply_boson(n, v)
    return v


# ---------------------------------------------------------------------------
# expressions


Term = tuple[Partition, Partition, RatFunc]


@dataclass(frozen=True)
class TailRule:
    """An infinite family of normally ordered terms.

    ``generate(w)`` returns the finitely many terms whose annihilation weight
    ``|ν|`` equals ``w`` (for ``w >= 1``).  ``shift`` is ``|μ| - |ν|``.
    """

    name: str
    shift: int
    generate: Callable[[int], list[Term]]
    latex: str = ""

    def check(self, upto: int = 8) -> None:
        for w in range(0, upto + 1):
            for mu, nu, _ in self.generate(w):
                if sum(nu) != w:
                    raise ValueError(f"tail rule {self.name}: term {nu} listed under weight {w}")
                if sum(mu) - sum(nu) != self.shift:
                    raise ValueError(f"tail rule {self.name} is not degree-homogeneous")


def _norm_term(mu, nu, c) -> Term:
    return (
        Partition(sorted(mu, reverse=True)),
        Partition(sorted(nu, reverse=True)),
        R(c),
    )


@dataclass(frozen=True)
class BosonExpr:
    """``Σ c · α_{-μ1}...α_{-μk} α_{ν1}...α_{νl}`` plus optional infinite families."""

    terms: tuple = ()
    tails: tuple = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(_norm_term(*t) for t in self.terms))
        for tail in self.tails:
            tail.check()
        shifts = {sum(m) - sum(n) for m, n, _ in self.terms} | {t.shift for t in self.tails}
        if len(shifts) > 1:
            raise ValueError("expression mixes different degree shifts")

    @property
    def shift(self) -> int:
        for m, n, _ in self.terms:
            return sum(m) - sum(n)
        for t in self.tails:
            return t.shift
        return 0

    def collected(self, max_weight: int) -> dict[tuple[Partition, Partition], RatFunc]:
        """All terms with annihilation weight ``<= max_weight``, like terms combined."""
        acc: dict = {}
        for mu, nu, c in self.terms:
            if sum(nu) <= max_weight:
                acc.setdefault((mu, nu), []).append(c)
        for tail in self.tails:
            for w in range(0, max_weight + 1):
                for mu, nu, c in tail.generate(w):
                    mu, nu, c = _norm_term(mu, nu, c)
                    acc.setdefault((mu, nu), []).append(c)
        out = {}
        for k, cs in acc.items():
            s = sum_ratfuncs(cs)
            if s:
                out[k] = s
        return out

    def scale(self, c: object) -> "BosonExpr":
        c = R(c)
        tails = tuple(
            TailRule(
                t.name,
                t.shift,
                (lambda w, g=t.generate: [(m, n, x * c) for m, n, x in g(w)]),
                t.latex,
            )
            for t in self.tails
        )
        return BosonExpr(tuple((m, n, x * c) for m, n, x in self.terms), tails)

    def __add__(self, other: "BosonExpr") -> "BosonExpr":
        return BosonExpr(self.terms + other.terms, self.tails + other.tails)

    def __sub__(self, other: "BosonExpr") -> "BosonExpr":
        return self + other.scale(-1)

    def finite(self, max_weight: int) -> "BosonExpr":
        return BosonExpr(tuple((m, n, c) for (m, n), c in sorted(self.collected(max_weight).items())))

    def apply(self, v: FockVector) -> FockVector:
        return apply_expr(self, v)

    def matrix(self, degree: int) -> Matrix:
        return operator_matrix(self, degree)

    def equals_up_to(self, other: "BosonExpr", max_weight: int) -> bool:
        return self.collected(max_weight) == other.collected(max_weight)

    def to_json(self, max_weight: int | None = None) -> list[dict]:
        if self.tails and max_weight is None:
            raise ValueError("infinite expression: pass max_weight to serialize its terms")
        items = self.collected(max_weight if max_weight is not None else 10**9)
        return [
            {"creation": list(m), "annihilation": list(n), "coeff": c.to_text()}
            for (m, n), c in sorted(items.items(), key=_term_order)
        ]

    def to_latex(self, max_weight: int | None = None) -> str:
        """Stored terms and tail rules; with ``max_weight`` and no tails, the collected terms."""
        if not self.tails and max_weight is not None:
            items = sorted(self.collected(max_weight).items(), key=_term_order)
            return join_latex([_latex_term(m, n, c) for (m, n), c in items])
        parts = [_latex_term(mu, nu, c) for mu, nu, c in self.terms]
        for t in self.tails:
            parts.append((False, t.latex or f"\\mathrm{{{t.name}}}"))
        return join_latex(parts)


def _term_order(item):
    (mu, nu), _ = item
    return (sum(nu), len(mu) + len(nu), tuple(mu), tuple(nu))


def _latex_term(mu, nu, c: RatFunc) -> tuple[bool, str]:
    """``(negative, body)`` so that callers can join terms with ``+``/``-``."""
    ops = "".join(f"\\alpha_{{-{m}}}" for m in mu) + "".join(f"\\alpha_{{{n}}}" for n in nu)
    neg = c.to_text().startswith("-")
    if neg:
        c = -c
    if c == ONE:
        return neg, ops or "1"
    coeff = c.to_latex()
    if len(c._n) > 1 and c.is_polynomial():
        coeff = f"\\left({coeff}\\right)"
    return neg, f"{coeff}\\,{ops}" if ops else coeff


def join_latex(parts: list[tuple[bool, str]]) -> str:
    out = ""
    for i, (neg, body) in enumerate(parts):
        if i == 0:
            out = f"-{body}" if neg else body
        else:
            out += f" - {body}" if neg else f" + {body}"
    return out or "0"


def apply_expr(e: BosonExpr, v: FockVector) -> FockVector:
    """Apply a normally ordered expression to a finite vector."""
    if not v.coeffs:
        return v
    top = max(sum(lam) for lam in v.coeffs)
    terms = e.collected(top)
    acc: dict = {}
    for lam, x in v.coeffs.items():
        for (mu, nu), c in terms.items():
            hit = apply_monomial(mu, nu, lam)
            if hit is None:
                continue
            key, f = hit
            acc.setdefault(key, []).append(c * x * f)
    return FockVector._raw({k: s for k, t in acc.items() if (s := sum_ratfuncs(t))})


def operator_matrix(e: BosonExpr, degree: int) -> Matrix:
    """Matrix of ``e`` from the degree-``n`` p-basis to the degree-``n+shift`` p-basis."""
    cols = partitions_of(degree)
    target = degree + e.shift
    rows = partitions_of(target) if target >= 0 else []
    index = {lam: i for i, lam in enumerate(rows)}
    terms = e.collected(degree)
    entries: dict = {}
    for j, lam in enumerate(cols):
        acc: dict = {}
        for (mu, nu), c in terms.items():
            hit = apply_monomial(mu, nu, lam)
            if hit is None:
                continue
            key, f = hit
            acc.setdefault(index[key], []).append(c * f)
        for i, t in acc.items():
            s = sum_ratfuncs(t)
            if s:
                entries[(i, j)] = s
    return Matrix._raw(len(rows), len(cols), entries, tuple(rows), tuple(cols))


# ---------------------------------------------------------------------------
# standard operators


def _rank_gen(w: int) -> list[Term]:
    return [((w,), (w,), ONE)] if w >= 1 else []


def rank_operator() -> BosonExpr:
    """``Σ_n α_{-n} α_n`` (acts as |λ|)."""
    return BosonExpr(tails=(TailRule("rank", 0, _rank_gen, r"\sum_{n\geq 1}\alpha_{-n}\alpha_{n}"),))


def _lehn_gen(w: int) -> list[Term]:
    if w < 1:
        return []
    t1t2 = parse("t1*t2")
    half = RatFunc.const(Fraction(1, 2))
    out: list[Term] = []
    for m in range(1, w):
        n = w - m
        out.append((tuple(sorted((m, n), reverse=True)), (w,), t1t2 * half))
        out.append(((w,), tuple(sorted((m, n), reverse=True)), -half))
    if w > 1:
        out.append(((w,), (w,), hbar() * half * (w - 1)))
    return out


LEHN_LATEX = (
    r"\frac{1}{2}\sum_{m,n\geq 1}\left(t_{1} t_{2}\,\alpha_{-m}\alpha_{-n}\alpha_{m+n}"
    r" - \alpha_{-m-n}\alpha_{n}\alpha_{m}\right) + \frac{t_{1} + t_{2}}{2}\sum_{n\geq 1}(n-1)\,\alpha_{-n}\alpha_{n}"
)


def lehn_operator() -> BosonExpr:
    """The cut-and-join form of the first Chern class of the tautological bundle."""
    return BosonExpr(tails=(TailRule("lehn_c1", 0, _lehn_gen, LEHN_LATEX),))


def _fcc_gen(w: int) -> list[Term]:
    half = RatFunc.const(Fraction(1, 2))
    return [((w,), tuple(sorted((m, w - m), reverse=True)), -half) for m in range(1, w)]


def fcc_operator() -> BosonExpr:
    """The non-equivariant limit ``-1/2 Σ α_{-m-n} α_n α_m``."""
    return BosonExpr(
        tails=(TailRule("join", 0, _fcc_gen, r"-\frac{1}{2}\sum_{m,n\geq 1}\alpha_{-m-n}\alpha_{n}\alpha_{m}"),)
    )


def identity_operator() -> BosonExpr:
    return BosonExpr(terms=((EMPTY, EMPTY, ONE),))


# ---------------------------------------------------------------------------
# recovering boson expressions from matrices


class InconsistentSystemError(OverdeterminedError):
    """No normally ordered expression in the ansatz reproduces the matrices."""


class RankDeficientError(UnderdeterminedError):
    """The supplied matrices do not determine the expression uniquely."""


def ansatz_monomials(max_degree: int, weight: int) -> list[tuple[Partition, Partition]]:
    """Degree-preserving monomials ``α_{-μ} α_ν`` with ``|μ| = |ν| <= max_degree``
    and at most ``weight`` boson factors."""
    out = []
    for s in range(max_degree + 1):
        ps = partitions_of(s)
        for mu in ps:
            for nu in ps:
                if len(mu) + len(nu) <= weight:
                    out.append((mu, nu))
    return out


def decompose_to_boson(matrices: Mapping[int, Matrix], ansatz_weight: int) -> BosonExpr:
    """Find the unique normally ordered expression matching degree-preserving matrices.

    The ansatz holds every monomial with at most ``ansatz_weight`` boson
    factors whose annihilation weight does not exceed the largest supplied
    degree.  The linear system (rational coefficients, RatFunc right-hand
    sides) is solved by exact Gauss-Jordan elimination.
    """
    if not matrices:
        raise RankDeficientError("no matrices supplied")
    top = max(matrices)
    unknowns = ansatz_monomials(top, ansatz_weight)
    col_of = {u: i for i, u in enumerate(unknowns)}
    by_nu: dict[Partition, list[tuple[Partition, int]]] = {}
    for (mu, nu), i in col_of.items():
        by_nu.setdefault(nu, []).append((mu, i))
    from .partition import sub_multisets

    rows: list[dict[int, Fraction]] = []
    rhs: list[RatFunc] = []
    for d in sorted(matrices):
        m = matrices[d]
        basis = partitions_of(d)
        if m.shape != (len(basis), len(basis)):
            raise ValueError(f"degree {d}: expected a {len(basis)}x{len(basis)} matrix")
        index = {lam: i for i, lam in enumerate(basis)}
        for j, lam in enumerate(basis):
            eqs: dict[int, dict[int, Fraction]] = {}
            for nu in set(sub_multisets(lam)):
                cands = by_nu.get(nu)
                if not cands:
                    continue
                rest, f = annihilate(tuple(lam), tuple(nu))
                for mu, col in cands:
                    row = index[Partition._trusted(merge_parts(rest, mu))]
                    eqs.setdefault(row, {})[col] = Fraction(f)
            for i in range(len(basis)):
                rows.append(eqs.get(i, {}))
                rhs.append(m[(i, j)])
    try:
        solution = solve_rational_system(rows, rhs, len(unknowns))
    except UnderdeterminedError as exc:
        raise RankDeficientError(str(exc)) from None
    except OverdeterminedError as exc:
        raise InconsistentSystemError(str(exc)) from None
    terms = tuple((mu, nu, c) for (mu, nu), c in zip(unknowns, solution) if c)
    return BosonExpr(terms)


def basis_vectors(degree: int) -> Iterator[FockVector]:
    for lam in partitions_of(degree):
        yield FockVector.basis(lam)
