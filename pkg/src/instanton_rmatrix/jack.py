"""Jack polynomials as torus-fixed-point classes, with their eigenvalues.

The fixed-point class ``j_λ`` is the P-normalized Jack polynomial with
``α = 1/θ = -t2/t1`` written in rescaled power sums ``q_n = (-t2)^{1-n} p_n``.
In these variables the Lehn operator divided by ``t1`` depends on ``α`` only,
so the basis is built by Gram-Schmidt over Q(α) (monomial basis, increasing
lexicographic order, inner product ``<q_λ, q_μ> = δ z_λ α^{ℓ(λ)}``) and then
mapped to ``(t1, t2)``.  Triangularity and the eigenvector property are
verified after construction.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping

from .fock import BosonExpr, FockVector, TailRule, operator_matrix
from .linalg import Matrix, SingularMatrixError, solve, sum_ratfuncs
from .partition import Partition, aut_factor, conjugate, dominance_leq, n_statistic, partitions_of
from .ring import ONE, ZERO, RatFunc, R, parse, substitute

ALPHA = "alpha"
CONVENTION = (
    "P-Jack in q_n=(-t2)^(1-n) p_n with alpha=-t2/t1; Gram-Schmidt in increasing lex order; "
    "<q_l,q_m>=delta z_l alpha^len(l)"
)
CONVENTION_HASH = hashlib.sha256(CONVENTION.encode()).hexdigest()[:16]
CACHE_ENV = "INSTANTON_RMATRIX_CACHE"


class EigencheckError(ArithmeticError):
    """The constructed basis failed the triangularity or eigenvector check."""


# ---------------------------------------------------------------------------
# eigenvalues


def c1_eigenvalue(lam: Iterable[int]) -> RatFunc:
    """``Σ_{(i,j)∈λ} (i-1) t1 + (j-1) t2``."""
    lam = Partition(lam)
    return parse("t1") * n_statistic(lam) + parse("t2") * n_statistic(conjugate(lam))


def t_eigenvalue_factors(lam: Iterable[int], u: str = "u") -> tuple[list[RatFunc], list[RatFunc]]:
    """Linear numerator and denominator factors of the T(u) eigenvalue."""
    lam = Partition(lam)
    uu, t1, t2 = R(parse(u)), parse("t1"), parse("t2")
    num, den = [], []
    for i, j in lam.boxes():
        num.append(uu + t1 * (i - 1) + t2 * (j - 1))
        den.append(uu + t1 * i + t2 * j)
    return num, den


def t_eigenvalue(lam: Iterable[int], u: str = "u") -> RatFunc:
    """``Π (u + (i-1) t1 + (j-1) t2) / Π (u + i t1 + j t2)`` over the boxes of λ."""
    num, den = t_eigenvalue_factors(lam, u)
    out = ONE
    for a, b in zip(num, den):
        out = out * a / b
    return out


def t_eigenvalue_text(lam: Iterable[int], u: str = "u") -> str:
    """Factored text such as ``u(u+t2)/((u+t1+t2)(u+t1+2t2))``."""
    from .ring import linear_text

    num, den = t_eigenvalue_factors(lam, u)
    if not num:
        return "1"

    def prod_text(fs):
        out = []
        for f in fs:
            s = linear_text(f)
            out.append(s if ("+" not in s and "-" not in s[1:]) else f"({s})")
        return "".join(out)

    n = prod_text(num)
    d = prod_text(den)
    if len(den) > 1 or d[0] != "(":
        d = f"({d})"
    return f"{n}/{d}"


# ---------------------------------------------------------------------------
# monomial / power-sum transition


@lru_cache(maxsize=None)
def _p_to_m_row(lam: tuple, mu: tuple) -> int:
    """Coefficient of ``m_μ`` in ``p_λ``: ways to distribute the parts of λ into bins of sizes μ."""
    bins = list(mu)

    def rec(k: int) -> int:
        if k == len(lam):
            return 1 if all(b == 0 for b in bins) else 0
        total = 0
        part = lam[k]
        for i in range(len(bins)):
            if bins[i] >= part:
                bins[i] -= part
                total += rec(k + 1)
                bins[i] += part
        return total

    return rec(0)


@lru_cache(maxsize=None)
def m_in_p(n: int) -> dict[tuple, dict[tuple, Fraction]]:
    """``m_μ = Σ_λ c_{μλ} p_λ`` for all ``|μ| = n`` (exact rationals)."""
    parts = partitions_of(n)
    size = len(parts)
    # p = L m  (rows λ, cols μ), upper triangular in reverse-lex order
    L = [[Fraction(_p_to_m_row(lam, mu)) for mu in parts] for lam in parts]
    # invert L by Gauss-Jordan over Q
    aug = [row[:] + [Fraction(int(i == j)) for j in range(size)] for i, row in enumerate(L)]
    for col in range(size):
        piv = next(r for r in range(col, size) if aug[r][col])
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(size):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    Linv = [row[size:] for row in aug]  # m = Linv p  (rows μ, cols λ)
    out = {}
    for i, mu in enumerate(parts):
        out[tuple(mu)] = {tuple(parts[j]): Linv[i][j] for j in range(size) if Linv[i][j]}
    return out


def p_in_m(n: int) -> dict[tuple, dict[tuple, int]]:
    parts = partitions_of(n)
    return {tuple(lam): {tuple(mu): c for mu in parts if (c := _p_to_m_row(tuple(lam), tuple(mu)))} for lam in parts}


def to_monomial(v: FockVector) -> dict[tuple, RatFunc]:
    """Coordinates of a symmetric function (p-basis vector) in the monomial basis."""
    out: dict = {}
    for lam, c in v.coeffs.items():
        for mu, k in p_in_m(sum(lam))[tuple(lam)].items():
            out.setdefault(mu, []).append(c * k)
    return {k: s for k, t in out.items() if (s := sum_ratfuncs(t))}


# ---------------------------------------------------------------------------
# the rescaled Lehn operator over Q(α)


def _q_lehn_gen(w: int):
    a = RatFunc.var(ALPHA)
    out = []
    for m in range(1, w):
        n = w - m
        out.append(((max(m, n), min(m, n)), (w,), ONE))
        out.append(((w,), (max(m, n), min(m, n)), a))
    if w > 1:
        out.append(((w,), (w,), (a - 1) * (w - 1)))
    return out


def q_lehn_operator() -> BosonExpr:
    """``A + α B + (α-1) N`` in the q-variables; equals ``-2 c1 / t1`` after rescaling."""
    return BosonExpr(tails=(TailRule("q_lehn", 0, _q_lehn_gen),))


def q_eigenvalue(lam: Iterable[int]) -> RatFunc:
    """Eigenvalue of ``q_lehn_operator`` on ``j_λ``: ``-2 (n(λ) - α n(λ'))``."""
    lam = Partition(lam)
    a = RatFunc.var(ALPHA)
    return (a * n_statistic(conjugate(lam)) - n_statistic(lam)) * 2


def alpha_to_t(f: RatFunc) -> RatFunc:
    return substitute(f, {ALPHA: parse("-t2/t1")})


# ---------------------------------------------------------------------------
# the basis


@dataclass
class JackBasis:
    """Jack fixed-point classes of one degree.

    ``q_coeffs[λ][ν]`` is the coefficient of ``q_ν`` in ``j_λ`` (a function of α);
    ``norms[λ] = <j_λ, j_λ>`` in the α inner product.
    """

    degree: int
    partitions: tuple
    q_coeffs: dict
    norms: dict
    normalization: str = CONVENTION
    _vectors: dict | None = field(default=None, repr=False)
    _matrix: Matrix | None = field(default=None, repr=False)
    _inverse: Matrix | None = field(default=None, repr=False)

    # -- univariate views -------------------------------------------------
    def q_matrix(self) -> Matrix:
        """Columns ``j_λ`` in the q-basis (entries in Q(α)), rows/cols in ``partitions`` order."""
        idx = {lam: i for i, lam in enumerate(self.partitions)}
        entries = {}
        for j, lam in enumerate(self.partitions):
            for nu, c in self.q_coeffs[lam].items():
                entries[(idx[nu], j)] = c
        return Matrix._raw(len(idx), len(idx), entries, self.partitions, self.partitions)

    def q_inverse(self) -> Matrix:
        """Inverse of ``q_matrix`` via orthogonality: ``diag(1/N) Qᵀ diag(z α^ℓ)``."""
        idx = {lam: i for i, lam in enumerate(self.partitions)}
        a = RatFunc.var(ALPHA)
        entries = {}
        for i, lam in enumerate(self.partitions):
            inv_n = self.norms[lam].inverse()
            for nu, c in self.q_coeffs[lam].items():
                entries[(i, idx[nu])] = c * inv_n * aut_factor(nu) * a ** len(nu)
        return Matrix._raw(len(idx), len(idx), entries, self.partitions, self.partitions)

    # -- (t1, t2) views ------------------------------------------------------
    def _scale(self, nu) -> RatFunc:
        return parse("-t2") ** (len(nu) - self.degree)

    @property
    def vectors(self) -> dict[Partition, FockVector]:
        if self._vectors is None:
            out = {}
            for lam in self.partitions:
                out[lam] = FockVector._raw(
                    {nu: alpha_to_t(c) * self._scale(nu) for nu, c in self.q_coeffs[lam].items()}
                )
            self._vectors = out
        return self._vectors

    def matrix(self) -> Matrix:
        """Columns ``j_λ`` in the p-basis ordered by ``partitions``."""
        if self._matrix is None:
            idx = {lam: i for i, lam in enumerate(self.partitions)}
            entries = {}
            for j, lam in enumerate(self.partitions):
                for nu, c in self.vectors[lam].coeffs.items():
                    entries[(idx[nu], j)] = c
            self._matrix = Matrix._raw(len(idx), len(idx), entries, self.partitions, self.partitions)
        return self._matrix

    def inverse_matrix(self) -> Matrix:
        if self._inverse is None:
            qi = self.q_inverse()
            entries = {}
            for (i, j), c in qi.entries.items():
                nu = self.partitions[j]
                entries[(i, j)] = alpha_to_t(c) * self._scale(nu).inverse()
            self._inverse = Matrix._raw(qi.nrows, qi.ncols, entries, self.partitions, self.partitions)
        return self._inverse

    def to_jack(self, v: FockVector) -> dict[Partition, RatFunc]:
        """Coordinates of a homogeneous vector in the Jack basis."""
        if v and v.degree() != self.degree:
            raise ValueError(f"vector has degree {v.degree()}, basis has degree {self.degree}")
        idx = {lam: i for i, lam in enumerate(self.partitions)}
        coords = self.inverse_matrix().apply({idx[lam]: c for lam, c in v.coeffs.items()})
        return {self.partitions[i]: c for i, c in coords.items()}

    def from_jack(self, coords: Mapping) -> FockVector:
        out = FockVector._raw({})
        for lam, c in coords.items():
            out = out + self.vectors[Partition(lam)].scale(c)
        return out

    def conjugate_diagonal(self, values: Mapping) -> Matrix:
        """``J diag(values) J^{-1}`` in the p-basis."""
        d = Matrix.diag([values[lam] for lam in self.partitions], self.partitions)
        return self.matrix() @ d @ self.inverse_matrix()

    # -- checks -------------------------------------------------------------
    def verify(self) -> None:
        """Triangularity in the monomial basis and the eigenvector property over Q(α)."""
        for lam in self.partitions:
            mono = to_monomial(FockVector._raw(dict(self.q_coeffs[lam])))
            if mono.get(tuple(lam)) != ONE:
                raise EigencheckError(f"j_{list(lam)} is not monic in m_{list(lam)}")
            for mu in mono:
                if not dominance_leq(mu, lam):
                    raise EigencheckError(f"j_{list(lam)} has an m_{list(mu)} term outside the dominance ideal")
        op = operator_matrix(q_lehn_operator(), self.degree)
        q = self.q_matrix()
        lhs = op @ q
        rhs = q @ Matrix.diag([q_eigenvalue(lam) for lam in self.partitions])
        if lhs != rhs:
            raise EigencheckError(f"degree {self.degree}: Jack basis is not an eigenbasis of the Lehn operator")

    # -- serialization --------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "convention": CONVENTION,
            "convention_hash": CONVENTION_HASH,
            "partitions": [list(p) for p in self.partitions],
            "q_coeffs": {
                json.dumps(list(lam)): {json.dumps(list(nu)): c.to_json() for nu, c in sorted(self.q_coeffs[lam].items())}
                for lam in self.partitions
            },
            "norms": {json.dumps(list(lam)): self.norms[lam].to_json() for lam in self.partitions},
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "JackBasis":
        if obj.get("convention_hash") != CONVENTION_HASH:
            raise ValueError("cache entry was written under a different convention")
        parts = tuple(Partition(p) for p in obj["partitions"])
        q = {
            Partition(json.loads(k)): {Partition(json.loads(n)): RatFunc.from_json(c) for n, c in row.items()}
            for k, row in obj["q_coeffs"].items()
        }
        norms = {Partition(json.loads(k)): RatFunc.from_json(c) for k, c in obj["norms"].items()}
        return cls(int(obj["degree"]), parts, q, norms)


def _gram_schmidt(n: int) -> JackBasis:
    parts = partitions_of(n)
    asc = list(reversed(parts))  # increasing lexicographic order
    a = RatFunc.var(ALPHA)
    minp = m_in_p(n)
    # inner product of monomials: <m_μ, m_κ> = Σ_λ c_{μλ} c_{κλ} z_λ α^{ℓ(λ)}
    weight = {tuple(lam): a ** len(lam) * aut_factor(lam) for lam in parts}
    gram: dict = {}
    for mu in asc:
        for ka in asc:
            if (ka, mu) in gram:
                gram[(mu, ka)] = gram[(ka, mu)]
                continue
            rm, rk = minp[tuple(mu)], minp[tuple(ka)]
            terms = [weight[lam] * (c * rk[lam]) for lam, c in rm.items() if lam in rk]
            gram[(mu, ka)] = sum_ratfuncs(terms)
    basis: list[tuple[Partition, dict]] = []  # (λ, coefficients in the m-basis)
    gvec: list[dict] = []  # G applied to each basis vector
    norms: dict = {}
    for lam in asc:
        vec = {lam: ONE}
        for (prev, pv), gv in zip(basis, gvec):
            ip = gv.get(lam, ZERO)
            if ip:
                f = ip / norms[prev]
                for k, c in pv.items():
                    s = vec.get(k, ZERO) - f * c
                    if s:
                        vec[k] = s
                    else:
                        vec.pop(k, None)
        g = {}
        for ka in asc:
            s = sum_ratfuncs([gram[(ka, mu)] * c for mu, c in vec.items()])
            if s:
                g[ka] = s
        nrm = sum_ratfuncs([c * g.get(mu, ZERO) for mu, c in vec.items()])
        basis.append((lam, vec))
        gvec.append(g)
        norms[lam] = nrm
    q_coeffs = {}
    for lam, vec in basis:
        acc: dict = {}
        for mu, c in vec.items():
            for nu, k in minp[tuple(mu)].items():
                acc.setdefault(Partition._trusted(nu), []).append(c * k)
        q_coeffs[lam] = {k: s for k, t in acc.items() if (s := sum_ratfuncs(t))}
    return JackBasis(n, tuple(parts), q_coeffs, norms)


_MEMO: dict[int, JackBasis] = {}


_DEFAULT_CACHE: list[Path] = []


def set_cache_dir(path: str | os.PathLike | None) -> None:
    """Process-wide cache directory used when no explicit one is passed (overrides the environment)."""
    _DEFAULT_CACHE[:] = [Path(path)] if path is not None else []


def cache_dir(explicit: str | os.PathLike | None = None) -> Path | None:
    if explicit is not None:
        return Path(explicit)
    if _DEFAULT_CACHE:
        return _DEFAULT_CACHE[0]
    env = os.environ.get(CACHE_ENV)
    return Path(env) if env else None


def jack_basis(n: int, cache: str | os.PathLike | None = None) -> JackBasis:
    """P-normalized Jack fixed-point classes of degree ``n`` (verified on construction)."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    if n in _MEMO:
        return _MEMO[n]
    directory = cache_dir(cache)
    path = directory / f"jack_{n}_{CONVENTION_HASH}.json" if directory else None
    basis = None
    if path is not None and path.exists():
        try:
            basis = JackBasis.from_json(json.loads(path.read_text()))
            basis.verify()
        except (ValueError, KeyError, EigencheckError, json.JSONDecodeError):
            basis = None
    if basis is None:
        basis = _gram_schmidt(n)
        basis.verify()
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(basis.to_json(), sort_keys=True))
            tmp.replace(path)
    _MEMO[n] = basis
    return basis


def clear_memo() -> None:
    _MEMO.clear()


def lehn_eigenvalues(n: int) -> dict[Partition, RatFunc]:
    return {lam: c1_eigenvalue(lam) for lam in partitions_of(n)}
