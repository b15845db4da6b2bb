"""Rational gl(N) R-matrices: fundamental, wedge and fused, plus T*P^n stable envelopes.

Spectral arguments accept anything ``ring.R`` understands (``"u"``, ``"u+v"``,
RatFunc).  ``ħ`` is ``t1 + t2`` throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product
from math import comb, factorial, prod
from typing import Callable, Iterable, Mapping, Sequence

from .linalg import Matrix, OverdeterminedError, UnderdeterminedError, solve_rational_system, sum_ratfuncs
from .ring import ONE, ZERO, RatFunc, R, hbar, substitute

DEFAULT_BUDGET = 6
DEFAULT_MAX_DIM = 4096

MultiIndex = tuple[int, ...]


class BudgetExceeded(ValueError):
    """The requested tensor power is larger than the configured budget."""


class InvarianceError(ArithmeticError):
    """A fused operator does not preserve the wedge subspace."""


# ---------------------------------------------------------------------------
# tensor operators


def _flat(idx: Sequence[int], spaces: Sequence[int]) -> int:
    f = 0
    for i, d in zip(idx, spaces):
        if not 0 <= i < d:
            raise IndexError(f"index {tuple(idx)} outside spaces {tuple(spaces)}")
        f = f * d + i
    return f


def _unflat(f: int, spaces: Sequence[int]) -> MultiIndex:
    out = []
    for d in reversed(spaces):
        f, r = divmod(f, d)
        out.append(r)
    return tuple(reversed(out))


class TensorOp:
    """An operator on ``V_1 ⊗ ... ⊗ V_k`` with ``dim V_i = spaces[i]``.

    Stored as a sparse Matrix on the flattened basis (first factor most
    significant); ``entry(inp, out)`` reads it with multi-indices.
    """

    __slots__ = ("spaces", "matrix")

    def __init__(self, spaces: Sequence[int], entries: Mapping[tuple[MultiIndex, MultiIndex], object] | None = None):
        self.spaces = tuple(int(d) for d in spaces)
        dim = prod(self.spaces)
        flat = {}
        for (inp, out), v in (entries or {}).items():
            flat[(_flat(out, self.spaces), _flat(inp, self.spaces))] = v
        self.matrix = Matrix(dim, dim, flat)

    @classmethod
    def from_matrix(cls, spaces: Sequence[int], m: Matrix) -> "TensorOp":
        spaces = tuple(spaces)
        if m.shape != (prod(spaces), prod(spaces)):
            raise ValueError(f"matrix shape {m.shape} does not match spaces {spaces}")
        op = object.__new__(cls)
        op.spaces = spaces
        op.matrix = m
        return op

    @classmethod
    def identity(cls, spaces: Sequence[int]) -> "TensorOp":
        return cls.from_matrix(spaces, Matrix.identity(prod(spaces)))

    @classmethod
    def from_columns(cls, spaces: Sequence[int], column: Callable[[MultiIndex], Mapping[MultiIndex, RatFunc]]) -> "TensorOp":
        spaces = tuple(spaces)
        entries = {}
        for inp in product(*(range(d) for d in spaces)):
            c = _flat(inp, spaces)
            for out, v in column(inp).items():
                if v:
                    entries[(_flat(out, spaces), c)] = R(v)
        dim = prod(spaces)
        return cls.from_matrix(spaces, Matrix._raw(dim, dim, entries))

    @property
    def dim(self) -> int:
        return self.matrix.nrows

    def entry(self, inp: Sequence[int], out: Sequence[int]) -> RatFunc:
        return self.matrix[(_flat(out, self.spaces), _flat(inp, self.spaces))]

    def entries(self) -> dict[tuple[MultiIndex, MultiIndex], RatFunc]:
        return {
            (_unflat(c, self.spaces), _unflat(r, self.spaces)): v for (r, c), v in self.matrix.entries.items()
        }

    def _check(self, other: "TensorOp") -> None:
        if self.spaces != other.spaces:
            raise ValueError(f"space signatures differ: {self.spaces} vs {other.spaces}")

    def __matmul__(self, other: "TensorOp") -> "TensorOp":
        self._check(other)
        return TensorOp.from_matrix(self.spaces, self.matrix @ other.matrix)

    def __add__(self, other: "TensorOp") -> "TensorOp":
        self._check(other)
        return TensorOp.from_matrix(self.spaces, self.matrix + other.matrix)

    def __sub__(self, other: "TensorOp") -> "TensorOp":
        self._check(other)
        return TensorOp.from_matrix(self.spaces, self.matrix - other.matrix)

    def __neg__(self) -> "TensorOp":
        return TensorOp.from_matrix(self.spaces, -self.matrix)

    def scale(self, c) -> "TensorOp":
        return TensorOp.from_matrix(self.spaces, self.matrix.scale(c))

    def transpose(self) -> "TensorOp":
        return TensorOp.from_matrix(self.spaces, self.matrix.transpose())

    def substitute(self, bindings: Mapping[str, object]) -> "TensorOp":
        return TensorOp.from_matrix(self.spaces, self.matrix.substitute(bindings))

    def commutator(self, other: "TensorOp") -> "TensorOp":
        return self @ other - other @ self

    def is_zero(self) -> bool:
        return self.matrix.is_zero()

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorOp):
            return NotImplemented
        return self.spaces == other.spaces and self.matrix == other.matrix

    def __hash__(self):
        return hash((self.spaces, self.matrix))

    def apply(self, vec: Mapping[MultiIndex, object]) -> dict[MultiIndex, RatFunc]:
        flat = {_flat(k, self.spaces): R(v) for k, v in vec.items()}
        return {_unflat(k, self.spaces): v for k, v in self.matrix.apply(flat).items()}

    def to_json(self) -> dict:
        rows = sorted(
            ([list(i), list(o), v.to_text()] for (i, o), v in self.entries().items()),
            key=lambda r: (r[0], r[1]),
        )
        return {"spaces": list(self.spaces), "entries": rows}

    def to_latex(self) -> str:
        if self.dim > 16:
            raise ValueError("LaTeX output is limited to dimension 16")
        return self.matrix.to_latex()

    def __repr__(self):
        return f"TensorOp(spaces={self.spaces}, nnz={len(self.matrix.entries)})"


def residual_text(op: TensorOp | Matrix) -> str:
    """``"0"`` for a zero operator, otherwise the first nonzero entry and a count."""
    m = op.matrix if isinstance(op, TensorOp) else op
    if m.is_zero():
        return "0"
    (r, c), v = min(m.entries.items())
    return f"{len(m.entries)} nonzero entries; ({r},{c}) = {v.to_text()}"


def embed(op: TensorOp, positions: Sequence[int], spaces: Sequence[int]) -> TensorOp:
    """Act with ``op`` on the listed factors of ``spaces`` and identically elsewhere."""
    spaces = tuple(spaces)
    positions = tuple(positions)
    if tuple(spaces[p] for p in positions) != op.spaces:
        raise ValueError("factor dimensions do not match the embedded operator")
    local: dict[MultiIndex, list[tuple[MultiIndex, RatFunc]]] = {}
    for (i, o), v in op.entries().items():
        local.setdefault(i, []).append((o, v))

    def column(inp):
        key = tuple(inp[p] for p in positions)
        out = {}
        for o, v in local.get(key, ()):
            t = list(inp)
            for p, x in zip(positions, o):
                t[p] = x
            out[tuple(t)] = v
        return out

    return TensorOp.from_columns(spaces, column)


# ---------------------------------------------------------------------------
# fundamental R-matrix and the Yang-Baxter equation


def fundamental_r(u, N: int) -> TensorOp:
    """``u/(u+ħ) Id + ħ/(u+ħ) P`` on ``C^N ⊗ C^N``."""
    if N < 2:
        raise ValueError("N must be at least 2")
    u = R(u)
    h = hbar()
    den = (u + h).inverse()
    a, b = u * den, h * den
    entries = {}
    for i in range(N):
        for j in range(N):
            if i == j:
                entries[((i, i), (i, i))] = ONE
            else:
                entries[((i, j), (i, j))] = a
                entries[((i, j), (j, i))] = b
    return TensorOp((N, N), entries)


@dataclass(frozen=True)
class YBEResult:
    ok: bool
    residual: TensorOp

    def residual_text(self) -> str:
        return residual_text(self.residual)


def ybe_check(
    family: Callable[[RatFunc, int, int], TensorOp],
    dims: Sequence[int],
    u="u",
    v="v",
) -> YBEResult:
    """Compare ``R12(u) R13(u+v) R23(v)`` with ``R23(v) R13(u+v) R12(u)``.

    ``family(x, a, b)`` returns the operator on factors ``a < b`` of ``dims``.
    """
    dims = tuple(dims)
    if len(dims) != 3:
        raise ValueError("the Yang-Baxter equation lives on three factors")
    u, v = R(u), R(v)
    r12 = embed(family(u, 0, 1), (0, 1), dims)
    r13 = embed(family(u + v, 0, 2), (0, 2), dims)
    r23 = embed(family(v, 1, 2), (1, 2), dims)
    res = r12 @ r13 @ r23 - r23 @ r13 @ r12
    return YBEResult(res.is_zero(), res)


def fundamental_family(N: int) -> Callable[[RatFunc, int, int], TensorOp]:
    return lambda x, a, b: fundamental_r(x, N)


# ---------------------------------------------------------------------------
# exterior powers and the Ω calculus


def _wedge_insert(k: int, subset: tuple) -> tuple[int, tuple] | None:
    """``e_k ∧ e_S`` with sign ``(-1)^{#(S below k)}``."""
    pos = 0
    for x in subset:
        if x == k:
            return None
        if x < k:
            pos += 1
    return (-1 if pos % 2 else 1), subset[:pos] + (k,) + subset[pos:]


def _wedge_remove(k: int, subset: tuple) -> tuple[int, tuple] | None:
    """``∂/∂e_k`` on ``e_S`` with the same sign rule."""
    for pos, x in enumerate(subset):
        if x == k:
            return (-1 if pos % 2 else 1), subset[:pos] + subset[pos + 1 :]
    return None


@dataclass(frozen=True)
class WedgeSubspace:
    """``∧^k C^N`` inside ``(C^N)^{⊗k}`` with basis the increasing ``k``-tuples."""

    N: int
    k: int
    basis: tuple[tuple[int, ...], ...] = field(init=False)

    def __post_init__(self):
        if not 0 <= self.k <= self.N:
            raise ValueError(f"wedge degree {self.k} outside 0..{self.N}")
        object.__setattr__(self, "basis", tuple(combinations(range(self.N), self.k)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, subset: Sequence[int]) -> int:
        return self.basis.index(tuple(subset))

    def include(self, a: int) -> dict[MultiIndex, int]:
        """``e_{i1} ∧ ... ∧ e_{ik} ↦ Σ_σ sgn(σ) e_{iσ1} ⊗ ... ⊗ e_{iσk}``."""
        s = self.basis[a]
        out = {}
        for perm in permutations(range(self.k)):
            out[tuple(s[p] for p in perm)] = _perm_sign(perm)
        return out

    def project(self, vec: Mapping[MultiIndex, object]) -> dict[int, RatFunc]:
        """Left inverse of ``include``; ``include ∘ project`` is the antisymmetrizer."""
        acc: dict[int, list[RatFunc]] = {}
        scale = Fraction(1, factorial(self.k))
        for t, c in vec.items():
            if len(set(t)) < len(t):
                continue
            order = sorted(range(self.k), key=lambda i: t[i])
            sign = _perm_sign(order)
            acc.setdefault(self.index(sorted(t)), []).append(R(c) * (sign * scale))
        return {a: s for a, terms in acc.items() if (s := sum_ratfuncs(terms))}


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


Pair = tuple[tuple, tuple]


def _omega_star(vec: Mapping[Pair, int], N: int) -> dict[Pair, int]:
    """``Ω* = Σ_k ψ_k ⊗ ψ*_k`` (ungraded tensor product)."""
    out: dict[Pair, int] = {}
    for (a, b), c in vec.items():
        for k in b:
            r = _wedge_remove(k, b)
            i = _wedge_insert(k, a)
            if r is None or i is None:
                continue
            key = (i[1], r[1])
            out[key] = out.get(key, 0) + c * r[0] * i[0]
    return {k: v for k, v in out.items() if v}


def _omega(vec: Mapping[Pair, int], N: int) -> dict[Pair, int]:
    """``Ω = Σ_k ψ*_k ⊗ ψ_k``."""
    out: dict[Pair, int] = {}
    for (a, b), c in vec.items():
        for k in a:
            r = _wedge_remove(k, a)
            i = _wedge_insert(k, b)
            if r is None or i is None:
                continue
            key = (r[1], i[1])
            out[key] = out.get(key, 0) + c * r[0] * i[0]
    return {k: v for k, v in out.items() if v}


def _wedge_pair_spaces(N: int, n1: int, n2: int) -> tuple[WedgeSubspace, WedgeSubspace]:
    return WedgeSubspace(N, n1), WedgeSubspace(N, n2)


def omega_invariants(N: int, n1: int, n2: int, m: int) -> TensorOp:
    """``Ξ_m = Ω^m Ω*^m`` on ``∧^{n1} C^N ⊗ ∧^{n2} C^N`` in the increasing-tuple basis."""
    if m < 0:
        raise ValueError("m must be non-negative")
    w1, w2 = _wedge_pair_spaces(N, n1, n2)
    spaces = (w1.dim, w2.dim)

    def column(inp):
        vec = {(w1.basis[inp[0]], w2.basis[inp[1]]): 1}
        for _ in range(m):
            vec = _omega_star(vec, N)
        for _ in range(m):
            vec = _omega(vec, N)
        return {(w1.index(a), w2.index(b)): R(c) for (a, b), c in vec.items()}

    return TensorOp.from_columns(spaces, column)


def wedge_coefficient(u, k: int) -> RatFunc:
    """``(-ħ)^k / (k! Π_{m=1}^k (u + mħ))``."""
    u = R(u)
    h = hbar()
    den = RatFunc.const(factorial(k))
    for m in range(1, k + 1):
        den = den * (u + h * m)
    return (-h) ** k / den


def nonvanishing_range(N: int, n1: int, n2: int) -> int:
    """Largest ``m`` with ``Ξ_m`` possibly nonzero: ``min(n2, N - n1)``."""
    return max(0, min(n2, N - n1))


def wedge_r(u, N: int, n1: int, n2: int, kmax: int | None = None) -> TensorOp:
    """``Σ_{k ≤ kmax} (-ħ)^k/(k! Π(u+mħ)) Ξ_k``; ``kmax`` defaults to ``min(n1, n2)``."""
    if not (0 <= n1 <= N and 0 <= n2 <= N):
        raise ValueError("wedge degrees must lie in 0..N")
    if kmax is None:
        kmax = min(n1, n2)
    w1, w2 = _wedge_pair_spaces(N, n1, n2)
    total = TensorOp.from_matrix((w1.dim, w2.dim), Matrix.zeros(w1.dim * w2.dim, w1.dim * w2.dim))
    for k in range(kmax + 1):
        xi = omega_invariants(N, n1, n2, k)
        if not xi.is_zero():
            total = total + xi.scale(wedge_coefficient(u, k))
    return total


def gl_generator(N: int, k: int, i: int, j: int) -> Matrix:
    """``E_ij = ψ_i ψ*_j`` on ``∧^k C^N``."""
    w = WedgeSubspace(N, k)
    entries = {}
    for a, s in enumerate(w.basis):
        r = _wedge_remove(j, s)
        if r is None:
            continue
        ins = _wedge_insert(i, r[1])
        if ins is None:
            continue
        entries[(w.index(ins[1]), a)] = RatFunc.const(r[0] * ins[0])
    return Matrix._raw(w.dim, w.dim, entries)


def coproduct(a: Matrix, b: Matrix) -> Matrix:
    """``a ⊗ 1 + 1 ⊗ b`` on the flattened tensor product."""
    d1, d2 = a.nrows, b.nrows
    entries: dict = {}
    for (r, c), v in a.entries.items():
        for x in range(d2):
            entries[(r * d2 + x, c * d2 + x)] = v
    for (r, c), v in b.entries.items():
        for x in range(d1):
            key = (x * d2 + r, x * d2 + c)
            s = entries.get(key, ZERO) + v
            if s:
                entries[key] = s
            else:
                entries.pop(key, None)
    return Matrix._raw(d1 * d2, d1 * d2, entries)


def gl_invariance_residuals(op: TensorOp, N: int, k1: int, k2: int) -> dict[tuple[int, int], TensorOp]:
    """Nonzero commutators ``[op, Δ(E_ij)]`` over all ``i, j`` (empty when invariant)."""
    bad = {}
    for i in range(N):
        for j in range(N):
            d = coproduct(gl_generator(N, k1, i, j), gl_generator(N, k2, i, j))
            c = op.matrix @ d - d @ op.matrix
            if not c.is_zero():
                bad[(i, j)] = TensorOp.from_matrix(op.spaces, c)
    return bad


def wedge_family(N: int, degrees: Sequence[int]) -> Callable[[RatFunc, int, int], TensorOp]:
    """A YBE family on ``∧^{d_a} ⊗ ∧^{d_b}`` built from ``wedge_r``."""
    degrees = tuple(degrees)
    return lambda x, a, b: wedge_r(x, N, degrees[a], degrees[b])


# ---------------------------------------------------------------------------
# fusion


def fusion_factors(n1: int, n2: int) -> list[tuple[int, int, int]]:
    """Factors ``(i, j, s)`` of the fused product, written left to right (1-based sites).

    Each factor is ``R_ij(u + sħ)``; the rightmost factor acts first.
    """
    applied = []
    for m in range(n1):
        for k in range(1, n2 + 1):
            applied.append((n1 - m, n1 + k, m + k - 1))
    return list(reversed(applied))


def fusion_factors_text(n1: int, n2: int) -> str:
    def shift(s):
        return "u" if s == 0 else ("u+h" if s == 1 else f"u+{s}h")

    return " ".join(f"R{i}{j}({shift(s)})" for i, j, s in fusion_factors(n1, n2))


def _apply_factor(vec: dict, i: int, j: int, x: RatFunc, h: RatFunc) -> dict:
    """``(x Id + ħ P_ij)`` on a sparse tensor vector (polynomial coefficients)."""
    acc: dict = {}
    for t, c in vec.items():
        acc.setdefault(t, []).append(c * x)
        s = list(t)
        s[i], s[j] = s[j], s[i]
        acc.setdefault(tuple(s), []).append(c * h)
    return {k: s for k, terms in acc.items() if (s := sum_ratfuncs(terms))}


@dataclass
class FusionR:
    """The fused operator ``Π R_ij(u + sħ)`` on ``(C^N)^{⊗(n1+n2)}``.

    The product is kept as ``scalar^{-1} Π (x Id + ħ P_ij)`` with polynomial
    factors; ``restriction`` is its block on ``∧^{n1} ⊗ ∧^{n2}``.
    """

    u: RatFunc
    N: int
    n1: int
    n2: int
    factors: list[tuple[int, int, int]]
    scalar: RatFunc
    restriction: TensorOp
    preserves_wedge: bool
    wedge_invariant_on_left: bool

    def _polys(self, transpose: bool = False):
        h = hbar()
        seq = [(i - 1, j - 1, self.u + h * s) for i, j, s in self.factors]
        return seq if transpose else list(reversed(seq))

    def apply(self, vec: Mapping[MultiIndex, object], transpose: bool = False) -> dict[MultiIndex, RatFunc]:
        h = hbar()
        cur = {tuple(k): R(v) for k, v in vec.items()}
        for i, j, x in self._polys(transpose):
            cur = _apply_factor(cur, i, j, x, h)
        inv = self.scalar.inverse()
        return {k: v * inv for k, v in cur.items()}

    def full(self) -> TensorOp:
        """Materialize the operator on the whole tensor power."""
        spaces = (self.N,) * (self.n1 + self.n2)
        return TensorOp.from_columns(spaces, lambda inp: self.apply({inp: ONE}))


def _wedge_pair_vectors(w1: WedgeSubspace, w2: WedgeSubspace):
    for a in range(w1.dim):
        left = w1.include(a)
        for b in range(w2.dim):
            right = w2.include(b)
            vec = {x + y: RatFunc.const(s * t) for x, s in left.items() for y, t in right.items()}
            yield (a, b), vec


def _wedge_coordinates(vec: Mapping[MultiIndex, RatFunc], w1: WedgeSubspace, w2: WedgeSubspace):
    """Coordinates if ``vec`` lies in ``ι(∧^{n1} ⊗ ∧^{n2})``, else None."""
    n1 = w1.k
    coords = {}
    for t, c in vec.items():
        x, y = t[:n1], t[n1:]
        if list(x) == sorted(set(x)) and list(y) == sorted(set(y)) and len(set(x)) == len(x) and len(set(y)) == len(y):
            coords[(w1.index(x), w2.index(y))] = c
    rebuilt: dict = {}
    for (a, b), c in coords.items():
        for x, s in w1.include(a).items():
            for y, t in w2.include(b).items():
                rebuilt[x + y] = c * (s * t)
    if rebuilt != dict(vec):
        return None
    return coords


def fusion_r(
    u,
    N: int,
    n1: int,
    n2: int,
    budget: int = DEFAULT_BUDGET,
    max_dim: int = DEFAULT_MAX_DIM,
    require_invariance: bool = True,
) -> FusionR:
    """Fuse fundamental R-matrices into an operator on ``V^{⊗n1} ⊗ V^{⊗n2}`` and restrict.

    Invariance means ``(1 - P_w) R P_w = 0``; it is checked on every wedge
    basis vector and raises ``InvarianceError`` when ``require_invariance``.
    The transposed condition ``P_w R (1 - P_w) = 0`` is recorded in
    ``wedge_invariant_on_left``.
    """
    if n1 < 1 or n2 < 1:
        raise ValueError("fusion needs n1, n2 >= 1")
    if n1 + n2 > budget or N ** (n1 + n2) > max_dim:
        raise BudgetExceeded(f"V^(x{n1 + n2}) with N={N} exceeds the budget ({budget} factors, dimension {max_dim})")
    u = R(u)
    h = hbar()
    factors = fusion_factors(n1, n2)
    scalar = ONE
    for _, _, s in factors:
        scalar = scalar * (u + h * (s + 1))
    fr = FusionR(u, N, n1, n2, factors, scalar, None, True, True)  # type: ignore[arg-type]
    w1, w2 = _wedge_pair_spaces(N, n1, n2)
    spaces = (w1.dim, w2.dim)
    inv = scalar.inverse()
    entries = {}
    preserves = True
    left = True
    for (a, b), vec in _wedge_pair_vectors(w1, w2):
        img = _apply_raw(fr, vec, transpose=False)
        coords = _wedge_coordinates(img, w1, w2)
        if coords is None:
            preserves = False
            if require_invariance:
                raise InvarianceError(f"wedge vector {(a, b)} leaves the subspace")
            continue
        for key, c in coords.items():
            entries[((a, b), key)] = c * inv
        if left:
            if _wedge_coordinates(_apply_raw(fr, vec, transpose=True), w1, w2) is None:
                left = False
    fr.restriction = TensorOp(spaces, entries)
    fr.preserves_wedge = preserves
    fr.wedge_invariant_on_left = left
    return fr


def _apply_raw(fr: FusionR, vec: dict, transpose: bool) -> dict:
    h = hbar()
    cur = vec
    for i, j, x in fr._polys(transpose):
        cur = _apply_factor(cur, i, j, x, h)
    return cur


def extract_xi_coefficients(op: TensorOp, N: int, n1: int, n2: int, kmax: int | None = None) -> list[RatFunc]:
    """Write ``op`` as ``Σ_k x_k Ξ_k`` (``k ≤ kmax``, default the nonvanishing range).

    Raises ``OverdeterminedError`` when ``op`` is not in the span and
    ``UnderdeterminedError`` when the ``Ξ_k`` are linearly dependent.
    """
    if kmax is None:
        kmax = nonvanishing_range(N, n1, n2)
    xis = [omega_invariants(N, n1, n2, k) for k in range(kmax + 1)]
    keys = set(op.matrix.entries)
    for x in xis:
        keys |= set(x.matrix.entries)
    rows = []
    rhs = []
    for key in sorted(keys):
        row = {}
        for k, x in enumerate(xis):
            v = x.matrix[key]
            if v:
                row[k] = v.constant_value()
        rows.append(row)
        rhs.append(op.matrix[key])
    return solve_rational_system(rows, rhs, len(xis))


# ---------------------------------------------------------------------------
# stable envelopes on T*P^n


CHAMBERS = ("fundamental", "opposite")


def _u(i: int) -> RatFunc:
    return RatFunc.var(f"u{i}")


def stab_tpn(n: int, k: int, chamber: str = "fundamental") -> RatFunc:
    """Stable envelope of the fixed point ``p_k`` of ``T*P^n`` as a polynomial in ``c``.

    The fundamental chamber gives ``Π_{i<k}(u_i - c - ħ) Π_{i>k}(u_i - c)``;
    the opposite chamber exchanges the two ranges.
    """
    if not 0 <= k <= n:
        raise ValueError(f"fixed point index {k} outside 0..{n}")
    if n > 9:
        raise ValueError("equivariant parameters are available for n <= 9")
    if chamber not in CHAMBERS:
        raise ValueError(f"chamber must be one of {CHAMBERS}")
    c = RatFunc.var("c")
    h = hbar()
    out = ONE
    for i in range(n + 1):
        if i == k:
            continue
        shifted = (i < k) == (chamber == "fundamental")
        out = out * (_u(i) - c - h if shifted else _u(i) - c)
    return out


def restriction_matrix(n: int, chamber: str = "fundamental") -> Matrix:
    """Entry ``(i, k)`` is ``Stab(p_k)`` restricted to ``p_i`` (``c = u_i``)."""
    entries = {}
    for k in range(n + 1):
        s = stab_tpn(n, k, chamber)
        for i in range(n + 1):
            entries[(i, k)] = substitute(s, {"c": _u(i)})
    return Matrix(n + 1, n + 1, entries)


def in_difference(f: RatFunc | Matrix, i: int = 0, j: int = 1):
    """Rewrite ``u_i`` as ``u + u_j`` (useful for ``n = 1`` where everything depends on ``u_0 - u_1``)."""
    binding = {f"u{i}": R("u") + _u(j)}
    return f.substitute(binding)


def r_from_stabs(n: int) -> TensorOp:
    """``Stab_opposite^{-1} ∘ Stab_fundamental`` on the fixed-point basis ``p_0..p_n``.

    For ``n = 1`` the result is expressed in ``u = u_0 - u_1``; otherwise in ``u_0..u_n``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    a = restriction_matrix(n, "opposite")
    b = restriction_matrix(n, "fundamental")
    m = a.inverse() @ b
    if n == 1:
        m = in_difference(m)
    return TensorOp.from_matrix((n + 1,), m)


def wall_crossing(n: int, i: int, j: int) -> TensorOp:
    """``R(u_i - u_j)`` on the two-dimensional span of ``p_i, p_j``, identity elsewhere."""
    block = r_from_stabs(1).matrix.substitute({"u": _u(i) - _u(j)})
    entries = {(x, x): ONE for x in range(n + 1) if x not in (i, j)}
    idx = (i, j)
    for (r, c), v in block.entries.items():
        entries[(idx[r], idx[c])] = v
    return TensorOp.from_matrix((n + 1,), Matrix(n + 1, n + 1, entries))


def stab_two_paths(n: int = 2) -> tuple[TensorOp, TensorOp]:
    """The two wall-crossing paths ``R01 R02 R12`` and ``R12 R02 R01`` for ``T*P^2``."""
    r01, r02, r12 = wall_crossing(n, 0, 1), wall_crossing(n, 0, 2), wall_crossing(n, 1, 2)
    return r01 @ r02 @ r12, r12 @ r02 @ r01


def proportionality(a: TensorOp, b: TensorOp) -> RatFunc | None:
    """The scalar ``s`` with ``a = s·b``, or None if the operators are not proportional."""
    if b.is_zero():
        return ONE if a.is_zero() else None
    key = min(b.matrix.entries)
    s = a.matrix[key] / b.matrix[key]
    return s if a == b.scale(s) else None


@dataclass(frozen=True)
class FusionComparison:
    """How the fused restriction relates to ``wedge_r``."""

    exact: bool
    shift: int | None
    scalar: RatFunc | None
    kmax: int | None

    def to_json(self) -> dict:
        return {
            "exact": self.exact,
            "shift": self.shift,
            "scalar": None if self.scalar is None else self.scalar.to_text(),
            "kmax": self.kmax,
        }


def compare_fusion_with_wedge(N: int, n1: int, n2: int, max_shift: int | None = None) -> FusionComparison:
    """Test exact equality, then search ``s·wedge_r(u + jħ)`` over shifts and both truncations."""
    fr = fusion_r("u", N, n1, n2)
    exact = fr.restriction == wedge_r("u", N, n1, n2)
    if max_shift is None:
        max_shift = n1 + n2
    u = R("u")
    for shift in range(max_shift + 1):
        for kmax in sorted({min(n1, n2), nonvanishing_range(N, n1, n2)}):
            s = proportionality(fr.restriction, wedge_r(u + hbar() * shift, N, n1, n2, kmax))
            if s is not None:
                return FusionComparison(exact, shift, s, kmax)
    return FusionComparison(exact, None, None, None)
