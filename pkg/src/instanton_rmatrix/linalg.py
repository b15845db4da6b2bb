"""Sparse exact matrices with RatFunc entries."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .ring import ONE, ZERO, RatFunc, R, substitute


class SingularMatrixError(ArithmeticError):
    """Raised when an exact inverse or solve meets a zero pivot column."""


class UnderdeterminedError(ArithmeticError):
    """A linear system has more than one solution."""


class OverdeterminedError(ArithmeticError):
    """A linear system has no solution."""


class Matrix:
    """A sparse ``rows x cols`` matrix; ``entries`` maps ``(r, c)`` to nonzero RatFunc.

    Optional ``row_labels``/``col_labels`` name the basis vectors.
    """

    __slots__ = ("nrows", "ncols", "entries", "row_labels", "col_labels")

    def __init__(
        self,
        nrows: int,
        ncols: int,
        entries: Mapping[tuple[int, int], object] | None = None,
        row_labels: Sequence[Hashable] | None = None,
        col_labels: Sequence[Hashable] | None = None,
    ):
        self.nrows = nrows
        self.ncols = ncols
        clean = {}
        for (r, c), v in (entries or {}).items():
            if not (0 <= r < nrows and 0 <= c < ncols):
                raise IndexError(f"entry {(r, c)} outside {nrows}x{ncols}")
            v = R(v)
            if v:
                clean[(r, c)] = v
        self.entries = clean
        self.row_labels = tuple(row_labels) if row_labels is not None else None
        self.col_labels = tuple(col_labels) if col_labels is not None else None

    @classmethod
    def _raw(cls, nrows, ncols, entries, row_labels=None, col_labels=None) -> "Matrix":
        m = object.__new__(cls)
        m.nrows = nrows
        m.ncols = ncols
        m.entries = entries
        m.row_labels = row_labels
        m.col_labels = col_labels
        return m

    @classmethod
    def identity(cls, n: int, labels=None) -> "Matrix":
        lab = tuple(labels) if labels is not None else None
        return cls._raw(n, n, {(i, i): ONE for i in range(n)}, lab, lab)

    @classmethod
    def zeros(cls, nrows: int, ncols: int, row_labels=None, col_labels=None) -> "Matrix":
        return cls._raw(
            nrows,
            ncols,
            {},
            tuple(row_labels) if row_labels is not None else None,
            tuple(col_labels) if col_labels is not None else None,
        )

    @classmethod
    def diag(cls, values: Sequence[object], labels=None) -> "Matrix":
        vals = [R(v) for v in values]
        lab = tuple(labels) if labels is not None else None
        return cls._raw(len(vals), len(vals), {(i, i): v for i, v in enumerate(vals) if v}, lab, lab)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[object]], row_labels=None, col_labels=None) -> "Matrix":
        nrows = len(rows)
        ncols = len(rows[0]) if rows else 0
        entries = {}
        for i, row in enumerate(rows):
            if len(row) != ncols:
                raise ValueError("ragged rows")
            for j, v in enumerate(row):
                entries[(i, j)] = v
        return cls(nrows, ncols, entries, row_labels, col_labels)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, rc: tuple[int, int]) -> RatFunc:
        return self.entries.get(rc, ZERO)

    def to_rows(self) -> list[list[RatFunc]]:
        rows = [[ZERO] * self.ncols for _ in range(self.nrows)]
        for (r, c), v in self.entries.items():
            rows[r][c] = v
        return rows

    def column(self, c: int) -> dict[int, RatFunc]:
        return {r: v for (r, cc), v in self.entries.items() if cc == c}

    def is_zero(self) -> bool:
        return not self.entries

    def is_diagonal(self) -> bool:
        return all(r == c for r, c in self.entries)

    def diagonal(self) -> list[RatFunc]:
        return [self[(i, i)] for i in range(min(self.nrows, self.ncols))]

    def _same_shape(self, other: "Matrix") -> None:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._same_shape(other)
        out = dict(self.entries)
        for k, v in other.entries.items():
            s = out.get(k)
            s = v if s is None else s + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return Matrix._raw(self.nrows, self.ncols, out, self.row_labels, self.col_labels)

    def __neg__(self) -> "Matrix":
        return Matrix._raw(
            self.nrows, self.ncols, {k: -v for k, v in self.entries.items()}, self.row_labels, self.col_labels
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self + (-other)

    def scale(self, c: object) -> "Matrix":
        c = R(c)
        if not c:
            return Matrix.zeros(self.nrows, self.ncols, self.row_labels, self.col_labels)
        return Matrix._raw(
            self.nrows, self.ncols, {k: v * c for k, v in self.entries.items()}, self.row_labels, self.col_labels
        )

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.nrows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        by_row: dict[int, list[tuple[int, RatFunc]]] = {}
        for (r, c), v in other.entries.items():
            by_row.setdefault(r, []).append((c, v))
        acc: dict[tuple[int, int], list[RatFunc]] = {}
        for (r, k), a in self.entries.items():
            for c, b in by_row.get(k, ()):
                acc.setdefault((r, c), []).append(a * b)
        out = {}
        for key, terms in acc.items():
            s = sum_ratfuncs(terms)
            if s:
                out[key] = s
        return Matrix._raw(self.nrows, other.ncols, out, self.row_labels, other.col_labels)

    def apply(self, vec: Mapping[int, RatFunc]) -> dict[int, RatFunc]:
        acc: dict[int, list[RatFunc]] = {}
        for (r, c), v in self.entries.items():
            x = vec.get(c)
            if x:
                acc.setdefault(r, []).append(v * x)
        out = {}
        for r, terms in acc.items():
            s = sum_ratfuncs(terms)
            if s:
                out[r] = s
        return out

    def transpose(self) -> "Matrix":
        return Matrix._raw(
            self.ncols, self.nrows, {(c, r): v for (r, c), v in self.entries.items()}, self.col_labels, self.row_labels
        )

    def map_entries(self, fn: Callable[[RatFunc], RatFunc]) -> "Matrix":
        out = {}
        for k, v in self.entries.items():
            w = fn(v)
            if w:
                out[k] = w
        return Matrix._raw(self.nrows, self.ncols, out, self.row_labels, self.col_labels)

    def substitute(self, bindings: Mapping[str, object]) -> "Matrix":
        return self.map_entries(lambda v: substitute(v, bindings))

    def commutator(self, other: "Matrix") -> "Matrix":
        return self @ other - other @ self

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        return hash((self.shape, frozenset(self.entries.items())))

    def inverse(self) -> "Matrix":
        if self.nrows != self.ncols:
            raise ValueError("inverse of a non-square matrix")
        n = self.nrows
        sol = solve(self, Matrix.identity(n))
        return Matrix._raw(n, n, sol.entries, self.col_labels, self.row_labels)

    def to_json(self) -> dict:
        return {
            "shape": [self.nrows, self.ncols],
            "entries": [[r, c, v.to_text()] for (r, c), v in sorted(self.entries.items())],
        }

    def to_latex(self) -> str:
        rows = self.to_rows()
        body = " \\\\ ".join(" & ".join(v.to_latex() for v in row) for row in rows)
        return f"\\begin{{pmatrix}} {body} \\end{{pmatrix}}"

    def __repr__(self):
        return f"Matrix({self.nrows}x{self.ncols}, nnz={len(self.entries)})"


def sum_ratfuncs(terms: Iterable[RatFunc]) -> RatFunc:
    """Sum grouping by denominator first, which keeps intermediate GCDs small."""
    groups: dict = {}
    for t in terms:
        if not t:
            continue
        key = frozenset(t._d.items())
        g = groups.get(key)
        groups[key] = t if g is None else g + t
    total = ZERO
    for g in groups.values():
        if g:
            total = total + g
    return total


def solve(a: Matrix, b: Matrix) -> Matrix:
    """Solve ``a x = b`` exactly by Gauss-Jordan elimination (``a`` square, invertible)."""
    n = a.nrows
    if a.ncols != n or b.nrows != n:
        raise ValueError("solve needs a square system with matching right-hand side")
    rows = [dict() for _ in range(n)]
    for (r, c), v in a.entries.items():
        rows[r][c] = v
    rhs = [dict() for _ in range(n)]
    for (r, c), v in b.entries.items():
        rhs[r][c] = v
    for col in range(n):
        piv = None
        best = None
        for r in range(col, n):
            v = rows[r].get(col)
            if v:
                size = len(v._n) + len(v._d)
                if best is None or size < best:
                    piv, best = r, size
        if piv is None:
            raise SingularMatrixError("matrix is singular")
        rows[col], rows[piv] = rows[piv], rows[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        inv = rows[col][col].inverse()
        rows[col] = {c: v * inv for c, v in rows[col].items()}
        rhs[col] = {c: v * inv for c, v in rhs[col].items()}
        for r in range(n):
            if r == col:
                continue
            f = rows[r].get(col)
            if not f:
                continue
            for c, v in rows[col].items():
                s = rows[r].get(c, ZERO) - f * v
                if s:
                    rows[r][c] = s
                else:
                    rows[r].pop(c, None)
            for c, v in rhs[col].items():
                s = rhs[r].get(c, ZERO) - f * v
                if s:
                    rhs[r][c] = s
                else:
                    rhs[r].pop(c, None)
    entries = {(r, c): v for r in range(n) for c, v in rhs[r].items()}
    return Matrix._raw(n, b.ncols, entries)


def solve_rational_system(rows: list[dict[int, Fraction]], rhs: list[RatFunc], nvars: int) -> list[RatFunc]:
    """Solve a sparse system with rational coefficients and RatFunc right-hand sides.

    Raises ``UnderdeterminedError`` when some unknown has no pivot and
    ``OverdeterminedError`` when a reduced equation leaves a nonzero residual.
    """
    rows = [dict(r) for r in rows]
    rhs = list(rhs)
    pivots: list[tuple[int, int]] = []
    used = [False] * len(rows)
    for col in range(nvars):
        piv = None
        for r in range(len(rows)):
            if not used[r] and rows[r].get(col):
                if piv is None or len(rows[r]) < len(rows[piv]):
                    piv = r
        if piv is None:
            raise UnderdeterminedError(f"unknown {col} is not determined by the equations")
        used[piv] = True
        inv = 1 / rows[piv][col]
        rows[piv] = {c: v * inv for c, v in rows[piv].items()}
        rhs[piv] = rhs[piv] * inv
        for r in range(len(rows)):
            if r == piv:
                continue
            f = rows[r].get(col)
            if not f:
                continue
            for c, v in rows[piv].items():
                s = rows[r].get(c, 0) - f * v
                if s:
                    rows[r][c] = s
                else:
                    rows[r].pop(c, None)
            if rhs[piv]:
                rhs[r] = rhs[r] - rhs[piv] * f
        pivots.append((col, piv))
    for r in range(len(rows)):
        if not used[r] and rhs[r]:
            raise OverdeterminedError(f"inconsistent equation with residual {rhs[r].to_text()}")
    out = [ZERO] * nvars
    for col, r in pivots:
        out[col] = rhs[r]
    return out
