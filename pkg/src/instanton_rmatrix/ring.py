"""Exact multivariate polynomials and rational functions over Q.

Polynomials are sparse maps from packed monomial keys to coefficients (see
``_kernels_py`` for the layout).  Rational functions keep an integer-coefficient
numerator and denominator that are coprime, jointly primitive, and whose
denominator has a positive leading coefficient in the total-degree-then-lex
order.  ``hbar`` (also ``h`` or ``ħ`` in parsed text) always expands to
``t1 + t2``.
"""

from __future__ import annotations

import json
import math
import re
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

from ._backend import kernels as K

FIELD_BITS = 16
FIELD_MASK = (1 << FIELD_BITS) - 1
MAX_EXP = (1 << (FIELD_BITS - 1)) - 1
MAX_VARS = 64

# Variable order (lowest first).  Further names are appended on first use.
_PRESET = ("t1", "t2", "u") + tuple(f"u{i}" for i in range(10)) + ("v", "c")
_names: list[str] = list(_PRESET)
_index: dict[str, int] = {n: i for i, n in enumerate(_names)}
_HBAR_NAMES = frozenset({"h", "hbar", "ħ"})


class PoleError(ZeroDivisionError):
    """A denominator vanished identically."""


class PoleAtInfinity(ValueError):
    """The function is not regular at u = infinity."""


def var_index(name: str) -> int:
    """Index of variable ``name``, registering it if new."""
    i = _index.get(name)
    if i is None:
        if name in _HBAR_NAMES:
            raise ValueError("hbar is not a variable; it is t1 + t2")
        if len(_names) >= MAX_VARS:
            raise ValueError("too many variables")
        i = len(_names)
        _names.append(name)
        _index[name] = i
    return i


def var_name(i: int) -> str:
    return _names[i]


def pack(exps: Mapping[int, int]) -> int:
    key = 0
    for i, e in exps.items():
        if e < 0 or e > MAX_EXP:
            raise ValueError(f"exponent {e} out of range")
        key |= e << (FIELD_BITS * i)
    return key


def unpack(key: int) -> list[tuple[int, int]]:
    """Nonzero ``(variable index, exponent)`` pairs of a packed key."""
    out = []
    i = 0
    while key:
        e = key & FIELD_MASK
        if e:
            out.append((i, e))
        key >>= FIELD_BITS
        i += 1
    return out


def key_degree(key: int) -> int:
    d = 0
    while key:
        d += key & FIELD_MASK
        key >>= FIELD_BITS
    return d


def _field_min(a: int, b: int) -> int:
    r = 0
    s = 0
    while a and b:
        ea = a & FIELD_MASK
        eb = b & FIELD_MASK
        r |= (ea if ea < eb else eb) << s
        a >>= FIELD_BITS
        b >>= FIELD_BITS
        s += FIELD_BITS
    return r


def _td_lead(d: dict) -> int:
    """Leading key in the total-degree-then-lex order."""
    if len(d) == 1:
        return next(iter(d))
    return max(d, key=lambda k: (key_degree(k), k))


def _coerce_coeff(c):
    if type(c) is int:
        return c
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, int):
        return int(c)
    raise TypeError(f"unsupported coefficient {c!r}")


# ---------------------------------------------------------------------------
# integer-coefficient polynomial helpers on raw dicts


def _content(d: dict) -> int:
    return math.gcd(*d.values())


def _divide_ints(d: dict, c: int) -> dict:
    if c == 1:
        return d
    return {k: v // c for k, v in d.items()}


def _top_var(f: dict, g: dict) -> int:
    m = 0
    for k in f:
        m |= k
    for k in g:
        m |= k
    if not m:
        return -1
    return (m.bit_length() - 1) // FIELD_BITS


def _monomial_gcd(f: dict) -> int:
    it = iter(f)
    m = next(it)
    for k in it:
        if not m:
            break
        m = _field_min(m, k)
    return m


class _HeuristicFailed(Exception):
    pass


def _interpolate(h: dict, x: int, shift: int) -> dict:
    r = {}
    i = 0
    while h:
        g, h = K.p_sym_split(h, x)
        off = i << shift
        for k, c in g.items():
            r[k + off] = c
        i += 1
    if r and r[max(r)] < 0:
        r = K.p_neg(r)
    return r


def _primitive(d: dict) -> dict:
    c = _content(d)
    if d[max(d)] < 0:
        c = -c
    return _divide_ints(d, c)


def _heugcd(f: dict, g: dict):
    v = _top_var(f, g)
    if v < 0:
        a = f.get(0, 0)
        b = g.get(0, 0)
        h = math.gcd(a, b)
        return {0: h}, {0: a // h}, {0: b // h}
    cf = _content(f)
    cg = _content(g)
    gc = math.gcd(cf, cg)
    f = _divide_ints(f, gc)
    g = _divide_ints(g, gc)
    fn = K.p_max_norm(f)
    gn = K.p_max_norm(g)
    b = 2 * min(fn, gn) + 29
    x = max(
        min(b, 99 * math.isqrt(b)),
        2 * min(fn // abs(f[max(f)]), gn // abs(g[max(g)])) + 4,
    )
    shift = FIELD_BITS * v
    for _ in range(6):
        ff = K.p_eval_var(f, shift, x)
        gg = K.p_eval_var(g, shift, x)
        if ff and gg:
            h, cff, cfg = _heugcd(ff, gg)
            hh = _primitive(_interpolate(h, x, shift))
            q1 = K.p_divexact(f, hh)
            if q1 is not None:
                q2 = K.p_divexact(g, hh)
                if q2 is not None:
                    return K.p_scale(hh, gc), q1, q2
            c1 = _interpolate(cff, x, shift)
            if c1:
                hh = K.p_divexact(f, c1)
                if hh is not None and hh:
                    q2 = K.p_divexact(g, hh)
                    if q2 is not None:
                        return K.p_scale(hh, gc), c1, q2
            c2 = _interpolate(cfg, x, shift)
            if c2:
                hh = K.p_divexact(g, c2)
                if hh is not None and hh:
                    q1 = K.p_divexact(f, hh)
                    if q1 is not None:
                        return K.p_scale(hh, gc), q1, c2
        x = 73794 * x * math.isqrt(math.isqrt(x)) // 27011
    raise _HeuristicFailed


def _split_var(f: dict, shift: int) -> dict:
    """Coefficients of ``f`` as a polynomial in the variable at ``shift``."""
    out: dict[int, dict] = {}
    clear = ~(FIELD_MASK << shift)
    for k, c in f.items():
        e = (k >> shift) & FIELD_MASK
        out.setdefault(e, {})[k & clear] = c
    return out


def _join_var(parts: dict, shift: int) -> dict:
    r = {}
    for e, p in parts.items():
        off = e << shift
        for k, c in p.items():
            r[k + off] = c
    return r


def _prs_gcd(f: dict, g: dict) -> dict:
    """GCD by recursive content / primitive-part reduction."""
    v = _top_var(f, g)
    if v < 0:
        return {0: math.gcd(f.get(0, 0), g.get(0, 0))}
    shift = FIELD_BITS * v
    fs = _split_var(f, shift)
    gs = _split_var(g, shift)
    cf = _poly_content(fs.values())
    cg = _poly_content(gs.values())
    c = gcd(cf, cg)
    a = _join_var({e: K.p_divexact(p, cf) for e, p in fs.items()}, shift)
    b = _join_var({e: K.p_divexact(p, cg) for e, p in gs.items()}, shift)
    if max(_split_var(a, shift)) < max(_split_var(b, shift)):
        a, b = b, a
    while True:
        db = max(_split_var(b, shift))
        if db == 0:
            return c
        r = _prem(a, b, shift)
        if not r:
            break
        parts = _split_var(r, shift)
        pc = _poly_content(parts.values())
        r = _join_var({e: K.p_divexact(p, pc) for e, p in parts.items()}, shift)
        a, b = b, r
    parts = _split_var(b, shift)
    pc = _poly_content(parts.values())
    b = _join_var({e: K.p_divexact(p, pc) for e, p in parts.items()}, shift)
    return K.p_mul(c, b)


def _prem(a: dict, b: dict, shift: int) -> dict:
    bs = _split_var(b, shift)
    db = max(bs)
    lcb = bs[db]
    r = a
    while r:
        rs = _split_var(r, shift)
        dr = max(rs)
        if dr < db:
            break
        lcr = rs[dr]
        t = K.p_mul_term(b, (dr - db) << shift, 1)
        r = K.p_sub(K.p_mul(r, lcb), K.p_mul(t, lcr))
    return r


def _poly_content(polys: Iterable[dict]) -> dict:
    c: dict | None = None
    for p in polys:
        c = p if c is None else gcd(c, p)
        if len(c) == 1 and 0 in c and abs(c[0]) == 1:
            return {0: 1}
    return _normalize_sign(c) if c else {0: 1}


def _normalize_sign(d: dict) -> dict:
    return K.p_neg(d) if d[max(d)] < 0 else d


def gcd_cofactors(f: dict, g: dict):
    """GCD of integer polynomials (positive lex-leading coefficient) and cofactors."""
    if not f:
        h = _normalize_sign(g) if g else {0: 1}
        return h, {}, ({0: 1} if g else {})
    if not g:
        h = _normalize_sign(f)
        return h, {0: 1}, {}
    if f == g:
        h = _normalize_sign(f)
        s = 1 if h is f else -1
        return h, {0: s}, {0: s}
    if len(f) == 1 or len(g) == 1:
        m = _field_min(_monomial_gcd(f), _monomial_gcd(g))
        c = math.gcd(_content(f), _content(g))
        h = {m: c}
        return h, K.p_divexact(f, h), K.p_divexact(g, h)
    try:
        h, cf, cg = _heugcd(f, g)
    except _HeuristicFailed:
        h = _prs_gcd(f, g)
        cf = K.p_divexact(f, h)
        cg = K.p_divexact(g, h)
    if h[max(h)] < 0:
        h, cf, cg = K.p_neg(h), K.p_neg(cf), K.p_neg(cg)
    return h, cf, cg


def gcd(f: dict, g: dict) -> dict:
    return gcd_cofactors(f, g)[0]


# ---------------------------------------------------------------------------
# MultiPoly


def _clear_denominators(d: dict) -> tuple[dict, int]:
    """Return ``(e, m)`` with ``d = e / m`` and ``e`` integral."""
    m = 1
    integral = True
    for c in d.values():
        if type(c) is not int:
            integral = False
            m = m * c.denominator // math.gcd(m, c.denominator)
    if integral:
        return d, 1
    return {k: int(c * m) for k, c in d.items()}, m


class MultiPoly:
    """Immutable sparse polynomial with rational coefficients."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: dict | None = None):
        self.terms = terms if terms is not None else {}
        self._hash = None

    @classmethod
    def const(cls, c) -> "MultiPoly":
        c = _coerce_coeff(c)
        return cls({0: c} if c else {})

    @classmethod
    def var(cls, name: str) -> "MultiPoly":
        if name in _HBAR_NAMES:
            return cls({1: 1, 1 << FIELD_BITS: 1})
        return cls({1 << (FIELD_BITS * var_index(name)): 1})

    @classmethod
    def from_terms(cls, terms: Mapping[tuple, object]) -> "MultiPoly":
        """Build from ``{((name, exp), ...): coeff}``."""
        out: dict = {}
        for mono, c in terms.items():
            c = _coerce_coeff(c)
            key = pack({var_index(n): e for n, e in mono})
            s = out.get(key, 0) + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return cls(out)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and 0 in self.terms)

    def constant_value(self):
        if not self.is_constant():
            raise ValueError("not a constant polynomial")
        return self.terms.get(0, 0)

    def _wrap(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            return other
        return MultiPoly.const(other)

    def __add__(self, other):
        if isinstance(other, RatFunc):
            return NotImplemented
        return MultiPoly(K.p_add(self.terms, self._wrap(other).terms))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, RatFunc):
            return NotImplemented
        return MultiPoly(K.p_sub(self.terms, self._wrap(other).terms))

    def __rsub__(self, other):
        return MultiPoly(K.p_sub(self._wrap(other).terms, self.terms))

    def __neg__(self):
        return MultiPoly(K.p_neg(self.terms))

    def __mul__(self, other):
        if isinstance(other, RatFunc):
            return NotImplemented
        if isinstance(other, MultiPoly):
            return MultiPoly(K.p_mul(self.terms, other.terms))
        return MultiPoly(K.p_scale(self.terms, _coerce_coeff(other)))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = {0: 1}
        base = self.terms
        if len(base) == 1:
            (k, c), = base.items()
            for _, e in unpack(k):
                if e * n > MAX_EXP:
                    raise OverflowError("exponent overflow")
            return MultiPoly({k * n: c ** n})
        while n:
            if n & 1:
                result = K.p_mul(result, base)
            n >>= 1
            if n:
                base = K.p_mul(base, base)
        return MultiPoly(result)

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == ({0: other} if other else {})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def exquo(self, other: "MultiPoly") -> "MultiPoly":
        q = K.p_divexact(self.terms, other.terms)
        if q is None:
            raise ArithmeticError("polynomial division is not exact")
        return MultiPoly(q)

    def degree(self, name: str) -> int:
        if not self.terms:
            return -1
        shift = FIELD_BITS * var_index(name)
        return max((k >> shift) & FIELD_MASK for k in self.terms)

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(key_degree(k) for k in self.terms)

    def variables(self) -> list[str]:
        m = 0
        for k in self.terms:
            m |= k
        return [var_name(i) for i, _ in unpack(m)]

    def items(self) -> Iterator[tuple[dict, object]]:
        """Yield ``({name: exp}, coeff)`` in descending display order."""
        for k in sorted(self.terms, key=lambda k: (key_degree(k), k), reverse=True):
            yield {var_name(i): e for i, e in unpack(k)}, self.terms[k]

    def coefficients_in(self, name: str) -> dict[int, "MultiPoly"]:
        shift = FIELD_BITS * var_index(name)
        return {e: MultiPoly(p) for e, p in _split_var(self.terms, shift).items()}

    def diff(self, name: str) -> "MultiPoly":
        shift = FIELD_BITS * var_index(name)
        unit = 1 << shift
        out = {}
        for k, c in self.terms.items():
            e = (k >> shift) & FIELD_MASK
            if e:
                out[k - unit] = c * e
        return MultiPoly(out)

    def to_text(self) -> str:
        return _poly_text(self.terms)

    def __repr__(self):
        return f"MultiPoly({self.to_text()})"

    __str__ = to_text


# ---------------------------------------------------------------------------
# RatFunc


def _canon(n: dict, d: dict) -> tuple[dict, dict]:
    """Reduce integer polynomials ``n/d`` to canonical form."""
    if not d:
        raise PoleError("denominator is zero")
    if not n:
        return {}, {0: 1}
    if len(d) == 1 and 0 in d:
        c = d[0]
        g = math.gcd(_content(n), c)
        if c < 0:
            g = -g
        return _divide_ints(n, g), {0: c // g}
    h, n, d = gcd_cofactors(n, d)
    return _finish(n, d)


def _finish(n: dict, d: dict) -> tuple[dict, dict]:
    g = math.gcd(_content(n), _content(d))
    if d[_td_lead(d)] < 0:
        g = -g
    if g != 1:
        n = _divide_ints(n, g)
        d = _divide_ints(d, g)
    return n, d


_ONE = {0: 1}

Coercible = Union["RatFunc", MultiPoly, int, Fraction, str]


class RatFunc:
    """Immutable rational function in canonical reduced form."""

    __slots__ = ("_n", "_d", "_hash")

    def __init__(self, num=0, den=1):
        n = _as_int_dict(num)
        d = _as_int_dict(den)
        n, mn = n
        d, md = d
        # num/mn over den/md
        if mn != 1:
            d = K.p_scale(d, mn)
        if md != 1:
            n = K.p_scale(n, md)
        self._n, self._d = _canon(n, d)
        self._hash = None

    @classmethod
    def _raw(cls, n: dict, d: dict) -> "RatFunc":
        obj = object.__new__(cls)
        obj._n = n
        obj._d = d
        obj._hash = None
        return obj

    @classmethod
    def var(cls, name: str) -> "RatFunc":
        return cls._raw(MultiPoly.var(name).terms, _ONE)

    @classmethod
    def const(cls, c) -> "RatFunc":
        c = _coerce_coeff(c)
        if type(c) is int:
            return cls._raw({0: c} if c else {}, _ONE)
        return cls._raw({0: c.numerator}, {0: c.denominator})

    @property
    def numerator(self) -> MultiPoly:
        return MultiPoly(self._n)

    @property
    def denominator(self) -> MultiPoly:
        return MultiPoly(self._d)

    def is_zero(self) -> bool:
        return not self._n

    def __bool__(self) -> bool:
        return bool(self._n)

    def is_polynomial(self) -> bool:
        return len(self._d) == 1 and 0 in self._d

    def is_constant(self) -> bool:
        return self.is_polynomial() and (not self._n or (len(self._n) == 1 and 0 in self._n))

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("not a constant")
        return Fraction(self._n.get(0, 0), self._d[0])

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        o = coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._n, self._d
        c, d = o._n, o._d
        if not a:
            return o
        if not c:
            return self
        if b == d:
            n = K.p_add(a, c)
            if not n:
                return ZERO
            if b is _ONE or (len(b) == 1 and 0 in b and b[0] == 1):
                return RatFunc._raw(n, _ONE)
            return RatFunc._raw(*_canon(n, b))
        if len(b) == 1 and 0 in b and len(d) == 1 and 0 in d:
            n = K.p_add(K.p_scale(a, d[0]), K.p_scale(c, b[0]))
            return RatFunc._raw(*_canon(n, {0: b[0] * d[0]}))
        g, b1, d1 = gcd_cofactors(b, d)
        n = K.p_add(K.p_mul(a, d1), K.p_mul(c, b1))
        if not n:
            return ZERO
        if len(g) == 1 and 0 in g and g[0] == 1:
            return RatFunc._raw(*_finish(n, K.p_mul(b, d1)))
        h, n, g2 = gcd_cofactors(n, g)
        den = K.p_mul(b1, K.p_divexact(d, h))
        return RatFunc._raw(*_finish(n, den))

    __radd__ = __add__

    def __neg__(self):
        return RatFunc._raw(K.p_neg(self._n), self._d)

    def __sub__(self, other):
        o = coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._n, self._d
        c, d = o._n, o._d
        if not a or not c:
            return ZERO
        if len(b) == 1 and 0 in b and len(d) == 1 and 0 in d:
            if b[0] == 1 and d[0] == 1:
                return RatFunc._raw(K.p_mul(a, c), _ONE)
        g1, a1, d1 = gcd_cofactors(a, d)
        g2, c1, b1 = gcd_cofactors(c, b)
        return RatFunc._raw(*_finish(K.p_mul(a1, c1), K.p_mul(b1, d1)))

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if not self._n:
            raise ZeroDivisionError("division by zero rational function")
        n, d = self._d, self._n
        if d[_td_lead(d)] < 0:
            n, d = K.p_neg(n), K.p_neg(d)
        return RatFunc._raw(n, d)

    def __truediv__(self, other):
        o = coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        num = (MultiPoly(self._n) ** n).terms
        den = (MultiPoly(self._d) ** n).terms
        return RatFunc._raw(num, den)

    def __eq__(self, other):
        o = coerce(other)
        if o is None:
            return NotImplemented
        return self._n == o._n and self._d == o._d

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((frozenset(self._n.items()), frozenset(self._d.items())))
        return self._hash

    # structure --------------------------------------------------------------
    def variables(self) -> list[str]:
        m = 0
        for k in self._n:
            m |= k
        for k in self._d:
            m |= k
        return [var_name(i) for i, _ in unpack(m)]

    def substitute(self, bindings: Mapping[str, Coercible]) -> "RatFunc":
        return substitute(self, bindings)

    def series(self, order: int, var: str = "u") -> list["RatFunc"]:
        return series_expand(self, order, var)

    # serialization -----------------------------------------------------------
    def to_text(self) -> str:
        num = _poly_text(self._n)
        if self.is_polynomial() and self._d[0] == 1:
            return num
        den = _poly_text(self._d)
        if len(self._n) > 1:
            num = f"({num})"
        if len(self._d) > 1 or not re.fullmatch(r"\d+|[A-Za-z_][A-Za-z_0-9]*(\^\d+)?", den):
            den = f"({den})"
        return f"{num}/{den}"

    def to_latex(self) -> str:
        num = _poly_latex(self._n)
        if self.is_polynomial() and self._d[0] == 1:
            return num
        return f"\\frac{{{num}}}{{{_poly_latex(self._d)}}}"

    def to_json(self) -> dict:
        m = 0
        for k in self._n:
            m |= k
        for k in self._d:
            m |= k
        idx = [i for i, _ in unpack(m)]

        def enc(d):
            rows = []
            for k in sorted(d, key=lambda k: (key_degree(k), k), reverse=True):
                rows.append([d[k], [(k >> (FIELD_BITS * i)) & FIELD_MASK for i in idx]])
            return rows

        return {"vars": [var_name(i) for i in idx], "num": enc(self._n), "den": enc(self._d)}

    @classmethod
    def from_json(cls, obj: Mapping) -> "RatFunc":
        names = obj["vars"]
        idx = [var_index(n) for n in names]

        def dec(rows):
            out = {}
            for c, exps in rows:
                out[pack(dict(zip(idx, exps)))] = int(c)
            return out

        return cls(MultiPoly(dec(obj["num"])), MultiPoly(dec(obj["den"])))

    def __repr__(self):
        return f"RatFunc({self.to_text()})"

    __str__ = to_text


def _as_int_dict(x) -> tuple[dict, int]:
    if isinstance(x, MultiPoly):
        return _clear_denominators(x.terms)
    if isinstance(x, RatFunc):
        raise TypeError("use RatFunc arithmetic instead of nesting")
    if isinstance(x, str):
        raise TypeError("use parse() for text input")
    c = _coerce_coeff(x)
    if type(c) is int:
        return ({0: c} if c else {}), 1
    return {0: c.numerator}, c.denominator


ZERO = RatFunc._raw({}, _ONE)
ONE = RatFunc._raw({0: 1}, _ONE)


def coerce(x) -> RatFunc | None:
    """Convert supported scalars and polynomials to RatFunc (None if unsupported)."""
    if isinstance(x, RatFunc):
        return x
    if type(x) is int:
        if x == 0:
            return ZERO
        if x == 1:
            return ONE
        return RatFunc._raw({0: x}, _ONE)
    if isinstance(x, (Fraction, int)):
        return RatFunc.const(x)
    if isinstance(x, MultiPoly):
        return RatFunc(x)
    if isinstance(x, str):
        return parse(x)
    return None


def R(x: Coercible) -> RatFunc:
    """Coerce a scalar, polynomial or text expression to a RatFunc."""
    r = coerce(x)
    if r is None:
        raise TypeError(f"cannot convert {x!r} to RatFunc")
    return r


def ratfunc_arith(a: Coercible, b: Coercible, kind: str) -> RatFunc:
    a, b = R(a), R(b)
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "div":
        if b.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return a / b
    raise ValueError(f"unknown operation {kind!r}")


# ---------------------------------------------------------------------------
# series and substitution


def series_expand(f: Coercible, order: int, var: str = "u") -> list[RatFunc]:
    """Coefficients of ``var**0, var**-1, ..., var**-order`` at ``var = infinity``."""
    f = R(f)
    if order < 0:
        raise ValueError("order must be non-negative")
    shift = FIELD_BITS * var_index(var)
    ns = _split_var(f._n, shift) if f._n else {}
    ds = _split_var(f._d, shift)
    db = max(ds)
    da = max(ns) if ns else -1
    if da > db:
        raise PoleAtInfinity(f"degree {da} numerator over degree {db} denominator")
    # reversed coefficients in w = 1/var
    nrev = [RatFunc(MultiPoly(ns[da - i])) if da - i in ns else ZERO for i in range(da + 1)]
    drev = [RatFunc(MultiPoly(ds[db - j])) if db - j in ds else ZERO for j in range(db + 1)]
    lead_inv = drev[0].inverse()
    gap = db - da  # f = w**gap * N(w)/D(w)
    need = order - gap
    c: list[RatFunc] = []
    for k in range(need + 1):
        s = nrev[k] if k < len(nrev) else ZERO
        for j in range(1, min(k, db) + 1):
            if drev[j]:
                s = s - drev[j] * c[k - j]
        c.append(s * lead_inv)
    out = []
    for m in range(order + 1):
        out.append(c[m - gap] if m >= gap else ZERO)
    return out


def substitute(f: Coercible, bindings: Mapping[str, Coercible]) -> RatFunc:
    """Replace variables by rational functions; raises PoleError on a pole."""
    f = R(f)
    if not bindings:
        return f
    vals = {}
    for name, val in bindings.items():
        if name in _HBAR_NAMES:
            raise ValueError("cannot bind hbar; bind t1 and t2")
        vals[var_index(name)] = R(val)
    num = _subst_poly(f._n, vals)
    den = _subst_poly(f._d, vals)
    if den.is_zero():
        raise PoleError("denominator vanishes after substitution")
    return num / den


def _subst_poly(d: dict, vals: dict[int, RatFunc]) -> RatFunc:
    mask = 0
    for i in vals:
        mask |= FIELD_MASK << (FIELD_BITS * i)
    # group by the bound part of each key
    groups: dict[int, dict] = {}
    for k, c in d.items():
        groups.setdefault(k & mask, {})[k & ~mask] = c
    if all(v.is_polynomial() for v in vals.values()):
        acc: dict = {}
        dens = 1
        for bound, rest in groups.items():
            term = MultiPoly(rest)
            for i, e in unpack(bound):
                v = vals[i]
                term = term * (MultiPoly(v._n) ** e)
                dens_i = v._d[0]
                if dens_i != 1:
                    term = MultiPoly(K.p_scale(term.terms, Fraction(1, dens_i ** e)))
            acc = K.p_add(acc, term.terms)
        return RatFunc(MultiPoly(acc), dens)
    total = ZERO
    cache: dict[tuple[int, int], RatFunc] = {}
    for bound, rest in groups.items():
        term = RatFunc(MultiPoly(rest))
        for i, e in unpack(bound):
            p = cache.get((i, e))
            if p is None:
                p = cache[(i, e)] = vals[i] ** e
            term = term * p
        total = total + term
    return total


def evaluate(f: Coercible, point: Mapping[str, Coercible]) -> Fraction:
    """Exact value at a rational point binding every variable of ``f``."""
    return substitute(f, point).constant_value()


# ---------------------------------------------------------------------------
# text


def _mono_text(key: int, sep: str = "*") -> str:
    parts = []
    for i, e in unpack(key):
        n = var_name(i)
        parts.append(n if e == 1 else f"{n}^{e}")
    return sep.join(parts)


def _poly_text(d: dict) -> str:
    if not d:
        return "0"
    out = []
    for k in sorted(d, key=lambda k: (key_degree(k), k), reverse=True):
        c = d[k]
        mono = _mono_text(k)
        neg = c < 0
        a = -c if neg else c
        if not mono:
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a}*{mono}"
        if out:
            out.append(("-" if neg else "+") + body)
        else:
            out.append(("-" if neg else "") + body)
    return "".join(out)


def _latex_mono(key: int) -> str:
    parts = []
    for i, e in unpack(key):
        n = var_name(i)
        m = re.fullmatch(r"([a-zA-Z]+)(\d+)", n)
        if m:
            n = f"{m.group(1)}_{{{m.group(2)}}}"
        parts.append(n if e == 1 else f"{n}^{{{e}}}")
    return " ".join(parts)


def _poly_latex(d: dict) -> str:
    if not d:
        return "0"
    out = []
    for k in sorted(d, key=lambda k: (key_degree(k), k), reverse=True):
        c = d[k]
        mono = _latex_mono(k)
        neg = c < 0
        a = -c if neg else c
        body = str(a) if not mono else (mono if a == 1 else f"{a} {mono}")
        if out:
            out.append((" - " if neg else " + ") + body)
        else:
            out.append(("-" if neg else "") + body)
    return "".join(out)


def linear_text(f: Coercible) -> str:
    """Compact text with implicit multiplication, e.g. ``u+t1+2t2``."""
    f = R(f)
    if not f.is_polynomial() or f._d[0] != 1:
        return f.to_text()
    d = f._n
    if not d:
        return "0"
    spectral = ~((1 << (2 * FIELD_BITS)) - 1)

    def order(k):
        return (-key_degree(k), 0 if k & spectral else 1, -k if k & spectral else k)

    out = []
    for k in sorted(d, key=order):
        c = d[k]
        mono = _mono_text(k, sep="")
        neg = c < 0
        a = -c if neg else c
        body = str(a) if not mono else (mono if a == 1 else f"{a}{mono}")
        out.append(("-" if neg else ("+" if out else "")) + body)
    return "".join(out)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<name>ħ|[A-Za-z]+\d*)|(?P<op>\*\*|[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos = 0
    toks = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse {text!r} at position {pos}")
        pos = m.end()
        kind = m.lastgroup
        val = m.group(kind)
        if kind == "op" and val == "**":
            val = "^"
        toks.append((kind, val))
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return toks


class _Parser:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, val=None):
        tok = self.peek()
        if val is not None and tok[1] != val:
            raise ValueError(f"expected {val!r}, got {tok[1]!r}")
        self.i += 1
        return tok

    def expr(self) -> RatFunc:
        acc = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self) -> RatFunc:
        acc = self.unary()
        while True:
            kind, val = self.peek()
            if val == "*":
                self.take()
                acc = acc * self.unary()
            elif val == "/":
                self.take()
                d = self.unary()
                if d.is_zero():
                    raise ZeroDivisionError("division by zero in expression")
                acc = acc / d
            elif kind in ("num", "name") or val == "(":
                acc = acc * self.power()
            else:
                return acc

    def unary(self) -> RatFunc:
        val = self.peek()[1]
        if val == "-":
            self.take()
            return -self.unary()
        if val == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> RatFunc:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            if self.peek()[1] == "(":
                self.take()
                e = self.expr()
                self.take(")")
                n = e.constant_value()
                if n.denominator != 1:
                    raise ValueError("non-integer exponent")
                n = int(n)
            else:
                kind, v = self.take()
                if kind != "num":
                    raise ValueError("exponent must be an integer")
                n = int(v)
            return base ** (sign * n)
        return base

    def atom(self) -> RatFunc:
        kind, val = self.take()
        if kind == "num":
            return R(int(val))
        if kind == "name":
            if val in _HBAR_NAMES:
                return RatFunc._raw({1: 1, 1 << FIELD_BITS: 1}, _ONE)
            return RatFunc.var(val)
        if val == "(":
            e = self.expr()
            self.take(")")
            return e
        raise ValueError(f"unexpected token {val!r}")


def parse(text: str) -> RatFunc:
    """Parse an expression such as ``u(u+t2)/((u+h)(u+t1+2t2))``."""
    p = _Parser(_tokenize(text))
    if not p.toks:
        raise ValueError("empty expression")
    r = p.expr()
    if p.i != len(p.toks):
        raise ValueError(f"trailing input in {text!r}")
    return r


def hbar() -> RatFunc:
    return RatFunc._raw({1: 1, 1 << FIELD_BITS: 1}, _ONE)


def symbols(*names: str) -> tuple[RatFunc, ...]:
    return tuple(RatFunc.var(n) for n in names)


def dumps(f: RatFunc) -> str:
    return json.dumps(f.to_json(), sort_keys=True)


def loads(s: str) -> RatFunc:
    return RatFunc.from_json(json.loads(s))


def as_ratfuncs(xs: Sequence[Coercible]) -> list[RatFunc]:
    return [R(x) for x in xs]
