"""Pure-Python sparse polynomial kernels.

A polynomial is a ``dict`` mapping a packed monomial key to a nonzero
coefficient.  Variable ``i`` occupies bits ``[16*i, 16*i + 16)`` of the key;
bit 15 of each field is a guard bit that is never set in a stored key, so
exponents are limited to ``2**15 - 1``.  The Cython module ``_kernels``
implements the same functions with identical semantics.
"""

from __future__ import annotations

from heapq import heapify, heappop, heappush

FIELD_BITS = 16
FIELD_MASK = (1 << FIELD_BITS) - 1
MAX_VARS = 64
GUARD = sum(1 << (FIELD_BITS * i + FIELD_BITS - 1) for i in range(MAX_VARS))


def p_add(a, b):
    if len(a) < len(b):
        a, b = b, a
    r = dict(a)
    for k, c in b.items():
        s = r.get(k)
        if s is None:
            r[k] = c
        else:
            s += c
            if s:
                r[k] = s
            else:
                del r[k]
    return r


def p_sub(a, b):
    r = dict(a)
    for k, c in b.items():
        s = r.get(k)
        if s is None:
            r[k] = -c
        else:
            s -= c
            if s:
                r[k] = s
            else:
                del r[k]
    return r


def p_neg(a):
    return {k: -c for k, c in a.items()}


def p_scale(a, c):
    if not c:
        return {}
    return {k: v * c for k, v in a.items()}


def p_mul_term(a, key, c):
    if not c:
        return {}
    return {k + key: v * c for k, v in a.items()}


def p_mul(a, b):
    if len(a) < len(b):
        a, b = b, a
    r = {}
    get = r.get
    for kb, cb in b.items():
        for ka, ca in a.items():
            k = ka + kb
            r[k] = get(k, 0) + ca * cb
    return {k: c for k, c in r.items() if c}


def p_divexact(a, b):
    """Return ``a / b`` if ``b`` divides ``a`` exactly, else ``None``.

    Leading terms are taken in the lexicographic order of packed keys.  With
    integer coefficients the quotient must also be integral.
    """
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if not a:
        return {}
    lb = max(b)
    cb = b[lb]
    integral = type(cb) is int
    r = dict(a)
    heap = [-k for k in r]
    heapify(heap)
    q = {}
    guard = GUARD
    while heap:
        lr = -heappop(heap)
        cr = r.get(lr)
        if cr is None:
            continue
        if ((lr | guard) - lb) & guard != guard:
            return None
        if integral and type(cr) is int:
            qc, rem = divmod(cr, cb)
            if rem:
                return None
        else:
            qc = cr / cb
        t = lr - lb
        q[t] = qc
        for kb, c in b.items():
            k = kb + t
            s = r.get(k)
            if s is None:
                r[k] = -qc * c
                heappush(heap, -k)
            else:
                s -= qc * c
                if s:
                    r[k] = s
                else:
                    del r[k]
    return q


def p_eval_var(a, shift, x):
    """Substitute the integer ``x`` for the variable stored at bit ``shift``."""
    r = {}
    get = r.get
    clear = ~(FIELD_MASK << shift)
    pows = {}
    for k, c in a.items():
        e = (k >> shift) & FIELD_MASK
        if e:
            k &= clear
            p = pows.get(e)
            if p is None:
                p = pows[e] = x ** e
            c = c * p
        r[k] = get(k, 0) + c
    return {k: c for k, c in r.items() if c}


def p_sym_split(a, x):
    """Split integer coefficients as ``a = g + x * h`` with ``g`` symmetric mod ``x``."""
    g = {}
    h = {}
    half = x // 2
    for k, c in a.items():
        m = c % x
        if m > half:
            m -= x
        if m:
            g[k] = m
        rest = (c - m) // x
        if rest:
            h[k] = rest
    return g, h


def p_max_norm(a):
    m = 0
    for c in a.values():
        if c < 0:
            c = -c
        if c > m:
            m = c
    return m
