# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled sparse polynomial kernels.

Same packed-monomial layout and semantics as ``_kernels_py``; see that module
for the representation.
"""

from heapq import heapify, heappop, heappush

FIELD_BITS = 16
FIELD_MASK = (1 << FIELD_BITS) - 1
MAX_VARS = 64
GUARD = sum(1 << (FIELD_BITS * i + FIELD_BITS - 1) for i in range(MAX_VARS))


cpdef dict p_add(dict a, dict b):
    cdef dict r
    if len(a) < len(b):
        a, b = b, a
    r = dict(a)
    for k, c in b.items():
        s = r.get(k)
        if s is None:
            r[k] = c
        else:
            s = s + c
            if s:
                r[k] = s
            else:
                del r[k]
    return r


cpdef dict p_sub(dict a, dict b):
    cdef dict r = dict(a)
    for k, c in b.items():
        s = r.get(k)
        if s is None:
            r[k] = -c
        else:
            s = s - c
            if s:
                r[k] = s
            else:
                del r[k]
    return r


cpdef dict p_neg(dict a):
    return {k: -c for k, c in a.items()}


cpdef dict p_scale(dict a, c):
    if not c:
        return {}
    return {k: v * c for k, v in a.items()}


cpdef dict p_mul_term(dict a, key, c):
    if not c:
        return {}
    return {k + key: v * c for k, v in a.items()}


cpdef dict p_mul(dict a, dict b):
    cdef dict r = {}
    cdef list la, lb
    if len(a) < len(b):
        a, b = b, a
    la = list(a.items())
    lb = list(b.items())
    for kb, cb in lb:
        for ka, ca in la:
            k = ka + kb
            s = r.get(k)
            if s is None:
                r[k] = ca * cb
            else:
                r[k] = s + ca * cb
    return {k: c for k, c in r.items() if c}


cpdef object p_divexact(dict a, dict b):
    cdef dict r, q
    cdef list heap
    cdef bint integral
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
    blist = list(b.items())
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
        for kb, c in blist:
            k = kb + t
            s = r.get(k)
            if s is None:
                r[k] = -qc * c
                heappush(heap, -k)
            else:
                s = s - qc * c
                if s:
                    r[k] = s
                else:
                    del r[k]
    return q


cpdef dict p_eval_var(dict a, int shift, x):
    cdef dict r = {}
    cdef dict pows = {}
    clear = ~(FIELD_MASK << shift)
    for k, c in a.items():
        e = (k >> shift) & FIELD_MASK
        if e:
            k = k & clear
            p = pows.get(e)
            if p is None:
                p = x ** e
                pows[e] = p
            c = c * p
        s = r.get(k)
        r[k] = c if s is None else s + c
    return {k: c for k, c in r.items() if c}


cpdef tuple p_sym_split(dict a, x):
    cdef dict g = {}
    cdef dict h = {}
    half = x // 2
    for k, c in a.items():
        m = c % x
        if m > half:
            m = m - x
        if m:
            g[k] = m
        rest = (c - m) // x
        if rest:
            h[k] = rest
    return g, h


cpdef object p_max_norm(dict a):
    m = 0
    for c in a.values():
        if c < 0:
            c = -c
        if c > m:
            m = c
    return m
