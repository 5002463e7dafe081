# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernel primitives; mirrors _kernel_py exactly.

Same contracts as the pure-Python module: canonical (key-sorted,
deduplicated) element tuples in, canonical tuples out.  The win comes from
typed loop counters and direct rich comparisons on the cached structural
keys, which removes the interpreter overhead from the innermost loops of
set construction and relational operations.
"""

BACKEND_NAME = "c"


def canon(elems):
    cdef list items = sorted(elems, key=_keyof)
    cdef list out = []
    cdef Py_ssize_t n = len(items)
    cdef Py_ssize_t idx
    last = None
    for idx in range(n):
        v = items[idx]
        k = (<object> v)._key
        if last is None or k != last:
            out.append(v)
            last = k
    return tuple(out)


def _keyof(v):
    return v._key


def member(tuple elems, v):
    cdef Py_ssize_t lo = 0
    cdef Py_ssize_t hi = len(elems)
    cdef Py_ssize_t mid
    k = v._key
    while lo < hi:
        mid = (lo + hi) // 2
        mk = (<object> elems[mid])._key
        if mk < k:
            lo = mid + 1
        elif mk > k:
            hi = mid
        else:
            return True
    return False


def union(tuple a, tuple b):
    cdef Py_ssize_t i = 0, j = 0
    cdef Py_ssize_t na = len(a), nb = len(b)
    cdef list out = []
    while i < na and j < nb:
        ka = (<object> a[i])._key
        kb = (<object> b[j])._key
        if ka < kb:
            out.append(a[i]); i += 1
        elif kb < ka:
            out.append(b[j]); j += 1
        else:
            out.append(a[i]); i += 1; j += 1
    while i < na:
        out.append(a[i]); i += 1
    while j < nb:
        out.append(b[j]); j += 1
    return tuple(out)


def difference(tuple a, tuple b):
    cdef Py_ssize_t i = 0, j = 0
    cdef Py_ssize_t na = len(a), nb = len(b)
    cdef list out = []
    while i < na and j < nb:
        ka = (<object> a[i])._key
        kb = (<object> b[j])._key
        if ka < kb:
            out.append(a[i]); i += 1
        elif kb < ka:
            j += 1
        else:
            i += 1; j += 1
    while i < na:
        out.append(a[i]); i += 1
    return tuple(out)


def intersection(tuple a, tuple b):
    cdef Py_ssize_t i = 0, j = 0
    cdef Py_ssize_t na = len(a), nb = len(b)
    cdef list out = []
    while i < na and j < nb:
        ka = (<object> a[i])._key
        kb = (<object> b[j])._key
        if ka < kb:
            i += 1
        elif kb < ka:
            j += 1
        else:
            out.append(a[i]); i += 1; j += 1
    return tuple(out)


def dom_elems(tuple pairs):
    cdef Py_ssize_t i
    cdef list firsts = []
    for i in range(len(pairs)):
        firsts.append((<object> pairs[i]).elems[0])
    return canon(firsts)


def ran_elems(tuple pairs):
    cdef Py_ssize_t i
    cdef list seconds = []
    for i in range(len(pairs)):
        seconds.append((<object> pairs[i]).elems[1])
    return canon(seconds)


def override_elems(tuple r_pairs, tuple g_pairs):
    cdef Py_ssize_t i
    cdef list firsts = []
    for i in range(len(g_pairs)):
        firsts.append((<object> g_pairs[i]).elems[0])
    gdom = canon(firsts)
    cdef list kept = []
    for i in range(len(r_pairs)):
        p = r_pairs[i]
        if not member(gdom, (<object> p).elems[0]):
            kept.append(p)
    kept.extend(g_pairs)
    return canon(kept)


def dres_elems(tuple d_elems, tuple r_pairs):
    cdef Py_ssize_t i
    cdef list out = []
    for i in range(len(r_pairs)):
        p = r_pairs[i]
        if member(d_elems, (<object> p).elems[0]):
            out.append(p)
    return tuple(out)


def lookup(tuple pairs, x):
    cdef Py_ssize_t i
    cdef list out = []
    k = x._key
    for i in range(len(pairs)):
        p = pairs[i]
        if (<object> p).elems[0]._key == k:
            out.append((<object> p).elems[1])
    return tuple(out)


def is_pfun_elems(tuple pairs):
    cdef Py_ssize_t i
    cdef set seen = set()
    for i in range(len(pairs)):
        k = (<object> pairs[i]).elems[0]._key
        if k in seen:
            return False
        seen.add(k)
    return True
