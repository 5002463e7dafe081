"""Pure-Python kernel primitives over canonically sorted element tuples.

Every function here works on tuples of value objects that carry a
precomputed structural key in ``_key`` (see values.py) and, for pairs, the
components in ``.elems``.  Set arguments are assumed deduplicated and
sorted by key; results preserve that form.  The compiled twin of this
module is _kernel_c.pyx; both expose the same names and are selected in
_backend.py.
"""

BACKEND_NAME = "python"


def canon(elems):
    """Sort by structural key and drop duplicates."""
    items = sorted(elems, key=lambda v: v._key)
    out = []
    last = None
    for v in items:
        k = v._key
        if k != last:
            out.append(v)
            last = k
    return tuple(out)


def member(elems, v):
    """Binary search for v in a canonical element tuple."""
    k = v._key
    lo, hi = 0, len(elems)
    while lo < hi:
        mid = (lo + hi) // 2
        mk = elems[mid]._key
        if mk < k:
            lo = mid + 1
        elif mk > k:
            hi = mid
        else:
            return True
    return False


def union(a, b):
    """Merge two canonical tuples."""
    i = j = 0
    na, nb = len(a), len(b)
    out = []
    while i < na and j < nb:
        ka, kb = a[i]._key, b[j]._key
        if ka < kb:
            out.append(a[i])
            i += 1
        elif kb < ka:
            out.append(b[j])
            j += 1
        else:
            out.append(a[i])
            i += 1
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def difference(a, b):
    i = j = 0
    na, nb = len(a), len(b)
    out = []
    while i < na and j < nb:
        ka, kb = a[i]._key, b[j]._key
        if ka < kb:
            out.append(a[i])
            i += 1
        elif kb < ka:
            j += 1
        else:
            i += 1
            j += 1
    out.extend(a[i:])
    return tuple(out)


def intersection(a, b):
    i = j = 0
    na, nb = len(a), len(b)
    out = []
    while i < na and j < nb:
        ka, kb = a[i]._key, b[j]._key
        if ka < kb:
            i += 1
        elif kb < ka:
            j += 1
        else:
            out.append(a[i])
            i += 1
            j += 1
    return tuple(out)


def dom_elems(pairs):
    return canon([p.elems[0] for p in pairs])


def ran_elems(pairs):
    return canon([p.elems[1] for p in pairs])


def override_elems(r_pairs, g_pairs):
    """Pairs of r whose key is outside dom g, plus all of g."""
    gdom = canon([p.elems[0] for p in g_pairs])
    kept = [p for p in r_pairs if not member(gdom, p.elems[0])]
    return canon(kept + list(g_pairs))


def dres_elems(d_elems, r_pairs):
    """Pairs of r whose key lies in the domain set d."""
    return tuple(p for p in r_pairs if member(d_elems, p.elems[0]))


def lookup(pairs, x):
    """All second components paired with x (canonical order)."""
    k = x._key
    return tuple(p.elems[1] for p in pairs if p.elems[0]._key == k)


def is_pfun_elems(pairs):
    """True iff no two pairs share a first component."""
    seen = set()
    for p in pairs:
        k = p.elems[0]._key
        if k in seen:
            return False
        seen.add(k)
    return True
