"""Set, relation, sequence and record operations over ground values.

These are the operators the schema predicates use.  All functions are pure,
validate argument kinds, and raise the errors named in errors.py.  The hot
element-level loops live in the selected backend (see _backend.py); this
module owns the value-level contracts.
"""

from __future__ import annotations

from . import _backend
from .errors import (
    AmbiguousApplicationError,
    KindError,
    MissingFieldError,
    OutsideDomainError,
    RangeError,
)
from .values import Atom, SeqV, SetV, TupV, Value, is_pair

BACKEND_NAME = _backend.BACKEND_NAME


def _need_set(v: Value, op: str) -> SetV:
    if not isinstance(v, SetV):
        raise KindError(f"{op} needs a set, got {type(v).__name__}")
    return v


def _need_rel(v: Value, op: str) -> SetV:
    s = _need_set(v, op)
    for e in s.elems:
        if not is_pair(e):
            raise KindError(f"{op} needs a binary relation; offending element {e!r}")
    return s


def _need_seq(v: Value, op: str) -> SeqV:
    if not isinstance(v, SeqV):
        raise KindError(f"{op} needs a sequence, got {type(v).__name__}")
    return v


def union(a: Value, b: Value) -> SetV:
    """a ∪ b."""
    a = _need_set(a, "union")
    b = _need_set(b, "union")
    return SetV(_backend.union(a.elems, b.elems), _canonical=True)


def difference(a: Value, b: Value) -> SetV:
    """a ∖ b."""
    a = _need_set(a, "difference")
    b = _need_set(b, "difference")
    return SetV(_backend.difference(a.elems, b.elems), _canonical=True)


def intersection(a: Value, b: Value) -> SetV:
    a = _need_set(a, "intersection")
    b = _need_set(b, "intersection")
    return SetV(_backend.intersection(a.elems, b.elems), _canonical=True)


def subset(a: Value, b: Value) -> bool:
    a = _need_set(a, "subset")
    b = _need_set(b, "subset")
    return len(_backend.difference(a.elems, b.elems)) == 0


def disjoint(a: Value, b: Value) -> bool:
    a = _need_set(a, "disjoint")
    b = _need_set(b, "disjoint")
    return len(_backend.intersection(a.elems, b.elems)) == 0


def dom(r: Value) -> SetV:
    """Set of first components of a binary relation."""
    r = _need_rel(r, "dom")
    return SetV(_backend.dom_elems(r.elems), _canonical=True)


def ran(r: Value) -> SetV:
    """Set of second components of a binary relation."""
    r = _need_rel(r, "ran")
    return SetV(_backend.ran_elems(r.elems), _canonical=True)


def override(r: Value, g: Value) -> SetV:
    """Relational override: pairs of g replace same-key pairs of r."""
    r = _need_rel(r, "override")
    g = _need_rel(g, "override")
    return SetV(_backend.override_elems(r.elems, g.elems), _canonical=True)


def dres(d: Value, r: Value) -> SetV:
    """Domain restriction: keep the pairs of r whose key lies in d."""
    d = _need_set(d, "dres")
    r = _need_rel(r, "dres")
    return SetV(_backend.dres_elems(d.elems, r.elems), _canonical=True)


def is_pfun(r: Value) -> bool:
    """True iff no two pairs of r share a first component."""
    r = _need_rel(r, "is_pfun")
    return _backend.is_pfun_elems(r.elems)


def apply(f: Value, x: Value) -> Value:
    """The unique y with (x, y) in f; f must be a partial function."""
    f = _need_rel(f, "apply")
    if not _backend.is_pfun_elems(f.elems):
        raise AmbiguousApplicationError("application on a relation that is not a function")
    hits = _backend.lookup(f.elems, x)
    if not hits:
        raise OutsideDomainError(f"application outside domain: {x!r}")
    return hits[0]


def ris_eval(domain: Value, filter_fn, pattern_fn) -> SetV:
    """Comprehension over a finite set: {pattern(x) | x in domain, filter(x)}."""
    domain = _need_set(domain, "ris_eval")
    out = []
    for x in domain.elems:
        if filter_fn(x):
            y = pattern_fn(x)
            if not isinstance(y, Value):
                raise KindError(f"comprehension pattern produced a non-Value: {y!r}")
            out.append(y)
    return SetV(out)


def seq_tail(s: Value) -> SeqV:
    s = _need_seq(s, "seq_tail")
    if len(s.elems) == 0:
        raise RangeError("tail of the empty sequence")
    return SeqV(s.elems[1:])


def seq_head(s: Value) -> Value:
    s = _need_seq(s, "seq_head")
    if len(s.elems) == 0:
        raise RangeError("head of the empty sequence")
    return s.elems[0]


def seq_concat(a: Value, b: Value) -> SeqV:
    a = _need_seq(a, "seq_concat")
    b = _need_seq(b, "seq_concat")
    return SeqV(a.elems + b.elems)


def seq_nth(s: Value, i: int) -> Value:
    """1-based indexing."""
    s = _need_seq(s, "seq_nth")
    if not 1 <= i <= len(s.elems):
        raise RangeError(f"index {i} outside 1..{len(s.elems)}")
    return s.elems[i - 1]


def _record_pairs(r: Value, op: str):
    r = _need_rel(r, op)
    for e in r.elems:
        if not isinstance(e.elems[0], Atom):
            raise KindError(f"{op}: record field is not an atom: {e.elems[0]!r}")
    if not _backend.is_pfun_elems(r.elems):
        raise KindError(f"{op}: duplicate field atoms in record")
    return r


def record_get(r: Value, f: Atom) -> Value:
    r = _record_pairs(r, "record_get")
    hits = _backend.lookup(r.elems, f)
    if not hits:
        raise MissingFieldError(f"record has no field {f.name!r}")
    return hits[0]


def record_set(r: Value, f: Atom, v: Value) -> SetV:
    r = _record_pairs(r, "record_set")
    kept = [p for p in r.elems if p.elems[0] != f]
    kept.append(TupV((f, v)))
    return SetV(kept)


def record_fields(r: Value) -> SetV:
    return dom(_record_pairs(r, "record_fields"))
