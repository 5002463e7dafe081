"""Ground value representation: atoms, integers, tuples, finite sets, sequences.

Records and binary relations are not separate kinds; a record is a set of
(field-atom, value) pairs and a relation is a set of 2-tuples.  Every value
is immutable and carries a precomputed structural key that gives a total
order over all values.  Set elements are stored deduplicated and sorted by
that key, so structural equality of sets is order-insensitive for free and
printing is canonical.
"""

from __future__ import annotations

import re

from .errors import KindError

# Namespaces for atoms.  Given sets are pairwise disjoint, so every atom is
# tagged with the namespace it belongs to; equality compares the tag too.
NAMESPACES = ("addr", "hash", "proof", "tx", "msg", "field", "opaque")
_NS_RANK = {ns: i for i, ns in enumerate(NAMESPACES)}

# Namespaces whose atoms the solver may enumerate, with the name prefix used
# to generate fresh atoms (a1, a2, ..., h1, ...).  msg and field atoms are
# structural tags and are never enumerated.
ENUMERABLE_NS = ("addr", "hash", "proof", "tx", "opaque")
NS_PREFIX = {"addr": "a", "hash": "h", "proof": "pr", "tx": "tx", "opaque": "u"}

# Known record field names, mapped to the field namespace by the parser.
FIELD_ATOMS = frozenset(
    "as bf tp prev txs pf delta soup acc accCC newaddr step "
    "nonce bal code g pc m i s out tn tg tp tv ti td sender tt "
    "cs ees ia io ip ie".split()
)

_ADDR_RE = re.compile(r"(?:a|n)\d+$")
_HASH_RE = re.compile(r"h\d+$")
_PROOF_RE = re.compile(r"pr\d+$")
_TX_RE = re.compile(r"tx\d+$")
_OPAQUE_RE = re.compile(r"u\d+$")


def infer_namespace(name: str) -> str:
    """Namespace of a lowercase atom name, by lexical convention."""
    if name in ("this", "env", "null") or _ADDR_RE.match(name):
        return "addr"
    if _HASH_RE.match(name):
        return "hash"
    if _PROOF_RE.match(name):
        return "proof"
    if _TX_RE.match(name):
        return "tx"
    if _OPAQUE_RE.match(name):
        return "opaque"
    if name.endswith("Msg"):
        return "msg"
    if name in FIELD_ATOMS:
        return "field"
    return "opaque"


class Value:
    """Base class of all ground values.  Subclasses are immutable."""

    __slots__ = ("_key", "_hash")

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Value):
            return NotImplemented
        return self._key == other._key

    def __ne__(self, other):
        if not isinstance(other, Value):
            return NotImplemented
        return self._key != other._key

    def __lt__(self, other):
        return self._key < other._key

    def __le__(self, other):
        return self._key <= other._key

    def __hash__(self):
        return self._hash


class Atom(Value):
    """Member of a given set; no structure beyond its name and namespace."""

    __slots__ = ("ns", "name")

    def __init__(self, name: str, ns: str | None = None):
        if ns is None:
            ns = infer_namespace(name)
        if ns not in _NS_RANK:
            raise KindError(f"unknown atom namespace {ns!r}")
        object.__setattr__(self, "ns", ns)
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_key", (0, _NS_RANK[ns], name))
        object.__setattr__(self, "_hash", hash((0, ns, name)))

    def __setattr__(self, *a):
        raise AttributeError("Atom is immutable")

    def __repr__(self):
        return f"Atom({self.name!r}, {self.ns!r})"


class IntV(Value):
    """Arbitrary-precision integer value."""

    __slots__ = ("n",)

    def __init__(self, n: int):
        if not isinstance(n, int) or isinstance(n, bool):
            raise KindError(f"IntV needs a Python int, got {type(n).__name__}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_key", (1, n))
        object.__setattr__(self, "_hash", hash((1, n)))

    def __setattr__(self, *a):
        raise AttributeError("IntV is immutable")

    def __repr__(self):
        return f"IntV({self.n})"


class TupV(Value):
    """Ordered tuple of at least two values."""

    __slots__ = ("elems",)

    def __init__(self, elems):
        elems = tuple(elems)
        if len(elems) < 2:
            raise KindError("tuples need at least 2 components")
        for e in elems:
            if not isinstance(e, Value):
                raise KindError(f"tuple component is not a Value: {e!r}")
        object.__setattr__(self, "elems", elems)
        key = (2, len(elems)) + tuple(e._key for e in elems)
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))

    def __setattr__(self, *a):
        raise AttributeError("TupV is immutable")

    def __len__(self):
        return len(self.elems)

    def __repr__(self):
        return f"TupV{self.elems!r}"


class SetV(Value):
    """Finite set; elements stored deduplicated in canonical key order."""

    __slots__ = ("elems",)

    def __init__(self, elems=(), _canonical=False):
        if _canonical:
            elems = tuple(elems)
        else:
            for e in elems:
                if not isinstance(e, Value):
                    raise KindError(f"set element is not a Value: {e!r}")
            elems = _backend.canon(elems)
        object.__setattr__(self, "elems", elems)
        key = (3, len(elems)) + tuple(e._key for e in elems)
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))

    def __setattr__(self, *a):
        raise AttributeError("SetV is immutable")

    def __len__(self):
        return len(self.elems)

    def __contains__(self, v):
        return _backend.member(self.elems, v)

    def __iter__(self):
        return iter(self.elems)

    def __repr__(self):
        return f"SetV{{{', '.join(map(repr, self.elems))}}}"


class SeqV(Value):
    """Finite sequence with 1-based indexing."""

    __slots__ = ("elems",)

    def __init__(self, elems=()):
        elems = tuple(elems)
        for e in elems:
            if not isinstance(e, Value):
                raise KindError(f"sequence element is not a Value: {e!r}")
        object.__setattr__(self, "elems", elems)
        key = (4, len(elems)) + tuple(e._key for e in elems)
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))

    def __setattr__(self, *a):
        raise AttributeError("SeqV is immutable")

    def __len__(self):
        return len(self.elems)

    def __repr__(self):
        return f"SeqV{self.elems!r}"


# Backend selection happens at the bottom because SetV's constructor needs
# it; see _kernel_py / _kernel_c for the operations themselves.
from . import _backend  # noqa: E402  (import cycle broken by late import)


def atom(name: str, ns: str | None = None) -> Atom:
    return Atom(name, ns)


def intv(n: int) -> IntV:
    return IntV(n)


def tup(*elems: Value) -> TupV:
    return TupV(elems)


def vset(elems=()) -> SetV:
    return SetV(elems)


def vseq(elems=()) -> SeqV:
    return SeqV(elems)


EMPTY_SET = SetV(())
EMPTY_SEQ = SeqV(())


def is_pair(v: Value) -> bool:
    return isinstance(v, TupV) and len(v.elems) == 2


def value_kind(v: Value) -> str:
    if isinstance(v, Atom):
        return "atom"
    if isinstance(v, IntV):
        return "int"
    if isinstance(v, TupV):
        return "tuple"
    if isinstance(v, SetV):
        return "set"
    if isinstance(v, SeqV):
        return "seq"
    raise KindError(f"not a Value: {v!r}")
