"""Constraint-formula representation.

A Formula is a disjunction of conjunctions of atomic constraints over
terms; the common case is a single conjunction, and disjunction enters
through negation or through explicitly disjunctive definitions.  Record
patterns are set-extension terms whose elements are (field-atom, value)
pairs, so one term shape covers sets, relations and records uniformly.
"""

from __future__ import annotations

import itertools

from .errors import FormulaError
from .values import Value


class Term:
    __slots__ = ()


class Lit(Term):
    __slots__ = ("value",)

    def __init__(self, value: Value):
        if not isinstance(value, Value):
            raise FormulaError(f"Lit needs a ground Value, got {value!r}")
        self.value = value

    def __repr__(self):
        return f"Lit({self.value!r})"

    def __eq__(self, other):
        return isinstance(other, Lit) and self.value == other.value

    def __hash__(self):
        return hash(("Lit", self.value))


class Var(Term):
    __slots__ = ("name",)

    def __init__(self, name: str):
        if not name:
            raise FormulaError("empty variable name")
        self.name = name

    def __repr__(self):
        return f"Var({self.name})"

    def __eq__(self, other):
        return isinstance(other, Var) and self.name == other.name

    def __hash__(self):
        return hash(("Var", self.name))


class TupT(Term):
    """Tuple term; constructor applications like addrMsg(X) are tuples whose
    first component is the constructor atom."""

    __slots__ = ("elems",)

    def __init__(self, elems):
        elems = tuple(elems)
        if len(elems) < 2:
            raise FormulaError("tuple terms need at least 2 components")
        self.elems = elems

    def __repr__(self):
        return f"TupT{self.elems!r}"

    def __eq__(self, other):
        return isinstance(other, TupT) and self.elems == other.elems

    def __hash__(self):
        return hash(("TupT", self.elems))


class SeqT(Term):
    __slots__ = ("elems",)

    def __init__(self, elems):
        self.elems = tuple(elems)

    def __repr__(self):
        return f"SeqT{self.elems!r}"

    def __eq__(self, other):
        return isinstance(other, SeqT) and self.elems == other.elems

    def __hash__(self):
        return hash(("SeqT", self.elems))


class SetT(Term):
    """Set extension {e1,...,ek} or open extension {e1,...,ek / Tail}."""

    __slots__ = ("elems", "tail")

    def __init__(self, elems, tail: Term | None = None):
        self.elems = tuple(elems)
        self.tail = tail
        if tail is not None and not self.elems:
            raise FormulaError("open set extension needs at least one element")

    def __repr__(self):
        return f"SetT({self.elems!r}, tail={self.tail!r})"

    def __eq__(self, other):
        return isinstance(other, SetT) and self.elems == other.elems and self.tail == other.tail

    def __hash__(self):
        return hash(("SetT", self.elems, self.tail))


class RisT(Term):
    """Comprehension whose binder ranges over a finite set."""

    __slots__ = ("binder", "domain", "filter", "pattern")

    def __init__(self, binder: str, domain: Term, filter: "Formula", pattern: Term):
        self.binder = binder
        self.domain = domain
        self.filter = filter
        self.pattern = pattern

    def __repr__(self):
        return f"RisT({self.binder} in {self.domain!r}, {self.filter!r}, {self.pattern!r})"

    def __eq__(self, other):
        return (
            isinstance(other, RisT)
            and self.binder == other.binder
            and self.domain == other.domain
            and self.filter == other.filter
            and self.pattern == other.pattern
        )

    def __hash__(self):
        return hash(("RisT", self.binder, self.domain, self.filter, self.pattern))


# kind -> (arity, functional).  Functional kinds compute their last argument
# from the ground preceding ones; check kinds are pure tests.
KINDS = {
    "eq": (2, False),
    "neq": (2, False),
    "in": (2, False),
    "nin": (2, False),
    "un": (3, True),
    "diff": (3, True),
    "inters": (3, True),
    "disj": (2, False),
    "ndisj": (2, False),
    "subset": (2, False),
    "nsubset": (2, False),
    "dom": (2, True),
    "ran": (2, True),
    "apply": (3, True),
    "oplus": (3, True),
    "dres": (3, True),
    "pfun": (1, False),
    "npfun": (1, False),
    "seq_head": (2, True),
    "seq_tail": (2, True),
    "seq_concat": (3, True),
    "seq_nth": (3, True),
    "plus": (3, True),
    "minus": (3, True),
    "times": (3, True),
    "intdiv": (3, True),
    "le": (2, False),
    "lt": (2, False),
}

DUALS = {
    "eq": "neq",
    "neq": "eq",
    "in": "nin",
    "nin": "in",
    "disj": "ndisj",
    "ndisj": "disj",
    "subset": "nsubset",
    "nsubset": "subset",
    "pfun": "npfun",
    "npfun": "pfun",
}


class Constraint:
    __slots__ = ("kind", "args")

    def __init__(self, kind: str, args):
        if kind not in KINDS:
            raise FormulaError(f"unknown constraint kind {kind!r}")
        args = tuple(args)
        arity = KINDS[kind][0]
        if len(args) != arity:
            raise FormulaError(f"{kind} takes {arity} arguments, got {len(args)}")
        for a in args:
            if not isinstance(a, Term):
                raise FormulaError(f"constraint argument is not a Term: {a!r}")
        self.kind = kind
        self.args = args

    def __repr__(self):
        return f"Constraint({self.kind}, {self.args!r})"

    def __eq__(self, other):
        return isinstance(other, Constraint) and self.kind == other.kind and self.args == other.args

    def __hash__(self):
        return hash((self.kind, self.args))


def C(kind: str, *args: Term) -> Constraint:
    return Constraint(kind, args)


class Formula:
    """Disjunction of conjunctions.  No disjuncts means false; a single
    empty conjunct means true."""

    __slots__ = ("disjuncts",)

    def __init__(self, disjuncts):
        self.disjuncts = tuple(tuple(d) for d in disjuncts)
        for d in self.disjuncts:
            for c in d:
                if not isinstance(c, Constraint):
                    raise FormulaError(f"not a Constraint: {c!r}")
        _check_binders(self)

    def is_true(self):
        return any(len(d) == 0 for d in self.disjuncts)

    def is_false(self):
        return len(self.disjuncts) == 0

    def __repr__(self):
        return f"Formula({self.disjuncts!r})"

    def __eq__(self, other):
        return isinstance(other, Formula) and self.disjuncts == other.disjuncts

    def __hash__(self):
        return hash(self.disjuncts)


def _term_vars(t: Term, out: set, bound: frozenset):
    if isinstance(t, Var):
        if t.name not in bound:
            out.add(t.name)
    elif isinstance(t, (TupT, SeqT)):
        for e in t.elems:
            _term_vars(e, out, bound)
    elif isinstance(t, SetT):
        for e in t.elems:
            _term_vars(e, out, bound)
        if t.tail is not None:
            _term_vars(t.tail, out, bound)
    elif isinstance(t, RisT):
        _term_vars(t.domain, out, bound)
        inner = bound | {t.binder}
        for d in t.filter.disjuncts:
            for c in d:
                for a in c.args:
                    _term_vars(a, out, inner)
        _term_vars(t.pattern, out, inner)


def free_vars(f: Formula) -> list:
    """Free variables in first-occurrence order."""
    seen = set()
    order = []
    empty = frozenset()
    for d in f.disjuncts:
        for c in d:
            for a in c.args:
                for name in _occurrence_order(a, empty):
                    if name not in seen:
                        seen.add(name)
                        order.append(name)
    return order


def _occurrence_order(t: Term, bound: frozenset):
    if isinstance(t, Var):
        if t.name not in bound:
            yield t.name
    elif isinstance(t, (TupT, SeqT)):
        for e in t.elems:
            yield from _occurrence_order(e, bound)
    elif isinstance(t, SetT):
        for e in t.elems:
            yield from _occurrence_order(e, bound)
        if t.tail is not None:
            yield from _occurrence_order(t.tail, bound)
    elif isinstance(t, RisT):
        yield from _occurrence_order(t.domain, bound)
        inner = bound | {t.binder}
        for d in t.filter.disjuncts:
            for c in d:
                for a in c.args:
                    yield from _occurrence_order(a, inner)
        yield from _occurrence_order(t.pattern, inner)


def _walk_ris(t: Term):
    if isinstance(t, RisT):
        yield t
    elif isinstance(t, (TupT, SeqT)):
        for e in t.elems:
            yield from _walk_ris(e)
    elif isinstance(t, SetT):
        for e in t.elems:
            yield from _walk_ris(e)
        if t.tail is not None:
            yield from _walk_ris(t.tail)


def _check_binders(f: Formula):
    """Binder names must not collide with variables that occur free."""
    frees = set()
    binders = set()
    empty = frozenset()
    for d in f.disjuncts:
        for c in d:
            for a in c.args:
                _term_vars(a, frees, empty)
                for r in _walk_ris(a):
                    binders.add(r.binder)
    clash = binders & frees
    if clash:
        raise FormulaError(f"comprehension binder shadows free variable(s): {sorted(clash)}")


TRUE = Formula(((),))
FALSE = Formula(())


def conj(constraints) -> Formula:
    return Formula((tuple(constraints),))


def disj_of(formulas) -> Formula:
    out = []
    for f in formulas:
        out.extend(f.disjuncts)
    return Formula(out)


def conj_formulas(formulas) -> Formula:
    """Conjoin formulas, distributing over disjuncts (DNF)."""
    rows = [()]
    for f in formulas:
        rows = [r + d for r in rows for d in f.disjuncts]
    return Formula(rows)


def _fresh_names(used, n, prefix="_N"):
    out = []
    i = 1
    while len(out) < n:
        name = f"{prefix}{i}"
        if name not in used:
            out.append(name)
            used.add(name)
        i += 1
    return out


def negate_constraint(c: Constraint, used_names: set) -> list:
    """Negation of one atomic constraint, as a conjunction fragment."""
    if c.kind in DUALS:
        return [Constraint(DUALS[c.kind], c.args)]
    if c.kind == "le":
        return [Constraint("lt", (c.args[1], c.args[0]))]
    if c.kind == "lt":
        return [Constraint("le", (c.args[1], c.args[0]))]
    arity, functional = KINDS[c.kind]
    if functional:
        (fresh,) = _fresh_names(used_names, 1)
        return [
            Constraint(c.kind, c.args[:-1] + (Var(fresh),)),
            Constraint("neq", (Var(fresh), c.args[-1])),
        ]
    raise FormulaError(f"constraint kind {c.kind!r} has no negation")


def negate(f: Formula) -> Formula:
    """Logical negation, distributed back into disjunction-of-conjunctions."""
    used = set(free_vars(f))
    per_disjunct = []
    for d in f.disjuncts:
        per_disjunct.append([negate_constraint(c, used) for c in d])
    rows = []
    for combo in itertools.product(*per_disjunct):
        row = []
        for fragment in combo:
            row.extend(fragment)
        rows.append(tuple(row))
    return Formula(rows)
