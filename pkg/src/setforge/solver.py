"""Bounded satisfiability over finite sets, with constraint propagation.

The decision strategy is exhaustive enumeration inside a Scope, but ground
work is moved ahead of search wherever possible:

* functional constraints (un, diff, oplus, dom, apply, arithmetic, ...)
  compute their result as soon as their inputs are known;
* structural facts are derived from partially known values: a relation
  whose keys are decided but whose range entries are still open already
  determines its domain, whether it is a partial function, and how an
  override rewrites it.  Open positions are holes (fresh variables) that
  are only enumerated if some constraint actually looks at them;
* set-membership and union constraints with a known result act as
  generators, proposing candidate decompositions in a fixed order.

Unsat therefore always means "no model within the scope's universes", and
every Sat answer carries a witness that is re-checked by direct ground
evaluation before it is returned.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import kernel
from .errors import (
    AmbiguousApplicationError,
    FormulaError,
    KindError,
    MissingFieldError,
    OutsideDomainError,
    RangeError,
    SetforgeError,
)
from .formula import (
    Constraint,
    Formula,
    Lit,
    RisT,
    SeqT,
    SetT,
    Term,
    TupT,
    Var,
    conj_formulas,
    free_vars,
    negate,
)
from .universe import (
    DEFAULT_SCOPE,
    AnyS,
    IntS,
    RecordS,
    RelS,
    Scope,
    SeqS,
    SetS,
    Sort,
    TupleS,
    enumerate_sort,
    first_value,
    sort_contains,
)
from .values import Atom, IntV, SeqV, SetV, TupV, Value, is_pair

DEFAULT_BUDGET = 500_000


# -- results ------------------------------------------------------------------


@dataclass(frozen=True)
class Sat:
    witness: dict

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Unsat:
    def __bool__(self):
        return False


@dataclass(frozen=True)
class Unknown:
    reason: str

    def __bool__(self):
        return False


@dataclass(frozen=True)
class Verified:
    scope: Scope


@dataclass(frozen=True)
class Counterexample:
    witness: dict


class UnknownOutcome(SetforgeError):
    """Raised when a caller needs a definite verdict but the solver gave up."""


# -- partial values -------------------------------------------------------------

# A pval is either a ground Value, a PHole (reference to a possibly unbound
# variable), or a structural node whose children are pvals.  PSet lists all
# members of the set it denotes; duplicates merge when the set grounds.


class PHole:
    __slots__ = ("var",)

    def __init__(self, var):
        self.var = var

    def __repr__(self):
        return f"?{self.var}"


class PTup:
    __slots__ = ("elems",)

    def __init__(self, elems):
        self.elems = tuple(elems)

    def __repr__(self):
        return f"PTup{self.elems!r}"


class PSet:
    __slots__ = ("elems",)

    def __init__(self, elems):
        self.elems = tuple(elems)

    def __repr__(self):
        return f"PSet{self.elems!r}"


class PSeq:
    __slots__ = ("elems",)

    def __init__(self, elems):
        self.elems = tuple(elems)

    def __repr__(self):
        return f"PSeq{self.elems!r}"


def _walk(p, env):
    while isinstance(p, PHole):
        bound = env.get(p.var)
        if bound is None:
            return p
        p = bound
    return p


def resolve(p, env):
    """Walk bindings and collapse fully ground structure to a Value."""
    p = _walk(p, env)
    if isinstance(p, Value) or isinstance(p, PHole):
        return p
    if isinstance(p, PTup):
        rs = [resolve(e, env) for e in p.elems]
        if all(isinstance(r, Value) for r in rs):
            return TupV(rs)
        return PTup(rs)
    if isinstance(p, PSet):
        rs = [resolve(e, env) for e in p.elems]
        if all(isinstance(r, Value) for r in rs):
            return SetV(rs)
        return PSet(rs)
    if isinstance(p, PSeq):
        rs = [resolve(e, env) for e in p.elems]
        if all(isinstance(r, Value) for r in rs):
            return SeqV(rs)
        return PSeq(rs)
    raise KindError(f"not a pval: {p!r}")


def _holes_in(p, out):
    if isinstance(p, PHole):
        out.add(p.var)
    elif isinstance(p, (PTup, PSet, PSeq)):
        for e in p.elems:
            _holes_in(e, out)


def holes_of(p):
    out = set()
    _holes_in(p, out)
    return out


# -- terms to pvals --------------------------------------------------------------


class _Defer(Exception):
    """Internal: a term cannot be evaluated yet."""


def term_pval(t: Term, env):
    if isinstance(t, Lit):
        return t.value
    if isinstance(t, Var):
        return resolve(PHole(t.name), env)
    if isinstance(t, TupT):
        return resolve(PTup([term_pval(e, env) for e in t.elems]), env)
    if isinstance(t, SeqT):
        return resolve(PSeq([term_pval(e, env) for e in t.elems]), env)
    if isinstance(t, SetT):
        if t.tail is not None:
            raise _Defer()  # open extensions are handled by eq directly
        return resolve(PSet([term_pval(e, env) for e in t.elems]), env)
    if isinstance(t, RisT):
        raise _Defer()  # comprehensions are handled by eq directly
    raise KindError(f"not a term: {t!r}")


# -- unification ------------------------------------------------------------------

_OK, _FAIL, _DEFER = "ok", "fail", "defer"


def _occurs(var, p, env):
    p = _walk(p, env)
    if isinstance(p, PHole):
        return p.var == var
    if isinstance(p, (PTup, PSet, PSeq)):
        return any(_occurs(var, e, env) for e in p.elems)
    return False


def _pair_key(p, env):
    """Ground first component of a definite pair, or None."""
    p = _walk(p, env)
    if isinstance(p, TupV) and len(p.elems) == 2:
        return p.elems[0]
    if isinstance(p, PTup) and len(p.elems) == 2:
        k = resolve(p.elems[0], env)
        if isinstance(k, Value):
            return k
    return None


def _pair_val(p, env):
    return _walk(p, env).elems[1]


def _keyed_elems(p, env):
    """If every member is a definite pair with a ground, pairwise distinct
    key, return the key -> value mapping in key order; else None."""
    if isinstance(p, SetV):
        elems = p.elems
    elif isinstance(p, PSet):
        elems = p.elems
    else:
        return None
    out = {}
    for e in elems:
        k = _pair_key(e, env)
        if k is None or k in out:
            return None
        out[k] = _pair_val(e, env)
    return dict(sorted(out.items(), key=lambda kv: kv[0]._key))


def unify(a, b, env):
    """Make a and b equal, binding holes in env.  Mutates env; partial
    bindings on _FAIL are fine because the branch is abandoned."""
    a = resolve(a, env)
    b = resolve(b, env)
    if isinstance(a, Value) and isinstance(b, Value):
        return _OK if a == b else _FAIL
    if isinstance(a, PHole):
        if isinstance(b, PHole) and b.var == a.var:
            return _OK
        if _occurs(a.var, b, env):
            return _FAIL
        env[a.var] = b
        return _OK
    if isinstance(b, PHole):
        if _occurs(b.var, a, env):
            return _FAIL
        env[b.var] = a
        return _OK
    return _unify_struct(a, b, env)


def _unify_struct(a, b, env):
    akind = _shape(a)
    bkind = _shape(b)
    if akind != bkind:
        return _FAIL
    if akind == "tuple":
        if len(a.elems) != len(b.elems):
            return _FAIL
        return _unify_pointwise(a.elems, b.elems, env)
    if akind == "seq":
        if len(a.elems) != len(b.elems):
            return _FAIL
        return _unify_pointwise(a.elems, b.elems, env)
    if akind == "set":
        ka = _keyed_elems(a, env)
        kb = _keyed_elems(b, env)
        if ka is not None and kb is not None:
            if list(ka.keys()) != list(kb.keys()):
                return _FAIL
            return _unify_pointwise(list(ka.values()), list(kb.values()), env)
        # single listed member against a singleton set
        ae = a.elems
        be = b.elems
        if len(ae) == 1 and len(be) == 1:
            return unify(ae[0], be[0], env)
        if _definitely_nonempty(a) != _definitely_nonempty(b) and (
            _is_empty_set(a) or _is_empty_set(b)
        ):
            return _FAIL
        return _DEFER
    return _FAIL


def _unify_pointwise(xs, ys, env):
    result = _OK
    for x, y in zip(xs, ys):
        r = unify(x, y, env)
        if r == _FAIL:
            return _FAIL
        if r == _DEFER:
            result = _DEFER
    return result


def _shape(p):
    if isinstance(p, (TupV, PTup)):
        return "tuple"
    if isinstance(p, (SetV, PSet)):
        return "set"
    if isinstance(p, (SeqV, PSeq)):
        return "seq"
    if isinstance(p, Atom):
        return "atom"
    if isinstance(p, IntV):
        return "int"
    return "hole"


def _is_empty_set(p):
    return (isinstance(p, SetV) and len(p.elems) == 0) or (
        isinstance(p, PSet) and len(p.elems) == 0
    )


def _definitely_nonempty(p):
    return (isinstance(p, SetV) and len(p.elems) > 0) or (
        isinstance(p, PSet) and len(p.elems) > 0
    )


def _neq_decide(a, b, env):
    """three-valued disequality: True, False, or None (unknown)."""
    a = resolve(a, env)
    b = resolve(b, env)
    if isinstance(a, Value) and isinstance(b, Value):
        return a != b
    if isinstance(a, PHole) and isinstance(b, PHole) and a.var == b.var:
        return False
    sa, sb = _shape(a), _shape(b)
    if "hole" in (sa, sb):
        return None
    if sa != sb:
        return True
    if sa in ("tuple", "seq"):
        if len(a.elems) != len(b.elems):
            return True
        verdicts = [_neq_decide(x, y, env) for x, y in zip(a.elems, b.elems)]
        if any(v is True for v in verdicts):
            return True
        if all(v is False for v in verdicts):
            return False
        return None
    if sa == "set":
        if _is_empty_set(a) != _is_empty_set(b) and (_is_empty_set(a) or _is_empty_set(b)):
            if _definitely_nonempty(a) or _definitely_nonempty(b):
                return True
        ka = _keyed_elems(a, env)
        kb = _keyed_elems(b, env)
        if ka is not None and kb is not None and list(ka.keys()) != list(kb.keys()):
            return True
        return None
    return None


# -- listed-set structure helpers ------------------------------------------------


def _listed(p):
    """Members of a set whose extension is fully listed, or None."""
    if isinstance(p, (SetV, PSet)):
        return p.elems
    return None


def _listed_pairs(p, env):
    """(key, value, elem) triples when every member is a definite pair with
    a ground key; None when structure is still open; _FAIL sentinel when a
    member is definitely not a pair (the constraint cannot hold)."""
    elems = _listed(p)
    if elems is None:
        return None
    out = []
    for e in elems:
        w = _walk(e, env)
        if isinstance(w, Value) and not is_pair(w):
            return _FAIL
        if isinstance(w, (PSet, PSeq)) or (isinstance(w, PTup) and len(w.elems) != 2):
            return _FAIL
        k = _pair_key(w, env)
        if k is None:
            return None
        out.append((k, _pair_val(w, env), w))
    return out


def _seq_elems(p):
    if isinstance(p, (SeqV, PSeq)):
        return p.elems
    return None


def _ground_int(p):
    if isinstance(p, IntV):
        return p.n
    return None


# -- single-constraint evaluation -------------------------------------------------

_TRUE, _FALSE = "true", "false"


def _from_unify(r):
    return _TRUE if r == _OK else (_FALSE if r == _FAIL else _DEFER)


def _eval_constraint(c: Constraint, env):
    """Evaluate or propagate one constraint against the current bindings.
    Returns 'true' (satisfied, possibly after binding), 'false', or 'defer'."""
    kind = c.kind
    if kind == "eq":
        return _eval_eq(c.args[0], c.args[1], env)
    if kind == "neq":
        try:
            a = term_pval(c.args[0], env)
            b = term_pval(c.args[1], env)
        except _Defer:
            return _eval_eq_negated(c, env)
        v = _neq_decide(a, b, env)
        if v is None:
            return _DEFER
        return _TRUE if v else _FALSE

    try:
        args = [term_pval(a, env) for a in c.args]
    except _Defer:
        return _DEFER

    if kind in ("in", "nin"):
        x, s = args
        if isinstance(s, Value) and not isinstance(s, SetV):
            return _FALSE
        if isinstance(s, SetV):
            if isinstance(x, Value):
                hit = x in s
                return _TRUE if hit == (kind == "in") else _FALSE
            if kind == "in" and len(s.elems) == 0:
                return _FALSE
            return _DEFER
        listed = _listed(s)
        if listed is not None and isinstance(x, Value):
            grounds = [e for e in (resolve(e, env) for e in listed) if isinstance(e, Value)]
            if kind == "in" and any(e == x for e in grounds):
                return _TRUE
            if kind == "nin" and any(e == x for e in grounds):
                return _FALSE
        return _DEFER

    if kind in ("un", "diff", "inters"):
        a, b, out = args
        if isinstance(a, SetV) and isinstance(b, SetV):
            try:
                fn = {"un": kernel.union, "diff": kernel.difference, "inters": kernel.intersection}[kind]
                return _from_unify(unify(out, fn(a, b), env))
            except KindError:
                return _FALSE
        for s in (a, b):
            if isinstance(s, Value) and not isinstance(s, SetV):
                return _FALSE
        return _DEFER

    if kind in ("disj", "ndisj"):
        a, b = args
        for s in (a, b):
            if isinstance(s, Value) and not isinstance(s, SetV):
                return _FALSE
        if isinstance(a, SetV) and isinstance(b, SetV):
            d = kernel.disjoint(a, b)
            return _TRUE if d == (kind == "disj") else _FALSE
        if _is_empty_set(a) or _is_empty_set(b):
            return _TRUE if kind == "disj" else _FALSE
        la, lb = _listed(a), _listed(b)
        if la is not None and lb is not None:
            ga = {e for e in (resolve(e, env) for e in la) if isinstance(e, Value)}
            gb = {e for e in (resolve(e, env) for e in lb) if isinstance(e, Value)}
            if ga & gb:
                return _FALSE if kind == "disj" else _TRUE
        return _DEFER

    if kind in ("subset", "nsubset"):
        a, b = args
        for s in (a, b):
            if isinstance(s, Value) and not isinstance(s, SetV):
                return _FALSE
        if isinstance(a, SetV) and isinstance(b, SetV):
            s = kernel.subset(a, b)
            return _TRUE if s == (kind == "subset") else _FALSE
        if _is_empty_set(a):
            return _TRUE if kind == "subset" else _FALSE
        return _DEFER

    if kind == "dom":
        r, d = args
        if isinstance(r, Value) and not isinstance(r, SetV):
            return _FALSE
        pairs = _listed_pairs(r, env)
        if pairs is _FAIL:
            return _FALSE
        if pairs is None:
            return _DEFER
        keys = SetV([k for k, _, _ in pairs])
        return _from_unify(unify(d, keys, env))

    if kind == "ran":
        r, d = args
        if isinstance(r, SetV):
            try:
                return _from_unify(unify(d, kernel.ran(r), env))
            except KindError:
                return _FALSE
        elems = _listed(r)
        if elems is not None:
            vals = []
            for e in elems:
                w = _walk(e, env)
                if not (is_pair(w) if isinstance(w, Value) else isinstance(w, PTup) and len(w.elems) == 2):
                    return _FALSE if isinstance(w, Value) else _DEFER
                v = resolve(w.elems[1], env)
                if not isinstance(v, Value):
                    return _DEFER
                vals.append(v)
            return _from_unify(unify(d, SetV(vals), env))
        return _DEFER

    if kind == "apply":
        f, x, y = args
        if isinstance(f, Value) and not isinstance(f, SetV):
            return _FALSE
        if not isinstance(x, Value):
            return _DEFER
        pairs = _listed_pairs(f, env)
        if pairs is _FAIL:
            return _FALSE
        if pairs is None:
            return _DEFER
        hits = [v for k, v, _ in pairs if k == x]
        if not hits:
            return _FALSE
        if len(hits) == 1:
            return _from_unify(unify(y, hits[0], env))
        roots = [_walk(h, env) for h in hits]
        if all(
            isinstance(r, PHole) and isinstance(roots[0], PHole) and r.var == roots[0].var
            for r in roots
        ):
            return _from_unify(unify(y, roots[0], env))
        grounds = [resolve(h, env) for h in hits]
        if all(isinstance(g, Value) for g in grounds):
            if all(g == grounds[0] for g in grounds):
                return _from_unify(unify(y, grounds[0], env))
            return _FALSE
        return _DEFER

    if kind == "oplus":
        r, g, out = args
        for s in (r, g):
            if isinstance(s, Value) and not isinstance(s, SetV):
                return _FALSE
        rp = _listed_pairs(r, env)
        gp = _listed_pairs(g, env)
        if rp is _FAIL or gp is _FAIL:
            return _FALSE
        if rp is None or gp is None:
            return _DEFER
        gkeys = {k for k, _, _ in gp}
        kept = [e for k, _, e in rp if k not in gkeys]
        kept.extend(e for _, _, e in gp)
        return _from_unify(unify(out, resolve(PSet(kept), env), env))

    if kind == "dres":
        d, r, out = args
        if isinstance(d, Value) and not isinstance(d, SetV):
            return _FALSE
        if isinstance(r, Value) and not isinstance(r, SetV):
            return _FALSE
        if not isinstance(d, SetV):
            return _DEFER
        pairs = _listed_pairs(r, env)
        if pairs is _FAIL:
            return _FALSE
        if pairs is None:
            return _DEFER
        kept = [e for k, _, e in pairs if k in d]
        return _from_unify(unify(out, resolve(PSet(kept), env), env))

    if kind in ("pfun", "npfun"):
        (r,) = args
        if isinstance(r, Value) and not isinstance(r, SetV):
            return _FALSE
        pairs = _listed_pairs(r, env)
        if pairs is _FAIL:
            return _FALSE
        if pairs is None:
            return _DEFER
        groups = {}
        for k, v, _ in pairs:
            groups.setdefault(k, []).append(v)
        if kind == "pfun":
            # a listed member pair with a repeated key collapses exactly when
            # the values coincide, so pfun forces the values in each key
            # group to be equal: propagate that by unification
            result = _TRUE
            for vs in groups.values():
                for other in vs[1:]:
                    u = unify(vs[0], other, env)
                    if u == _FAIL:
                        return _FALSE
                    if u == _DEFER:
                        result = _DEFER
            return result
        all_collapse = True
        for vs in groups.values():
            if len(vs) == 1:
                continue
            verdicts = [
                _neq_decide(x, y, env) for x, y in itertools.combinations(vs, 2)
            ]
            if any(v is True for v in verdicts):
                return _TRUE  # two definitely-distinct values share a key
            if not all(v is False for v in verdicts):
                all_collapse = False
        return _FALSE if all_collapse else _DEFER

    if kind == "seq_head":
        s, h = args
        if isinstance(s, Value) and not isinstance(s, SeqV):
            return _FALSE
        elems = _seq_elems(s)
        if elems is None:
            return _DEFER
        if len(elems) == 0:
            return _FALSE
        return _from_unify(unify(h, elems[0], env))

    if kind == "seq_tail":
        s, t = args
        if isinstance(s, Value) and not isinstance(s, SeqV):
            return _FALSE
        elems = _seq_elems(s)
        if elems is None:
            return _DEFER
        if len(elems) == 0:
            return _FALSE
        return _from_unify(unify(t, resolve(PSeq(elems[1:]), env), env))

    if kind == "seq_concat":
        a, b, out = args
        for s in (a, b, out):
            if isinstance(s, Value) and not isinstance(s, SeqV):
                return _FALSE
        ea, eb, ec = _seq_elems(a), _seq_elems(b), _seq_elems(out)
        if ea is not None and eb is not None:
            return _from_unify(unify(out, resolve(PSeq(ea + eb), env), env))
        if ec is not None and ea is not None:
            if len(ea) > len(ec):
                return _FALSE
            r = _unify_pointwise(ea, ec[: len(ea)], env)
            if r == _FAIL:
                return _FALSE
            r2 = unify(b, resolve(PSeq(ec[len(ea):]), env), env)
            if r2 == _FAIL:
                return _FALSE
            return _TRUE if (r, r2) == (_OK, _OK) else _DEFER
        if ec is not None and eb is not None:
            if len(eb) > len(ec):
                return _FALSE
            cut = len(ec) - len(eb)
            r = _unify_pointwise(eb, ec[cut:], env)
            if r == _FAIL:
                return _FALSE
            r2 = unify(a, resolve(PSeq(ec[:cut]), env), env)
            if r2 == _FAIL:
                return _FALSE
            return _TRUE if (r, r2) == (_OK, _OK) else _DEFER
        return _DEFER

    if kind == "seq_nth":
        s, i, y = args
        if isinstance(s, Value) and not isinstance(s, SeqV):
            return _FALSE
        n = _ground_int(i)
        if isinstance(i, Value) and n is None:
            return _FALSE
        elems = _seq_elems(s)
        if elems is None or n is None:
            return _DEFER
        if not 1 <= n <= len(elems):
            return _FALSE
        return _from_unify(unify(y, elems[n - 1], env))

    if kind in ("plus", "minus", "times", "intdiv"):
        return _eval_arith(kind, args, env)

    if kind in ("le", "lt"):
        a, b = args
        for v in (a, b):
            if isinstance(v, Value) and _ground_int(v) is None:
                return _FALSE
        na, nb = _ground_int(a), _ground_int(b)
        if na is None or nb is None:
            return _DEFER
        ok = na <= nb if kind == "le" else na < nb
        return _TRUE if ok else _FALSE

    raise FormulaError(f"no evaluation rule for kind {kind!r}")


def _eval_arith(kind, args, env):
    a, b, out = args
    for v in args:
        if isinstance(v, Value) and _ground_int(v) is None:
            return _FALSE
    na, nb, nc = _ground_int(a), _ground_int(b), _ground_int(out)
    if kind == "plus":
        if na is not None and nb is not None:
            return _from_unify(unify(out, IntV(na + nb), env))
        if nc is not None and na is not None:
            return _from_unify(unify(b, IntV(nc - na), env))
        if nc is not None and nb is not None:
            return _from_unify(unify(a, IntV(nc - nb), env))
        return _DEFER
    if kind == "minus":
        if na is not None and nb is not None:
            return _from_unify(unify(out, IntV(na - nb), env))
        if na is not None and nc is not None:
            return _from_unify(unify(b, IntV(na - nc), env))
        if nb is not None and nc is not None:
            return _from_unify(unify(a, IntV(nb + nc), env))
        return _DEFER
    if kind == "times":
        if na is not None and nb is not None:
            return _from_unify(unify(out, IntV(na * nb), env))
        if nc is not None and na is not None:
            if na == 0:
                return _FALSE if nc != 0 else _DEFER
            if nc % na != 0:
                return _FALSE
            return _from_unify(unify(b, IntV(nc // na), env))
        if nc is not None and nb is not None:
            if nb == 0:
                return _FALSE if nc != 0 else _DEFER
            if nc % nb != 0:
                return _FALSE
            return _from_unify(unify(a, IntV(nc // nb), env))
        return _DEFER
    # intdiv: floor division, undefined for divisor 0
    if na is not None and nb is not None:
        if nb == 0:
            return _FALSE
        return _from_unify(unify(out, IntV(na // nb), env))
    return _DEFER


def _eval_eq(lhs: Term, rhs: Term, env):
    for one, other in ((lhs, rhs), (rhs, lhs)):
        if isinstance(one, RisT):
            return _eval_ris_eq(one, other, env)
        if isinstance(one, SetT) and one.tail is not None:
            return _eval_open_eq(one, other, env)
    try:
        a = term_pval(lhs, env)
        b = term_pval(rhs, env)
    except _Defer:
        return _DEFER
    return _from_unify(unify(a, b, env))


def _eval_eq_negated(c, env):
    # neq whose operand is a comprehension or open extension: decide only
    # once the operand side is ground
    lhs, rhs = c.args
    for one, other in ((lhs, rhs), (rhs, lhs)):
        if isinstance(one, RisT):
            got = _ris_value(one, env)
            if got is _FAIL:
                return _TRUE
            if got is None:
                return _DEFER
            v = _neq_decide(got, _try_pval(other, env), env)
            if v is None:
                return _DEFER
            return _TRUE if v else _FALSE
    return _DEFER


def _try_pval(t, env):
    try:
        return term_pval(t, env)
    except _Defer:
        return PHole("~")


def _ris_value(t: RisT, env):
    """Value of a comprehension whose domain is ground, else None; _FAIL
    when the domain is ground but not a set."""
    try:
        domain = term_pval(t.domain, env)
    except _Defer:
        return None
    if isinstance(domain, Value) and not isinstance(domain, SetV):
        return _FAIL
    if not isinstance(domain, SetV):
        return None
    out = []
    overlay = dict(env)
    for x in domain.elems:
        overlay[t.binder] = x
        v = eval_ground_formula(t.filter, overlay, partial_ok=True)
        if v is None:
            return None
        if not v:
            continue
        try:
            y = resolve(term_pval(t.pattern, overlay), overlay)
        except _Defer:
            return None
        if not isinstance(y, Value):
            return None
        out.append(y)
    return SetV(out)


def _eval_ris_eq(ris: RisT, other: Term, env):
    got = _ris_value(ris, env)
    if got is _FAIL:
        return _FALSE
    if got is None:
        return _DEFER
    try:
        o = term_pval(other, env)
    except _Defer:
        return _DEFER
    return _from_unify(unify(o, got, env))


def _eval_open_eq(pat: SetT, other: Term, env):
    """S = {e1,...,ek / T}: the listed elements are members of S and the
    tail is exactly S without them (set-unification normal form)."""
    try:
        s = term_pval(other, env)
    except _Defer:
        return _DEFER
    elem_pvals = [_try_pval(e, env) for e in pat.elems]
    tail_pval = _try_pval(pat.tail, env)

    if isinstance(s, SetV):
        # match listed elements against the ground set
        keyed = _keyed_elems(PSet(elem_pvals), env)
        s_keyed = _keyed_elems(s, env)
        if keyed is not None and s_keyed is not None:
            for k in keyed:
                if k not in s_keyed:
                    return _FALSE
            r = _unify_pointwise(
                list(keyed.values()), [s_keyed[k] for k in keyed], env
            )
            if r == _FAIL:
                return _FALSE
            rest = SetV([e for e in s.elems if _pair_key(e, env) not in keyed])
            r2 = unify(tail_pval, rest, env)
            if r2 == _FAIL:
                return _FALSE
            return _TRUE if (r, r2) == (_OK, _OK) else _DEFER
        grounds = [e for e in elem_pvals if isinstance(e, Value)]
        if len(grounds) == len(elem_pvals):
            for e in grounds:
                if e not in s:
                    return _FALSE
            rest = kernel.difference(s, SetV(grounds))
            return _from_unify(unify(tail_pval, rest, env))
        if len(s.elems) == 1 and len(elem_pvals) == 1:
            r = unify(elem_pvals[0], s.elems[0], env)
            if r == _FAIL:
                return _FALSE
            r2 = unify(tail_pval, SetV(()), env)
            if r2 == _FAIL:
                return _FALSE
            return _TRUE if (r, r2) == (_OK, _OK) else _DEFER
        return _DEFER

    if isinstance(s, PHole) or isinstance(s, PSet):
        tail = resolve(tail_pval, env)
        if isinstance(tail, Value) and not isinstance(tail, SetV):
            return _FALSE
        if all(isinstance(e, Value) for e in elem_pvals) and isinstance(tail, SetV):
            for e in elem_pvals:
                if e in tail:
                    return _FALSE
            whole = kernel.union(SetV(elem_pvals), tail)
            return _from_unify(unify(s, whole, env))
        return _DEFER
    if isinstance(s, Value):  # ground but not a set
        return _FALSE
    return _DEFER


# -- ground evaluation -------------------------------------------------------------

_EVAL_ERRORS = (
    KindError,
    OutsideDomainError,
    AmbiguousApplicationError,
    RangeError,
    MissingFieldError,
)


def _ground_term(t: Term, env):
    if isinstance(t, Lit):
        return t.value
    if isinstance(t, Var):
        v = env.get(t.name)
        if v is None:
            raise _Defer()
        v = resolve(v, env)
        if not isinstance(v, Value):
            raise _Defer()
        return v
    if isinstance(t, TupT):
        return TupV([_ground_term(e, env) for e in t.elems])
    if isinstance(t, SeqT):
        return SeqV([_ground_term(e, env) for e in t.elems])
    if isinstance(t, SetT):
        if t.tail is not None:
            raise _Defer()
        return SetV([_ground_term(e, env) for e in t.elems])
    raise _Defer()


def _ground_constraint(c: Constraint, env) -> bool:
    kind = c.kind
    if kind in ("eq", "neq"):
        want = kind == "eq"
        for one, other in ((c.args[0], c.args[1]), (c.args[1], c.args[0])):
            if isinstance(one, RisT):
                got = _ris_value(one, env)
                if got is _FAIL:
                    return not want
                if got is None:
                    raise _Defer()
                return (got == _ground_term(other, env)) == want
            if isinstance(one, SetT) and one.tail is not None:
                s = _ground_term(other, env)
                elems = SetV([_ground_term(e, env) for e in one.elems])
                tail = _ground_term(one.tail, env)
                if not isinstance(s, SetV) or not isinstance(tail, SetV):
                    return not want
                holds = (
                    s == kernel.union(elems, tail)
                    and all(e not in tail for e in elems.elems)
                )
                return holds == want
        a = _ground_term(c.args[0], env)
        b = _ground_term(c.args[1], env)
        return (a == b) == want
    args = [_ground_term(a, env) for a in c.args]
    try:
        if kind == "in":
            return isinstance(args[1], SetV) and args[0] in args[1]
        if kind == "nin":
            return isinstance(args[1], SetV) and args[0] not in args[1]
        if kind == "un":
            return kernel.union(args[0], args[1]) == args[2]
        if kind == "diff":
            return kernel.difference(args[0], args[1]) == args[2]
        if kind == "inters":
            return kernel.intersection(args[0], args[1]) == args[2]
        if kind == "disj":
            return kernel.disjoint(args[0], args[1])
        if kind == "ndisj":
            return not kernel.disjoint(args[0], args[1])
        if kind == "subset":
            return kernel.subset(args[0], args[1])
        if kind == "nsubset":
            return not kernel.subset(args[0], args[1])
        if kind == "dom":
            return kernel.dom(args[0]) == args[1]
        if kind == "ran":
            return kernel.ran(args[0]) == args[1]
        if kind == "apply":
            # as a constraint, application is functional at the point: the
            # kernel operation's global-function precondition is not imposed
            f, x, y = args
            if not isinstance(f, SetV) or not all(is_pair(p) for p in f.elems):
                return False
            matches = [p.elems[1] for p in f.elems if p.elems[0] == x]
            return len(matches) == 1 and matches[0] == y
        if kind == "oplus":
            return kernel.override(args[0], args[1]) == args[2]
        if kind == "dres":
            return kernel.dres(args[0], args[1]) == args[2]
        if kind == "pfun":
            return kernel.is_pfun(args[0])
        if kind == "npfun":
            return not kernel.is_pfun(args[0])
        if kind == "seq_head":
            return kernel.seq_head(args[0]) == args[1]
        if kind == "seq_tail":
            return kernel.seq_tail(args[0]) == args[1]
        if kind == "seq_concat":
            return kernel.seq_concat(args[0], args[1]) == args[2]
        if kind == "seq_nth":
            if not isinstance(args[1], IntV):
                return False
            return kernel.seq_nth(args[0], args[1].n) == args[2]
        if kind in ("plus", "minus", "times", "intdiv", "le", "lt"):
            if not all(isinstance(a, IntV) for a in args):
                return False
            ns = [a.n for a in args]
            if kind == "plus":
                return ns[0] + ns[1] == ns[2]
            if kind == "minus":
                return ns[0] - ns[1] == ns[2]
            if kind == "times":
                return ns[0] * ns[1] == ns[2]
            if kind == "intdiv":
                return ns[1] != 0 and ns[0] // ns[1] == ns[2]
            if kind == "le":
                return ns[0] <= ns[1]
            return ns[0] < ns[1]
    except _EVAL_ERRORS:
        return False
    raise FormulaError(f"no ground rule for kind {kind!r}")


def eval_ground_formula(f: Formula, assignment: dict, partial_ok: bool = False):
    """Evaluate a formula under a (ground) assignment via the kernel.

    Returns a bool; with partial_ok=True an undecidable formula yields None
    instead of raising.  This is the direct evaluation route used to
    re-check every witness the search produces.
    """
    unknown = False
    for d in f.disjuncts:
        try:
            if all(_ground_constraint(c, assignment) for c in d):
                return True
        except _Defer:
            unknown = True
    if unknown:
        if partial_ok:
            return None
        raise SetforgeError("assignment does not ground the formula")
    return False


# -- compilation: lift nested comprehensions and open extensions -------------------


def _collect_var_names(constraints):
    """Every variable name occurring syntactically, binders included."""
    names = set()

    def term(t):
        if isinstance(t, Var):
            names.add(t.name)
        elif isinstance(t, (TupT, SeqT)):
            for e in t.elems:
                term(e)
        elif isinstance(t, SetT):
            for e in t.elems:
                term(e)
            if t.tail is not None:
                term(t.tail)
        elif isinstance(t, RisT):
            names.add(t.binder)
            term(t.domain)
            for d in t.filter.disjuncts:
                for c in d:
                    for a in c.args:
                        term(a)
            term(t.pattern)

    for c in constraints:
        for a in c.args:
            term(a)
    return names


def _free_names(constraints):
    """Free variables of a conjunction in first-occurrence order; the
    binder-scoped occurrences inside comprehensions do not count."""
    seen = set()
    order = []

    def term(t, bound):
        if isinstance(t, Var):
            if t.name not in bound and t.name not in seen:
                seen.add(t.name)
                order.append(t.name)
        elif isinstance(t, (TupT, SeqT)):
            for e in t.elems:
                term(e, bound)
        elif isinstance(t, SetT):
            for e in t.elems:
                term(e, bound)
            if t.tail is not None:
                term(t.tail, bound)
        elif isinstance(t, RisT):
            term(t.domain, bound)
            inner = bound | {t.binder}
            for d in t.filter.disjuncts:
                for c in d:
                    for a in c.args:
                        term(a, inner)
            term(t.pattern, inner)

    for c in constraints:
        for a in c.args:
            term(a, frozenset())
    return order


def _compile_conjunct(constraints):
    """Replace comprehensions and open extensions that sit in non-equation
    positions by fresh variables defined through equations."""
    used = _collect_var_names(constraints)
    counter = itertools.count(1)

    def fresh():
        while True:
            name = f"_E{next(counter)}"
            if name not in used:
                used.add(name)
                return name

    out = []

    def walk(t, defs):
        if isinstance(t, (Var, Lit)):
            return t
        if isinstance(t, TupT):
            return TupT([walk(e, defs) for e in t.elems])
        if isinstance(t, SeqT):
            return SeqT([walk(e, defs) for e in t.elems])
        if isinstance(t, SetT):
            elems = [walk(e, defs) for e in t.elems]
            if t.tail is None:
                return SetT(elems)
            name = fresh()
            defs.append(Constraint("eq", (Var(name), SetT(elems, walk(t.tail, defs)))))
            return Var(name)
        if isinstance(t, RisT):
            name = fresh()
            defs.append(
                Constraint("eq", (Var(name), RisT(t.binder, walk(t.domain, defs), t.filter, t.pattern)))
            )
            return Var(name)
        raise FormulaError(f"not a term: {t!r}")

    for c in constraints:
        defs = []
        if c.kind in ("eq", "neq"):
            new_args = []
            for a in c.args:
                if isinstance(a, RisT):
                    new_args.append(RisT(a.binder, walk(a.domain, defs), a.filter, a.pattern))
                elif isinstance(a, SetT) and a.tail is not None:
                    new_args.append(SetT([walk(e, defs) for e in a.elems], walk(a.tail, defs)))
                else:
                    new_args.append(walk(a, defs))
            out.extend(defs)
            out.append(Constraint(c.kind, new_args))
        else:
            new_args = [walk(a, defs) for a in c.args]
            out.extend(defs)
            out.append(Constraint(c.kind, new_args))
    return out


# -- sort inference -----------------------------------------------------------------

_SET_POSITIONS = {
    "un": (0, 1, 2),
    "diff": (0, 1, 2),
    "inters": (0, 1, 2),
    "disj": (0, 1),
    "ndisj": (0, 1),
    "subset": (0, 1),
    "nsubset": (0, 1),
    "in": (1,),
    "nin": (1,),
    "dres": (0,),
}
_REL_POSITIONS = {
    "dom": (0,),
    "ran": (0,),
    "oplus": (0, 1, 2),
    "dres": (1, 2),
    "apply": (0,),
    "pfun": (0,),
    "npfun": (0,),
}
_INT_POSITIONS = {
    "plus": (0, 1, 2),
    "minus": (0, 1, 2),
    "times": (0, 1, 2),
    "intdiv": (0, 1, 2),
    "le": (0, 1),
    "lt": (0, 1),
    "seq_nth": (1,),
}
_SEQ_POSITIONS = {
    "seq_head": (0,),
    "seq_tail": (0, 1),
    "seq_concat": (0, 1, 2),
    "seq_nth": (0,),
}


def _infer_sorts(constraints, declared):
    sorts = dict(declared)

    def note(term, sort):
        if isinstance(term, Var) and term.name not in sorts:
            sorts[term.name] = sort

    def walk_patterns(t):
        if isinstance(t, SetT):
            if t.tail is not None:
                note(t.tail, SetS(AnyS()))
                walk_patterns(t.tail)
            for e in t.elems:
                walk_patterns(e)
        elif isinstance(t, (TupT, SeqT)):
            for e in t.elems:
                walk_patterns(e)
        elif isinstance(t, RisT):
            note(t.domain, SetS(AnyS()))
            walk_patterns(t.domain)

    for c in constraints:
        for pos in _REL_POSITIONS.get(c.kind, ()):
            note(c.args[pos], RelS(AnyS(), AnyS()))
        for pos in _SET_POSITIONS.get(c.kind, ()):
            note(c.args[pos], SetS(AnyS()))
        for pos in _INT_POSITIONS.get(c.kind, ()):
            note(c.args[pos], IntS())
        for pos in _SEQ_POSITIONS.get(c.kind, ()):
            note(c.args[pos], SeqS(AnyS()))
        for a in c.args:
            walk_patterns(a)
    return sorts


# -- search -------------------------------------------------------------------------


class _Budget(Exception):
    pass


class _Stuck(Exception):
    pass


class _State:
    __slots__ = ("scope", "registry", "budget", "nodes", "fresh_counter", "used_names",
                 "validate")

    def __init__(self, scope, registry, budget, used_names, validate=None):
        self.scope = scope
        self.registry = registry  # ordered: var -> Sort
        self.budget = budget
        self.nodes = 0
        self.fresh_counter = itertools.count(1)
        self.used_names = used_names
        # caller-declared sorts define the in-scope universe of their
        # variables: a propagated binding outside it fails the branch
        self.validate = validate or {}

    def tick(self):
        self.nodes += 1
        if self.nodes > self.budget:
            raise _Budget()

    def fresh(self, sort):
        while True:
            name = f"_H{next(self.fresh_counter)}"
            if name not in self.used_names:
                self.used_names.add(name)
                self.registry[name] = sort
                return name


def _sort_candidates(sort, st):
    """Yield (pval, ()) decisions for a variable of the given sort.  Record,
    tuple and relation sorts produce structural templates whose open slots
    are fresh registered variables, so only the parts a constraint actually
    examines get enumerated."""
    scope = st.scope
    if isinstance(sort, RecordS):
        elems = []
        for fname, fsort in sort.fields:
            hole = st.fresh(fsort)
            elems.append(PTup((Atom(fname, "field"), PHole(hole))))
        yield PSet(elems)
        return
    if isinstance(sort, TupleS):
        yield PTup(tuple(PHole(st.fresh(s)) for s in sort.elems))
        return
    if isinstance(sort, RelS):
        # key multisets: repeated keys with open values cover the relations
        # that are not partial functions
        keys = list(enumerate_sort(sort.key, scope))
        for card in range(0, scope.max_set_card + 1):
            for combo in itertools.combinations_with_replacement(keys, card):
                elems = [PTup((k, PHole(st.fresh(sort.val)))) for k in combo]
                yield PSet(elems) if elems else SetV(())
        return
    yield from enumerate_sort(sort, scope)


def _in_declared_universe(env, st):
    for var, sort in st.validate.items():
        if var in env:
            val = resolve(PHole(var), env)
            if isinstance(val, Value) and not sort_contains(sort, val, st.scope):
                return False
    return True


_PLACE_A, _PLACE_B, _PLACE_BOTH = 0, 1, 2


def _pending_holes(pending, env):
    """Unbound variables the pending constraints can still observe."""
    out = []
    seen = set()

    def note(name):
        if name not in seen:
            seen.add(name)
            out.append(name)

    for c in pending:
        for name in _free_names([c]):
            root = _walk(PHole(name), env)
            if isinstance(root, PHole):
                note(root.var)
            else:
                for h in sorted(holes_of(resolve(root, env))):
                    note(h)
    return out


def _pick_decision(env, pending, st):
    for c in pending:
        if c.kind == "in":
            try:
                x = term_pval(c.args[0], env)
                s = term_pval(c.args[1], env)
            except _Defer:
                continue
            if isinstance(s, SetV) and isinstance(x, PHole):
                return ("member", c, x, s)
        if c.kind == "un":
            try:
                a = term_pval(c.args[0], env)
                b = term_pval(c.args[1], env)
                out = term_pval(c.args[2], env)
            except _Defer:
                continue
            if isinstance(out, SetV) and not (isinstance(a, Value) and isinstance(b, Value)):
                return ("split", c, a, b, out)
    live = _pending_holes(pending, env)
    order = {name: i for i, name in enumerate(st.registry)}
    live = [v for v in live if v in order]
    if not live:
        return None
    # a bare variable equated to a comprehension or an open extension is
    # determined by the pattern's inputs; decide those first
    defined = set()
    for c in pending:
        if c.kind == "eq":
            for one, other in ((c.args[0], c.args[1]), (c.args[1], c.args[0])):
                if isinstance(one, Var) and (
                    isinstance(other, RisT)
                    or (isinstance(other, SetT) and other.tail is not None)
                ):
                    root = _walk(PHole(one.name), env)
                    if isinstance(root, PHole):
                        defined.add(root.var)
    preferred = [v for v in live if v not in defined]
    pool = preferred or live
    var = min(pool, key=lambda v: order[v])
    return ("enumerate", var)


def _search(env, pending, st):
    # propagation to fixpoint: evaluate every pending constraint, keep the
    # undecided ones, repeat while bindings or discharges happen
    pending = list(pending)
    while True:
        before = len(env)
        keep = []
        for c in pending:
            r = _eval_constraint(c, env)
            if r == _FALSE:
                return None
            if r == _DEFER:
                keep.append(c)
        progressed = len(keep) != len(pending) or len(env) != before
        pending = keep
        if not _in_declared_universe(env, st):
            return None
        if not pending or not progressed:
            break
    if not pending:
        return env
    decision = _pick_decision(env, pending, st)
    if decision is None:
        raise _Stuck(
            "constraints left undecided with no enumerable variable: "
            + ", ".join(c.kind for c in pending)
        )
    if decision[0] == "member":
        _, c, x, s = decision
        for elem in s.elems:
            st.tick()
            child = dict(env)
            child[x.var] = elem
            r = _search(child, pending, st)
            if r is not None:
                return r
        return None
    if decision[0] == "split":
        _, c, a, b, out = decision
        for combo in itertools.product((_PLACE_A, _PLACE_B, _PLACE_BOTH), repeat=len(out.elems)):
            st.tick()
            child = dict(env)
            left = SetV([e for e, w in zip(out.elems, combo) if w != _PLACE_B], _canonical=True)
            right = SetV([e for e, w in zip(out.elems, combo) if w != _PLACE_A], _canonical=True)
            if unify(a, left, child) == _FAIL:
                continue
            if unify(b, right, child) == _FAIL:
                continue
            r = _search(child, pending, st)
            if r is not None:
                return r
        return None
    _, var = decision
    sort = st.registry.get(var) or AnyS()
    for cand in _sort_candidates(sort, st):
        st.tick()
        child = dict(env)
        child[var] = cand
        r = _search(child, pending, st)
        if r is not None:
            return r
    # fresh vars registered by abandoned candidates stay in the registry:
    # they are unreachable, and keeping it append-only keeps runs identical
    return None


# -- public api ----------------------------------------------------------------------


def _prepare(disjunct, declared_sorts):
    constraints = _compile_conjunct(list(disjunct))
    original = free_vars(Formula((tuple(disjunct),)))
    sorts = _infer_sorts(constraints, declared_sorts)
    registry = {}
    for v in original:
        registry[v] = sorts.get(v) or AnyS()
    for v in _free_names(constraints):
        if v not in registry:
            registry[v] = sorts.get(v) or AnyS()
    return constraints, registry, original


def _complete(env, constraints, original, st):
    """Ground every variable the compiled constraints or the caller can see."""
    todo = list(original)
    todo.extend(v for v in _free_names(constraints) if v not in todo)
    for v in todo:
        root = _walk(PHole(v), env)
        if isinstance(root, PHole):
            sort = st.registry.get(root.var) or AnyS()
            env[root.var] = first_value(sort, st.scope)
    # fill structural holes left inside bound values
    changed = True
    while changed:
        changed = False
        for v in todo:
            val = resolve(PHole(v), env)
            for h in sorted(holes_of(val)):
                root = _walk(PHole(h), env)
                if isinstance(root, PHole):
                    sort = st.registry.get(root.var) or AnyS()
                    env[root.var] = first_value(sort, st.scope)
                    changed = True
    return env


def solve(f: Formula, scope: Scope = DEFAULT_SCOPE, sorts=None, budget: int = DEFAULT_BUDGET):
    """Find a witness for f within the scope, or establish there is none.

    Enumeration order is fixed (atoms in namespace order, integers
    ascending, sets by cardinality then element order), so identical inputs
    give identical answers.  Unsat is scope-relative.
    """
    declared = dict(sorts or {})
    unknown = None
    for disjunct in f.disjuncts:
        constraints, registry, original = _prepare(disjunct, declared)
        st = _State(scope, registry, DEFAULT_BUDGET if budget is None else budget,
                    set(registry), validate=declared)
        try:
            env = _search({}, constraints, st)
        except _Budget:
            unknown = Unknown(f"search budget exceeded ({st.budget} decision nodes)")
            continue
        except _Stuck as e:
            unknown = Unknown(str(e))
            continue
        if env is None:
            continue
        _complete(env, constraints, original, st)
        assignment = {}
        for name in st.registry:
            val = resolve(PHole(name), env)
            if isinstance(val, Value):
                assignment[name] = val
        witness = {}
        for name in original:
            val = resolve(PHole(name), env)
            if not isinstance(val, Value):
                raise SetforgeError(f"internal: witness for {name} is not ground: {val!r}")
            witness[name] = val
        ok = eval_ground_formula(Formula((tuple(constraints),)), assignment, partial_ok=True)
        if ok is not True:
            raise SetforgeError(
                f"internal: witness failed direct re-evaluation: {witness!r}"
            )
        return Sat(witness)
    return unknown if unknown is not None else Unsat()


def check_unsat(f: Formula, scope: Scope = DEFAULT_SCOPE, sorts=None, budget: int = DEFAULT_BUDGET):
    """(True, None) when no model exists in scope; (False, witness) otherwise."""
    r = solve(f, scope, sorts=sorts, budget=budget)
    if isinstance(r, Unsat):
        return True, None
    if isinstance(r, Sat):
        return False, r.witness
    raise UnknownOutcome(r.reason)


def prove_implication(
    hyp: Formula,
    concl: Formula,
    scope: Scope = DEFAULT_SCOPE,
    sorts=None,
    budget: int = DEFAULT_BUDGET,
):
    """Discharge hyp => concl by showing hyp & not(concl) has no model."""
    refutation = conj_formulas([hyp, negate(concl)])
    unsat, witness = check_unsat(refutation, scope, sorts=sorts, budget=budget)
    if unsat:
        return Verified(scope)
    return Counterexample(witness)
