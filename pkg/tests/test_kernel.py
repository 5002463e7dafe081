import itertools

import pytest
from hypothesis import given

from conftest import values_st
from setforge import kernel as K
from setforge.errors import (
    AmbiguousApplicationError,
    KindError,
    MissingFieldError,
    OutsideDomainError,
    RangeError,
)
from setforge.values import EMPTY_SET, SetV, atom, intv, tup, vseq, vset

a1, a2, a3 = atom("a1"), atom("a2"), atom("a3")
s_, t_, acc1 = atom("s"), atom("t"), atom("acc1")
AS = atom("as")


def rel(*pairs):
    return vset([tup(x, y) for x, y in pairs])


# -- the two kernel backends must agree ------------------------------------------


def _backends():
    from setforge import _kernel_py

    mods = [_kernel_py]
    try:
        from setforge import _kernel_c

        mods.append(_kernel_c)
    except ImportError:
        pass
    return mods


@pytest.mark.parametrize("impl", _backends(), ids=lambda m: m.BACKEND_NAME)
def test_backend_primitives(impl, gen):
    for _ in range(200):
        a = gen.value_set()
        b = gen.value_set()
        assert impl.canon(list(a.elems) + list(a.elems)) == a.elems
        assert set(impl.union(a.elems, b.elems)) == set(a.elems) | set(b.elems)
        assert set(impl.difference(a.elems, b.elems)) == set(a.elems) - set(b.elems)
        assert set(impl.intersection(a.elems, b.elems)) == set(a.elems) & set(b.elems)
        for v in list(a.elems) + list(b.elems):
            assert impl.member(a.elems, v) == (v in set(a.elems))
        r = gen.relation()
        assert set(impl.dom_elems(r.elems)) == {p.elems[0] for p in r.elems}
        assert impl.is_pfun_elems(r.elems) == (
            len({p.elems[0] for p in r.elems}) == len(r.elems)
        )


def test_backends_agree_pairwise(gen):
    mods = _backends()
    if len(mods) < 2:
        pytest.skip("compiled kernel not built")
    py, c = mods
    for _ in range(300):
        r = gen.relation()
        g = gen.relation()
        d = gen.value_set()
        assert py.override_elems(r.elems, g.elems) == c.override_elems(r.elems, g.elems)
        assert py.dres_elems(d.elems, r.elems) == c.dres_elems(d.elems, r.elems)
        assert py.ran_elems(r.elems) == c.ran_elems(r.elems)


# -- union / difference ------------------------------------------------------------


def test_union_examples():
    assert K.union(EMPTY_SET, EMPTY_SET) == EMPTY_SET
    assert K.union(vset([a1]), vset([a1, a2])) == vset([a1, a2])
    assert K.union(vset([a1, a2]), vset([a1, a3])) == vset([a1, a2, a3])


def test_difference_examples():
    assert K.difference(vset([a1, a3]), vset([a1, a2])) == vset([a3])
    x = vset([a1, a3])
    assert K.difference(x, EMPTY_SET) == x
    assert K.difference(EMPTY_SET, x) == EMPTY_SET


def test_set_ops_reject_non_sets():
    with pytest.raises(KindError):
        K.union(a1, EMPTY_SET)
    with pytest.raises(KindError):
        K.difference(EMPTY_SET, intv(3))


# -- relations ----------------------------------------------------------------------


def test_dom_examples():
    assert K.dom(EMPTY_SET) == EMPTY_SET
    assert K.dom(rel((s_, acc1))) == vset([s_])
    assert K.dom(rel((atom("a"), intv(1)), (atom("a"), intv(2)), (atom("b"), intv(3)))) == vset(
        [atom("a"), atom("b")]
    )


def test_dom_rejects_non_pairs():
    with pytest.raises(KindError):
        K.dom(vset([a1]))
    with pytest.raises(KindError):
        K.dom(vset([tup(a1, a2, a3)]))


def test_override_examples():
    A0, A1, B = atom("u1"), atom("u2"), atom("u3")
    assert K.override(EMPTY_SET, EMPTY_SET) == EMPTY_SET
    assert K.override(rel((s_, A0)), rel((s_, A1))) == rel((s_, A1))
    assert K.override(rel((s_, A0), (t_, B)), rel((s_, A1))) == rel((s_, A1), (t_, B))


def test_dres_examples():
    r = rel((intv(1), atom("u1")), (intv(3), atom("u3")))
    assert K.dres(EMPTY_SET, r) == EMPTY_SET
    assert K.dres(vset([intv(1), intv(2)]), r) == rel((intv(1), atom("u1")))
    m = rel(*[(intv(i), intv(i % 7)) for i in range(128)])
    window = vset([intv(i) for i in range(64)])
    assert K.dres(window, m) == rel(*[(intv(i), intv(i % 7)) for i in range(64)])


def test_apply_examples():
    f = rel((s_, acc1))
    assert K.apply(f, s_) == acc1
    with pytest.raises(OutsideDomainError):
        K.apply(f, t_)
    accmap = rel((a1, atom("u1")), (a2, atom("u2")))
    assert K.apply(accmap, a2) == atom("u2")
    with pytest.raises(AmbiguousApplicationError):
        K.apply(rel((s_, acc1), (s_, atom("u9"))), s_)


def test_is_pfun_examples():
    assert K.is_pfun(EMPTY_SET)
    assert K.is_pfun(rel((atom("a"), intv(1)), (atom("b"), intv(1))))
    assert not K.is_pfun(rel((atom("a"), intv(1)), (atom("a"), intv(2))))


# -- comprehension -------------------------------------------------------------------


def test_ris_examples():
    got = K.ris_eval(
        vset([a1, a2]), lambda a: True, lambda a: tup(atom("this"), a, atom("connectMsg"))
    )
    assert got == vset(
        [tup(atom("this"), a1, atom("connectMsg")), tup(atom("this"), a2, atom("connectMsg"))]
    )
    assert K.ris_eval(EMPTY_SET, lambda a: True, lambda a: a) == EMPTY_SET
    nums = vset([intv(1), intv(2), intv(3)])
    assert K.ris_eval(nums, lambda n: n.n > 1, lambda n: n) == vset([intv(2), intv(3)])


@given(values_st(max_leaves=8))
def test_ris_is_filter_map_dedupe(v):
    if not isinstance(v, SetV):
        v = vset([v])
    flt = lambda x: isinstance(x, type(v.elems[0])) if v.elems else True
    pat = lambda x: tup(x, intv(0))
    expect = SetV([pat(x) for x in v.elems if flt(x)])
    assert K.ris_eval(v, flt, pat) == expect


# -- sequences ------------------------------------------------------------------------


def test_stack_shuffle_example():
    s = vseq([intv(5), intv(0), intv(64), intv(7)])
    rest = K.seq_tail(K.seq_tail(K.seq_tail(s)))
    assert rest == vseq([intv(7)])
    assert K.seq_concat(vseq([intv(0)]), rest) == vseq([intv(0), intv(7)])


def test_seq_edges():
    s = vseq([a1])
    assert K.seq_concat(vseq(), s) == s
    assert K.seq_nth(vseq([intv(5), intv(0), intv(64)]), 2) == intv(0)
    with pytest.raises(RangeError):
        K.seq_tail(vseq())
    with pytest.raises(RangeError):
        K.seq_nth(s, 2)
    with pytest.raises(RangeError):
        K.seq_nth(s, 0)


# -- records ---------------------------------------------------------------------------


def test_record_examples():
    r = vset([tup(AS, EMPTY_SET), tup(atom("bf"), EMPTY_SET), tup(atom("tp"), EMPTY_SET)])
    assert K.record_get(r, AS) == EMPTY_SET
    r2 = K.record_set(r, AS, vset([a1, a2]))
    assert K.record_get(r2, AS) == vset([a1, a2])
    assert K.record_set(vset([tup(AS, EMPTY_SET)]), AS, vset([a1, a2])) == vset(
        [tup(AS, vset([a1, a2]))]
    )
    with pytest.raises(MissingFieldError):
        K.record_get(r, atom("acc"))


def test_record_set_preserves_other_fields(gen):
    for _ in range(50):
        fields = [atom("as"), atom("bf"), atom("tp")]
        r = vset([tup(f, gen.value(1)) for f in fields])
        v = gen.value(1)
        r2 = K.record_set(r, fields[0], v)
        assert K.record_get(r2, fields[0]) == v
        for f in fields[1:]:
            assert K.record_get(r2, f) == K.record_get(r, f)


# -- algebraic properties (brute force over a 3-atom universe) --------------------------


def _all_sets(universe, maxcard=None):
    maxcard = len(universe) if maxcard is None else maxcard
    for k in range(maxcard + 1):
        for combo in itertools.combinations(universe, k):
            yield vset(combo)


def test_set_algebra_brute_force():
    u = [a1, a2, a3]
    for A in _all_sets(u):
        for B in _all_sets(u):
            assert K.union(A, B) == K.union(B, A)
            assert K.subset(K.difference(A, B), A)
            assert K.disjoint(K.difference(A, B), B)


def test_override_laws_brute_force():
    pairs = [tup(a, v) for a in (a1, a2) for v in (intv(0), intv(1))]
    rels = [vset(c) for k in range(3) for c in itertools.combinations(pairs, k)]
    for R in rels:
        for G in rels:
            O = K.override(R, G)
            assert K.dom(O) == K.union(K.dom(R), K.dom(G))
            for x in K.dom(G):
                if K.is_pfun(G) and K.is_pfun(O):
                    assert K.apply(O, x) == K.apply(G, x)
            for x in K.difference(K.dom(R), K.dom(G)):
                if K.is_pfun(R) and K.is_pfun(O):
                    assert K.apply(O, x) == K.apply(R, x)
            if K.is_pfun(R) and K.is_pfun(G):
                assert K.is_pfun(O)


@given(values_st(max_leaves=8), values_st(max_leaves=8))
def test_union_difference_oracle(x, y):
    A = x if isinstance(x, SetV) else vset([x])
    B = y if isinstance(y, SetV) else vset([y])
    assert set(K.union(A, B).elems) == set(A.elems) | set(B.elems)
    assert set(K.difference(A, B).elems) == set(A.elems) - set(B.elems)
    assert set(K.intersection(A, B).elems) == set(A.elems) & set(B.elems)
