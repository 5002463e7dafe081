import itertools

import pytest

from setforge import speclang as S
from setforge.formula import C, Formula, Var, conj, free_vars, negate
from setforge.solver import (
    Counterexample,
    Sat,
    Unknown,
    Unsat,
    UnknownOutcome,
    Verified,
    check_unsat,
    eval_ground_formula,
    prove_implication,
    solve,
)
from setforge.universe import AtomS, AnyS, IntS, Scope, SetS, enumerate_sort
from setforge.values import atom, vset

TINY = Scope(atoms_per_namespace=2, int_lo=0, int_hi=3, max_set_card=2, max_seq_len=2)


def F(src):
    return S.parse_formula(src)


# -- examples ---------------------------------------------------------------------


def test_union_into_fresh_state():
    r = solve(F("As = {} & un(As,{a1,a2},As_)"))
    assert isinstance(r, Sat)
    assert r.witness["As_"] == vset([atom("a1"), atom("a2")])


def test_plain_contradiction():
    assert isinstance(solve(F("X = {} & X neq {}")), Unsat)


def test_split_with_disjointness_first_witness():
    r = solve(F("un(A,B,{a1}) & disj(A,B)"), Scope(atoms_per_namespace=1))
    assert isinstance(r, Sat)
    assert r.witness["A"] == vset([atom("a1")])
    assert r.witness["B"] == vset([])


def test_check_unsat_examples():
    assert check_unsat(F("pfun({[a1,1],[a1,2]})"))[0] is True
    ok, witness = check_unsat(F("X = X"))
    assert ok is False and "X" in witness


def test_solver_is_deterministic():
    f = F("un(A,B,{a1,a2}) & in(a1,A)")
    r1 = solve(f, TINY)
    r2 = solve(f, TINY)
    assert r1 == r2


def test_budget_exhaustion_reports_unknown():
    f = F("un(A,B,C) & ndisj(A,B) & disj(A,C)")
    r = solve(f, budget=3)
    assert isinstance(r, Unknown)
    with pytest.raises(UnknownOutcome):
        check_unsat(f, budget=3)


def test_witnesses_satisfy_direct_evaluation():
    corpus = [
        "un(A,B,{a1,a2}) & diff(A,B,D) & in(a1,D)",
        "oplus(R,{[a1,0]},O) & pfun(R) & neq(R,{})",
        "plus(X,Y,5) & lt(X,Y)",
        "seq_concat(A,seq([1]),seq([2,1]))",
        "dres(D,{[1,a1],[2,a2]},O) & neq(O,{}) & neq(O,{[1,a1],[2,a2]})",
    ]
    for src in corpus:
        f = F(src)
        r = solve(f, TINY)
        assert isinstance(r, Sat), src
        assert eval_ground_formula(f, r.witness) is True, src


# -- negation -----------------------------------------------------------------------


def test_negate_swaps_duals():
    f = conj([C("pfun", Var("F"))])
    assert negate(f) == conj([C("npfun", Var("F"))])


def test_negate_de_morgan():
    f = F("A = B & in(x1,A)")
    n = negate(f)
    assert len(n.disjuncts) == 2
    kinds = sorted(d[0].kind for d in n.disjuncts)
    assert kinds == ["neq", "nin"]


def test_negate_functional_constraint_uses_fresh_result():
    f = F("un(A,B,C)")
    n = negate(f)
    ((c1, c2),) = n.disjuncts
    assert c1.kind == "un" and c2.kind == "neq"
    fresh = c1.args[2]
    assert fresh not in (Var("A"), Var("B"), Var("C"))


def test_double_negation_equisatisfiable():
    corpus = [
        "un(A,B,{a1}) & disj(A,B)",
        "pfun({[a1,1],[a1,2]})",
        "in(X,{a1,a2}) & X neq a1",
        "le(X,1) & lt(1,X)",
    ]
    for src in corpus:
        f = F(src)
        once = solve(f, TINY)
        twice = solve(negate(negate(f)), TINY)
        assert isinstance(once, Sat) == isinstance(twice, Sat), src


# -- implications ----------------------------------------------------------------------


def test_trivial_counterexample():
    r = prove_implication(Formula(((),)), Formula(()), TINY)
    assert isinstance(r, Counterexample)


def test_receive_with_no_known_peers_learns_exactly_the_payload():
    hyp = F(
        "As = {} & un(As,Asm,As_) & diff(Asm,As,D) & "
        "PsD = ris(A in D,[],true,[this,A,connectMsg]) & "
        "PsAs = ris(A in As,[],true,[this,A,addrMsg(As_)]) & un(PsD,PsAs,Ps)"
    )
    concl = F("As_ = Asm")
    sorts = {"Asm": SetS(AtomS("addr")), "As": SetS(AtomS("addr"))}
    r = prove_implication(hyp, concl, TINY, sorts=sorts)
    assert isinstance(r, Verified)


def test_implication_counterexample_carries_witness():
    hyp = F("un(A,B,C)")
    concl = F("subset(A,B)")
    sorts = {"A": SetS(AtomS("addr")), "B": SetS(AtomS("addr")), "C": SetS(AtomS("addr"))}
    r = prove_implication(hyp, concl, TINY, sorts=sorts)
    assert isinstance(r, Counterexample)
    assert not eval_ground_formula(concl, r.witness)


# -- bounded completeness against a brute-force enumerator ------------------------------


def brute_force_sat(f, scope, sorts):
    """Independent oracle: enumerate every assignment of the declared
    variables and evaluate directly."""
    names = free_vars(f)
    universes = [list(enumerate_sort(sorts[n], scope)) for n in names]
    for combo in itertools.product(*universes):
        if eval_ground_formula(f, dict(zip(names, combo))) is True:
            return True
    return False


ORACLE_CORPUS = [
    ("un(A,B,{a1,a2}) & disj(A,B) & neq(A,{})", {"A": SetS(AtomS("addr")), "B": SetS(AtomS("addr"))}),
    ("diff(A,B,A) & ndisj(A,B)", {"A": SetS(AtomS("addr")), "B": SetS(AtomS("addr"))}),
    ("subset(A,B) & subset(B,A) & neq(A,B)", {"A": SetS(AtomS("addr")), "B": SetS(AtomS("addr"))}),
    ("plus(X,Y,Z) & lt(Z,X)", {"X": IntS(), "Y": IntS(), "Z": IntS()}),
    ("times(X,X,Y) & lt(X,Y) & lt(Y,4)", {"X": IntS(), "Y": IntS()}),
    ("in(X,{a1,a2}) & nin(X,{a2,a3})", {"X": AtomS("addr")}),
    ("oplus(R,G,R) & neq(G,{})", {"R": SetS(AnyS()), "G": SetS(AnyS())}),
    ("dom(R,D) & subset(D,{a1}) & ndisj(D,{a2})", {"R": SetS(AnyS()), "D": SetS(AtomS("addr"))}),
]


@pytest.mark.parametrize("src,sorts", ORACLE_CORPUS, ids=range(len(ORACLE_CORPUS)))
def test_bounded_completeness_matches_brute_force(src, sorts):
    scope = Scope(atoms_per_namespace=2, int_lo=0, int_hi=3, max_set_card=2, max_seq_len=2)
    f = F(src)
    expected = brute_force_sat(f, scope, sorts)
    got = solve(f, scope, sorts=sorts)
    assert isinstance(got, Sat) == expected, src
    if expected:
        assert eval_ground_formula(f, got.witness) is True


def test_unsat_means_no_model_in_scope():
    # exhaustively confirm a nontrivial unsat verdict
    scope = TINY
    f = F("un(A,B,C) & disj(A,C) & neq(A,{})")
    sorts = {"A": SetS(AtomS("addr")), "B": SetS(AtomS("addr")), "C": SetS(AtomS("addr"))}
    assert isinstance(solve(f, scope, sorts=sorts), Unsat)
    assert brute_force_sat(f, scope, sorts) is False


# -- randomized differential testing against the enumerator ---------------------------


class _RandomFormulas:
    """Seeded stream of small formulas over sorted variables, for
    differential testing of the search against plain enumeration."""

    SORTS = {
        "A": SetS(AtomS("addr")),
        "B": SetS(AtomS("addr")),
        "X": IntS(),
        "Y": IntS(),
        "V": AtomS("addr"),
    }

    def __init__(self, seed):
        import random

        self.rng = random.Random(seed)

    def term_for(self, var):
        r = self.rng
        if var in ("A", "B"):
            names = [["a1"], ["a2"], ["a1", "a2"], []]
            return S.parse_term("{" + ",".join(r.choice(names)) + "}")
        if var == "V":
            return S.parse_term(r.choice(["a1", "a2"]))
        return S.parse_term(str(r.randrange(0, 4)))

    def constraint(self):
        r = self.rng
        pick = r.choice(
            [
                ("un", "A", "B", "A"),
                ("un", "A", "B", "B"),
                ("diff", "A", "B", "B"),
                ("inters", "A", "B", "A"),
                ("disj", "A", "B"),
                ("ndisj", "A", "B"),
                ("subset", "A", "B"),
                ("nsubset", "B", "A"),
                ("in", "V", "A"),
                ("nin", "V", "B"),
                ("eq", "A", "B"),
                ("neq", "A", "B"),
                ("plus", "X", "Y", "X"),
                ("minus", "X", "Y", "Y"),
                ("times", "X", "Y", "Y"),
                ("le", "X", "Y"),
                ("lt", "Y", "X"),
                ("eq", "X", "Y"),
                ("neq", "X", "Y"),
            ]
        )
        kind, *vars_ = pick
        args = []
        for v in vars_:
            # half the time pin the slot to a literal instead of the variable
            args.append(Var(v) if r.random() < 0.6 else self.term_for(v))
        return C(kind, *args)

    def formula(self):
        n = self.rng.randrange(1, 4)
        return conj([self.constraint() for _ in range(n)])


def test_random_formulas_match_enumeration():
    scope = Scope(atoms_per_namespace=2, int_lo=0, int_hi=3, max_set_card=2, max_seq_len=1)
    gen = _RandomFormulas(seed=424242)
    disagreements = []
    for i in range(250):
        f = gen.formula()
        sorts = {v: gen.SORTS[v] for v in free_vars(f)}
        expected = brute_force_sat(f, scope, sorts)
        got = solve(f, scope, sorts=sorts)
        if isinstance(got, Unknown):
            disagreements.append((i, "unknown", S.print_formula(f)))
            continue
        if isinstance(got, Sat) != expected:
            disagreements.append((i, "wrong", S.print_formula(f)))
        elif expected:
            assert eval_ground_formula(f, got.witness) is True
    assert disagreements == [], disagreements[:5]


def test_open_patterns_animate_a_two_step_receive():
    """The chained walkthrough formula solves by propagation alone: open
    record patterns pin the states, everything else is derived."""
    from pathlib import Path

    src = (Path(__file__).resolve().parent.parent / "scenarios" / "rcvaddr2.slog").read_text()
    r = solve(S.parse_formula(src))
    assert isinstance(r, Sat)
    w = r.witness
    out = {k: S.print_value(v) for k, v in w.items()}
    assert out["S1"] == "{[as,{a1,a2}]}"
    assert out["S2"] == "{[as,{a1,a2,a3}]}"
    assert out["Ps1"] == "{[this,a1,connectMsg],[this,a2,connectMsg]}"
    assert out["Ps2"] == (
        "{[this,a1,addrMsg({a1,a2,a3})],[this,a2,addrMsg({a1,a2,a3})],[this,a3,connectMsg]}"
    )


def test_open_pattern_with_non_set_tail_is_unsat():
    assert isinstance(solve(F("S = {a1/R} & R = 3")), Unsat)
