import pytest
from hypothesis import given

from conftest import values_st
from setforge import speclang as S
from setforge.errors import NotGroundError, ParseError
from setforge.formula import FALSE, TRUE, Lit, RisT, SetT, TupT, Var
from setforge.values import atom, intv, tup, vseq, vset

RCVADDR_SRC = """
rcvAddr(S,P,Ps,S_) :-
  S = {[as,As] / Rest} &
  P = [_,this, addrMsg(Asm)] &
  un(As,Asm,As_) &
  diff(Asm,As,D) &
  PsD = ris(A in D,[],true,[this,A,connectMsg]) &
  PsAs = ris(A in As,[],true,[this,A,addrMsg(As_)]) &
  un(PsD,PsAs,Ps) &
  S_ = {[as,As_] / Rest}.
"""

# every value snippet quoted in the protocol walkthrough
TRACE_SNIPPETS = [
    "{a1,a2}",
    "{a2,a1,a3}",
    "[this,a3,connectMsg]",
    "{[as,{a1,a2}]}",
    "{[as,{}]}",
    "{[this,a3,connectMsg],[this,a1,addrMsg({a2,a1,a3})],[this,a2,addrMsg({a2,a1,a3})]}",
    "addrMsg({a1,a2})",
]


def test_parse_two_constraint_conjunction():
    f = S.parse_formula("un(As,Asm,As_) & diff(Asm,As,D)")
    assert len(f.disjuncts) == 1
    kinds = [c.kind for c in f.disjuncts[0]]
    assert kinds == ["un", "diff"]


def test_parse_record_pattern():
    f = S.parse_formula("S = {[as,As] / Rest}")
    (c,) = f.disjuncts[0]
    assert c.kind == "eq"
    assert c.args[0] == Var("S")
    pat = c.args[1]
    assert isinstance(pat, SetT) and pat.tail == Var("Rest")
    assert pat.elems[0] == TupT((Lit(atom("as")), Var("As")))


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as e:
        S.parse_formula("X = {")
    assert e.value.line >= 1 and e.value.col >= 1


def test_parse_values():
    assert S.parse_value("{a1,a2}") == vset([atom("a1"), atom("a2")])
    assert S.parse_value("[this,a3,connectMsg]") == tup(
        atom("this"), atom("a3"), atom("connectMsg")
    )
    rec = S.parse_value("{[as,{a1,a2}]}")
    assert rec == vset([tup(atom("as"), vset([atom("a1"), atom("a2")]))])
    assert S.parse_value("seq([5,0,64,7])") == vseq([intv(5), intv(0), intv(64), intv(7)])
    assert S.parse_value("-3") == intv(-3)


def test_value_context_rejects_variables():
    with pytest.raises(NotGroundError):
        S.parse_value("[_,this,addrMsg({a1,a2})]")
    with pytest.raises(NotGroundError):
        S.parse_value("{a1/R}")


def test_underscores_are_fresh_and_distinct():
    f = S.parse_formula("P = [_,this,addrMsg(Asm)] & Q = [_,this,connectMsg]")
    c1, c2 = f.disjuncts[0]
    v1 = c1.args[1].elems[0]
    v2 = c2.args[1].elems[0]
    assert isinstance(v1, Var) and isinstance(v2, Var) and v1.name != v2.name


def test_named_clause_file():
    clauses, main = S.parse_file(RCVADDR_SRC)
    assert main is None
    clause = clauses["rcvAddr"]
    assert clause.params == ("S", "P", "Ps", "S_")
    assert len(clause.body.disjuncts[0]) == 8


def test_disjunction_distributes():
    f = S.parse_formula("x = a1 & (pfun(F) or npfun(F))")
    assert len(f.disjuncts) == 2
    assert all(len(d) == 2 for d in f.disjuncts)


def test_ris_five_argument_output_form():
    f4 = S.parse_formula("X = ris(A in D,[],true,[this,A,connectMsg])")
    f5 = S.parse_formula("X = ris(A in D,[],true,[this,A,connectMsg],true)")
    r4 = f4.disjuncts[0][0].args[1]
    r5 = f5.disjuncts[0][0].args[1]
    assert isinstance(r4, RisT) and isinstance(r5, RisT)
    assert r5.filter.is_true()
    assert S.print_term(r5) == S.print_term(r4)


def test_true_false_parts():
    assert S.parse_formula("true") == TRUE
    assert S.parse_formula("false") == FALSE
    assert S.print_formula(TRUE) == "true"
    assert S.print_formula(FALSE) == "false"


def test_canonical_set_printing():
    assert S.print_value(S.parse_value("{a2,a1,a3}")) == "{a1,a2,a3}"
    got = S.print_value(
        S.parse_value("{[this,a3,connectMsg],[this,a1,addrMsg({a2,a1,a3})],[this,a2,addrMsg({a2,a1,a3})]}")
    )
    assert got == "{[this,a1,addrMsg({a1,a2,a3})],[this,a2,addrMsg({a1,a2,a3})],[this,a3,connectMsg]}"


def test_record_fields_print_sorted():
    v = S.parse_value("{[tp,{}],[bf,{}],[as,{a1}]}")
    assert S.print_value(v) == "{[as,{a1}],[bf,{}],[tp,{}]}"


def test_trace_snippets_round_trip():
    for src in TRACE_SNIPPETS:
        v = S.parse_value(src)
        assert S.parse_value(S.print_value(v)) == v


def test_formula_round_trip_on_clause():
    clauses, _ = S.parse_file(RCVADDR_SRC)
    body = clauses["rcvAddr"].body
    assert S.parse_formula(S.print_formula(body)) == body


def test_constraint_name_not_a_constructor():
    with pytest.raises(ParseError):
        S.parse_formula("X = un(A,B)")


@given(values_st())
def test_value_round_trip(v):
    assert S.parse_value(S.print_value(v)) == v


@given(values_st())
def test_printing_is_injective_modulo_equality(v):
    # canonical form: printing twice gives the same text
    assert S.print_value(v) == S.print_value(S.parse_value(S.print_value(v)))
