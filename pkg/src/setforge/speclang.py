"""Textual syntax for values and formulas (.slog files).

Grammar sketch:

    file    := clausedef { clausedef } | formula ["."]
    clausedef := lowerident "(" var {"," var} ")" ":-" formula "."
    formula := part { "&" part }
    part    := "(" formula "or" formula {"or" formula} ")"
             | kind "(" termlist ")" | term "=" term | term "neq" term
             | "true" | "false"
    term    := INT | "-" INT | VAR | "_"
             | lowerident [ "(" termlist ")" ]
             | "seq" "(" "[" [termlist] "]" ")"
             | "ris" "(" lowervar "in" term "," "[]" "," formula "," term
                       ["," formula] ")"
             | "[" termlist "]"
             | "{" [termlist] ["/" term] "}"

Comments run from "%" to end of line.  Variables start with an uppercase
letter or underscore; a bare "_" is a fresh anonymous variable.  Printing
is canonical: set elements in structural-key order, which also sorts record
fields alphabetically; parse(print(x)) is the identity on formulas and
ground values.
"""

from __future__ import annotations

from .errors import NotGroundError, ParseError
from .formula import (
    FALSE,
    KINDS,
    TRUE,
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
    disj_of,
)
from .values import Atom, IntV, SeqV, SetV, TupV, Value

RESERVED = {"or", "neq", "in", "ris", "seq", "true", "false"}

# Constructor atoms printed in functor style rather than as plain tuples.
_FUNCTOR_NS = {"msg"}
_FUNCTOR_NAMES = {"prog"}


class _Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"{self.kind}:{self.text!r}@{self.line}:{self.col}"


_PUNCT = {
    ":-": "DEFINE",
    "&": "AMP",
    "=": "EQ",
    "(": "LP",
    ")": "RP",
    "[": "LB",
    "]": "RB",
    "{": "LC",
    "}": "RC",
    ",": "COMMA",
    "/": "SLASH",
    ".": "DOT",
}


def _lex(src: str):
    toks = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        ch = src[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < n and src[i] != "\n":
                i += 1
            continue
        if src.startswith(":-", i):
            toks.append(_Tok("DEFINE", ":-", line, col))
            i += 2
            col += 2
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and src[i + 1].isdigit()):
            j = i + 1
            while j < n and src[j].isdigit():
                j += 1
            toks.append(_Tok("INT", src[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            text = src[i:j]
            if text[0].isupper() or text[0] == "_":
                toks.append(_Tok("UIDENT", text, line, col))
            else:
                toks.append(_Tok("LIDENT", text, line, col))
            col += j - i
            i = j
            continue
        if ch in _PUNCT:
            toks.append(_Tok(_PUNCT[ch], ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError("unexpected character", line, col, ch)
    toks.append(_Tok("EOF", "", line, col))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.toks = _lex(src)
        self.pos = 0
        # anonymous-variable names must not collide with names in the source
        self._used = {t.text for t in self.toks if t.kind == "UIDENT"}
        self._anon = 0

    def peek(self, ahead=0):
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind, what):
        t = self.next()
        if t.kind != kind:
            raise ParseError(f"expected {what}", t.line, t.col, t.text or "end of input")
        return t

    def error(self, msg):
        t = self.peek()
        raise ParseError(msg, t.line, t.col, t.text or "end of input")

    def fresh_anon(self):
        while True:
            self._anon += 1
            name = f"_G{self._anon}"
            if name not in self._used:
                self._used.add(name)
                return name

    # -- formulas ----------------------------------------------------------

    def formula(self) -> Formula:
        parts = [self.part()]
        while self.peek().kind == "AMP":
            self.next()
            parts.append(self.part())
        return conj_formulas(parts)

    def part(self) -> Formula:
        t = self.peek()
        if t.kind == "LP":
            self.next()
            branches = [self.formula()]
            while self.peek().kind == "LIDENT" and self.peek().text == "or":
                self.next()
                branches.append(self.formula())
            if len(branches) < 2:
                self.error("expected 'or' inside parenthesized formula")
            self.expect("RP", "')'")
            return disj_of(branches)
        if t.kind == "LIDENT":
            if t.text == "true":
                self.next()
                return TRUE
            if t.text == "false":
                self.next()
                return FALSE
            if t.text in KINDS and self.peek(1).kind == "LP":
                self.next()
                self.next()
                args = self.termlist()
                self.expect("RP", "')'")
                try:
                    return Formula(((Constraint(t.text, args),),))
                except Exception as e:
                    raise ParseError(str(e), t.line, t.col, t.text) from None
        left = self.term()
        op = self.next()
        if op.kind == "EQ":
            return Formula(((Constraint("eq", (left, self.term())),),))
        if op.kind == "LIDENT" and op.text == "neq":
            return Formula(((Constraint("neq", (left, self.term())),),))
        raise ParseError("expected '=' or 'neq' after term", op.line, op.col, op.text or "end of input")

    # -- terms -------------------------------------------------------------

    def termlist(self):
        out = [self.term()]
        while self.peek().kind == "COMMA":
            self.next()
            out.append(self.term())
        return out

    def term(self) -> Term:
        t = self.peek()
        if t.kind == "INT":
            self.next()
            return Lit(IntV(int(t.text)))
        if t.kind == "UIDENT":
            self.next()
            if t.text == "_":
                return Var(self.fresh_anon())
            return Var(t.text)
        if t.kind == "LB":
            self.next()
            elems = self.termlist()
            self.expect("RB", "']'")
            if len(elems) < 2:
                raise ParseError("tuples need at least 2 components", t.line, t.col, "[")
            return self._ground_tuple(elems)
        if t.kind == "LC":
            self.next()
            if self.peek().kind == "RC":
                self.next()
                return Lit(SetV(()))
            elems = self.termlist()
            tail = None
            if self.peek().kind == "SLASH":
                self.next()
                tail = self.term()
            self.expect("RC", "'}'")
            return self._ground_set(elems, tail)
        if t.kind == "LIDENT":
            if t.text == "ris":
                return self.ris()
            if t.text == "seq":
                return self.seq()
            if t.text in RESERVED:
                self.error(f"reserved word {t.text!r} cannot start a term")
            self.next()
            if self.peek().kind == "LP":
                if t.text in KINDS:
                    raise ParseError(
                        "constraint name used as a constructor", t.line, t.col, t.text
                    )
                self.next()
                args = self.termlist()
                self.expect("RP", "')'")
                return self._ground_tuple([Lit(Atom(t.text))] + args)
            return Lit(Atom(t.text))
        self.error("expected a term")

    def _ground_set(self, elems, tail):
        if tail is None and all(isinstance(e, Lit) for e in elems):
            return Lit(SetV([e.value for e in elems]))
        return SetT(elems, tail)

    def _ground_tuple(self, elems):
        if len(elems) >= 2 and all(isinstance(e, Lit) for e in elems):
            return Lit(TupV([e.value for e in elems]))
        return TupT(elems)

    def ris(self) -> Term:
        start = self.expect("LIDENT", "'ris'")
        self.expect("LP", "'('")
        binder_tok = self.next()
        if binder_tok.kind != "UIDENT" or binder_tok.text == "_":
            raise ParseError(
                "comprehension binder must be a named variable",
                binder_tok.line,
                binder_tok.col,
                binder_tok.text,
            )
        kw = self.next()
        if not (kw.kind == "LIDENT" and kw.text == "in"):
            raise ParseError("expected 'in' after binder", kw.line, kw.col, kw.text)
        domain = self.term()
        self.expect("COMMA", "','")
        lb = self.expect("LB", "'[]' parameter list")
        if self.peek().kind != "RB":
            raise ParseError("comprehension parameter list must be empty", lb.line, lb.col, "[")
        self.next()
        self.expect("COMMA", "','")
        filt = self.formula()
        self.expect("COMMA", "','")
        pattern = self.term()
        if self.peek().kind == "COMMA":
            # five-argument output form: trailing formula folded into the filter
            self.next()
            extra = self.formula()
            filt = conj_formulas([filt, extra])
        self.expect("RP", "')'")
        _ = start
        return RisT(binder_tok.text, domain, filt, pattern)

    def seq(self) -> Term:
        self.expect("LIDENT", "'seq'")
        self.expect("LP", "'('")
        self.expect("LB", "'['")
        elems = []
        if self.peek().kind != "RB":
            elems = self.termlist()
        self.expect("RB", "']'")
        self.expect("RP", "')'")
        if all(isinstance(e, Lit) for e in elems):
            return Lit(SeqV([e.value for e in elems]))
        return SeqT(elems)


def parse_formula(src: str) -> Formula:
    p = _Parser(src)
    f = p.formula()
    if p.peek().kind == "DOT":
        p.next()
    p.expect("EOF", "end of input")
    return f


def parse_term(src: str) -> Term:
    p = _Parser(src)
    t = p.term()
    p.expect("EOF", "end of input")
    return t


def parse_value(src: str) -> Value:
    t = parse_term(src)
    return term_value(t)


def term_value(t: Term) -> Value:
    """Ground term to Value; rejects variables and comprehensions."""
    if isinstance(t, Lit):
        return t.value
    if isinstance(t, Var):
        raise NotGroundError(f"variable {t.name} in value context")
    if isinstance(t, TupT):
        return TupV([term_value(e) for e in t.elems])
    if isinstance(t, SeqT):
        return SeqV([term_value(e) for e in t.elems])
    if isinstance(t, SetT):
        if t.tail is not None:
            raise NotGroundError("open set extension in value context")
        return SetV([term_value(e) for e in t.elems])
    raise NotGroundError(f"non-ground term in value context: {t!r}")


class NamedClause:
    __slots__ = ("name", "params", "body")

    def __init__(self, name, params, body):
        self.name = name
        self.params = tuple(params)
        self.body = body


def parse_file(src: str):
    """Parse a .slog source: named clauses, a bare formula, or both."""
    p = _Parser(src)
    clauses = {}
    main = None
    while p.peek().kind != "EOF":
        saved = p.pos
        clause = _try_clausedef(p)
        if clause is not None:
            if clause.name in clauses:
                t = p.peek()
                raise ParseError(f"duplicate clause {clause.name!r}", t.line, t.col)
            clauses[clause.name] = clause
            continue
        p.pos = saved
        if main is not None:
            p.error("only one bare formula per file")
        main = p.formula()
        if p.peek().kind == "DOT":
            p.next()
    return clauses, main


def _try_clausedef(p: _Parser):
    t = p.peek()
    if t.kind != "LIDENT" or p.peek(1).kind != "LP":
        return None
    # scan ahead for ':-' before the next '.', distinguishing a clause head
    # from a bare constraint
    depth = 0
    k = p.pos
    is_def = False
    while k < len(p.toks):
        tk = p.toks[k]
        if tk.kind == "LP":
            depth += 1
        elif tk.kind == "RP":
            depth -= 1
            if depth == 0:
                is_def = p.toks[k + 1].kind == "DEFINE"
                break
        k += 1
    if not is_def:
        return None
    name = p.next().text
    p.expect("LP", "'('")
    params = []
    while True:
        v = p.expect("UIDENT", "parameter variable")
        params.append(v.text)
        if p.peek().kind == "COMMA":
            p.next()
            continue
        break
    p.expect("RP", "')'")
    p.expect("DEFINE", "':-'")
    body = p.formula()
    p.expect("DOT", "'.' after clause body")
    return NamedClause(name, params, body)


# -- printing ---------------------------------------------------------------


def print_value(v: Value) -> str:
    if isinstance(v, Atom):
        return v.name
    if isinstance(v, IntV):
        return str(v.n)
    if isinstance(v, TupV):
        head = v.elems[0]
        if isinstance(head, Atom) and (head.ns in _FUNCTOR_NS or head.name in _FUNCTOR_NAMES):
            return f"{head.name}({','.join(print_value(e) for e in v.elems[1:])})"
        return f"[{','.join(print_value(e) for e in v.elems)}]"
    if isinstance(v, SetV):
        return "{" + ",".join(print_value(e) for e in v.elems) + "}"
    if isinstance(v, SeqV):
        return "seq([" + ",".join(print_value(e) for e in v.elems) + "])"
    raise NotGroundError(f"cannot print non-Value {v!r}")


def print_term(t: Term) -> str:
    if isinstance(t, Lit):
        return print_value(t.value)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, TupT):
        head = t.elems[0]
        if isinstance(head, Lit) and isinstance(head.value, Atom):
            a = head.value
            if a.ns in _FUNCTOR_NS or a.name in _FUNCTOR_NAMES:
                return f"{a.name}({','.join(print_term(e) for e in t.elems[1:])})"
        return f"[{','.join(print_term(e) for e in t.elems)}]"
    if isinstance(t, SeqT):
        return "seq([" + ",".join(print_term(e) for e in t.elems) + "])"
    if isinstance(t, SetT):
        inner = ",".join(print_term(e) for e in t.elems)
        if t.tail is not None:
            inner += "/" + print_term(t.tail)
        return "{" + inner + "}"
    if isinstance(t, RisT):
        return (
            f"ris({t.binder} in {print_term(t.domain)},[],"
            f"{print_formula(t.filter)},{print_term(t.pattern)})"
        )
    raise NotGroundError(f"cannot print term {t!r}")


def print_constraint(c: Constraint) -> str:
    if c.kind == "eq":
        return f"{print_term(c.args[0])} = {print_term(c.args[1])}"
    if c.kind == "neq":
        return f"{print_term(c.args[0])} neq {print_term(c.args[1])}"
    return f"{c.kind}({','.join(print_term(a) for a in c.args)})"


def print_formula(f: Formula) -> str:
    if f.is_false():
        return "false"
    rows = []
    for d in f.disjuncts:
        rows.append(" & ".join(print_constraint(c) for c in d) if d else "true")
    if len(rows) == 1:
        return rows[0]
    return "(" + " or ".join(rows) + ")"
