"""setforge: executable toolkit for set-based formal specifications.

Evaluates finite-set and relational formulas, simulates the bundled
consensus-protocol and EVM-fragment models, derives partition-based test
conditions, and discharges invariant-preservation obligations by bounded
unsatisfiability checking.
"""

from .formula import C, Constraint, Formula, Lit, RisT, SeqT, SetT, TupT, Var, conj, negate
from .kernel import BACKEND_NAME
from .solver import (
    Counterexample,
    Sat,
    Unknown,
    Unsat,
    Verified,
    check_unsat,
    eval_ground_formula,
    prove_implication,
    solve,
)
from .speclang import parse_formula, parse_value, print_formula, print_value
from .universe import DEFAULT_SCOPE, Scope
from .values import Atom, IntV, SeqV, SetV, TupV, Value, atom, intv, tup, vseq, vset

__version__ = "0.1.0"

__all__ = [
    "Atom", "IntV", "SeqV", "SetV", "TupV", "Value",
    "atom", "intv", "tup", "vseq", "vset",
    "C", "Constraint", "Formula", "Lit", "RisT", "SeqT", "SetT", "TupT", "Var",
    "conj", "negate",
    "Sat", "Unsat", "Unknown", "Verified", "Counterexample",
    "solve", "check_unsat", "prove_implication", "eval_ground_formula",
    "Scope", "DEFAULT_SCOPE",
    "parse_formula", "parse_value", "print_formula", "print_value",
    "BACKEND_NAME",
]
