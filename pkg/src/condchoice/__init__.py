"""Conditional reasoning with choice-function models."""

from .conditionals import Conditional, cond, parse_kb, serialize_kb
from .engine import close, derive, verify_correspondence
from .formula import AtomSet, parse_formula, print_canonical
from .interpretation import Interpretation, characteristic_model, satisfied_set
from .properties import Property, is_closed_under, semantic_check, semantic_enforce
from .universe import FormulaUniverse, build_universe

__version__ = "0.1.0"

__all__ = [
    "AtomSet", "Conditional", "FormulaUniverse", "Interpretation", "Property",
    "build_universe", "characteristic_model", "close", "cond", "derive",
    "is_closed_under", "parse_formula", "parse_kb", "print_canonical",
    "satisfied_set", "semantic_check", "semantic_enforce", "serialize_kb",
    "verify_correspondence",
]
