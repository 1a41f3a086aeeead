"""Conditionals ``A => B``, conditional sets, and the KB text format."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .formula import (
    AtomSet,
    Formula,
    FormulaSyntaxError,
    atom_names,
    parse_formula,
    print_canonical,
)

ConditionalSet = frozenset


@dataclass(frozen=True)
class Conditional:
    antecedent: Formula
    consequent: Formula

    def __str__(self) -> str:
        return f"{print_canonical(self.antecedent)} => {print_canonical(self.consequent)}"

    def sort_key(self) -> str:
        return str(self)


def cond(a: Formula | str, b: Formula | str) -> Conditional:
    """Shorthand: ``cond("f & c", "m")``."""
    if isinstance(a, str):
        a = parse_formula(a)
    if isinstance(b, str):
        b = parse_formula(b)
    return Conditional(a, b)


def sorted_conditionals(s: Iterable[Conditional]) -> list[Conditional]:
    return sorted(s, key=Conditional.sort_key)


def conditional_atoms(s: Iterable[Conditional]) -> AtomSet:
    names = set()
    for c in s:
        names |= atom_names(c.antecedent) | atom_names(c.consequent)
    return AtomSet.sorted(names)


def parse_conditional(line: str, lineno: int = 1) -> Conditional:
    body = line.split("#", 1)[0]
    parts = body.split("=>")
    if len(parts) == 1:
        raise FormulaSyntaxError("expected 'antecedent => consequent'", lineno, 1)
    if len(parts) > 2:
        col = body.index("=>", body.index("=>") + 2) + 1
        raise FormulaSyntaxError("'=>' occurs more than once", lineno, col)
    left, right = parts
    a = parse_formula(left, line_offset=lineno - 1)
    try:
        b = parse_formula(right, line_offset=lineno - 1)
    except FormulaSyntaxError as e:
        # re-anchor the column to the full line
        raise FormulaSyntaxError(
            str(e).split(": ", 1)[1], lineno, e.column + len(left) + 2
        ) from None
    return Conditional(a, b)


def parse_kb(text: str) -> tuple[frozenset, AtomSet]:
    """Parse a KB: one ``A => B`` per line, ``#`` comments, blank lines ignored.

    Returns the conditional set and the sorted set of atoms it mentions.
    """
    out = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.split("#", 1)[0].strip():
            continue
        out.add(parse_conditional(line, lineno))
    s = frozenset(out)
    return s, conditional_atoms(s)


def serialize_kb(s: Iterable[Conditional]) -> str:
    return "".join(f"{c}\n" for c in sorted_conditionals(s))
