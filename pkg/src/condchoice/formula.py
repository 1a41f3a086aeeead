"""Propositional formulas: syntax trees, parsing, printing and truth tables.

Formula identity is purely syntactic. ``a & true`` and ``a`` are different
formulas even though they are classically equivalent; use :func:`equiv` to
compare meanings.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

MAX_ATOMS = 10

_IDENT = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")


class FormulaError(ValueError):
    pass


class FormulaSyntaxError(FormulaError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UndeclaredAtomError(FormulaError):
    def __init__(self, name: str):
        super().__init__(f"undeclared atom {name!r}")
        self.name = name


class Formula:
    """Base class of formula nodes.

    Nodes are immutable; equality and hashing are structural.
    """

    __slots__ = ("_h",)
    _fields: tuple[str, ...] = ()

    def __init__(self, *args):
        if len(args) != len(self._fields):
            raise TypeError(f"{type(self).__name__} takes {len(self._fields)} arguments")
        for name, value in zip(self._fields, args):
            object.__setattr__(self, name, value)
        object.__setattr__(self, "_h", hash((type(self).__name__, *args)))

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def _key(self) -> tuple:
        return tuple(getattr(self, n) for n in self._fields)

    def __eq__(self, other):
        if self is other:
            return True
        if type(other) is not type(self):
            return NotImplemented if not isinstance(other, Formula) else False
        return self._h == other._h and self._key() == other._key()

    def __hash__(self):
        return self._h

    def __repr__(self):
        return f"{type(self).__name__}({', '.join(map(repr, self._key()))})"

    def __reduce__(self):
        return (type(self), self._key())

    def __str__(self) -> str:
        return print_canonical(self)


class Atom(Formula):
    __slots__ = ("name",)
    _fields = ("name",)

    def __init__(self, name: str):
        if not isinstance(name, str) or not _IDENT.match(name) or name in ("true", "false"):
            raise FormulaError(f"invalid atom name {name!r}")
        super().__init__(name)


class Falsum(Formula):
    __slots__ = ()


class Verum(Formula):
    __slots__ = ()


class Not(Formula):
    __slots__ = ("child",)
    _fields = ("child",)


class _Binary(Formula):
    __slots__ = ("left", "right")
    _fields = ("left", "right")


class And(_Binary):
    __slots__ = ()


class Or(_Binary):
    __slots__ = ()


class Implies(_Binary):
    __slots__ = ()


class Iff(_Binary):
    __slots__ = ()


FALSUM = Falsum()
VERUM = Verum()


@dataclass(frozen=True)
class AtomSet:
    """Ordered, duplicate-free generator set. Atom ``j`` is bit ``j`` of a row index."""

    names: tuple[str, ...]

    def __init__(self, names: Iterable[str] = (), max_atoms: int = MAX_ATOMS):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise FormulaError(f"duplicate atom names in {list(names)}")
        for n in names:
            if not _IDENT.match(n) or n in ("true", "false"):
                raise FormulaError(f"invalid atom name {n!r}")
        if len(names) > max_atoms:
            raise FormulaError(
                f"{len(names)} atoms exceeds the limit of {max_atoms}"
            )
        object.__setattr__(self, "names", names)

    @classmethod
    def sorted(cls, names: Iterable[str], max_atoms: int = MAX_ATOMS) -> "AtomSet":
        return cls(sorted(set(names)), max_atoms=max_atoms)

    def __len__(self):
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __contains__(self, name) -> bool:
        return name in self.names

    def index(self, name: str) -> int:
        return self.names.index(name)

    def union(self, other: Iterable[str]) -> "AtomSet":
        return AtomSet.sorted(set(self.names) | set(other))

    def __repr__(self):
        return f"AtomSet({list(self.names)!r})"


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>#[^\n]*)|(?P<op><->|->|[|&!()])"
    r"|(?P<ident>[a-z][a-zA-Z0-9_]*)"
)


def _tokenize(text: str, line_offset: int = 0):
    pos = 0
    line, line_start = 1 + line_offset, 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        if kind in ("op", "ident"):
            tokens.append((m.group(), line, pos - line_start + 1))
        chunk = m.group()
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(("", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, line_offset: int = 0):
        self.tokens = _tokenize(text, line_offset)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def error(self, message: str):
        _, line, col = self.tokens[self.i]
        return FormulaSyntaxError(message, line, col)

    def take(self, tok: str):
        if self.peek() != tok:
            found = self.peek() or "end of input"
            raise self.error(f"expected {tok!r}, found {found!r}")
        self.i += 1

    def parse(self) -> Formula:
        f = self.iff()
        if self.peek() != "":
            raise self.error(f"unexpected {self.peek()!r}")
        return f

    def iff(self) -> Formula:
        f = self.imp()
        while self.peek() == "<->":
            self.i += 1
            f = Iff(f, self.imp())
        return f

    def imp(self) -> Formula:
        f = self.disj()
        if self.peek() == "->":
            self.i += 1
            return Implies(f, self.imp())
        return f

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek() == "|":
            self.i += 1
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.neg()
        while self.peek() == "&":
            self.i += 1
            f = And(f, self.neg())
        return f

    def neg(self) -> Formula:
        if self.peek() == "!":
            self.i += 1
            return Not(self.neg())
        return self.atom()

    def atom(self) -> Formula:
        tok = self.peek()
        if tok == "(":
            self.i += 1
            f = self.iff()
            self.take(")")
            return f
        if tok == "false":
            self.i += 1
            return FALSUM
        if tok == "true":
            self.i += 1
            return VERUM
        if tok and _IDENT.match(tok):
            self.i += 1
            return Atom(tok)
        raise self.error(f"expected a formula, found {tok or 'end of input'!r}")


def parse_formula(text: str, atoms=None, *, line_offset: int = 0):
    """Parse ``text`` into a formula.

    ``atoms`` may be ``None`` (no check), an :class:`AtomSet` (every atom must
    be declared), or the string ``"collect"``, in which case a pair
    ``(formula, AtomSet)`` of the encountered atoms is returned.
    """
    f = _Parser(text, line_offset).parse()
    if atoms == "collect":
        return f, AtomSet.sorted(atom_names(f))
    if atoms is not None:
        for name in atom_names(f):
            if name not in atoms:
                raise UndeclaredAtomError(name)
    return f


def atom_names(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset((f.name,))
    if isinstance(f, Not):
        return atom_names(f.child)
    if isinstance(f, _Binary):
        return atom_names(f.left) | atom_names(f.right)
    return frozenset()


# ---------------------------------------------------------------------------
# Printing

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Not: 5}
_SYMBOL = {Iff: "<->", Implies: "->", Or: "|", And: "&"}


def _render(f: Formula, min_prec: int) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Falsum):
        return "false"
    if isinstance(f, Verum):
        return "true"
    kind = type(f)
    prec = _PREC[kind]
    if kind is Not:
        s = "!" + _render(f.child, prec)
    elif kind is Implies:
        s = f"{_render(f.left, prec + 1)} -> {_render(f.right, prec)}"
    else:
        s = f"{_render(f.left, prec)} {_SYMBOL[kind]} {_render(f.right, prec + 1)}"
    return f"({s})" if prec < min_prec else s


@lru_cache(maxsize=None)
def print_canonical(f: Formula) -> str:
    """Minimal-parentheses rendering that re-parses to the same tree."""
    return _render(f, 0)


def sort_key(f: Formula) -> str:
    return print_canonical(f)


def sorted_formulas(fs: Iterable[Formula]) -> list[Formula]:
    return sorted(fs, key=print_canonical)


# ---------------------------------------------------------------------------
# Semantics


@dataclass(frozen=True)
class TruthTable:
    """Row ``i`` holds the value under the valuation whose bit ``j`` is atom ``j``.

    ``mask`` stores row ``i`` as bit ``i``.
    """

    atoms: AtomSet
    mask: int

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.mask >> i) & 1 for i in range(1 << len(self.atoms)))

    def __len__(self):
        return 1 << len(self.atoms)

    def satisfying(self) -> list[dict[str, bool]]:
        return [valuation(self.atoms, i) for i, b in enumerate(self.bits) if b]


def valuation(atoms: AtomSet, row: int) -> dict[str, bool]:
    return {name: bool((row >> j) & 1) for j, name in enumerate(atoms)}


@lru_cache(maxsize=None)
def _atom_masks(atoms: AtomSet) -> dict[str, int]:
    rows = 1 << len(atoms)
    masks = {}
    for j, name in enumerate(atoms):
        m = 0
        for i in range(rows):
            if (i >> j) & 1:
                m |= 1 << i
        masks[name] = m
    return masks


@lru_cache(maxsize=200_000)
def table_mask(f: Formula, atoms: AtomSet) -> int:
    full = (1 << (1 << len(atoms))) - 1
    if isinstance(f, Atom):
        try:
            return _atom_masks(atoms)[f.name]
        except KeyError:
            raise UndeclaredAtomError(f.name) from None
    if isinstance(f, Falsum):
        return 0
    if isinstance(f, Verum):
        return full
    if isinstance(f, Not):
        return full ^ table_mask(f.child, atoms)
    left = table_mask(f.left, atoms)
    right = table_mask(f.right, atoms)
    if isinstance(f, And):
        return left & right
    if isinstance(f, Or):
        return left | right
    if isinstance(f, Implies):
        return (full ^ left) | right
    if isinstance(f, Iff):
        return full ^ (left ^ right)
    raise TypeError(f"not a formula: {f!r}")


def truth_table(f: Formula, atoms: AtomSet) -> TruthTable:
    return TruthTable(atoms, table_mask(f, atoms))


def entails(a: Formula, b: Formula, atoms: AtomSet) -> bool:
    """``a <= b``: every valuation satisfying ``a`` satisfies ``b``."""
    return table_mask(a, atoms) & ~table_mask(b, atoms) == 0


def countermodel(a: Formula, b: Formula, atoms: AtomSet) -> dict[str, bool] | None:
    """A valuation making ``a`` true and ``b`` false, or ``None`` if ``a <= b``."""
    diff = table_mask(a, atoms) & ~table_mask(b, atoms)
    if diff == 0:
        return None
    return valuation(atoms, (diff & -diff).bit_length() - 1)


def strictly_below(a: Formula, b: Formula, atoms: AtomSet) -> bool:
    return entails(a, b, atoms) and not entails(b, a, atoms)


def equiv(a: Formula, b: Formula, atoms: AtomSet) -> bool:
    return table_mask(a, atoms) == table_mask(b, atoms)


def is_contradiction(a: Formula, atoms: AtomSet) -> bool:
    return table_mask(a, atoms) == 0
