"""The finite formula fragment that every quantified rule and constraint ranges over."""

from __future__ import annotations

from typing import Iterable, Iterator

from .formula import (
    FALSUM,
    And,
    Atom,
    AtomSet,
    Formula,
    Not,
    Or,
    UndeclaredAtomError,
    atom_names,
    print_canonical,
    table_mask,
)

CONSTRUCTORS = ("conjunction", "disjunction", "negation")
DEFAULT_CONSTRUCTORS = ("conjunction", "disjunction")
DEFAULT_DEPTH = 1
MAX_UNIVERSE = 20_000


class UniverseTooLarge(ValueError):
    pass


class OutsideUniverse(ValueError):
    pass


class FormulaUniverse:
    """An explicitly enumerated, immutable set of formulas.

    Membership is exact syntactic lookup. ``leq``/``equiv`` are classical and
    answered from cached truth-table masks.
    """

    def __init__(self, members: Iterable[Formula], atoms: AtomSet, depth: int = 0,
                 constructors: Iterable[str] = ()):
        self.atoms = atoms
        self.depth = depth
        self.constructors = tuple(c for c in CONSTRUCTORS if c in set(constructors))
        self.members: tuple[Formula, ...] = tuple(
            sorted(set(members), key=print_canonical)
        )
        self._index = {f: i for i, f in enumerate(self.members)}
        self.masks: tuple[int, ...] = tuple(table_mask(f, atoms) for f in self.members)
        self._up: dict[int, tuple[Formula, ...]] = {}
        self._down: dict[int, tuple[Formula, ...]] = {}
        self._eq: dict[int, tuple[Formula, ...]] = {}

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Formula]:
        return iter(self.members)

    def __contains__(self, f) -> bool:
        return f in self._index

    def __repr__(self):
        return (f"FormulaUniverse(size={len(self)}, atoms={list(self.atoms)}, "
                f"depth={self.depth}, constructors={list(self.constructors)})")

    def index(self, f: Formula) -> int:
        try:
            return self._index[f]
        except KeyError:
            raise OutsideUniverse(f"{print_canonical(f)!r} is not in the universe") from None

    def require(self, *fs: Formula) -> None:
        for f in fs:
            if f not in self._index:
                raise OutsideUniverse(f"{print_canonical(f)!r} is not in the universe")

    def mask(self, f: Formula) -> int:
        i = self._index.get(f)
        return self.masks[i] if i is not None else table_mask(f, self.atoms)

    def leq(self, a: Formula, b: Formula) -> bool:
        return self.mask(a) & ~self.mask(b) == 0

    def lt(self, a: Formula, b: Formula) -> bool:
        ma, mb = self.mask(a), self.mask(b)
        return ma & ~mb == 0 and ma != mb

    def equiv(self, a: Formula, b: Formula) -> bool:
        return self.mask(a) == self.mask(b)

    def is_bottom(self, a: Formula) -> bool:
        return self.mask(a) == 0

    def up(self, f: Formula) -> tuple[Formula, ...]:
        """Members ``B`` with ``f <= B``."""
        i = self.index(f)
        if i not in self._up:
            m = self.masks[i]
            self._up[i] = tuple(g for g, mg in zip(self.members, self.masks) if m & ~mg == 0)
        return self._up[i]

    def down(self, f: Formula) -> tuple[Formula, ...]:
        """Members ``B`` with ``B <= f``."""
        i = self.index(f)
        if i not in self._down:
            m = self.masks[i]
            self._down[i] = tuple(g for g, mg in zip(self.members, self.masks) if mg & ~m == 0)
        return self._down[i]

    def equivalents(self, f: Formula) -> tuple[Formula, ...]:
        i = self.index(f)
        if i not in self._eq:
            m = self.masks[i]
            self._eq[i] = tuple(g for g, mg in zip(self.members, self.masks) if mg == m)
        return self._eq[i]

    def with_mask(self, mask: int) -> tuple[Formula, ...]:
        return tuple(g for g, mg in zip(self.members, self.masks) if mg == mask)

    def conj(self, a: Formula, b: Formula) -> Formula | None:
        """``And(a, b)`` if that exact tree is a member, else ``None``."""
        f = And(a, b)
        return f if f in self._index else None

    def disj(self, a: Formula, b: Formula) -> Formula | None:
        f = Or(a, b)
        return f if f in self._index else None

    def conjunctions(self) -> Iterator[tuple[Formula, Formula, Formula]]:
        """``(A, B, A & B)`` for every member ``A & B`` whose operands are members."""
        for f in self.members:
            if isinstance(f, And) and f.left in self._index and f.right in self._index:
                yield f.left, f.right, f

    def disjunctions(self) -> Iterator[tuple[Formula, Formula, Formula]]:
        for f in self.members:
            if isinstance(f, Or) and f.left in self._index and f.right in self._index:
                yield f.left, f.right, f

    def summary(self) -> dict:
        return {
            "size": len(self),
            "depth": self.depth,
            "atoms": list(self.atoms),
            "constructors": list(self.constructors),
        }


def build_universe(seeds: Iterable[Formula] = (), atoms: AtomSet | None = None,
                   constructors: Iterable[str] = DEFAULT_CONSTRUCTORS,
                   depth: int = DEFAULT_DEPTH,
                   max_size: int = MAX_UNIVERSE) -> FormulaUniverse:
    """Least set containing seeds, atoms and falsum, closed ``depth`` rounds.

    Each round applies the constructors to the members present at the start
    of the round. Generated binary formulas put the lexicographically smaller
    operand (by canonical print) on the left; seeds keep their own shape.
    """
    seeds = list(seeds)
    if atoms is None:
        atoms = AtomSet.sorted(n for s in seeds for n in atom_names(s))
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    constructors = tuple(constructors)
    unknown = set(constructors) - set(CONSTRUCTORS)
    if unknown:
        raise ValueError(f"unknown constructors: {sorted(unknown)}")
    for s in seeds:
        for name in atom_names(s):
            if name not in atoms:
                raise UndeclaredAtomError(name)

    present = {FALSUM, *(Atom(n) for n in atoms), *seeds}

    def add(f: Formula) -> None:
        if f not in present:
            present.add(f)
            if len(present) > max_size:
                raise UniverseTooLarge(
                    f"universe exceeds {max_size} members at depth {depth}; "
                    "lower the depth or the constructor set"
                )

    if len(present) > max_size:
        raise UniverseTooLarge(f"universe exceeds {max_size} members")
    for _ in range(depth):
        base = sorted(present, key=print_canonical)
        for i, x in enumerate(base):
            if "negation" in constructors:
                add(Not(x))
            for y in base[i:]:
                if "conjunction" in constructors:
                    add(And(x, y))
                if "disjunction" in constructors:
                    add(Or(x, y))
    return FormulaUniverse(present, atoms, depth, constructors)


def parse_constructors(text: str) -> tuple[str, ...]:
    """``"conjunction,disjunction"`` (or ``and,or,not``) to constructor names."""
    alias = {"and": "conjunction", "or": "disjunction", "not": "negation",
             "conj": "conjunction", "disj": "disjunction", "neg": "negation"}
    out = []
    for tok in filter(None, (t.strip() for t in text.split(","))):
        name = alias.get(tok, tok)
        if name not in CONSTRUCTORS:
            raise ValueError(f"unknown constructor {tok!r}")
        out.append(name)
    return tuple(out)
