"""Order-theoretic helpers over formulas and finite formula sets.

Sets are plain ``frozenset`` objects of formulas (syntactic identity); sort
with :func:`condchoice.formula.sorted_formulas` when a stable order matters.
Choice functions are anything indexable by formula that returns a set and
exposes ``keys()`` (see :class:`condchoice.interpretation.ChoiceFunction`).
"""

from __future__ import annotations

from typing import Iterable, Iterator

from .formula import And, AtomSet, Formula, Or, table_mask

FormulaSet = frozenset

STARS = ("<=", "==", "and", "or")


def _masks(s: Iterable[Formula], atoms: AtomSet) -> list[tuple[Formula, int]]:
    return [(f, table_mask(f, atoms)) for f in s]


def min_leq(s: Iterable[Formula], atoms: AtomSet) -> frozenset:
    """Members of ``s`` with nothing strictly below them in ``s``."""
    ms = _masks(set(s), atoms)
    return frozenset(
        b for b, mb in ms
        if not any(mc & ~mb == 0 and mc != mb for _, mc in ms)
    )


def bound_set(s: Iterable[Formula], direction: str, universe) -> frozenset:
    """Universe-relative up-set (``"up"``) or down-set (``"down"``) of ``s``."""
    s = list(s)
    universe.require(*s)
    if direction not in ("up", "down"):
        raise ValueError(f"direction must be 'up' or 'down', not {direction!r}")
    out = set()
    for a in s:
        out.update(universe.up(a) if direction == "up" else universe.down(a))
    return frozenset(out)


def smyth_leq(a: Iterable[Formula], b: Iterable[Formula], atoms: AtomSet) -> bool:
    """Every member of ``b`` has a lower bound in ``a``."""
    ma = [table_mask(x, atoms) for x in a]
    return all(any(m & ~table_mask(y, atoms) == 0 for m in ma) for y in b)


def smyth_equiv(a: Iterable[Formula], b: Iterable[Formula], atoms: AtomSet) -> bool:
    a, b = list(a), list(b)
    return smyth_leq(a, b, atoms) and smyth_leq(b, a, atoms)


def smyth_gaps(a: Iterable[Formula], b: Iterable[Formula], atoms: AtomSet) -> list[Formula]:
    """Members of ``b`` lacking a lower bound in ``a`` (empty iff ``a ≼ b``)."""
    ma = [table_mask(x, atoms) for x in a]
    return [y for y in b if not any(m & ~table_mask(y, atoms) == 0 for m in ma)]


def star_closure_gaps(h, star: str, universe) -> Iterator[tuple[Formula, Formula, Formula, Formula]]:
    """Yield ``(C, A, B, missing)`` for each failure of ``h`` being star-closed.

    For ``<=``/``==``: ``A`` in ``h(C)``, ``B star A`` holds, ``B`` missing.
    For ``and``/``or``: ``A, B`` in ``h(C)`` (ordered pairs), and the
    universe member ``A star B`` missing. Constructs outside the universe
    impose nothing.
    """
    if star not in STARS:
        raise ValueError(f"unknown star {star!r}; expected one of {STARS}")
    for c in list(h.keys()):
        image = h[c]
        if star in ("<=", "=="):
            for a in image:
                candidates = universe.down(a) if star == "<=" else universe.equivalents(a)
                for b in candidates:
                    if b not in image:
                        yield c, a, b, b
        else:
            build = And if star == "and" else Or
            for a in image:
                for b in image:
                    comb = build(a, b)
                    if comb in universe and comb not in image:
                        yield c, a, b, comb


def is_star_closed(h, star: str, universe) -> bool:
    return next(star_closure_gaps(h, star, universe), None) is None


def is_fixed_point(h, a: Formula) -> bool:
    return a in h[a]
