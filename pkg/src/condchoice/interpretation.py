"""Choice-function models ``I = (f, g)`` and satisfaction of conditionals.

``f`` maps a formula to its relevant effects and ``g`` maps a formula to its
possible conditions. A model satisfies ``A => B`` when some effect of ``A``
classically entails ``B`` and ``A`` is literally listed among the conditions
of ``B`` (the *triangle*). The *rectangle* variant relaxes the second part to
``A <= A'`` for some ``A'`` in ``g(B)``.
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Iterable, Iterator

from .conditionals import Conditional
from .formula import AtomSet, Formula, parse_formula, print_canonical, table_mask
from .lattice import min_leq

EMPTY: frozenset = frozenset()
MODES = ("triangle", "rectangle")


class ChoiceFunction(Mapping):
    """Finite map from formulas to formula sets; unlisted arguments map to ∅."""

    __slots__ = ("_map", "_hash")

    def __init__(self, entries: Mapping | Iterable = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        self._map = {k: frozenset(v) for k, v in items if v}
        self._hash = None

    def __getitem__(self, key: Formula) -> frozenset:
        return self._map.get(key, EMPTY)

    def __iter__(self) -> Iterator[Formula]:
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def __contains__(self, key) -> bool:
        return key in self._map

    def __eq__(self, other):
        if isinstance(other, ChoiceFunction):
            return self._map == other._map
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._map.items()))
        return self._hash

    def __repr__(self):
        body = ", ".join(
            f"{print_canonical(k)}: {{{', '.join(sorted(map(print_canonical, v)))}}}"
            for k, v in sorted(self._map.items(), key=lambda kv: print_canonical(kv[0]))
        )
        return f"ChoiceFunction({{{body}}})"

    def to_dict(self) -> dict[Formula, set]:
        return {k: set(v) for k, v in self._map.items()}

    def issubset(self, other: "ChoiceFunction") -> bool:
        return all(v <= other[k] for k, v in self._map.items())

    def union(self, other: "ChoiceFunction") -> "ChoiceFunction":
        keys = set(self._map) | set(other._map)
        return ChoiceFunction({k: self[k] | other[k] for k in keys})

    def formulas(self) -> set[Formula]:
        out = set(self._map)
        for v in self._map.values():
            out |= v
        return out


@dataclass(frozen=True)
class Interpretation:
    f: ChoiceFunction
    g: ChoiceFunction

    @classmethod
    def empty(cls) -> "Interpretation":
        return cls(ChoiceFunction(), ChoiceFunction())

    def issubset(self, other: "Interpretation") -> bool:
        return self.f.issubset(other.f) and self.g.issubset(other.g)

    def union(self, other: "Interpretation") -> "Interpretation":
        return Interpretation(self.f.union(other.f), self.g.union(other.g))

    def formulas(self) -> set[Formula]:
        return self.f.formulas() | self.g.formulas()


def has_effect_below(i: Interpretation, a: Formula, b: Formula, atoms: AtomSet) -> bool:
    """Some ``B'`` in ``f(a)`` with ``B' <= b``."""
    mb = table_mask(b, atoms)
    return any(table_mask(x, atoms) & ~mb == 0 for x in i.f[a])


def triangle(i: Interpretation, a: Formula, b: Formula, atoms: AtomSet) -> bool:
    """``a △ b``: ``a -f-> B' <= b -g-> a``."""
    return a in i.g[b] and has_effect_below(i, a, b, atoms)


def rectangle(i: Interpretation, a: Formula, b: Formula, atoms: AtomSet) -> bool:
    """``a -f-> B' <= b -g-> A' >= a`` with ``A'`` taken from ``g(b)``."""
    if not has_effect_below(i, a, b, atoms):
        return False
    ma = table_mask(a, atoms)
    return any(ma & ~table_mask(x, atoms) == 0 for x in i.g[b])


def satisfies(i: Interpretation, c: Conditional, atoms: AtomSet,
              mode: str = "triangle", universe=None) -> bool:
    if mode == "triangle":
        return triangle(i, c.antecedent, c.consequent, atoms)
    if mode == "rectangle":
        return rectangle(i, c.antecedent, c.consequent, atoms)
    raise ValueError(f"unknown satisfaction mode {mode!r}")


def satisfied_set(i: Interpretation, universe, atoms: AtomSet | None = None,
                  mode: str = "triangle") -> frozenset:
    """All ``A => B`` with ``A, B`` in the universe that ``i`` satisfies."""
    atoms = atoms or universe.atoms
    out = set()
    if mode == "triangle":
        for b, conds in i.g.items():
            if b not in universe:
                continue
            for a in conds:
                if a in universe and has_effect_below(i, a, b, atoms):
                    out.add(Conditional(a, b))
    elif mode == "rectangle":
        for b, conds in i.g.items():
            if b not in universe:
                continue
            cover = set()
            for a_prime in conds:
                cover.update(x for x in universe.members if universe.leq(x, a_prime))
            for a in cover:
                if has_effect_below(i, a, b, atoms):
                    out.add(Conditional(a, b))
    else:
        raise ValueError(f"unknown satisfaction mode {mode!r}")
    return frozenset(out)


def characteristic_model(s: Iterable[Conditional], atoms: AtomSet,
                         use_min: bool = True) -> Interpretation:
    """The model satisfying exactly ``s``.

    ``f(D)`` is the set of ≤-minimal consequents of ``D`` in ``s`` and
    ``g(D)`` the set of antecedents of ``D``. With ``use_min=False`` every
    consequent is kept, which is the KB-reading construction used when a
    derivation starts from a knowledge base.
    """
    effects: dict[Formula, set] = {}
    conditions: dict[Formula, set] = {}
    for c in s:
        effects.setdefault(c.antecedent, set()).add(c.consequent)
        conditions.setdefault(c.consequent, set()).add(c.antecedent)
    if use_min:
        effects = {k: min_leq(v, atoms) for k, v in effects.items()}
    return Interpretation(ChoiceFunction(effects), ChoiceFunction(conditions))


def initial_model(s: Iterable[Conditional], atoms: AtomSet) -> Interpretation:
    return characteristic_model(s, atoms, use_min=False)


# ---------------------------------------------------------------------------
# JSON model dump


def _dump_fn(h: ChoiceFunction) -> list[dict]:
    rows = [
        {"arg": print_canonical(k), "values": sorted(print_canonical(x) for x in v)}
        for k, v in h.items()
    ]
    return sorted(rows, key=lambda r: r["arg"])


def model_to_json(i: Interpretation, atoms: AtomSet) -> dict:
    return {"atoms": list(atoms), "f": _dump_fn(i.f), "g": _dump_fn(i.g)}


def dump_model(i: Interpretation, atoms: AtomSet) -> str:
    return json.dumps(model_to_json(i, atoms), indent=2) + "\n"


def model_from_json(data: dict | str) -> tuple[Interpretation, AtomSet]:
    if isinstance(data, str):
        data = json.loads(data)
    atoms = AtomSet(data.get("atoms", []))

    def load(rows) -> ChoiceFunction:
        entries: dict[Formula, set] = {}
        for row in rows:
            key = parse_formula(row["arg"], atoms)
            entries.setdefault(key, set()).update(
                parse_formula(v, atoms) for v in row["values"]
            )
        return ChoiceFunction(entries)

    return Interpretation(load(data.get("f", [])), load(data.get("g", []))), atoms
