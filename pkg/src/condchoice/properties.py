"""Structural properties: syntactic rules, semantic constraints, enforcement.

Every property is available three ways:

* :func:`rule_consequences` / :func:`is_closed_under` treat it as a forward
  inference rule over a conditional set;
* :func:`semantic_check` tests the matching constraint on an interpretation;
* :func:`semantic_enforce` grows an interpretation until the constraint holds
  (only for constraints that are satisfied by adding, never by removing).

All quantifiers range over a :class:`~condchoice.universe.FormulaUniverse`.
A rule or clause that needs a constructed formula (``A & B``, ``A | B``)
applies only when that exact tree is a universe member.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from .conditionals import Conditional, sorted_conditionals
from .formula import FALSUM, And, Formula, Or, print_canonical
from .interpretation import ChoiceFunction, Interpretation, characteristic_model


class Property(str, enum.Enum):
    LLE = "lle"
    RLE = "rle"
    REF = "ref"
    CUT = "cut"
    MON = "mon"
    AND = "and"
    OR = "or"
    RW = "rw"
    EFQ = "efq"
    CON = "con"
    SUP = "sup"
    CM = "cm"
    CUMUL = "cumul"
    ANTIRW = "antirw"

    def __str__(self) -> str:
        return self.value


ALL_PROPERTIES = tuple(Property)
RULE_PROPERTIES = tuple(p for p in Property if p is not Property.CON)
ENFORCEABLE = frozenset({
    Property.REF, Property.CUT, Property.CM, Property.MON, Property.RW,
    Property.LLE, Property.RLE, Property.EFQ, Property.SUP, Property.OR,
    Property.ANTIRW,
})
# constructor a rule needs in order to build its conclusions
REQUIRED_CONSTRUCTOR = {
    Property.AND: "conjunction",
    Property.CM: "conjunction",
    Property.CUMUL: "conjunction",
    Property.OR: "disjunction",
}


class PropertyUsageError(ValueError):
    pass


def parse_properties(text: str | Iterable[str]) -> list[Property]:
    """``"ref,cut"`` -> ``[Property.REF, Property.CUT]``; ``"all"`` gives every property."""
    tokens = text.split(",") if isinstance(text, str) else list(text)
    out: list[Property] = []
    for tok in (t.strip().lower() for t in tokens):
        if not tok:
            continue
        if tok == "all":
            out.extend(p for p in ALL_PROPERTIES if p not in out)
            continue
        try:
            p = Property(tok)
        except ValueError:
            names = ", ".join(p.value for p in Property)
            raise PropertyUsageError(f"unknown property {tok!r} (expected one of: {names})") from None
        if p not in out:
            out.append(p)
    return out


@dataclass(frozen=True)
class ViolationReport:
    """One failed rule instance or constraint clause, with its witnesses.

    ``clause`` is the property name for rule instances (e.g. ``"cut"``) and
    ``"<property>.<n>"`` for constraint clauses.
    """

    property: Property
    kind: str
    clause: str
    witnesses: tuple[tuple[str, Formula], ...]
    premises: tuple[Conditional, ...] = ()
    conclusion: Conditional | None = None
    detail: str = ""

    def witness(self, name: str) -> Formula:
        return dict(self.witnesses)[name]

    def describe(self) -> str:
        ws = ", ".join(f"{k}={print_canonical(v)}" for k, v in self.witnesses)
        if self.kind == "rule-instance" and self.conclusion is None:
            return f"[{self.clause}] {'; '.join(map(str, self.premises))}: {self.detail}"
        if self.kind == "rule-instance":
            prem = "; ".join(map(str, self.premises)) or "(axiom)"
            return f"[{self.clause}] {prem} / {self.conclusion} missing ({ws})"
        extra = f" {self.detail}" if self.detail else ""
        return f"[{self.clause}] fails at {ws}{extra}"

    def to_json(self) -> dict:
        out = {
            "property": self.property.value,
            "kind": self.kind,
            "clause": self.clause,
            "witnesses": {k: print_canonical(v) for k, v in self.witnesses},
        }
        if self.kind == "rule-instance":
            out["premises"] = [str(c) for c in self.premises]
            out["conclusion"] = str(self.conclusion) if self.conclusion else None
        if self.detail:
            out["detail"] = self.detail
        return out


def _w(**kw) -> tuple[tuple[str, Formula], ...]:
    return tuple(kw.items())


# ---------------------------------------------------------------------------
# Syntactic rules

RuleInstance = tuple[tuple[Conditional, ...], Conditional, tuple]


def _index(s: Iterable[Conditional]):
    by_ante: dict[Formula, list[Formula]] = defaultdict(list)
    by_cons: dict[Formula, list[Formula]] = defaultdict(list)
    for c in s:
        by_ante[c.antecedent].append(c.consequent)
        by_cons[c.consequent].append(c.antecedent)
    return by_ante, by_cons


def _check_in_universe(s: Iterable[Conditional], u) -> None:
    for c in s:
        u.require(c.antecedent, c.consequent)


def rule_instances(x: Property, s: frozenset, u) -> Iterator[RuleInstance]:
    """Yield ``(premises, conclusion, witnesses)`` for every one-step instance."""
    x = Property(x)
    C = Conditional
    if x is Property.CON:
        raise PropertyUsageError("con is a check, not an inference rule")
    if x is Property.REF:
        for a in u:
            yield (), C(a, a), _w(A=a)
    elif x is Property.SUP:
        for a in u:
            for b in u.up(a):
                yield (), C(a, b), _w(A=a, B=b)
    elif x is Property.EFQ:
        for a in u:
            if u.is_bottom(a):
                for b in u:
                    yield (), C(a, b), _w(A=a, B=b)
    elif x is Property.LLE:
        for c in s:
            for b in u.equivalents(c.antecedent):
                if b != c.antecedent:
                    yield (c,), C(b, c.consequent), _w(A=c.antecedent, B=b, C=c.consequent)
    elif x is Property.RLE:
        for c in s:
            for d in u.equivalents(c.consequent):
                if d != c.consequent:
                    yield (c,), C(c.antecedent, d), _w(A=c.antecedent, B=c.consequent, C=d)
    elif x is Property.MON:
        for c in s:
            for b in u.down(c.antecedent):
                if b != c.antecedent:
                    yield (c,), C(b, c.consequent), _w(A=c.antecedent, B=b, C=c.consequent)
    elif x is Property.RW:
        for c in s:
            for d in u.up(c.consequent):
                if d != c.consequent:
                    yield (c,), C(c.antecedent, d), _w(A=c.antecedent, B=c.consequent, C=d)
    elif x is Property.CUT:
        yield from _cut_instances(s, u)
    elif x is Property.CM:
        yield from _cm_instances(s, u)
    elif x is Property.CUMUL:
        yield from _cut_instances(s, u)
        yield from _cm_instances(s, u)
    elif x is Property.AND:
        by_ante, _ = _index(s)
        for a, cons in by_ante.items():
            for b in cons:
                for c in cons:
                    bc = u.conj(b, c)
                    if bc is not None:
                        yield (C(a, b), C(a, c)), C(a, bc), _w(A=a, B=b, C=c)
    elif x is Property.OR:
        _, by_cons = _index(s)
        for c, antes in by_cons.items():
            for a in antes:
                for b in antes:
                    ab = u.disj(a, b)
                    if ab is not None:
                        yield (C(a, c), C(b, c)), C(ab, c), _w(A=a, B=b, C=c)
    elif x is Property.ANTIRW:
        by_ante, _ = _index(s)
        for a, cons in by_ante.items():
            for b in cons:
                for d in cons:
                    if b == d or not u.leq(b, d):
                        continue
                    for c in u.up(b):
                        if c != b and c != d and u.leq(c, d):
                            yield (C(a, b), C(a, d)), C(a, c), _w(A=a, B=b, C=c, D=d)
    else:  # pragma: no cover
        raise PropertyUsageError(f"unsupported property {x}")


def _cut_instances(s, u):
    C = Conditional
    for c in s:
        ab = c.antecedent
        if isinstance(ab, And):
            premise = C(ab.left, ab.right)
            if premise in s:
                yield (c, premise), C(ab.left, c.consequent), _w(A=ab.left, B=ab.right, C=c.consequent)


def _cm_instances(s, u):
    C = Conditional
    by_ante, _ = _index(s)
    for a, cons in by_ante.items():
        for b in cons:
            ab = u.conj(a, b)
            if ab is None:
                continue
            for c in cons:
                yield (C(a, b), C(a, c)), C(ab, c), _w(A=a, B=b, C=c)


def rule_consequences(x: Property, s: Iterable[Conditional], u, atoms=None) -> frozenset:
    """All one-step conclusions of rule ``x`` from ``s`` inside the universe."""
    s = frozenset(s)
    _check_in_universe(s, u)
    return frozenset(concl for _, concl, _ in rule_instances(x, s, u))


def con_violations(s: Iterable[Conditional], u) -> list[ViolationReport]:
    out = []
    for c in sorted_conditionals(s):
        if u.is_bottom(c.consequent) and not u.is_bottom(c.antecedent):
            out.append(ViolationReport(
                Property.CON, "rule-instance", "con",
                _w(A=c.antecedent, B=c.consequent), premises=(c,), conclusion=None,
                detail="consequent is unsatisfiable but antecedent is not",
            ))
    return out


def is_closed_under(x: Property, s: Iterable[Conditional], u, atoms=None,
                    limit: int | None = None) -> tuple[bool, list[ViolationReport]]:
    """Whether ``s`` is closed under ``x``, with one report per missing conclusion."""
    x = Property(x)
    s = frozenset(s)
    _check_in_universe(s, u)
    if x is Property.CON:
        reports = con_violations(s, u)
        return not reports, reports[:limit] if limit else reports
    reports = []
    seen = set()
    for premises, concl, ws in rule_instances(x, s, u):
        if concl in s or concl in seen:
            continue
        seen.add(concl)
        reports.append(ViolationReport(x, "rule-instance", x.value, ws, premises, concl))
        if limit and len(reports) >= limit:
            break
    reports.sort(key=lambda r: str(r.conclusion))
    return not reports, reports


def replay_rule_violation(report: ViolationReport, s: Iterable[Conditional], u) -> bool:
    """True iff the reported rule failure still occurs in ``s``."""
    s = frozenset(s)
    if report.property is Property.CON:
        (c,) = report.premises
        return c in s and u.is_bottom(c.consequent) and not u.is_bottom(c.antecedent)
    if not set(report.premises) <= s or report.conclusion in s:
        return False
    return report.conclusion in rule_consequences(report.property, report.premises, u)


# ---------------------------------------------------------------------------
# Semantic constraints
#
# Each clause has an instance generator (a superset of the instances where the
# clause can fail) and a ``holds`` predicate over named witnesses, so that any
# report can be replayed against the definition.


def _smyth(u, a: Iterable[Formula], b: Iterable[Formula]) -> bool:
    ma = [u.mask(x) for x in a]
    return all(any(m & ~u.mask(y) == 0 for m in ma) for y in b)


def _min(u, s: Iterable[Formula]) -> frozenset:
    ms = [(x, u.mask(x)) for x in set(s)]
    return frozenset(b for b, mb in ms if not any(mc & ~mb == 0 and mc != mb for _, mc in ms))


def _tri(i: Interpretation, u, a: Formula, b: Formula) -> bool:
    if a not in i.g[b]:
        return False
    mb = u.mask(b)
    return any(u.mask(x) & ~mb == 0 for x in i.f[a])


def _up_set(u, s: Iterable[Formula]) -> set:
    out = set()
    for x in s:
        out.update(u.up(x))
    return out


def or_targets(u, fa: Iterable[Formula], fb: Iterable[Formula]) -> frozenset:
    """≤-minimal members of the common (universe-relative) up-set of two images."""
    return _min(u, _up_set(u, fa) & _up_set(u, fb))


def _members_of_g(i: Interpretation, u) -> dict[Formula, set]:
    """For each condition ``A``, the set of ``B`` with ``A`` in ``g(B)``."""
    inv: dict[Formula, set] = defaultdict(set)
    for b, conds in i.g.items():
        for a in conds:
            inv[a].add(b)
    return inv


@dataclass(frozen=True)
class Clause:
    name: str
    property: Property
    instances: Callable
    holds: Callable
    text: str = ""


def _inst_lle1(i, u):
    for a in i.f:
        for b in u.equivalents(a):
            if b != a:
                yield dict(A=a, B=b)


def _inst_gstar(star):
    def gen(i, u):
        for c in i.g:
            for a in i.g[c]:
                cands = u.down(a) if star == "<=" else u.equivalents(a)
                for b in cands:
                    yield dict(C=c, A=a, B=b)
    return gen


def _inst_rle1(i, u):
    for a in i.g:
        for b in u.equivalents(a):
            if b != a:
                yield dict(A=a, B=b)


def _inst_all(i, u):
    for a in u:
        yield dict(A=a)


def _inst_conj_pairs(i, u):
    for a, b, _ in u.conjunctions():
        yield dict(A=a, B=b)


def _inst_cut2(i, u):
    inv = _members_of_g(i, u)
    for a, b, ab in u.conjunctions():
        if a in i.g[b]:
            for c in inv.get(ab, ()):
                yield dict(A=a, B=b, C=c)


def _inst_mon1(i, u):
    for b in i.f:
        for a in u.down(b):
            if a != b:
                yield dict(A=a, B=b)


def _inst_and1(i, u):
    for a in i.f:
        mins = sorted(_min(u, i.f[a]), key=print_canonical)
        for x in range(len(mins)):
            for y in range(x + 1, len(mins)):
                yield dict(A=a, B=mins[x], C=mins[y])


def _inst_and2(i, u):
    for b, c, _ in u.conjunctions():
        yield dict(B=b, C=c)


def _inst_disj_pairs(i, u):
    for a, b, _ in u.disjunctions():
        yield dict(A=a, B=b)


def _inst_or2(i, u):
    for c in i.g:
        for a in i.g[c]:
            for b in i.g[c]:
                if u.disj(a, b) is not None:
                    yield dict(C=c, A=a, B=b)


def _inst_rw1(i, u):
    for a in i.g:
        for b in u.up(a):
            if b != a:
                yield dict(A=a, B=b)


def _inst_bottoms(i, u):
    for a in u:
        if u.is_bottom(a):
            yield dict(A=a)


def _inst_efq2(i, u):
    for a in u:
        if u.is_bottom(a):
            for b in u:
                yield dict(A=a, B=b)


def _inst_con1(i, u):
    for a in i.f:
        for b in i.f[a]:
            yield dict(A=a, B=b)


def _inst_sup2(i, u):
    for a in u:
        for b in u.down(a):
            yield dict(A=a, B=b)


def _inst_cm2(i, u):
    inv = _members_of_g(i, u)
    for a, b, _ in u.conjunctions():
        if a in i.g[b]:
            for c in inv.get(a, ()):
                yield dict(A=a, B=b, C=c)


def _inst_cumul2(i, u):
    inv = _members_of_g(i, u)
    for a, b, ab in u.conjunctions():
        if a in i.g[b]:
            for c in inv.get(a, set()) | inv.get(ab, set()):
                yield dict(A=a, B=b, C=c)


def _inst_antirw(i, u):
    inv = _members_of_g(i, u)
    for a, bs in inv.items():
        bs = sorted(bs, key=print_canonical)
        for b in bs:
            for d in bs:
                if b != d and u.leq(b, d):
                    for c in u.up(b):
                        if u.leq(c, d):
                            yield dict(A=a, B=b, C=c, D=d)


def _conj(A, B):
    return And(A, B)


CLAUSES: dict[str, Clause] = {}


def _clause(name, prop, instances, holds, text):
    CLAUSES[name] = Clause(name, prop, instances, holds, text)


P = Property
_clause("lle.1", P.LLE, _inst_lle1,
        lambda i, u, A, B: not u.equiv(A, B) or i.f[A] == i.f[B],
        "A ≡ B implies f(A) = f(B)")
_clause("lle.2", P.LLE, _inst_gstar("=="),
        lambda i, u, C, A, B: not (A in i.g[C] and u.equiv(A, B)) or B in i.g[C],
        "g is ≡-closed")
_clause("rle.1", P.RLE, _inst_rle1,
        lambda i, u, A, B: not u.equiv(A, B) or i.g[A] == i.g[B],
        "A ≡ B implies g(A) = g(B)")
_clause("ref.1", P.REF, _inst_all,
        lambda i, u, A: A in i.f[A] and A in i.g[A],
        "A is a fixed point of f and of g")
_clause("cut.1", P.CUT, _inst_conj_pairs,
        lambda i, u, A, B: not _tri(i, u, A, B) or _smyth(u, i.f[A], i.f[_conj(A, B)]),
        "A △ B implies f(A) ≼ f(A & B)")
_clause("cut.2", P.CUT, _inst_cut2,
        lambda i, u, A, B, C: not (A in i.g[B] and _conj(A, B) in i.g[C]) or A in i.g[C],
        "A ∈ g(B) and A & B ∈ g(C) imply A ∈ g(C)")
_clause("mon.1", P.MON, _inst_mon1,
        lambda i, u, A, B: not u.leq(A, B) or _smyth(u, i.f[A], i.f[B]),
        "f is Smyth-monotone")
_clause("mon.2", P.MON, _inst_gstar("<="),
        lambda i, u, C, A, B: not (A in i.g[C] and u.leq(B, A)) or B in i.g[C],
        "g is ≤-closed")
_clause("and.1", P.AND, _inst_and1,
        lambda i, u, A, B, C: not (B in (m := _min(u, i.f[A])) and C in m) or u.equiv(B, C),
        "≤-minimal effects of A are pairwise equivalent")
_clause("and.2", P.AND, _inst_and2,
        lambda i, u, B, C: (i.g[B] & i.g[C]) <= i.g[_conj(B, C)],
        "g(B) ∩ g(C) ⊆ g(B & C)")
_clause("or.1", P.OR, _inst_disj_pairs,
        lambda i, u, A, B: or_targets(u, i.f[A], i.f[B]) <= i.f[Or(A, B)],
        "min(f(A)↑ ∩ f(B)↑) ⊆ f(A | B)")
_clause("or.2", P.OR, _inst_or2,
        lambda i, u, C, A, B: not (A in i.g[C] and B in i.g[C] and Or(A, B) in u) or Or(A, B) in i.g[C],
        "g is ∨-closed")
_clause("rw.1", P.RW, _inst_rw1,
        lambda i, u, A, B: not u.leq(A, B) or i.g[A] <= i.g[B],
        "A ≤ B implies g(A) ⊆ g(B)")
_clause("efq.1", P.EFQ, _inst_bottoms,
        lambda i, u, A: not u.is_bottom(A) or FALSUM in i.f[A],
        "A ≡ ⊥ implies ⊥ ∈ f(A)")
_clause("efq.2", P.EFQ, _inst_efq2,
        lambda i, u, A, B: not u.is_bottom(A) or A in i.g[B],
        "A ≡ ⊥ implies A ∈ g(B) for every B")
_clause("con.1", P.CON, _inst_con1,
        lambda i, u, A, B: not (B in i.f[A] and u.is_bottom(B)) or u.is_bottom(A),
        "an unsatisfiable effect only for an unsatisfiable A")
_clause("sup.1", P.SUP, _inst_all,
        lambda i, u, A: A in i.f[A],
        "A is a fixed point of f")
_clause("sup.2", P.SUP, _inst_sup2,
        lambda i, u, A, B: not u.leq(B, A) or B in i.g[A],
        "A↓ ⊆ g(A)")
_clause("cm.1", P.CM, _inst_conj_pairs,
        lambda i, u, A, B: not _tri(i, u, A, B) or _smyth(u, i.f[_conj(A, B)], i.f[A]),
        "A △ B implies f(A & B) ≼ f(A)")
_clause("cm.2", P.CM, _inst_cm2,
        lambda i, u, A, B, C: not (A in i.g[B] and A in i.g[C]) or _conj(A, B) in i.g[C],
        "A ∈ g(B) ∩ g(C) implies A & B ∈ g(C)")
_clause("cumul.1", P.CUMUL, _inst_conj_pairs,
        lambda i, u, A, B: not _tri(i, u, A, B) or (
            _smyth(u, i.f[A], i.f[_conj(A, B)]) and _smyth(u, i.f[_conj(A, B)], i.f[A])),
        "A △ B implies f(A) ≅ f(A & B)")
_clause("cumul.2", P.CUMUL, _inst_cumul2,
        lambda i, u, A, B, C: A not in i.g[B] or ((A in i.g[C]) == (_conj(A, B) in i.g[C])),
        "A ∈ g(B) implies (A ∈ g(C) iff A & B ∈ g(C))")
_clause("antirw.1", P.ANTIRW, _inst_antirw,
        lambda i, u, A, B, C, D: not (A in i.g[B] and A in i.g[D] and u.leq(B, C) and u.leq(C, D))
        or A in i.g[C],
        "A ∈ g(B), A ∈ g(D), B ≤ C ≤ D imply A ∈ g(C)")
del P


def clauses_of(x: Property) -> list[Clause]:
    x = Property(x)
    return [c for c in CLAUSES.values() if c.property is x]


def semantic_check(x: Property, i: Interpretation, u, atoms=None,
                   limit: int | None = None) -> tuple[bool, list[ViolationReport]]:
    """Whether ``i`` meets every clause of the constraint for ``x``."""
    x = Property(x)
    u.require(*i.formulas())
    reports: list[ViolationReport] = []
    for clause in clauses_of(x):
        seen = set()
        for w in clause.instances(i, u):
            key = tuple(w.items())
            if key in seen:
                continue
            seen.add(key)
            if not clause.holds(i, u, **w):
                reports.append(ViolationReport(x, "constraint-clause", clause.name,
                                               key, detail=clause.text))
                if limit and len(reports) >= limit:
                    return False, reports
    return not reports, reports


def replay_clause_violation(report: ViolationReport, i: Interpretation, u) -> bool:
    """True iff the reported clause still fails at the reported witnesses."""
    clause = CLAUSES[report.clause]
    return not clause.holds(i, u, **dict(report.witnesses))


def replay_violation(report: ViolationReport, subject, u) -> bool:
    """Replay a report against a conditional set (rules) or an interpretation."""
    if report.kind == "rule-instance":
        return replay_rule_violation(report, subject, u)
    return replay_clause_violation(report, subject, u)


# ---------------------------------------------------------------------------
# Enforcement


class _Mutable:
    """Working copy of an interpretation used during enforcement."""

    def __init__(self, i: Interpretation):
        self.f: dict[Formula, set] = defaultdict(set, i.f.to_dict())
        self.g: dict[Formula, set] = defaultdict(set, i.g.to_dict())
        self.changed = False

    def add_f(self, key: Formula, values: Iterable[Formula]) -> None:
        cur = self.f[key]
        for v in values:
            if v not in cur:
                cur.add(v)
                self.changed = True

    def add_g(self, key: Formula, values: Iterable[Formula]) -> None:
        cur = self.g[key]
        for v in values:
            if v not in cur:
                cur.add(v)
                self.changed = True

    def freeze(self) -> Interpretation:
        return Interpretation(ChoiceFunction(self.f), ChoiceFunction(self.g))

    def tri(self, u, a: Formula, b: Formula) -> bool:
        if a not in self.g.get(b, ()):
            return False
        mb = u.mask(b)
        return any(u.mask(x) & ~mb == 0 for x in self.f.get(a, ()))


def _step_f(x: Property, m: _Mutable, u, or_minimal: bool = False) -> None:
    """One round of effect-side additions for ``x``.

    For Or, enforcement adds the whole common up-set to ``f(A | B)``, which
    is monotone in the input; ``or_minimal`` adds only its minimal members.
    """
    get = lambda h, k: h.get(k, ())  # noqa: E731
    if x in (Property.REF, Property.SUP):
        for a in u:
            m.add_f(a, (a,))
    elif x is Property.EFQ:
        for a in u:
            if u.is_bottom(a):
                m.add_f(a, (FALSUM,))
    elif x is Property.LLE:
        done = set()
        for a in list(m.f):
            if a in done or not m.f[a]:
                continue
            cls = u.equivalents(a)
            done.update(cls)
            union = set().union(*(get(m.f, b) for b in cls))
            for b in cls:
                m.add_f(b, union)
    elif x is Property.MON:
        for b in list(m.f):
            for a in u.down(b):
                if a != b:
                    m.add_f(a, list(get(m.f, b)))
    elif x in (Property.CUT, Property.CM, Property.CUMUL):
        for a, b, ab in u.conjunctions():
            if m.tri(u, a, b):
                if x in (Property.CUT, Property.CUMUL):
                    m.add_f(a, list(get(m.f, ab)))
                if x in (Property.CM, Property.CUMUL):
                    m.add_f(ab, list(get(m.f, a)))
    elif x is Property.OR:
        for a, b, ab in u.disjunctions():
            fa, fb = get(m.f, a), get(m.f, b)
            if fa and fb:
                common = _up_set(u, fa) & _up_set(u, fb)
                m.add_f(ab, _min(u, common) if or_minimal else common)


def _step_g(x: Property, m: _Mutable, u) -> None:
    """One round of condition-side additions for ``x``."""
    get = lambda h, k: h.get(k, ())  # noqa: E731
    if x is Property.REF:
        for a in u:
            m.add_g(a, (a,))
    elif x is Property.SUP:
        for a in u:
            m.add_g(a, u.down(a))
    elif x is Property.EFQ:
        bottoms = [a for a in u if u.is_bottom(a)]
        for b in u:
            m.add_g(b, bottoms)
    elif x is Property.LLE:
        for c in list(m.g):
            for a in list(m.g[c]):
                m.add_g(c, u.equivalents(a))
    elif x is Property.RLE:
        done = set()
        for a in list(m.g):
            if a in done or not m.g[a]:
                continue
            cls = u.equivalents(a)
            done.update(cls)
            union = set().union(*(get(m.g, b) for b in cls))
            for b in cls:
                m.add_g(b, union)
    elif x is Property.MON:
        for c in list(m.g):
            for a in list(m.g[c]):
                m.add_g(c, u.down(a))
    elif x is Property.RW:
        for a in list(m.g):
            if m.g[a]:
                for b in u.up(a):
                    m.add_g(b, list(m.g[a]))
    elif x in (Property.CUT, Property.CM, Property.CUMUL):
        inv: dict[Formula, set] = defaultdict(set)
        for b, conds in m.g.items():
            for a in conds:
                inv[a].add(b)
        for a, b, ab in u.conjunctions():
            if a not in get(m.g, b):
                continue
            if x in (Property.CUT, Property.CUMUL):
                for c in list(inv.get(ab, ())):
                    m.add_g(c, (a,))
            if x in (Property.CM, Property.CUMUL):
                for c in list(inv.get(a, ())):
                    m.add_g(c, (ab,))
    elif x is Property.OR:
        for c in list(m.g):
            conds = list(m.g[c])
            for a in conds:
                for b in conds:
                    ab = u.disj(a, b)
                    if ab is not None:
                        m.add_g(c, (ab,))
    elif x is Property.ANTIRW:
        inv = defaultdict(set)
        for b, conds in m.g.items():
            for a in conds:
                inv[a].add(b)
        for a, bs in inv.items():
            for b in list(bs):
                for d in list(bs):
                    if b != d and u.leq(b, d):
                        for c in u.up(b):
                            if u.leq(c, d):
                                m.add_g(c, (a,))


def _enforce_all(props: Iterable[Property], i: Interpretation, u) -> Interpretation:
    props = [Property(p) for p in props]
    m = _Mutable(i)
    while True:
        m.changed = False
        for x in props:
            _step_g(x, m, u)
            _step_f(x, m, u)
        if not m.changed:
            return m.freeze()


def semantic_enforce(x: Property, i: Interpretation, u, atoms=None) -> Interpretation:
    """Least-growth extension of ``i`` meeting the constraint for ``x``.

    Smyth clauses are met by copying the whole image (for Cut, ``f(A & B)``
    into ``f(A)``), which keeps enforcement monotone in ``i``; copying only
    the members lacking a lower bound would give smaller but order-dependent
    results. Additions are iterated to a fix point over the universe.
    """
    x = Property(x)
    if x not in ENFORCEABLE:
        raise PropertyUsageError(
            f"{x} cannot be enforced by extension; use the syntactic route"
        )
    u.require(*i.formulas())
    return _enforce_all([x], i, u)


def enforce_jointly(props: Iterable[Property], i: Interpretation, u) -> Interpretation:
    """Enforce several extension-shaped constraints to a joint fix point."""
    props = [Property(p) for p in props]
    bad = [p.value for p in props if p not in ENFORCEABLE]
    if bad:
        raise PropertyUsageError(f"cannot enforce by extension: {', '.join(bad)}")
    u.require(*i.formulas())
    return _enforce_all(props, i, u)


# ---------------------------------------------------------------------------
# Models built from closed sets


def glb_representative(u, fs: Iterable[Formula]) -> Formula | None:
    """A universe member equivalent to the meet of ``fs`` (first in member order)."""
    mask = (1 << (1 << len(u.atoms))) - 1
    for x in fs:
        mask &= u.mask(x)
    reps = u.with_mask(mask)
    return reps[0] if reps else None


def _and_repair(m: _Mutable, u) -> None:
    """Give each effect set a single ≤-minimal class by adding its meet."""
    for a in list(m.f):
        mins = _min(u, m.f[a])
        if len({u.mask(x) for x in mins}) > 1:
            rep = glb_representative(u, mins)
            if rep is not None:
                m.add_f(a, (rep,))


@dataclass
class ConstructionLog:
    """Which effect-side additions were needed beyond the characteristic model."""

    rounds: int = 0
    added: dict[str, int] = field(default_factory=dict)


def constructed_model(s: Iterable[Conditional], properties: Iterable[Property], u,
                      log: ConstructionLog | None = None) -> Interpretation:
    """A model characterising ``s`` built to meet the constraints of ``properties``.

    Starts from the characteristic model, adds ``A`` to ``f(A)`` for Ref/Sup,
    unions effects over ≡-classes for LLE, adds the minimal common upper
    bounds to ``f(A | B)`` for Or, and meets for And. The remaining
    effect-side clauses (Cut, CM, Cumul, Mon) are then repaired by adding
    effects. Only ``f`` grows, and ``g`` stays that of the characteristic
    model, so the satisfied set is exactly ``s``.
    """
    s = frozenset(s)
    props = {Property(p) for p in properties}
    m = _Mutable(characteristic_model(s, u.atoms))
    log = log if log is not None else ConstructionLog()

    def run(label: str, step) -> None:
        before = sum(len(v) for v in m.f.values())
        step()
        delta = sum(len(v) for v in m.f.values()) - before
        if delta:
            log.added[label] = log.added.get(label, 0) + delta

    if props & {Property.REF, Property.SUP}:
        run("ref/sup", lambda: _step_f(Property.REF, m, u))
    if Property.EFQ in props:
        run("efq", lambda: _step_f(Property.EFQ, m, u))
    order = [p for p in (Property.LLE, Property.OR, Property.MON, Property.CUT,
                         Property.CM, Property.CUMUL) if p in props]
    while True:
        log.rounds += 1
        m.changed = False
        for p in order:
            run(p.value, lambda p=p: _step_f(p, m, u, or_minimal=True))
        if Property.AND in props:
            run("and", lambda: _and_repair(m, u))
        if not m.changed:
            break
    return m.freeze()


def repair_for_sampling(x: Property, i: Interpretation, u) -> Interpretation:
    """Push a random interpretation towards the constraint for ``x``.

    Extension-shaped constraints are enforced. And gets its condition clause
    enforced and its effect minima merged; Con drops offending effects;
    Cumul is enforced as Cut plus CM. The result still has to pass
    :func:`semantic_check` before it counts as a sample.
    """
    x = Property(x)
    if x in ENFORCEABLE:
        return semantic_enforce(x, i, u)
    if x is Property.CUMUL:
        return _enforce_all([Property.CUMUL], i, u)
    m = _Mutable(i)
    if x is Property.AND:
        while True:
            m.changed = False
            for b, c, bc in u.conjunctions():
                common = m.g.get(b, set()) & m.g.get(c, set())
                m.add_g(bc, common)
            _and_repair(m, u)
            if not m.changed:
                break
    elif x is Property.CON:
        for a in list(m.f):
            if not u.is_bottom(a):
                m.f[a] = {b for b in m.f[a] if not u.is_bottom(b)}
    return m.freeze()
