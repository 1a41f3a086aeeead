"""Closure of conditional sets, KB derivation, and correspondence verification."""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .conditionals import Conditional, serialize_kb, sorted_conditionals
from .formula import AtomSet
from .interpretation import (
    ChoiceFunction,
    Interpretation,
    characteristic_model,
    initial_model,
    model_to_json,
    satisfied_set,
)
from .properties import (
    ENFORCEABLE,
    REQUIRED_CONSTRUCTOR,
    ConstructionLog,
    Property,
    PropertyUsageError,
    ViolationReport,
    con_violations,
    constructed_model,
    enforce_jointly,
    is_closed_under,
    repair_for_sampling,
    replay_violation,
    rule_consequences,
    semantic_check,
)
from .universe import DEFAULT_CONSTRUCTORS, MAX_UNIVERSE, FormulaUniverse, build_universe

UNIVERSE_NOTE = "all results are relative to the finite formula universe"


class ExhaustiveCapExceeded(ValueError):
    pass


def _rules(rules: Iterable) -> list[Property]:
    out = []
    for r in rules:
        r = Property(r)
        if r not in out:
            out.append(r)
    return out


def check_constructors(rules: Iterable[Property], u: FormulaUniverse) -> None:
    for r in rules:
        need = REQUIRED_CONSTRUCTOR.get(Property(r))
        if need and need not in u.constructors:
            raise PropertyUsageError(
                f"rule {Property(r).value} needs the {need} constructor, "
                "which the universe was not built with"
            )


def close_with_counts(s: Iterable[Conditional], rules: Iterable, u: FormulaUniverse
                      ) -> tuple[frozenset, dict[str, int]]:
    """Round-robin forward chaining; also counts first derivations per rule."""
    rules = _rules(rules)
    if Property.CON in rules:
        raise PropertyUsageError("con is validated, not fired; drop it from the rule list")
    check_constructors(rules, u)
    current = set(s)
    for c in current:
        u.require(c.antecedent, c.consequent)
    counts = {r.value: 0 for r in rules}
    while True:
        snapshot = frozenset(current)
        fresh: set = set()
        for r in rules:
            new = rule_consequences(r, snapshot, u) - snapshot - fresh
            counts[r.value] += len(new)
            fresh |= new
        if not fresh:
            return snapshot, counts
        current |= fresh


def close(s: Iterable[Conditional], rules: Iterable, u: FormulaUniverse, atoms=None) -> frozenset:
    """Least superset of ``s`` closed under ``rules`` within the universe."""
    return close_with_counts(s, rules, u)[0]


# ---------------------------------------------------------------------------
# Derivation


@dataclass
class DerivationResult:
    kb: frozenset
    universe: FormulaUniverse
    properties: list[Property]
    derived: frozenset
    interpretation: Interpretation
    route: str
    firing_counts: dict[str, int] = field(default_factory=dict)
    con_violations: list[ViolationReport] = field(default_factory=list)
    routes_agree: bool | None = None

    @property
    def new(self) -> frozenset:
        return self.derived - self.kb

    def to_json(self) -> dict:
        return {
            "universe": self.universe.summary(),
            "properties": [p.value for p in self.properties],
            "route": self.route,
            "kb": [str(c) for c in sorted_conditionals(self.kb)],
            "derived": [str(c) for c in sorted_conditionals(self.derived)],
            "firing_counts": dict(sorted(self.firing_counts.items())),
            "con_violations": [r.to_json() for r in self.con_violations],
            "routes_agree": self.routes_agree,
            "model": model_to_json(self.interpretation, self.universe.atoms),
        }


class RouteMismatch(AssertionError):
    pass


def kb_universe(kb: Iterable[Conditional], atoms: AtomSet, depth: int = 1,
                constructors=DEFAULT_CONSTRUCTORS, max_size: int = MAX_UNIVERSE) -> FormulaUniverse:
    seeds = {x for c in kb for x in (c.antecedent, c.consequent)}
    return build_universe(seeds, atoms, constructors, depth, max_size)


def semantic_route(kb: Iterable[Conditional], props: Iterable[Property], u: FormulaUniverse
                   ) -> tuple[frozenset, Interpretation]:
    """Initial KB model, joint enforcement to a fix point, then read off triangles."""
    i = enforce_jointly(props, initial_model(kb, u.atoms), u)
    return satisfied_set(i, u), i


def derive(kb: Iterable[Conditional], properties: Iterable, *, atoms: AtomSet | None = None,
           universe: FormulaUniverse | None = None, depth: int = 1,
           constructors=DEFAULT_CONSTRUCTORS, max_universe: int = MAX_UNIVERSE,
           semantic: bool = False, cross_check: bool = True,
           strict_con: bool = False) -> DerivationResult:
    """Derive the consequences of ``kb`` under ``properties``.

    The syntactic route closes the KB and models the result with the
    characteristic model. The semantic route (``semantic=True``) enforces the
    constraints on the initial KB model and reads off the satisfied set. When
    both routes apply they are compared and a mismatch raises.
    """
    kb = frozenset(kb)
    props = _rules(properties)
    if atoms is None:
        from .conditionals import conditional_atoms
        atoms = conditional_atoms(kb)
    u = universe or kb_universe(kb, atoms, depth, constructors, max_universe)
    fired = [p for p in props if p is not Property.CON]
    enforceable = all(p in ENFORCEABLE for p in fired)
    if semantic and not enforceable:
        bad = ", ".join(p.value for p in fired if p not in ENFORCEABLE)
        raise PropertyUsageError(f"semantic route not available for: {bad}")

    derived, counts = close_with_counts(kb, fired, u)
    if semantic:
        sem_derived, model = semantic_route(kb, fired, u)
        route = "semantic"
        agree = sem_derived == derived
        if cross_check and not agree:
            raise RouteMismatch(_mismatch_text(derived, sem_derived))
        derived = sem_derived
    else:
        model = characteristic_model(derived, atoms)
        route = "syntactic"
        agree = None
        if cross_check and enforceable and fired:
            agree = semantic_route(kb, fired, u)[0] == derived
            if not agree:
                raise RouteMismatch(_mismatch_text(derived, semantic_route(kb, fired, u)[0]))

    con = con_violations(derived, u) if Property.CON in props else []
    if con and strict_con:
        raise ConViolation(con)
    return DerivationResult(kb, u, props, derived, model, route, counts, con, agree)


class ConViolation(Exception):
    def __init__(self, reports: list[ViolationReport]):
        super().__init__("; ".join(r.describe() for r in reports))
        self.reports = reports


def _mismatch_text(a: frozenset, b: frozenset) -> str:
    only_a = [str(c) for c in sorted_conditionals(a - b)]
    only_b = [str(c) for c in sorted_conditionals(b - a)]
    return f"syntactic and semantic routes disagree: syntactic-only {only_a}, semantic-only {only_b}"


# ---------------------------------------------------------------------------
# Correspondence verification


Checker = Callable[[Property, Interpretation, FormulaUniverse], tuple[bool, list]]


def default_checker(x: Property, i: Interpretation, u: FormulaUniverse):
    return semantic_check(x, i, u)


@dataclass
class Counterexample:
    """A replayable failure: the set or model, and the reports that failed."""

    direction: int
    property: Property
    conditionals: frozenset
    interpretation: Interpretation | None
    reports: list[ViolationReport]
    exact: bool = True

    def to_json(self, atoms: AtomSet) -> dict:
        out = {
            "direction": self.direction,
            "property": self.property.value,
            "conditionals": [str(c) for c in sorted_conditionals(self.conditionals)],
            "violations": [r.to_json() for r in self.reports],
            "exact": self.exact,
        }
        if self.interpretation is not None:
            out["model"] = model_to_json(self.interpretation, atoms)
        return out


def replay(cx: Counterexample, u: FormulaUniverse) -> bool:
    """True iff the counterexample still exhibits a failure under the real definitions."""
    if cx.direction == 1:
        if satisfied_set(cx.interpretation, u) != cx.conditionals:
            return True
        return any(replay_violation(r, cx.interpretation, u) for r in cx.reports)
    return any(replay_violation(r, cx.conditionals, u) for r in cx.reports)


@dataclass
class VerificationReport:
    property: Property
    mode: str
    atoms: int
    depth: int
    universe_size: int
    seed: int | None
    trials: dict[str, int] = field(default_factory=lambda: {"rules_to_model": 0, "model_to_rules": 0})
    inconclusive: int = 0
    counterexamples: list[Counterexample] = field(default_factory=list)
    repairs: dict[str, int] = field(default_factory=dict)
    universe: FormulaUniverse | None = None

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def to_json(self) -> dict:
        atoms = self.universe.atoms if self.universe else AtomSet([])
        return {
            "property": self.property.value,
            "mode": self.mode,
            "note": UNIVERSE_NOTE,
            "atoms": self.atoms,
            "depth": self.depth,
            "universe_size": self.universe_size,
            "seed": self.seed,
            "trials": sum(self.trials.values()),
            "trials_by_direction": dict(self.trials),
            "inconclusive": self.inconclusive,
            "constructed_model_additions": dict(sorted(self.repairs.items())),
            "counterexamples": [c.to_json(atoms) for c in self.counterexamples],
        }

    def table(self) -> str:
        lines = [
            f"# {UNIVERSE_NOTE}",
            f"property   {self.property.value}",
            f"mode       {self.mode}" + (f" (seed {self.seed})" if self.seed is not None else ""),
            f"universe   {self.universe_size} formulas, {self.atoms} atom(s), depth {self.depth}",
            f"rules->model trials  {self.trials['rules_to_model']}",
            f"model->rules trials  {self.trials['model_to_rules']}",
            f"inconclusive         {self.inconclusive}",
            f"counterexamples      {len(self.counterexamples)}",
            f"result     {'PASS' if self.passed else 'FAIL'}",
        ]
        for cx in self.counterexamples[:5]:
            lines.append(f"  direction {cx.direction}: S = {{{', '.join(map(str, sorted_conditionals(cx.conditionals)))}}}")
            if not cx.exact:
                lines.append("    constructed model does not characterise S")
            for r in cx.reports[:3]:
                lines.append(f"    {r.describe()}")
        return "\n".join(lines)


def atom_universe(n_atoms: int, depth: int, constructors=DEFAULT_CONSTRUCTORS,
                  max_size: int = MAX_UNIVERSE) -> FormulaUniverse:
    names = [chr(ord("a") + k) for k in range(n_atoms)]
    return build_universe((), AtomSet(names), constructors, depth, max_size)


def _closed_sets(x: Property, u: FormulaUniverse, seeds: Iterable[frozenset]):
    """Close each seed under ``x`` (Con: keep seeds that already satisfy it), deduplicated."""
    seen = set()
    for t in seeds:
        if x is Property.CON:
            if con_violations(t, u):
                continue
            s = t
        else:
            s = close(t, [x], u)
        if s not in seen:
            seen.add(s)
            yield s


def _check_rules_to_model(x, s, u, checker, report) -> None:
    log = ConstructionLog()
    model = constructed_model(s, [x], u, log)
    for k, v in log.added.items():
        report.repairs[k] = report.repairs.get(k, 0) + v
    ok, reports = checker(x, model, u)
    exact = satisfied_set(model, u) == s
    report.trials["rules_to_model"] += 1
    if not ok or not exact:
        report.counterexamples.append(Counterexample(1, x, s, model, list(reports), exact))


def _check_model_to_rules(x, i, u, report) -> None:
    s = satisfied_set(i, u)
    closed, reports = is_closed_under(x, s, u)
    report.trials["model_to_rules"] += 1
    if not closed:
        report.counterexamples.append(Counterexample(2, x, s, i, reports))


def _all_interpretations(u: FormulaUniverse):
    members = list(u)
    subsets = [frozenset(c) for k in range(len(members) + 1)
               for c in itertools.combinations(members, k)]
    for fs in itertools.product(subsets, repeat=len(members)):
        f = ChoiceFunction(zip(members, fs))
        for gs in itertools.product(subsets, repeat=len(members)):
            yield Interpretation(f, ChoiceFunction(zip(members, gs)))


def _random_interpretation(rng: random.Random, u: FormulaUniverse, density: float) -> Interpretation:
    members = list(u)
    def pick():
        out = {}
        for a in members:
            if rng.random() < density:
                out[a] = rng.sample(members, rng.randint(1, min(2, len(members))))
        return ChoiceFunction(out)
    return Interpretation(pick(), pick())


def verify_correspondence(x, n_atoms: int = 1, depth: int = 0, mode: str = "exhaustive",
                          samples: int = 200, seed: int = 0,
                          constructors=DEFAULT_CONSTRUCTORS, exhaustive_cap: int = 4,
                          max_tries: int = 10_000, checker: Checker | None = None,
                          universe: FormulaUniverse | None = None) -> VerificationReport:
    """Check both directions of the rule/constraint correspondence for ``x``.

    Rules to model: every set closed under ``x`` gets the constructed model,
    which must pass the constraint check and satisfy exactly that set.
    Model to rules: every model passing the check must have a satisfied set
    closed under ``x``. ``checker`` replaces the constraint check (used to
    test the harness itself).
    """
    x = Property(x)
    checker = checker or default_checker
    u = universe or atom_universe(n_atoms, depth, constructors)
    pairs = [Conditional(a, b) for a in u for b in u]
    report = VerificationReport(x, mode, len(u.atoms), u.depth, len(u),
                                seed if mode == "sampled" else None, universe=u)
    if mode == "exhaustive":
        if len(pairs) > exhaustive_cap:
            raise ExhaustiveCapExceeded(
                f"exhaustive mode needs |universe|^2 <= {exhaustive_cap}, got {len(pairs)}"
            )
        seeds = (frozenset(c) for k in range(len(pairs) + 1)
                 for c in itertools.combinations(pairs, k))
        for s in _closed_sets(x, u, seeds):
            _check_rules_to_model(x, s, u, checker, report)
        for i in _all_interpretations(u):
            if checker(x, i, u)[0]:
                _check_model_to_rules(x, i, u, report)
        return report
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")

    rng = random.Random(seed)
    seeds = []
    for _ in range(samples):
        k = rng.randint(1, 4)
        seeds.append(frozenset(rng.sample(pairs, k)))
    produced = 0
    for s in _closed_sets(x, u, seeds):
        _check_rules_to_model(x, s, u, checker, report)
        produced += 1
    # Con rejects some seeds; top up with fresh ones so the trial count holds
    tries = 0
    while produced < samples and tries < max_tries:
        tries += 1
        t = frozenset(rng.sample(pairs, rng.randint(1, 4)))
        if x is Property.CON and con_violations(t, u):
            continue
        _check_rules_to_model(x, t if x is Property.CON else close(t, [x], u), u, checker, report)
        produced += 1

    accepted = tries = 0
    while accepted < samples and tries < max_tries:
        tries += 1
        i = _random_interpretation(rng, u, rng.choice((0.15, 0.3, 0.5)))
        # raw draws are plain rejection sampling; repaired draws raise the hit rate
        if rng.random() < 0.5:
            i = repair_for_sampling(x, i, u)
        if not checker(x, i, u)[0]:
            continue
        accepted += 1
        _check_model_to_rules(x, i, u, report)
    report.inconclusive = samples - accepted
    return report


# ---------------------------------------------------------------------------
# Whole-theory checks used by the acceptance suite and the CLI


@dataclass
class CombinationResult:
    properties: list[Property]
    conditionals: frozenset
    interpretation: Interpretation
    reports: list[ViolationReport]
    exact: bool

    @property
    def passed(self) -> bool:
        return self.exact and not self.reports


def check_combination(props: Iterable, s: frozenset, u: FormulaUniverse) -> CombinationResult:
    """Build one constructed model for ``s`` and check every constraint of ``props``."""
    props = _rules(props)
    model = constructed_model(s, props, u)
    reports = []
    for p in props:
        reports.extend(semantic_check(p, model, u)[1])
    return CombinationResult(props, s, model, reports, satisfied_set(model, u) == s)


def random_closed_set(rng: random.Random, props: Iterable, u: FormulaUniverse,
                      max_seed: int = 4, tries: int = 200) -> frozenset | None:
    """Close a random seed under the rule-shaped ``props``; reject Con failures."""
    props = _rules(props)
    rules = [p for p in props if p is not Property.CON]
    pairs = [Conditional(a, b) for a in u for b in u]
    for _ in range(tries):
        t = frozenset(rng.sample(pairs, rng.randint(0, max_seed)))
        s = close(t, rules, u)
        if Property.CON in props and con_violations(s, u):
            continue
        return s
    return None


def rectangle_rule_gaps(s: frozenset, u: FormulaUniverse) -> list[tuple[Conditional, Conditional, Conditional]]:
    """Instances of ``A=>B, C=>D, A<=C, B<=D / A=>D`` whose conclusion is missing."""
    out = []
    conds = sorted_conditionals(s)
    for p in conds:
        for q in conds:
            if u.leq(p.antecedent, q.antecedent) and u.leq(p.consequent, q.consequent):
                concl = Conditional(p.antecedent, q.consequent)
                if concl not in s:
                    out.append((p, q, concl))
    return out


def dump_closed(s: Iterable[Conditional]) -> str:
    return serialize_kb(s)


def report_json(reports: list[VerificationReport]) -> str:
    data = [r.to_json() for r in reports]
    return json.dumps(data[0] if len(data) == 1 else data, indent=2) + "\n"


__all__ = [
    "close", "close_with_counts", "derive", "DerivationResult", "verify_correspondence",
    "VerificationReport", "Counterexample", "replay", "check_combination",
    "random_closed_set", "rectangle_rule_gaps", "atom_universe", "kb_universe",
    "RouteMismatch", "ConViolation", "ExhaustiveCapExceeded",
]
