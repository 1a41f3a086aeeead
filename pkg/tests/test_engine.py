import random

import pytest

from condchoice.conditionals import Conditional, cond, parse_kb
from condchoice.engine import (
    ConViolation,
    ExhaustiveCapExceeded,
    RouteMismatch,
    atom_universe,
    close,
    close_with_counts,
    derive,
    kb_universe,
    replay,
    verify_correspondence,
)
from condchoice.formula import AtomSet, parse_formula
from condchoice.properties import (
    ENFORCEABLE,
    RULE_PROPERTIES,
    PropertyUsageError,
    is_closed_under,
    rule_consequences,
    semantic_check,
)
from condchoice.universe import build_universe

from conftest import random_set

P = parse_formula


def naive_close(s, rules, u):
    """Add one consequence at a time until nothing new appears."""
    s = set(s)
    while True:
        for r in rules:
            new = sorted(rule_consequences(r, frozenset(s), u) - s, key=str)
            if new:
                s.add(new[0])
                break
        else:
            return frozenset(s)


class TestClose:
    def test_feline(self):
        s, atoms = parse_kb("f => c\nf & c => m\n")
        u = kb_universe(s, atoms, depth=0)
        out = close(s, ["ref", "cut"], u)
        assert cond("f", "m") in out
        assert {Conditional(a, a) for a in u} <= out

    def test_no_axioms(self, u2):
        assert close(frozenset(), ["cut", "cm", "and", "or", "rw", "mon"], u2) == frozenset()

    def test_rw(self):
        u = build_universe([P("b | c")], AtomSet(["a", "b", "c"]), depth=1)
        out = close({cond("a", "b")}, ["rw"], u)
        assert cond("a", "b | c") in out
        assert out == {Conditional(P("a"), x) for x in u.up(P("b"))}
        assert out == naive_close({cond("a", "b")}, ["rw"], u)

    def test_against_naive_oracle(self, u2):
        rng = random.Random(4)
        for _ in range(25):
            rules = rng.sample(RULE_PROPERTIES, rng.randint(1, 3))
            t = random_set(rng, u2, 0, 3)
            assert close(t, rules, u2) == naive_close(t, rules, u2)

    def test_con_rejected(self, u2):
        with pytest.raises(PropertyUsageError):
            close(frozenset(), ["con"], u2)

    def test_missing_constructor(self):
        u = build_universe((), AtomSet(["a"]), ["disjunction"], depth=1)
        with pytest.raises(PropertyUsageError, match="and"):
            close(frozenset(), ["and"], u)

    def test_counts(self):
        s, atoms = parse_kb("f => c\nf & c => m\n")
        u = kb_universe(s, atoms, depth=0)
        out, counts = close_with_counts(s, ["ref", "cut"], u)
        assert counts["ref"] == len(u)
        assert sum(counts.values()) == len(out - s)


class TestDerive:
    def test_sup_from_nothing(self):
        u = atom_universe(2, 1)
        res = derive(frozenset(), ["sup"], universe=u, atoms=u.atoms)
        assert res.derived == {Conditional(a, b) for a in u for b in u if u.leq(a, b)}

    def test_routes_agree(self, u2):
        rng = random.Random(9)
        for _ in range(20):
            kb = random_set(rng, u2, 1, 4)
            res = derive(kb, ["cut", "cm"], universe=u2, atoms=u2.atoms)
            assert res.routes_agree is True
            sem = derive(kb, ["cut", "cm"], universe=u2, atoms=u2.atoms, semantic=True)
            assert sem.derived == res.derived

    def test_closed_and_superset(self, u2):
        rng = random.Random(10)
        for _ in range(10):
            kb = random_set(rng, u2, 1, 4)
            props = rng.sample(RULE_PROPERTIES, 2)
            res = derive(kb, props, universe=u2, atoms=u2.atoms)
            assert kb <= res.derived
            assert all(is_closed_under(p, res.derived, u2)[0] for p in props)

    def test_semantic_needs_enforceable(self, u2):
        with pytest.raises(PropertyUsageError):
            derive(frozenset(), ["and"], universe=u2, atoms=u2.atoms, semantic=True)

    def test_con_reported(self):
        kb, atoms = parse_kb("a => false\n")
        res = derive(kb, ["con", "ref"], atoms=atoms, depth=0)
        assert [r.premises for r in res.con_violations] == [(cond("a", "false"),)]
        with pytest.raises(ConViolation):
            derive(kb, ["con"], atoms=atoms, depth=0, strict_con=True)

    def test_route_mismatch_is_loud(self):
        kb, atoms = parse_kb("f => c\nf & c => m\n")
        res = derive(kb, ["ref", "cut"], atoms=atoms, depth=0, semantic=True)
        assert res.routes_agree
        assert issubclass(RouteMismatch, AssertionError)


class TestVerify:
    def test_ref_exhaustive(self):
        r = verify_correspondence("ref", 1, 0, "exhaustive")
        assert r.passed and r.trials["rules_to_model"] > 0 and r.trials["model_to_rules"] > 0

    def test_cut_sampled(self):
        r = verify_correspondence("cut", 2, 1, "sampled", samples=500, seed=42)
        assert r.passed and r.inconclusive == 0
        assert r.to_json()["trials"] == 1000

    def test_cap(self):
        with pytest.raises(ExhaustiveCapExceeded):
            verify_correspondence("ref", 2, 1, "exhaustive")

    def test_deterministic(self):
        a = verify_correspondence("or", 2, 1, "sampled", samples=50, seed=3).to_json()
        b = verify_correspondence("or", 2, 1, "sampled", samples=50, seed=3).to_json()
        assert a == b

    @pytest.mark.parametrize("x", ["rw", "mon", "con", "efq"])
    def test_mutation_hook(self, x):
        def lenient(prop, i, u):
            return True, []

        r = verify_correspondence(x, 2, 1, "sampled", samples=100, seed=1, checker=lenient)
        assert not r.passed
        u = r.universe
        for cx in r.counterexamples:
            assert replay(cx, u)

    def test_mutated_direction_one(self):
        # a checker that skips clause 2 accepts models the constructed model never needs,
        # but one that rejects everything makes every constructed model a counterexample
        def strict(prop, i, u):
            ok, reports = semantic_check(prop, i, u)
            return False, reports

        r = verify_correspondence("rw", 1, 0, "exhaustive", checker=strict)
        assert r.counterexamples and all(cx.direction == 1 for cx in r.counterexamples)


def test_enforceable_set():
    assert {p.value for p in ENFORCEABLE} == {
        "ref", "cut", "cm", "mon", "rw", "lle", "rle", "efq", "sup", "or", "antirw"}


class TestDerivedImplications:
    @pytest.mark.parametrize("rules,target", [(["ref", "rw"], "sup"), (["rw"], "antirw")])
    def test_holds(self, rules, target, u2):
        rng = random.Random(target)
        for _ in range(50):
            s = close(random_set(rng, u2, 0, 4), rules, u2)
            assert is_closed_under(target, s, u2)[0]

    def test_cumul_is_cut_plus_cm(self, u2):
        rng = random.Random(12)
        for _ in range(50):
            t = random_set(rng, u2, 0, 5)
            assert close(t, ["cut", "cm"], u2) == close(t, ["cumul"], u2)

    def test_efq_not_implied(self, u2):
        # the empty set is closed under rle, and, rw but efq demands false => B
        assert all(is_closed_under(r, frozenset(), u2)[0] for r in ("rle", "and", "rw"))
        ok, reports = is_closed_under("efq", frozenset(), u2)
        assert not ok and all(u2.is_bottom(r.conclusion.antecedent) for r in reports)
        assert any(r.conclusion == cond("false", "a") for r in reports)
        # ref supplies the missing premise: ref + rw already gives efq
        s = close(frozenset(), ["ref", "rw"], u2)
        assert is_closed_under("efq", s, u2)[0]


class TestFelineJointFixpoint:
    """Joint ref+cut closure adds f => f & c on top of the listed derivations."""

    def test_extra_conditional(self):
        kb, atoms = parse_kb("f => c\nf & c => m\n")
        u = kb_universe(kb, atoms, depth=0)
        out = close(kb, ["ref", "cut"], u)
        expected = kb | {cond("f", "m")} | {Conditional(a, a) for a in u}
        assert out - expected == {cond("f", "f & c")}
        # f & c => f & c (ref) with f => c gives f => f & c by cut
        assert cond("f", "f & c") in rule_consequences("cut", kb | {cond("f & c", "f & c")}, u)
        sem = derive(kb, ["ref", "cut"], universe=u, atoms=atoms, semantic=True)
        assert sem.derived == out
