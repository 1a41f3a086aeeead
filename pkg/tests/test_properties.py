import random

import pytest

from condchoice.conditionals import Conditional, cond, parse_kb
from condchoice.engine import close, kb_universe
from condchoice.formula import FALSUM, AtomSet, parse_formula
from condchoice.interpretation import (
    ChoiceFunction,
    Interpretation,
    characteristic_model,
    initial_model,
    satisfied_set,
)
from condchoice.properties import (
    ALL_PROPERTIES,
    ENFORCEABLE,
    RULE_PROPERTIES,
    Property,
    PropertyUsageError,
    constructed_model,
    is_closed_under,
    parse_properties,
    replay_violation,
    rule_consequences,
    semantic_check,
    semantic_enforce,
)
from condchoice.universe import FormulaUniverse

from conftest import random_set

P = parse_formula


def explicit_universe(*texts, atoms="a,b,c"):
    return FormulaUniverse([P(t) for t in texts] + [FALSUM], AtomSet(atoms.split(",")))


def random_interpretation(rng, u, density=0.3):
    members = list(u)

    def pick():
        return ChoiceFunction({a: rng.sample(members, rng.randint(1, 2))
                               for a in members if rng.random() < density})
    return Interpretation(pick(), pick())


@pytest.fixture
def feline():
    s, atoms = parse_kb("f => c\nf & c => m\n")
    return s, kb_universe(s, atoms, depth=0)


class TestNames:
    def test_tokens(self):
        assert [p.value for p in ALL_PROPERTIES] == [
            "lle", "rle", "ref", "cut", "mon", "and", "or", "rw",
            "efq", "con", "sup", "cm", "cumul", "antirw"]

    def test_parse(self):
        assert parse_properties("ref, cut,ref") == [Property.REF, Property.CUT]
        assert parse_properties("all") == list(ALL_PROPERTIES)
        with pytest.raises(PropertyUsageError):
            parse_properties("monotony")


class TestRules:
    def test_cut_feline(self, feline):
        s, u = feline
        assert rule_consequences("cut", s, u) == {cond("f", "m")}

    def test_ref_axiom(self, u2):
        assert rule_consequences("ref", frozenset(), u2) == {Conditional(a, a) for a in u2}

    def test_and(self):
        u = explicit_universe("a", "b", "c", "b & c")
        s = {cond("a", "b"), cond("a", "c")}
        assert rule_consequences("and", s, u) - s == {cond("a", "b & c")}

    def test_con_is_not_a_rule(self, u2):
        with pytest.raises(PropertyUsageError):
            rule_consequences("con", frozenset(), u2)

    def test_or_needs_member(self):
        u = explicit_universe("a", "b", "c")
        assert rule_consequences("or", {cond("a", "c"), cond("b", "c")}, u) <= {cond("a", "c"), cond("b", "c")}

    def test_cut_matches_syntax_only(self):
        u = explicit_universe("a", "b", "c", "b & a")
        s = {cond("b & a", "c"), cond("a", "b")}
        assert rule_consequences("cut", s, u) == frozenset()

    def test_outside_universe(self, feline):
        _, u = feline
        from condchoice.universe import OutsideUniverse
        with pytest.raises(OutsideUniverse):
            rule_consequences("rw", {cond("z", "z")}, u)


class TestClosedUnder:
    def test_con(self):
        u = explicit_universe("a")
        ok, reports = is_closed_under("con", {cond("a", "false")}, u)
        assert not ok and reports[0].premises == (cond("a", "false"),)

    def test_vacuous(self, u2):
        assert is_closed_under("cut", frozenset(), u2) == (True, [])

    @pytest.mark.parametrize("x", RULE_PROPERTIES)
    def test_close_output_is_closed(self, x, u2):
        rng = random.Random(hash(x.value) % 1000)
        for _ in range(10):
            s = close(random_set(rng, u2, 0, 4), [x], u2)
            assert is_closed_under(x, s, u2)[0]

    def test_reports_replay(self, u2):
        rng = random.Random(11)
        for x in RULE_PROPERTIES:
            s = random_set(rng, u2, 2, 6)
            ok, reports = is_closed_under(x, s, u2)
            for r in reports:
                assert r.kind == "rule-instance"
                assert replay_violation(r, s, u2)
                assert not replay_violation(r, s | {r.conclusion}, u2)


class TestSemanticCheck:
    def test_feline_ref(self, feline):
        s, u = feline
        i = semantic_enforce("cut", semantic_enforce("ref", initial_model(s, u.atoms), u), u)
        assert semantic_check("ref", i, u)[0]

    def test_and_on_closed_set(self, u2):
        rng = random.Random(2)
        for _ in range(30):
            s = close(random_set(rng, u2, 1, 4), ["and"], u2)
            assert semantic_check("and", constructed_model(s, ["and"], u2), u2)[0]

    def test_cut_clause_two(self):
        u = explicit_universe("a", "b", "c", "a & c")
        i = Interpretation(ChoiceFunction({P("a & c"): {P("b")}}),
                           ChoiceFunction({P("c"): {P("a")}, P("b"): {P("a & c")}}))
        ok, reports = semantic_check("cut", i, u)
        assert not ok
        assert {r.clause for r in reports} == {"cut.2"}
        assert all(replay_violation(r, i, u) for r in reports)

    def test_cut_clause_one(self):
        u = explicit_universe("a", "b", "c", "a & c")
        i = Interpretation(ChoiceFunction({P("a"): {P("c")}, P("a & c"): {P("b")}}),
                           ChoiceFunction({P("c"): {P("a")}}))
        ok, reports = semantic_check("cut", i, u)
        assert [r.clause for r in reports] == ["cut.1"]
        assert dict(reports[0].witnesses) == {"A": P("a"), "B": P("c")}

    def test_con(self):
        u = explicit_universe("a")
        i = Interpretation(ChoiceFunction({P("a"): {FALSUM}}), ChoiceFunction())
        ok, reports = semantic_check("con", i, u)
        assert not ok and reports[0].clause == "con.1"

    def test_empty_interpretation(self, u2):
        # clauses that demand content fail, the rest hold vacuously
        needs_content = {Property.REF, Property.EFQ, Property.SUP}
        for x in ALL_PROPERTIES:
            assert semantic_check(x, Interpretation.empty(), u2)[0] == (x not in needs_content)

    def test_reports_replay_on_random_models(self, u2):
        rng = random.Random(8)
        for _ in range(20):
            i = random_interpretation(rng, u2)
            for x in ALL_PROPERTIES:
                for r in semantic_check(x, i, u2)[1]:
                    assert replay_violation(r, i, u2), r.describe()


class TestEnforce:
    def test_ref_on_empty(self, u2):
        i = semantic_enforce("ref", Interpretation.empty(), u2)
        assert all(i.f[a] == {a} and i.g[a] == {a} for a in u2)

    def test_rw(self):
        u = explicit_universe("a", "b", "c", "b & c")
        i = semantic_enforce("rw", characteristic_model({cond("a", "b & c")}, u.atoms), u)
        assert P("a") in i.g[P("b")]
        assert semantic_check("rw", i, u)[0]

    def test_feline_sequential(self, feline):
        s, u = feline
        i = semantic_enforce("ref", semantic_enforce("cut", initial_model(s, u.atoms), u), u)
        f, c, m, fc = P("f"), P("c"), P("m"), P("f & c")
        assert i.f[f] == {c, m, f} and i.f[fc] == {m, fc}
        assert i.g[c] == {f, c} and i.g[m] == {f, fc, m}
        for a in (c, m, FALSUM):
            assert i.f[a] == {a}
        assert i.g[f] == {f} and i.g[fc] == {fc} and i.g[FALSUM] == {FALSUM}

    @pytest.mark.parametrize("x", ["and", "con", "cumul"])
    def test_rejected(self, x, u2):
        with pytest.raises(PropertyUsageError):
            semantic_enforce(x, Interpretation.empty(), u2)

    @pytest.mark.parametrize("x", sorted(ENFORCEABLE))
    def test_laws(self, x, u2):
        rng = random.Random(x.value)
        for _ in range(30):
            i = random_interpretation(rng, u2, 0.2)
            extra = random_interpretation(rng, u2, 0.1)
            e = semantic_enforce(x, i, u2)
            assert i.issubset(e)
            assert semantic_check(x, e, u2)[0]
            assert semantic_enforce(x, e, u2) == e
            bigger = semantic_enforce(x, i.union(extra), u2)
            assert e.issubset(bigger), f"{x} not monotone"


class TestConstructedModel:
    @pytest.mark.parametrize("x", RULE_PROPERTIES)
    def test_exact(self, x, u2):
        rng = random.Random(x.value)
        for _ in range(10):
            s = close(random_set(rng, u2, 0, 4), [x], u2)
            m = constructed_model(s, [x], u2)
            assert satisfied_set(m, u2) == s
            assert semantic_check(x, m, u2)[0]
