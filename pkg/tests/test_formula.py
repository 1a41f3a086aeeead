import itertools
import pickle

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from condchoice.formula import (
    FALSUM,
    VERUM,
    And,
    Atom,
    AtomSet,
    FormulaSyntaxError,
    Iff,
    Implies,
    Not,
    Or,
    UndeclaredAtomError,
    countermodel,
    entails,
    equiv,
    parse_formula,
    print_canonical,
    strictly_below,
    truth_table,
)

from conftest import ATOMS3, formulas

a, b, c = Atom("a"), Atom("b"), Atom("c")


def evaluate(f, env):
    """Naive recursive evaluator, independent of the bitmask implementation."""
    kind = type(f).__name__
    if kind == "Atom":
        return env[f.name]
    if kind == "Falsum":
        return False
    if kind == "Verum":
        return True
    if kind == "Not":
        return not evaluate(f.child, env)
    left, right = evaluate(f.left, env), evaluate(f.right, env)
    return {
        "And": left and right,
        "Or": left or right,
        "Implies": (not left) or right,
        "Iff": left == right,
    }[kind]


class TestParse:
    def test_conjunction(self):
        assert parse_formula("f & c") == And(Atom("f"), Atom("c"))

    def test_negation_binds_tightest(self):
        assert parse_formula("!a | b") == Or(Not(a), b)

    def test_implication_right_assoc(self):
        assert parse_formula("a -> b -> c") == Implies(a, Implies(b, c))

    def test_left_assoc(self):
        assert parse_formula("a & b & c") == And(And(a, b), c)
        assert parse_formula("a <-> b <-> c") == Iff(Iff(a, b), c)

    def test_constants_and_comments(self):
        assert parse_formula("false | true # tail") == Or(FALSUM, VERUM)

    def test_collect_mode(self):
        f, atoms = parse_formula("b & a", "collect")
        assert f == And(b, a)
        assert list(atoms) == ["a", "b"]

    def test_undeclared(self):
        with pytest.raises(UndeclaredAtomError):
            parse_formula("a & z", AtomSet(["a"]))

    @pytest.mark.parametrize("text", ["a &", "(a", "a b", "A", "& a", "a -> ", ""])
    def test_syntax_errors(self, text):
        with pytest.raises(FormulaSyntaxError):
            parse_formula(text)

    def test_error_position(self):
        with pytest.raises(FormulaSyntaxError) as e:
            parse_formula("a |\n  & b")
        assert (e.value.line, e.value.column) == (2, 3)

    def test_no_normalisation(self):
        assert parse_formula("a & b") != parse_formula("b & a")


class TestPrint:
    def test_examples(self):
        assert print_canonical(And(Atom("f"), Atom("c"))) == "f & c"
        assert print_canonical(Not(Or(a, b))) == "!(a | b)"
        assert print_canonical(Implies(And(a, b), c)) == "a & b -> c"

    def test_associativity_parens(self):
        assert print_canonical(Implies(Implies(a, b), c)) == "(a -> b) -> c"
        assert print_canonical(And(a, And(b, c))) == "a & (b & c)"

    @given(formulas())
    def test_round_trip(self, f):
        assert parse_formula(print_canonical(f)) == f

    @given(formulas())
    def test_pickle(self, f):
        assert pickle.loads(pickle.dumps(f)) == f


class TestTruthTable:
    def test_examples(self):
        assert truth_table(a, AtomSet(["a"])).bits == (0, 1)
        assert truth_table(FALSUM, AtomSet(["a", "b"])).bits == (0, 0, 0, 0)
        assert truth_table(Iff(a, b), AtomSet(["a", "b"])).bits == (1, 0, 0, 1)

    def test_undeclared(self):
        with pytest.raises(UndeclaredAtomError):
            truth_table(c, AtomSet(["a"]))

    @settings(max_examples=300)
    @given(formulas(), st.integers(0, 7))
    def test_matches_recursive_evaluator(self, f, row):
        env = {n: bool(row >> j & 1) for j, n in enumerate(ATOMS3)}
        assert truth_table(f, ATOMS3).bits[row] == evaluate(f, env)

    def test_evaluator_sweep(self):
        # 1000+ (formula, valuation) pairs from a fixed enumeration
        fs = [a, b, c, FALSUM, VERUM]
        fs += [k(x, y) for k in (And, Or, Implies, Iff) for x in fs for y in fs]
        fs += [Not(x) for x in fs[:40]]
        count = 0
        for f in fs:
            bits = truth_table(f, ATOMS3).bits
            for row in range(8):
                env = {n: bool(row >> j & 1) for j, n in enumerate(ATOMS3)}
                assert bits[row] == evaluate(f, env)
                count += 1
        assert count >= 1000


class TestEntailment:
    def test_examples(self):
        assert entails(And(a, b), a, ATOMS3)
        assert entails(FALSUM, c, ATOMS3)
        assert not entails(Or(a, b), a, ATOMS3)
        assert countermodel(Or(a, b), a, AtomSet(["a", "b"])) == {"a": False, "b": True}

    @given(formulas(), formulas(), formulas())
    def test_preorder(self, x, y, z):
        assert entails(x, x, ATOMS3)
        if entails(x, y, ATOMS3) and entails(y, z, ATOMS3):
            assert entails(x, z, ATOMS3)

    @given(formulas(), formulas())
    def test_derived_predicates(self, x, y):
        assert not strictly_below(x, x, ATOMS3)
        assert equiv(x, y, ATOMS3) == equiv(y, x, ATOMS3)
        assert strictly_below(x, y, ATOMS3) == (entails(x, y, ATOMS3) and not entails(y, x, ATOMS3))

    @given(formulas())
    def test_bounds(self, f):
        assert entails(FALSUM, f, ATOMS3) and entails(f, VERUM, ATOMS3)

    def test_strict_order_transitive(self):
        fs = [a, b, FALSUM, VERUM, And(a, b), Or(a, b), Not(a)]
        for x, y, z in itertools.product(fs, repeat=3):
            if strictly_below(x, y, ATOMS3) and strictly_below(y, z, ATOMS3):
                assert strictly_below(x, z, ATOMS3)


class TestAtomSet:
    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            AtomSet(["a", "a"])

    def test_cap(self):
        with pytest.raises(ValueError):
            AtomSet([f"x{i}" for i in range(11)])
