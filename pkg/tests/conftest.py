import random

import pytest
from hypothesis import strategies as st

from condchoice.conditionals import Conditional
from condchoice.engine import atom_universe
from condchoice.formula import FALSUM, VERUM, And, Atom, AtomSet, Iff, Implies, Not, Or

ATOMS3 = AtomSet(["a", "b", "c"])


def formulas(names=("a", "b", "c"), max_leaves=12):
    leaves = st.one_of(st.sampled_from([Atom(n) for n in names]), st.just(FALSUM), st.just(VERUM))
    return st.recursive(
        leaves,
        lambda kids: st.one_of(
            kids.map(Not),
            st.tuples(kids, kids).map(lambda p: And(*p)),
            st.tuples(kids, kids).map(lambda p: Or(*p)),
            st.tuples(kids, kids).map(lambda p: Implies(*p)),
            st.tuples(kids, kids).map(lambda p: Iff(*p)),
        ),
        max_leaves=max_leaves,
    )


@pytest.fixture(scope="session")
def u1():
    return atom_universe(1, 0)


@pytest.fixture(scope="session")
def u2():
    return atom_universe(2, 1)


def all_pairs(u):
    return [Conditional(a, b) for a in u for b in u]


def random_set(rng: random.Random, u, lo=0, hi=6):
    pairs = all_pairs(u)
    return frozenset(rng.sample(pairs, rng.randint(lo, min(hi, len(pairs)))))


_criteria: dict[str, str] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance" in report.nodeid and name.startswith("test_criterion_"):
        if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
            _criteria[name] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda n: int(n.split("_")[2])):
        num = name.split("_")[2]
        label = " ".join(name.split("_")[3:])
        terminalreporter.write_line(f"criterion {num} ({label}): {_criteria[name]}")
