from __future__ import annotations

import random
import sys
from fractions import Fraction

import pytest

from redform.cli.formats import load_system
from redform.exactfield import Poly, RatFunc

CASES = 100


def random_poly(rng: random.Random, max_deg: int = 3, bound: int = 5) -> Poly:
    return Poly([rng.randint(-bound, bound) for _ in range(rng.randint(0, max_deg) + 1)])


def random_ratfunc(rng: random.Random, poles=(0, 1, -1, 2), max_mult: int = 2, irreducible: bool = False) -> RatFunc:
    """Random element of Q(x) whose denominator splits over ``poles`` (plus x^2+1 if asked)."""
    den = Poly([1])
    for a in rng.sample(list(poles), rng.randint(0, min(2, len(poles)))):
        den = den * Poly.linear_root(a) ** rng.randint(1, max_mult)
    if irreducible and rng.random() < 0.5:
        den = den * Poly([1, 0, 1])
    num = random_poly(rng)
    c = Fraction(rng.randint(1, 4), rng.randint(1, 3))
    return RatFunc(num * Poly([c]), den)


def random_const_matrix(rng: random.Random, n: int, bound: int = 3, density: float = 0.5):
    return [[Fraction(rng.randint(-bound, bound)) if rng.random() < density else Fraction(0) for _ in range(n)]
            for _ in range(n)]


@pytest.fixture
def fixture_system():
    def load(name: str, assume: bool = False):
        return load_system(name).system(assume)

    return load


def reduce_fixture(name: str, free_values=None, auto_flag: bool = False, assume: bool = False):
    """Reduce a bundled fixture the way ``redform reduce`` does."""
    from redform.reducer import ReductionOptions, flag_for_system, reduce_system

    sf = load_system(name)
    system = sf.system(assume)
    flag = None
    if sf.adapted_basis is not None and not auto_flag:
        flag = flag_for_system(system, sf.adapted_basis)
    return reduce_system(system, ReductionOptions("lex", free_values or {}, flag))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
