from __future__ import annotations

import random
from fractions import Fraction

import pytest

from conftest import CASES, random_ratfunc
from redform.cli.expr import ExprError, parse_expression, to_text
from redform.exactfield import RatFunc

X = RatFunc.x()


def test_hypergeometric_entry():
    assert parse_expression("1/36 * 1/(x*(x-1))") == Fraction(1, 36) / (X * (X - 1))


def test_variable():
    assert parse_expression("x") == X


@pytest.mark.parametrize(
    "text, expected",
    [
        ("2^3^2", RatFunc(512)),
        ("-x^2", -(X**2)),
        ("1-2-3", RatFunc(-4)),
        ("8/4/2", RatFunc(1)),
        ("2*x + 3*x", 5 * X),
        (" ( x - 1 ) ^ -1 ", 1 / (X - 1)),
        ("3/4", RatFunc(Fraction(3, 4))),
    ],
)
def test_precedence_and_associativity(text, expected):
    assert parse_expression(text) == expected


@pytest.mark.parametrize(
    "text, line, column",
    [("1 + ", 1, 5), ("(x", 1, 3), ("x $ 2", 1, 3), ("1 +\n 1/(x-x)", 2, 3), ("y", 1, 1)],
)
def test_positioned_errors(text, line, column):
    with pytest.raises(ExprError) as info:
        parse_expression(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_non_integer_exponent_rejected():
    with pytest.raises(ExprError):
        parse_expression("x^(1/2)")


def test_other_variable_name():
    assert parse_expression("t^2", "t") == X**2


def test_property_print_parse_roundtrip():
    rng = random.Random(31337)
    for _ in range(2 * CASES):
        f = random_ratfunc(rng, max_mult=3, irreducible=True)
        assert parse_expression(to_text(f)) == f
