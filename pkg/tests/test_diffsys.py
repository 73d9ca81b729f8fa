from __future__ import annotations

import random
from fractions import Fraction

import pytest

from conftest import CASES, random_ratfunc
from redform.diffsys import (
    LOWER,
    UPPER,
    DiffSystem,
    GaugeMatrix,
    SingularPointError,
    SystemError_,
    apply_gauge,
    augment_with_integrals,
    check_gauge_identity,
    companion_of_operator,
    from_lower,
    gauge_transform,
    matrix_taylor,
    series_fundamental,
    series_gauge_check,
    to_lower,
)
from redform.exactfield import ONE, ZERO, RatFunc

X = RatFunc.x()


def random_matrix(rng, n):
    return [[random_ratfunc(rng) if rng.random() < 0.6 else ZERO for _ in range(n)] for _ in range(n)]


def random_gauge(rng, n):
    """Lower triangular with a nonzero constant diagonal, sometimes with an upper corner entry."""
    while True:
        try:
            return GaugeMatrix(_gauge_entries(rng, n))
        except SystemError_:
            continue


def _gauge_entries(rng, n):
    P = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        P[i][i] = RatFunc(rng.choice([1, 2, -1, Fraction(1, 3)]))
        for j in range(i):
            if rng.random() < 0.6:
                P[i][j] = random_ratfunc(rng)
    if rng.random() < 0.5:  # mix in an upper entry for genuinely full gauges
        P[0][n - 1] = RatFunc(rng.randint(-2, 2))
    return P


def test_triangularity_enforced():
    with pytest.raises(SystemError_):
        DiffSystem([[ONE, X], [ZERO, ONE]], (1, 1), LOWER)
    DiffSystem([[ONE, X], [ZERO, ONE]], (1, 1), UPPER)


def test_blocks_must_sum():
    with pytest.raises(SystemError_):
        DiffSystem([[ONE]], (2,))


def test_singular_gauge_rejected():
    with pytest.raises(SystemError_):
        GaugeMatrix([[ONE, X], [ONE, X]])


def test_orientation_roundtrip():
    s = DiffSystem([[ONE, 1 / X, ZERO], [ZERO, ONE, ZERO], [ZERO, ZERO, X]], (1, 1, 1), UPPER)
    low = to_lower(s)
    assert low.orientation == LOWER and low.A[1][0] == 0 and low.A[2][1] == 1 / X
    assert from_lower(low, UPPER) == s


def test_augment_with_integrals_lower_and_upper():
    A = [[ZERO, ONE], [X, 1 / X]]
    s = DiffSystem(A, (2,), LOWER, True)
    aug = augment_with_integrals(s, [0])
    assert aug.blocks == (2, 1) and aug.A[2] == (ONE, ZERO, ZERO) and aug.integrals == ((2, 0),)
    up = DiffSystem([[1 / X, X], [ONE, ZERO]], (2,), UPPER, True)  # flipped copy of A
    aug_up = augment_with_integrals(up, [1])
    assert aug_up.A == aug.A


def test_companion():
    s = companion_of_operator([X, 1 / X])
    assert s.A == ((ZERO, ONE), (-X, -1 / X))


def test_gauge_identity_and_transform():
    A = [[ONE, ZERO], [1 / X, ONE]]
    P = GaugeMatrix([[ONE, ZERO], [X, ONE]])
    s = DiffSystem(A, (1, 1), LOWER)
    t = gauge_transform(P, s)
    assert t.A[1][0] == 1 / X - 1
    assert check_gauge_identity(P, s, t)


def test_property_gauge_composition():
    rng = random.Random(4242)
    for _ in range(CASES):
        n = rng.choice([2, 3])
        A = random_matrix(rng, n)
        P, Q = random_gauge(rng, n), random_gauge(rng, n)
        assert apply_gauge(P @ Q, A) == apply_gauge(Q, apply_gauge(P, A))


def test_series_fundamental_scalar_exponential():
    s = DiffSystem([[ONE]])
    U = series_fundamental(s, 0, 6)
    assert U.entry_series(0, 0) == [Fraction(1), 1, Fraction(1, 2), Fraction(1, 6), Fraction(1, 24), Fraction(1, 120)]


def test_matrix_taylor_names_pole_entry():
    with pytest.raises(SingularPointError, match=r"A\[1,2\]"):
        matrix_taylor([[ONE, 1 / X]], 0, 4)


def test_property_series_gauge_equivalence_order_12():
    rng = random.Random(777)
    for _ in range(CASES):
        n = rng.choice([2, 3])
        src = DiffSystem(random_matrix(rng, n))
        P = random_gauge(rng, n)
        dst = DiffSystem(apply_gauge(P, src.A))
        assert series_gauge_check(P, src, dst, 12)
        # a perturbed target must be caught
        bad = [list(r) for r in dst.A]
        bad[0][0] = bad[0][0] + 1
        assert not series_gauge_check(P, src, DiffSystem(bad), 12)
