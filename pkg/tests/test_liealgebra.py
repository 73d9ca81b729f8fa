from __future__ import annotations

import random
from fractions import Fraction

from conftest import CASES, random_const_matrix
from redform import linalg
from redform.liealgebra import (
    bracket,
    derived_series,
    is_bracket_closed,
    lie_closure,
    lie_dim,
    spans_equal,
    unvec,
    vec,
    wei_norman,
)
from redform.exactfield import RatFunc

X = RatFunc.x()


def test_vec_row_stacking():
    M = [[1, 2, 3], [4, 5, 6]]
    assert vec(M) == [1, 2, 3, 4, 5, 6]
    assert unvec(vec(M), 2, 3) == M


def test_wei_norman_reconstructs(fixture_system):
    s = fixture_system("four_dim")
    d = wei_norman(s)
    assert [str(f) for f in d.funcs] == ["1", "1/x", "1/(x - 1)"]
    assert d.reconstruct() == [list(r) for r in s.A]


def test_four_dim_lie_algebra(fixture_system):
    dim, basis, _ = lie_dim(fixture_system("four_dim"))
    assert dim == 4
    assert derived_series(basis.basis) == [4, 1, 0]
    assert basis.envelope_certified


def test_closure_of_sl2_generators():
    e = [[Fraction(0), Fraction(1)], [Fraction(0), Fraction(0)]]
    f = [[Fraction(0), Fraction(0)], [Fraction(1), Fraction(0)]]
    b = lie_closure([e, f])
    assert b.dim == 3 and not b.envelope_certified
    assert derived_series(b.basis) == [3]


def test_property_bracket_antisymmetry_and_jacobi():
    rng = random.Random(99)
    for _ in range(CASES):
        n = rng.choice([2, 3, 4])
        A, B, C = (random_const_matrix(rng, n) for _ in range(3))
        assert bracket(A, B) == linalg.scale(Fraction(-1), bracket(B, A))
        jac = linalg.matadd(
            linalg.matadd(bracket(A, bracket(B, C)), bracket(B, bracket(C, A))), bracket(C, bracket(A, B))
        )
        assert linalg.is_zero_matrix(jac)


def test_property_closure_containment_and_idempotence():
    rng = random.Random(100)
    for _ in range(CASES):
        n = rng.choice([2, 3])
        gens = [random_const_matrix(rng, n, density=0.4) for _ in range(rng.randint(1, 3))]
        L = lie_closure(gens, n)
        assert is_bracket_closed(L.basis, n)
        assert spans_equal(list(L.basis) + gens, L.basis, n)
        again = lie_closure(L.basis, n)
        assert again.dim == L.dim and spans_equal(again.basis, L.basis, n)
