from __future__ import annotations

import random
from fractions import Fraction

from conftest import CASES, random_const_matrix
from redform import linalg
from redform.linalg import EchelonSpan


def test_inverse_and_determinant():
    rng = random.Random(7)
    for _ in range(CASES):
        M = random_const_matrix(rng, 4, density=0.8)
        d = linalg.determinant(M)
        if d == 0:
            continue
        inv = linalg.inverse(M)
        assert linalg.matmul(M, inv) == linalg.identity(4)


def test_nullspace_annihilates():
    rng = random.Random(8)
    for _ in range(CASES):
        M = random_const_matrix(rng, 4)
        for v in linalg.nullspace(M, 4):
            assert all(sum(a * b for a, b in zip(r, v)) == 0 for r in M)
        assert linalg.rank(M) + len(linalg.nullspace(M, 4)) == 4


def test_kron_shape_and_entries():
    A = [[Fraction(1), Fraction(2)], [Fraction(3), Fraction(4)]]
    K = linalg.kron(A, linalg.identity(2))
    assert len(K) == 4 and K[2][0] == 3 and K[2][1] == 0


def test_echelon_span_membership():
    s = EchelonSpan(3)
    assert s.add([Fraction(1), Fraction(1), Fraction(0)])
    assert s.add([Fraction(0), Fraction(1), Fraction(1)])
    assert not s.add([Fraction(1), Fraction(2), Fraction(1)])
    assert s.contains([Fraction(2), Fraction(3), Fraction(1)])
    assert len(s) == 2
