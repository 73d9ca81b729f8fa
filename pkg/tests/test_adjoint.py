from __future__ import annotations

import random
from fractions import Fraction

import pytest

from conftest import CASES, random_ratfunc
from redform.adjoint import (
    adjoint_action,
    apply_psi_direct,
    flag_filtration,
    psi_matrix,
    restricted_matrix,
    split_blocks,
    validate_flag,
)
from redform.cli.formats import load_system
from redform.exactfield import ZERO, RatFunc
from redform.liealgebra import vec, wei_norman
from redform.ratsolve import UnsupportedInput

X = RatFunc.x()
Z = ZERO
a, b = 1 / X, 1 / (X - 1)

PSI5 = [
    [Z, Z, b, Z, Z],
    [Z, Z, a, Z, Z],
    [Z, Z, Z, a, b],
    [Z, Z, Z, Z, Z],
    [Z, Z, Z, Z, Z],
]
PSI10 = [
    [Z, a, b, Z, Z, Z, Z, Z, Z, Z],
    [Z, Z, Z, a, -b, Z, Z, Z, Z, Z],
    [Z, Z, Z, Z, Z, -a, b, Z, Z, Z],
    [Z, Z, Z, Z, Z, Z, Z, b, Z, Z],
    [Z, Z, Z, Z, Z, Z, Z, Z, b, Z],
    [Z, Z, Z, Z, Z, Z, Z, a, Z, Z],
    [Z, Z, Z, Z, Z, Z, Z, Z, a, Z],
    [Z, Z, Z, Z, Z, Z, Z, Z, Z, b],
    [Z, Z, Z, Z, Z, Z, Z, Z, Z, a],
    [Z] * 10,
]


def eight_dim():
    sf = load_system("eight_dim")
    A1, A2, S = split_blocks(sf.matrix, 4)
    return sf, adjoint_action(A1, A2)


def summand_vectors(sf, name):
    s = next(s for s in sf.adapted_basis["summands"] if s["name"] == name)
    dirs = {d["label"]: d for lv in s["levels"] for d in lv["directions"]}
    order = sorted(dirs, key=lambda k: int(k[1:]))
    return [[Fraction(v) for v in vec(dirs[k]["block"])] for k in order]


def test_psi5_matches_printed_matrix():
    sf, action = eight_dim()
    assert restricted_matrix(action.psi, summand_vectors(sf, "h5")) == PSI5


def test_psi10_matches_printed_matrix():
    sf, action = eight_dim()
    assert restricted_matrix(action.psi, summand_vectors(sf, "h10")) == PSI10


def test_h10_flag_level_sizes():
    sf, action = eight_dim()
    diag = [[v if (i < 4) == (j < 4) else ZERO for j, v in enumerate(r)] for i, r in enumerate(sf.matrix)]
    flag = flag_filtration(action, wei_norman(diag), subspace=summand_vectors(sf, "h10"), name="h10")
    assert flag.level_sizes() == [1, 2, 4, 2, 1]


def test_auto_flag_is_valid_on_full_space():
    sf, action = eight_dim()
    diag = [[v if (i < 4) == (j < 4) else ZERO for j, v in enumerate(r)] for i, r in enumerate(sf.matrix)]
    flag = flag_filtration(action, wei_norman(diag))
    validate_flag(action, flag, flag.scalar)
    assert sum(flag.level_sizes()) == 16


def test_heun_action_is_not_nilpotent():
    sf = load_system("heun")
    A1, A2, _ = split_blocks(sf.matrix, 2)
    action = adjoint_action(A1, A2)
    diag = [[v if (i < 2) == (j < 2) else ZERO for j, v in enumerate(r)] for i, r in enumerate(sf.matrix)]
    with pytest.raises(UnsupportedInput, match="not nilpotent"):
        flag_filtration(action, wei_norman(diag))


def test_property_vec_identity():
    rng = random.Random(5150)
    for _ in range(CASES):
        n1, n2 = rng.randint(1, 3), rng.randint(1, 3)
        A1 = [[random_ratfunc(rng) for _ in range(n1)] for _ in range(n1)]
        A2 = [[random_ratfunc(rng) for _ in range(n2)] for _ in range(n2)]
        beta = [[random_ratfunc(rng) for _ in range(n1)] for _ in range(n2)]
        psi = psi_matrix(A1, A2)
        lhs = vec(apply_psi_direct(A1, A2, beta))
        rhs = [sum((p * v for p, v in zip(row, vec(beta))), ZERO) for row in psi]
        assert lhs == rhs
