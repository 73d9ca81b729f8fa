"""Acceptance criteria 1 to 9, one PASS/FAIL line per criterion.

Each sub-check is its own test so that a single unattainable sub-check stays
visible without hiding the others.  The per-criterion lines are printed in
the pytest terminal summary, or directly when this file is run as a script.
"""

from __future__ import annotations

import functools
import io
import json
import random
import sys
import time
from fractions import Fraction

import pytest

from redform.adjoint import adjoint_action, flag_filtration, restricted_matrix, split_blocks
from redform.cli.expr import parse_expression
from redform.cli.formats import dumps, load_operator, load_system
from redform.cli.main import run
from redform.diffsys import check_gauge_identity
from redform.exactfield import ZERO, RatFunc
from redform.independence import independence_report
from redform.liealgebra import vec, wei_norman
from redform.ratsolve import ParamAffine, scalar_rational_solutions
from redform.reducer import ReductionOptions, flag_for_system, reduce_system, reduce_two_block

X = RatFunc.x()

TITLES = {
    1: "8-dim end-to-end",
    2: "h5 constraint cascade",
    3: "hypergeometric example",
    4: "Heun example",
    5: "4-dim example",
    6: "adjoint fidelity",
    7: "property suites",
    8: "free-constant invariance",
    9: "negative controls",
}
RESULTS: dict[int, list[tuple[str, bool, str]]] = {}


def record(criterion: int, name: str, ok: bool, detail: str = ""):
    RESULTS.setdefault(criterion, []).append((name, bool(ok), detail))
    assert ok, f"criterion {criterion}, {name}: {detail}"


def summary_lines() -> list[str]:
    lines = []
    for k in sorted(TITLES):
        subs = RESULTS.get(k)
        if not subs:
            lines.append(f"criterion {k} ({TITLES[k]}): NOT RUN")
            continue
        failed = [f"{n}: {d}" for n, ok, d in subs if not ok]
        status = "PASS" if not failed else "FAIL"
        tail = f"{len(subs)} sub-checks" if not failed else "; ".join(failed)
        lines.append(f"criterion {k} ({TITLES[k]}): {status} [{tail}]")
    return lines


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def _reduce(name, free=None):
    sf = load_system(name)
    system = sf.system()
    flag = flag_for_system(system, sf.adapted_basis) if sf.adapted_basis else None
    return reduce_system(system, ReductionOptions("lex", free or {}, flag))


@functools.lru_cache(maxsize=None)
def eight():
    t = time.perf_counter()
    code, out, _ = cli("reduce", "eight_dim.json", "--json")
    elapsed = time.perf_counter() - t
    return code, json.loads(out), elapsed, _reduce("eight_dim")


@functools.lru_cache(maxsize=None)
def hyper():
    rep = _reduce("hypergeometric")
    return rep, independence_report(rep, asserted_diag_dim=3)


# --- 1 -----------------------------------------------------------------------


def test_c1_reduced_matrix_entry_for_entry():
    code, data, _, _ = eight()
    expected = load_system("eight_dim_reduced").matrix
    got = [[parse_expression(s) for s in row] for row in data["reduced"]]
    residual = got[4][0] == Fraction(-1, 2) / (X - 1) and got[5][1] == Fraction(1, 2) / (X - 1)
    record(1, "A_red as printed", code == 0 and got == expected and residual)


def test_c1_lie_dim_after_is_5():
    _, data, _, _ = eight()
    record(1, "lie_dim_after = 5", data["lie_dim_after"] == 5, f"got {data['lie_dim_after']}")


def test_c1_gauge_identity():
    _, _, _, rep = eight()
    record(1, "check_gauge_identity", check_gauge_identity(rep.gauge, rep.original, rep.reduced))


def test_c1_runtime_under_10s():
    _, _, elapsed, _ = eight()
    record(1, "runtime < 10 s", elapsed < 10, f"{elapsed:.2f} s")


def test_c1_lie_dim_before_is_14():
    # The printed 8x8 matrix yields 9 under bracket closure; see the README.
    _, data, _, _ = eight()
    got = data["lie_dim_before"]
    record(1, "lie_dim_before = 14", got == 14, f"got {got}, expected 14")


# --- 2 -----------------------------------------------------------------------


def test_c2_constraint_log():
    _, _, _, rep = eight()
    h5 = sorted(eq for lv, eqs in rep.constraints_log if lv.startswith("h5:") for eq in eqs)
    want = sorted(["h5:c3,1 = 1", "h5:c3,2 = -1/2", "h5:c2,1 = 1"])
    record(2, "h5 constraint log", h5 == want, f"got {h5}")


def test_c2_p5_coefficients():
    _, _, _, rep = eight()
    got = {k: parse_expression(v) for k, v in rep.coefficients.items() if k in {"N2", "N3", "N4", "N5", "N6"}}
    want = {"N2": -3 / X, "N4": 1 - 1 / X, "N5": RatFunc(Fraction(-1, 2)), "N6": 1 - 1 / X}
    record(2, "P5 coefficients", got == want, f"got {got}")


# --- 3 -----------------------------------------------------------------------


def test_c3_coupling_row_zeroed():
    rep, _ = hyper()
    record(3, "coupling row zero", all(v == 0 for v in rep.reduced.A[2][:2]))


def test_c3_gauge_last_row():
    rep, _ = hyper()
    want = [Fraction(15, 44) * (3 * X - 1), Fraction(-9, 11) * X * (X - 1), RatFunc(1)]
    record(3, "gauge last row", list(rep.gauge.P[2]) == want, f"got {[str(v) for v in rep.gauge.P[2]]}")


def test_c3_dependence_relation():
    _, ind = hyper()
    item = ind.integrals[0]
    coeffs = {k: parse_expression(v) for k, v in item.get("coefficients", {}).items()}
    want = {"Y1": Fraction(15, 44) * (3 * X - 1), "Y2": Fraction(-9, 11) * X * (X - 1)}
    record(3, "relation for int(f)", item["verdict"] == "dependent" and coeffs == want, item.get("relation", ""))


def test_c3_galois_dimension_3():
    _, ind = hyper()
    record(3, "Galois-Lie dimension 3", ind.galois_dim == 3, f"got {ind.galois_dim}")


def test_c3_lie_dim_drop_4_to_3():
    # Bracket closure on the printed 3x3 matrix gives 6 -> 4; see the README.
    rep, _ = hyper()
    got = (rep.lie_dim_before, rep.lie_dim_after)
    record(3, "lie_dim drop 4 -> 3", got == (4, 3), f"got {got[0]} -> {got[1]}")


# --- 4 -----------------------------------------------------------------------


def test_c4_adjoint_equation_no_rational_solution():
    op = load_operator("heun_adjoint")
    space = scalar_rational_solutions(op.coeffs, ParamAffine(op.rhs))
    record(4, "adjoint equation has no rational solution", space.empty and op.rhs == 1)


def test_c4_dimension_and_independence():
    rep = _reduce("heun")
    ind = independence_report(rep, asserted_diag_dim=3)
    both = any(s.startswith("both integrals are algebraically independent") for s in ind.statements)
    record(4, "dimension 5, both integrals independent", ind.galois_dim == 5 and both, ind.text())


# --- 5 -----------------------------------------------------------------------


def test_c5_lie_dim_and_derived_chain():
    code, out, _ = cli("lie-dim", "four_dim", "--json")
    data = json.loads(out)
    ok = code == 0 and data["lie_dim"] == 4 and data["derived_series"] == [4, 1, 0] and data["derived_length"] == 2
    record(5, "lie-dim 4, chain (4, 1, 0)", ok, f"got {data}")


def test_c5_every_split_already_reduced():
    base = load_system("four_dim").system(True)
    verdicts = []
    for k in range(1, base.n):
        rep = reduce_two_block(base.reblocked((k, base.n - k)))
        verdicts.append((rep.gauge.is_identity(), rep.verdict))
    record(5, "all splits: gauge Id, already reduced", verdicts == [(True, "already reduced")] * 3, str(verdicts))


def test_c5_dilog_statement():
    code, out, _ = cli("reduce", "four_dim", "--json")
    stmts = json.loads(out)["independence"]["statements"]
    want = "dilog(x) is algebraically independent of exp(x), ln(x), ln(x-1)"
    record(5, "dilog independence statement", code == 0 and want in stmts, str(stmts))


# --- 6 -----------------------------------------------------------------------


def _eight_parts():
    sf = load_system("eight_dim")
    A1, A2, _ = split_blocks(sf.matrix, 4)
    diag = [[v if (i < 4) == (j < 4) else ZERO for j, v in enumerate(r)] for i, r in enumerate(sf.matrix)]
    return sf, adjoint_action(A1, A2), wei_norman(diag)


def _summand(sf, name):
    s = next(s for s in sf.adapted_basis["summands"] if s["name"] == name)
    dirs = {d["label"]: d for lv in s["levels"] for d in lv["directions"]}
    return [[Fraction(v) for v in vec(dirs[k]["block"])] for k in sorted(dirs, key=lambda k: int(k[1:]))]


def test_c6_psi5():
    sf, action, _ = _eight_parts()
    a, b, z = 1 / X, 1 / (X - 1), ZERO
    psi5 = [[z, z, b, z, z], [z, z, a, z, z], [z, z, z, a, b], [z] * 5, [z] * 5]
    record(6, "psi restricted to h5 equals printed psi5", restricted_matrix(action.psi, _summand(sf, "h5")) == psi5)


def test_c6_h10_level_sizes():
    sf, action, decomp = _eight_parts()
    flag = flag_filtration(action, decomp, subspace=_summand(sf, "h10"), name="h10")
    record(6, "h10 level sizes (1,2,4,2,1)", flag.level_sizes() == [1, 2, 4, 2, 1], str(flag.level_sizes()))


# --- 7 -----------------------------------------------------------------------

PROPERTY_SUITES = [
    ("test_exactfield", "test_property_hermite_exactness"),
    ("test_exactfield", "test_property_derivative_antiderivative_roundtrip"),
    ("test_diffsys", "test_property_gauge_composition"),
    ("test_liealgebra", "test_property_bracket_antisymmetry_and_jacobi"),
    ("test_adjoint", "test_property_vec_identity"),
    ("test_liealgebra", "test_property_closure_containment_and_idempotence"),
    ("test_diffsys", "test_property_series_gauge_equivalence_order_12"),
    ("test_ratsolve", "test_property_manufactured_solution_recovery"),
    ("test_expr", "test_property_print_parse_roundtrip"),
]


@pytest.mark.parametrize("module, func", PROPERTY_SUITES)
def test_c7_property_suite(module, func):
    import importlib

    try:
        getattr(importlib.import_module(module), func)()
        ok, detail = True, ""
    except AssertionError as exc:
        ok, detail = False, str(exc)[:200]
    record(7, func, ok, detail)


# --- 8 -----------------------------------------------------------------------


def test_c8_free_constant_invariance():
    rng = random.Random(8)
    values = [Fraction(rng.randint(-99, 99), rng.randint(1, 20)) for _ in range(2)]
    reps = [_reduce("eight_dim", {"h10:c1,1": v}) for v in values]
    same = reps[0].reduced.A == reps[1].reduced.A
    record(8, "A_red independent of h10:c1,1", same and reps[0].gauge.P != reps[1].gauge.P, str(values))


# --- 9 -----------------------------------------------------------------------


def test_c9_tampered_certificate(tmp_path):
    cert = tmp_path / "cert.json"
    cli("reduce", "eight_dim", "--cert", str(cert))
    data = json.loads(cert.read_text())
    data["P"][4][0] = "1"
    cert.write_text(dumps(data))
    code = cli("check", str(cert))[0]
    record(9, "tampered certificate exits 5", code == 5, f"exit {code}")


def test_c9_irrational_pole():
    code, _, err = cli("reduce", "irrational_pole", "--assume-diag-reduced")
    ok = code == 3 and "A[2,1]" in err and "x^2 + 1" in err
    record(9, "x^2+1 exits 3 with named diagnostic", ok, f"exit {code}: {err.strip()}")


def test_c9_missing_assertion(tmp_path):
    f = tmp_path / "sys.json"
    data = {"matrix": load_system("hypergeometric").to_json()["matrix"], "blocks": [2, 1]}
    f.write_text(json.dumps(data))
    code = cli("reduce", str(f))[0]
    record(9, "reduce without diag-reduced assertion exits 4", code == 4, f"exit {code}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
