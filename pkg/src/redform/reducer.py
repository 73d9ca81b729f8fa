"""Gauge reduction of block-triangular systems.

A two-block lower system ``[[A1, 0], [S, A2]]`` is reduced with a gauge
``P = Id + B`` where ``B`` lives in the off-diagonal block.  Writing
``B = sum f_k N_k`` over an adapted basis of that block, the coupling
coordinate on ``N_k`` becomes ``s_k + sum_j Psi_kj f_j - f_k'``.  Directions
are solved level by level from the top of the flag; each direction is
removed when its equation has a rational solution compatible with the
constraints collected so far, and is otherwise kept as a residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import linalg
from .adjoint import (
    AdjointAction,
    Direction,
    Flag,
    Level,
    Summand,
    adapted_matrix,
    adjoint_action,
    coordinates,
    diagonal_psi_components,
    flag_filtration,
    kernel_chain,
    shifted_components,
    split_blocks,
    validate_flag,
)
from .diffsys import (
    LOWER,
    UPPER,
    DiffSystem,
    GaugeMatrix,
    check_gauge_identity,
    flip,
    from_lower,
    gauge_transform,
    to_lower,
)
from .exactfield import ONE, ZERO, RatFunc, coeff_basis, derive, factor, format_ratfunc
from .liealgebra import LieBasis, lie_dim, unvec, vec, wei_norman
from .linalg import EchelonSpan
from .ratsolve import (
    ConstraintSet,
    ParamAffine,
    ParamRegistry,
    UnsupportedInput,
    param_antiderivative,
    scalar_rational_solutions,
    solve_constraints,
    system_rational_solution,
)


class AssumptionNotAsserted(ValueError):
    """Reduction requested without asserting that the diagonal is reduced."""


class CertificateFailure(AssertionError):
    """An internal consistency check on a computed gauge failed."""


@dataclass
class ReductionOptions:
    branch: str = "lex"
    free_values: Mapping[str, Fraction] = field(default_factory=dict)
    flag: Flag | None = None


@dataclass
class ReductionReport:
    original: DiffSystem
    reduced: DiffSystem
    gauge: GaugeMatrix
    lie_dim_before: int
    lie_dim_after: int
    constraints_log: list = field(default_factory=list)  # [(level, [equation text])]
    removed: list = field(default_factory=list)
    obstructed: list = field(default_factory=list)
    branch_choices: list = field(default_factory=list)
    diag_reduced_assumed: bool = True
    method: str = "flag"
    split: tuple = ()  # (n1, n2) in lower coordinates
    coefficients: dict = field(default_factory=dict)  # direction -> f_k (text)
    free_params: list = field(default_factory=list)
    diag_lie_dim: int = 0
    lie_after: LieBasis | None = None
    residual_in_diag_span: bool = True
    steps: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        if self.gauge.is_identity() and self.reduced.A == self.original.A:
            return "already reduced"
        return "reduced"

    @property
    def envelope_certified(self) -> bool:
        return bool(self.lie_after and self.lie_after.envelope_certified)


# ---------------------------------------------------------------------------
# input checks


def check_rational_poles(sys: DiffSystem):
    """Reject entries with poles outside Q."""
    for i, row in enumerate(sys.A):
        for j, v in enumerate(row):
            if v.den.degree <= 0:
                continue
            for q, _ in factor(v.den):
                if q.degree > 1:
                    raise UnsupportedInput(
                        f"entry A[{i + 1},{j + 1}] = {v} has poles at the roots of "
                        f"{format_ratfunc(RatFunc(q))}, which are not rational"
                    )


def _require_assumption(sys: DiffSystem):
    if not sys.diag_reduced_assumed:
        raise AssumptionNotAsserted(
            "reduction needs the diagonal blocks to be in reduced form; assert it with "
            "--assume-diag-reduced or \"diag_reduced\": true"
        )


def _diag_of(A, n1):
    n = len(A)
    return [[A[i][j] if (i < n1) == (j < n1) else ZERO for j in range(n)] for i in range(n)]


def _lower_gauge(B, n1: int, n: int) -> GaugeMatrix:
    P = linalg.identity(n, ZERO, ONE)
    for r, row in enumerate(B):
        for c, v in enumerate(row):
            P[n1 + r][c] = v
    return GaugeMatrix(P)


def _fmt_equation(coeffs: dict, rhs: Fraction, labels) -> str:
    parts = []
    for p, c in sorted(coeffs.items()):
        lab = labels(p)
        if c == 1:
            parts.append(lab)
        elif c == -1:
            parts.append(f"-{lab}")
        else:
            parts.append(f"{_q(c)}*{lab}")
    lhs = " + ".join(parts).replace("+ -", "- ")
    return f"{lhs} = {_q(rhs)}"


def _q(c: Fraction) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _normalize(coeffs: dict, rhs: Fraction):
    piv = min(coeffs)
    inv = 1 / coeffs[piv]
    return {p: c * inv for p, c in coeffs.items()}, rhs * inv


# ---------------------------------------------------------------------------
# flag construction from an explicit adapted basis


def flag_from_basis(layout: dict, action: AdjointAction, decomp, n1: int) -> Flag:
    """Build a :class:`Flag` from a user-supplied adapted basis.

    ``layout`` has ``summands`` (solve order), each with ``levels`` (top
    first) of ``directions`` carrying a ``label``, a ``param`` label and a
    ``block`` (rows of Q values, shape ``n2 x n1``).  A summand flagged
    ``complete_from_kernel`` gets its vectors from the joint kernel,
    completing the span of all supplied vectors.
    """
    n2 = action.blocks[1]
    N = action.N
    supplied = []
    for s in layout["summands"]:
        for lv in s["levels"]:
            for d in lv["directions"]:
                if "block" in d:
                    v = [Fraction(x) for x in vec(d["block"])]
                    if len(v) != N:
                        raise ValueError(f"direction {d['label']} has the wrong shape")
                    supplied.append(v)
    comps = diagonal_psi_components(decomp, n1)
    shifted, scal = shifted_components(comps, N)
    span = EchelonSpan(N)
    for v in supplied:
        span.add(v)
    summands = []
    for s in layout["summands"]:
        levels = []
        for lv in s["levels"]:
            dirs = []
            for d in lv["directions"]:
                if "block" in d:
                    v = tuple(Fraction(x) for x in vec(d["block"]))
                else:
                    if not s.get("complete_from_kernel"):
                        raise ValueError(f"direction {d['label']} has no block")
                    layers, _ = kernel_chain(shifted, N)
                    v = next((tuple(k) for k in layers[0] if span.add(k)), None)
                    if v is None:
                        raise ValueError(f"cannot complete {d['label']} from the kernel")
                dirs.append(Direction(d["label"], v, d.get("param", "")))
            levels.append(Level(lv.get("name", ""), tuple(dirs)))
        summands.append(Summand(s["name"], tuple(levels)))
    vectors = [d.vector for s in summands for lv in s.levels for d in lv.directions]
    if linalg.rank([list(v) for v in vectors]) != N or len(vectors) != N:
        raise ValueError("adapted basis does not span the off-diagonal space")
    lam = ZERO
    for f, sc in zip(decomp.funcs, scal):
        if sc:
            lam = lam + f * sc
    adapted = adapted_matrix(action.psi, vectors)
    flag = Flag(tuple(summands), (n2, n1), tuple(tuple(r) for r in adapted), lam)
    validate_flag(action, flag, lam)
    return flag


def flag_for_system(sys: DiffSystem, layout: dict) -> Flag:
    """:func:`flag_from_basis` for a two-block system given in either orientation."""
    low = to_lower(sys)
    n1 = low.blocks[0]
    A1, A2, _ = split_blocks(low.A, n1)
    return flag_from_basis(layout, adjoint_action(A1, A2), wei_norman(_diag_of(low.A, n1)), n1)


# ---------------------------------------------------------------------------
# two-block reduction


@dataclass
class _Cascade:
    f: list
    constraints: ConstraintSet
    log: list
    removed: list
    obstructed: list
    branches: list
    registry: ParamRegistry


def _param_label(summand: Summand, d: Direction, multi: bool) -> str:
    base = d.param or d.label
    return f"{summand.name}:{base}" if multi else base


def reduce_level(
    flag: Flag,
    level: Level,
    summand: Summand,
    s_coords,
    state: _Cascade,
    index: Mapping[str, int],
):
    """Process one flag level: solve each direction's equation in turn.

    A direction is removed when its equation is solvable together with the
    constraints accepted so far; otherwise it is kept as a residual and, if
    it only conflicts with choices made inside this level, the alternative
    is logged.
    """
    P = flag.adapted_psi
    lam = flag.scalar
    multi = len(flag.summands) > 1
    start = state.constraints
    accepted = []  # (label, rows)
    level_name = f"{summand.name}:{level.name}" if multi else level.name
    logged = []
    labels = state.registry.label
    for d in level.directions:
        k = index[d.label]
        rhs = ParamAffine(s_coords[k])
        for j, fj in enumerate(state.f):
            if fj is None or j == k:
                continue
            coef = P[k][j]
            if coef:
                rhs = rhs + fj.scale(coef)
        label = _param_label(summand, d, multi)
        if lam:
            space = scalar_rational_solutions([-lam, ONE], rhs, state.registry, state.constraints, label)
        else:
            space = param_antiderivative(rhs, state.registry, state.constraints, label)
        if not space.empty:
            cs = state.constraints
            for coeffs, r in space.new_rows:
                c, rr = cs.reduce(coeffs, r)
                if c:
                    logged.append(_fmt_equation(*_normalize(c, rr), labels))
                cs = cs.extend([(coeffs, r)])
            state.constraints = space.constraints
            state.f[k] = space.particular[0]
            state.removed.append(d.label)
            accepted.append((d.label, space.new_rows))
            continue
        state.obstructed.append(d.label)
        if lam:
            state.f[k] = ParamAffine()
        else:
            state.f[k] = space.particular[0]
        if start.is_consistent_with(space.new_rows):
            conflicts = []
            for lab, _ in accepted:
                others = [row for l2, rows in accepted if l2 != lab for row in rows]
                if start.extend(others).is_consistent_with(space.new_rows):
                    conflicts.append(lab)
            state.branches.append(
                {
                    "level": level_name,
                    "kept": conflicts or [lab for lab, _ in accepted],
                    "alternative": d.label,
                    "rule": "lex: earlier direction in the adapted order wins",
                }
            )
    if logged:
        state.log.append((level_name, logged))


def _residual_in_span(S_new, diag_funcs) -> bool:
    entries = [v for row in S_new for v in row if v]
    if not entries:
        return True
    basis, _ = coeff_basis(list(diag_funcs))
    both, _ = coeff_basis(list(diag_funcs) + entries)
    return len(both) == len(basis)


def _assemble(sys_low, n1, B, original, method, state_like, lie_before=None) -> ReductionReport:
    n = sys_low.n
    P = _lower_gauge(B, n1, n)
    reduced_low = gauge_transform(P, sys_low)
    if not check_gauge_identity(P, sys_low, reduced_low):
        raise CertificateFailure("gauge identity check failed")
    if original.orientation == UPPER:
        gauge = P.flipped()
        reduced = from_lower(reduced_low, UPPER)
        reduced = DiffSystem(reduced.A, original.blocks, UPPER, original.diag_reduced_assumed, original.integrals)
    else:
        gauge = P
        reduced = DiffSystem(reduced_low.A, original.blocks, LOWER, original.diag_reduced_assumed, original.integrals)
    before = lie_before if lie_before is not None else lie_dim(original)[0]
    after, basis_after, _ = lie_dim(reduced)
    diag_dim = lie_dim(_diag_of(reduced_low.A, n1))[0]
    diag_funcs = wei_norman(_diag_of(sys_low.A, n1)).funcs
    _, _, S_new = split_blocks(reduced_low.A, n1)
    rep = ReductionReport(
        original=original,
        reduced=reduced,
        gauge=gauge,
        lie_dim_before=before,
        lie_dim_after=after,
        diag_reduced_assumed=original.diag_reduced_assumed,
        method=method,
        split=(n1, n - n1),
        diag_lie_dim=diag_dim,
        lie_after=basis_after,
        residual_in_diag_span=_residual_in_span(S_new, diag_funcs),
    )
    if after > before:
        raise CertificateFailure(f"Lie dimension grew from {before} to {after}")
    return rep


def irreducible_action(comps, N: int) -> bool:
    """Whether ``Id`` and the ``Psi_i`` generate all N x N matrices."""
    span = EchelonSpan(N * N)
    basis = [linalg.identity(N)]
    span.add(vec(basis[0]))
    gens = [c for c in comps if not linalg.is_zero_matrix(c)]
    k = 0
    while k < len(basis) and len(span) < N * N:
        for g in gens:
            m = linalg.matmul(g, basis[k])
            if span.add(vec(m)):
                basis.append(m)
        k += 1
    return len(span) == N * N


def reduce_two_block(sys: DiffSystem, options: ReductionOptions | None = None) -> ReductionReport:
    """Reduce a two-block system; the diagonal blocks must be asserted reduced."""
    options = options or ReductionOptions()
    _require_assumption(sys)
    check_rational_poles(sys)
    if len(sys.blocks) != 2:
        raise ValueError(f"expected two blocks, got {list(sys.blocks)}")
    low = to_lower(sys)
    n1 = low.blocks[0]
    A1, A2, S = split_blocks(low.A, n1)
    action = adjoint_action(A1, A2)
    decomp = wei_norman(_diag_of(low.A, n1))
    N = action.N
    try:
        if options.flag is not None:
            flag = options.flag
        else:
            flag = flag_filtration(action, decomp)
            validate_flag(action, flag, flag.scalar)
    except UnsupportedInput as exc:
        comps = diagonal_psi_components(decomp, n1)
        if not irreducible_action(comps, N):
            raise UnsupportedInput(
                f"{exc}; the off-diagonal action is also not irreducible, so neither "
                "the flag cascade nor the all-or-nothing test applies"
            ) from None
        return _reduce_irreducible(sys, low, n1, action, S)
    return _reduce_with_flag(sys, low, n1, action, flag, S, options)


def _reduce_with_flag(sys, low, n1, action, flag: Flag, S, options) -> ReductionReport:
    dirs = flag.directions()
    vectors = [d.vector for d in dirs]
    s_coords = coordinates(vectors, vec(S))
    index = {d.label: k for k, d in enumerate(dirs)}
    state = _Cascade([None] * len(dirs), ConstraintSet(), [], [], [], [], ParamRegistry())
    for summand in flag.summands:
        for level in summand.levels:
            reduce_level(flag, level, summand, s_coords, state, index)
    all_params = set()
    for fk in state.f:
        all_params |= fk.params()
    sol = solve_constraints(state.constraints, all_params)
    if sol is None:
        raise CertificateFailure("accepted constraints became inconsistent")
    by_label = {state.registry.label(p): p for p in all_params}
    free_vals = {}
    for lab, v in options.free_values.items():
        if lab not in by_label:
            raise ValueError(f"unknown parameter {lab!r}")
        free_vals[by_label[lab]] = Fraction(v)
    values = sol.assignment(free_vals)
    f_final = [fk.evaluate(values) for fk in state.f]
    n2 = action.blocks[1]
    B = [[ZERO] * n1 for _ in range(n2)]
    for d, fk in zip(dirs, f_final):
        if not fk:
            continue
        blk = flag.block(d)
        for r in range(n2):
            for c in range(n1):
                if blk[r][c]:
                    B[r][c] = B[r][c] + fk * blk[r][c]
    rep = _assemble(low, n1, B, sys, "flag", state)
    # predicted coupling must match the transformed system
    red_low = to_lower(rep.reduced)
    _, _, S_new = split_blocks(red_low.A, n1)
    got = coordinates(vectors, vec(S_new))
    P = flag.adapted_psi
    for k, d in enumerate(dirs):
        pred = s_coords[k] - derive(f_final[k])
        for j, fj in enumerate(f_final):
            if fj and P[k][j]:
                pred = pred + P[k][j] * fj
        if pred != got[k] or (d.label in state.removed and got[k]):
            raise CertificateFailure(f"coupling on {d.label} is {got[k]}, expected {pred}")
    rep.constraints_log = state.log
    rep.removed = state.removed
    rep.obstructed = state.obstructed
    rep.branch_choices = state.branches
    rep.coefficients = {d.label: format_ratfunc(fk) for d, fk in zip(dirs, f_final) if fk}
    rep.free_params = sorted(state.registry.label(p) for p in sol.free)
    return rep


def _reduce_irreducible(sys, low, n1, action, S) -> ReductionReport:
    """All-or-nothing removal when the off-diagonal module is absolutely irreducible."""
    n2 = action.blocks[1]
    N = action.N
    M = [list(r) for r in action.psi]
    Z = system_rational_solution(M, vec(S))
    labels = [f"N{k + 1}" for k in range(N)]
    if Z is None:
        B = [[ZERO] * n1 for _ in range(n2)]
        removed, obstructed = [], [l for l, v in zip(labels, vec(S)) if v] or []
    else:
        B = unvec(Z, n2, n1)
        removed, obstructed = labels, []
    rep = _assemble(low, n1, B, sys, "irreducible", None)
    if Z is not None:
        _, _, S_new = split_blocks(to_lower(rep.reduced).A, n1)
        if not linalg.is_zero_matrix(S_new):
            raise CertificateFailure("coupling did not vanish after full removal")
    rep.removed = removed
    rep.obstructed = obstructed
    if Z is not None:
        rep.coefficients = {lab: format_ratfunc(z) for lab, z in zip(labels, Z) if z}
    return rep


# ---------------------------------------------------------------------------
# several blocks


def reduce_multi_block(sys: DiffSystem, options: ReductionOptions | None = None) -> ReductionReport:
    """Reduce nested trailing corners (lower coordinates), lifting each gauge by ``Id + P``."""
    options = options or ReductionOptions()
    _require_assumption(sys)
    check_rational_poles(sys)
    kappa = len(sys.blocks)
    if kappa == 2:
        return reduce_two_block(sys, options)
    low = to_lower(sys)
    n = low.n
    blocks = list(low.blocks)
    total = GaugeMatrix.identity(n)
    current = low
    steps, log, removed, obstructed, branches = [], [], [], [], []
    lie_before = lie_dim(sys)[0]
    for k in range(kappa - 2, -1, -1):
        off = sum(blocks[:k])
        corner = [list(r[off:]) for r in current.A[off:]]
        sub = DiffSystem(corner, (blocks[k], n - off - blocks[k]), LOWER, True)
        rep = reduce_two_block(sub, ReductionOptions(options.branch, options.free_values))
        size = n - off
        P = linalg.identity(n, ZERO, ONE)
        for i in range(size):
            for j in range(size):
                P[off + i][off + j] = rep.gauge.P[i][j]
        lift = GaugeMatrix(P)
        current = gauge_transform(lift, current).reblocked(low.blocks)
        total = total @ lift
        tag = f"corner {size}x{size}"
        steps.append(
            {
                "corner": size,
                "split": [blocks[k], size - blocks[k]],
                "verdict": rep.verdict,
                "lie_dim_before": rep.lie_dim_before,
                "lie_dim_after": rep.lie_dim_after,
            }
        )
        log.extend((f"{tag} {lv}", eqs) for lv, eqs in rep.constraints_log)
        removed.extend(f"{tag}:{d}" for d in rep.removed)
        obstructed.extend(f"{tag}:{d}" for d in rep.obstructed)
        branches.extend({**b, "level": f"{tag} {b['level']}"} for b in rep.branch_choices)
    if not check_gauge_identity(total, low, current):
        raise CertificateFailure("composed gauge does not map the system to its reduction")
    if sys.orientation == UPPER:
        gauge = total.flipped()
        reduced = DiffSystem(flip(current.A), sys.blocks, UPPER, sys.diag_reduced_assumed, sys.integrals)
    else:
        gauge = total
        reduced = DiffSystem(current.A, sys.blocks, LOWER, sys.diag_reduced_assumed, sys.integrals)
    after, basis_after, _ = lie_dim(reduced)
    n1 = blocks[0]
    diag_dim = lie_dim(_diag_of(current.A, n1))[0]
    return ReductionReport(
        original=sys,
        reduced=reduced,
        gauge=gauge,
        lie_dim_before=lie_before,
        lie_dim_after=after,
        constraints_log=log,
        removed=removed,
        obstructed=obstructed,
        branch_choices=branches,
        diag_reduced_assumed=sys.diag_reduced_assumed,
        method="multi-block",
        split=(n1, n - n1),
        diag_lie_dim=diag_dim,
        lie_after=basis_after,
        steps=steps,
    )


def reduce_system(sys: DiffSystem, options: ReductionOptions | None = None) -> ReductionReport:
    if len(sys.blocks) < 2:
        _require_assumption(sys)
        check_rational_poles(sys)
        d, basis, _ = lie_dim(sys)
        return ReductionReport(sys, sys, GaugeMatrix.identity(sys.n), d, d, lie_after=basis,
                               diag_reduced_assumed=sys.diag_reduced_assumed, method="single-block",
                               split=(sys.n, 0), diag_lie_dim=d)
    if len(sys.blocks) == 2:
        return reduce_two_block(sys, options)
    return reduce_multi_block(sys, options)
