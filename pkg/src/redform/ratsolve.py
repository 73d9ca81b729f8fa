"""Rational solutions of parametrized linear differential equations.

Unknown constants are integer parameter ids handed out by a
:class:`ParamRegistry`.  Right-hand sides are :class:`ParamAffine` values,
linear constraints between parameters live in a :class:`ConstraintSet`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import linalg
from .exactfield import (
    ONE,
    ZERO,
    Poly,
    RatFunc,
    atom_coordinates,
    atom_sort_key,
    derive,
    factor,
    hermite_reduce,
    rational_roots,
)

_F0 = Fraction(0)


class UnsupportedInput(ValueError):
    """Input outside the supported class (e.g. poles at irrational points)."""


class ParamRegistry:
    """Per-run source of fresh parameter ids, with human labels."""

    def __init__(self, start: int = 0):
        self._counter = itertools.count(start)
        self.labels: dict[int, str] = {}

    def fresh(self, label: str | None = None) -> int:
        pid = next(self._counter)
        self.labels[pid] = label or f"p{pid}"
        return pid

    def label(self, pid: int) -> str:
        return self.labels.get(pid, f"p{pid}")


# ---------------------------------------------------------------------------
# affine values


class ParamAffine:
    """``constant + sum(coeffs[p] * c_p)`` with RatFunc coefficients."""

    __slots__ = ("constant", "terms")

    def __init__(self, constant=ZERO, terms: Mapping[int, RatFunc] | None = None):
        self.constant = RatFunc.coerce(constant)
        clean = {}
        for p, c in (terms or {}).items():
            c = RatFunc.coerce(c)
            if c:
                clean[p] = c
        self.terms = dict(sorted(clean.items()))

    @classmethod
    def param(cls, pid: int, coeff=ONE) -> "ParamAffine":
        return cls(ZERO, {pid: coeff})

    @classmethod
    def coerce(cls, v) -> "ParamAffine":
        return v if isinstance(v, ParamAffine) else cls(v)

    # kept as a read-only alias matching the field name used in reports
    @property
    def linear_terms(self) -> dict:
        return self.terms

    def params(self) -> set[int]:
        return set(self.terms)

    def is_zero(self) -> bool:
        return not self.constant and not self.terms

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        other = ParamAffine.coerce(other) if isinstance(other, (RatFunc, int, Fraction)) else other
        if not isinstance(other, ParamAffine):
            return NotImplemented
        return self.constant == other.constant and self.terms == other.terms

    def __repr__(self) -> str:
        parts = [str(self.constant)] + [f"({c})*p{p}" for p, c in self.terms.items()]
        return "ParamAffine(" + " + ".join(parts) + ")"

    def __add__(self, other) -> "ParamAffine":
        other = ParamAffine.coerce(other)
        terms = dict(self.terms)
        for p, c in other.terms.items():
            terms[p] = terms[p] + c if p in terms else c
        return ParamAffine(self.constant + other.constant, terms)

    __radd__ = __add__

    def __neg__(self) -> "ParamAffine":
        return ParamAffine(-self.constant, {p: -c for p, c in self.terms.items()})

    def __sub__(self, other) -> "ParamAffine":
        return self + (-ParamAffine.coerce(other))

    def __rsub__(self, other) -> "ParamAffine":
        return ParamAffine.coerce(other) - self

    def scale(self, f) -> "ParamAffine":
        f = RatFunc.coerce(f)
        if not f:
            return ParamAffine()
        return ParamAffine(self.constant * f, {p: c * f for p, c in self.terms.items()})

    def __mul__(self, f) -> "ParamAffine":
        if isinstance(f, ParamAffine):
            raise TypeError("product of two affine values is not affine")
        return self.scale(f)

    __rmul__ = __mul__

    def derivative(self) -> "ParamAffine":
        return ParamAffine(derive(self.constant), {p: derive(c) for p, c in self.terms.items()})

    def substitute(self, assign: Mapping[int, tuple]) -> "ParamAffine":
        """Replace parameters by ``(const, {pid: coeff})`` linear forms over Q."""
        out = ParamAffine(self.constant)
        for p, c in self.terms.items():
            if p in assign:
                k, lin = assign[p]
                out = out + ParamAffine(c * k, {q: c * v for q, v in lin.items()})
            else:
                out = out + ParamAffine.param(p, c)
        return out

    def evaluate(self, values: Mapping[int, Fraction]) -> RatFunc:
        acc = self.constant
        for p, c in self.terms.items():
            v = values.get(p, _F0)
            if v:
                acc = acc + c * v
        return acc


def affine_linear_rows(value: ParamAffine) -> list[tuple[dict, Fraction]]:
    """Equations over Q expressing ``value == 0`` via atom coordinates.

    Each equation is ``(coeffs, rhs)`` meaning ``sum coeffs[p] c_p = rhs``.
    """
    coords = {p: atom_coordinates(c) for p, c in value.terms.items()}
    const = atom_coordinates(value.constant)
    keys = set(const)
    for c in coords.values():
        keys.update(c)
    rows = []
    for k in sorted(keys, key=atom_sort_key):
        row = {p: c[k] for p, c in coords.items() if c.get(k)}
        rows.append((row, -const.get(k, _F0)))
    return rows


# ---------------------------------------------------------------------------
# constraints


class ConstraintSet:
    """Linear equations over Q between parameters, kept in reduced echelon form.

    Pivots are the smallest parameter id in each row; ``inconsistent`` is set
    as soon as a row ``0 = nonzero`` appears.
    """

    __slots__ = ("_rows", "inconsistent")

    def __init__(self, rows: Mapping[int, tuple] | None = None, inconsistent: bool = False):
        # pivot -> (coeffs without pivot, rhs): c_pivot + sum coeffs c_q = rhs
        self._rows = dict(rows or {})
        self.inconsistent = inconsistent

    def __len__(self) -> int:
        return len(self._rows)

    @property
    def param_ids(self) -> tuple[int, ...]:
        ids = set(self._rows)
        for coeffs, _ in self._rows.values():
            ids.update(coeffs)
        return tuple(sorted(ids))

    @property
    def rows(self) -> list[list[Fraction]]:
        ids = self.param_ids
        out = []
        for piv in sorted(self._rows):
            coeffs, _ = self._rows[piv]
            out.append([Fraction(1) if q == piv else coeffs.get(q, _F0) for q in ids])
        return out

    @property
    def rhs(self) -> list[Fraction]:
        return [self._rows[p][1] for p in sorted(self._rows)]

    def equations(self) -> list[tuple[dict, Fraction]]:
        out = []
        for piv in sorted(self._rows):
            coeffs, rhs = self._rows[piv]
            out.append(({piv: Fraction(1), **coeffs}, rhs))
        return out

    def reduce(self, coeffs: Mapping[int, Fraction], rhs) -> tuple[dict, Fraction]:
        coeffs = {p: Fraction(c) for p, c in coeffs.items() if c}
        rhs = Fraction(rhs)
        for piv, (rc, rr) in self._rows.items():
            f = coeffs.pop(piv, None)
            if f:
                rhs -= f * rr
                for q, c in rc.items():
                    v = coeffs.get(q, _F0) - f * c
                    if v:
                        coeffs[q] = v
                    else:
                        coeffs.pop(q, None)
        return coeffs, rhs

    def is_consistent_with(self, eqs: Iterable[tuple[dict, Fraction]]) -> bool:
        return not self.extend(eqs).inconsistent

    def extend(self, eqs: Iterable[tuple[dict, Fraction]]) -> "ConstraintSet":
        cs = ConstraintSet(self._rows, self.inconsistent)
        for coeffs, rhs in eqs:
            cs = cs._add(coeffs, rhs)
        return cs

    def adds_rank(self, coeffs, rhs) -> bool:
        c, r = self.reduce(coeffs, rhs)
        return bool(c) or bool(r)

    def _add(self, coeffs, rhs) -> "ConstraintSet":
        if self.inconsistent:
            return self
        c, r = self.reduce(coeffs, rhs)
        if not c:
            return self if not r else ConstraintSet(self._rows, True)
        piv = min(c)
        inv = 1 / c.pop(piv)
        c = {q: v * inv for q, v in c.items()}
        r = r * inv
        rows = {}
        for p, (rc, rr) in self._rows.items():
            f = rc.get(piv)
            if f:
                rc = {q: v for q, v in rc.items() if q != piv}
                for q, v in c.items():
                    w = rc.get(q, _F0) - f * v
                    if w:
                        rc[q] = w
                    else:
                        rc.pop(q, None)
                rr = rr - f * r
            rows[p] = (rc, rr)
        rows[piv] = (c, r)
        return ConstraintSet(rows, False)


@dataclass(frozen=True)
class ConstraintSolution:
    """Pivot parameters as affine functions of the free ones."""

    pivots: dict  # pid -> (const, {free pid: coeff})
    free: tuple

    def assignment(self, free_values: Mapping[int, Fraction] | None = None) -> dict[int, Fraction]:
        free_values = free_values or {}
        out = {p: Fraction(free_values.get(p, 0)) for p in self.free}
        for p, (k, lin) in self.pivots.items():
            out[p] = k + sum((c * out.get(q, Fraction(free_values.get(q, 0))) for q, c in lin.items()), _F0)
        return out


def solve_constraints(cs: ConstraintSet, params: Iterable[int] = ()) -> ConstraintSolution | None:
    """``None`` when inconsistent; otherwise the pivot/free split."""
    if cs.inconsistent:
        return None
    pivots = {}
    free = set(params) | set(cs.param_ids)
    for piv, (coeffs, rhs) in cs._rows.items():
        pivots[piv] = (rhs, {q: -c for q, c in coeffs.items()})
    free -= set(pivots)
    return ConstraintSolution(pivots, tuple(sorted(free)))


# ---------------------------------------------------------------------------
# solution spaces


@dataclass(frozen=True)
class ParamSolutionSpace:
    """Solutions ``particular`` valid for every parameter choice meeting ``constraints``.

    ``remainder`` holds, per component, the part of the right-hand side that
    could not be integrated (zero whenever the space is non-empty).
    """

    particular: tuple
    new_params: tuple
    constraints: ConstraintSet
    empty: bool
    remainder: tuple = ()
    new_rows: tuple = field(default=(), compare=False)

    def specialize(self, free_values: Mapping[int, Fraction] | None = None) -> list[RatFunc]:
        sol = solve_constraints(self.constraints, self.params())
        if sol is None:
            raise ValueError("empty solution space")
        values = sol.assignment(free_values)
        return [p.evaluate(values) for p in self.particular]

    def params(self) -> set[int]:
        out = set(self.new_params)
        for p in self.particular:
            out |= p.params()
        return out


def _check_zero_mod(value: ParamAffine, cs: ConstraintSet, what: str):
    sol = solve_constraints(cs, value.params())
    if sol is None:
        return
    sub = value.substitute({p: v for p, v in sol.pivots.items()})
    if not sub.is_zero():
        raise AssertionError(f"{what}: residual {sub!r} does not vanish")


def param_antiderivative(
    rhs: ParamAffine,
    registry: ParamRegistry | None = None,
    constraints: ConstraintSet | None = None,
    label: str | None = None,
) -> ParamSolutionSpace:
    """All rational ``f`` with ``f' = rhs`` and the parameter conditions for existence.

    Each coefficient is Hermite-reduced; the remainders must cancel, which
    gives linear rows in the parameters.
    """
    rhs = ParamAffine.coerce(rhs)
    registry = registry or ParamRegistry()
    constraints = constraints or ConstraintSet()
    g0, r0 = hermite_reduce(rhs.constant)
    gs, rs = {}, {}
    for p, c in rhs.terms.items():
        gs[p], rs[p] = hermite_reduce(c)
    remainder = ParamAffine(r0, rs)
    rows = affine_linear_rows(remainder)
    merged = constraints.extend(rows)
    c_new = registry.fresh(label)
    particular = ParamAffine(g0, gs) + ParamAffine.param(c_new)
    space = ParamSolutionSpace(
        (particular,), (c_new,), merged, merged.inconsistent, (remainder,), tuple(rows)
    )
    if not space.empty:
        _check_zero_mod(particular.derivative() - rhs, merged, "antiderivative")
    return space


# ---------------------------------------------------------------------------
# scalar operators


def _split_points(p: Poly, what: str) -> list[Fraction]:
    pts = []
    for q, _ in factor(p):
        if q.degree != 1:
            raise UnsupportedInput(f"{what} has a singularity at a root of the irreducible factor {q}")
        pts.append(-q.coeffs[0])
    return pts


def _falling(s: int, i: int) -> Fraction:
    out = Fraction(1)
    for k in range(i):
        out *= s - k
    return out


def _indicial(pairs: list[tuple[int, Fraction]]) -> Poly:
    """``sum c * s(s-1)...(s-i+1)`` as a polynomial in s."""
    out = Poly()
    for i, c in pairs:
        term = Poly.const(c)
        for k in range(i):
            term = term * Poly((Fraction(-k), Fraction(1)))
        out = out + term
    return out


def _integer_roots(p: Poly) -> list[int]:
    if not p:
        return []
    return [int(r) for r in rational_roots(p) if r.denominator == 1]


def apply_operator(op: Sequence[RatFunc], y: RatFunc) -> RatFunc:
    """``sum op[i] * y^(i)``."""
    acc = ZERO
    d = RatFunc.coerce(y)
    for i, c in enumerate(op):
        if i:
            d = derive(d)
        c = RatFunc.coerce(c)
        if c:
            acc = acc + c * d
    return acc


def _valuation(f: RatFunc, a) -> int | None:
    if not f:
        return None
    return f.num.valuation_at(a) - f.den.valuation_at(a)


def denominator_bound(op: Sequence[RatFunc], rhs_parts: Sequence[RatFunc]) -> tuple[Poly, int]:
    """Universal denominator ``D`` and numerator degree bound for rational solutions.

    Returns ``(D, d)``; every rational solution is ``N / D`` with
    ``deg N <= d`` (``d < 0`` means only zero).
    """
    op = [RatFunc.coerce(c) for c in op]
    n = len(op) - 1
    while n >= 0 and not op[n]:
        n -= 1
    if n < 0:
        raise ValueError("zero operator")
    op = op[: n + 1]
    common = Poly.const(1)
    for c in op:
        common = _lcm(common, c.den)
    pcoef = [(c * common).num for c in op]
    pts = set(_split_points(pcoef[n], "operator"))
    for r in rhs_parts:
        if r:
            pts.update(_split_points(r.den, "right-hand side"))
    D = Poly.const(1)
    scaled = [r * common for r in rhs_parts if r]
    for a in sorted(pts):
        local = [(i, p.valuation_at(a), p) for i, p in enumerate(pcoef) if p]
        delta = min(v - i for i, v, _ in local)
        pairs = [(i, p.shift(a).coeffs[v]) for i, v, p in local if v - i == delta]
        cands = _integer_roots(_indicial(pairs))
        rv = [_valuation(r, a) for r in scaled]
        rv = [v for v in rv if v is not None]
        if rv:
            cands.append(min(rv) - delta)
        m = max(0, -min(cands)) if cands else 0
        if m:
            D = D * Poly.linear_root(a) ** m
    # infinity
    degs = [(i, p.degree) for i, p in enumerate(pcoef) if p]
    dinf = max(d - i for i, d in degs)
    pairs = [(i, pcoef[i].lc) for i, d in degs if d - i == dinf]
    cands = _integer_roots(_indicial(pairs))
    for r in scaled:
        cands.append(r.num.degree - r.den.degree - dinf)
    e = max(cands) if cands else -1
    return D, e + D.degree


def _lcm(a: Poly, b: Poly) -> Poly:
    from .exactfield import poly_gcd

    return (a * b).exquo(poly_gcd(a, b)).monic()


def scalar_rational_solutions(
    op_coeffs: Sequence[RatFunc],
    rhs: ParamAffine,
    registry: ParamRegistry | None = None,
    constraints: ConstraintSet | None = None,
    label: str | None = None,
) -> ParamSolutionSpace:
    """Rational ``y`` with ``sum op_coeffs[i] y^(i) = rhs`` (``rhs`` affine in parameters).

    Poles are bounded with local indicial equations; the numerator is found
    by a linear ansatz solved jointly in its coefficients and the parameters.
    Each free ansatz coefficient becomes a fresh parameter.
    """
    rhs = ParamAffine.coerce(rhs)
    registry = registry or ParamRegistry()
    constraints = constraints or ConstraintSet()
    op = [RatFunc.coerce(c) for c in op_coeffs]
    parts = [rhs.constant] + list(rhs.terms.values())
    D, d = denominator_bound(op, parts)
    params = list(rhs.terms)
    nu = d + 1 if d >= 0 else 0
    images = [apply_operator(op, RatFunc(Poly.x() ** j, D)) for j in range(nu)]
    # sum u_j images[j] - sum c_p rhs_p = rhs_const, cleared of denominators
    cols = images + [-rhs.terms[p] for p in params]
    common = Poly.const(1)
    for f in cols + [rhs.constant]:
        if f:
            common = _lcm(common, f.den)
    polys = [(f * common).num if f else Poly() for f in cols]
    target = (rhs.constant * common).num if rhs.constant else Poly()
    height = max([p.degree for p in polys] + [target.degree, 0]) + 1
    ncol = len(cols)
    matrix = []
    for k in range(height):
        row = [p.coeffs[k] if k < len(p.coeffs) else _F0 for p in polys]
        row.append(target.coeffs[k] if k < len(target.coeffs) else _F0)
        if any(row):
            matrix.append(row)
    R, piv = linalg.rref(matrix, ncol + 1) if matrix else ([], [])
    if ncol in piv:
        merged = ConstraintSet(constraints._rows, True)
        return ParamSolutionSpace((ParamAffine(),), (), merged, True, (rhs,), ())
    param_rows = []
    u_rows = {}
    for row, c in zip(R, piv):
        if c >= nu:
            param_rows.append(({params[j - nu]: row[j] for j in range(nu, ncol) if row[j]}, row[ncol]))
        else:
            u_rows[c] = row
    merged = constraints.extend(param_rows)
    free_u = [j for j in range(nu) if j not in u_rows]
    fresh = {}
    for k, j in enumerate(free_u):
        fresh[j] = registry.fresh(f"{label}.{k}" if label else None)
    y = ParamAffine()
    for j in range(nu):
        basis = RatFunc(Poly.x() ** j, D)
        if j in fresh:
            y = y + ParamAffine.param(fresh[j], basis)
            continue
        if j not in u_rows:
            continue
        row = u_rows[j]
        val = ParamAffine(row[ncol])
        for jj in range(nu, ncol):
            if row[jj]:
                val = val + ParamAffine.param(params[jj - nu], -row[jj])
        for jj in free_u:
            if row[jj]:
                val = val + ParamAffine.param(fresh[jj], -row[jj])
        y = y + val.scale(basis)
    space = ParamSolutionSpace(
        (y,), tuple(fresh[j] for j in free_u), merged, merged.inconsistent, (), tuple(param_rows)
    )
    if not space.empty:
        lhs = ParamAffine(apply_operator(op, y.constant), {p: apply_operator(op, c) for p, c in y.terms.items()})
        _check_zero_mod(lhs - rhs, merged, "scalar solution")
    return space


# ---------------------------------------------------------------------------
# systems


def triangular_system_rational_solutions(
    M,
    rhs: Sequence[ParamAffine],
    order: Sequence[int] | None = None,
    registry: ParamRegistry | None = None,
    constraints: ConstraintSet | None = None,
    labels: Sequence[str] | None = None,
) -> ParamSolutionSpace:
    """Solve ``F' = M F + rhs`` when ``M`` is strictly triangular for ``order``.

    Components are solved in ``order``; component ``order[t]`` may only
    depend on ``order[:t]``.
    """
    N = len(M)
    order = list(order) if order is not None else list(range(N - 1, -1, -1))
    if sorted(order) != list(range(N)):
        raise ValueError("order must be a permutation of the components")
    pos = {k: t for t, k in enumerate(order)}
    for k in range(N):
        for j in range(N):
            if M[k][j] and pos[j] >= pos[k]:
                raise ValueError(
                    f"component {k} depends on component {j}, which is not solved before it"
                )
    registry = registry or ParamRegistry()
    cs = constraints or ConstraintSet()
    F = [None] * N
    new, rows = [], []
    remainder = [ParamAffine()] * N
    empty = False
    for k in order:
        total = ParamAffine.coerce(rhs[k])
        for j in range(N):
            if M[k][j]:
                total = total + F[j].scale(M[k][j])
        sp = param_antiderivative(total, registry, cs, labels[k] if labels else None)
        F[k] = sp.particular[0]
        new.extend(sp.new_params)
        rows.extend(sp.new_rows)
        remainder[k] = sp.remainder[0]
        if sp.empty:
            empty = True
        else:
            cs = sp.constraints
    if empty:
        cs = ConstraintSet(cs._rows, True)
    space = ParamSolutionSpace(tuple(F), tuple(new), cs, empty, tuple(remainder), tuple(rows))
    if not empty:
        for k in range(N):
            lhs = F[k].derivative()
            for j in range(N):
                if M[k][j]:
                    lhs = lhs - F[j].scale(M[k][j])
            _check_zero_mod(lhs - ParamAffine.coerce(rhs[k]), cs, "triangular system")
    return space


def _row_times(u, M):
    n = len(M[0])
    out = []
    for j in range(n):
        acc = ZERO
        for i, ui in enumerate(u):
            if ui and M[i][j]:
                acc = acc + ui * M[i][j]
        out.append(acc)
    return out


def _dot(u, b) -> RatFunc:
    acc = ZERO
    for a, c in zip(u, b):
        if a and c:
            acc = acc + a * c
    return acc


def cyclic_reduction(M, b, start=None):
    """Reduce ``Z' = M Z + b`` to a scalar equation for ``z = u0 . Z``.

    Returns ``(op, rhs, U, H)``: ``z`` satisfies ``sum op[i] z^(i) = rhs``
    and ``Z = U^-1 (z^(i) - H[i])_i``; ``None`` if ``u0`` is not cyclic.
    """
    N = len(M)
    u = [RatFunc.coerce(v) for v in start]
    U, H = [u], [ZERO]
    for _ in range(N):
        last = U[-1]
        nxt = [derive(a) + c for a, c in zip(last, _row_times(last, M))]
        H.append(derive(H[-1]) + _dot(last, b))
        U.append(nxt)
    basis = U[:N]
    # u_N = sum lam_i u_i  <=> lam solves basis^T lam = u_N
    lam = linalg.solve_linear(linalg.transpose(basis), U[N])
    if lam is None or linalg.rank(basis) < N:
        return None
    op = [-l for l in lam] + [ONE]
    rhs = H[N] - _dot(lam, H[:N])
    return op, rhs, basis, H[:N]


def system_rational_solution(M, b, registry: ParamRegistry | None = None):
    """One rational solution of ``Z' = M Z + b`` (free constants set to 0), or ``None``.

    Uses a cyclic vector; unit vectors are tried from the last component
    down, then ``x``-dependent combinations.
    """
    N = len(M)
    b = [RatFunc.coerce(v) for v in b]
    candidates = []
    for k in range(N - 1, -1, -1):
        candidates.append([ONE if i == k else ZERO for i in range(N)])
    X = RatFunc.x()
    for k in range(1, N + 2):
        candidates.append([X**i + k for i in range(N)])
    red = None
    for u0 in candidates:
        red = cyclic_reduction(M, b, u0)
        if red is not None:
            break
    if red is None:
        raise UnsupportedInput("no cyclic vector found for the coupling system")
    op, rhs, basis, H = red
    space = scalar_rational_solutions(op, ParamAffine(rhs), registry)
    if space.empty:
        return None
    z = space.specialize()[0]
    ders = [z]
    for _ in range(N - 1):
        ders.append(derive(ders[-1]))
    vals = [d - h for d, h in zip(ders, H)]
    Z = linalg.solve_linear(basis, vals)
    # verify
    for k in range(N):
        lhs = derive(Z[k]) - _dot(M[k], Z) - b[k]
        if lhs:
            raise AssertionError("cyclic reconstruction failed")
    return Z
