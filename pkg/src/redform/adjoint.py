"""Adjoint action of a block diagonal on the off-diagonal block, and its flag.

For a lower two-block system the off-diagonal block ``beta`` is ``n2 x n1``
and ``vec`` stacks rows, so ``vec(beta)[r * n1 + c] = beta[r][c]``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .exactfield import ZERO, RatFunc
from .liealgebra import WeiNormanDecomp, unvec, vec
from .linalg import EchelonSpan
from .ratsolve import UnsupportedInput

_F0 = Fraction(0)


def psi_matrix(A1, A2):
    """``A2 (x) Id_n1 - Id_n2 (x) A1^T`` (generic entries)."""
    n1, n2 = len(A1), len(A2)
    sample = A1[0][0] if n1 else A2[0][0]
    zero = sample - sample
    one = zero + 1
    I1 = linalg.identity(n1, zero, one)
    I2 = linalg.identity(n2, zero, one)
    return linalg.matsub(linalg.kron(A2, I1), linalg.kron(I2, linalg.transpose(A1)))


def apply_psi_direct(A1, A2, beta):
    return linalg.matsub(linalg.matmul(A2, beta), linalg.matmul(beta, A1))


@dataclass(frozen=True)
class AdjointAction:
    """``psi`` acting on ``vec(beta)`` for the coupling block of shape ``(n2, n1)``."""

    psi: tuple
    blocks: tuple
    vec_convention: str = "row-stacking"

    @property
    def N(self) -> int:
        return len(self.psi)

    def apply(self, v):
        return [sum((p * x for p, x in zip(row, v) if x and p), ZERO) for row in self.psi]


def adjoint_action(A1, A2, checks: int = 5, seed: int = 0) -> AdjointAction:
    """Build psi and verify ``vec(A2 b - b A1) = psi vec(b)`` on random constant ``b``."""
    A1 = [[RatFunc.coerce(v) for v in r] for r in A1]
    A2 = [[RatFunc.coerce(v) for v in r] for r in A2]
    n1, n2 = len(A1), len(A2)
    psi = psi_matrix(A1, A2)
    rng = random.Random(seed)
    for _ in range(checks):
        beta = [[RatFunc(rng.randint(-9, 9)) for _ in range(n1)] for _ in range(n2)]
        lhs = vec(apply_psi_direct(A1, A2, beta))
        rhs = [sum((p * b for p, b in zip(row, vec(beta))), ZERO) for row in psi]
        if lhs != rhs:
            raise AssertionError("adjoint action fails the vec identity")
    return AdjointAction(tuple(tuple(r) for r in psi), (n1, n2))


def split_blocks(A, n1: int):
    """``(A1, A2, S)`` of a lower two-block matrix split after row ``n1``."""
    A1 = [list(r[:n1]) for r in A[:n1]]
    A2 = [list(r[n1:]) for r in A[n1:]]
    S = [list(r[:n1]) for r in A[n1:]]
    return A1, A2, S


def diagonal_psi_components(decomp: WeiNormanDecomp, n1: int):
    """Constant matrices ``Psi_i`` with ``Psi = sum funcs[i] Psi_i``."""
    out = []
    for M in decomp.mats:
        M1 = [list(r[:n1]) for r in M[:n1]]
        M2 = [list(r[n1:]) for r in M[n1:]]
        out.append(psi_matrix(M1, M2))
    return out


# ---------------------------------------------------------------------------
# flag


@dataclass(frozen=True)
class Direction:
    label: str
    vector: tuple  # vec of the coupling block, over Q
    param: str = ""


@dataclass(frozen=True)
class Level:
    name: str
    directions: tuple


@dataclass(frozen=True)
class Summand:
    name: str
    levels: tuple  # top (solved first) to bottom


@dataclass(frozen=True)
class Flag:
    """Adapted basis of the off-diagonal space grouped into invariant summands.

    Inside each summand, ``levels`` run from the top of the flag (solved
    first) down to the joint kernel.  ``adapted_psi[k][j]`` is the
    coefficient of direction ``k`` in ``psi`` applied to direction ``j``, in
    the order given by :meth:`directions`.
    """

    summands: tuple
    shape: tuple  # (n2, n1)
    adapted_psi: tuple = ()
    scalar: RatFunc = field(default_factory=RatFunc)

    @property
    def levels(self) -> list[Level]:
        return [lv for s in self.summands for lv in s.levels]

    def directions(self) -> list[Direction]:
        return [d for s in self.summands for lv in s.levels for d in lv.directions]

    def level_sizes(self, summand: str | None = None) -> list[int]:
        out = []
        for s in self.summands:
            if summand is None or s.name == summand:
                out.extend(len(lv.directions) for lv in s.levels)
        return out

    def basis_matrix(self):
        """Columns are the direction vectors."""
        return linalg.transpose([list(d.vector) for d in self.directions()])

    def block(self, d: Direction):
        n2, n1 = self.shape
        return unvec(list(d.vector), n2, n1)


def adapted_matrix(psi, vectors):
    """``V^-1 psi V`` for the basis ``vectors`` (columns of ``V``)."""
    V = linalg.transpose([[Fraction(v) for v in vv] for vv in vectors])
    Vinv = linalg.inverse(V)
    Vr = [[RatFunc.coerce(v) for v in r] for r in V]
    Vir = [[RatFunc.coerce(v) for v in r] for r in Vinv]
    return linalg.matmul(linalg.matmul(Vir, [list(r) for r in psi]), Vr)


def coordinates(vectors, w):
    """Coordinates of ``w`` (RatFunc entries) on the constant basis ``vectors``."""
    V = linalg.transpose([[Fraction(v) for v in vv] for vv in vectors])
    Vinv = linalg.inverse(V)
    return [sum((RatFunc.coerce(w[j]) * c for j, c in enumerate(row) if c and w[j]), ZERO) for row in Vinv]


def shifted_components(comps, N: int):
    """Subtract from each ``Psi_i`` its scalar part ``tr / N``; returns (shifted, scalars)."""
    out, scal = [], []
    for P in comps:
        s = sum((P[i][i] for i in range(N)), _F0) / N if N else _F0
        out.append([[v - (s if i == j else 0) for j, v in enumerate(row)] for i, row in enumerate(P)])
        scal.append(s)
    return out, scal


def kernel_chain(comps, N: int, subspace=None):
    """Ascending chain ``K_1 < K_2 < ...`` of the joint action inside ``subspace``.

    ``K_{j+1} = {v in subspace : C v in K_j for every C}``.  Returns the
    layers (complement bases, bottom first) and whether the chain exhausts
    the subspace.  Vectors are echelonized, so the result is deterministic.
    """
    sub = [list(map(Fraction, v)) for v in (subspace or linalg.identity(N))]
    d = len(sub)
    # work in coordinates of the subspace: v = sum t_k sub[k]
    images = [linalg.transpose(linalg.matmul(C, linalg.transpose(sub))) for C in comps]
    prev = EchelonSpan(N)
    layers = []
    while len(prev) < d:
        # t with C(sub^T t) in prev for all C
        rows = []
        for img in images:
            # img[k] = C sub[k]; condition: sum t_k reduce(img[k]) = 0
            red = [prev.reduce(v) for v in img]
            rows.extend(linalg.transpose(red))
        ker = linalg.nullspace([r for r in rows if any(r)], d)
        ker_vecs = [[sum((t[k] * sub[k][i] for k in range(d) if t[k]), _F0) for i in range(N)] for t in ker]
        span = EchelonSpan(N)
        for r in prev.rows:
            span.add(r)
        layer = []
        for v in _echelon(ker_vecs):
            if span.add(v):
                layer.append(v)
        if not layer:
            return layers, False
        for v in layer:
            prev.add(v)
        layers.append(layer)
    return layers, True


def _echelon(vectors):
    if not vectors:
        return []
    R, _ = linalg.rref(vectors)
    return R


def _flag_from_layers(layers, shape, prefix=""):
    levels = []
    k = 0
    labelled = []
    for j, layer in enumerate(layers):
        labelled.append((j + 1, layer))
    for depth, layer in reversed(labelled):
        dirs = []
        for i, v in enumerate(layer):
            k += 1
            dirs.append(Direction(f"{prefix}N{k}", tuple(v), f"c{depth},{i + 1}"))
        levels.append(Level(f"W[{depth}]", tuple(dirs)))
    return levels


def flag_filtration(action: AdjointAction, decomp: WeiNormanDecomp, subspace=None, name: str = "h") -> Flag:
    """Kernel-chain flag of the joint action of the diagonal's components.

    Raises :class:`UnsupportedInput` when the non-scalar part is not nilpotent.
    """
    n1, n2 = action.blocks
    N = action.N
    comps = diagonal_psi_components(decomp, n1)
    shifted, scal = shifted_components(comps, N)
    layers, ok = kernel_chain(shifted, N, subspace)
    if not ok:
        size = len(subspace) if subspace is not None else N
        reached = sum(len(l) for l in layers)
        raise UnsupportedInput(
            f"adjoint action is not nilpotent modulo scalars: kernel chain stops at dimension "
            f"{reached} of {size}"
        )
    lam = ZERO
    for f, s in zip(decomp.funcs, scal):
        if s:
            lam = lam + f * s
    summand = Summand(name, tuple(_flag_from_layers(layers, (n2, n1))))
    vectors = [d.vector for lv in summand.levels for d in lv.directions]
    adapted = ()
    if subspace is None:
        adapted = tuple(tuple(r) for r in adapted_matrix(action.psi, vectors))
    return Flag((summand,), (n2, n1), adapted, lam)


def restricted_matrix(psi, vectors):
    """Matrix of ``psi`` on the invariant span of ``vectors`` (raises if not invariant)."""
    N = len(psi)
    d = len(vectors)
    V = linalg.transpose([[RatFunc.coerce(Fraction(v)) for v in vv] for vv in vectors])
    PV = linalg.matmul([list(r) for r in psi], V)
    # solve V X = PV column by column using a left inverse over Q
    Vq = linalg.transpose([[Fraction(v) for v in vv] for vv in vectors])
    R, piv = linalg.rref([list(r) + [Fraction(int(i == j)) for j in range(N)] for i, r in enumerate(Vq)], d)
    # rows of R beyond the first d give consistency conditions; use pivot rows for the inverse
    left = [row[d:] for row in R[:d]]
    leftr = [[RatFunc.coerce(v) for v in r] for r in left]
    X = linalg.matmul(leftr, PV)
    if linalg.matmul(V, X) != PV:
        raise ValueError("span of the given vectors is not invariant under psi")
    return X


def validate_flag(action: AdjointAction, flag: Flag, scalar: RatFunc = ZERO):
    """Check the adapted matrix is strictly block-triangular for the level order.

    Cross-summand entries must vanish; inside a summand, direction ``j`` may
    only reach directions in strictly lower levels.  ``scalar`` is removed
    from the diagonal first.
    """
    dirs = flag.directions()
    where = {}
    for si, s in enumerate(flag.summands):
        for li, lv in enumerate(s.levels):
            for d in lv.directions:
                where[d.label] = (si, li)
    P = flag.adapted_psi
    for k, dk in enumerate(dirs):
        for j, dj in enumerate(dirs):
            v = P[k][j] - (scalar if k == j else ZERO)
            if not v:
                continue
            sk, lk = where[dk.label]
            sj, lj = where[dj.label]
            if sk != sj or lk <= lj:
                raise ValueError(
                    f"adapted basis is not a flag: psi({dj.label}) has component {v} on {dk.label}"
                )
