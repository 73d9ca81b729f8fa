"""Wei-Norman decompositions and Lie algebras generated by constant matrices."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg
from .exactfield import RatFunc, coeff_basis, expand_in_basis
from .linalg import EchelonSpan

_F0 = Fraction(0)


def _qmat(M) -> tuple:
    return tuple(tuple(Fraction(v) for v in row) for row in M)


def vec(M) -> list:
    """Row-stacking vectorization."""
    return [v for row in M for v in row]


def unvec(v, n: int, m: int) -> list:
    return [list(v[i * m:(i + 1) * m]) for i in range(n)]


@dataclass(frozen=True)
class WeiNormanDecomp:
    """``A = sum(funcs[i] * mats[i])`` with Q-independent ``funcs``."""

    funcs: tuple
    mats: tuple

    def __post_init__(self):
        if len(self.funcs) != len(self.mats):
            raise ValueError("funcs and mats differ in length")

    @property
    def s(self) -> int:
        return len(self.funcs)

    def reconstruct(self, n: int | None = None):
        if not self.mats:
            if n is None:
                raise ValueError("empty decomposition needs an explicit size")
            return [[RatFunc() for _ in range(n)] for _ in range(n)]
        n = len(self.mats[0])
        return [
            [expand_in_basis(self.funcs, [M[i][j] for M in self.mats]) for j in range(n)]
            for i in range(n)
        ]


def wei_norman(A) -> WeiNormanDecomp:
    """Decompose a matrix (or a system, via its ``A``) over the atom basis."""
    A = getattr(A, "A", A)
    n = len(A)
    entries = [(i, j, A[i][j]) for i in range(n) for j in range(n) if A[i][j]]
    distinct = list(dict.fromkeys(f for _, _, f in entries))
    basis, coords = coeff_basis(distinct)
    where = {f: c for f, c in zip(distinct, coords)}
    mats = []
    for k in range(len(basis)):
        M = [[_F0] * n for _ in range(n)]
        for i, j, f in entries:
            M[i][j] = where[f][k]
        mats.append(_qmat(M))
    return WeiNormanDecomp(tuple(basis), tuple(mats))


def bracket(M, N):
    if len(M) != len(N):
        raise ValueError("bracket of matrices of different size")
    return linalg.matsub(linalg.matmul(M, N), linalg.matmul(N, M))


# ---------------------------------------------------------------------------
# closure


@dataclass(frozen=True)
class LieBasis:
    """Basis of a bracket-closed span of constant matrices.

    ``words[k]`` records how ``basis[k]`` arose: ``("gen", i)`` for the
    i-th generator, ``("br", a, b)`` for ``[basis[a], basis[b]]``.
    """

    basis: tuple
    closed: bool
    envelope_certified: bool
    words: tuple = ()

    @property
    def dim(self) -> int:
        return len(self.basis)

    def size(self) -> int:
        return len(self.basis[0]) if self.basis else 0


def lie_closure(gens: Sequence, n: int | None = None) -> LieBasis:
    """Smallest bracket-closed subspace containing ``gens``.

    Breadth-first: every new basis element is bracketed against all earlier
    ones, each candidate being reduced against the running echelon form.
    """
    gens = [_qmat(g) for g in gens]
    if n is None:
        n = len(gens[0]) if gens else 0
    span = EchelonSpan(n * n)
    basis, words = [], []
    for i, g in enumerate(gens):
        if span.add(vec(g)):
            basis.append(g)
            words.append(("gen", i))
    k = 0
    while k < len(basis):
        for j in range(k):
            b = bracket(basis[j], basis[k])
            if span.add(vec(b)):
                basis.append(_qmat(b))
                words.append(("br", j, k))
        k += 1
    return LieBasis(tuple(basis), True, is_scalar_plus_nilpotent(basis, n), tuple(words))


def spans_equal(a: Sequence, b: Sequence, n: int) -> bool:
    sa, sb = EchelonSpan(n * n), EchelonSpan(n * n)
    for M in a:
        sa.add(vec(M))
    for M in b:
        sb.add(vec(M))
    return len(sa) == len(sb) and all(sa.contains(vec(M)) for M in b)


def is_bracket_closed(basis: Sequence, n: int) -> bool:
    span = EchelonSpan(n * n)
    for M in basis:
        span.add(vec(M))
    return all(
        span.contains(vec(bracket(basis[i], basis[j])))
        for i in range(len(basis))
        for j in range(i)
    )


def is_scalar_plus_nilpotent(basis: Sequence, n: int) -> bool:
    """True when span(basis) = (Q*Id or 0) + a Lie algebra of nilpotent matrices.

    Under that condition the bracket closure is already algebraic.  The
    traceless parts form a Lie algebra; it consists of nilpotent matrices iff
    the associative algebra it generates is nilpotent, which is tested via
    the descending chain ``V, V*V, ...`` reaching zero within ``n`` steps.
    """
    if not basis or n == 0:
        return True
    ident = linalg.identity(n)
    span = EchelonSpan(n * n)
    for M in basis:
        span.add(vec(M))
    traceless = []
    has_trace = False
    for M in basis:
        t = sum((M[i][i] for i in range(n)), _F0) / n
        if t:
            has_trace = True
        traceless.append(linalg.matsub(M, linalg.scale(t, ident)))
    if has_trace and not span.contains(vec(ident)):
        return False
    gens = [T for T in traceless if not linalg.is_zero_matrix(T)]
    layer = gens
    for _ in range(n):
        if not layer:
            return True
        nxt = EchelonSpan(n * n)
        out = []
        for G in gens:
            for L in layer:
                P = linalg.matmul(G, L)
                if nxt.add(vec(P)):
                    out.append(P)
        layer = out
    return not layer


def derived_series(basis: Sequence, n: int | None = None) -> list[int]:
    """Dimensions of L, [L, L], [[L, L], [L, L]], ... down to 0 or a fixed point."""
    basis = [_qmat(b) for b in basis]
    if n is None:
        n = len(basis[0]) if basis else 0
    dims = [len(basis)]
    cur = basis
    while cur:
        span = EchelonSpan(n * n)
        nxt = []
        for i in range(len(cur)):
            for j in range(i):
                b = bracket(cur[j], cur[i])
                if span.add(vec(b)):
                    nxt.append(b)
        if len(nxt) == len(cur):
            break
        dims.append(len(nxt))
        cur = nxt
    return dims


def lie_dim(sys) -> tuple[int, LieBasis, WeiNormanDecomp]:
    decomp = wei_norman(sys)
    n = len(getattr(sys, "A", sys))
    basis = lie_closure(decomp.mats, n)
    return basis.dim, basis, decomp
