"""Linear differential systems dY/dx = A Y over Q(x).

Block structure is carried alongside the matrix.  The reducer works in LOWER
orientation; upper-triangular inputs are conjugated by the index reversal
``J`` (``J A J`` is block lower triangular with the block list reversed).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import linalg
from .exactfield import ONE, ZERO, Poly, RatFunc, derive, factor

LOWER = "lower"
UPPER = "upper"


class SystemError_(ValueError):
    """Invalid differential system or gauge matrix."""


class SingularPointError(ValueError):
    """The requested expansion point is a pole of some entry."""


def as_matrix(rows) -> tuple[tuple[RatFunc, ...], ...]:
    return tuple(tuple(RatFunc.coerce(v) for v in row) for row in rows)


def block_offsets(blocks: Sequence[int]) -> list[int]:
    out, acc = [], 0
    for b in blocks:
        out.append(acc)
        acc += b
    return out


def block_index(blocks: Sequence[int]) -> list[int]:
    """Block number of each row/column."""
    return [k for k, b in enumerate(blocks) for _ in range(b)]


def violates_triangularity(A, blocks, orientation) -> tuple[int, int] | None:
    idx = block_index(blocks)
    for i, row in enumerate(A):
        for j, v in enumerate(row):
            if not v:
                continue
            if orientation == LOWER and idx[j] > idx[i]:
                return i, j
            if orientation == UPPER and idx[j] < idx[i]:
                return i, j
    return None


@dataclass(frozen=True)
class DiffSystem:
    """The system ``dY/dx = A Y`` with a block-triangular structure.

    ``integrals`` records rows that were appended by
    :func:`augment_with_integrals` as ``(row, source_component)`` pairs.
    """

    A: tuple
    blocks: tuple = None
    orientation: str = LOWER
    diag_reduced_assumed: bool = False
    integrals: tuple = ()

    def __post_init__(self):
        A = as_matrix(self.A)
        n = len(A)
        if any(len(r) != n for r in A):
            raise SystemError_("system matrix must be square")
        blocks = tuple(self.blocks) if self.blocks else (n,)
        if any(b <= 0 for b in blocks) or sum(blocks) != n:
            raise SystemError_(f"blocks {list(blocks)} do not sum to dimension {n}")
        if self.orientation not in (LOWER, UPPER):
            raise SystemError_(f"unknown orientation {self.orientation!r}")
        bad = violates_triangularity(A, blocks, self.orientation)
        if bad is not None:
            i, j = bad
            raise SystemError_(
                f"entry ({i + 1},{j + 1}) = {A[i][j]} breaks {self.orientation} block-triangular shape"
            )
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "integrals", tuple(tuple(p) for p in self.integrals))

    @property
    def n(self) -> int:
        return len(self.A)

    def with_matrix(self, A, blocks=None) -> "DiffSystem":
        return DiffSystem(A, blocks or self.blocks, self.orientation, self.diag_reduced_assumed, self.integrals)

    def reblocked(self, blocks) -> "DiffSystem":
        return DiffSystem(self.A, tuple(blocks), self.orientation, self.diag_reduced_assumed, self.integrals)

    def diagonal_part(self) -> "DiffSystem":
        idx = block_index(self.blocks)
        A = [[v if idx[i] == idx[j] else ZERO for j, v in enumerate(row)] for i, row in enumerate(self.A)]
        return self.with_matrix(A)

    def denominators(self) -> list[Poly]:
        return [v.den for row in self.A for v in row if v.den.degree > 0]


# ---------------------------------------------------------------------------
# orientation


def reversal(n: int):
    return [[ONE if i + j == n - 1 else ZERO for j in range(n)] for i in range(n)]


def flip(M):
    """``J M J`` for the index-reversal permutation ``J``."""
    return [list(reversed(row)) for row in reversed(M)]


def to_lower(sys: DiffSystem) -> DiffSystem:
    if sys.orientation == LOWER:
        return sys
    n = sys.n
    integrals = tuple((n - 1 - r, n - 1 - s) for r, s in sys.integrals)
    return DiffSystem(flip(sys.A), tuple(reversed(sys.blocks)), LOWER, sys.diag_reduced_assumed, integrals)


def from_lower(sys: DiffSystem, orientation: str) -> DiffSystem:
    if orientation == LOWER:
        return sys
    n = sys.n
    integrals = tuple((n - 1 - r, n - 1 - s) for r, s in sys.integrals)
    return DiffSystem(flip(sys.A), tuple(reversed(sys.blocks)), UPPER, sys.diag_reduced_assumed, integrals)


# ---------------------------------------------------------------------------
# gauge transformations


@dataclass(frozen=True)
class GaugeMatrix:
    """An invertible matrix over Q(x); invertibility is checked exactly."""

    P: tuple
    _inverse: tuple = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        P = as_matrix(self.P)
        if any(len(r) != len(P) for r in P):
            raise SystemError_("gauge matrix must be square")
        try:
            inv = linalg.inverse([list(r) for r in P])
        except ZeroDivisionError:
            raise SystemError_("gauge matrix is not invertible (det = 0)") from None
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "_inverse", as_matrix(inv))

    @classmethod
    def identity(cls, n: int) -> "GaugeMatrix":
        return cls(linalg.identity(n, ZERO, ONE))

    @property
    def n(self) -> int:
        return len(self.P)

    @property
    def inverse(self):
        return self._inverse

    def is_identity(self) -> bool:
        return all(v == (1 if i == j else 0) for i, row in enumerate(self.P) for j, v in enumerate(row))

    def __matmul__(self, other: "GaugeMatrix") -> "GaugeMatrix":
        return GaugeMatrix(linalg.matmul(self.P, other.P))

    def flipped(self) -> "GaugeMatrix":
        return GaugeMatrix(flip(self.P))


def apply_gauge(P, A):
    """``P^-1 A P - P^-1 P'`` on raw matrices."""
    gm = P if isinstance(P, GaugeMatrix) else GaugeMatrix(P)
    Pinv = gm.inverse
    dP = [[derive(v) for v in row] for row in gm.P]
    left = linalg.matmul(linalg.matmul(Pinv, A), gm.P)
    return as_matrix(linalg.matsub(left, linalg.matmul(Pinv, dP)))


def finest_blocks(A, orientation: str) -> tuple[int, ...]:
    """Finest consecutive block partition keeping A block triangular."""
    n = len(A)
    cuts = []
    for k in range(1, n):
        if orientation == LOWER:
            ok = all(not A[i][j] for i in range(k) for j in range(k, n))
        else:
            ok = all(not A[i][j] for i in range(k, n) for j in range(k))
        if ok:
            cuts.append(k)
    edges = [0] + cuts + [n]
    return tuple(b - a for a, b in zip(edges, edges[1:]))


def gauge_transform(P: GaugeMatrix, sys: DiffSystem) -> DiffSystem:
    """Return ``P[A]``; block metadata is kept when still valid, else recomputed."""
    if P.n != sys.n:
        raise SystemError_(f"gauge of size {P.n} does not match system of size {sys.n}")
    B = apply_gauge(P, sys.A)
    blocks = sys.blocks
    if violates_triangularity(B, blocks, sys.orientation) is not None:
        blocks = finest_blocks(B, sys.orientation)
    return DiffSystem(B, blocks, sys.orientation, sys.diag_reduced_assumed, sys.integrals)


def check_gauge_identity(P: GaugeMatrix, src: DiffSystem, dst: DiffSystem) -> bool:
    if P.n != src.n or src.n != dst.n:
        raise SystemError_("dimension mismatch in gauge certificate")
    return apply_gauge(P, src.A) == as_matrix(dst.A)


# ---------------------------------------------------------------------------
# constructions


def augment_with_integrals(sys: DiffSystem, select: Sequence[int]) -> DiffSystem:
    """Append one row ``Y_new' = Y_s`` per selected component ``s`` (0-based).

    The new rows form a trailing zero block of size ``len(select)``; the
    result is always in lower orientation.
    """
    n, m = sys.n, len(select)
    if m == 0:
        return sys
    if sys.orientation == UPPER:
        select = [n - 1 - s for s in select]
        sys = to_lower(sys)
    A = [list(row) + [ZERO] * m for row in sys.A]
    integrals = list(sys.integrals)
    for k, s in enumerate(select):
        if not 0 <= s < n:
            raise SystemError_(f"selected component {s} out of range")
        A.append([ONE if j == s else ZERO for j in range(n + m)])
        integrals.append((n + k, s))
    return DiffSystem(A, tuple(sys.blocks) + (m,), LOWER, sys.diag_reduced_assumed, tuple(integrals))


def companion_of_operator(coeffs: Sequence[RatFunc]) -> DiffSystem:
    """Companion system of ``y^(n) + c[n-1] y^(n-1) + ... + c[0] y``.

    The state vector is ``(y, y', ..., y^(n-1))``.
    """
    n = len(coeffs)
    if n == 0:
        raise SystemError_("operator of order zero")
    A = [[ZERO] * n for _ in range(n)]
    for i in range(n - 1):
        A[i][i + 1] = ONE
    for j, c in enumerate(coeffs):
        A[n - 1][j] = -RatFunc.coerce(c)
    return DiffSystem(A, (n,))


# ---------------------------------------------------------------------------
# truncated power series


def taylor(f: RatFunc, x0, N: int) -> list[Fraction]:
    """First ``N`` Taylor coefficients of ``f`` at ``x0``."""
    f = RatFunc.coerce(f)
    num = f.num.shift(x0).coeffs
    den = f.den.shift(x0).coeffs
    if not den or not den[0]:
        raise SingularPointError(f"{f} has a pole at {x0}")
    out = []
    inv = 1 / den[0]
    for k in range(N):
        acc = num[k] if k < len(num) else Fraction(0)
        for j in range(1, min(k, len(den) - 1) + 1):
            acc -= den[j] * out[k - j]
        out.append(acc * inv)
    return out


def matrix_taylor(M, x0, N: int, name: str = "A"):
    """Coefficient matrices ``M_k`` with ``M(x0 + t) = sum M_k t^k``."""
    n, m = len(M), len(M[0])
    series = [[None] * m for _ in range(n)]
    for i in range(n):
        for j in range(m):
            try:
                series[i][j] = taylor(M[i][j], x0, N)
            except SingularPointError:
                raise SingularPointError(
                    f"x0 = {x0} is a pole of entry {name}[{i + 1},{j + 1}] = {M[i][j]}"
                ) from None
    return [[[series[i][j][k] for j in range(m)] for i in range(n)] for k in range(N)]


@dataclass(frozen=True)
class SeriesMatrix:
    """Truncated fundamental matrix ``U = sum coefficients[k] (x - x0)^k``."""

    expansion_point: Fraction
    order: int
    coefficients: tuple

    def entry_series(self, i: int, j: int) -> list[Fraction]:
        return [c[i][j] for c in self.coefficients]


def series_fundamental(sys: DiffSystem, x0, N: int) -> SeriesMatrix:
    """Fundamental solution with ``U(x0) = Id``, exact modulo ``(x - x0)^N``."""
    if N < 1:
        raise ValueError("order must be positive")
    x0 = Fraction(x0)
    n = sys.n
    Ak = matrix_taylor(sys.A, x0, N)
    U = [linalg.identity(n)]
    for k in range(N - 1):
        acc = linalg.zeros(n, n)
        for j in range(k + 1):
            acc = linalg.matadd(acc, linalg.matmul(Ak[j], U[k - j]))
        U.append(linalg.scale(Fraction(1, k + 1), acc))
    return SeriesMatrix(x0, N, tuple(tuple(tuple(r) for r in u) for u in U))


def series_residual(A_coeffs, U_coeffs, N: int):
    """Coefficients of ``U' - A U`` below order ``N - 1``."""
    n = len(U_coeffs[0])
    m = len(U_coeffs[0][0])
    out = []
    for k in range(N - 1):
        d = linalg.scale(Fraction(k + 1), U_coeffs[k + 1]) if k + 1 < len(U_coeffs) else linalg.zeros(n, m)
        acc = linalg.zeros(n, m)
        for j in range(k + 1):
            acc = linalg.matadd(acc, linalg.matmul(A_coeffs[j], U_coeffs[k - j]))
        out.append(linalg.matsub(d, acc))
    return out


def series_mul(a, b, N: int):
    """Product of two matrix series truncated at order N."""
    out = []
    for k in range(N):
        acc = linalg.zeros(len(a[0]), len(b[0][0]))
        for j in range(k + 1):
            acc = linalg.matadd(acc, linalg.matmul(a[j], b[k - j]))
        out.append(acc)
    return out


def ordinary_point(matrices, extra_polys=()) -> Fraction:
    """Smallest non-negative integer that is not a root of any denominator."""
    bad = set()
    polys = [v.den for M in matrices for row in M for v in row if v.den.degree > 0]
    polys.extend(p for p in extra_polys if p.degree > 0)
    for p in polys:
        for q, _ in factor(p):
            if q.degree == 1:
                bad.add(-q.coeffs[0])
    k = 0
    while Fraction(k) in bad:
        k += 1
    return Fraction(k)


def series_gauge_check(P: GaugeMatrix, src: DiffSystem, dst: DiffSystem, N: int = 12, x0=None) -> bool:
    """Check that the columns of ``P^-1 U_src`` solve ``dst`` modulo ``(x-x0)^(N-1)``."""
    if x0 is None:
        from .linalg import determinant

        det = determinant([list(r) for r in P.P])
        x0 = ordinary_point([src.A, dst.A, P.P, P.inverse], [det.num, det.den])
    U = series_fundamental(src, x0, N).coefficients
    Pinv = matrix_taylor(P.inverse, x0, N, "P^-1")
    Z = series_mul(Pinv, U, N)
    Ad = matrix_taylor(dst.A, x0, N, "A_red")
    return all(linalg.is_zero_matrix(r) for r in series_residual(Ad, Z, N))
