"""Exact dense linear algebra over a field.

Entries may be ``fractions.Fraction`` or :class:`redform.exactfield.RatFunc`;
anything supporting ``+ - * /`` and truthiness-as-nonzero works.  Matrices are
lists (or tuples) of rows.  No pivoting heuristics: over exact arithmetic the
first nonzero entry in column order is as good as any.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Sequence

Matrix = list  # list[list[Any]]


def zeros(n: int, m: int, zero: Any = Fraction(0)) -> Matrix:
    return [[zero for _ in range(m)] for _ in range(n)]


def identity(n: int, zero: Any = Fraction(0), one: Any = Fraction(1)) -> Matrix:
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def matmul(a: Sequence[Sequence[Any]], b: Sequence[Sequence[Any]]) -> Matrix:
    n, k, m = len(a), len(b), len(b[0]) if b else 0
    out = []
    for i in range(n):
        row_a = a[i]
        row = []
        for j in range(m):
            acc = None
            for t in range(k):
                x = row_a[t]
                if not x:
                    continue
                y = b[t][j]
                if not y:
                    continue
                acc = x * y if acc is None else acc + x * y
            row.append(acc if acc is not None else _zero_like(row_a, b))
        out.append(row)
    return out


def _zero_like(row_a, b):
    sample = row_a[0] if row_a else b[0][0]
    return sample - sample


def matadd(a, b) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def matsub(a, b) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def scale(c, a) -> Matrix:
    return [[c * x for x in row] for row in a]


def transpose(a) -> Matrix:
    return [list(col) for col in zip(*a)] if a else []


def is_zero_matrix(a) -> bool:
    return all(not x for row in a for x in row)


def kron(a, b) -> Matrix:
    """Kronecker product, row-major block layout."""
    n, m = len(a), len(a[0])
    p, q = len(b), len(b[0])
    out = []
    for i in range(n):
        for r in range(p):
            out.append([a[i][j] * b[r][s] for j in range(m) for s in range(q)])
    return out


def rref(rows, ncols: int | None = None):
    """Reduced row echelon form.

    Returns ``(R, pivots)`` where ``R`` holds only the nonzero rows and
    ``pivots[i]`` is the pivot column of ``R[i]``.
    """
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0]) if ncols is None else ncols
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows) -> int:
    return len(rref(rows)[1])


def nullspace(rows, ncols: int):
    """Basis of {v : rows . v = 0}, one vector per free column."""
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    r, piv = rref(rows, ncols)
    zero = r[0][0] - r[0][0] if r else Fraction(0)
    one = zero + 1
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [zero] * ncols
        v[f] = one
        for row, p in zip(r, piv):
            v[p] = -row[f]
        basis.append(v)
    return basis


def solve_linear(a, b):
    """One solution of ``a x = b`` or ``None``; free unknowns set to zero."""
    n = len(a[0])
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    r, piv = rref(aug, n + 1)
    if n in piv:
        return None
    zero = b[0] - b[0]
    x = [zero] * n
    for row, p in zip(r, piv):
        x[p] = row[n]
    return x


def inverse(a) -> Matrix:
    """Inverse by Gauss-Jordan; raises ``ZeroDivisionError`` when singular."""
    n = len(a)
    zero = a[0][0] - a[0][0]
    one = zero + 1
    aug = [list(a[i]) + [one if i == j else zero for j in range(n)] for i in range(n)]
    r, piv = rref(aug, n)
    if piv != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in r]


def determinant(a):
    n = len(a)
    m = [list(r) for r in a]
    zero = m[0][0] - m[0][0]
    det = zero + 1
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c]), None)
        if piv is None:
            return zero
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det = det * m[c][c]
        inv = 1 / m[c][c]
        for i in range(c + 1, n):
            if m[i][c]:
                f = m[i][c] * inv
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return det


class EchelonSpan:
    """Incrementally maintained row space of vectors over Q.

    ``reduce`` returns the remainder of a vector against the current basis;
    ``add`` inserts a vector if it is independent and reports whether it did.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self.rows: list[list[Fraction]] = []
        self.pivots: list[int] = []

    def __len__(self) -> int:
        return len(self.rows)

    def reduce(self, v):
        v = list(v)
        for row, p in zip(self.rows, self.pivots):
            if v[p]:
                f = v[p]
                v = [x - f * y for x, y in zip(v, row)]
        return v

    def contains(self, v) -> bool:
        return not any(self.reduce(v))

    def add(self, v) -> bool:
        w = self.reduce(v)
        p = next((i for i, x in enumerate(w) if x), None)
        if p is None:
            return False
        inv = 1 / w[p]
        w = [x * inv for x in w]
        for k, (row, q) in enumerate(zip(self.rows, self.pivots)):
            if row[p]:
                f = row[p]
                self.rows[k] = [x - f * y for x, y in zip(row, w)]
        self.rows.append(w)
        self.pivots.append(p)
        return True

    def coordinates(self, v):
        """Coefficients of ``v`` on the current (reduced) rows, or None."""
        if not self.contains(v):
            return None
        return [v[p] for p in self.pivots]
