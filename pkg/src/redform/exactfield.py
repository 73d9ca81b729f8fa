"""Exact arithmetic in Q[x] and Q(x).

Polynomials are dense tuples of ``Fraction`` (low degree first).  Rational
functions are kept in canonical form: coprime numerator and denominator with
a monic denominator, so ``==`` is mathematical equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import product
from typing import Iterable, Sequence

from .linalg import EchelonSpan

ZERO_DEGREE = -1  # degree of the zero polynomial

_F0 = Fraction(0)
_F1 = Fraction(1)


def _q(c) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


class Poly:
    """Univariate polynomial over Q."""

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Iterable = ()):
        cs = [_q(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)
        self._hash = None

    @classmethod
    def _raw(cls, coeffs: tuple) -> "Poly":
        p = object.__new__(cls)
        p.coeffs = coeffs
        p._hash = None
        return p

    @classmethod
    def x(cls) -> "Poly":
        return cls._raw((_F0, _F1))

    @classmethod
    def const(cls, c) -> "Poly":
        return cls((c,))

    @classmethod
    def linear_root(cls, a) -> "Poly":
        """The monic factor x - a."""
        return cls((-_q(a), _F1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else _F0

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Poly.const(other).coeffs
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(("Poly", self.coeffs))
        return self._hash

    def __repr__(self) -> str:
        return f"Poly({format_poly(self)})"

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def __neg__(self) -> "Poly":
        return Poly._raw(tuple(-c for c in self.coeffs))

    def __add__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            if isinstance(other, (int, Fraction)):
                other = Poly.const(other)
            else:
                return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly(out)

    __radd__ = __add__

    def __sub__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            if isinstance(other, (int, Fraction)):
                other = Poly.const(other)
            else:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            if isinstance(other, (int, Fraction)):
                c = _q(other)
                if not c:
                    return Poly._raw(())
                return Poly._raw(tuple(x * c for x in self.coeffs))
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly._raw(())
        out = [_F0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return Poly._raw(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative polynomial power")
        result, base = Poly.const(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __divmod__(self, other: "Poly"):
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        db = other.degree
        inv = 1 / other.lc
        if len(r) - 1 < db:
            return Poly._raw(()), self
        q = [_F0] * (len(r) - db)
        bc = other.coeffs
        for k in range(len(r) - 1 - db, -1, -1):
            c = r[k + db] * inv
            q[k] = c
            if c:
                for j in range(db + 1):
                    r[k + j] -= c * bc[j]
        return Poly(q), Poly(r[:db])

    def __floordiv__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[1]

    def exquo(self, other: "Poly") -> "Poly":
        q, r = divmod(self, other)
        if r:
            raise ArithmeticError("inexact polynomial division")
        return q

    def __call__(self, x):
        acc = _F0 if isinstance(x, (int, Fraction)) else x * 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Poly":
        return Poly._raw(tuple(c * i for i, c in enumerate(self.coeffs) if i))

    def integral(self) -> "Poly":
        """Antiderivative with zero constant term."""
        if not self.coeffs:
            return self
        return Poly._raw((_F0,) + tuple(c / (i + 1) for i, c in enumerate(self.coeffs)))

    def monic(self) -> "Poly":
        if not self.coeffs or self.coeffs[-1] == 1:
            return self
        inv = 1 / self.coeffs[-1]
        return Poly._raw(tuple(c * inv for c in self.coeffs))

    def shift(self, a) -> "Poly":
        """Return p(x + a) by Horner's scheme."""
        a = _q(a)
        out = Poly._raw(())
        xa = Poly((a, 1))
        for c in reversed(self.coeffs):
            out = out * xa + c
        return out

    def valuation_at(self, a) -> int:
        """Multiplicity of the root ``a`` (0 if not a root, large for zero)."""
        if not self:
            raise ValueError("valuation of the zero polynomial")
        v, p, lin = 0, self, Poly.linear_root(a)
        while True:
            q, r = divmod(p, lin)
            if r:
                return v
            v, p = v + 1, q

    def integer_coeffs(self) -> tuple[int, ...]:
        """Primitive integer multiple of this polynomial, positive leading coefficient."""
        from math import gcd, lcm

        if not self.coeffs:
            return ()
        den = reduce(lcm, (c.denominator for c in self.coeffs), 1)
        ints = [int(c * den) for c in self.coeffs]
        g = reduce(gcd, ints, 0)
        if ints[-1] < 0:
            g = -g
        return tuple(i // g for i in ints)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd (zero if both are zero)."""
    while b:
        a, b = b, a % b
        if b:
            b = b.monic()
    return a.monic()


def poly_xgcd(a: Poly, b: Poly):
    """Return ``(s, t, g)`` with ``s*a + t*b = g`` and ``g`` monic."""
    r0, r1 = a, b
    s0, s1 = Poly.const(1), Poly._raw(())
    t0, t1 = Poly._raw(()), Poly.const(1)
    while r1:
        q, r = divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if not r0:
        return s0, t0, r0
    inv = 1 / r0.lc
    return s0 * inv, t0 * inv, r0 * inv


def diophantine(a: Poly, b: Poly, c: Poly):
    """Solve ``s*a + t*b = c`` with ``deg s < deg b`` (requires gcd(a, b) | c)."""
    s, t, g = poly_xgcd(a, b)
    q, r = divmod(c, g)
    if r:
        raise ArithmeticError("gcd does not divide right-hand side")
    s, t = s * q, t * q
    if b.degree >= 1:
        qq, s = divmod(s, b)
        t = t + qq * a
    return s, t


def squarefree_decomposition(p: Poly) -> list[Poly]:
    """Yun's algorithm: ``[s1, s2, ...]`` monic with ``p = lc * prod s_i^i``."""
    if p.degree < 1:
        return []
    p = p.monic()
    dp = p.derivative()
    a = poly_gcd(p, dp)
    b = p.exquo(a)
    c = dp.exquo(a)
    d = c - b.derivative()
    out = []
    while b.degree >= 1:
        a = poly_gcd(b, d)
        out.append(a)
        b = b.exquo(a)
        c = d.exquo(a)
        d = c - b.derivative()
    while out and out[-1].degree < 1:
        out.pop()
    return out


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


def rational_roots(p: Poly) -> list[Fraction]:
    """Distinct rational roots, ascending."""
    if p.degree < 1:
        return []
    roots = set()
    if not p.coeffs[0]:
        roots.add(_F0)
        k = next(i for i, c in enumerate(p.coeffs) if c)
        p = Poly(p.coeffs[k:])
    if p.degree < 1:
        return sorted(roots)
    ints = p.integer_coeffs()
    if p.degree == 1:
        roots.add(Fraction(-ints[0], ints[1]))
        return sorted(roots)
    for num, den in product(_divisors(ints[0]), _divisors(ints[-1])):
        for cand in (Fraction(num, den), Fraction(-num, den)):
            if cand not in roots and not p(cand):
                roots.add(cand)
    return sorted(roots)


def _split_irreducible(s: Poly) -> list[Poly]:
    """Monic irreducible factors of a squarefree polynomial over Q."""
    out = []
    for r in rational_roots(s):
        lin = Poly.linear_root(r)
        out.append(lin)
        s = s.exquo(lin)
    if s.degree >= 4:
        out.extend(_sympy_factor(s))
    elif s.degree >= 1:
        # no rational root and degree <= 3 certifies irreducibility
        out.append(s.monic())
    return out


def _sympy_factor(s: Poly) -> list[Poly]:
    import sympy

    x = sympy.Symbol("x")
    expr = sum(sympy.Rational(c.numerator, c.denominator) * x**i for i, c in enumerate(s.coeffs))
    _, facs = sympy.factor_list(expr, x)
    out = []
    for f, _mult in facs:
        cs = sympy.Poly(f, x).all_coeffs()[::-1]
        out.append(Poly(Fraction(int(c.p), int(c.q)) for c in cs).monic())
    return out


def factor(p: Poly) -> list[tuple[Poly, int]]:
    """Irreducible factorization ``[(q, e), ...]`` of a monic-ized ``p``.

    Factors are sorted: linear factors by root, then by degree and coefficients.
    """
    out = []
    for mult, s in enumerate(squarefree_decomposition(p), start=1):
        if s.degree < 1:
            continue
        for q in _split_irreducible(s):
            out.append((q, mult))
    out.sort(key=lambda fe: factor_sort_key(fe[0]))
    return out


def factor_sort_key(q: Poly):
    if q.degree == 1:
        return (1, -q.coeffs[0], ())
    return (q.degree, _F0, q.coeffs)


def linear_root(q: Poly) -> Fraction | None:
    """Root of a monic linear factor, else None."""
    return -q.coeffs[0] if q.degree == 1 else None


class RatFunc:
    """Element of Q(x) in canonical form."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num=0, den=1):
        if not isinstance(num, Poly):
            num = Poly.const(num)
        if not isinstance(den, Poly):
            den = Poly.const(den)
        if not den:
            raise ZeroDivisionError("rational function with zero denominator")
        if not num:
            self.num, self.den = num, Poly.const(1)
        elif den.degree == 0:
            self.num, self.den = num * (1 / den.lc), Poly.const(1)
        else:
            g = poly_gcd(num, den)
            if g.degree > 0:
                num, den = num.exquo(g), den.exquo(g)
            lc = den.lc
            if lc != 1:
                inv = 1 / lc
                num, den = num * inv, den * inv
            self.num, self.den = num, den
        self._hash = None

    @classmethod
    def _raw(cls, num: Poly, den: Poly) -> "RatFunc":
        f = object.__new__(cls)
        f.num, f.den, f._hash = num, den, None
        return f

    @classmethod
    def x(cls) -> "RatFunc":
        return cls._raw(Poly.x(), Poly.const(1))

    @classmethod
    def coerce(cls, v) -> "RatFunc":
        if isinstance(v, RatFunc):
            return v
        if isinstance(v, Poly):
            return cls._raw(v, Poly.const(1))
        if isinstance(v, (int, Fraction)):
            return cls._raw(Poly.const(v), Poly.const(1))
        raise TypeError(f"cannot coerce {type(v).__name__} to RatFunc")

    def __bool__(self) -> bool:
        return bool(self.num)

    def __eq__(self, other) -> bool:
        if isinstance(other, RatFunc):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, Fraction, Poly)):
            return self == RatFunc.coerce(other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __repr__(self) -> str:
        return f"RatFunc({format_ratfunc(self)})"

    def __str__(self) -> str:
        return format_ratfunc(self)

    def is_constant(self) -> bool:
        return self.den.degree == 0 and self.num.degree <= 0

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.num.coeffs[0] if self.num else _F0

    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    def __neg__(self) -> "RatFunc":
        return RatFunc._raw(-self.num, self.den)

    def __add__(self, other) -> "RatFunc":
        try:
            other = RatFunc.coerce(other)
        except TypeError:
            return NotImplemented
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other) -> "RatFunc":
        try:
            other = RatFunc.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "RatFunc":
        return (-self) + other

    def __mul__(self, other) -> "RatFunc":
        if isinstance(other, (int, Fraction)):
            if not other:
                return RatFunc._raw(Poly._raw(()), Poly.const(1))
            return RatFunc._raw(self.num * other, self.den)
        try:
            other = RatFunc.coerce(other)
        except TypeError:
            return NotImplemented
        if not self.num or not other.num:
            return RatFunc._raw(Poly._raw(()), Poly.const(1))
        if self.den.degree == 0 and other.den.degree == 0:
            return RatFunc._raw(self.num * other.num, Poly.const(1))
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RatFunc":
        try:
            other = RatFunc.coerce(other)
        except TypeError:
            return NotImplemented
        if not other.num:
            raise ZeroDivisionError("division by the zero rational function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> "RatFunc":
        return RatFunc.coerce(other) / self

    def __pow__(self, n: int) -> "RatFunc":
        if n < 0:
            return RatFunc(self.den**-n, self.num**-n)
        return RatFunc._raw(self.num**n, self.den**n)

    def __call__(self, x):
        d = self.den(x)
        if not d:
            raise ZeroDivisionError(f"{self} has a pole at {x}")
        return self.num(x) / d

    def derivative(self) -> "RatFunc":
        return derive(self)

    def normalized(self) -> "RatFunc":
        return RatFunc(self.num, self.den)


ZERO = RatFunc._raw(Poly._raw(()), Poly._raw((_F1,)))
ONE = RatFunc._raw(Poly._raw((_F1,)), Poly._raw((_F1,)))
X = RatFunc.x()


def ratfunc(num, den=1) -> RatFunc:
    return RatFunc(num, den)


def arith(a: RatFunc, b: RatFunc, op: str) -> RatFunc:
    """Binary field operation by name: ``add``, ``sub``, ``mul`` or ``div``."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if not b:
            raise ZeroDivisionError("division by the zero rational function")
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def derive(a: RatFunc) -> RatFunc:
    a = RatFunc.coerce(a)
    if a.den.degree == 0:
        return RatFunc._raw(a.num.derivative(), a.den)
    return RatFunc(a.num.derivative() * a.den - a.num * a.den.derivative(), a.den * a.den)


# ---------------------------------------------------------------------------
# partial fractions


@dataclass(frozen=True)
class PFTerm:
    factor: Poly
    multiplicity: int
    numerator: Poly

    def value(self) -> RatFunc:
        return RatFunc(self.numerator, self.factor**self.multiplicity)


@dataclass(frozen=True)
class PartialFraction:
    polynomial_part: Poly
    terms: tuple[PFTerm, ...]

    def recombine(self) -> RatFunc:
        acc = RatFunc.coerce(self.polynomial_part)
        for t in self.terms:
            acc = acc + t.value()
        return acc

    def has_only_linear_factors(self) -> bool:
        return all(t.factor.degree == 1 for t in self.terms)


def squarefree_partfrac(a: RatFunc) -> PartialFraction:
    """Complete partial fraction decomposition over Q."""
    a = RatFunc.coerce(a)
    poly_part, rem = divmod(a.num, a.den)
    terms: list[PFTerm] = []
    if rem:
        facs = factor(a.den)
        for q, e in facs:
            qe = q**e
            rest = a.den.exquo(qe)
            # rem/den = (rem * rest^-1 mod q^e)/q^e + (...)/rest
            s, _t, g = poly_xgcd(rest, qe)
            num = (rem * s) % qe
            # q-adic expansion: num = sum c_m q^m, deg c_m < deg q
            digits = []
            while num:
                num, c = divmod(num, q)
                digits.append(c)
            for m, c in enumerate(digits):
                if c:
                    terms.append(PFTerm(q, e - m, c))
    terms.sort(key=lambda t: (factor_sort_key(t.factor), t.multiplicity))
    return PartialFraction(poly_part, tuple(terms))


def poles(a: RatFunc) -> list[tuple[Poly, int]]:
    """Irreducible factors of the denominator with their multiplicities."""
    return factor(RatFunc.coerce(a).den)


# ---------------------------------------------------------------------------
# Hermite reduction


def hermite_reduce(a: RatFunc) -> tuple[RatFunc, RatFunc]:
    """Split ``a = g' + r`` with ``r`` proper and squarefree-denominated.

    ``a`` has a rational antiderivative iff ``r == 0``; then ``g`` is one.
    """
    a = RatFunc.coerce(a)
    poly_part, num = divmod(a.num, a.den)
    g = RatFunc.coerce(poly_part.integral())
    den = a.den
    if not num:
        return g, ZERO
    sqf = squarefree_decomposition(den)
    for i, v in enumerate(sqf, start=1):
        if i < 2 or v.degree < 1:
            continue
        u = den.exquo(v**i)
        dv = v.derivative()
        for j in range(i - 1, 0, -1):
            b, c = diophantine(u * dv, v, num * Fraction(-1, j))
            g = g + RatFunc(b, v**j)
            num = c * (-j) - u * b.derivative()
        den = u * v
    return g, RatFunc(num, den)


# ---------------------------------------------------------------------------
# coordinates on partial-fraction atoms


def atom_coordinates(a: RatFunc) -> dict:
    """Coefficients of ``a`` on the partial-fraction atoms.

    Atom keys are ``("poly", j)`` for ``x^j`` and ``("pole", q, m, i)`` for
    ``x^i / q^m`` with ``q`` monic irreducible.
    """
    pf = squarefree_partfrac(a)
    out = {}
    for j, c in enumerate(pf.polynomial_part.coeffs):
        if c:
            out[("poly", j)] = c
    for t in pf.terms:
        for i, c in enumerate(t.numerator.coeffs):
            if c:
                out[("pole", t.factor, t.multiplicity, i)] = c
    return out


def atom_sort_key(key):
    if key[0] == "poly":
        return (0, key[1], ())
    _, q, m, i = key
    return (1, factor_sort_key(q), m, i)


def atom_value(key) -> RatFunc:
    if key[0] == "poly":
        return RatFunc._raw(Poly.x() ** key[1], Poly.const(1))
    _, q, m, i = key
    return RatFunc(Poly.x() ** i, q**m)


def coeff_basis(fs: Sequence[RatFunc]):
    """Q-basis of span(fs) and the coordinates of each input on it.

    The basis is the reduced echelon form of the atom-coordinate matrix, so it
    consists of single atoms whenever the span is spanned by atoms.
    Returns ``(basis, coords)`` with ``fs[i] == sum(coords[i][k] * basis[k])``.
    """
    fs = [RatFunc.coerce(f) for f in fs]
    coords = [atom_coordinates(f) for f in fs]
    keys = sorted({k for c in coords for k in c}, key=atom_sort_key)
    span = EchelonSpan(len(keys))
    vectors = [[c.get(k, _F0) for k in keys] for c in coords]
    for v in vectors:
        span.add(v)
    order = sorted(range(len(span.rows)), key=lambda i: span.pivots[i])
    rows = [span.rows[i] for i in order]
    pivots = [span.pivots[i] for i in order]
    basis = []
    for row in rows:
        acc = ZERO
        for k, c in zip(keys, row):
            if c:
                acc = acc + atom_value(k) * c
        basis.append(acc)
    out_coords = [[v[p] for p in pivots] for v in vectors]
    return basis, out_coords


def expand_in_basis(basis: Sequence[RatFunc], coords: Sequence) -> RatFunc:
    acc = ZERO
    for b, c in zip(basis, coords):
        if c:
            acc = acc + b * c
    return acc


# ---------------------------------------------------------------------------
# printing


def _fmt_q(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_poly(p: Poly, var: str = "x") -> str:
    if not p:
        return "0"
    parts = []
    for i in range(p.degree, -1, -1):
        c = p.coeffs[i]
        if not c:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if i == 0:
            body = _fmt_q(mag)
        else:
            mono = var if i == 1 else f"{var}^{i}"
            body = mono if mag == 1 else f"{_fmt_q(mag)}*{mono}"
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def format_ratfunc(f: RatFunc, var: str = "x") -> str:
    """Canonical expanded ``num/den`` text; parses back to the same value."""
    num = format_poly(f.num, var)
    if f.den.degree == 0:
        return num
    den = format_poly(f.den, var)
    if f.num.degree > 0 and len([c for c in f.num.coeffs if c]) > 1:
        num = f"({num})"
    elif f.num.lc < 0 and f.num.degree > 0:
        num = f"({num})"
    if len([c for c in f.den.coeffs if c]) > 1:
        den = f"({den})"
    return f"{num}/{den}"
