"""Exact integer Moebius matrices and quadratic irrationals.

Values have the form ``(p + q*sqrt(D)) / r`` with arbitrary-precision ints.
Rationals are the special case ``q = 0, D = 0``.  All comparisons, floors
and equality tests are exact; floating point (via :mod:`mpmath`) is used
only when a value is rendered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import mpmath

from .errors import DomainError, SingularityError

#: trial division stops here; beyond it square-freeness is not guaranteed
TRIAL_DIVISION_LIMIT = 10**6


@lru_cache(maxsize=8)
def _primes_up_to(n: int) -> tuple[int, ...]:
    sieve = bytearray([1]) * (n + 1)
    sieve[:2] = b"\x00\x00"
    for k in range(2, math.isqrt(n) + 1):
        if sieve[k]:
            sieve[k * k :: k] = bytearray(len(range(k * k, n + 1, k)))
    return tuple(k for k in range(n + 1) if sieve[k])


def squarefree_split(n: int) -> tuple[int, int]:
    """Return ``(f, D)`` with ``n = f**2 * D`` and ``D`` square-free.

    Trial division runs until the cofactor is below the cube of the current
    prime; it then has at most two prime factors and is square-free unless
    it is a perfect square.
    The search is capped at :data:`TRIAL_DIVISION_LIMIT`, so for cofactors
    above that limit cubed a hidden square factor may survive.  Arithmetic
    stays exact in that case; only the canonical form is weaker.
    """
    if n < 0:
        raise DomainError("squarefree_split needs n >= 0")
    if n < 2:
        return 1, n
    f, D, rest = 1, 1, n
    for prime in _primes_up_to(TRIAL_DIVISION_LIMIT):
        if prime * prime > rest:
            break
        e = 0
        while rest % prime == 0:
            rest //= prime
            e += 1
        f *= prime ** (e // 2)
        if e % 2:
            D *= prime
        # every remaining factor exceeds prime, so rest has at most two of them
        if prime**3 > rest:
            break
    s = math.isqrt(rest)
    if s * s == rest:
        return f * s, D
    return f, D * rest


def _sign_of(x: int, y: int, D: int) -> int:
    """Exact sign of ``x + y*sqrt(D)``."""
    if y == 0 or D == 0:
        return (x > 0) - (x < 0)
    if x >= 0 and y >= 0:
        return 1 if (x or y) else 0
    if x <= 0 and y <= 0:
        return -1
    lhs, rhs = x * x, y * y * D
    if lhs == rhs:
        return 0
    # the term with larger square wins
    if lhs > rhs:
        return 1 if x > 0 else -1
    return 1 if y > 0 else -1


Rational = Union[int, Fraction]


@dataclass(frozen=True, eq=False)
class QuadraticSurd:
    """The number ``(p + q*sqrt(D)) / r`` in canonical form."""

    p: int
    q: int
    D: int
    r: int

    @classmethod
    def make(cls, p: int, q: int, D: int, r: int, reduced: bool = False) -> "QuadraticSurd":
        """Canonicalise; ``reduced=True`` asserts *D* is already square-free."""
        if r == 0:
            raise SingularityError("zero denominator")
        if D < 0:
            raise DomainError("negative radicand")
        if q == 0 or D == 0:
            q, D = 0, 0
        elif not reduced:
            f, D = squarefree_split(D)
            q *= f
            if D == 1:
                p, q, D = p + q, 0, 0
        if r < 0:
            p, q, r = -p, -q, -r
        g = math.gcd(math.gcd(p, q), r)
        if g > 1:
            p, q, r = p // g, q // g, r // g
        return cls(p, q, D, r)

    @classmethod
    def rational(cls, x: Rational) -> "QuadraticSurd":
        x = Fraction(x)
        return cls.make(x.numerator, 0, 0, x.denominator)

    @property
    def is_rational(self) -> bool:
        return self.q == 0

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise DomainError(f"{self} is irrational")
        return Fraction(self.p, self.r)

    # exact arithmetic -------------------------------------------------

    def _common_D(self, other: "QuadraticSurd") -> int:
        if self.D and other.D and self.D != other.D:
            raise DomainError(f"radicands {self.D} and {other.D} differ")
        return self.D or other.D

    def __add__(self, other: object) -> "QuadraticSurd":
        other = _coerce(other)
        D = self._common_D(other)
        return QuadraticSurd.make(
            self.p * other.r + other.p * self.r, self.q * other.r + other.q * self.r, D, self.r * other.r, True
        )

    __radd__ = __add__

    def __neg__(self) -> "QuadraticSurd":
        return QuadraticSurd(-self.p, -self.q, self.D, self.r)

    def __sub__(self, other: object) -> "QuadraticSurd":
        return self + (-_coerce(other))

    def __rsub__(self, other: object) -> "QuadraticSurd":
        return _coerce(other) - self

    def __mul__(self, other: object) -> "QuadraticSurd":
        other = _coerce(other)
        D = self._common_D(other)
        p = self.p * other.p + self.q * other.q * D
        q = self.p * other.q + self.q * other.p
        return QuadraticSurd.make(p, q, D, self.r * other.r, True)

    __rmul__ = __mul__

    def reciprocal(self) -> "QuadraticSurd":
        # multiply by the conjugate
        norm = self.p * self.p - self.q * self.q * self.D
        if norm == 0:
            raise SingularityError("division by zero")
        return QuadraticSurd.make(self.r * self.p, -self.r * self.q, self.D, norm, True)

    def __truediv__(self, other: object) -> "QuadraticSurd":
        return self * _coerce(other).reciprocal()

    def __rtruediv__(self, other: object) -> "QuadraticSurd":
        return _coerce(other) * self.reciprocal()

    # exact comparison ---------------------------------------------------

    def sign(self) -> int:
        return _sign_of(self.p, self.q, self.D)

    def _cmp(self, other: object) -> int:
        return (self - _coerce(other)).sign()

    def __lt__(self, other: object) -> bool:
        return self._cmp(other) < 0

    def __le__(self, other: object) -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other: object) -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other: object) -> bool:
        return self._cmp(other) >= 0

    def __eq__(self, other: object) -> bool:
        try:
            o = _coerce(other)
        except TypeError:
            return NotImplemented
        # exact for any radicands, canonical or not
        if self.p * o.r != o.p * self.r:
            return False
        if (self.q > 0) - (self.q < 0) != (o.q > 0) - (o.q < 0):
            return False
        return self.q * self.q * self.D * o.r * o.r == o.q * o.q * o.D * self.r * self.r

    def __hash__(self) -> int:
        return hash((self.p, self.q, self.D, self.r))

    def floor(self) -> int:
        """Exact ``floor`` of the value."""
        if self.is_rational:
            return self.p // self.r
        k = math.floor(self.to_mpf(64))
        # the float guess is off by at most one either way
        while self < k:
            k -= 1
        while self >= k + 1:
            k += 1
        return k

    def __floor__(self) -> int:
        return self.floor()

    # rendering ----------------------------------------------------------

    def to_mpf(self, prec: int = 64) -> mpmath.mpf:
        """Evaluate with *prec* bits, avoiding cancellation via the conjugate."""
        with mpmath.workprec(prec + 16):
            if self.is_rational:
                v = mpmath.mpf(self.p) / self.r
            else:
                s = self.q * mpmath.sqrt(self.D)
                if (self.p > 0) != (self.q > 0) and self.p != 0:
                    # p and q*sqrt(D) nearly cancel: use (p^2 - q^2 D)/(p - q sqrt D)
                    v = mpmath.mpf(self.p * self.p - self.q * self.q * self.D) / ((self.p - s) * self.r)
                else:
                    v = (self.p + s) / self.r
        with mpmath.workprec(prec):
            return +v

    def __float__(self) -> float:
        return float(self.to_mpf(64))

    def decimal(self, digits: int = 30) -> str:
        prec = int(digits * 3.33) + 16
        return mpmath.nstr(self.to_mpf(prec), digits, strip_zeros=False)

    def __str__(self) -> str:
        if self.is_rational:
            return f"{self.p}/{self.r}" if self.r != 1 else str(self.p)
        return f"({self.p}{self.q:+d}*sqrt({self.D}))/{self.r}"

    def __repr__(self) -> str:
        return f"QuadraticSurd({self})"


def _coerce(x: object) -> QuadraticSurd:
    if isinstance(x, QuadraticSurd):
        return x
    if isinstance(x, (int, Fraction)):
        return QuadraticSurd.rational(x)
    raise TypeError(f"cannot use {type(x).__name__} as an exact value")


@dataclass(frozen=True)
class IntMatrix2:
    """Integer matrix ``[[a, b], [c, d]]`` acting by ``x -> (a x + b)/(c x + d)``."""

    a: int
    b: int
    c: int
    d: int

    @classmethod
    def identity(cls) -> "IntMatrix2":
        return cls(1, 0, 0, 1)

    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "IntMatrix2") -> "IntMatrix2":
        return IntMatrix2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def rows(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return (self.a, self.b), (self.c, self.d)

    def __call__(self, v):
        return moebius_apply(self, v)


def moebius_apply(M: IntMatrix2, v):
    """Exact ``(a v + b)/(c v + d)`` for a surd or rational *v*.

    Floats and mpf values are accepted too and evaluated in floating point.
    """
    if isinstance(v, (int, Fraction)):
        den = M.c * Fraction(v) + M.d
        if den == 0:
            raise SingularityError(f"pole of {M} at {v}")
        return (M.a * Fraction(v) + M.b) / den
    if isinstance(v, QuadraticSurd):
        den = v * M.c + M.d
        if den.sign() == 0:
            raise SingularityError(f"pole of {M} at {v}")
        return (v * M.a + M.b) / den
    den = M.c * v + M.d
    if den == 0:
        raise SingularityError(f"pole of {M} at {v}")
    return (M.a * v + M.b) / den


def fixed_point_in_unit_interval(M: IntMatrix2) -> QuadraticSurd:
    """The unique fixed point of *M* in ``[0, 1)``.

    Solves ``c x^2 + (d - a) x - b = 0`` exactly and returns the root
    lying in ``[0, 1)``.
    """
    a, b, c, d = M.a, M.b, M.c, M.d
    if c == 0:
        if d == a:
            raise DomainError(f"{M} fixes every point")
        root = QuadraticSurd.rational(Fraction(b, d - a))
        if 0 <= root < 1:
            return root
        raise DomainError(f"{M} has no fixed point in [0, 1)")
    disc = (d - a) ** 2 + 4 * b * c
    if disc < 0:
        raise DomainError(f"{M} has no real fixed point")
    plus = QuadraticSurd.make(a - d, 1, disc, 2 * c)
    minus = QuadraticSurd.make(a - d, -1, disc, 2 * c)
    inside = [x for x in (plus, minus) if 0 <= x < 1]
    if not inside:
        raise DomainError(f"{M} has no fixed point in [0, 1)")
    if len(inside) == 2 and inside[0] != inside[1]:
        raise RuntimeError(f"{M} has two fixed points in [0, 1); not a branch product")
    return inside[0]


def quadratic_residual(M: IntMatrix2, xi: QuadraticSurd) -> QuadraticSurd:
    """Exact value of ``c xi^2 + (d - a) xi - b``; zero at a fixed point."""
    return xi * xi * M.c + xi * (M.d - M.a) - M.b


def cocycle_derivative(M: IntMatrix2, xi: QuadraticSurd | Fraction | int, prec: int = 64) -> mpmath.mpf:
    """``(c xi + d)^2``, the expansion of the forward map along the branch of *M*.

    Computed exactly as a surd and rendered with *prec* bits.
    """
    val = _coerce(xi) * M.c + M.d
    sq = val * val
    return sq.to_mpf(prec)
