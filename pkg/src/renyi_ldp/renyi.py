"""The Renyi map ``T(x) = 1/(1-x) - floor(1/(1-x))`` on ``[0, 1)``.

Digit ``p`` labels the Markov interval ``J_p = [1 - 1/p, 1 - 1/(p+1))``.
The inverse branch of ``T`` on ``J_p`` is ``g_p(y) = (y + p - 1)/(y + p)``,
i.e. the matrix ``[[1, p-1], [1, p]]``.  For a word ``w`` with branch
product ``[[a, b], [c, d]]`` the cylinder is ``[b/d, (a+b)/(c+d))`` and
``|(T^n)'(x)| = (c y + d)^2`` at ``x = M(y)``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Union

import mpmath
import numpy as np

from .errors import DomainError
from .shift import DEFAULT_BUDGET, Word, as_word, cf_digit, check_budget
from .surd import IntMatrix2, QuadraticSurd, cocycle_derivative, fixed_point_in_unit_interval

Exact = Union[Fraction, QuadraticSurd]

#: lower bound for |T'| away from the neutral interval J_1
EXPANSION_OFF_NEUTRAL = 4


def _check_unit(xi) -> None:
    if not (0 <= xi < 1):
        raise DomainError(f"{xi} is outside [0, 1)")


def apply_T(xi):
    """One step of the map.  Exact for ints, Fractions and surds."""
    if isinstance(xi, int):
        xi = Fraction(xi)
    _check_unit(xi)
    if isinstance(xi, (Fraction, QuadraticSurd)):
        y = 1 / (1 - xi)
        return y - math.floor(y)
    y = 1 / (1 - xi)
    return y - math.floor(y)


def digit_of(xi) -> int:
    """Partition index ``p`` with ``xi`` in ``J_p``; the CF digit is ``p + 1``."""
    if isinstance(xi, int):
        xi = Fraction(xi)
    _check_unit(xi)
    return math.floor(1 / (1 - xi))


def derivative(xi) -> float:
    """``|T'(xi)| = 1/(1 - xi)^2`` (one-sided at partition endpoints)."""
    _check_unit(xi)
    return 1.0 / (1.0 - float(xi)) ** 2


def branch_matrix(p: int) -> IntMatrix2:
    if p < 1:
        raise DomainError(f"digit must be >= 1, got {p}")
    return IntMatrix2(1, p - 1, 1, p)


def word_matrix(w: Sequence[int] | str) -> IntMatrix2:
    """Product ``M_{p_1} M_{p_2} ... M_{p_n}``, the inverse branch of ``T^n`` on ``[w]``."""
    M = IntMatrix2.identity()
    for p in as_word(w):
        # right-multiplying by [[1, p-1], [1, p]]
        M = IntMatrix2(M.a + M.b, M.a * (p - 1) + M.b * p, M.c + M.d, M.c * (p - 1) + M.d * p)
    return M


@dataclass(frozen=True)
class Interval:
    """Half-open interval ``[lo, hi)`` with exact endpoints."""

    lo: Exact
    hi: Exact

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise DomainError(f"empty interval [{self.lo}, {self.hi})")

    @property
    def length(self) -> Exact:
        return self.hi - self.lo

    def __contains__(self, x) -> bool:
        return self.lo <= x < self.hi

    def overlaps(self, other: "Interval") -> bool:
        return self.lo < other.hi and other.lo < self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def as_floats(self) -> tuple[float, float]:
        return float(self.lo), float(self.hi)


def partition_interval(p: int) -> Interval:
    if p < 1:
        raise DomainError(f"digit must be >= 1, got {p}")
    return Interval(1 - Fraction(1, p), 1 - Fraction(1, p + 1))


def matrix_interval(M: IntMatrix2) -> Interval:
    """``[M(0), M(1))`` for a unit-determinant branch product."""
    return Interval(Fraction(M.b, M.d), Fraction(M.a + M.b, M.c + M.d))


def cylinder_interval(w: Sequence[int] | str) -> Interval:
    return matrix_interval(word_matrix(w))


@dataclass(frozen=True)
class GeometricPotential:
    """``beta * phi`` with ``phi = -log|T'|``."""

    beta: float

    @property
    def finite_pressure(self) -> bool:
        return self.beta > 0.5

    def exp_value(self, xi: float) -> float:
        return (1.0 - xi) ** (2 * self.beta)


def potential_bounds(phi: GeometricPotential | float, w: Sequence[int] | str) -> tuple[float, float]:
    """``(inf, sup)`` of ``exp S_n beta*phi`` over the cylinder ``[w]``.

    ``exp S_n phi(M(y)) = (c y + d)^(-2)``, so the sup sits at ``y = 0`` and
    the inf at ``y -> 1``.
    """
    beta = phi.beta if isinstance(phi, GeometricPotential) else float(phi)
    M = word_matrix(w)
    return _int_power(M.c + M.d, -2.0 * beta), _int_power(M.d, -2.0 * beta)


def _int_power(x: int, s: float) -> float:
    try:
        return float(x) ** s
    except OverflowError:
        return math.exp(s * math.log(x))


@dataclass(frozen=True)
class PeriodicPoint:
    word: Word
    matrix: IntMatrix2
    xi: QuadraticSurd
    #: ``|(T^n)'(xi)|``
    derivative: mpmath.mpf

    def weight(self, beta: float) -> mpmath.mpf:
        return self.derivative ** (-beta)

    def orbit(self, prec: int = 64) -> list[mpmath.mpf]:
        """The ``n`` orbit points ``T^k xi`` evaluated in floating point."""
        n = len(self.word)
        pts = [self.xi]
        for _ in range(n - 1):
            pts.append(apply_T(pts[-1]))
        return [x.to_mpf(prec) for x in pts]


def periodic_point(w: Sequence[int] | str, prec: int = 64) -> PeriodicPoint:
    """The point of period ``len(w)`` whose digit sequence repeats *w*."""
    word = as_word(w)
    M = word_matrix(word)
    xi = fixed_point_in_unit_interval(M)
    return PeriodicPoint(word, M, xi, cocycle_derivative(M, xi, prec))


class RefMeasure(enum.Enum):
    """Normalised reference measures on ``[1/2, 1)``."""

    LEBESGUE_ON_HALF = "lebesgue_on_half"
    LOG_DENSITY_ON_HALF = "log_density_on_half"

    @classmethod
    def parse(cls, name: "str | RefMeasure") -> "RefMeasure":
        if isinstance(name, cls):
            return name
        aliases = {"lebesgue": cls.LEBESGUE_ON_HALF, "log": cls.LOG_DENSITY_ON_HALF, "log_density": cls.LOG_DENSITY_ON_HALF}
        try:
            return aliases.get(name) or cls(name)
        except ValueError:
            raise DomainError(f"unknown reference measure {name!r}") from None

    def mass_float(self, lo: float, hi: float) -> float:
        """Float version of :func:`ref_measure_mass`, no domain checks."""
        if self is RefMeasure.LEBESGUE_ON_HALF:
            return 2.0 * (hi - lo)
        return math.log(hi / lo) / math.log(2.0)

    def cdf(self, x):
        """Distribution function on ``[1/2, 1)``; works on arrays."""
        x = np.clip(x, 0.5, 1.0)
        if self is RefMeasure.LEBESGUE_ON_HALF:
            return 2.0 * x - 1.0
        return np.log(2.0 * x) / math.log(2.0)


def ref_measure_mass(m: RefMeasure | str, I: Interval) -> float:
    m = RefMeasure.parse(m)
    if I.lo < Fraction(1, 2) or I.hi > 1:
        raise DomainError(f"[{I.lo}, {I.hi}) is not inside [1/2, 1)")
    if m is RefMeasure.LEBESGUE_ON_HALF:
        return float(2 * I.length)
    lo, hi = I.lo, I.hi
    if isinstance(lo, Fraction) and isinstance(hi, Fraction):
        ratio = hi / lo
        return math.log1p(float(ratio - 1)) / math.log(2.0)
    return math.log(float(hi) / float(lo)) / math.log(2.0)


# Vectorised tables over all words of a given length -----------------------


def fixed_points_float(a, b, c, d) -> np.ndarray:
    """Fixed points in ``[0, 1)`` of branch products given entrywise.

    Uses whichever root formula avoids cancellation.
    """
    a, b, c, d = (np.asarray(x, dtype=float) for x in (a, b, c, d))
    B = d - a
    root = np.sqrt(B * B + 4.0 * b * c)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = np.where(B >= 0, 2.0 * b / (B + root), (root - B) / (2.0 * c))
    return np.where(b == 0, 0.0, xi)


@dataclass
class WordTable:
    """Branch products of every word of length ``n`` with digits ``<= max_digit``.

    Rows are in lexicographic word order.  Entries are int64 while they fit
    and float64 otherwise.
    """

    n: int
    max_digit: int
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __len__(self) -> int:
        return len(self.a)

    def digits(self) -> np.ndarray:
        """``(len, n)`` array of digits."""
        idx = np.arange(len(self))
        out = np.empty((len(self), self.n), dtype=np.int64)
        for k in range(self.n - 1, -1, -1):
            out[:, k] = idx % self.max_digit + 1
            idx = idx // self.max_digit
        return out

    def fixed_points(self) -> np.ndarray:
        """Periodic points in float64."""
        return fixed_points_float(self.a, self.b, self.c, self.d)

    def log_derivatives(self) -> np.ndarray:
        """``log |(T^n)'(xi)| = 2 log(c xi + d)`` at the periodic points."""
        xi = self.fixed_points()
        return 2.0 * np.log(self.c.astype(float) * xi + self.d.astype(float))

    def log_sup(self, beta: float) -> np.ndarray:
        """``log sup exp S_n beta*phi`` on each cylinder."""
        return -2.0 * beta * np.log(self.d.astype(float))

    def log_inf(self, beta: float) -> np.ndarray:
        return -2.0 * beta * np.log(self.c.astype(float) + self.d.astype(float))

    def rotation_index(self) -> np.ndarray:
        """Row of the word shifted left by one digit (``w[1:] + w[:1]``)."""
        N = self.max_digit
        idx = np.arange(len(self))
        head = N ** (self.n - 1)
        return (idx % head) * N + idx // head

    def orbits(self) -> np.ndarray:
        """``(len, n)`` array of orbit points ``T^k xi`` for each word."""
        xi = self.fixed_points()
        rot = self.rotation_index()
        out = np.empty((len(self), self.n))
        cur = np.arange(len(self))
        for k in range(self.n):
            out[:, k] = xi[cur]
            cur = rot[cur]
        return out


def word_table(n: int, max_digit: int, budget: int | None = DEFAULT_BUDGET) -> WordTable:
    if n < 1 or max_digit < 1:
        raise DomainError("need n >= 1 and max_digit >= 1")
    check_budget(max_digit**n, budget)
    # entries are bounded by (max_digit + 1)^n
    dtype = np.int64 if n * math.log2(max_digit + 1) < 62 else np.float64
    p = np.arange(1, max_digit + 1, dtype=dtype)
    a = np.ones(1, dtype=dtype)
    b = np.zeros(1, dtype=dtype)
    c = np.zeros(1, dtype=dtype)
    d = np.ones(1, dtype=dtype)
    for _ in range(n):
        A, B, C, D = a[:, None], b[:, None], c[:, None], d[:, None]
        a = np.broadcast_to(A + B, (len(A), max_digit)).ravel()
        b = (A * (p - 1) + B * p).ravel()
        c = np.broadcast_to(C + D, (len(C), max_digit)).ravel()
        d = (C * (p - 1) + D * p).ravel()
    return WordTable(n, max_digit, a, b, c, d)


def iter_word_tables(n: int, max_digit: int, chunk: int = 1 << 20, budget: int | None = DEFAULT_BUDGET) -> Iterator[tuple[int, WordTable]]:
    """Yield ``(start_row, table)`` blocks that together make up ``word_table(n, max_digit)``.

    Each block shares a fixed digit prefix, so peak memory stays near
    *chunk* rows however large ``max_digit**n`` is.
    """
    if n < 1 or max_digit < 1:
        raise DomainError("need n >= 1 and max_digit >= 1")
    check_budget(max_digit**n, budget)
    k = 0
    while k < n - 1 and max_digit ** (n - k) > chunk:
        k += 1
    suffix = word_table(n - k, max_digit, None)
    dtype = np.int64 if n * math.log2(max_digit + 1) < 62 else np.float64
    sa, sb, sc, sd = (x.astype(dtype) for x in (suffix.a, suffix.b, suffix.c, suffix.d))
    size = len(suffix)
    for j, prefix in enumerate(itertools.product(range(1, max_digit + 1), repeat=k)):
        P = word_matrix(prefix) if k else IntMatrix2.identity()
        pa, pb, pc, pd = (dtype(v) if dtype is np.int64 else float(v) for v in (P.a, P.b, P.c, P.d))
        yield j * size, WordTable(n, max_digit, pa * sa + pb * sc, pa * sb + pb * sd, pc * sa + pd * sc, pc * sb + pd * sd)


def cf_digits(w: Sequence[int] | str) -> Word:
    """Display conversion to continued-fraction digits ``d = p + 1``."""
    return tuple(cf_digit(p) for p in as_word(w))
