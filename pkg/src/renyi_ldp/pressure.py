"""Partition functions, pressure brackets and block-Bernoulli measures.

Everything here works with ``beta * phi`` where ``phi = -log|T'|``.  On a
cylinder with branch product ``[[a, b], [c, d]]`` the Birkhoff weight
``exp S_n beta*phi`` lies between ``(c + d)^(-2 beta)`` and ``d^(-2 beta)``;
these endpoint values drive all enclosures below.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .errors import DomainError
from .renyi import GeometricPotential, fixed_points_float, periodic_point, word_matrix, word_table
from .shift import DEFAULT_BUDGET, Word, as_word


def _beta(phi: GeometricPotential | float) -> float:
    return phi.beta if isinstance(phi, GeometricPotential) else float(phi)


def fsum(x: np.ndarray | Iterable[float]) -> float:
    """Correctly rounded sum; order independent, hence reproducible."""
    return math.fsum(np.asarray(x, dtype=float).ravel().tolist())


def birkhoff_sum(phi: GeometricPotential | float, w: Sequence[int] | str) -> float:
    """``S_n beta*phi`` at the periodic point coding *w*."""
    pt = periodic_point(w)
    return -_beta(phi) * float(mpmath.log(pt.derivative))


def distortion_modulus(phi: GeometricPotential | float, n: int, max_digit: int, budget: int | None = DEFAULT_BUDGET) -> float:
    """``max_w (log sup - log inf)`` of ``exp S_n beta*phi`` over cylinders of
    length *n* with digits up to *max_digit*."""
    beta = _beta(phi)
    if beta == 0:
        return 0.0
    t = word_table(n, max_digit, budget)
    c, d = t.c.astype(float), t.d.astype(float)
    return float(np.max(2.0 * abs(beta) * np.log1p(c / d)))


def zeta_tail_bound(s: float, M: int) -> float:
    """Upper bound on ``sum_{p > M} p^(-s)``: ``M^(1-s)/(s-1)``, infinite for ``s <= 1``."""
    if s <= 1:
        return math.inf
    return M ** (1.0 - s) / (s - 1.0)


def power_sum(s: float, M: int) -> float:
    """``sum_{p=1}^{M} p^(-s)``."""
    return fsum(np.arange(1, M + 1, dtype=float) ** (-s))


def word_tail_bound(beta: float, n: int, max_digit: int) -> float:
    """Bound on the weight of length-*n* words that use some digit above *max_digit*.

    Union over the position of the first large digit:
    ``n * T * (S + T)^(n-1)`` with ``S = sum_{p<=M} p^(-2 beta)`` and ``T``
    the tail of the same series.
    """
    T = zeta_tail_bound(2.0 * beta, max_digit)
    if math.isinf(T):
        return math.inf
    S = power_sum(2.0 * beta, max_digit)
    return n * T * (S + T) ** (n - 1)


@dataclass(frozen=True)
class PartitionSum:
    """Enclosure ``lower <= Z_n(beta*phi) <= upper``."""

    n: int
    beta: float
    max_digit: int
    lower: float
    upper: float
    tail: float

    @property
    def divergent(self) -> bool:
        return math.isinf(self.tail)


def partition_sum(phi: GeometricPotential | float, n: int, max_digit: int, budget: int | None = DEFAULT_BUDGET) -> PartitionSum:
    """Sum of ``|(T^n)'(xi)|^(-beta)`` over periodic points of the truncated words.

    The tail is infinite (and flagged) for ``beta <= 1/2``.
    """
    beta = _beta(phi)
    t = word_table(n, max_digit, budget)
    lower = fsum(np.exp(-beta * t.log_derivatives()))
    tail = word_tail_bound(beta, n, max_digit)
    return PartitionSum(n, beta, max_digit, lower, lower + tail, tail)


@dataclass(frozen=True)
class PressureBracket:
    """``lo <= P <= hi`` for a pressure estimated at level *n*."""

    n: int
    lo: float
    hi: float
    tail: float = 0.0
    Dn: float = math.nan
    Zn_lower: float = math.nan

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def divergent(self) -> bool:
        return math.isinf(self.hi)

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def overlaps(self, other: "PressureBracket", slack: float = 0.0) -> bool:
        return self.lo <= other.hi + slack and other.lo <= self.hi + slack


def pressure_bracket(phi: GeometricPotential | float, n: int, max_digit: int, budget: int | None = DEFAULT_BUDGET) -> PressureBracket:
    """Bracket ``[(1/n) log sum inf, (1/n) log(sum sup + tail)]`` for ``P(beta*phi)``.

    The lower end uses super-multiplicativity of the inf-sums, the upper
    end sub-multiplicativity of the sup-sums plus the certified tail.  For
    ``beta <= 1/2`` the tail diverges and ``hi`` is ``inf``.
    """
    beta = _beta(phi)
    t = word_table(n, max_digit, budget)
    sup_sum = fsum(np.exp(t.log_sup(beta)))
    inf_sum = fsum(np.exp(t.log_inf(beta)))
    tail = word_tail_bound(beta, n, max_digit)
    hi = math.log(sup_sum + tail) / n if not math.isinf(tail) else math.inf
    lo = math.log(inf_sum) / n
    Dn = float(np.max(t.log_sup(beta) - t.log_inf(beta)))
    Zn = fsum(np.exp(-beta * t.log_derivatives()))
    return PressureBracket(n, lo, hi, tail, Dn, Zn)


# Block-Bernoulli measures ----------------------------------------------------


@dataclass
class BlockMeasureStats:
    """A Bernoulli measure on ``n``-blocks and its thermodynamic data.

    ``mean_potential`` is a certified lower bound of ``int beta*phi``;
    ``mean_potential_upper`` is the matching upper bound.  ``F_value`` uses
    the lower bound.
    """

    n: int
    words: list[Word]
    probabilities: np.ndarray
    entropy_rate: float
    mean_potential: float
    mean_potential_upper: float
    P_ref: float
    log_sup_sum: float
    #: max of log sup - log inf over the words in the set
    distortion: float

    @property
    def F_value(self) -> float:
        return self.entropy_rate + self.mean_potential - self.P_ref

    @property
    def free_energy(self) -> float:
        """``h + int beta*phi`` (lower bound)."""
        return self.entropy_rate + self.mean_potential


@dataclass
class _Blocks:
    words: list[Word]
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    @classmethod
    def of(cls, words: Iterable[Sequence[int]]) -> "_Blocks":
        ws = [as_word(w) for w in words]
        if not ws:
            raise DomainError("the word set is empty")
        if len({len(w) for w in ws}) != 1:
            raise DomainError("all words must share one length")
        if len(set(ws)) != len(ws):
            raise DomainError("the word set has duplicates")
        mats = [word_matrix(w) for w in ws]
        arr = lambda k: np.array([float(getattr(M, k)) for M in mats])
        return cls(ws, arr("a"), arr("b"), arr("c"), arr("d"))

    def fixed_points(self) -> np.ndarray:
        return fixed_points_float(self.a, self.b, self.c, self.d)


def _mean_log_bracket(blocks: _Blocks, q: np.ndarray, beta: float, max_leaves: int = 256, tol: float = 1e-10) -> tuple[float, float]:
    """Enclose ``E[S_n beta*phi]`` under the Bernoulli block measure.

    For ``x`` in ``[w]`` write ``x = M_w(y)``; then ``S_n beta*phi(x) =
    -2 beta log(c_w y + d_w)`` and ``y`` follows the stationary law ``nu``
    of the iterated function system ``{M_w}`` with weights ``q``.  That law
    lives on the hull ``[min fix, max fix]``.  A leaf ``(pr, M_u)`` stands
    for ``pr * (M_u)_* nu``; splitting it into ``pr q_w (M_u M_w)_* nu``
    shrinks its support, and splitting the widest leaves first tightens
    the enclosure.
    """
    if beta == 0:
        return 0.0, 0.0
    a, b, c, d = blocks.a, blocks.b, blocks.c, blocks.d

    def F(y: np.ndarray) -> np.ndarray:
        return -2.0 * beta * (np.log(np.outer(y, c) + d) @ q)

    fix = blocks.fixed_points()
    y0, y1 = float(fix.min()), float(fix.max())
    lo_tot = hi_tot = 0.0
    heap: list[tuple[float, int, float, float, float, tuple[float, float, float, float]]] = []
    counter = 0

    def push(prob: np.ndarray, P: tuple[np.ndarray, ...]) -> None:
        nonlocal lo_tot, hi_tot, counter
        pa, pb, pc, pd = P
        lo = (pa * y0 + pb) / (pc * y0 + pd)
        hi = (pa * y1 + pb) / (pc * y1 + pd)
        Fl, Fh = F(lo), F(hi)
        vmin, vmax = np.minimum(Fl, Fh), np.maximum(Fl, Fh)
        lo_tot += float(prob @ vmin)
        hi_tot += float(prob @ vmax)
        for k, g in enumerate(prob * (vmax - vmin)):
            if g > 0:
                counter += 1
                node = (float(pa[k]), float(pb[k]), float(pc[k]), float(pd[k]))
                heapq.heappush(heap, (-float(g), counter, float(prob[k]), float(vmin[k]), float(vmax[k]), node))

    one = np.ones(1)
    push(one, (one, 0 * one, 0 * one, one))
    leaves = 0
    while heap and leaves < max_leaves and hi_tot - lo_tot > tol:
        _, _, pr, vmin, vmax, (pa, pb, pc, pd) = heapq.heappop(heap)
        lo_tot -= pr * vmin
        hi_tot -= pr * vmax
        # children M_u M_w, entrywise over the block set
        push(pr * q, (pa * a + pb * c, pa * b + pb * d, pc * a + pd * c, pc * b + pd * d))
        leaves += 1
    return lo_tot, hi_tot


def block_bernoulli(
    phi: GeometricPotential | float,
    words: Iterable[Sequence[int]],
    P_ref: float = 0.0,
    tilt: np.ndarray | None = None,
    max_leaves: int = 256,
) -> BlockMeasureStats:
    """Bernoulli measure on the block set with ``q(w)`` proportional to
    ``sup_[w] exp S_n beta*phi`` (times ``exp(tilt_w)`` when given).

    The returned stats satisfy ``n (h + int beta*phi) >= log sum sup - D``
    where ``D`` is the distortion over the set.
    """
    beta = _beta(phi)
    blocks = _Blocks.of(words)
    n = len(blocks.words[0])
    log_sup = -2.0 * beta * np.log(blocks.d)
    log_inf = -2.0 * beta * np.log(blocks.c + blocks.d)
    logw = log_sup + (0.0 if tilt is None else np.asarray(tilt, dtype=float))
    m = float(logw.max())
    w = np.exp(logw - m)
    Z = fsum(w)
    q = w / Z
    nz = q > 0
    entropy = max(0.0, -fsum(q[nz] * np.log(q[nz])) / n)
    lo, hi = _mean_log_bracket(blocks, q, beta, max_leaves=max_leaves)
    # the crude cylinder bounds are always valid too
    lo = max(lo, fsum(q * log_inf))
    hi = min(hi, fsum(q * log_sup))
    ls = float(np.log(fsum(np.exp(log_sup - log_sup.max())))) + float(log_sup.max())
    return BlockMeasureStats(
        n=n,
        words=blocks.words,
        probabilities=q,
        entropy_rate=entropy,
        mean_potential=lo / n,
        mean_potential_upper=hi / n,
        P_ref=P_ref,
        log_sup_sum=ls,
        distortion=float(np.max(log_sup - log_inf)),
    )
