"""Weighted periodic-orbit ensembles and the objects built on them.

An ensemble at period ``n`` puts weight ``|(T^n)'(xi)|^(-beta)`` on the
periodic point of every word in ``{1..M}^n``.  Its empirical measure
``V_n`` spreads mass ``1/n`` over the orbit of ``xi``.  Because cyclic
rotations of a word index the orbit points and carry the same weight,
orbit functionals are evaluated by gathering through the rotation index
instead of storing an ``(entries, n)`` array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import mpmath
import numpy as np

from .errors import DomainError
from .inducing import Histogram1D
from .pressure import BlockMeasureStats, PartitionSum, block_bernoulli, fsum, word_tail_bound
from .renyi import RefMeasure, iter_word_tables
from .shift import DEFAULT_BUDGET, Word, as_word, check_budget, enumerate_words

Func = Callable[[np.ndarray], np.ndarray]


def _apply(f: Func, x: np.ndarray) -> np.ndarray:
    """Evaluate *f* on an array, falling back to elementwise calls."""
    try:
        y = np.asarray(f(x), dtype=float)
        if y.shape == x.shape:
            return y
        if y.ndim == 0:
            return np.full(x.shape, float(y))
    except (TypeError, ValueError):
        pass
    return np.array([float(f(v)) for v in x.tolist()], dtype=float)


# Ensembles -----------------------------------------------------------------


@dataclass
class EnsembleEntry:
    word: Word
    weight: float
    #: the ``n`` orbit points, each carrying mass ``1/n`` in ``V_n``
    orbit: np.ndarray


@dataclass
class Ensemble:
    """Periodic points of period ``n`` with digits ``<= max_digit``.

    ``xi`` and ``log_weight`` are in lexicographic word order.
    ``log_weight`` is ``-beta log|(T^n)'(xi)|``.
    """

    beta: float
    n: int
    max_digit: int
    xi: np.ndarray
    log_weight: np.ndarray
    Z: PartitionSum

    def __len__(self) -> int:
        return len(self.xi)

    @property
    def raw_weights(self) -> np.ndarray:
        return np.exp(self.log_weight)

    @property
    def weights(self) -> np.ndarray:
        """Weights normalised by the truncated sum ``Z.lower``."""
        return self.raw_weights / self.Z.lower

    @property
    def tail_defect(self) -> float:
        """Relative mass the truncation may miss: ``tail / Z.lower``."""
        return self.Z.tail / self.Z.lower

    def rotate(self, idx: np.ndarray) -> np.ndarray:
        """Row of ``w[1:] + w[:1]`` for each row index in *idx*."""
        head = self.max_digit ** (self.n - 1)
        return (idx % head) * self.max_digit + idx // head

    def digits(self, start: int = 0, stop: int | None = None) -> np.ndarray:
        """``(rows, n)`` digit array for rows ``start..stop-1``."""
        stop = len(self) if stop is None else stop
        idx = np.arange(start, stop, dtype=np.int64)
        out = np.empty((len(idx), self.n), dtype=np.int64)
        for k in range(self.n - 1, -1, -1):
            out[:, k] = idx % self.max_digit + 1
            idx = idx // self.max_digit
        return out

    def word(self, row: int) -> Word:
        return tuple(int(p) for p in self.digits(row, row + 1)[0])

    def orbit(self, row: int) -> np.ndarray:
        cur = np.array([row], dtype=np.int64)
        out = np.empty(self.n)
        for k in range(self.n):
            out[k] = self.xi[cur[0]]
            cur = self.rotate(cur)
        return out

    def entries(self) -> Iterator[EnsembleEntry]:
        w = self.raw_weights
        for row in range(len(self)):
            yield EnsembleEntry(self.word(row), float(w[row]), self.orbit(row))

    def orbit_sums(self, values: np.ndarray) -> np.ndarray:
        """``S_n g(xi) = sum_k g(T^k xi)`` given ``g`` sampled at every ``xi``."""
        values = np.asarray(values, dtype=float)
        cur = np.arange(len(self), dtype=np.int64)
        acc = values.copy()
        for _ in range(self.n - 1):
            cur = self.rotate(cur)
            acc += values[cur]
        return acc

    def mean(self, per_entry: np.ndarray) -> float:
        """Weighted mean of a per-entry quantity under the normalised weights."""
        w = self.raw_weights
        return fsum(w * per_entry) / fsum(w)

    def histogram(self, bins: int = 1000) -> Histogram1D:
        """Ensemble average of ``V_n`` binned on ``[0, 1)``."""
        b = np.minimum((self.xi * bins).astype(np.int64), bins - 1)
        w = self.weights / self.n
        masses = np.zeros(bins)
        cur = np.arange(len(self), dtype=np.int64)
        for _ in range(self.n):
            masses += np.bincount(b[cur], weights=w, minlength=bins)
            cur = self.rotate(cur)
        total = masses.sum()
        if total > 1.0:
            masses /= total  # rounding only
        return Histogram1D(masses)


def build_ensemble(beta: float, n: int, max_digit: int, budget: int | None = DEFAULT_BUDGET, chunk: int = 1 << 20) -> Ensemble:
    """Enumerate the truncated ensemble ``mu~_n`` for ``beta * phi``.

    Requires ``beta > 1/2`` so that the normaliser has a finite tail bound.
    """
    if not beta > 0.5:
        raise DomainError(f"the ensemble normaliser diverges for beta = {beta} <= 1/2")
    return _scan(beta, n, max_digit, budget, chunk)


def _scan(beta: float, n: int, max_digit: int, budget: int | None, chunk: int = 1 << 20) -> Ensemble:
    check_budget(max_digit**n, budget)
    size = max_digit**n
    xi = np.empty(size)
    logw = np.empty(size)
    for start, t in iter_word_tables(n, max_digit, chunk, None):
        sl = slice(start, start + len(t))
        x = t.fixed_points()
        xi[sl] = x
        logw[sl] = -2.0 * beta * np.log(t.c.astype(float) * x + t.d.astype(float))
    lower = fsum(np.exp(logw))
    tail = word_tail_bound(beta, n, max_digit)
    Z = PartitionSum(n, beta, max_digit, lower, lower + tail, tail)
    return Ensemble(beta, n, max_digit, xi, logw, Z)


# Compact sets and escape strata ---------------------------------------------


@dataclass(frozen=True)
class CompactSet:
    """``Gamma = {x : x_i <= N_i for every i}``.

    Only a finite prefix of ``N`` is stored; beyond it ``N`` stays constant.
    """

    N: tuple[int, ...]
    p_star: int = 2

    def __post_init__(self) -> None:
        N = tuple(int(v) for v in self.N)
        object.__setattr__(self, "N", N)
        if not N:
            raise DomainError("N needs at least one entry")
        if any(b < a for a, b in zip(N, N[1:])):
            raise DomainError(f"N must be non-decreasing, got {N}")
        if N[0] < self.p_star - 1:
            raise DomainError(f"N_1 = {N[0]} is below p_star - 1 = {self.p_star - 1}")

    @classmethod
    def constant(cls, value: int, p_star: int = 2) -> "CompactSet":
        return cls((value,), p_star)

    def __getitem__(self, i: int) -> int:
        """``N_i`` for 1-based *i*."""
        if i < 1:
            raise IndexError("N is indexed from 1")
        return self.N[min(i, len(self.N)) - 1]

    def levels(self, n: int) -> tuple[int, ...]:
        return tuple(self[i] for i in range(1, n + 1))

    def level_of(self, p: int, n: int) -> int:
        """``max{i <= n : p > N_i}`` (0 if none).

        A digit ``p`` at position ``j`` of a period-``n`` word pushes the
        shifts ``j, j-1, ..., j - level + 1`` (cyclically) out of ``Gamma``.
        """
        lv = 0
        for i in range(1, n + 1):
            if p > self[i]:
                lv = i
            else:
                break
        return lv


def escape_mask(digits: np.ndarray, G: CompactSet) -> np.ndarray:
    """``(rows, n)`` booleans: shift ``t`` of the periodic point leaves ``Gamma``.

    ``sigma^t x`` escapes iff some ``x_{t+i} > N_i``; for a period-``n``
    sequence only ``i <= n`` can be the first such index.
    """
    digits = np.asarray(digits)
    n = digits.shape[1]
    cap = int(digits.max(initial=0)) + 1
    esc = np.zeros(digits.shape, dtype=bool)
    for i in range(1, n + 1):
        over = digits > min(G[i], cap)
        esc |= np.roll(over, -(i - 1), axis=1)
    return esc


@dataclass
class Itinerary:
    word: Word
    #: pairs ``(n_j, r_j)`` with ``n_j <= n - 1``
    blocks: list[tuple[int, int]]
    escapes: int


def itinerary(w: Sequence[int] | str, G: CompactSet) -> Itinerary:
    """Itinerary of the periodic sequence ``www...`` up to time ``n``.

    ``r(x) = min{i >= 1 : x_i > N_i}``; ``n_1`` is the first escaping shift
    and ``n_{j+1}`` the first escaping shift at or after ``n_j + r_j``.
    """
    w = as_word(w)
    n = len(w)

    def x(i: int) -> int:  # 1-based digit of the periodic sequence
        return w[(i - 1) % n]

    def r_at(t: int) -> int | None:
        for i in range(1, n + 1):
            if x(t + i) > G[i]:
                return i
        return None

    blocks: list[tuple[int, int]] = []
    t = 0
    while t < n:
        r = r_at(t)
        if r is None:
            t += 1
            continue
        blocks.append((t, r))
        t += r
    escapes = sum(1 for t in range(n) if r_at(t) is not None)
    return Itinerary(w, blocks, escapes)


@dataclass
class EscapeStratification:
    n: int
    #: stratum ``m`` -> sum of raw weights ``exp S_n beta*phi`` with ``m`` escapes
    totals: dict[int, float]
    counts: dict[int, int]
    total: float

    def stratum(self, m: int) -> float:
        return self.totals.get(m, 0.0)


def escape_counts(e: Ensemble, G: CompactSet, chunk: int = 1 << 18) -> np.ndarray:
    """``m = n V_n(X \\ Gamma)`` for every entry."""
    out = np.empty(len(e), dtype=np.int64)
    for s in range(0, len(e), chunk):
        stop = min(len(e), s + chunk)
        out[s:stop] = escape_mask(e.digits(s, stop), G).sum(axis=1)
    return out


def escape_stratify(e: Ensemble, G: CompactSet) -> EscapeStratification:
    m = escape_counts(e, G)
    w = e.raw_weights
    totals, counts = {}, {}
    for k in range(e.n + 1):
        sel = m == k
        if np.any(sel):
            totals[k] = fsum(w[sel])
            counts[k] = int(sel.sum())
    return EscapeStratification(e.n, totals, counts, e.Z.lower)


# The hypothesis on {N_i} ------------------------------------------------------


def letter_tail_mass(measure: RefMeasure | str, N: int, prec: int = 256) -> mpmath.mpf:
    """Reference mass of all induced letters whose first digit exceeds ``N``.

    Letters with first digit ``k >= 2`` tile ``J_k``, so the union over
    ``k > N`` is ``[1 - 1/(N+1), 1)``.
    """
    measure = RefMeasure.parse(measure)
    if N < 1:
        raise DomainError("N must be >= 1")
    with mpmath.workprec(prec + int(N).bit_length()):
        if measure is RefMeasure.LEBESGUE_ON_HALF:
            return mpmath.mpf(2) / (N + 1)
        return mpmath.log1p(mpmath.mpf(1) / N) / mpmath.log(2)


def _smallest_N(measure: RefMeasure, bound: Fraction, floor: int) -> int:
    """Smallest ``N >= floor`` with ``letter_tail_mass(N) <= bound``."""
    if measure is RefMeasure.LEBESGUE_ON_HALF:
        # 2/(N+1) <= bound  <=>  N >= 2/bound - 1
        N = math.ceil(Fraction(2) / bound) - 1
    else:
        # log2(1 + 1/N) <= bound  <=>  N >= 1/(2^bound - 1)
        digits = bound.denominator.bit_length() + 64
        with mpmath.workprec(4 * digits):
            N = int(mpmath.ceil(1 / mpmath.expm1(mpmath.mpf(bound.numerator) / bound.denominator * mpmath.log(2))))
    N = max(N, floor, 1)
    while N > max(floor, 1) and letter_tail_mass(measure, N - 1) <= _mpf(bound, N):
        N -= 1
    while letter_tail_mass(measure, N) > _mpf(bound, N):
        N += 1
    return N


def _mpf(x: Fraction, N: int) -> mpmath.mpf:
    with mpmath.workprec(256 + int(N).bit_length()):
        return mpmath.mpf(x.numerator) / x.denominator


@dataclass
class HypothesisRow:
    i: int
    N_i: int
    tail_mass: float
    bound: float
    ok: bool


@dataclass
class HypothesisCheck:
    delta: Fraction
    measure: RefMeasure
    rows: list[HypothesisRow]

    @property
    def met(self) -> bool:
        return all(r.ok for r in self.rows)


def _as_delta(delta: float | Fraction | str) -> Fraction:
    d = Fraction(delta).limit_denominator(10**12) if isinstance(delta, float) else Fraction(delta)
    if not (0 < d <= Fraction(1, 5)):
        raise DomainError(f"delta must lie in (0, 1/5], got {delta}")
    return d


def check_hypothesis(G: CompactSet, delta, i_max: int, measure: RefMeasure | str = "lebesgue") -> HypothesisCheck:
    """Certify ``mass{letters with first digit > N_i} <= delta^(2i)`` for ``i <= i_max``."""
    d = _as_delta(delta)
    measure = RefMeasure.parse(measure)
    rows = []
    for i in range(1, i_max + 1):
        Ni = G[i]
        tail = letter_tail_mass(measure, Ni)
        bound = _mpf(d ** (2 * i), Ni)
        rows.append(HypothesisRow(i, Ni, float(tail), float(bound), bool(tail <= bound)))
    return HypothesisCheck(d, measure, rows)


def solve_compact_set(delta, i_max: int, measure: RefMeasure | str = "lebesgue", p_star: int = 2) -> CompactSet:
    """Greedy ``N_i``: the smallest value meeting the tail condition at each ``i``,
    kept non-decreasing."""
    d = _as_delta(delta)
    measure = RefMeasure.parse(measure)
    N: list[int] = []
    floor = p_star - 1
    for i in range(1, i_max + 1):
        floor = _smallest_N(measure, d ** (2 * i), floor)
        N.append(floor)
    return CompactSet(tuple(N), p_star)


# Stratum sums over the full shift ---------------------------------------------


def _power_sum_mp(s: mpmath.mpf, lo: int, hi: int | None, exact_upto: int) -> mpmath.mpf:
    """Upper bound on ``sum_{p=lo}^{hi} p^(-s)`` (``hi=None`` for infinity).

    Terms with ``p <= exact_upto`` are summed exactly; the rest is bounded by
    ``int_{A}^{B} x^(-s) dx`` with ``A`` the last exactly summed index.
    """
    if hi is not None and hi < lo:
        return mpmath.mpf(0)
    total = mpmath.mpf(0)
    top = exact_upto if hi is None else min(hi, exact_upto)
    for p in range(lo, top + 1):
        total += mpmath.mpf(p) ** (-s)
    A = max(lo - 1, top)
    if hi is not None and hi <= A:
        return total
    if hi is None:
        return total + mpmath.mpf(A) ** (1 - s) / (s - 1)
    return total + (mpmath.mpf(A) ** (1 - s) - mpmath.mpf(hi) ** (1 - s)) / (s - 1)


def class_weights(G: CompactSet, n: int, beta: float, exact_upto: int = 40) -> list[mpmath.mpf]:
    """``W_l >= sum_{p : level(p) = l} p^(-2 beta)`` for ``l = 0..n``."""
    s = mpmath.mpf(2 * beta)
    if s <= 1:
        raise DomainError("class sums diverge for beta <= 1/2")
    N = G.levels(n)
    W = [_power_sum_mp(s, 1, N[0], exact_upto)]
    for l in range(1, n):
        W.append(_power_sum_mp(s, N[l - 1] + 1, N[l], exact_upto))
    W.append(_power_sum_mp(s, N[n - 1] + 1, None, exact_upto))
    return W


def stratum_product_sums(W: Sequence, n: int) -> list:
    """``sum over words with m escapes of prod_j W_{level(p_j)}`` for ``m = 0..n``.

    Dynamic programme over positions ``n-1, ..., 0`` with state ``s`` = how
    many further shifts are already pushed out by later digits.  The cyclic
    wrap is handled by guessing the incoming state and requiring it back.
    """
    L = len(W) - 1
    zero = W[0] * 0
    out = [zero] * (n + 1)
    for s0 in range(n):
        # dp[s][m]
        dp = [[zero] * (n + 1) for _ in range(n)]
        dp[s0][0] = zero + 1
        for _ in range(n):
            new = [[zero] * (n + 1) for _ in range(n)]
            for s in range(n):
                row = dp[s]
                if not any(row):
                    continue
                for l in range(L + 1):
                    if not W[l]:
                        continue
                    cov = max(s, l)
                    ns = max(cov - 1, 0)
                    dm = 1 if cov > 0 else 0
                    tgt = new[ns]
                    for m in range(n + 1 - dm):
                        if row[m]:
                            tgt[m + dm] += row[m] * W[l]
            dp = new
        for m in range(n + 1):
            out[m] += dp[s0][m]
    return out


# Exponential bound ---------------------------------------------------------------


@dataclass
class ExpoRow:
    m: int
    lhs_upper: float
    lhs_truncated: float
    rhs: float
    log_margin: float
    passed: bool


@dataclass
class ExpoReport:
    beta: float
    n: int
    delta: Fraction
    gamma0: float
    G: CompactSet
    hypothesis: HypothesisCheck
    rows: list[ExpoRow]

    @property
    def hypothesis_met(self) -> bool:
        return self.hypothesis.met

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.rows)


def expo_rhs(n: int, m: int, delta, gamma0: float) -> mpmath.mpf:
    d = mpmath.mpf(_as_delta(delta).numerator) / _as_delta(delta).denominator
    return mpmath.mpf(2) ** n * n * mpmath.exp(gamma0 * n) * (4 * d) ** m / (1 - 4 * d)


def expo_bound_check(
    beta: float,
    n: int,
    G: CompactSet | None = None,
    delta=0.1,
    gamma0: float = 0.0,
    max_digit: int = 40,
    measure: RefMeasure | str = "lebesgue",
    enum_budget: int = 10**6,
) -> ExpoReport:
    """Compare each escape stratum ``m = 1..n`` with ``2^n n e^(gamma0 n) (4 delta)^m / (1 - 4 delta)``.

    ``lhs_upper`` covers the full shift: digits up to *max_digit* are summed
    exactly and larger ones through an integral bound, using
    ``|(T^n)'(xi)| >= prod p_j^2``.  When ``max_digit**n <= enum_budget``
    the truncated stratum sums are also enumerated as ``lhs_truncated``
    (``nan`` otherwise).  The hypothesis on ``N_i`` is checked for
    ``i <= 2n - 1``; a failure is reported, not raised.
    """
    d = _as_delta(delta)
    measure = RefMeasure.parse(measure)
    if G is None:
        G = solve_compact_set(d, 2 * n - 1, measure)
    hyp = check_hypothesis(G, d, 2 * n - 1, measure)
    with mpmath.workprec(256):
        W = class_weights(G, n, beta, exact_upto=max_digit)
        upper = stratum_product_sums(W, n)
        trunc = [math.nan] * (n + 1)
        if max_digit**n <= enum_budget:
            st = escape_stratify(build_ensemble(beta, n, max_digit), G)
            trunc = [st.stratum(m) for m in range(n + 1)]
        rows = []
        for m in range(1, n + 1):
            rhs = expo_rhs(n, m, d, gamma0)
            lhs = upper[m]
            lm = float(mpmath.log(rhs) - mpmath.log(lhs)) if lhs > 0 else math.inf
            rows.append(ExpoRow(m, float(lhs), trunc[m], float(rhs), lm, bool(lhs <= rhs)))
    return ExpoReport(beta, n, d, gamma0, G, hyp, rows)


# Exponential tightness -----------------------------------------------------------


def tightness_delta(ell: int) -> Fraction:
    """Largest convenient ``delta`` in ``(0, 1/5]`` with
    ``sum_{m>=1} e^(2 l^2 m) (4 delta)^m <= 1 - 4 delta``.

    With ``x = 4 delta e^(2 l^2)`` the condition reads
    ``x / ((1 - x)(1 - 4 delta)) <= 1``; the boundary is a quadratic root,
    rounded down to a rational and then re-checked.
    """
    if ell < 1:
        raise DomainError("ell must be >= 1")
    with mpmath.workprec(256):
        E = mpmath.exp(2 * ell * ell)
        u = ((2 * E + 1) - mpmath.sqrt((2 * E + 1) ** 2 - 4 * E)) / (2 * E)
        d = min(Fraction(1, 5), Fraction(int(mpmath.floor(u / 4 * 2**200)), 2**200))
        while not _tight_ok(d, E):
            d = d * Fraction(999, 1000)
    return d


def _tight_ok(d: Fraction, E) -> bool:
    dd = mpmath.mpf(d.numerator) / d.denominator
    x = 4 * dd * E
    return bool(x < 1 and x / ((1 - x) * (1 - 4 * dd)) <= 1)


@dataclass
class TightnessRow:
    ell: int
    n: int
    delta: float
    N1: int
    #: truncated ensemble mass outside ``K^l``, normalised by ``Z.lower``
    outside: float
    #: certified bound over the full shift (strata ``m > n/l``)
    outside_upper: float
    log_rate: float


def tightness_table(
    beta: float,
    n_range: Sequence[int],
    ell_range: Sequence[int],
    max_digit: int = 3,
    measure: RefMeasure | str = "lebesgue",
) -> list[TightnessRow]:
    """Mass outside ``K^l = {nu : nu(Gamma_l) >= 1 - 1/l}`` for each ``(l, n)``.

    ``V_n(x)`` lies outside ``K^l`` exactly when ``m > n / l`` shifts escape
    ``Gamma_l``.
    """
    measure = RefMeasure.parse(measure)
    rows = []
    n_top = max(n_range)
    sets = {}
    for ell in ell_range:
        d = tightness_delta(ell)
        sets[ell] = (d, solve_compact_set(d, 2 * n_top - 1, measure))
    for n in n_range:
        e = build_ensemble(beta, n, max_digit)
        for ell in ell_range:
            d, G = sets[ell]
            m = escape_counts(e, G)
            out = e.mean((m * ell > n).astype(float))
            with mpmath.workprec(256):
                up = stratum_product_sums(class_weights(G, n, beta, exact_upto=max_digit), n)
                bound = float(sum((up[k] for k in range(n + 1) if k * ell > n), mpmath.mpf(0)) / e.Z.lower)
            rate = math.log(bound) / n if bound > 0 else -math.inf
            rows.append(TightnessRow(ell, n, float(d), G[1], out, bound, rate))
    return rows


# Functionals ------------------------------------------------------------------------


def theoremC_functional(e: Ensemble, f: Func) -> float:
    """``(1/Z) sum_x |(T^n)'(x)|^(-beta) int f dV_n(x)`` over the truncated ensemble."""
    vals = _apply(f, e.xi)
    if np.all(vals == vals[0]):
        return float(vals[0])
    return e.mean(e.orbit_sums(vals) / e.n)


@dataclass
class EquidistRow:
    n: int
    A_n: float
    Z_lower: float
    tail: float


def equidist_table(beta: float, n_values: Sequence[int], max_digit: int, f: Func, budget: int | None = DEFAULT_BUDGET) -> list[EquidistRow]:
    rows = []
    for n in n_values:
        e = build_ensemble(beta, n, max_digit, budget)
        rows.append(EquidistRow(n, theoremC_functional(e, f), e.Z.lower, e.Z.tail))
    return rows


def smoothed_indicator(eps: float, ramp: float | None = None) -> Func:
    """1 on ``[0, eps)``, linear down to 0 at ``eps + ramp`` (default ``ramp = eps``)."""
    ramp = eps if ramp is None else ramp
    return lambda x: np.clip((eps + ramp - np.asarray(x, dtype=float)) / ramp, 0.0, 1.0)


@dataclass
class CorollaryValues:
    a: float
    b: float
    c: float


def corollary_functionals(e: Ensemble, phi_f: Func, psi_f: Func, f2: Func, pi1: Func | None = None, pi2: Func | None = None, grid: int = 10_001) -> CorollaryValues:
    """Ensemble means of ``S phi S psi / n^2``, ``S phi / S psi`` and the
    double orbit sum ``n^-2 sum_{k1,k2} f2(pi1(T^k1 x) + pi2(T^k2 x))``.

    ``pi1`` and ``pi2`` default to the coordinate ``x``.  Part (b) needs
    ``inf psi > 0``, checked on a grid of ``[0, 1)`` and at every orbit point.
    """
    pi1 = pi1 or (lambda x: x)
    pi2 = pi2 or (lambda x: x)
    n = e.n
    g_phi = _apply(phi_f, e.xi)
    g_psi = _apply(psi_f, e.xi)
    probe = _apply(psi_f, np.linspace(0.0, 1.0, grid, endpoint=False))
    if min(probe.min(), g_psi.min()) <= 0:
        raise DomainError("psi must be bounded below by a positive constant")
    S_phi, S_psi = e.orbit_sums(g_phi), e.orbit_sums(g_psi)
    a = e.mean(S_phi * S_psi / n**2)
    b = e.mean(S_phi / S_psi)
    u, v = _apply(pi1, e.xi), _apply(pi2, e.xi)
    acc = np.zeros(len(e))
    idx = np.arange(len(e), dtype=np.int64)
    rows1 = idx
    for _ in range(n):
        rows2 = idx
        for _ in range(n):
            acc += _apply(f2, u[rows1] + v[rows2])
            rows2 = e.rotate(rows2)
        rows1 = e.rotate(rows1)
    c = e.mean(acc / n**2)
    return CorollaryValues(a, b, c)


# Rate-function profile ----------------------------------------------------------------


@dataclass
class RatePoint:
    t: float
    s: float
    F_lower: float
    #: width of the enclosure of ``int beta*phi``
    slack: float
    stats: BlockMeasureStats = field(repr=False)


def rate_profile(beta: float, observable: Func, t_grid: Sequence[float], n: int, max_digit: int, P_ref: float = 0.0) -> list[RatePoint]:
    """Tilted block-Bernoulli points ``(s(t), F_lower(t))``.

    ``q_t(w)`` is proportional to ``sup_[w] exp S_n beta*phi`` times
    ``exp(t S_n psi(xi_w))``; ``s(t) = sum_w q_t(w) S_n psi(xi_w) / n`` and
    ``F_lower = h + int beta*phi - P_ref`` with the potential term taken at
    its certified lower bound.
    """
    words = list(enumerate_words(n, max_digit))
    e = _scan(beta, n, max_digit, DEFAULT_BUDGET)
    s_w = e.orbit_sums(_apply(observable, e.xi)) / n
    out = []
    for t in t_grid:
        st = block_bernoulli(beta, words, P_ref=P_ref, tilt=t * n * s_w)
        s = fsum(st.probabilities * s_w)
        out.append(RatePoint(float(t), s, st.F_value, st.mean_potential_upper - st.mean_potential, st))
    return out


# W1 on histograms ------------------------------------------------------------------------


def w1_distance(h1: Histogram1D, h2: Histogram1D) -> float:
    """``int_0^1 |F_1 - F_2|`` with piecewise-linear distribution functions.

    Within each bin the difference is linear, so the integral is exact:
    ``h (|a| + |b|) / 2`` when the end values share a sign and
    ``h (a^2 + b^2) / (2 (|a| + |b|))`` when they do not.
    """
    if h1.bins != h2.bins:
        raise DomainError(f"bin counts differ: {h1.bins} vs {h2.bins}")
    diff = np.concatenate([[0.0], np.cumsum(np.asarray(h1.masses) - np.asarray(h2.masses))])
    a, b = diff[:-1], diff[1:]
    h = 1.0 / h1.bins
    same = a * b >= 0
    absum = np.abs(a) + np.abs(b)
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = np.where(absum > 0, (a * a + b * b) / (2.0 * absum), 0.0)
    return float(h * np.sum(np.where(same, absum / 2.0, cross)))
