"""First-return inducing onto ``X* = [1/2, 1)`` and the induced pressure.

A letter ``(p, m)`` with ``p >= 2`` is the block ``p 1^(m-1)``: enter
``J_p``, then spend ``m - 1`` steps in the neutral interval ``J_1``.  Its
inverse branch is ``H = M_p M_1^(m-1)``, mapping ``[1/2, 1)`` onto the
letter interval ``J(a)``, and the induced map ``U = T^m`` there has
``|U'(H(y))| = (c y + d)^2``.  The induced potential is
``Phi_{beta,gamma} = beta * S_R phi - gamma * R``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import BudgetError, DegenerateInputError, DomainError, SearchError
from .pressure import PressureBracket, fsum, zeta_tail_bound
from .renyi import Interval, RefMeasure
from .surd import IntMatrix2

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class InducingScheme:
    """Base set ``X*`` avoiding digits below ``p_star``; the Renyi case is ``p_star = 2``."""

    p_star: int = 2

    def __post_init__(self) -> None:
        if self.p_star < 2:
            raise DomainError("p_star must be >= 2")

    def is_letter_digit(self, p: int) -> bool:
        return p >= self.p_star


@dataclass(frozen=True, order=True)
class InducedLetter:
    p: int
    m: int

    def __post_init__(self) -> None:
        if self.p < 2 or self.m < 1:
            raise DomainError(f"letter needs p >= 2 and m >= 1, got ({self.p}, {self.m})")

    def __len__(self) -> int:
        return self.m

    def digits(self) -> tuple[int, ...]:
        """Underlying base-alphabet block ``p 1^(m-1)``."""
        return (self.p,) + (1,) * (self.m - 1)


def _as_letter(a: InducedLetter | tuple[int, int]) -> InducedLetter:
    return a if isinstance(a, InducedLetter) else InducedLetter(*a)


@dataclass(frozen=True)
class InducedWord:
    letters: tuple[InducedLetter, ...]

    def __post_init__(self) -> None:
        if not self.letters:
            raise DomainError("an induced word needs at least one letter")

    @classmethod
    def of(cls, letters: Iterable[InducedLetter | tuple[int, int]]) -> "InducedWord":
        return cls(tuple(_as_letter(a) for a in letters))

    @property
    def total_length(self) -> int:
        return sum(a.m for a in self.letters)

    def digits(self) -> tuple[int, ...]:
        return tuple(p for a in self.letters for p in a.digits())


def letter_matrix(a: InducedLetter | tuple[int, int]) -> IntMatrix2:
    a = _as_letter(a)
    p, k = a.p, a.m - 1
    return IntMatrix2(1 + (p - 1) * k, p - 1, 1 + p * k, p)


def induced_word_matrix(w: InducedWord | InducedLetter | Sequence) -> IntMatrix2:
    w = _as_induced(w)
    M = IntMatrix2.identity()
    for a in w.letters:
        M = M @ letter_matrix(a)
    return M


def _as_induced(w) -> InducedWord:
    if isinstance(w, InducedWord):
        return w
    if isinstance(w, InducedLetter):
        return InducedWord((w,))
    if isinstance(w, tuple) and len(w) == 2 and all(isinstance(x, int) for x in w):
        return InducedWord((InducedLetter(*w),))
    return InducedWord.of(w)


def letter_interval(a) -> Interval:
    """``J(a) = [H(1/2), H(1))`` for a letter or an induced word."""
    M = induced_word_matrix(a)
    return Interval(Fraction(M.a + 2 * M.b, M.c + 2 * M.d), Fraction(M.a + M.b, M.c + M.d))


def induced_potential_bounds(beta: float, gamma: float, a) -> tuple[float, float]:
    """``(inf, sup)`` of ``exp Phi_{beta,gamma}`` over ``[[a]]``.

    ``exp Phi = e^(-gamma |a|) (c y + d)^(-2 beta)`` with ``y`` in ``[1/2, 1)``.
    """
    w = _as_induced(a)
    M = induced_word_matrix(w)
    L = w.total_length
    sup = math.exp(-gamma * L - 2.0 * beta * (math.log(M.c + 2 * M.d) - math.log(2)))
    inf = math.exp(-gamma * L - 2.0 * beta * math.log(M.c + M.d))
    return inf, sup


# Vectorised letter and word tables -------------------------------------------


@dataclass
class InducedTable:
    """Branch products of a family of induced words, stored entrywise in float64."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    length: np.ndarray

    def __len__(self) -> int:
        return len(self.a)

    def log_sup(self, beta: float, gamma: float) -> np.ndarray:
        return -gamma * self.length - 2.0 * beta * np.log(self.c / 2.0 + self.d)

    def log_inf(self, beta: float, gamma: float) -> np.ndarray:
        return -gamma * self.length - 2.0 * beta * np.log(self.c + self.d)

    def log_mid(self, beta: float, gamma: float) -> np.ndarray:
        return -gamma * self.length - 2.0 * beta * np.log(0.75 * self.c + self.d)

    def interval_lengths(self) -> np.ndarray:
        """``|J| = (1/2)/((c + d)(c/2 + d))``, free of cancellation."""
        return 0.5 / ((self.c + self.d) * (self.c / 2.0 + self.d))

    def left_ends(self) -> np.ndarray:
        return (self.a / 2.0 + self.b) / (self.c / 2.0 + self.d)

    def ref_masses(self, measure: RefMeasure) -> np.ndarray:
        lengths = self.interval_lengths()
        if measure is RefMeasure.LEBESGUE_ON_HALF:
            return 2.0 * lengths
        return np.log1p(lengths / self.left_ends()) / math.log(2.0)

    def extend(self, other: "InducedTable") -> "InducedTable":
        """All concatenations ``u v`` (u from self, v from other), u-major."""
        A, B, C, D = (x[:, None] for x in (self.a, self.b, self.c, self.d))
        return InducedTable(
            (A * other.a + B * other.c).ravel(),
            (A * other.b + B * other.d).ravel(),
            (C * other.a + D * other.c).ravel(),
            (C * other.b + D * other.d).ravel(),
            (self.length[:, None] + other.length).ravel(),
        )


def letter_grid(p_max: int, m_max: int, p_star: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Arrays ``(p, m)`` for all letters with ``p <= p_max``, ``m <= m_max`` (p-major)."""
    p, m = np.meshgrid(np.arange(p_star, p_max + 1), np.arange(1, m_max + 1), indexing="ij")
    return p.ravel(), m.ravel()


def letter_table(p_max: int, m_max: int, p_star: int = 2) -> InducedTable:
    p, m = letter_grid(p_max, m_max, p_star)
    pf, k = p.astype(float), (m - 1).astype(float)
    return InducedTable(1 + (pf - 1) * k, pf - 1, 1 + pf * k, pf, m.astype(float))


def induced_word_table(n_letters: int, p_max: int, m_max: int, budget: int = 10**8) -> InducedTable:
    letters = letter_table(p_max, m_max)
    count = len(letters) ** n_letters
    if count > budget:
        raise BudgetError(f"{count} induced words exceed the budget of {budget}")
    t = letters
    for _ in range(n_letters - 1):
        t = t.extend(letters)
    return t


# Certified tails over the infinite induced alphabet -----------------------------


def shifted_series_tail(gamma: float, s: float, M: int) -> float:
    """Bound on ``sum_{m > M} e^(-gamma m) (m+1)^(-s)`` for ``s >= 0``."""
    if gamma < 0:
        return math.inf
    if gamma == 0:
        return (M + 1) ** (1.0 - s) / (s - 1.0) if s > 1 else math.inf
    geometric = math.exp(-gamma * (M + 1)) / -math.expm1(-gamma)
    bound = (M + 2) ** (-s) * geometric
    if s > 1:
        bound = min(bound, math.exp(-gamma * (M + 1)) * (M + 1) ** (1.0 - s) / (s - 1.0))
    return bound


def letter_tail_bound(beta: float, gamma: float, p_max: int, m_max: int, extra_power: float = 0.0) -> float:
    """Bound on ``sum m^extra_power sup exp Phi`` over letters outside the truncation.

    Uses ``sup exp Phi(p, m) = e^(-gamma m) (2/(p(m+1)+1))^(2 beta) <=
    e^(-gamma m) 2^(2 beta) (m+1)^(-2 beta) p^(-2 beta)``; with
    ``extra_power = 1`` this bounds the return-time weighted tail.
    """
    s_p = 2.0 * beta
    s_m = 2.0 * beta - extra_power
    if s_m < 0:
        raise DomainError("return-time tail needs 2*beta >= 1")
    ms = np.arange(1, m_max + 1, dtype=float)
    head_m = fsum(np.exp(-gamma * ms) * ms**extra_power * (2.0 / (ms + 1)) ** s_p)
    # (m+1)^(-2beta) m^extra <= (m+1)^(-s_m)
    tail_m = 2.0**s_p * shifted_series_tail(gamma, s_m, m_max)
    p_tail = zeta_tail_bound(s_p, p_max)
    p_head = fsum(np.arange(2, p_max + 1, dtype=float) ** (-s_p))
    total = (head_m + tail_m) * p_tail + p_head * tail_m
    return math.inf if math.isnan(total) else total


# Transfer-operator bracket for the induced pressure ------------------------------


class InducedTransferOperator:
    """Ruelle operator of ``Phi_{beta,gamma}`` on a grid of ``[1/2, 1]``.

    ``L h(y) = sum_a e^(-gamma m) (c y + d)^(-2 beta) h(H_a y)``.  For
    ``beta > 0`` every ``L^k 1`` is decreasing, so grid values bracket it
    between grid points.  The gamma-independent part of ``L`` is stored per
    return time ``m`` as a ``(grid+1, grid)`` matrix, making each gamma
    evaluation a small contraction.
    """

    def __init__(self, beta: float, p_max: int, m_max: int, grid: int = 200):
        if beta <= 0:
            raise DomainError("the grid bracket needs beta > 0")
        if p_max < 2 or m_max < 1 or grid < 2:
            raise DomainError("need p_max >= 2, m_max >= 1, grid >= 2")
        self.beta, self.p_max, self.m_max, self.grid = beta, p_max, m_max, grid
        self.y = np.linspace(0.5, 1.0, grid + 1)
        G = grid
        B = np.zeros((m_max, G + 1, G))
        p = np.arange(2, p_max + 1, dtype=float)
        rows = np.repeat(np.arange(G + 1), len(p)) * G
        for m in range(1, m_max + 1):
            k = m - 1
            a, b, c, d = 1 + (p - 1) * k, p - 1, 1 + p * k, p
            den = np.outer(self.y, c) + d
            W = den ** (-2.0 * beta)
            Z = (np.outer(self.y, a) + b) / den
            j = np.clip(np.searchsorted(self.y, Z, side="right") - 1, 0, G - 1)
            B[m - 1] = np.bincount(rows + j.ravel(), weights=W.ravel(), minlength=(G + 1) * G).reshape(G + 1, G)
        self._B = B
        self._ms = np.arange(1, m_max + 1, dtype=float)

    def tail(self, gamma: float) -> float:
        return letter_tail_bound(self.beta, gamma, self.p_max, self.m_max)

    def bracket(self, gamma: float, level: int = 2) -> PressureBracket:
        """Collatz-Wielandt bracket from the ratio ``L^level 1 / L^(level-1) 1``."""
        if level < 1:
            raise DomainError("level must be >= 1")
        # factor e^(-gamma m) = e^(shift) e^(-gamma m - shift) keeps things finite
        expo = -gamma * self._ms
        shift = float(expo.max())
        E = np.tensordot(np.exp(expo - shift), self._B, axes=1)
        tail = self.tail(gamma)
        tail_scaled = tail * math.exp(-shift) if not math.isinf(tail) else math.inf
        # the lower end uses the truncated operator alone (its pressure is
        # smaller); the upper end adds the tail letters
        g_lo = np.ones(self.grid + 1)
        g_tr = np.ones(self.grid + 1)
        g_hi = np.ones(self.grid + 1)
        finite = not math.isinf(tail)
        for it in range(level):
            f_lo = E @ g_lo[1:]
            f_tr = E @ g_tr[:-1]
            f_hi = E @ g_hi[:-1] + tail_scaled * g_hi[0] if finite else f_tr
            if it < level - 1:
                s = f_lo[0]
                g_lo, g_tr, g_hi = f_lo / s, f_tr / s, f_hi / s
        lo = math.log(float(np.min(f_lo[1:] / g_tr[:-1]))) + shift
        if finite:
            hi = math.log(float(np.max(f_hi[:-1] / g_lo[1:]))) + shift
        else:
            hi = math.inf
        return PressureBracket(level, lo, hi, tail)


def induced_cylinder_bracket(beta: float, gamma: float, level: int, p_max: int, m_max: int, budget: int = 10**8) -> PressureBracket:
    """Bracket from sup/inf sums over ``level``-letter words.

    ``(1/n) log sum inf <= P <= (1/n) log(sum sup + tail)`` with the
    union-over-positions tail ``n T (S + T)^(n-1)``.
    """
    t = induced_word_table(level, p_max, m_max, budget)
    log_sup, log_inf = t.log_sup(beta, gamma), t.log_inf(beta, gamma)
    ms, mi = float(log_sup.max()), float(log_inf.max())
    sup_sum = fsum(np.exp(log_sup - ms))
    inf_sum = fsum(np.exp(log_inf - mi))
    T = letter_tail_bound(beta, gamma, p_max, m_max)
    lo = (math.log(inf_sum) + mi) / level
    if math.isinf(T):
        return PressureBracket(level, lo, math.inf, math.inf)
    letters = letter_table(p_max, m_max)
    S = fsum(np.exp(letters.log_sup(beta, gamma)))
    tail = level * T * (S + T) ** (level - 1)
    hi = math.log(sup_sum * math.exp(ms) + tail) / level
    return PressureBracket(level, lo, hi, tail)


def induced_pressure_bracket(
    beta: float, gamma: float, level: int = 2, p_max: int = 200, m_max: int = 200, grid: int = 200, method: str = "transfer"
) -> PressureBracket:
    """Bracket for the induced pressure ``P(Phi_{beta,gamma})``.

    ``method="transfer"`` iterates the grid transfer operator *level* times;
    ``method="cylinder"`` uses sup/inf sums over ``level``-letter words.
    """
    if method == "transfer":
        return InducedTransferOperator(beta, p_max, m_max, grid).bracket(gamma, level)
    if method == "cylinder":
        return induced_cylinder_bracket(beta, gamma, level, p_max, m_max)
    raise DomainError(f"unknown method {method!r}")


@dataclass
class Gamma0Result:
    gamma0: float
    #: certified enclosure of the root
    gamma_lo: float
    gamma_hi: float
    #: pressure bracket at gamma0
    bracket: PressureBracket
    #: tail mass bound of the letter normaliser at gamma0
    defect: float
    evaluations: int

    @property
    def width(self) -> float:
        return self.gamma_hi - self.gamma_lo


def find_gamma0(
    beta: float,
    p_max: int = 200,
    m_max: int = 200,
    tol: float = 1e-3,
    level: int = 2,
    grid: int = 200,
    scan: tuple[float, float] = (-1.0, 2.0),
    max_steps: int = 64,
    operator: InducedTransferOperator | None = None,
) -> Gamma0Result:
    """Enclose the root of ``gamma -> P(Phi_{beta,gamma})`` by bisection.

    Both bracket ends are decreasing in gamma.  ``gamma_lo`` is the largest
    probed gamma with ``lo > 0`` and ``gamma_hi`` the smallest with
    ``hi < 0``; the root lies between them.
    """
    op = operator or InducedTransferOperator(beta, p_max, m_max, grid)
    count = 0
    cache: dict[float, PressureBracket] = {}

    def br(g: float) -> PressureBracket:
        nonlocal count
        if g not in cache:
            count += 1
            cache[g] = op.bracket(g, level)
        return cache[g]

    g0, g1 = scan
    if not br(g0).lo > 0:
        raise SearchError(f"induced pressure is not positive at gamma={g0}")
    if not br(g1).hi < 0:
        raise SearchError(f"induced pressure is not negative at gamma={g1}")
    # left end: lo(a) > 0 >= lo(b)
    a, b = g0, g1
    for _ in range(max_steps):
        if b - a <= tol / 2:
            break
        c = 0.5 * (a + b)
        if br(c).lo > 0:
            a = c
        else:
            b = c
    gamma_lo = a
    # right end: hi(a) >= 0 > hi(b); hi >= lo > 0 at gamma_lo
    a, b = gamma_lo, g1
    for _ in range(max_steps):
        if b - a <= tol / 2:
            break
        c = 0.5 * (a + b)
        if br(c).hi >= 0:
            a = c
        else:
            b = c
    gamma_hi = b
    gamma0 = 0.5 * (gamma_lo + gamma_hi)
    bracket = br(gamma0)
    return Gamma0Result(gamma0, gamma_lo, gamma_hi, bracket, bracket.tail, count)


# Local Gibbs verification -----------------------------------------------------


@dataclass
class GibbsRatioStats:
    count: int
    min_ratio: float
    max_ratio: float
    median_ratio: float
    #: extremes over sampled points rather than the whole interval
    sampled_min: float
    sampled_max: float

    @property
    def C(self) -> float:
        if self.count == 0:
            return math.nan
        return max(self.max_ratio, 1.0 / self.min_ratio)


@dataclass
class InducedGibbsApprox:
    """Bernoulli surrogate on the induced alphabet: letter ``(p, m)`` has mass ``q``."""

    beta: float
    gamma: float
    p: np.ndarray
    m: np.ndarray
    q: np.ndarray
    defect: float
    truncation: tuple[int, int] = (0, 0)
    mean_return_time: float = math.nan
    #: upper bound on the return-time mass carried by discarded letters
    return_time_tail: float = math.nan
    return_time_divergent: bool = False
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self.p = np.asarray(self.p, dtype=np.int64)
        self.m = np.asarray(self.m, dtype=np.int64)
        self.q = np.asarray(self.q, dtype=float)
        if np.any(self.q < 0):
            raise DomainError("letter masses must be nonnegative")
        self._index = {(int(p), int(m)): k for k, (p, m) in enumerate(zip(self.p, self.m))}
        if math.isnan(self.mean_return_time):
            self.mean_return_time = float(self.q @ self.m)
            if math.isnan(self.return_time_tail):
                self.return_time_tail = 0.0

    @classmethod
    def from_letters(cls, masses: dict[tuple[int, int], float], beta: float = math.nan, gamma: float = math.nan) -> "InducedGibbsApprox":
        keys = sorted(masses)
        q = np.array([masses[k] for k in keys], dtype=float)
        defect = 1.0 - fsum(q)
        return cls(beta, gamma, [k[0] for k in keys], [k[1] for k in keys], q, max(defect, 0.0))

    def letter_mass(self, letter) -> float:
        a = _as_letter(letter)
        k = self._index.get((a.p, a.m))
        return 0.0 if k is None else float(self.q[k])

    def word_mass(self, w) -> float:
        out = 1.0
        for a in _as_induced(w).letters:
            out *= self.letter_mass(a)
        return out

    @property
    def letter_table(self) -> InducedTable:
        pf, k = self.p.astype(float), (self.m - 1).astype(float)
        return InducedTable(1 + (pf - 1) * k, pf - 1, 1 + pf * k, pf, self.m.astype(float))


def induced_gibbs_bernoulli(beta: float, gamma: float, p_max: int, m_max: int) -> InducedGibbsApprox:
    """Letter weights ``exp Phi`` at the interval midpoint ``y = 3/4``,
    normalised by the truncated sum plus the certified tail."""
    tail = letter_tail_bound(beta, gamma, p_max, m_max)
    if math.isinf(tail):
        raise DomainError(f"letter normaliser diverges at beta={beta}, gamma={gamma}")
    letters = letter_table(p_max, m_max)
    p, m = letter_grid(p_max, m_max)
    w = np.exp(letters.log_mid(beta, gamma))
    Z = fsum(w) + tail
    q = w / Z
    divergent = gamma < 0 or (gamma == 0 and beta <= 1)
    if divergent:
        r_tail = math.inf
    else:
        r_tail = letter_tail_bound(beta, gamma, p_max, m_max, extra_power=1.0) / Z
    return InducedGibbsApprox(
        beta=beta,
        gamma=gamma,
        p=p,
        m=m,
        q=q,
        defect=tail / Z,
        truncation=(p_max, m_max),
        mean_return_time=fsum(q * m),
        return_time_tail=r_tail,
        return_time_divergent=divergent,
    )


def _word_chunks(words) -> Iterator[tuple[InducedTable, list]]:
    """Group explicit induced words into tables by letter count."""
    groups: dict[int, list[InducedWord]] = {}
    for w in words:
        w = _as_induced(w)
        groups.setdefault(len(w.letters), []).append(w)
    for ws in groups.values():
        mats = [induced_word_matrix(w) for w in ws]
        arr = lambda k: np.array([float(getattr(M, k)) for M in mats])
        yield InducedTable(arr("a"), arr("b"), arr("c"), arr("d"), np.array([float(w.total_length) for w in ws])), ws


def _gibbs_ratios(table: InducedTable, lam: np.ndarray, gamma0: float, beta: float, samples: int):
    if np.any(lam <= 0):
        raise DegenerateInputError("a word carries zero mass")
    log_lam = np.log(lam)
    # ratio = lambda / exp(S phi - gamma0 |a|); S phi ranges over [log inf, log sup]
    lo = log_lam - table.log_sup(beta, gamma0)
    hi = log_lam - table.log_inf(beta, gamma0)
    mid = log_lam - table.log_mid(beta, gamma0)
    ys = 0.5 + (np.arange(samples) + 0.5) / (2 * samples)
    smin, smax = math.inf, -math.inf
    for y in ys:
        v = log_lam + gamma0 * table.length + 2.0 * beta * np.log(table.c * y + table.d)
        smin, smax = min(smin, float(v.min())), max(smax, float(v.max()))
    return lo, hi, mid, smin, smax


def local_gibbs_check(
    measure: RefMeasure | str | InducedGibbsApprox,
    gamma0: float,
    words: Iterable | InducedTable,
    beta: float = 1.0,
    samples: int = 5,
) -> GibbsRatioStats:
    """Ratios ``lambda[[a]] / exp(S_|a| beta*phi(x) - gamma0 |a|)`` over words and points.

    ``words`` is an iterable of induced words or a precomputed table (the
    latter only for reference measures).
    """
    if not isinstance(measure, InducedGibbsApprox):
        measure = RefMeasure.parse(measure)
    if isinstance(words, InducedTable):
        chunks: Iterable = [(words, None)]
    else:
        chunks = list(_word_chunks(words))
    los, his, mids = [], [], []
    smin, smax = math.inf, -math.inf
    for table, ws in chunks:
        if isinstance(measure, RefMeasure):
            lam = table.ref_masses(measure)
        else:
            if ws is None:
                raise DomainError("surrogate measures need explicit words")
            lam = np.array([measure.word_mass(w) for w in ws])
        lo, hi, mid, a, b = _gibbs_ratios(table, lam, gamma0, beta, samples)
        los.append(lo)
        his.append(hi)
        mids.append(mid)
        smin, smax = min(smin, a), max(smax, b)
    if not los:
        return GibbsRatioStats(0, math.nan, math.nan, math.nan, math.nan, math.nan)
    lo, hi, mid = (np.concatenate(x) for x in (los, his, mids))
    return GibbsRatioStats(
        count=len(lo),
        min_ratio=math.exp(float(lo.min())),
        max_ratio=math.exp(float(hi.max())),
        median_ratio=math.exp(float(np.median(mid))),
        sampled_min=math.exp(smin),
        sampled_max=math.exp(smax),
    )


def local_gibbs_scan(
    measure: RefMeasure | str, gamma0: float, n_letters: int, p_max: int, m_max: int, beta: float = 1.0
) -> GibbsRatioStats:
    """:func:`local_gibbs_check` over every word of *n_letters* letters,
    chunked by first letter to bound memory."""
    measure = RefMeasure.parse(measure)
    letters = letter_table(p_max, m_max)
    rest = induced_word_table(n_letters - 1, p_max, m_max) if n_letters > 1 else None
    lo_min, hi_max = math.inf, -math.inf
    smin, smax = math.inf, -math.inf
    mids = []
    count = 0
    for k in range(len(letters)):
        head = InducedTable(*(x[k : k + 1] for x in (letters.a, letters.b, letters.c, letters.d, letters.length)))
        t = head.extend(rest) if rest is not None else head
        lo, hi, mid, a, b = _gibbs_ratios(t, t.ref_masses(measure), gamma0, beta, 3)
        lo_min, hi_max = min(lo_min, float(lo.min())), max(hi_max, float(hi.max()))
        smin, smax = min(smin, a), max(smax, b)
        mids.append(np.median(mid))
        count += len(t)
    return GibbsRatioStats(count, math.exp(lo_min), math.exp(hi_max), math.exp(float(np.median(mids))), math.exp(smin), math.exp(smax))


# Kac spreading of the induced surrogate ----------------------------------------


@dataclass
class Histogram1D:
    """Bin masses of a measure on ``[0, 1)`` with equal-width bins."""

    masses: np.ndarray

    def __post_init__(self) -> None:
        self.masses = np.asarray(self.masses, dtype=float)
        if self.masses.ndim != 1 or len(self.masses) == 0:
            raise DomainError("histogram needs a non-empty 1-d mass vector")
        if np.any(self.masses < 0) or self.masses.sum() > 1 + 1e-12:
            raise DomainError("histogram masses must be >= 0 with total <= 1")

    @property
    def bins(self) -> int:
        return len(self.masses)

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.bins + 1)

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    def mass_below(self, x: float) -> float:
        """Mass of ``[0, x)`` with mass spread uniformly inside each bin."""
        cdf = np.concatenate([[0.0], np.cumsum(self.masses)])
        return float(np.interp(x, self.edges, cdf))

    def mean(self) -> float:
        centers = (self.edges[:-1] + self.edges[1:]) / 2
        return float(self.masses @ centers)


@dataclass
class KacSpread:
    histogram: Histogram1D
    #: normaliser lower/upper: truncated mean return time and its tail bound
    mean_return_time: float
    return_time_tail: float

    @property
    def defect(self) -> float:
        return 1.0 - self.histogram.total


def kac_spread(approx: InducedGibbsApprox, bins: int = 1000) -> KacSpread:
    """Spread the induced surrogate over the tower ``{R > j}``.

    Within a letter interval the surrogate is uniform, so the induced
    coordinate ``eta = U x`` has density proportional to ``(c eta + d)^(-2)``.
    Tower level ``k`` (``k`` steps before return) sits at
    ``eta / (k eta + 1)`` in ``[1/(k+2), 1/(k+1))``.  Each level is added
    through its exact distribution function at the bin edges, then the
    total is divided by the mean return time plus its tail bound.
    """
    if approx.return_time_divergent or math.isinf(approx.return_time_tail):
        raise DomainError("mean return time diverges; no finite invariant measure to spread")
    edges = np.linspace(0.0, 1.0, bins + 1)
    t = approx.letter_table
    q = approx.q
    keep = q > 0
    a, b, c, d, m, q = t.a[keep], t.b[keep], t.c[keep], t.d[keep], approx.m[keep], q[keep]
    lo = (a / 2 + b) / (c / 2 + d)
    hi = (a + b) / (c + d)
    cum = np.zeros(bins + 1)
    # level 0: uniform on J(a)
    sel = edges >= 0.5
    x = edges[sel]
    width = hi - lo
    for s in range(0, len(q), 4096):
        sl = slice(s, s + 4096)
        frac = np.clip((x[:, None] - lo[sl]) / width[sl], 0.0, 1.0)
        cum[sel] += frac @ q[sl]
    # levels k >= 1 for letters with m > k
    Hh = hi
    for k in range(1, int(m.max())):
        act = m > k
        if not np.any(act):
            break
        left, right = 1.0 / (k + 2), 1.0 / (k + 1)
        inside = (edges > left) & (edges < right)
        ea, eb, ec, ed, eq = a[act], b[act], c[act], d[act], q[act]
        elo, ehi = lo[act], Hh[act]
        # everything from this level lies below `right`
        cum[edges >= right] += eq.sum()
        if np.any(inside):
            xs = edges[inside]
            eta = xs / (1.0 - k * xs)
            Heta = (np.outer(eta, ea) + eb) / (np.outer(eta, ec) + ed)
            frac = np.clip((Heta - elo) / (ehi - elo), 0.0, 1.0)
            cum[inside] += frac @ eq
    norm = approx.mean_return_time + approx.return_time_tail
    masses = np.clip(np.diff(cum), 0.0, None) / norm
    return KacSpread(Histogram1D(masses), approx.mean_return_time, approx.return_time_tail)


# Disjointness of induced-word intervals -------------------------------------------


@dataclass
class DisjointnessReport:
    total_length: int
    words: int
    overlaps: int
    #: words whose interval is not inside its first letter's interval
    escapes: int


def _words_of_length(L: int, p_max: int, m_max: int, cache: dict) -> tuple[np.ndarray, ...]:
    """Integer branch products of all induced words with total length *L*."""
    if L in cache:
        return cache[L]
    if L == 0:
        one = np.ones(1, dtype=np.int64)
        out = (one, 0 * one, 0 * one, one)
    else:
        parts = []
        for m in range(1, min(L, m_max) + 1):
            rest = _words_of_length(L - m, p_max, m_max, cache)
            for p in range(2, p_max + 1):
                H = letter_matrix((p, m))
                parts.append(_left_multiply(H, rest))
        out = tuple(np.concatenate([q[k] for q in parts]) for k in range(4))
    cache[L] = out
    return out


def _left_multiply(H: IntMatrix2, t: tuple[np.ndarray, ...]) -> tuple[np.ndarray, ...]:
    a, b, c, d = t
    return (H.a * a + H.b * c, H.a * b + H.b * d, H.c * a + H.d * c, H.c * b + H.d * d)


def _frac_le(n1, d1, n2, d2) -> np.ndarray:
    """Exact ``n1/d1 <= n2/d2`` for positive denominators.

    Cross products stay in int64 while every entry is below ``2^31``;
    otherwise the comparison runs on Python integers.
    """
    arrs = [np.asarray(x) for x in (n1, d1, n2, d2)]
    if max(int(np.max(np.abs(x), initial=0)) for x in arrs) >= 2**31:
        arrs = [x.astype(object) for x in arrs]
    n1, d1, n2, d2 = arrs
    return np.asarray(n1 * d2 <= n2 * d1, dtype=bool)


def _chunk_overlaps(lo_n, lo_d, hi_n, hi_d) -> int:
    """Overlapping pairs among half-open intervals, checked exactly.

    After sorting by left end, the family is pairwise disjoint iff each
    right end is at most the next left end.  Sorting uses extended
    precision; any adjacent pair that fails the exact test is re-examined
    with Fractions, so a rounding misorder cannot fake or hide an overlap.
    """
    if len(lo_n) < 2:
        return 0
    key = lo_n.astype(np.longdouble) / lo_d.astype(np.longdouble)
    order = np.argsort(key, kind="stable")
    ln, ld, hn, hd = lo_n[order], lo_d[order], hi_n[order], hi_d[order]
    ok = _frac_le(hn[:-1], hd[:-1], ln[1:], ld[1:])
    if ok.all():
        return 0
    # exact fallback on the suspicious neighbourhood
    bad = np.nonzero(~ok)[0]
    idx = sorted({j for i in bad for j in range(max(0, i - 8), min(len(ln), i + 10))})
    ivs = sorted((Fraction(int(ln[j]), int(ld[j])), Fraction(int(hn[j]), int(hd[j]))) for j in idx)
    count = 0
    for (l1, h1), (l2, h2) in zip(ivs, ivs[1:]):
        if h1 > l2:
            count += 1
    return count


def check_induced_disjointness(total_length: int, p_max: int, m_max: int) -> DisjointnessReport:
    """Exhaustively test that induced words of equal total length have disjoint intervals.

    Words are grouped by first letter.  Within a group intervals are
    compared exactly; across groups disjointness follows once every word
    interval sits inside its first letter's interval and the letter
    intervals themselves are disjoint (the ``total_length``-1 case of the
    same check).
    """
    cache: dict = {}
    overlaps = escapes = count = 0
    for m in range(1, min(total_length, m_max) + 1):
        rest = _words_of_length(total_length - m, p_max, m_max, cache)
        for p in range(2, p_max + 1):
            H = letter_matrix((p, m))
            a, b, c, d = _left_multiply(H, rest)
            lo_n, lo_d = a + 2 * b, c + 2 * d
            hi_n, hi_d = a + b, c + d
            count += len(a)
            overlaps += _chunk_overlaps(lo_n, lo_d, hi_n, hi_d)
            J_lo_n, J_lo_d = H.a + 2 * H.b, H.c + 2 * H.d
            J_hi_n, J_hi_d = H.a + H.b, H.c + H.d
            inside = _frac_le(J_lo_n, J_lo_d, lo_n, lo_d) & _frac_le(hi_n, hi_d, J_hi_n, J_hi_d)
            escapes += int((~inside).sum())
    # first letters of length m <= total_length: disjoint among themselves
    if total_length > 1:
        heads = [letter_matrix((p, m)) for m in range(1, min(total_length, m_max) + 1) for p in range(2, p_max + 1)]
        arr = lambda f: np.array([f(H) for H in heads], dtype=np.int64)
        overlaps += _chunk_overlaps(arr(lambda H: H.a + 2 * H.b), arr(lambda H: H.c + 2 * H.d), arr(lambda H: H.a + H.b), arr(lambda H: H.c + H.d))
    return DisjointnessReport(total_length, count, overlaps, escapes)
