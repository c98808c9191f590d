"""Finite words over the countable alphabet {1, 2, 3, ...}.

A word is stored as a plain tuple of positive ints.  Digit ``p`` is the index
of the Markov interval ``J_p``; the continued-fraction digit of the same
symbol is ``p + 1`` (see :func:`cf_digit`).
"""

from __future__ import annotations

import itertools
import math
from typing import Iterable, Iterator, NamedTuple, Sequence

from .errors import BudgetError, DomainError

Word = tuple[int, ...]

#: default cap on the number of words a single enumeration may produce
DEFAULT_BUDGET = 10**8


def as_word(digits: Iterable[int] | str) -> Word:
    """Validate and normalise *digits* into a word tuple.

    Strings use the comma-separated wire format, e.g. ``"2,1,1,3"``.
    """
    if isinstance(digits, str):
        return parse_word(digits)
    w = tuple(int(p) for p in digits)
    if not w:
        raise DomainError("a word must contain at least one digit")
    if min(w) < 1:
        raise DomainError(f"digits must be >= 1, got {w}")
    return w


def parse_word(text: str) -> Word:
    parts = [s.strip() for s in text.split(",") if s.strip()]
    if not parts:
        raise DomainError(f"cannot parse an empty word from {text!r}")
    return as_word(int(s) for s in parts)


def format_word(w: Sequence[int]) -> str:
    return ",".join(str(int(p)) for p in w)


def cf_digit(p: int) -> int:
    """Continued-fraction digit ``d = p + 1`` of partition index *p*."""
    return int(p) + 1


def check_budget(count: int, budget: int | None = DEFAULT_BUDGET) -> None:
    if budget is not None and count > budget:
        raise BudgetError(f"enumeration of {count} words exceeds the budget of {budget}")


def enumerate_words(n: int, max_digit: int, budget: int | None = DEFAULT_BUDGET) -> Iterator[Word]:
    """Yield every word of length *n* with digits in ``1..max_digit``.

    Words come out in lexicographic order.  Raises :class:`BudgetError`
    before yielding anything if ``max_digit**n`` exceeds *budget*.
    """
    if n < 1 or max_digit < 1:
        raise DomainError("need n >= 1 and max_digit >= 1")
    check_budget(max_digit**n, budget)
    return itertools.product(range(1, max_digit + 1), repeat=n)


def cyclic_rotations(w: Sequence[int]) -> set[Word]:
    w = as_word(w)
    return {w[k:] + w[:k] for k in range(len(w))}


def minimal_rotation(w: Sequence[int]) -> Word:
    """Lexicographically least rotation; a canonical orbit label."""
    return min(cyclic_rotations(w))


def primitive_period(w: Sequence[int]) -> int:
    w = as_word(w)
    n = len(w)
    for k in range(1, n + 1):
        if n % k == 0 and w == w[k:] + w[:k]:
            return k
    return n  # pragma: no cover


class Distance(NamedTuple):
    value: float
    #: True when no disagreement was seen and *value* is only an upper bound
    upper_bound: bool


def word_distance(x_prefix: Sequence[int], y_prefix: Sequence[int]) -> Distance:
    """Distance ``exp(-k)`` with ``k`` the first (1-based) index of disagreement.

    When the common overlap shows no disagreement the true distance is at
    most ``exp(-(overlap + 1))``; that bound is returned with the flag set.
    """
    x, y = as_word(x_prefix), as_word(y_prefix)
    overlap = min(len(x), len(y))
    for k in range(overlap):
        if x[k] != y[k]:
            return Distance(math.exp(-(k + 1)), False)
    return Distance(math.exp(-(overlap + 1)), True)
