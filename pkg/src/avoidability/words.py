"""Finite words over small integer alphabets: exponents, freeness, repetition threshold.

Exponents and thresholds are exact `fractions.Fraction` values throughout; no
decision in this module ever touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

try:
    from numba import njit as _njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"

# Letters are unbounded ints internally, but the text format caps them at 36.
MAX_TEXT_LETTER = len(_DIGITS)


@dataclass(frozen=True)
class Word:
    """An immutable finite word: a tuple of letters drawn from [0, alphabet_size)."""

    letters: tuple[int, ...]
    alphabet_size: int

    def __post_init__(self):
        if self.alphabet_size < 1:
            raise ValueError("alphabet_size must be >= 1")
        if any(c < 0 or c >= self.alphabet_size for c in self.letters):
            raise ValueError("letter out of range for alphabet size %d" % self.alphabet_size)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    def factor(self, start: int, end: int) -> "Word":
        return Word(self.letters[start:end], self.alphabet_size)

    @property
    def text(self) -> str:
        if any(c >= MAX_TEXT_LETTER for c in self.letters):
            raise ValueError("letters above %d have no text form" % (MAX_TEXT_LETTER - 1))
        body = "".join(_DIGITS[c] for c in self.letters)
        inferred = (max(self.letters) + 1) if self.letters else 1
        if self.alphabet_size == inferred:
            return body
        return "%s@%d" % (body, self.alphabet_size)

    def __str__(self) -> str:
        return self.text


def parse_word(text: str) -> Word:
    """Parse the text format: letters 0-9a-z, optional '@k' alphabet suffix."""
    body, sep, suffix = text.partition("@")
    letters = []
    for ch in body:
        idx = _DIGITS.find(ch)
        if idx < 0:
            raise ValueError("invalid letter %r in word %r" % (ch, text))
        letters.append(idx)
    if sep:
        k = int(suffix)
    else:
        k = (max(letters) + 1) if letters else 1
    return Word(tuple(letters), k)


def as_word(w: "Word | str") -> Word:
    return w if isinstance(w, Word) else parse_word(w)


def parse_rational(text: str) -> Fraction:
    """Parse 'p/q' or a plain integer."""
    return Fraction(text)


@dataclass(frozen=True)
class RepetitionReport:
    """A repetition in a word: the factor of length exponent*period at `position`
    has period `period`."""

    exponent: Fraction
    period: int
    position: int


def _match_runs(letters: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Starts and lengths of maximal runs of positions j with w[j] == w[j+p]."""
    eq = letters[:-p] == letters[p:]
    if not eq.any():
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    padded = np.concatenate(([False], eq, [False]))
    d = np.diff(padded.astype(np.int8))
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1)
    return starts, ends - starts


def max_exponent(w: "Word | str") -> RepetitionReport | None:
    """The repetition of maximal exponent in w, or None if w has no repetition
    of exponent > 1 (in particular when |w| <= 1).

    Ties are broken by smallest period, then smallest position, so the report
    is deterministic.
    """
    w = as_word(w)
    n = len(w)
    if n <= 1:
        return None
    letters = np.asarray(w.letters, dtype=np.int64)
    best: RepetitionReport | None = None
    for p in range(1, n):
        starts, lengths = _match_runs(letters, p)
        if len(starts) == 0:
            continue
        m = int(lengths.max())
        # exponent (p+m)/p; compare exactly against the current best
        if best is None or (p + m) * best.exponent.denominator > best.exponent.numerator * p:
            pos = int(starts[int(np.argmax(lengths == m))])
            best = RepetitionReport(Fraction(p + m, p), p, pos)
    return best


def _violation_targets(periods: np.ndarray, num: int, den: int, strict: bool) -> np.ndarray:
    """Smallest backward-match count m making (p+m)/p exceed num/den (reach
    it, when strict is False): the repetition (p, m) violates iff m >= target."""
    excess = periods * (num - den)
    if strict:
        return excess // den + 1
    return -((-excess) // den)


if _HAVE_NUMBA:

    @_njit(cache=True)
    def _scan_repetitions(letters, num, den, strict, min_period, pmax):  # pragma: no cover
        n = letters.size
        for p in range(min_period, pmax + 1):
            excess = p * (num - den)
            if strict:
                target = excess // den + 1
            else:
                target = -((-excess) // den)
            run = 0
            for j in range(n - p):
                if letters[j] == letters[j + p]:
                    run += 1
                    if run >= target:
                        return True
                else:
                    run = 0
        return False


def _has_repetition(w: Word, bound: Fraction, strict: bool, min_period: int = 1) -> bool:
    """True iff some factor of w has a period p >= min_period whose exponent
    exceeds `bound` (or reaches it, when strict is False).

    All periods of a factor count, not only the minimal one. A violating
    repetition of period p needs length about p*num/den, so periods beyond
    n*den/num are skipped.
    """
    n = len(w)
    num, den = bound.numerator, bound.denominator
    if num <= den:
        raise ValueError("exponent bound must be > 1")
    pmax = min(n - 1, n * den // num + 1)
    if n <= min_period or pmax < min_period:
        return False
    if _HAVE_NUMBA:
        letters = np.asarray(w.letters, dtype=np.int64)
        return bool(_scan_repetitions(letters, num, den, strict, min_period, pmax))
    letters = np.asarray(w.letters, dtype=np.int32)
    periods = np.arange(min_period, pmax + 1, dtype=np.int32)
    targets = _violation_targets(periods.astype(np.int64), num, den, strict)
    positions = np.arange(n, dtype=np.int32)[None, :]
    shifted = positions + periods[:, None]
    valid = shifted < n
    eq = (letters[None, :] == letters[np.where(valid, shifted, 0)]) & valid
    # run length of consecutive matches ending at each position
    last_miss = np.maximum.accumulate(np.where(eq, -1, positions), axis=1)
    runs = np.where(eq, positions - last_miss, 0)
    return bool((runs >= targets[:, None]).any())


def is_alpha_free(w: "Word | str", alpha: Fraction, plus: bool = False) -> bool:
    """alpha-freeness: no factor of exponent >= alpha (plus=False) or > alpha
    (plus=True, the 'alpha+' convention).

    The plus flag is explicit everywhere; silently coercing between the two
    conventions would be a correctness bug.
    """
    w = as_word(w)
    alpha = Fraction(alpha)
    if alpha <= 1:
        raise ValueError("alpha must be > 1")
    return not _has_repetition(w, alpha, strict=plus)


def is_beta_n_free(w: "Word | str", beta: Fraction, n: int, plus: bool = True) -> bool:
    """(beta,n)-freeness: no repetition with period >= n and exponent > beta
    (plus=True) or >= beta (plus=False).

    Every period of a factor counts, not only the minimal one.
    """
    w = as_word(w)
    beta = Fraction(beta)
    if beta <= 1:
        raise ValueError("beta must be > 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    return not _has_repetition(w, beta, strict=plus, min_period=n)


def rt(n: int) -> Fraction:
    """Dejean's repetition threshold RT(n): 2, 7/4, 7/5, then n/(n-1).

    The two exceptional values sit at n=3 and n=4; swapping them is refuted
    by search (no ternary (7/5+)-free word of length 5 exists)."""
    if n < 2:
        raise ValueError("repetition threshold needs n >= 2")
    if n == 2:
        return Fraction(2)
    if n == 3:
        return Fraction(7, 4)
    if n == 4:
        return Fraction(7, 5)
    return Fraction(n, n - 1)


def factors(w: "Word | str", length: int) -> set[Word]:
    """All distinct factors of w of exactly the given length."""
    w = as_word(w)
    if length < 1:
        raise ValueError("factor length must be >= 1")
    return {
        Word(w.letters[i : i + length], w.alphabet_size)
        for i in range(len(w) - length + 1)
    }


def consecutive_distance_ok(w: "Word | str", a: int, d: int) -> bool:
    """True iff no two consecutive occurrences of letter a are at distance exactly d."""
    w = as_word(w)
    if d < 1:
        raise ValueError("distance must be >= 1")
    prev = None
    for i, c in enumerate(w.letters):
        if c != a:
            continue
        if prev is not None and i - prev == d:
            return False
        prev = i
    return True
