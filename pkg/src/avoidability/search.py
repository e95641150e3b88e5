"""Exhaustive backtracking provers over small alphabets under combined
constraints (formulas to avoid, forbidden factors, freeness, letter-distance
rules), Dejean-word generation, and bounded factor-language comparison.

The DFS extends words letter by letter with incremental constraint checks:
only suffix-touching repetitions, factors, and occurrences are re-examined per
extension, and a periodic full re-check guards against drift between the
incremental and the plain checkers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .formulas import Formula, as_formula
from .occurrence import _Matcher, _normalize_caps, find_occurrence
from .words import Word, as_word, is_alpha_free, is_beta_n_free, rt

# Fixed ternary words anchoring the recurrent-word characterizations of w3
# and b3 (every long-enough avoiding word contains one of the three rotations
# of the anchor), and the corresponding widest formula of each equivalence.
W3_ANCHOR = "210201202101201021"
B3_ANCHOR = "20210121020120"
W3_FORMULA = "ABA.ABCBA.ACA.ACB.BCA"
B3_FORMULAS = ("ABCA.ABA.ACA.ACB.CBA", "ABCA.ABA.ABCBA.ACB")

_SIGMA = (1, 2, 0)


def sigma_word(w: "Word | str", times: int = 1) -> Word:
    """Apply the cyclic permutation 0->1->2->0 of the ternary alphabet."""
    w = as_word(w)
    letters = w.letters
    for _ in range(times):
        letters = tuple(_SIGMA[c] for c in letters)
    return Word(letters, max(3, w.alphabet_size))


@dataclass(frozen=True)
class ConstraintSet:
    """Constraints all over the same alphabet. `formulas` pairs each formula
    with optional per-variable image caps (None means uncapped, image lengths
    bounded only by the word). Freeness entries are (alpha, plus) and
    (beta, n, plus); distance rules are (letter, forbidden distance)."""

    alphabet_size: int
    formulas: tuple = ()
    forbidden_factors: tuple = ()
    freeness: "tuple[Fraction, bool] | None" = None
    bounded_freeness: "tuple[Fraction, int, bool] | None" = None
    distance_rules: tuple = ()
    depth_limit: int = 500

    def __post_init__(self):
        if self.depth_limit < 1:
            raise ValueError("depth limit must be >= 1")
        if self.alphabet_size < 1:
            raise ValueError("alphabet size must be >= 1")

    def permutation_invariant(self) -> bool:
        return not self.forbidden_factors and not self.distance_rules

    def describe(self) -> dict:
        out: dict = {"alphabet_size": self.alphabet_size, "depth_limit": self.depth_limit}
        if self.formulas:
            out["avoid"] = [
                {"formula": as_formula(f).text, "caps": caps if not isinstance(caps, dict)
                 else {str(k): v for k, v in caps.items()}}
                for f, caps in self.formulas
            ]
        if self.forbidden_factors:
            out["forbid"] = [as_word(w).text for w in self.forbidden_factors]
        if self.freeness:
            a, plus = self.freeness
            out["free"] = str(a) + ("+" if plus else "")
        if self.bounded_freeness:
            b, n, plus = self.bounded_freeness
            out["bfree"] = "%s%s,%d" % (b, "+" if plus else "", n)
        if self.distance_rules:
            out["distance"] = ["letter %d at distance %d" % r for r in self.distance_rules]
        return out


@dataclass(frozen=True)
class ExhaustResult:
    """verdict 'exhausted': the DFS closed, no word of length max_length+1
    satisfies the constraints. 'reached_limit': the witness survives at the
    depth limit. 'budget_exhausted' is never conflated with either."""

    verdict: str
    max_length: int
    leaf_count: int
    node_count: int
    witness: Word | None
    symmetry_reduced: bool

    def to_json(self, constraints: ConstraintSet | None = None) -> str:
        body = {
            "verdict": self.verdict,
            "max_length": self.max_length,
            "leaf_count": self.leaf_count,
            "node_count": self.node_count,
            "witness": self.witness.text if self.witness else None,
            "symmetry_reduced": self.symmetry_reduced,
        }
        if constraints is not None:
            body["constraints"] = constraints.describe()
        return json.dumps(body)


class _Engine:
    def __init__(self, cset: ConstraintSet, prefix: tuple[int, ...],
                 symmetry: bool, node_budget: int, recheck_every: int):
        self.cset = cset
        self.k = cset.alphabet_size
        self.w = bytearray(prefix)
        self.base = len(prefix)
        self.node_budget = node_budget
        self.recheck_every = recheck_every
        self.formulas = []
        for f, caps in cset.formulas:
            f = as_formula(f)
            capmap = _normalize_caps(caps, f.variables, default=cset.depth_limit)
            self.formulas.append((f, capmap))
        self.forbidden = [bytes(as_word(x).letters) for x in cset.forbidden_factors]
        self.free = None
        if cset.freeness:
            a, plus = cset.freeness
            a = Fraction(a)
            self.free = (a.numerator, a.denominator, plus, 1)
        self.bfree = None
        if cset.bounded_freeness:
            b, n, plus = cset.bounded_freeness
            b = Fraction(b)
            self.bfree = (b.numerator, b.denominator, plus, n)
        self.positions = [[] for _ in range(self.k)]
        for i, c in enumerate(prefix):
            self.positions[c].append(i)
        self.max_used = [max(prefix, default=-1)]

    # -- incremental checks -------------------------------------------------

    def _suffix_repetition(self, spec) -> bool:
        """A repetition ending at the last letter that violates the freeness
        spec (num/den exponent bound, plus flag, minimal period)."""
        num, den, plus, min_p = spec
        w = self.w
        n = len(w)
        last = w[-1]
        for p in range(min_p, n):
            if w[n - 1 - p] != last:
                continue
            # smallest violating backward-match count for this period
            q, r = divmod(p * (num - den), den)
            target = q + 1 if (plus or r) else q
            if target <= 1:
                return True
            m = 1
            j = n - 2 - p
            while j >= 0 and w[j] == w[j + p]:
                m += 1
                if m >= target:
                    return True
                j -= 1
        return False

    def _new_occurrence(self, f: Formula, caps: dict[int, int]) -> bool:
        """An occurrence of f with some fragment image equal to a suffix of w
        (any occurrence created by the last letter has this shape)."""
        w = bytes(self.w)
        n = len(w)
        matcher = _Matcher(f.fragments, [w], caps)
        for frag in f.fragments:
            capsum = min(n, sum(caps[c] for c in frag))
            for ell in range(len(frag), capsum + 1):
                for sigma in self._parses(frag, w[n - ell:], caps):
                    if matcher.search(sigma) is not None:
                        return True
        return False

    @staticmethod
    def _parses(frag, s: bytes, caps):
        """Assignments mapping the fragment exactly onto s.

        When choosing a length for a new variable, the tail of the fragment
        often pins it down exactly (all later positions carry this variable or
        already-assigned ones), so the length range collapses to one candidate
        instead of a scan; repeated-variable fragments parse in near-linear
        time this way."""
        L = len(s)

        def rec(i, pos, sigma):
            if i == len(frag):
                if pos == L:
                    yield dict(sigma)
                return
            var = frag[i]
            img = sigma.get(var)
            if img is not None:
                end = pos + len(img)
                if s[pos:end] == img and end <= L:
                    yield from rec(i + 1, end, sigma)
                return
            count = 1  # occurrences of var from position i on
            fixed = 0  # total length already pinned by assigned variables
            free = 0  # later positions of other still-unassigned variables
            for j in range(i + 1, len(frag)):
                u = frag[j]
                if u == var:
                    count += 1
                elif u in sigma:
                    fixed += len(sigma[u])
                else:
                    free += 1
            budget = L - pos - fixed - free
            if free == 0:
                lengths = [budget // count] if budget % count == 0 and budget > 0 else []
            else:
                lengths = range(1, budget // count + 1)
            cap = caps[var]
            for length in lengths:
                if length < 1 or length > cap:
                    continue
                sigma[var] = s[pos : pos + length]
                yield from rec(i + 1, pos + length, sigma)
                del sigma[var]

        yield from rec(0, 0, {})

    def check_new(self) -> bool:
        """All constraints still hold after the push of the last letter."""
        w = self.w
        for fb in self.forbidden:
            if w.endswith(fb):
                return False
        n = len(w)
        last = w[-1]
        for letter, d in self.cset.distance_rules:
            if last == letter:
                pos = self.positions[letter]
                if len(pos) >= 2 and pos[-1] - pos[-2] == d:
                    return False
        if self.free and self._suffix_repetition(self.free):
            return False
        if self.bfree and self._suffix_repetition(self.bfree):
            return False
        for f, caps in self.formulas:
            if self._new_occurrence(f, caps):
                return False
        return True

    def full_check(self) -> bool:
        """Plain non-incremental check of every constraint on the whole word."""
        word = Word(tuple(self.w), self.k)
        for fb in self.cset.forbidden_factors:
            fb = as_word(fb)
            if bytes(self.w).find(bytes(fb.letters)) >= 0:
                return False
        for letter, d in self.cset.distance_rules:
            prev = None
            for i, c in enumerate(self.w):
                if c == letter:
                    if prev is not None and i - prev == d:
                        return False
                    prev = i
        if self.cset.freeness:
            a, plus = self.cset.freeness
            if not is_alpha_free(word, Fraction(a), plus):
                return False
        if self.cset.bounded_freeness:
            b, n, plus = self.cset.bounded_freeness
            if not is_beta_n_free(word, Fraction(b), n, plus):
                return False
        for f, caps in self.formulas:
            if find_occurrence(f, word, caps) is not None:
                return False
        return True

    # -- DFS ----------------------------------------------------------------

    def push(self, letter: int) -> None:
        self.w.append(letter)
        self.positions[letter].append(len(self.w) - 1)
        self.max_used.append(max(self.max_used[-1], letter))

    def pop(self) -> None:
        letter = self.w.pop()
        self.positions[letter].pop()
        self.max_used.pop()

    def run(self, symmetry: bool) -> ExhaustResult:
        limit = self.cset.depth_limit
        nodes = 0
        leaves = 0
        max_len = len(self.w)
        if len(self.w) >= limit:
            return ExhaustResult(
                "reached_limit", len(self.w), 0, 0, Word(tuple(self.w), self.k), symmetry
            )
        stack = [0]
        is_leaf = [True]
        while stack:
            advanced = False
            t = stack[-1]
            while t < self.k:
                if symmetry and t > self.max_used[-1] + 1:
                    t = self.k
                    break
                nodes += 1
                if nodes > self.node_budget:
                    return ExhaustResult(
                        "budget_exhausted", max_len, leaves, nodes, None, symmetry
                    )
                self.push(t)
                ok = self.check_new()
                if ok and self.recheck_every and nodes % self.recheck_every == 0:
                    if not self.full_check():
                        raise RuntimeError(
                            "incremental/full checker drift at %r"
                            % Word(tuple(self.w), self.k).text
                        )
                if ok:
                    stack[-1] = t + 1
                    is_leaf[-1] = False
                    stack.append(0)
                    is_leaf.append(True)
                    max_len = max(max_len, len(self.w))
                    if len(self.w) >= limit:
                        return ExhaustResult(
                            "reached_limit", max_len, leaves, nodes,
                            Word(tuple(self.w), self.k), symmetry,
                        )
                    advanced = True
                    break
                self.pop()
                t += 1
            if not advanced:
                if is_leaf.pop():
                    leaves += 1
                stack.pop()
                if stack:
                    self.pop()
        return ExhaustResult("exhausted", max_len, leaves, nodes, None, symmetry)


def exhaust(
    c: ConstraintSet,
    node_budget: int = 50_000_000,
    symmetry_reduction: bool = True,
    recheck_every: int = 32,
) -> ExhaustResult:
    """Deterministic DFS in letter order over all words satisfying c.

    Symmetry reduction (restricting to lexicographically least representatives
    under alphabet permutation) applies only when every constraint is
    permutation-invariant. An 'exhausted' verdict proves that every infinite
    word over the alphabet violates some constraint."""
    symmetry = symmetry_reduction and c.permutation_invariant()
    engine = _Engine(c, (), symmetry, node_budget, recheck_every)
    return engine.run(symmetry)


def exhaust_with_prefix(
    c: ConstraintSet,
    prefix: "Word | str",
    node_budget: int = 50_000_000,
    recheck_every: int = 32,
) -> ExhaustResult:
    """DFS restricted to extensions of the given prefix (no symmetry
    reduction: a fixed prefix breaks permutation invariance)."""
    prefix = as_word(prefix)
    probe = _Engine(c, (), False, node_budget, recheck_every)
    for letter in prefix.letters:
        probe.push(letter)
        if not probe.check_new():
            raise ValueError("prefix %r violates the constraints" % prefix.text)
    engine = _Engine(c, prefix.letters, False, node_budget, recheck_every)
    return engine.run(False)


def exhaust_capped(
    k: int,
    f: "Formula | str",
    caps,
    square_free: bool = True,
    depth_limit: int = 500,
    node_budget: int = 50_000_000,
    recheck_every: int = 32,
) -> ExhaustResult:
    """Exhaust where the formula constraint only forbids occurrences within
    the given per-variable caps, optionally under square-freeness."""
    cset = ConstraintSet(
        alphabet_size=k,
        formulas=((as_formula(f), caps),),
        freeness=(Fraction(2), False) if square_free else None,
        depth_limit=depth_limit,
    )
    return exhaust(cset, node_budget=node_budget, recheck_every=recheck_every)


_dejean_cache: dict[tuple[int, int], Word] = {}


def dejean_prefix(s: int, length: int, node_budget: int = 20_000_000) -> Word:
    """The lexicographically least RT(s)+-free word of the given length over
    the s-letter alphabet, by depth-first backtracking."""
    if s < 2:
        raise ValueError("Dejean words need alphabet size >= 2")
    if length < 0:
        raise ValueError("length must be >= 0")
    hit = _dejean_cache.get((s, length))
    if hit is not None:
        return hit
    threshold = rt(s)
    cset = ConstraintSet(
        alphabet_size=s, freeness=(threshold, True), depth_limit=length
    )
    engine = _Engine(cset, (), False, node_budget, recheck_every=0)
    result = engine.run(False)
    if result.verdict == "budget_exhausted":
        raise RuntimeError("Dejean search budget exhausted (s=%d, length=%d)" % (s, length))
    if result.verdict != "reached_limit":
        raise RuntimeError("no RT(%d)+-free word of length %d found" % (s, length))
    word = result.witness
    _dejean_cache[(s, length)] = word
    return word


def language_factors(
    c: ConstraintSet, ell: int, length: int, node_budget: int = 50_000_000
) -> set[Word]:
    """Length-ell factors occurring in at least one length-`length` word
    satisfying c. This over-approximates the factor set of the recurrent words
    of the constraint language; grow `length` until the set stabilizes."""
    if ell > length:
        raise ValueError("factor length exceeds word length")
    out: set[bytes] = set()
    cset = ConstraintSet(
        alphabet_size=c.alphabet_size,
        formulas=c.formulas,
        forbidden_factors=c.forbidden_factors,
        freeness=c.freeness,
        bounded_freeness=c.bounded_freeness,
        distance_rules=c.distance_rules,
        depth_limit=length,
    )

    engine = _Engine(cset, (), False, node_budget, recheck_every=0)
    # Depth-limited DFS, collecting factors at every word that reaches `length`.
    stack = [0]
    nodes = 0
    while stack:
        advanced = False
        t = stack[-1]
        while t < cset.alphabet_size:
            nodes += 1
            if nodes > node_budget:
                raise RuntimeError("language_factors budget exhausted")
            engine.push(t)
            if engine.check_new():
                stack[-1] = t + 1
                if len(engine.w) == length:
                    w = bytes(engine.w)
                    for i in range(length - ell + 1):
                        out.add(w[i : i + ell])
                    engine.pop()
                    t = stack[-1]
                    continue
                stack.append(0)
                advanced = True
                break
            engine.pop()
            t += 1
        if not advanced:
            stack.pop()
            if stack:
                engine.pop()
    return {Word(tuple(b), c.alphabet_size) for b in out}


def stabilized_language_factors(
    c: ConstraintSet, ell: int, start: int, step: int, max_length: int
) -> tuple[set[Word], int]:
    """Grow the word length until the factor set stops changing; returns the
    set and the length at which it stabilized."""
    prev = language_factors(c, ell, start)
    length = start
    while length + step <= max_length:
        nxt = language_factors(c, ell, length + step)
        if nxt == prev:
            return prev, length + step
        prev = nxt
        length += step
    raise RuntimeError("factor language did not stabilize by length %d" % max_length)


@dataclass(frozen=True)
class LanguageComparison:
    equal: bool
    only_left: tuple[Word, ...]
    only_right: tuple[Word, ...]


def compare_languages(aset: set[Word], bset: set[Word]) -> LanguageComparison:
    """Set equality verdict with the symmetric difference listed."""
    lengths = {len(w) for w in aset} | {len(w) for w in bset}
    if len(lengths) > 1:
        raise ValueError("compared factor sets must share one factor length")
    only_a = tuple(sorted(aset - bset, key=lambda w: w.letters))
    only_b = tuple(sorted(bset - aset, key=lambda w: w.letters))
    return LanguageComparison(not only_a and not only_b, only_a, only_b)


def free_word_leaves(s: int, alpha: Fraction, plus: bool, max_len: int):
    """Yield every maximal alpha(+)-free word over the s-letter alphabet of
    length <= max_len (maximal: at max_len, or with no free extension). Every
    shorter free word is a prefix of one of these."""
    cset = ConstraintSet(alphabet_size=s, freeness=(Fraction(alpha), plus),
                         depth_limit=max_len)
    engine = _Engine(cset, (), False, 10**12, recheck_every=0)
    stack = [0]
    is_leaf = [True]
    while stack:
        advanced = False
        t = stack[-1]
        while t < s:
            engine.push(t)
            if engine.check_new():
                is_leaf[-1] = False
                stack[-1] = t + 1
                if len(engine.w) == max_len:
                    yield Word(tuple(engine.w), s)
                    engine.pop()
                    t = stack[-1]
                    continue
                stack.append(0)
                is_leaf.append(True)
                advanced = True
                break
            engine.pop()
            t += 1
        if not advanced:
            if is_leaf.pop() and engine.w:
                # dead end below the length cap: maximal word
                yield Word(tuple(engine.w), s)
            stack.pop()
            if stack:
                engine.pop()
