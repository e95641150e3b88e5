"""Occurrence of formulas in finite words, formula divisibility, the
pseudo-formula elimination behind the avoidability-exponent triviality test,
and the constructive (1+eps)-free witness for formulas with no nice divisor.

The backtracking matcher works on bytes for speed; all verdicts re-validate
through `validate_occurrence` so certificates are independently checkable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .formulas import (
    Formula,
    Pattern,
    as_formula,
    as_pattern,
    formula_to_pattern,
    render_var,
)
from .words import Word, as_word, is_alpha_free, rt

VariableCaps = "dict[int, int] | int"


@dataclass(frozen=True)
class OccurrenceMorphism:
    """A non-erasing morphism witnessing an occurrence (images over word
    letters) or a divisibility (images over the variables of the divisor's
    target)."""

    images: tuple[tuple[int, tuple[int, ...]], ...]
    target_kind: str = "word"  # "word" or "formula"

    def as_dict(self) -> dict[int, tuple[int, ...]]:
        return dict(self.images)

    def render(self) -> dict[str, str]:
        from .words import _DIGITS

        out = {}
        for v, img in self.images:
            if self.target_kind == "word":
                out[render_var(v)] = "".join(_DIGITS[c] for c in img)
            else:
                out[render_var(v)] = "".join(render_var(c) for c in img)
        return out

    def __str__(self) -> str:
        return ", ".join("%s->%s" % kv for kv in self.render().items())


def _bytes_of(letters) -> bytes:
    return bytes(letters)


def _normalize_caps(caps, variables, default: int) -> dict[int, int]:
    if caps is None:
        caps = default
    if isinstance(caps, int):
        out = {v: caps for v in variables}
    else:
        out = {v: caps.get(v, default) for v in variables}
    for v, c in out.items():
        if c < 1:
            raise ValueError("cap for %s must be >= 1" % render_var(v))
    return out


class _Matcher:
    """DFS occurrence search: fragments over variables, images drawn from the
    factors of one or more target words.

    Candidates are tried by (length, content); variables are assigned
    most-frequent-first (ties by id), so the returned morphism is the first
    valid assignment of a fixed deterministic exploration.
    """

    def __init__(self, fragments, targets: list[bytes], caps: dict[int, int]):
        self.fragments = [tuple(g) for g in fragments]
        self.targets = targets
        self.caps = caps
        self.variables = sorted({c for g in self.fragments for c in g})
        counts = {v: sum(g.count(v) for g in self.fragments) for v in self.variables}
        self.var_order = sorted(self.variables, key=lambda v: (-counts[v], v))
        self._member_memo: dict[bytes, bool] = {}
        self._occ_memo: dict[bytes, list[tuple[int, int]]] = {}
        self._cand_memo: dict[tuple, list[bytes]] = {}

    def is_factor(self, img: bytes) -> bool:
        hit = self._member_memo.get(img)
        if hit is None:
            hit = any(t.find(img) >= 0 for t in self.targets)
            self._member_memo[img] = hit
        return hit

    def occurrences(self, img: bytes) -> list[tuple[int, int]]:
        """(target index, position) of every occurrence of img."""
        hit = self._occ_memo.get(img)
        if hit is None:
            hit = []
            for ti, t in enumerate(self.targets):
                pos = t.find(img)
                while pos >= 0:
                    hit.append((ti, pos))
                    pos = t.find(img, pos + 1)
            self._occ_memo[img] = hit
        return hit

    def _runs_ok(self, sigma: dict[int, bytes], frags=None) -> bool:
        """Every maximal run of assigned variables in every fragment must map
        to a factor of some target."""
        for g in frags if frags is not None else self.fragments:
            run: list[bytes] = []
            for c in g:
                img = sigma.get(c)
                if img is None:
                    if len(run) > 1 and not self.is_factor(b"".join(run)):
                        return False
                    run = []
                else:
                    run.append(img)
            if run and not self.is_factor(b"".join(run)):
                return False
        return True

    def _candidates(self, v: int, sigma: dict[int, bytes]) -> list[bytes]:
        """Candidate images for v given the partial assignment.

        Preference order: a fragment placing v between two assigned runs
        (candidates are the gaps between context occurrences), then one
        assigned side (bounded length scan), then raw factor enumeration.
        """
        cap = self.caps[v]
        best = None  # (kind rank, left bytes, right bytes)
        for g in self.fragments:
            for i, c in enumerate(g):
                if c != v:
                    continue
                left: list[bytes] = []
                for j in range(i - 1, -1, -1):
                    img = sigma.get(g[j])
                    if img is None:
                        break
                    left.append(img)
                left_b = b"".join(reversed(left))
                right: list[bytes] = []
                for j in range(i + 1, len(g)):
                    img = sigma.get(g[j])
                    if img is None:
                        break
                    right.append(img)
                right_b = b"".join(right)
                kind = (0 if left_b and right_b else (1 if left_b or right_b else 2),
                        -(len(left_b) + len(right_b)))
                if best is None or kind < best[0]:
                    best = (kind, left_b, right_b)
        assert best is not None
        _, left_b, right_b = best
        memo_key = (v, left_b, right_b)
        hit = self._cand_memo.get(memo_key)
        if hit is not None:
            return hit
        out: set[bytes] = set()
        if left_b and right_b:
            for ti, lp in self.occurrences(left_b):
                start = lp + len(left_b)
                t = self.targets[ti]
                limit = min(len(t), start + cap + len(right_b))
                pos = t.find(right_b, start + 1, limit)
                while pos >= 0:
                    out.add(t[start:pos])
                    pos = t.find(right_b, pos + 1, limit)
        elif left_b or right_b:
            ctx = left_b or right_b
            for ti, pos in self.occurrences(ctx):
                t = self.targets[ti]
                if left_b:
                    start = pos + len(ctx)
                    for length in range(1, min(cap, len(t) - start) + 1):
                        out.add(t[start : start + length])
                else:
                    for length in range(1, min(cap, pos) + 1):
                        out.add(t[pos - length : pos])
        else:
            for t in self.targets:
                for i in range(len(t)):
                    for length in range(1, min(cap, len(t) - i) + 1):
                        out.add(t[i : i + length])
        result = sorted(out, key=lambda b: (len(b), b))
        self._cand_memo[memo_key] = result
        return result

    def search(self, sigma: dict[int, bytes] | None = None):
        sigma = dict(sigma or {})
        for img in sigma.values():
            if len(img) < 1:
                raise ValueError("occurrence morphisms are non-erasing")
        if not self._runs_ok(sigma):
            return None
        return self._search([v for v in self.var_order if v not in sigma], sigma)

    def _search(self, todo: list[int], sigma: dict[int, bytes]):
        if not todo:
            return dict(sigma)
        v, rest = todo[0], todo[1:]
        frags_v = [g for g in self.fragments if v in g]
        for img in self._candidates(v, sigma):
            if len(img) > self.caps[v]:
                continue
            sigma[v] = img
            if self._runs_ok(sigma, frags_v):
                hit = self._search(rest, sigma)
                if hit is not None:
                    return hit
            del sigma[v]
        return None


def _morphism_from(sigma: dict[int, bytes], kind: str) -> OccurrenceMorphism:
    images = tuple(sorted((v, tuple(img)) for v, img in sigma.items()))
    return OccurrenceMorphism(images, kind)


def find_occurrence(
    f: "Formula | str", w: "Word | str", caps=None
) -> OccurrenceMorphism | None:
    """An occurrence of f in w with image lengths within caps, or None.

    caps may be a single int, a per-variable dict, or None (cap |w|, exact but
    exponential; meant for desk-scale words)."""
    f = as_formula(f)
    w = as_word(w)
    capmap = _normalize_caps(caps, f.variables, default=max(1, len(w)))
    matcher = _Matcher(f.fragments, [_bytes_of(w.letters)], capmap)
    sigma = matcher.search()
    return None if sigma is None else _morphism_from(sigma, "word")


def contains(f: "Formula | str", w: "Word | str") -> bool:
    """Exact occurrence test with the implied cap |w|."""
    return find_occurrence(f, w, None) is not None


def validate_occurrence(f: "Formula | str", w: "Word | str", m: OccurrenceMorphism) -> bool:
    """Re-check a morphism: non-erasing, every variable covered, and every
    fragment image a factor of w."""
    f = as_formula(f)
    w = as_word(w)
    images = m.as_dict()
    if any(v not in images or not images[v] for v in f.variables):
        return False
    target = _bytes_of(w.letters)
    for g in f.fragments:
        img = b"".join(_bytes_of(images[c]) for c in g)
        if target.find(img) < 0:
            return False
    return True


def divides(f: "Formula | str", g: "Formula | Pattern | str") -> OccurrenceMorphism | None:
    """Divisibility test f <= g: a non-erasing morphism from vars(f) to
    non-empty variable words with every fragment image a factor of a fragment
    of g, or None.

    Image lengths are bounded by g's longest fragment (a longer image fits in
    no fragment). A Pattern target is taken raw, as a single fragment: Zimin
    targets Z^n(p) must keep their fresh variables, which normalization would
    split away."""
    f = as_formula(f)
    if isinstance(g, Pattern):
        targets = [g.vars]
    elif isinstance(g, str) and "." not in g:
        targets = [as_pattern(g).vars]
    else:
        targets = list(as_formula(g).fragments)
    if not targets:
        return None if f.fragments else _morphism_from({}, "formula")
    maxlen = max(len(t) for t in targets)
    capmap = _normalize_caps(None, f.variables, default=maxlen)
    matcher = _Matcher(f.fragments, [_bytes_of(t) for t in targets], capmap)
    sigma = matcher.search()
    return None if sigma is None else _morphism_from(sigma, "formula")


def validate_divisibility(
    f: "Formula | str", g: "Formula | Pattern | str", m: OccurrenceMorphism
) -> bool:
    f = as_formula(f)
    if isinstance(g, Pattern):
        targets = [g.vars]
    elif isinstance(g, str) and "." not in g:
        targets = [as_pattern(g).vars]
    else:
        targets = list(as_formula(g).fragments)
    images = m.as_dict()
    if any(v not in images or not images[v] for v in f.variables):
        return False
    tbytes = [_bytes_of(t) for t in targets]
    for frag in f.fragments:
        img = b"".join(_bytes_of(images[c]) for c in frag)
        if not any(t.find(img) >= 0 for t in tbytes):
            return False
    return True


@dataclass(frozen=True)
class AETriviality:
    """Result of the pseudo-formula elimination: either the full elimination
    order (AE is trivial) or the stuck core, a nice formula dividing the
    input (AE is non-trivial)."""

    nontrivial: bool
    elimination_order: tuple[int, ...] | None
    core: Formula | None


def _eliminate(pattern_vars: tuple[int, ...]):
    """Run the pseudo-formula elimination from the single-fragment pseudo
    formula [p]. Returns (order, states, core_fragments): states[i] holds the
    fragments before eliminating the i-th variable; core_fragments is None on
    full elimination.

    Pseudo-formulas are never normalized: eliminating a variable just splits
    fragments at its occurrences. Eliminability (at most one occurrence in
    every fragment) is monotone under elimination, so the greedy lowest-id
    choice loses nothing.
    """
    frags: set[tuple[int, ...]] = {tuple(pattern_vars)}
    order: list[int] = []
    states: list[set[tuple[int, ...]]] = []
    while True:
        variables = sorted({c for g in frags for c in g})
        if not variables:
            return order, states, None
        eliminable = [v for v in variables if all(g.count(v) <= 1 for g in frags)]
        if not eliminable:
            return order, states, frags
        v = eliminable[0]
        order.append(v)
        states.append(set(frags))
        nxt: set[tuple[int, ...]] = set()
        for g in frags:
            piece: list[int] = []
            for c in g:
                if c == v:
                    if piece:
                        nxt.add(tuple(piece))
                    piece = []
                else:
                    piece.append(c)
            if piece:
                nxt.add(tuple(piece))
        frags = nxt


def ae_is_nontrivial(f: "Formula | str") -> AETriviality:
    """AE(f) > 1 iff some nice formula divides f; equivalently the pseudo
    formula elimination on the associated pattern gets stuck, and the stuck
    core is such a nice divisor."""
    f = as_formula(f)
    if f.is_empty:
        return AETriviality(False, (), None)
    p = formula_to_pattern(f)
    order, _, core = _eliminate(p.vars)
    if core is None:
        return AETriviality(False, tuple(order), None)
    return AETriviality(True, None, Formula.make(core))


MAX_WITNESS_ALPHABET = 16


def construct_witness(f: "Formula | str", eps: Fraction) -> tuple[Word, OccurrenceMorphism]:
    """A finite (1+eps)-free word containing an occurrence of f, for formulas
    with no nice divisor.

    Construction: eliminate variables of the associated pattern p in order
    V_0, V_1, ...; map V_i to a Dejean-word prefix over its own disjoint
    alphabet, sized so that the gap below any possible repetition outweighs
    the repeated part (|w_i| = floor(1/eps) * max fragment weight after the
    first i+1 eliminations, last image length 1); flank the image of p with a
    single fresh letter on each side. The output is validated with
    is_alpha_free and against the occurrence before returning.
    """
    from .search import dejean_prefix

    f = as_formula(f)
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be > 0")
    res = ae_is_nontrivial(f)
    if res.nontrivial:
        raise ValueError(
            "formula has the nice divisor %s; no (1+eps)-free word contains it "
            "for small eps" % res.core
        )
    if f.is_empty:
        raise ValueError("the empty formula has no witness word")
    p = formula_to_pattern(f)
    order, states, core = _eliminate(p.vars)
    assert core is None and len(order) == p.var_count

    k = max(1, math.floor(1 / eps))
    alpha = 1 + eps
    s = next((n for n in range(2, MAX_WITNESS_ALPHABET + 1) if rt(n) < alpha), None)
    if s is None:
        raise ValueError(
            "eps too small: no Dejean generator below alphabet %d has "
            "threshold under 1+eps" % MAX_WITNESS_ALPHABET
        )

    # Image lengths, computed from the last eliminated variable backwards.
    length: dict[int, int] = {order[-1]: 1}
    for i in range(len(order) - 2, -1, -1):
        after = states[i + 1]  # fragments once V_0..V_i are gone
        weight = max((sum(length[c] for c in g) for g in after), default=0)
        length[order[i]] = max(1, k * weight)

    images: dict[int, tuple[int, ...]] = {}
    for rank, v in enumerate(order):
        base = rank * s
        block = dejean_prefix(s, length[v])
        images[v] = tuple(base + c for c in block.letters)

    flank = p.var_count * s
    letters: list[int] = [flank]
    for c in p.vars:
        letters.extend(images[c])
    letters.append(flank)
    word = Word(tuple(letters), flank + 1)

    if not is_alpha_free(word, alpha, plus=False):
        raise RuntimeError("constructed witness failed the freeness validator")
    morphism = _morphism_from(
        {v: _bytes_of(images[v]) for v in f.variables}, "word"
    )
    if not validate_occurrence(f, word, morphism):
        raise RuntimeError("constructed witness failed the occurrence validator")
    return word, morphism
