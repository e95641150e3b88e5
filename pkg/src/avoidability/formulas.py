"""Patterns, formulas and fragments: parsing, normalization, Zimin closure,
splitting, structural classification, and the xyx-formula / digraph dictionary.

Variables are dense small ints rendered as capital letters A, B, C, ...
Formula equality is structural: fragments are held in a canonical form that is
invariant under variable renaming and fragment reordering.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field

Fragment = tuple[int, ...]

_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def render_var(v: int) -> str:
    if v >= len(_LETTERS):
        raise ValueError("more than 26 variables have no text form")
    return _LETTERS[v]


def _render_frag(frag: Fragment) -> str:
    return "".join(render_var(v) for v in frag)


@dataclass(frozen=True)
class Pattern:
    """A non-empty word over variables. Isolated variables are permitted."""

    vars: tuple[int, ...]

    def __post_init__(self):
        if not self.vars:
            raise ValueError("pattern must be non-empty")

    def __len__(self) -> int:
        return len(self.vars)

    @property
    def var_count(self) -> int:
        return len(set(self.vars))

    @property
    def text(self) -> str:
        return _render_frag(self.vars)

    def __str__(self) -> str:
        return self.text


def parse_pattern(text: str) -> Pattern:
    return Pattern(tuple(_parse_frag(text)))


def _parse_frag(text: str) -> Fragment:
    if not text:
        raise ValueError("empty fragment")
    out = []
    for ch in text:
        idx = _LETTERS.find(ch)
        if idx < 0:
            raise ValueError("invalid variable %r (expected capital letter)" % ch)
        out.append(idx)
    return tuple(out)


def _is_factor(needle: Fragment, hay: Fragment) -> bool:
    n, h = len(needle), len(hay)
    if n > h:
        return False
    return any(hay[i : i + n] == needle for i in range(h - n + 1))


def _canonical_fragments(frags: frozenset[Fragment]) -> tuple[Fragment, ...]:
    """The least sorted fragment list over all bijective renamings of variables.

    Built fragment-by-fragment: within the output, variables are numbered
    densely by first appearance, so each remaining fragment has exactly one
    candidate image under the partial renaming; ties (equal images reached by
    different renamings) are branched on.
    """
    best: list[Fragment] | None = None

    def rec(remaining: frozenset[Fragment], mapping: dict[int, int], next_id: int,
            acc: list[Fragment]) -> None:
        nonlocal best
        if not remaining:
            cand = list(acc)
            if best is None or cand < best:
                best = cand
            return
        images = {}
        for g in remaining:
            m = dict(mapping)
            nid = next_id
            img = []
            for c in g:
                if c not in m:
                    m[c] = nid
                    nid += 1
                img.append(m[c])
            images[g] = (tuple(img), m, nid)
        lo = min(img for img, _, _ in images.values())
        if best is not None:
            i = len(acc)
            prefix = acc + [lo]
            if prefix > best[: i + 1]:
                return
        for g, (img, m, nid) in images.items():
            if img == lo:
                rec(remaining - {g}, m, nid, acc + [img])

    rec(frags, {}, 0, [])
    assert best is not None
    assert best == sorted(best)
    return tuple(best)


def stable_normalize(fragments) -> frozenset[Fragment]:
    """Apply the formula axioms until stable, without renaming variables:
    drop empty fragments, drop fragments that are factors of other fragments,
    and split fragments at isolated variables (variables occurring exactly
    once overall).

    A fragment that is a single isolated variable is kept as-is: it cannot be
    split further and marks the formula as trivially unavoidable.
    """
    frags = {tuple(f) for f in fragments if f}
    while True:
        pruned = {g for g in frags if not any(g != h and _is_factor(g, h) for h in frags)}
        counts = Counter(c for g in pruned for c in g)
        isolated = {v for v, c in counts.items() if c == 1}
        out = set()
        changed = pruned != frags
        for g in pruned:
            if len(g) == 1 or not (set(g) & isolated):
                out.add(g)
                continue
            changed = True
            piece: list[int] = []
            for c in g:
                if c in isolated:
                    if piece:
                        out.add(tuple(piece))
                    piece = []
                else:
                    piece.append(c)
            if piece:
                out.add(tuple(piece))
        if not changed:
            return frozenset(out)
        frags = out


def _normalize_fragments(fragments) -> tuple[Fragment, ...]:
    return _canonical_fragments(stable_normalize(fragments))


@dataclass(frozen=True)
class Formula:
    """A set of fragments in canonical normalized form.

    The empty formula (no fragments) is the distinguished trivially-unavoidable
    value; a single-variable fragment whose variable occurs nowhere else is the
    other degenerate trivially-unavoidable shape and is kept unsplit.
    """

    fragments: tuple[Fragment, ...]

    @staticmethod
    def make(fragments) -> "Formula":
        return Formula(_normalize_fragments(fragments))

    @staticmethod
    def raw(fragments) -> "Formula":
        """Bypass normalization; caller vouches the fragments are canonical."""
        return Formula(tuple(tuple(f) for f in fragments))

    @property
    def var_count(self) -> int:
        return len({c for g in self.fragments for c in g})

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(sorted({c for g in self.fragments for c in g}))

    @property
    def is_empty(self) -> bool:
        return not self.fragments

    @property
    def text(self) -> str:
        if not self.fragments:
            return "<empty>"
        return ".".join(_render_frag(g) for g in self.fragments)

    def __str__(self) -> str:
        return self.text


def parse_formula(text: str) -> Formula:
    """Parse 'ABA.BCB.CAC'; the result is normalized and canonical."""
    return Formula.make(_parse_frag(part) for part in text.split("."))


def format_formula(f: Formula) -> str:
    return f.text


def pattern_to_formula(p: "Pattern | str") -> Formula:
    """Replace every isolated variable of the pattern by a dot and normalize.

    A pattern consisting only of isolated variables yields the empty formula,
    the trivially-unavoidable value.
    """
    p = as_pattern(p)
    return Formula.make([p.vars])


def formula_to_pattern(f: Formula) -> Pattern:
    """Replace every dot by a fresh variable, isolated in the result."""
    if f.is_empty:
        raise ValueError("the empty formula has no associated pattern")
    fresh = f.var_count
    out: list[int] = []
    for i, frag in enumerate(f.fragments):
        if i:
            out.append(fresh)
            fresh += 1
        out.extend(frag)
    return Pattern(tuple(out))


def as_pattern(p: "Pattern | str") -> Pattern:
    return p if isinstance(p, Pattern) else parse_pattern(p)


def as_formula(f: "Formula | str") -> Formula:
    return f if isinstance(f, Formula) else parse_formula(f)


def zimin(p: "Pattern | str", n: int = 1) -> Pattern:
    """The Zimin closure Z^n(p) = p X p with X a fresh variable, iterated n times."""
    p = as_pattern(p)
    for _ in range(n):
        fresh = max(p.vars) + 1
        p = Pattern(p.vars + (fresh,) + p.vars)
    return p


def split(f: Formula, frag: "Fragment | str") -> Formula:
    """Replace a fragment by its prefix and suffix of length |frag|-1."""
    frag = _parse_frag(frag) if isinstance(frag, str) else tuple(frag)
    if frag not in f.fragments:
        raise ValueError("fragment %s not in formula %s" % (_render_frag(frag), f))
    if len(frag) < 2:
        raise ValueError("cannot split a fragment of length 1")
    rest = [g for g in f.fragments if g != frag]
    return Formula.make(rest + [frag[:-1], frag[1:]])


def reverse_formula(f: Formula) -> Formula:
    """Mirror image: every fragment reversed."""
    return Formula.make([g[::-1] for g in f.fragments])


@dataclass(frozen=True)
class Classification:
    is_doubled: bool
    is_nice: bool
    is_xyx: bool
    is_hybrid: bool
    fragment_count: int
    var_count: int


def classify(f: "Formula | str") -> Classification:
    """Structural flags: doubled pattern, nice, xyx, hybrid."""
    f = as_formula(f)
    frags = f.fragments
    variables = {c for g in frags for c in g}
    doubled = len(frags) == 1 and all(frags[0].count(v) >= 2 for v in variables)
    nice = all(any(g.count(v) >= 2 for g in frags) for v in variables)
    xyx = bool(frags) and all(len(g) == 3 and g[0] == g[2] for g in frags)
    hybrid = bool(frags) and all(len(g) == 2 or (len(g) == 3 and g[0] == g[2]) for g in frags)
    if doubled:
        assert nice
    if xyx:
        assert hybrid
    return Classification(doubled, nice, xyx, hybrid, len(frags), len(variables))


def generate_Ti(i: int) -> Formula:
    """The xyx-formula of the directed i-circuit: fragments A_j A_{j+1 mod i} A_j."""
    if i < 1:
        raise ValueError("i must be >= 1")
    return Formula.make([(j, (j + 1) % i, j) for j in range(i)])


def generate_two_birds(v: int) -> Formula:
    """The mirrored two-fragment family ABA.BAB, ABCBA.CBABC, ABCDCBA.DCBABCD, ...

    The general shape is inferred from the listed members: the first fragment
    rises 0..v-1 then falls back, the second falls v-1..0 then rises back.
    """
    if v < 2:
        raise ValueError("two-birds formulas need v >= 2")
    up = list(range(v))
    first = tuple(up + up[-2::-1])
    down = list(range(v - 1, -1, -1))
    second = tuple(down + list(range(1, v)))
    return Formula.make([first, second])


def generate_palindrome_divisor_family(v: int) -> Formula:
    """The two-fragment mirrored family AA, ABCA.ACBA, ABCDEA.AEDCBA, ... for odd v."""
    if v < 1 or v % 2 == 0:
        raise ValueError("family members have an odd number of variables")
    first = tuple(range(v)) + (0,)
    second = (0,) + tuple(range(v - 1, 0, -1)) + (0,)
    return Formula.make([first, second])


@dataclass(frozen=True)
class PalindromeReport:
    is_palindrome: bool
    odd_length_central_isolated: bool
    no_mixed_parity_variable: bool
    mixed_parity_vars: tuple[int, ...]
    family_divisor: "Formula | None"


def palindrome_filter(p: "Pattern | str") -> PalindromeReport:
    """The two necessary conditions for a palindrome pattern to have index >= 5:
    odd length with isolated central variable, and no variable at both an even
    and an odd position.

    Conditions only; a failing pattern is reported with the reason (an even or
    doubled palindrome is 3-avoidable, a mixed-parity one is divisible by a
    member of the locked mirrored family, which the report attaches when found).
    """
    from .occurrence import divides

    p = as_pattern(p)
    seq = p.vars
    is_pal = seq == seq[::-1]
    odd_central = False
    if len(seq) % 2 == 1:
        center = seq[len(seq) // 2]
        odd_central = seq.count(center) == 1
    parity: dict[int, set[int]] = {}
    for i, v in enumerate(seq):
        parity.setdefault(v, set()).add(i % 2)
    mixed = tuple(sorted(v for v, ps in parity.items() if len(ps) == 2))
    divisor = None
    if mixed:
        for v in range(1, p.var_count + 2, 2):
            member = generate_palindrome_divisor_family(v)
            if divides(member, p) is not None:
                divisor = member
                break
    return PalindromeReport(is_pal, odd_central, not mixed, mixed, divisor)


@dataclass(frozen=True)
class NiceStructureReport:
    holds: bool
    violations: tuple[tuple[str, str, str], ...]  # (variable, fragment, property)


_MN_PROPS = (
    "prefix variable must also be a suffix of its fragment",
    "fragment must contain exactly two occurrences of the variable",
    "variable must not be a prefix or suffix of another fragment",
    "other fragments must contain at most one occurrence of the variable",
)


def minimally_nice_structure(f: "Formula | str") -> NiceStructureReport:
    """Check the four structural properties every minimally nice formula has,
    for every variable appearing as a fragment prefix. Violations witness that
    the formula is not minimally nice; the converse does not hold."""
    f = as_formula(f)
    if not classify(f).is_nice:
        raise ValueError("minimally nice structure applies to nice formulas only")
    violations = []

    def violate(v, g, idx):
        violations.append((render_var(v), _render_frag(g), _MN_PROPS[idx]))

    for g in f.fragments:
        v = g[0]
        if g[-1] != v:
            violate(v, g, 0)
        if g.count(v) != 2:
            violate(v, g, 1)
        for h in f.fragments:
            if h == g:
                continue
            if h[0] == v or h[-1] == v:
                violate(v, h, 2)
            if h.count(v) > 1:
                violate(v, h, 3)
    return NiceStructureReport(not violations, tuple(violations))


@dataclass(frozen=True)
class Digraph:
    """A directed graph on vertices 0..vertex_count-1; loops allowed."""

    vertex_count: int
    arcs: frozenset[tuple[int, int]]

    def __post_init__(self):
        for u, v in self.arcs:
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError("arc endpoint out of range")

    @property
    def text(self) -> str:
        body = ",".join("%d>%d" % a for a in sorted(self.arcs))
        return "%d; %s" % (self.vertex_count, body)

    def __str__(self) -> str:
        return self.text


def parse_digraph(text: str) -> Digraph:
    """Parse 'n; u>v,u>w,...'."""
    head, _, body = text.partition(";")
    n = int(head.strip())
    arcs = set()
    body = body.strip()
    if body:
        for part in body.split(","):
            u, _, v = part.partition(">")
            arcs.add((int(u), int(v)))
    return Digraph(n, frozenset(arcs))


def directed_circuit(i: int) -> Digraph:
    return Digraph(i, frozenset((j, (j + 1) % i) for j in range(i)))


def complete_digraph(n: int) -> Digraph:
    return Digraph(n, frozenset((u, v) for u in range(n) for v in range(n) if u != v))


def xyx_to_digraph(f: "Formula | str") -> Digraph:
    """Arc X>Y for every fragment XYX. A fragment XXX maps to a loop."""
    f = as_formula(f)
    if not classify(f).is_xyx:
        raise ValueError("not an xyx-formula: %s" % f)
    return Digraph(f.var_count, frozenset((g[0], g[1]) for g in f.fragments))


def digraph_to_xyx(g: Digraph) -> Formula:
    """Inverse of xyx_to_digraph; vertices with no arcs vanish (formulas have
    no isolated variables)."""
    return Formula.make([(u, v, u) for u, v in g.arcs])


def digraph_hom(g1: Digraph, g2: Digraph) -> tuple[int, ...] | None:
    """A vertex map preserving arcs, or None. Brute force over all maps,
    returning the lexicographically least one."""
    if g2.vertex_count == 0:
        return None if g1.arcs or g1.vertex_count else ()
    for mapping in itertools.product(range(g2.vertex_count), repeat=g1.vertex_count):
        if all((mapping[u], mapping[v]) in g2.arcs for u, v in g1.arcs):
            return mapping
    return None
