"""Morphisms and their fixed points, the built-in pure morphic words,
synchronization checking, the bounded-verification length for synchronizing
uniform morphisms, and the finite avoidance-proof pipeline built on them.

Every verdict here carries a certificate that re-validates from its recorded
parameters alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exponent import VariableBound, variable_length_bound
from .formulas import Formula, as_formula
from .occurrence import OccurrenceMorphism, _bytes_of, _normalize_caps, find_occurrence
from .words import Word, as_word, is_beta_n_free, _DIGITS


@dataclass(frozen=True)
class Morphism:
    """A letter-to-word map. Images live over the target alphabet; empty
    images are allowed only for morphisms built with erasing=True."""

    images: tuple[tuple[int, ...], ...]
    target_size: int
    erasing: bool = False

    def __post_init__(self):
        if not self.erasing and any(not img for img in self.images):
            raise ValueError("empty image in a non-erasing morphism")
        for img in self.images:
            for c in img:
                if c < 0 or c >= self.target_size:
                    raise ValueError("image letter out of target alphabet")

    @property
    def source_size(self) -> int:
        return len(self.images)

    @property
    def uniform_length(self) -> int | None:
        lengths = {len(img) for img in self.images}
        return lengths.pop() if len(lengths) == 1 else None

    def apply(self, w: "Word | str") -> Word:
        w = as_word(w)
        out: list[int] = []
        for c in w.letters:
            if c >= self.source_size:
                raise ValueError("letter %d outside morphism source alphabet" % c)
            out.extend(self.images[c])
        return Word(tuple(out), self.target_size)

    def apply_bytes(self, letters) -> bytes:
        return b"".join(_bytes_of(self.images[c]) for c in letters)

    @property
    def text(self) -> str:
        return "/".join(
            "".join(_DIGITS[c] for c in img) if img else "e" for img in self.images
        )

    def __str__(self) -> str:
        return self.text


def parse_morphism(text: str) -> Morphism:
    """Parse '01/03/21/23'; a bare 'e' denotes the empty image and tags the
    morphism as erasing."""
    images = []
    erasing = False
    for part in text.split("/"):
        if part == "e":
            images.append(())
            erasing = True
            continue
        img = []
        for ch in part:
            idx = _DIGITS.find(ch)
            if idx < 0:
                raise ValueError("invalid image letter %r" % ch)
            img.append(idx)
        images.append(tuple(img))
    target = max((c for img in images for c in img), default=-1) + 1
    return Morphism(tuple(images), max(target, 1), erasing)


@dataclass(frozen=True)
class MorphicWordSpec:
    """A pure morphic word: the fixed point of `inner`, optionally mapped
    through `outer` (which may erase letters)."""

    inner: Morphism
    outer: Morphism | None = None

    def __post_init__(self):
        if self.inner.source_size != self.inner.target_size:
            raise ValueError("fixed points need an endomorphism")
        if not self.inner.images[0] or self.inner.images[0][0] != 0:
            raise ValueError("the image of 0 must start with 0")

    @property
    def text(self) -> str:
        if self.outer is None:
            return self.inner.text
        return "%s of fixed point of %s" % (self.outer.text, self.inner.text)


def fixed_point_prefix(m: "Morphism | str", length: int) -> Word:
    """The length-L prefix of the fixed point m^omega(0)."""
    if isinstance(m, str):
        m = parse_morphism(m)
    spec = MorphicWordSpec(m)  # validates the fixed-point preconditions
    if length == 0:
        return Word((), m.target_size)
    w = [0]
    while len(w) < length:
        nxt: list[int] = []
        for c in w:
            nxt.extend(m.images[c])
            if len(nxt) >= length:
                break
        if len(nxt) <= len(w):
            raise ValueError("morphism %s does not grow from 0" % m.text)
        w = nxt
    return Word(tuple(w[:length]), m.target_size)


def morphic_prefix(spec: MorphicWordSpec, length: int) -> Word:
    """The length-L prefix of outer(m^omega(0)) (outer may be erasing)."""
    if spec.outer is None:
        return fixed_point_prefix(spec.inner, length)
    inner_len = max(length, 8)
    for _ in range(64):
        base = fixed_point_prefix(spec.inner, inner_len)
        out = spec.outer.apply(base)
        if len(out) >= length:
            return Word(out.letters[:length], spec.outer.target_size)
        inner_len *= 2
    raise ValueError("outer morphism erases too much to reach length %d" % length)


_BUILTINS = {
    "b2": ("01/10", None),
    "b3": ("012/02/1", None),
    "b4": ("01/03/21/23", None),
    "b5": ("01/23/4/21/0", None),
    "v3": ("01/23/4/21/0", "012/1/02/12/e"),
    "w3": ("01/23/4/21/0", "02/1/0/12/e"),
    "z3": ("01/2/20", None),
}


def builtin(name: str) -> MorphicWordSpec:
    """The built-in pure morphic words b2..b5, v3, w3, z3."""
    if name not in _BUILTINS:
        raise ValueError("unknown builtin word %r (have %s)" % (name, sorted(_BUILTINS)))
    inner, outer = _BUILTINS[name]
    return MorphicWordSpec(
        parse_morphism(inner), parse_morphism(outer) if outer else None
    )


# A 58-uniform synchronizing morphism from the 4-letter to the 3-letter
# alphabet whose images of Dejean words over 4 letters contain no repetition
# of exponent >= 3/2 with period >= 3. In such images 010 is the only
# one-letter-image occurrence of ABA with |image(A)| >= |image(B)|, which is
# what makes every circuit formula avoidable over 3 letters.
M58 = parse_morphism(
    "0012211002201021120022100112201002112001022011002211201022"
    "/0012210022010211220010221120011022010021122011002211201022"
    "/0011221002201021122001102201002112001022110012200211201022"
    "/0011221002201021120011022010021122001022110012200211201022"
)

_NAMED_MORPHISMS = {"m58": M58}


def named_morphism(name: str) -> Morphism:
    if name not in _NAMED_MORPHISMS:
        raise ValueError("unknown morphism %r" % name)
    return _NAMED_MORPHISMS[name]


@dataclass(frozen=True)
class SyncReport:
    synchronizing: bool
    violation: tuple[int, int, int, int] | None  # (a, b, c, offset)


def is_synchronizing(m: "Morphism | str") -> SyncReport:
    """Exhaustive check that images overlap only at image boundaries: whenever
    h(c) sits inside h(ab), it is the image of a or of b in place."""
    if isinstance(m, str):
        m = parse_morphism(m)
    q = m.uniform_length
    if q is None or q < 1:
        raise ValueError("synchronization is defined for uniform morphisms")
    s = m.source_size
    images = [_bytes_of(img) for img in m.images]
    for a in range(s):
        for b in range(s):
            hab = images[a] + images[b]
            for c in range(s):
                pos = hab.find(images[c])
                while pos >= 0:
                    if not ((pos == 0 and a == c) or (pos == q and b == c)):
                        return SyncReport(False, (a, b, c, pos))
                    pos = hab.find(images[c], pos + 1)
    return SyncReport(True, None)


@dataclass(frozen=True)
class VerificationBound:
    bound: Fraction
    ceil: int
    hypothesis_ok: bool
    warning: str | None


def lemma6_bound(alpha: Fraction, beta: Fraction, q: int) -> VerificationBound:
    """The finite verification length for a synchronizing q-uniform morphism:
    if images of all alpha+-free words shorter than this are (beta+,n)-free,
    images of every alpha+-free word are.

    The stated hypothesis is 1 < alpha < beta < 2; violating it only emits a
    warning, since the pipeline is also exercised with alpha above beta and
    the finite check it gates is still the one performed."""
    alpha, beta = Fraction(alpha), Fraction(beta)
    if beta == alpha:
        raise ValueError("beta = alpha: verification length undefined")
    if beta == 1:
        raise ValueError("beta = 1: verification length undefined")
    first = 2 * beta / (beta - alpha)
    second = Fraction(2 * (q - 1) * (2 * beta - 1), q) / (beta - 1)
    bound = max(first, second)
    ok = 1 < alpha < beta < 2
    warning = None
    if not ok:
        warning = "hypothesis 1 < alpha < beta < 2 violated (alpha=%s, beta=%s)" % (
            alpha,
            beta,
        )
    ceil = -((-bound.numerator) // bound.denominator)
    return VerificationBound(bound, ceil, ok, warning)


@dataclass(frozen=True)
class ImageFreenessCertificate:
    morphism: str
    alpha: Fraction
    beta: Fraction
    n: int
    image_plus: bool
    length_bound: int
    words_checked: int
    warning: str | None


@dataclass(frozen=True)
class ImageFreenessCounterexample:
    source: Word
    image: Word


def verify_image_freeness(
    m: "Morphism | str",
    alpha: Fraction,
    beta: Fraction,
    n: int,
    image_plus: bool = True,
    length_bound: int | None = None,
):
    """Check that h(w) is (beta,n)-free (plus-flag as given) for every
    alpha+-free word w shorter than the verification length.

    Enumerates only the maximal free words: every shorter free word is a
    prefix of a checked one and freeness passes to factors. Returns a
    certificate, or a counterexample word on failure."""
    from .search import free_word_leaves

    if isinstance(m, str):
        m = parse_morphism(m)
    sync = is_synchronizing(m)
    if not sync.synchronizing:
        raise ValueError("morphism is not synchronizing: violation %r" % (sync.violation,))
    alpha, beta = Fraction(alpha), Fraction(beta)
    vb = lemma6_bound(alpha, beta, m.uniform_length)
    max_len = (vb.ceil - 1) if length_bound is None else length_bound
    checked = 0
    for w in free_word_leaves(m.source_size, alpha, True, max_len):
        checked += 1
        img = m.apply(w)
        if not is_beta_n_free(img, beta, n, plus=image_plus):
            return ImageFreenessCounterexample(w, img)
    return ImageFreenessCertificate(
        m.text, alpha, beta, n, image_plus, max_len, checked, vb.warning
    )


@dataclass(frozen=True)
class AvoidanceProof:
    """'avoided': no occurrence of the formula fits in any image factor within
    the certified per-variable caps. 'refuted' carries the occurrence.
    'inconclusive': no finite caps were available."""

    verdict: str
    formula: str
    morphism: str
    alpha: Fraction
    beta: Fraction
    n: int
    image_plus: bool
    caps: dict[int, int] | None
    factor_length: int
    source_length: int
    factors_seen: int
    occurrence: OccurrenceMorphism | None


def prove_avoidance(
    f: "Formula | str",
    m: "Morphism | str",
    alpha: Fraction,
    beta: Fraction,
    n: int,
    image_cert: ImageFreenessCertificate,
    image_plus: bool = True,
) -> AvoidanceProof:
    """Decide whether f occurs in any image h(w) of an alpha+-free word.

    Needs the image-freeness certificate for (m, beta, n): occurrences in
    (beta,n)-free words have image lengths bounded per variable, so every
    fragment image fits inside a factor of certified length, and those factors
    are realized by images of short free words."""
    from .search import free_word_leaves

    f = as_formula(f)
    if isinstance(m, str):
        m = parse_morphism(m)
    if (
        image_cert.morphism,
        image_cert.alpha,
        image_cert.beta,
        image_cert.n,
        image_cert.image_plus,
    ) != (m.text, Fraction(alpha), Fraction(beta), n, image_plus):
        raise ValueError("image-freeness certificate does not match the parameters")
    alpha, beta = Fraction(alpha), Fraction(beta)
    vb: VariableBound = variable_length_bound(f, beta, n, plus=image_plus)
    if vb.inconclusive:
        return AvoidanceProof(
            "inconclusive", f.text, m.text, alpha, beta, n, image_plus,
            None, 0, 0, 0, None,
        )
    if vb.impossible:
        return AvoidanceProof(
            "avoided", f.text, m.text, alpha, beta, n, image_plus,
            vb.bounds, 0, 0, 0, None,
        )
    caps = vb.bounds
    q = m.uniform_length or max(len(img) for img in m.images)
    factor_length = max(sum(caps[c] for c in g) for g in f.fragments)
    source_length = -((-factor_length) // q) + 2
    factor_set: set[bytes] = set()
    for w in free_word_leaves(m.source_size, alpha, True, source_length):
        img = m.apply_bytes(w.letters)
        for i in range(len(img)):
            top = min(factor_length, len(img) - i)
            for ell in range(1, top + 1):
                factor_set.add(img[i : i + ell])
    occ = _occurs_in_factor_language(f, caps, factor_set)
    if occ is not None:
        return AvoidanceProof(
            "refuted", f.text, m.text, alpha, beta, n, image_plus,
            caps, factor_length, source_length, len(factor_set), occ,
        )
    return AvoidanceProof(
        "avoided", f.text, m.text, alpha, beta, n, image_plus,
        caps, factor_length, source_length, len(factor_set), None,
    )


def _occurs_in_factor_language(
    f: Formula, caps: dict[int, int], factor_set: set[bytes]
) -> OccurrenceMorphism | None:
    """Occurrence search where membership means 'is one of these factors'."""
    variables = list(f.variables)
    counts = {v: sum(g.count(v) for g in f.fragments) for v in variables}
    order = sorted(variables, key=lambda v: (-counts[v], v))
    candidates = {
        v: sorted(
            (b for b in factor_set if len(b) <= caps[v]), key=lambda b: (len(b), b)
        )
        for v in variables
    }

    def runs_ok(sigma) -> bool:
        for g in f.fragments:
            run: list[bytes] = []
            for c in g:
                img = sigma.get(c)
                if img is None:
                    if len(run) > 1 and b"".join(run) not in factor_set:
                        return False
                    run = []
                else:
                    run.append(img)
            if run and b"".join(run) not in factor_set:
                return False
        return True

    def rec(todo, sigma):
        if not todo:
            return dict(sigma)
        v, rest = todo[0], todo[1:]
        for img in candidates[v]:
            sigma[v] = img
            if runs_ok(sigma):
                hit = rec(rest, sigma)
                if hit is not None:
                    return hit
            del sigma[v]
        return None

    sigma = rec(order, {})
    if sigma is None:
        return None
    return OccurrenceMorphism(
        tuple(sorted((v, tuple(img)) for v, img in sigma.items())), "word"
    )


@dataclass(frozen=True)
class BoundedCheck:
    ok: bool
    formula: str
    word: str
    prefix_length: int
    caps: dict[int, int]
    occurrence: OccurrenceMorphism | None


def bounded_avoidance_check(
    spec: "MorphicWordSpec | str", f: "Formula | str", length: int, caps
) -> BoundedCheck:
    """Empirical check: no occurrence of f with images within caps in the
    length-L prefix of the morphic word (or the occurrence found)."""
    if isinstance(spec, str):
        spec = builtin(spec) if spec in _BUILTINS else MorphicWordSpec(parse_morphism(spec))
    f = as_formula(f)
    prefix = morphic_prefix(spec, length)
    capmap = _normalize_caps(caps, f.variables, default=length)
    occ = find_occurrence(f, prefix, capmap)
    return BoundedCheck(occ is None, f.text, spec.text, length, capmap, occ)
