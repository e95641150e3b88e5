"""Command-line surface: every library operation plus the claim-by-claim
reproduction driver.

Exit codes: 0 = a verdict was computed (whatever it is), 1 = usage error,
2 = budget exhausted / inconclusive.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import decide, exponent, formulas, morphic, occurrence, search, words
from .words import parse_rational


def _fail(msg: str) -> int:
    print("error: %s" % msg, file=sys.stderr)
    return 1


def _emit(payload: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(payload, indent=2, sort_keys=True))
        return
    for key, value in payload.items():
        if isinstance(value, (list, tuple)):
            print("%s:" % key)
            for item in value:
                print("  %s" % (item,))
        else:
            print("%s: %s" % (key, value))


def _parse_caps(text: str | None):
    """'3' for a global cap or 'A=1,B=2,C=3' per variable."""
    if text is None:
        return None
    if "=" not in text:
        return int(text)
    caps = {}
    for part in text.split(","):
        name, _, value = part.partition("=")
        caps[formulas._parse_frag(name.strip())[0]] = int(value)
    return caps


def cmd_classify(args) -> int:
    f = formulas.as_formula(args.formula)
    c = formulas.classify(f)
    _emit(
        {
            "formula": f.text,
            "is_doubled": c.is_doubled,
            "is_nice": c.is_nice,
            "is_xyx": c.is_xyx,
            "is_hybrid": c.is_hybrid,
            "fragment_count": c.fragment_count,
            "var_count": c.var_count,
        },
        args.json,
    )
    return 0


def cmd_avoidable(args) -> int:
    f = formulas.as_formula(args.formula)
    avoidable, cert = decide.is_avoidable(f)
    payload = {
        "formula": f.text,
        "verdict": "avoidable" if avoidable else "unavoidable",
        "locked": decide.is_locked(f),
    }
    if cert is not None:
        payload["certificate"] = json.loads(cert.to_json())
    _emit(payload, args.json)
    return 0


def cmd_divides(args) -> int:
    f = formulas.as_formula(args.f)
    g = args.g
    m = occurrence.divides(f, g)
    payload = {"f": f.text, "g": str(g), "divides": m is not None}
    if m is not None:
        payload["morphism"] = m.render()
    _emit(payload, args.json)
    return 0


def cmd_zimin(args) -> int:
    p = formulas.as_pattern(args.pattern)
    z = formulas.zimin(p, args.n)
    _emit({"pattern": p.text, "n": args.n, "zimin": z.text}, args.json)
    return 0


def cmd_occurs(args) -> int:
    f = formulas.as_formula(args.formula)
    w = words.as_word(args.word)
    caps = _parse_caps(args.caps)
    m = occurrence.find_occurrence(f, w, caps)
    payload = {"formula": f.text, "word": w.text, "occurs": m is not None}
    if m is not None:
        payload["morphism"] = m.render()
        payload["validates"] = occurrence.validate_occurrence(f, w, m)
    _emit(payload, args.json)
    return 0


def cmd_ae(args) -> int:
    f = formulas.as_formula(args.formula)
    triv = occurrence.ae_is_nontrivial(f)
    if not triv.nontrivial:
        _emit(
            {
                "formula": f.text,
                "ae": "trivial (1)",
                "elimination_order": [formulas.render_var(v) for v in triv.elimination_order],
            },
            args.json,
        )
        return 0
    bound = exponent.ae_lower_bound(f, Fraction(args.tol))
    _emit(
        {
            "formula": f.text,
            "nice_divisor": triv.core.text,
            "lo": str(bound.lo),
            "hi": str(bound.hi),
            "lo_float": float(bound.lo),
        },
        args.json,
    )
    return 0


def cmd_exhaust(args) -> int:
    fms = []
    caps = _parse_caps(args.caps)
    for text in args.avoid or []:
        fms.append((formulas.as_formula(text), caps))
    freeness = None
    if args.free:
        plus = args.free.endswith("+")
        freeness = (parse_rational(args.free.rstrip("+")), plus)
    bounded = None
    if args.bfree:
        spec, _, n = args.bfree.partition(",")
        plus = spec.endswith("+")
        bounded = (parse_rational(spec.rstrip("+")), int(n), plus)
    cset = search.ConstraintSet(
        alphabet_size=args.k,
        formulas=tuple(fms),
        forbidden_factors=tuple(words.as_word(t) for t in (args.forbid or [])),
        freeness=freeness,
        bounded_freeness=bounded,
        depth_limit=args.depth,
    )
    if args.prefix:
        result = search.exhaust_with_prefix(cset, args.prefix, node_budget=args.budget)
    else:
        result = search.exhaust(cset, node_budget=args.budget)
    print(result.to_json(cset) if args.json else
          "%s max_length=%d leaves=%d nodes=%d%s" % (
              result.verdict, result.max_length, result.leaf_count,
              result.node_count,
              " witness=%s" % result.witness.text if result.witness else ""))
    return 2 if result.verdict == "budget_exhausted" else 0


def cmd_morphic(args) -> int:
    name = args.word
    if name in morphic._BUILTINS:
        spec = morphic.builtin(name)
    else:
        spec = morphic.MorphicWordSpec(morphic.parse_morphism(name))
    prefix = morphic.morphic_prefix(spec, args.prefix)
    _emit({"word": spec.text, "prefix": prefix.text}, args.json)
    return 0


def cmd_sync_check(args) -> int:
    m = morphic.parse_morphism(args.morphism) if "/" in args.morphism else \
        morphic.named_morphism(args.morphism)
    report = morphic.is_synchronizing(m)
    _emit(
        {"morphism": m.text, "synchronizing": report.synchronizing,
         "violation": report.violation},
        args.json,
    )
    return 0


def cmd_lemma6(args) -> int:
    vb = morphic.lemma6_bound(parse_rational(args.alpha), parse_rational(args.beta), args.q)
    _emit(
        {"bound": str(vb.bound), "ceil": vb.ceil,
         "hypothesis_ok": vb.hypothesis_ok, "warning": vb.warning},
        args.json,
    )
    return 0


def cmd_prove_avoid(args) -> int:
    m = morphic.parse_morphism(args.morphism) if "/" in args.morphism else \
        morphic.named_morphism(args.morphism)
    alpha = parse_rational(args.alpha)
    beta = parse_rational(args.beta)
    cert = morphic.verify_image_freeness(
        m, alpha, beta, args.n, image_plus=args.plus
    )
    if isinstance(cert, morphic.ImageFreenessCounterexample):
        _emit(
            {"verdict": "image-freeness failed",
             "source": cert.source.text, "image": cert.image.text},
            args.json,
        )
        return 0
    proof = morphic.prove_avoidance(
        args.formula, m, alpha, beta, args.n, cert, image_plus=args.plus
    )
    payload = {
        "verdict": proof.verdict,
        "formula": proof.formula,
        "caps": {formulas.render_var(k): v for k, v in (proof.caps or {}).items()},
        "factor_length": proof.factor_length,
        "words_checked": cert.words_checked,
        "image_plus": proof.image_plus,
    }
    if proof.occurrence is not None:
        payload["occurrence"] = proof.occurrence.render()
    _emit(payload, args.json)
    return 2 if proof.verdict == "inconclusive" else 0


def cmd_witness(args) -> int:
    f = formulas.as_formula(args.formula)
    eps = parse_rational(args.eps)
    word, m = occurrence.construct_witness(f, eps)
    _emit(
        {
            "formula": f.text,
            "eps": str(eps),
            "length": len(word),
            "alphabet": word.alphabet_size,
            "morphism": m.render(),
            "word": word.text,
        },
        args.json,
    )
    return 0


def cmd_langcmp(args) -> int:
    freeness = None
    if args.free:
        plus = args.free.endswith("+")
        freeness = (parse_rational(args.free.rstrip("+")), plus)
    cset = search.ConstraintSet(
        alphabet_size=args.k,
        forbidden_factors=tuple(words.as_word(t) for t in (args.forbid or [])),
        freeness=freeness,
        distance_rules=tuple(
            (int(a), int(d))
            for a, d in (r.split(":") for r in (args.distance or []))
        ),
        depth_limit=args.length,
    )
    lang, stable_at = search.stabilized_language_factors(
        cset, args.ell, args.length, args.step, args.max_length
    )
    base = morphic.morphic_prefix(morphic.builtin(args.builtin), args.prefix)
    ref = words.factors(base, args.ell)
    cmp = search.compare_languages(lang, ref)
    _emit(
        {
            "equal": cmp.equal,
            "stabilized_at": stable_at,
            "language_size": len(lang),
            "only_language": [w.text for w in cmp.only_left],
            "only_builtin": [w.text for w in cmp.only_right],
        },
        args.json,
    )
    return 0


def cmd_reproduce(args) -> int:
    from .manifest import run_manifest

    return run_manifest(args.check, args.json)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avoid",
        description="Avoidability of patterns and formulas in combinatorics on words",
    )
    parser.add_argument("--json", action="store_true", help="emit JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="structural flags of a formula")
    p.add_argument("formula")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("avoidable", help="decide avoidability, with certificate")
    p.add_argument("formula")
    p.set_defaults(func=cmd_avoidable)

    p = sub.add_parser("divides", help="divisibility f <= g")
    p.add_argument("f")
    p.add_argument("g")
    p.set_defaults(func=cmd_divides)

    p = sub.add_parser("zimin", help="Zimin closure of a pattern")
    p.add_argument("pattern")
    p.add_argument("n", nargs="?", type=int, default=1)
    p.set_defaults(func=cmd_zimin)

    p = sub.add_parser("occurs", help="occurrence of a formula in a word")
    p.add_argument("formula")
    p.add_argument("word")
    p.add_argument("--caps")
    p.set_defaults(func=cmd_occurs)

    p = sub.add_parser("ae", help="avoidability-exponent lower bound")
    p.add_argument("formula")
    p.add_argument("--tol", default="1/1000000")
    p.set_defaults(func=cmd_ae)

    p = sub.add_parser("exhaust", help="exhaustive backtracking search")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--avoid", action="append")
    p.add_argument("--forbid", action="append")
    p.add_argument("--free")
    p.add_argument("--bfree")
    p.add_argument("--caps")
    p.add_argument("--prefix")
    p.add_argument("--depth", type=int, default=400)
    p.add_argument("--budget", type=int, default=50_000_000)
    p.set_defaults(func=cmd_exhaust)

    p = sub.add_parser("morphic", help="prefix of a built-in or given morphic word")
    p.add_argument("word")
    p.add_argument("--prefix", type=int, required=True)
    p.set_defaults(func=cmd_morphic)

    p = sub.add_parser("sync-check", help="synchronization check of a uniform morphism")
    p.add_argument("morphism")
    p.set_defaults(func=cmd_sync_check)

    p = sub.add_parser("lemma6", help="finite verification length")
    p.add_argument("--alpha", required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--q", type=int, required=True)
    p.set_defaults(func=cmd_lemma6)

    p = sub.add_parser("prove-avoid", help="synchronized-morphism avoidance proof")
    p.add_argument("formula")
    p.add_argument("--morphism", required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--plus", action="store_true",
                   help="image freeness with exponent beta allowed")
    p.set_defaults(func=cmd_prove_avoid)

    p = sub.add_parser("witness", help="(1+eps)-free word containing a formula")
    p.add_argument("formula")
    p.add_argument("--eps", required=True)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("langcmp", help="bounded factor-language comparison")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--free")
    p.add_argument("--forbid", action="append")
    p.add_argument("--distance", action="append", help="letter:distance")
    p.add_argument("--ell", type=int, default=4)
    p.add_argument("--length", type=int, default=20)
    p.add_argument("--step", type=int, default=5)
    p.add_argument("--max-length", type=int, default=60)
    p.add_argument("--builtin", required=True)
    p.add_argument("--prefix", type=int, default=400)
    p.set_defaults(func=cmd_langcmp)

    p = sub.add_parser("reproduce", help="run the claim reproduction manifest")
    p.add_argument("check", nargs="?")
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ValueError, RuntimeError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
