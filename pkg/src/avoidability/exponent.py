"""Avoidability-exponent machinery: repetition constraints extracted from
fragments, exact rational feasibility of the induced strict inequality system,
dichotomy bounds on the exponent, and per-variable image-length bounds for the
synchronized-morphism avoidance pipeline.

All arithmetic is exact (`fractions.Fraction`); feasibility is decided by
Fourier-Motzkin elimination with strictness tracked through combinations.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .formulas import Formula, as_formula, classify, render_var, _render_frag


@dataclass(frozen=True)
class RepetitionConstraint:
    """A factor uvu of a fragment, kept as multisets of variable counts.

    In an alpha-free word an occurrence h satisfies |h(uvu)|/|h(uv)| < alpha,
    i.e. (2-alpha)*U < (alpha-1)*V with U, V the image lengths of u and v.
    """

    u_counts: tuple[tuple[int, int], ...]
    v_counts: tuple[tuple[int, int], ...]
    source: tuple[int, ...]
    sample: tuple[tuple[int, ...], tuple[int, ...]]  # (u word, v word), first found

    @property
    def text(self) -> str:
        u, v = self.sample
        return _render_frag(u) + _render_frag(v) + _render_frag(u)


def _counts(word: tuple[int, ...]) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(Counter(word).items()))


def repetitions(f: "Formula | str") -> tuple[RepetitionConstraint, ...]:
    """All uvu factors of fragments, reduced to the maximal set: a constraint
    is dropped when another has the same u-multiset and a v-sub-multiset (the
    latter implies the former at every alpha < 2)."""
    f = as_formula(f)
    found: dict[tuple, RepetitionConstraint] = {}
    for g in f.fragments:
        n = len(g)
        for start in range(n):
            for ulen in range(1, (n - start) // 2 + 1):
                u = g[start : start + ulen]
                for gap in range(0, n - start - 2 * ulen + 1):
                    u2 = g[start + ulen + gap : start + 2 * ulen + gap]
                    if u2 != u:
                        continue
                    v = g[start + ulen : start + ulen + gap]
                    key = (_counts(u), _counts(v))
                    if key not in found:
                        found[key] = RepetitionConstraint(key[0], key[1], g, (u, v))
    out = []
    for key, c in found.items():
        uc, vc = Counter(dict(c.u_counts)), Counter(dict(c.v_counts))
        dominated = any(
            other != key
            and other[0] == c.u_counts
            and not (Counter(dict(other[1])) - vc)
            for other in found
        )
        if not dominated:
            out.append(c)
    return tuple(sorted(out, key=lambda c: (c.u_counts, c.v_counts)))


# --- exact linear constraints: sum(coef*x) + const {<, <=} 0 ---------------


@dataclass(frozen=True)
class _Lin:
    coeffs: tuple[tuple[int, Fraction], ...]
    const: Fraction
    strict: bool

    @staticmethod
    def make(coeffs: dict[int, Fraction], const: Fraction, strict: bool) -> "_Lin":
        items = tuple(sorted((v, c) for v, c in coeffs.items() if c != 0))
        return _Lin(items, const, strict)

    def coeff(self, v: int) -> Fraction:
        for var, c in self.coeffs:
            if var == v:
                return c
        return Fraction(0)

    def normalized(self) -> "_Lin":
        scale = None
        for _, c in self.coeffs:
            scale = abs(c)
            break
        if scale is None:
            scale = abs(self.const) if self.const else Fraction(1)
        if scale == 0:
            scale = Fraction(1)
        return _Lin(
            tuple((v, c / scale) for v, c in self.coeffs),
            self.const / scale,
            self.strict,
        )


def _combine(lower: _Lin, upper: _Lin, var: int) -> _Lin:
    lam_l = upper.coeff(var)  # > 0
    lam_u = -lower.coeff(var)  # > 0
    coeffs: dict[int, Fraction] = {}
    for v, c in lower.coeffs:
        coeffs[v] = coeffs.get(v, Fraction(0)) + lam_l * c
    for v, c in upper.coeffs:
        coeffs[v] = coeffs.get(v, Fraction(0)) + lam_u * c
    coeffs.pop(var, None)
    const = lam_l * lower.const + lam_u * upper.const
    return _Lin.make(coeffs, const, lower.strict or upper.strict)


def _fm_reduce(constraints: list[_Lin], variables: list[int]):
    """Eliminate the given variables; returns the per-stage systems (stage[i]
    is the system before eliminating variables[i]) and the final system."""
    stages = []
    current = list(constraints)
    for var in variables:
        stages.append(current)
        uppers = [c for c in current if c.coeff(var) > 0]
        lowers = [c for c in current if c.coeff(var) < 0]
        keep = [c for c in current if c.coeff(var) == 0]
        seen = set()
        nxt = []
        for c in keep + [_combine(lo, up, var) for lo in lowers for up in uppers]:
            if not c.coeffs:
                if c.const > 0 or (c.const == 0 and c.strict):
                    return stages, [c]  # contradiction; stop early
                continue
            key = c.normalized()
            if key not in seen:
                seen.add(key)
                nxt.append(c)
        current = nxt
    return stages, current


def _consistent(final: list[_Lin]) -> bool:
    for c in final:
        if not c.coeffs and (c.const > 0 or (c.const == 0 and c.strict)):
            return False
    return True


def _value(c: _Lin, point: dict[int, Fraction]) -> Fraction:
    return sum((coef * point[v] for v, coef in c.coeffs), start=c.const)


def _back_substitute(stages, variables, point: dict[int, Fraction]) -> dict[int, Fraction] | None:
    """Pick values in reverse elimination order, between the induced bounds."""
    for idx in range(len(variables) - 1, -1, -1):
        var = variables[idx]
        lo_val, lo_strict = None, False
        hi_val, hi_strict = None, False
        for c in stages[idx]:
            a = c.coeff(var)
            if a == 0:
                continue
            rest = sum(
                (coef * point[v] for v, coef in c.coeffs if v != var), start=c.const
            )
            bound = -rest / a
            if a > 0:  # var <(=) bound
                if hi_val is None or bound < hi_val or (bound == hi_val and c.strict):
                    hi_val, hi_strict = bound, c.strict
            else:  # var >(=) bound
                if lo_val is None or bound > lo_val or (bound == lo_val and c.strict):
                    lo_val, lo_strict = bound, c.strict
        if lo_val is None and hi_val is None:
            point[var] = Fraction(1)
        elif lo_val is None:
            point[var] = hi_val - 1 if hi_strict else hi_val
        elif hi_val is None:
            point[var] = lo_val + 1 if lo_strict else lo_val
        else:
            if lo_val > hi_val or (lo_val == hi_val and (lo_strict or hi_strict)):
                return None
            point[var] = (lo_val + hi_val) / 2
    return point


def _system(f: Formula, alpha: Fraction, strict: bool = True) -> list[_Lin]:
    """x_X >= 1 plus one exponent inequality per repetition constraint."""
    cons: list[_Lin] = []
    for v in f.variables:
        cons.append(_Lin.make({v: Fraction(-1)}, Fraction(1), False))
    for rc in repetitions(f):
        coeffs: dict[int, Fraction] = {}
        for v, k in rc.u_counts:
            coeffs[v] = coeffs.get(v, Fraction(0)) + (2 - alpha) * k
        for v, k in rc.v_counts:
            coeffs[v] = coeffs.get(v, Fraction(0)) - (alpha - 1) * k
        cons.append(_Lin.make(coeffs, Fraction(0), strict))
    return cons


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    witness: dict[int, int] | None  # integral witness lengths, when feasible


def system_feasible(f: "Formula | str", alpha: Fraction) -> FeasibilityResult:
    """Exact feasibility of the strict system induced by f at the given alpha,
    over per-variable lengths x >= 1.

    The system is homogeneous, so a rational witness scales to an integral one
    (multiply by the lcm of the denominators); the returned witness is scaled
    that way."""
    f = as_formula(f)
    alpha = Fraction(alpha)
    if alpha <= 1:
        raise ValueError("alpha must be > 1")
    variables = list(f.variables)
    stages, final = _fm_reduce(_system(f, alpha), variables)
    if not _consistent(final):
        return FeasibilityResult(False, None)
    point = _back_substitute(stages, variables, {})
    assert point is not None, "FM-consistent system must back-substitute"
    lcm = 1
    for val in point.values():
        lcm = lcm * val.denominator // _gcd(lcm, val.denominator)
    witness = {v: int(point[v] * lcm) for v in variables}
    return FeasibilityResult(True, witness)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def dump_system(f: "Formula | str", alpha: Fraction) -> dict:
    """Human-readable inequalities plus a JSON-able coefficient matrix."""
    f = as_formula(f)
    alpha = Fraction(alpha)
    rows = []
    lines = []
    for rc in repetitions(f):
        lhs = " + ".join(
            "%s*%s" % (str(k * (2 - alpha)), render_var(v).lower())
            for v, k in rc.u_counts
        )
        rhs = " + ".join(
            "%s*%s" % (str(k * (alpha - 1)), render_var(v).lower())
            for v, k in rc.v_counts
        ) or "0"
        lines.append("%s:  %s < %s" % (rc.text, lhs, rhs))
        coeffs = {render_var(v): str(Fraction(k) * (2 - alpha)) for v, k in rc.u_counts}
        for v, k in rc.v_counts:
            key = render_var(v)
            coeffs[key] = str(Fraction(coeffs.get(key, "0")) - (alpha - 1) * k)
        rows.append({"repetition": rc.text, "coefficients": coeffs})
    return {"alpha": str(alpha), "inequalities": lines, "matrix": rows}


def nice_bound(f: "Formula | str") -> Fraction:
    """Every nice formula f has avoidability exponent at least 1 + 2^(1-v(f))."""
    f = as_formula(f)
    if not classify(f).is_nice:
        raise ValueError("the exponent bound applies to nice formulas only")
    return 1 + Fraction(1, 2 ** (f.var_count - 1))


@dataclass(frozen=True)
class AEBound:
    """A certified bracket on the feasibility threshold: the system is
    infeasible at lo (so every lo-free word avoids f and lo <= AE(f)) and
    feasible at hi."""

    lo: Fraction
    hi: Fraction

    @property
    def beta_lo(self) -> Fraction:
        """lo reported in the gap parameterization beta = (2-a)/(a-1)."""
        return (2 - self.lo) / (self.lo - 1)


def ae_lower_bound(f: "Formula | str", tol: Fraction) -> AEBound:
    """Dichotomy on alpha: bracket the exact feasibility threshold within tol.

    Above 2 every constraint holds trivially, so the threshold lies in (1, 2];
    below 1 + 1/(2*(L+1)) with L the longest fragment, summing the stuck-core
    constraints yields a contradiction, so a starting infeasible point always
    exists."""
    from .occurrence import ae_is_nontrivial

    f = as_formula(f)
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be > 0")
    if not ae_is_nontrivial(f).nontrivial:
        raise ValueError("AE is trivial (no nice divisor); no dichotomy bracket")

    def feasible(a: Fraction) -> bool:
        return system_feasible(f, a).feasible

    lo = 1 + Fraction(1, 2)
    while feasible(lo):
        lo = 1 + (lo - 1) / 2
        if lo - 1 < Fraction(1, 2**40):
            raise AssertionError("no infeasible point found above 1")
    if not feasible(Fraction(2)):
        return AEBound(Fraction(2), 2 + tol)
    hi = Fraction(2)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return AEBound(lo, hi)


@dataclass(frozen=True)
class VariableBound:
    """Case analysis over which repetition constraints are 'short' (period
    below n) in a (beta,n)-free word: per-variable image-length bounds, or the
    impossibility of any occurrence, or inconclusive."""

    bounds: dict[int, int] | None
    impossible: bool
    inconclusive: bool
    cases: int


MAX_CASE_CONSTRAINTS = 20


def variable_length_bound(
    f: "Formula | str", beta: Fraction, n: int, plus: bool = False
) -> VariableBound:
    """Bound the image length of every variable over occurrences of f in a
    (beta,n)-free word (plus picks the exponent convention: plus=True allows
    exponent beta, plus=False forbids it).

    Each repetition constraint either has period < n (short: U + V <= n-1) or
    obeys the exponent inequality; all 2^m cases are solved exactly and every
    feasible case must bound every variable, else the result is inconclusive.
    """
    f = as_formula(f)
    beta = Fraction(beta)
    if beta <= 1:
        raise ValueError("beta must be > 1")
    reps = repetitions(f)
    if len(reps) > MAX_CASE_CONSTRAINTS:
        return VariableBound(None, False, True, 0)
    variables = list(f.variables)
    base = [_Lin.make({v: Fraction(-1)}, Fraction(1), False) for v in variables]
    best: dict[int, Fraction | None] = {v: None for v in variables}
    feasible_cases = 0
    for mask in range(2 ** len(reps)):
        cons = list(base)
        for i, rc in enumerate(reps):
            coeffs: dict[int, Fraction] = {}
            if mask >> i & 1:  # short: period Sum(u)+Sum(v) <= n-1
                for v, k in rc.u_counts:
                    coeffs[v] = coeffs.get(v, Fraction(0)) + k
                for v, k in rc.v_counts:
                    coeffs[v] = coeffs.get(v, Fraction(0)) + k
                cons.append(_Lin.make(coeffs, Fraction(1 - n), False))
            else:
                for v, k in rc.u_counts:
                    coeffs[v] = coeffs.get(v, Fraction(0)) + (2 - beta) * k
                for v, k in rc.v_counts:
                    coeffs[v] = coeffs.get(v, Fraction(0)) - (beta - 1) * k
                cons.append(_Lin.make(coeffs, Fraction(0), not plus))
        _, final = _fm_reduce(cons, variables)
        if not _consistent(final):
            continue
        feasible_cases += 1
        for v in variables:
            others = [x for x in variables if x != v]
            _, remaining = _fm_reduce(cons, others)
            hi: Fraction | None = None
            hi_strict = False
            for c in remaining:
                a = c.coeff(v)
                if a > 0:
                    bound = -c.const / a
                    if hi is None or bound < hi or (bound == hi and c.strict):
                        hi, hi_strict = bound, c.strict
            if hi is None:
                return VariableBound(None, False, True, feasible_cases)
            int_hi = hi.numerator // hi.denominator
            if hi_strict and hi == int_hi:
                int_hi -= 1
            cur = best[v]
            if cur is None or int_hi > cur:
                best[v] = Fraction(int_hi)
    if feasible_cases == 0:
        return VariableBound({v: 0 for v in variables}, True, False, 0)
    return VariableBound(
        {v: int(best[v]) for v in variables}, False, False, feasible_cases
    )
