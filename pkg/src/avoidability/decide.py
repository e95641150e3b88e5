"""The avoidability decision procedure: adjacency graphs, free sets, reduction
to the empty formula, locked detection, and minimal avoidability by splitting.

A formula is unavoidable iff it is reducible (Bean-Ehrenfeucht-McNulty /
Zimin), so `is_avoidable` searches for a reduction sequence and returns it as
a replayable certificate when one exists. Reduction steps renormalize without
renaming variables, so the certificate reads in the input's own letters.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

from .formulas import (
    Formula,
    Fragment,
    as_formula,
    classify,
    generate_Ti,
    render_var,
    split,
    stable_normalize,
    _canonical_fragments,
    _render_frag,
)

FragmentSet = frozenset  # of Fragment


def _variables(frags) -> tuple[int, ...]:
    return tuple(sorted({c for g in frags for c in g}))


def _components(frags) -> dict:
    """Connected components of the adjacency graph on {X_L} u {X_R}, with an
    edge (X_L, Y_R) for every length-2 factor XY of a fragment."""
    parent: dict = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for v in _variables(frags):
        parent[("L", v)] = ("L", v)
        parent[("R", v)] = ("R", v)
    for g in frags:
        for i in range(len(g) - 1):
            a, b = find(("L", g[i])), find(("R", g[i + 1]))
            if a != b:
                parent[a] = b
    roots: dict = {}
    out = {}
    for v in parent:
        r = find(v)
        out[v] = roots.setdefault(r, len(roots))
    return out


@dataclass(frozen=True)
class AdjacencyGraph:
    """Bipartite graph on {X_L} u {X_R} with an edge (X_L, Y_R) iff XY is a
    factor of some fragment."""

    variables: tuple[int, ...]
    edges: frozenset[tuple[int, int]]  # (X, Y) meaning X_L -- Y_R


def adjacency_graph(f: "Formula | str") -> AdjacencyGraph:
    f = as_formula(f)
    edges = set()
    for g in f.fragments:
        for i in range(len(g) - 1):
            edges.add((g[i], g[i + 1]))
    return AdjacencyGraph(f.variables, frozenset(edges))


def _free_singletons(frags) -> list[int]:
    comp = _components(frags)
    return [v for v in _variables(frags) if comp[("L", v)] != comp[("R", v)]]


def free_singletons(f: "Formula | str") -> set[int]:
    """Variables X with X_L and X_R in distinct components of the adjacency graph."""
    f = as_formula(f)
    return set(_free_singletons(frozenset(f.fragments)))


def is_locked(f: "Formula | str") -> bool:
    """No non-empty free set. Any free set member X needs X_L and X_R in
    distinct components, so a formula is locked iff it has no free singleton."""
    f = as_formula(f)
    return bool(f.fragments) and not _free_singletons(frozenset(f.fragments))


def _free_sets(frags) -> list[tuple[int, ...]]:
    """All non-empty free sets, smallest first, then lexicographic."""
    comp = _components(frags)
    singles = _free_singletons(frags)
    out = []
    for size in range(1, len(singles) + 1):
        for combo in itertools.combinations(singles, size):
            if all(
                comp[("L", x)] != comp[("R", y)] for x in combo for y in combo
            ):
                out.append(combo)
    return out


def free_sets(f: "Formula | str") -> list[tuple[int, ...]]:
    f = as_formula(f)
    return _free_sets(frozenset(f.fragments))


def _reduce(frags: FragmentSet, deleted) -> FragmentSet:
    """Delete every occurrence of the given variables, drop empty fragments,
    and renormalize (factor pruning and isolated splitting) without renaming.

    Renormalizing keeps the reduction faithful to recurrent-word semantics:
    fragment collapse can isolate a variable, and the theorem 'unavoidable iff
    reducible' is about normalized formulas."""
    dset = set(deleted)
    return stable_normalize(tuple(c for c in g if c not in dset) for g in frags)


@dataclass(frozen=True)
class ReductionCertificate:
    """A witnessing reduction sequence: at each step the recorded set is free
    in the step's fragment set, and deleting it (plus renormalizing) yields
    the next step."""

    steps: tuple[tuple[FragmentSet, tuple[int, ...]], ...]

    def replay(self, f: "Formula | str") -> bool:
        f = as_formula(f)
        current = frozenset(f.fragments)
        for frags, deleted in self.steps:
            if current != frags:
                return False
            comp = _components(current)
            for x in deleted:
                for y in deleted:
                    if comp.get(("L", x)) == comp.get(("R", y)):
                        return False
            current = _reduce(current, deleted)
        return not current

    def to_json(self) -> str:
        return json.dumps(
            [
                {
                    "fragments": sorted(_render_frag(g) for g in frags),
                    "delete": [render_var(v) for v in deleted],
                }
                for frags, deleted in self.steps
            ]
        )


def is_avoidable(f: "Formula | str") -> tuple[bool, ReductionCertificate | None]:
    """(True, None) when no reduction sequence reaches the empty formula, else
    (False, certificate). Free sets are tried smallest-first in lexicographic
    order and dead fragment sets are memoized, so certificates are stable."""
    f = as_formula(f)
    dead: set[tuple[Fragment, ...]] = set()

    def search(frags: FragmentSet):
        if not frags:
            return []
        key = _canonical_fragments(frags)
        if key in dead:
            return None
        for s in _free_sets(frags):
            tail = search(_reduce(frags, s))
            if tail is not None:
                return [(frags, s)] + tail
        dead.add(key)
        return None

    steps = search(frozenset(f.fragments))
    if steps is None:
        return True, None
    return False, ReductionCertificate(tuple(steps))


def is_minimally_avoidable(f: "Formula | str") -> bool:
    """True iff f is avoidable and splitting any fragment of length >= 2 yields
    an unavoidable formula. Avoidable formulas have no length-1 fragments."""
    f = as_formula(f)
    avoidable, _ = is_avoidable(f)
    if not avoidable:
        raise ValueError("minimal avoidability applies to avoidable formulas only")
    for g in f.fragments:
        if len(g) < 2:
            raise AssertionError("avoidable formula with a length-1 fragment")
        avoidable_split, _ = is_avoidable(split(f, g))
        if avoidable_split:
            return False
    return True


def hybrid_Ti_witness(f: "Formula | str"):
    """For a hybrid formula: the shortest directed cycle among its XYX-fragments
    yields a circuit-formula divisor (the circuit formula maps identically
    onto the cycle). Returns (T_i, morphism dict) or None when the XYX part is
    acyclic."""
    f = as_formula(f)
    if not classify(f).is_hybrid:
        raise ValueError("circuit witnesses apply to hybrid formulas only")
    arcs: dict[int, set[int]] = {}
    for g in f.fragments:
        if len(g) == 3:
            arcs.setdefault(g[0], set()).add(g[1])
    cycle = _shortest_cycle(arcs)
    if cycle is None:
        return None
    i = len(cycle)
    morphism = {j: (cycle[j],) for j in range(i)}
    return generate_Ti(i), morphism


def contains_locked_subformula(f: "Formula | str") -> bool:
    """Some non-empty subset of fragments forms a locked formula."""
    f = as_formula(f)
    frags = f.fragments
    for size in range(1, len(frags) + 1):
        for combo in itertools.combinations(frags, size):
            sub = frozenset(combo)
            if _variables(sub) and not _free_singletons(sub):
                return True
    return False


def _shortest_cycle(arcs: dict[int, set[int]]) -> tuple[int, ...] | None:
    """Shortest directed cycle, lexicographically least among the shortest;
    BFS from every vertex in increasing order."""
    best: tuple[int, ...] | None = None
    for start in sorted(arcs):
        queue: list[tuple[int, ...]] = [(start,)]
        found = None
        while queue and found is None:
            if best is not None and len(queue[0]) >= len(best):
                break
            next_queue = []
            for path in queue:
                for nxt in sorted(arcs.get(path[-1], ())):
                    if nxt == start:
                        cand = path
                        if found is None or cand < found:
                            found = cand
                    elif nxt not in path:
                        next_queue.append(path + (nxt,))
            queue = next_queue
        if found is not None and (best is None or (len(found), found) < (len(best), best)):
            best = found
    return best
