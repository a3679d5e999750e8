"""Spin structures on plumbed 3-manifolds, encoded as Wu sets.

Two independent routes produce the Wu sets of a graph:

* ``enumerate_wu_sets`` solves ``Q x = diag(Q)`` over GF(2) and returns
  every solution (this is exactly the characteristic condition).
* ``lift_wu_sets`` runs the leaf-erasing reduction of ``reduce_mod2`` and
  lifts subsets of the edgeless residue back through the recorded moves.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import product
from typing import Iterable

from .graph import GraphError, PlumbingGraph
from .lattice import IntersectionForm, build_intersection_form, is_characteristic

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReductionStep:
    move: int  # 1: even leaf, erase leaf and neighbour; 2: odd leaf, erase leaf and flip neighbour
    leaf: str
    neighbour: str
    neighbour_parity: int  # parity of the neighbour's weight just before the move


@dataclass(frozen=True)
class ReductionTrace:
    steps: tuple[ReductionStep, ...]
    residual: tuple[tuple[str, int], ...]

    @property
    def p(self) -> int:
        return len(self.residual)

    @property
    def q(self) -> int:
        return sum(1 for _, parity in self.residual if parity == 0)


@dataclass(frozen=True)
class WuSet:
    S: frozenset[str]
    char: tuple[int, ...]
    independent: bool = True

    def sorted_ids(self, g: PlumbingGraph) -> list[str]:
        return [v for v in g.ids if v in self.S]


def reduce_mod2(g: PlumbingGraph) -> ReductionTrace:
    """Erase leaves until no edges remain, tracking weight parities only.

    The leaf with the lowest canonical index is processed first.
    """
    parity = {v: w % 2 for v, w in g.vertices}
    nbrs = {v: set() for v in g.ids}
    for a, b in g.edges:
        nbrs[a].add(b)
        nbrs[b].add(a)
    alive = list(g.ids)
    steps = []
    while True:
        leaf = next((v for v in alive if len(nbrs[v]) == 1), None)
        if leaf is None:
            break
        (w,) = nbrs[leaf]
        if parity[leaf] == 0:
            steps.append(ReductionStep(1, leaf, w, parity[w]))
            for x in (leaf, w):
                for u in nbrs[x]:
                    nbrs[u].discard(x)
                nbrs[x].clear()
                alive.remove(x)
        else:
            steps.append(ReductionStep(2, leaf, w, parity[w]))
            nbrs[w].discard(leaf)
            nbrs[leaf].clear()
            alive.remove(leaf)
            parity[w] ^= 1
    return ReductionTrace(tuple(steps), tuple((v, parity[v]) for v in alive))


def replay_reduction(g: PlumbingGraph, steps: Iterable[ReductionStep]) -> tuple[tuple[str, int], ...]:
    """Apply recorded moves to ``g`` and return the residual (id, parity) list."""
    parity = {v: w % 2 for v, w in g.vertices}
    alive = list(g.ids)
    for st in steps:
        if st.move == 1:
            alive.remove(st.leaf)
            alive.remove(st.neighbour)
        else:
            alive.remove(st.leaf)
            parity[st.neighbour] ^= 1
    return tuple((v, parity[v]) for v in alive)


def wu_char_vector(g: PlumbingGraph, S: Iterable[str], Q: IntersectionForm | None = None) -> tuple[int, ...]:
    """Evaluations of the class dual to ``Sigma_S``: ``Q 1_S``.

    Raises GraphError if the result is not characteristic.
    """
    Q = Q or build_intersection_form(g)
    S = set(S)
    for v in S:
        g.index(v)
    ind = [1 if v in S else 0 for v in g.ids]
    c = Q.apply(ind)
    if not is_characteristic(Q, c):
        raise GraphError(f"{sorted(S)} is not a Wu set: Q 1_S is not characteristic")
    return c


def is_independent(g: PlumbingGraph, S: Iterable[str]) -> bool:
    S = set(S)
    return not any(a in S and b in S for a, b in g.edges)


def _make(g: PlumbingGraph, Q: IntersectionForm, S: Iterable[str]) -> WuSet:
    S = frozenset(S)
    indep = is_independent(g, S)
    if not indep:
        log.warning("Wu set %s is not an independent set", sorted(S))
    return WuSet(S, wu_char_vector(g, S, Q), indep)


def gf2_solutions(rows: list[int], rhs: list[int], n: int) -> list[int]:
    """All x in GF(2)^n (as bitmasks) with row_i . x = rhs_i."""
    pivots: list[tuple[int, int, int]] = []  # (pivot column, row mask, rhs)
    for r, b in zip(rows, rhs):
        for col, prow, pb in pivots:
            if r >> col & 1:
                r ^= prow
                b ^= pb
        if r == 0:
            if b:
                return []
            continue
        col = r.bit_length() - 1
        # keep the echelon form reduced
        reduced = []
        for c2, prow, pb in pivots:
            if prow >> col & 1:
                prow ^= r
                pb ^= b
            reduced.append((c2, prow, pb))
        pivots = reduced + [(col, r, b)]
    pivot_cols = {c for c, _, _ in pivots}
    free = [c for c in range(n) if c not in pivot_cols]
    out = []
    for bits in product((0, 1), repeat=len(free)):
        x = 0
        for c, bit in zip(free, bits):
            if bit:
                x |= 1 << c
        for c, prow, pb in pivots:
            val = pb ^ (bin(prow & x & ~(1 << c)).count("1") & 1)
            if val:
                x |= 1 << c
        out.append(x)
    return out


def enumerate_wu_sets(g: PlumbingGraph, Q: IntersectionForm | None = None) -> list[WuSet]:
    """All Wu sets, one per spin structure, from the GF(2) characteristic equation.

    Results are sorted by the canonical-order indicator vector.
    """
    Q = Q or build_intersection_form(g)
    if Q.det == 0:
        raise GraphError("determinant is zero: boundary is not a rational homology sphere")
    n = len(g)
    rows = [sum((Q.Q[i][j] & 1) << j for j in range(n)) for i in range(n)]
    rhs = [Q.Q[i][i] & 1 for i in range(n)]
    sols = gf2_solutions(rows, rhs, n)
    ids = g.ids
    sets = [frozenset(ids[j] for j in range(n) if x >> j & 1) for x in sols]
    return [_make(g, Q, S) for S in _sort_sets(g, sets)]


def lift_wu_sets(g: PlumbingGraph, trace: ReductionTrace | None = None) -> list[WuSet]:
    """Wu sets produced by lifting residual subsets back through the moves."""
    trace = trace or reduce_mod2(g)
    Q = build_intersection_form(g)
    nbrs = {v: set() for v in g.ids}
    for a, b in g.edges:
        nbrs[a].add(b)
        nbrs[b].add(a)
    odd = [v for v, par in trace.residual if par == 1]
    even = [v for v, par in trace.residual if par == 0]
    results = []
    for bits in product((0, 1), repeat=len(even)):
        S = set(odd) | {v for v, b in zip(even, bits) if b}
        for st in reversed(trace.steps):
            if st.move == 1:
                # adjacency of w read in the graph just before the move
                count = sum(1 for u in nbrs[st.neighbour] if u in S)
                if count % 2 != st.neighbour_parity:
                    S.add(st.leaf)
            elif st.neighbour not in S:
                S.add(st.leaf)
        results.append(frozenset(S))
    return [_make(g, Q, S) for S in _sort_sets(g, results)]


def _sort_sets(g: PlumbingGraph, sets):
    ids = g.ids
    return sorted(sets, key=lambda S: tuple(int(v in S) for v in ids))
