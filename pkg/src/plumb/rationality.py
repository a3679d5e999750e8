"""Laufer's rationality test for negative definite plumbing graphs."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

from .graph import GraphError, PlumbingGraph
from .lattice import build_intersection_form, is_negative_definite

DEFAULT_ITER_CAP = 10**6


class IterationCapExceeded(RuntimeError):
    """Laufer's loop ran past its guard; an internal error, never a verdict."""


def iteration_cap() -> int:
    raw = os.environ.get("PLUMB_ITER_CAP")
    return int(raw) if raw else DEFAULT_ITER_CAP


@dataclass(frozen=True)
class LauferStep:
    vertex: str
    product: int
    action: str  # continue | increment | halt_not_rational | halt_rational


@dataclass(frozen=True)
class LauferTrace:
    cycles: tuple[tuple[int, ...], ...]
    steps: tuple[LauferStep, ...] = field(repr=False)
    verdict: str

    @property
    def final_cycle(self) -> tuple[int, ...]:
        return self.cycles[-1]

    @property
    def rational(self) -> bool:
        return self.verdict == "rational"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "final_cycle": list(self.final_cycle),
            "cycles": [list(c) for c in self.cycles],
            "steps": [{"vertex": s.vertex, "product": s.product, "action": s.action} for s in self.steps],
        }


def laufer_rationality(g: PlumbingGraph, order: Sequence[int] | None = None, cap: int | None = None) -> LauferTrace:
    """Run Laufer's computation sequence starting from the all-ones cycle.

    Vertices are scanned in ``order`` (canonical order by default).  A product
    ``K.Sigma_v >= 2`` halts with ``not_rational``; a product of exactly 1
    adds ``Sigma_v`` to the cycle and restarts the scan from the first vertex;
    a full scan with every product ``<= 0`` halts with ``rational``.  On a
    forest this is the same as testing each component separately.
    """
    Q = build_intersection_form(g)
    if not is_negative_definite(Q):
        raise GraphError("Laufer's algorithm needs a negative definite graph")
    cap = iteration_cap() if cap is None else cap
    n = len(g)
    order = list(range(n)) if order is None else list(order)
    ids = g.ids
    K = [1] * n
    QK = list(Q.apply(K))
    cycles = [tuple(K)]
    steps = []
    count = 0
    while True:
        for i in order:
            count += 1
            if count > cap:
                raise IterationCapExceeded(f"Laufer loop exceeded {cap} steps")
            prod = QK[i]
            if prod >= 2:
                steps.append(LauferStep(ids[i], prod, "halt_not_rational"))
                return LauferTrace(tuple(cycles), tuple(steps), "not_rational")
            if prod == 1:
                steps.append(LauferStep(ids[i], prod, "increment"))
                K[i] += 1
                for j in range(n):
                    QK[j] += Q.Q[j][i]
                cycles.append(tuple(K))
                break
            steps.append(LauferStep(ids[i], prod, "continue"))
        else:
            if steps:
                last = steps[-1]
                steps[-1] = LauferStep(last.vertex, last.product, "halt_rational")
            return LauferTrace(tuple(cycles), tuple(steps), "rational")


def is_rational(g: PlumbingGraph) -> bool:
    return laufer_rationality(g).rational


def lemma_precheck(g: PlumbingGraph) -> bool:
    """Necessary condition for rationality: n_i + d_i <= 1 everywhere."""
    return all(w + g.degree(i) <= 1 for i, (_, w) in enumerate(g.vertices))
