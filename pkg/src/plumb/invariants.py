"""mu-bar, correction terms, and the rational-ball obstruction verdicts.

Correction terms of a negative definite plumbing with L-space boundary are

    d(Y, t) = max { (K^2 + n) / 4 : K characteristic, K restricts to t },

and are computed two independent ways:

``d_oracle``
    exact lattice-point enumeration (Fincke-Pohst) of the class coset
    ``K0 + 2 Q Z^n`` inside the ellipsoid that could beat the current best.
``d_path``
    discharge every initial vector ``n_i + 2 <= K_i <= -n_i`` of the class
    along ``K -> K + 2 Q e_i`` (pivot ``K_i = -n_i``) and keep those whose
    path reaches the terminal box ``n_i <= K_i <= -n_i - 2``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .graph import GraphError, PlumbingGraph
from .lattice import (
    IntersectionForm,
    LatticeError,
    build_intersection_form,
    char_square,
    class_key,
    enumerate_spinc_classes,
    is_characteristic,
    is_negative_definite,
    lattice_summary,
    same_spinc,
)
from .rationality import laufer_rationality
from .spin import WuSet, enumerate_wu_sets

log = logging.getLogger(__name__)


class PreconditionError(ValueError):
    """Input outside the hypotheses an operation is certified for."""


class DischargeError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# mu-bar
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MubarValue:
    wu_set: WuSet
    sigma: int
    wu_square: int

    @property
    def mubar(self) -> int:
        return self.sigma - self.wu_square


def mubar(g: PlumbingGraph, S: WuSet | Iterable[str], Q: IntersectionForm | None = None) -> MubarValue:
    """``sigma(X) - [Sigma_S]^2`` with the homological square ``1_S^T Q 1_S``."""
    Q = Q or build_intersection_form(g)
    if not isinstance(S, WuSet):
        from .spin import _make

        S = _make(g, Q, S)
    ind = [1 if v in S.S else 0 for v in g.ids]
    if not is_characteristic(Q, Q.apply(ind)):
        raise GraphError("not a Wu set")
    sigma = lattice_summary(Q).sigma
    return MubarValue(S, sigma, Q.pair(ind, ind))


def m_counter(g: PlumbingGraph, S: WuSet | Iterable[str]) -> int:
    """Vertices outside S having exactly ``-n_i`` neighbours in S."""
    S = S.S if isinstance(S, WuSet) else frozenset(S)
    ids = g.ids
    count = 0
    for i, (v, w) in enumerate(g.vertices):
        if v in S:
            continue
        if sum(1 for j in g.neighbours(i) if ids[j] in S) == -w:
            count += 1
    return count


# ---------------------------------------------------------------------------
# correction terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrectionTerm:
    class_rep: tuple[int, ...]
    d: Fraction
    witness: tuple[int, ...]
    method: str
    certified: bool = True
    diagnostics: dict = field(default_factory=dict, compare=False)


def _check_d_preconditions(g: PlumbingGraph, Q: IntersectionForm, reps, uncertified: bool) -> bool:
    if not is_negative_definite(Q):
        raise PreconditionError("graph is not negative definite")
    for K in reps:
        if not is_characteristic(Q, K):
            raise PreconditionError(f"{tuple(K)} is not characteristic")
    if len(g) and not laufer_rationality(g).rational:
        if not uncertified:
            raise PreconditionError("graph is not Laufer-rational; d would only be a formula value")
        return False
    return True


def _formula(Q: IntersectionForm, K: Sequence[int]) -> Fraction:
    return (char_square(Q, K) + Q.n) / 4


def _ldl_unit(A: list[list[int]]) -> tuple[list[Fraction], list[list[Fraction]]]:
    """``A = L D L^T`` for positive definite ``A``, L unit lower triangular."""
    n = len(A)
    L = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    D = [Fraction(0)] * n
    for j in range(n):
        D[j] = Fraction(A[j][j]) - sum((L[j][k] ** 2 * D[k] for k in range(j)), Fraction(0))
        for i in range(j + 1, n):
            L[i][j] = (A[i][j] - sum(L[i][k] * L[j][k] * D[k] for k in range(j))) / D[j]
    return D, L


def closest_coset_vectors(Q: IntersectionForm, K0: Sequence[int]) -> tuple[Fraction, list[tuple[int, ...]]]:
    """Maximize ``K^2`` over ``K = K0 + 2 Q x``, ``x`` integral.

    Returns the maximal square and every maximizer.  With ``A = -Q`` and
    ``c = Q^{-1} K0 / 2`` one has ``-K^2 = 4 (x + c)^T A (x + c)``, so this is
    a closest-vector search in the positive definite form ``A``.  The radius
    starts at the value of ``K0`` itself and shrinks as better points appear;
    every point of the coset with a larger square lies inside that radius,
    so the search is complete.
    """
    n = Q.n
    A = [[-x for x in row] for row in Q.Q]
    D, L = _ldl_unit(A)
    c = [x / 2 for x in Q.solve(K0)]
    best = sum((a * b for a, b in zip(c, [sum(A[i][j] * c[j] for j in range(n)) for i in range(n)])), Fraction(0))
    found: list[tuple[int, ...]] = []
    x = [0] * n
    y = [Fraction(0)] * n

    def visit(level: int, partial: Fraction):
        nonlocal best, found
        shift = sum((L[j][level] * y[j] for j in range(level + 1, n)), Fraction(0))
        base = math.floor(-shift - c[level])
        # walk outward from the centre in both directions
        for direction, first in ((1, base + 1), (-1, base)):
            xi = first
            while True:
                yi = xi + c[level]
                t = yi + shift
                val = partial + D[level] * t * t
                if val > best:
                    break
                x[level] = xi
                y[level] = yi
                if level == 0:
                    if val < best:
                        best = val
                        found = []
                    found.append(tuple(x))
                else:
                    visit(level - 1, val)
                xi += direction

    if n:
        visit(n - 1, Fraction(0))
    else:
        found = [()]
    vecs = sorted({tuple(k + 2 * s for k, s in zip(K0, Q.apply(xx))) for xx in found})
    return -4 * best, vecs


def d_oracle(g: PlumbingGraph, class_rep: Sequence[int], uncertified: bool = False,
             Q: IntersectionForm | None = None) -> CorrectionTerm:
    """Correction term of the class of ``class_rep`` by complete enumeration."""
    Q = Q or build_intersection_form(g)
    K0 = tuple(class_rep)
    certified = _check_d_preconditions(g, Q, [K0], uncertified)
    sq, vecs = closest_coset_vectors(Q, K0)
    return CorrectionTerm(K0, (sq + Q.n) / 4, vecs[0], "oracle", certified, {"maximizers": len(vecs)})


# -- discharge ---------------------------------------------------------------

@dataclass(frozen=True)
class DischargeTrace:
    start: tuple[int, ...]
    pivots: tuple[int, ...]
    outcome: str  # terminal | dead
    final: tuple[int, ...]


def is_initial(Q: IntersectionForm, K: Sequence[int]) -> bool:
    return all(n + 2 <= k <= -n for k, n in zip(K, Q.diagonal))


def is_terminal(Q: IntersectionForm, K: Sequence[int]) -> bool:
    return all(n <= k <= -n - 2 for k, n in zip(K, Q.diagonal))


def discharge_path(Q: IntersectionForm, K: Sequence[int], order: Sequence[int] | None = None,
                   cap: int = 10**7) -> DischargeTrace:
    """Follow the path from ``K`` until it dies or becomes terminal.

    Pivots are chosen as the first vertex in ``order`` (canonical by default)
    with ``K_i = -n_i``.  Each step checks ``4 K_i + 4 n_i == 0``, i.e. that
    the step preserves ``K^2``.
    """
    diag = Q.diagonal
    n = Q.n
    order = range(n) if order is None else order
    cur = list(K)
    pivots = []
    while True:
        if any(cur[i] > -diag[i] for i in range(n)):
            return DischargeTrace(tuple(K), tuple(pivots), "dead", tuple(cur))
        piv = next((i for i in order if cur[i] == -diag[i]), None)
        if piv is None:
            if not all(cur[i] >= diag[i] for i in range(n)):
                raise DischargeError(f"path left the box below at {cur}")
            return DischargeTrace(tuple(K), tuple(pivots), "terminal", tuple(cur))
        if 4 * cur[piv] + 4 * diag[piv] != 0:
            raise DischargeError("discharge step would change K^2")
        for j in range(n):
            cur[j] += 2 * Q.Q[j][piv]
        pivots.append(piv)
        if len(pivots) > cap:
            raise DischargeError("discharge path exceeded step cap")


def _kernel_inputs(Q: IntersectionForm):
    m = abs(Q.det)
    adj_mod = np.array([[a % m for a in row] for row in Q.adjugate], dtype=np.int64)
    return np.array(Q.Q, dtype=np.int64), adj_mod, m


def full_path_table(g: PlumbingGraph, reps: Sequence[Sequence[int]], Q: IntersectionForm | None = None,
                    backend: str | None = None) -> tuple[list[list[tuple[int, ...]]], int]:
    """Initial vectors with full paths, grouped by the class of each rep.

    Also returns the number of full paths over all classes.
    """
    Q = Q or build_intersection_form(g)
    if Q.n == 0:
        return [[()] for _ in reps], 1
    Qa, adj_mod, m = _kernel_inputs(Q)
    keys = np.array([class_key(Q, K) for K in reps], dtype=np.int64).reshape(-1, Q.n)
    matches, n_full = kernels.full_path_starts(Qa, adj_mod, m, keys, backend=backend)
    table: list[list[tuple[int, ...]]] = [[] for _ in reps]
    for t, K in matches:
        table[t].append(tuple(int(k) for k in K))
    return table, int(n_full)


def d_path_many(g: PlumbingGraph, reps: Sequence[Sequence[int]], uncertified: bool = False,
                Q: IntersectionForm | None = None, backend: str | None = None) -> list[CorrectionTerm]:
    """``d_path`` for several classes with a single sweep over the initial box."""
    Q = Q or build_intersection_form(g)
    reps = [tuple(K) for K in reps]
    certified = _check_d_preconditions(g, Q, reps, uncertified)
    table, n_full = full_path_table(g, reps, Q, backend)
    out = []
    for K0, starts in zip(reps, table):
        if not starts:
            raise DischargeError(f"no full path found in the class of {K0}")
        scored = [(_formula(Q, K), K) for K in starts]
        best = max(s for s, _ in scored)
        witness = min(K for s, K in scored if s == best)
        out.append(CorrectionTerm(K0, best, witness, "path", certified,
                                  {"full_paths_in_class": len(starts), "full_paths_total": n_full}))
    return out


def d_path(g: PlumbingGraph, class_rep: Sequence[int], uncertified: bool = False,
           Q: IntersectionForm | None = None, backend: str | None = None) -> CorrectionTerm:
    """Correction term of the class of ``class_rep`` from full discharge paths."""
    return d_path_many(g, [class_rep], uncertified, Q, backend)[0]


def d_formula(g: PlumbingGraph, class_rep: Sequence[int], Q: IntersectionForm | None = None) -> CorrectionTerm:
    """``max (K^2 + n)/4`` over the class without the rationality check (uncertified)."""
    Q = Q or build_intersection_form(g)
    if not is_negative_definite(Q):
        raise PreconditionError("graph is not negative definite")
    sq, vecs = closest_coset_vectors(Q, tuple(class_rep))
    return CorrectionTerm(tuple(class_rep), (sq + Q.n) / 4, vecs[0], "oracle", False)


# ---------------------------------------------------------------------------
# main identity and obstruction verdicts
# ---------------------------------------------------------------------------

@dataclass
class SpinRecord:
    wu_set: WuSet
    mubar: int
    sigma: int
    wu_square: int
    d_oracle: Fraction | None
    d_path: Fraction | None
    m_counter: int
    certified: bool

    @property
    def identity_holds(self) -> bool | None:
        if self.d_oracle is None:
            return None
        return self.mubar == -4 * self.d_oracle and self.d_oracle == self.d_path


@dataclass
class TheoremReport:
    passed: bool
    records: list[SpinRecord]
    counterexamples: list[dict]
    error: str | None = None


def _require_nd(Q: IntersectionForm):
    if not is_negative_definite(Q):
        detail = " (determinant is zero: boundary is not a rational homology sphere)" if Q.det == 0 else ""
        raise PreconditionError("graph is not negative definite" + detail)


def spin_records(g: PlumbingGraph, Q: IntersectionForm | None = None, with_d: bool = True,
                 uncertified: bool = False, backend: str | None = None) -> list[SpinRecord]:
    Q = Q or build_intersection_form(g)
    _require_nd(Q)
    wu = enumerate_wu_sets(g, Q)
    rational = not len(g) or laufer_rationality(g).rational
    mus = [mubar(g, S, Q) for S in wu]
    d_or: list = [None] * len(wu)
    d_pa: list = [None] * len(wu)
    if with_d and (rational or uncertified):
        reps = [S.char for S in wu]
        d_or = [d_oracle(g, K, uncertified=True, Q=Q).d for K in reps]
        try:
            d_pa = [t.d for t in d_path_many(g, reps, uncertified=True, Q=Q, backend=backend)]
        except DischargeError:
            if rational:
                raise
            d_pa = [None] * len(wu)
    return [
        SpinRecord(S, mv.mubar, mv.sigma, mv.wu_square, do, dp, m_counter(g, S), rational)
        for S, mv, do, dp in zip(wu, mus, d_or, d_pa)
    ]


def verify_theorem(g: PlumbingGraph, backend: str | None = None) -> TheoremReport:
    """Check ``mubar(S) == -4 d`` (both d routes) for every Wu set.

    Failures come back as structured counterexample records.
    """
    Q = build_intersection_form(g)
    try:
        _require_nd(Q)
        if len(g) and not laufer_rationality(g).rational:
            raise PreconditionError("graph is not Laufer-rational")
        records = spin_records(g, Q, backend=backend)
    except (PreconditionError, DischargeError, GraphError, LatticeError) as exc:
        return TheoremReport(False, [], [], str(exc))
    bad = []
    for r in records:
        if not r.identity_holds:
            bad.append({
                "wu_set": r.wu_set.sorted_ids(g),
                "mubar": r.mubar,
                "d_oracle": r.d_oracle,
                "d_path": r.d_path,
            })
    return TheoremReport(not bad, records, bad)


def spinc_table(g: PlumbingGraph, Q: IntersectionForm | None = None, uncertified: bool = False,
                backend: str | None = None) -> list[CorrectionTerm]:
    """d for every spin^c class (oracle route), one canonical representative each."""
    Q = Q or build_intersection_form(g)
    reps = enumerate_spinc_classes(Q)
    return [d_oracle(g, K, uncertified=uncertified, Q=Q) for K in reps]


@dataclass
class ObstructionVerdict:
    per_spin: list[dict]
    mubar_product: int
    spin_ball_obstructed: bool | None
    det_parity: str
    any_ball_obstructed: bool | str | None
    certified: bool


def obstruction_report(g: PlumbingGraph, records: list[SpinRecord] | None = None,
                       backend: str | None = None) -> ObstructionVerdict:
    """Rational-ball obstructions from mu-bar and d.

    Nonzero d(s) rules out a spin^c rational ball filling (Y, s); a nonzero
    product of mu-bar over spin structures rules out a spin rational ball;
    for odd determinant a nonzero mu-bar of the unique spin structure rules
    out every rational ball.  Verdicts are ``None`` unless the graph is
    Laufer-rational.
    """
    Q = build_intersection_form(g)
    records = records if records is not None else spin_records(g, Q, backend=backend)
    certified = all(r.certified for r in records)
    per_spin = []
    for r in records:
        obstructed = None
        if certified and r.d_oracle is not None:
            obstructed = r.d_oracle != 0
        per_spin.append({
            "wu_set": r.wu_set.sorted_ids(g),
            "mubar": r.mubar,
            "d": r.d_oracle,
            "spin_c_ball_obstructed": obstructed,
        })
    product = math.prod(r.mubar for r in records)
    odd = Q.det % 2 != 0
    if not certified:
        spin_ball = None
        any_ball = None
    else:
        spin_ball = product != 0
        any_ball = (records[0].mubar != 0) if odd else "not_applicable"
    return ObstructionVerdict(per_spin, product, spin_ball, "odd" if odd else "even", any_ball, certified)


def spin_class_count(Q: IntersectionForm) -> int:
    """Self-conjugate spin^c classes (brute force over class representatives)."""
    reps = enumerate_spinc_classes(Q)
    return sum(1 for K in reps if same_spinc(Q, K, tuple(-k for k in K)))
