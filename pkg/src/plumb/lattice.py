"""Exact linear algebra on the plumbing lattice.

Everything here works with Python integers and ``fractions.Fraction``; no
floating point is involved.  Characteristic vectors are plain integer tuples
holding the evaluations ``K(Sigma_i)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Sequence

from .graph import PlumbingGraph

Vector = tuple[int, ...]


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class IntersectionForm:
    """Symmetric integer matrix indexed by the graph's canonical vertex order."""

    Q: tuple[tuple[int, ...], ...]
    ids: tuple[str, ...] = ()

    def __post_init__(self):
        Q = tuple(tuple(int(x) for x in row) for row in self.Q)
        n = len(Q)
        if any(len(row) != n for row in Q):
            raise LatticeError("intersection form must be square")
        if any(Q[i][j] != Q[j][i] for i in range(n) for j in range(i)):
            raise LatticeError("intersection form must be symmetric")
        object.__setattr__(self, "Q", Q)
        if not self.ids:
            object.__setattr__(self, "ids", tuple(f"v{i}" for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.Q)

    @property
    def diagonal(self) -> Vector:
        return tuple(self.Q[i][i] for i in range(self.n))

    def as_lists(self) -> list[list[int]]:
        return [list(r) for r in self.Q]

    def apply(self, x: Sequence[int]) -> Vector:
        return tuple(sum(a * b for a, b in zip(row, x)) for row in self.Q)

    def pair(self, x: Sequence[int], y: Sequence[int]) -> int:
        return sum(a * b for a, b in zip(x, self.apply(y)))

    @cached_property
    def det(self) -> int:
        return bareiss_det(self.Q)

    @cached_property
    def inverse(self) -> tuple[tuple[Fraction, ...], ...]:
        if self.det == 0:
            raise LatticeError("intersection form is singular")
        return rational_inverse(self.Q)

    @cached_property
    def adjugate(self) -> tuple[tuple[int, ...], ...]:
        d = self.det
        return tuple(tuple(int(x * d) for x in row) for row in self.inverse)

    @cached_property
    def snf(self) -> "SmithForm":
        return smith_normal_form(self.Q)

    def solve(self, y: Sequence[int]) -> tuple[Fraction, ...]:
        inv = self.inverse
        return tuple(sum(a * b for a, b in zip(row, y)) for row in inv)


def build_intersection_form(g: PlumbingGraph) -> IntersectionForm:
    n = len(g)
    Q = [[0] * n for _ in range(n)]
    for i, (_, w) in enumerate(g.vertices):
        Q[i][i] = w
    for a, b in g.edges:
        i, j = g.index(a), g.index(b)
        Q[i][j] = Q[j][i] = 1
    return IntersectionForm(tuple(map(tuple, Q)), tuple(g.ids))


# ---------------------------------------------------------------------------
# determinants, inverses, signature
# ---------------------------------------------------------------------------

def bareiss_det(M: Sequence[Sequence[int]]) -> int:
    """Fraction-free Gaussian elimination determinant."""
    A = [list(r) for r in M]
    n = len(A)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def leading_minors(M: Sequence[Sequence[int]]) -> list[int]:
    return [bareiss_det([row[:k] for row in M[:k]]) for k in range(1, len(M) + 1)]


def rational_inverse(M: Sequence[Sequence[int]]) -> tuple[tuple[Fraction, ...], ...]:
    n = len(M)
    A = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            raise LatticeError("matrix is singular")
        A[c], A[p] = A[p], A[c]
        piv = A[c][c]
        A[c] = [x / piv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return tuple(tuple(row[n:]) for row in A)


def ldl_diagonal(M: Sequence[Sequence[int]]) -> list[Fraction]:
    """Diagonal of an exact congruence diagonalization ``P M P^T = D``.

    Symmetric pivoting: a nonzero diagonal entry is swapped into place; when
    the remaining diagonal is zero but an off-diagonal entry is not, row and
    column ``k`` are replaced by their sum with the partner to create one.
    """
    A = [[Fraction(x) for x in row] for row in M]
    n = len(A)
    diag = []
    for k in range(n):
        p = next((i for i in range(k, n) if A[i][i] != 0), None)
        if p is None:
            q = next(((i, j) for i in range(k, n) for j in range(i + 1, n) if A[i][j] != 0), None)
            if q is None:
                diag.extend(Fraction(0) for _ in range(k, n))
                break
            i, j = q
            # row/col i += row/col j  -> new A[i][i] = 2 A[i][j] + A[j][j] = 2 A[i][j]
            for c in range(n):
                A[i][c] += A[j][c]
            for r in range(n):
                A[r][i] += A[r][j]
            p = i
        if p != k:
            A[k], A[p] = A[p], A[k]
            for row in A:
                row[k], row[p] = row[p], row[k]
        piv = A[k][k]
        diag.append(piv)
        for i in range(k + 1, n):
            if A[i][k] != 0:
                f = A[i][k] / piv
                for j in range(k, n):
                    A[i][j] -= f * A[k][j]
                A[i][k] = Fraction(0)
        for j in range(k + 1, n):
            A[k][j] = Fraction(0)
    return diag


def signature(M: Sequence[Sequence[int]]) -> tuple[int, int, int]:
    """(n_plus, n_minus, n_zero) of a symmetric integer matrix."""
    d = ldl_diagonal(M)
    return (sum(x > 0 for x in d), sum(x < 0 for x in d), sum(x == 0 for x in d))


def is_negative_definite(Q: IntersectionForm) -> bool:
    """Leading principal minors alternate in sign: (-1)^k det_k > 0."""
    return all((-1) ** k * m > 0 for k, m in enumerate(leading_minors(Q.Q), start=1))


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmithForm:
    """``U @ M @ V == diag(factors)`` with U, V unimodular."""

    factors: tuple[int, ...]
    U: tuple[tuple[int, ...], ...]
    V: tuple[tuple[int, ...], ...]


def smith_normal_form(M: Sequence[Sequence[int]]) -> SmithForm:
    n = len(M)
    A = [list(r) for r in M]
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for R in (A, V):
            for row in R:
                row[i], row[j] = row[j], row[i]

    def add_row(src, dst, f):  # row dst += f * row src
        A[dst] = [a + f * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + f * b for a, b in zip(U[dst], U[src])]

    def add_col(src, dst, f):
        for R in (A, V):
            for row in R:
                row[dst] += f * row[src]

    for t in range(n):
        nz = [(abs(A[i][j]), i, j) for i in range(t, n) for j in range(t, n) if A[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            done = True
            for i in range(t + 1, n):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    add_row(t, i, -q)
                    if A[i][t]:
                        done = False
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    add_col(t, j, -q)
                    if A[t][j]:
                        done = False
            if not done:
                # bring the smallest remaining entry of row/col t to the pivot
                cand = [(abs(A[i][t]), i, "r") for i in range(t + 1, n) if A[i][t]]
                cand += [(abs(A[t][j]), j, "c") for j in range(t + 1, n) if A[t][j]]
                smallest, k, kind = min(cand)
                if abs(A[t][t]) > smallest:
                    if kind == "r":
                        swap_rows(t, k)
                    else:
                        swap_cols(t, k)
                continue
            # pivot must divide the rest of the block
            bad = next(((i, j) for i in range(t + 1, n) for j in range(t + 1, n) if A[i][j] % A[t][t]), None)
            if bad is None:
                break
            add_row(bad[0], t, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
    factors = tuple(A[i][i] for i in range(n))
    return SmithForm(factors, tuple(map(tuple, U)), tuple(map(tuple, V)))


@dataclass(frozen=True)
class LatticeSummary:
    det: int
    signature: tuple[int, int, int]
    invariant_factors: tuple[int, ...]
    h1_order: int | str
    dim_h1_mod2: int

    @property
    def sigma(self) -> int:
        return self.signature[0] - self.signature[1]


def lattice_summary(Q: IntersectionForm) -> LatticeSummary:
    factors = tuple(sorted(Q.snf.factors, key=lambda f: (f == 0, f)))
    det = Q.det
    return LatticeSummary(
        det=det,
        signature=signature(Q.Q),
        invariant_factors=factors,
        h1_order=abs(det) if det else "infinite",
        dim_h1_mod2=sum(1 for f in factors if f % 2 == 0),
    )


# ---------------------------------------------------------------------------
# characteristic vectors and spin^c classes
# ---------------------------------------------------------------------------

def is_characteristic(Q: IntersectionForm, K: Sequence[int]) -> bool:
    return len(K) == Q.n and all((k - n) % 2 == 0 for k, n in zip(K, Q.diagonal))


def char_square(Q: IntersectionForm, K: Sequence[int]) -> Fraction:
    """``K^T Q^{-1} K`` as an exact rational."""
    if Q.det == 0:
        raise LatticeError("char_square needs a nonsingular form")
    x = Q.solve(K)
    return sum((k * xi for k, xi in zip(K, x)), Fraction(0))


def integer_solvable(Q: IntersectionForm, y: Sequence[int]) -> bool:
    """Whether ``Q x = y`` has an integral solution (via the Smith form)."""
    snf = Q.snf
    Uy = [sum(a * b for a, b in zip(row, y)) for row in snf.U]
    for f, c in zip(snf.factors, Uy):
        if f == 0:
            if c != 0:
                return False
        elif c % f:
            return False
    return True


def same_spinc(Q: IntersectionForm, K: Sequence[int], K2: Sequence[int]) -> bool:
    """Whether two characteristic vectors restrict to the same boundary spin^c structure."""
    diff = [b - a for a, b in zip(K, K2)]
    if any(x % 2 for x in diff):
        raise LatticeError("vectors lie in different characteristic cosets")
    return integer_solvable(Q, [x // 2 for x in diff])


def class_key(Q: IntersectionForm, K: Sequence[int]) -> Vector:
    """Complete invariant of the spin^c class of ``K``.

    ``adj(Q) (K - diag Q)/2 mod |det Q|``; two characteristic vectors have
    equal keys iff they differ by ``2 Q x`` with ``x`` integral.
    """
    m = abs(Q.det)
    if m == 0:
        raise LatticeError("class_key needs a nonsingular form")
    y = [(k - n) // 2 for k, n in zip(K, Q.diagonal)]
    return tuple(sum(a * b for a, b in zip(row, y)) % m for row in Q.adjugate)


def characteristic_box(Q: IntersectionForm, lo: Sequence[int], hi: Sequence[int]):
    """All characteristic vectors with ``lo <= K <= hi`` coordinatewise, lexicographic."""
    ranges = []
    for a, b, n in zip(lo, hi, Q.diagonal):
        start = a if (a - n) % 2 == 0 else a + 1
        ranges.append(range(start, b + 1, 2))
    return product(*ranges)


def enumerate_spinc_classes(Q: IntersectionForm) -> list[Vector]:
    """One characteristic representative per spin^c class, |det Q| of them.

    Searches the box ``n_i <= K_i <= -n_i`` and widens it by 2 per coordinate
    until every class is hit.  Each representative is the lexicographically
    smallest vector of its class inside the final box.
    """
    if not is_negative_definite(Q):
        raise LatticeError("form is not negative definite")
    target = abs(Q.det)
    diag = Q.diagonal
    pad = 0
    while True:
        lo = [n - pad for n in diag]
        hi = [-n + pad for n in diag]
        reps = _box_class_reps(Q, lo, hi)
        if len(reps) == target:
            return reps
        pad += 2


def _box_class_reps(Q: IntersectionForm, lo, hi) -> list[Vector]:
    m = abs(Q.det)
    bound = Q.n * m * max(max(abs(a), abs(b)) for a, b in zip(lo, hi))
    if bound >= 2**62:
        reps: dict[Vector, Vector] = {}
        for K in characteristic_box(Q, lo, hi):
            reps.setdefault(class_key(Q, K), K)
        return sorted(reps.values())
    import numpy as np

    axes = []
    for a, b, n in zip(lo, hi, Q.diagonal):
        start = a if (a - n) % 2 == 0 else a + 1
        axes.append(np.arange(start, b + 1, 2, dtype=np.int64))
    box = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, Q.n)  # lexicographic
    adj = np.array([[a % m for a in row] for row in Q.adjugate], dtype=np.int64)
    keys = ((box - np.array(Q.diagonal, dtype=np.int64)) // 2) @ adj.T % m
    _, first = np.unique(keys, axis=0, return_index=True)
    return sorted(tuple(int(k) for k in box[i]) for i in first)


def conjugate(K: Sequence[int]) -> Vector:
    return tuple(-k for k in K)
