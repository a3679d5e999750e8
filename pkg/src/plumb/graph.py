"""Weighted plumbing forests: data model, text format, normalization and generation.

A plumbing graph is a forest whose vertices carry integer Euler numbers.
Vertex ids are arbitrary tokens; declaration order fixes every matrix
indexing used elsewhere in the package.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator

log = logging.getLogger(__name__)


class GraphError(ValueError):
    """Malformed plumbing input or a violated structural precondition."""


class PlumbParseError(GraphError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", col {column}" if column is not None else "") + ": "
        super().__init__(where + message)


def _edge(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class PlumbingGraph:
    """Immutable weighted forest.

    ``vertices`` is a tuple of ``(id, weight)`` pairs in canonical order and
    ``edges`` a frozenset of sorted id pairs.
    """

    vertices: tuple[tuple[str, int], ...] = ()
    edges: frozenset[tuple[str, str]] = frozenset()
    _index: dict = field(init=False, repr=False, compare=False, hash=False)
    _adj: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        vertices = tuple((str(v), int(w)) for v, w in self.vertices)
        edges = frozenset(_edge(*e) for e in self.edges)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", edges)
        index = {}
        for i, (v, _) in enumerate(vertices):
            if v in index:
                raise GraphError(f"duplicate vertex id {v!r}")
            index[v] = i
        adj: list[list[int]] = [[] for _ in vertices]
        for a, b in edges:
            if a == b:
                raise GraphError(f"self-loop at {a!r}")
            if a not in index or b not in index:
                missing = a if a not in index else b
                raise GraphError(f"edge {a}-{b} refers to unknown vertex {missing!r}")
            adj[index[a]].append(index[b])
            adj[index[b]].append(index[a])
        if len(edges) > len(vertices) - _count_components(len(vertices), adj):
            raise GraphError("graph contains a cycle")
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))

    # -- basic accessors -------------------------------------------------

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def ids(self) -> list[str]:
        return [v for v, _ in self.vertices]

    @property
    def weights(self) -> list[int]:
        return [w for _, w in self.vertices]

    def index(self, v: str) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise GraphError(f"unknown vertex {v!r}") from None

    def weight(self, v: str) -> int:
        return self.vertices[self.index(v)][1]

    def neighbours(self, i: int) -> tuple[int, ...]:
        """Canonical indices adjacent to the vertex with index ``i``."""
        return self._adj[i]

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    @property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        return self._adj

    def components(self) -> list[list[int]]:
        seen = [False] * len(self)
        comps = []
        for s in range(len(self)):
            if seen[s]:
                continue
            comp, stack = [], [s]
            seen[s] = True
            while stack:
                u = stack.pop()
                comp.append(u)
                for x in self._adj[u]:
                    if not seen[x]:
                        seen[x] = True
                        stack.append(x)
            comps.append(sorted(comp))
        return comps

    # -- derived graphs --------------------------------------------------

    def with_weight(self, v: str, weight: int) -> "PlumbingGraph":
        i = self.index(v)
        verts = list(self.vertices)
        verts[i] = (v, weight)
        return PlumbingGraph(tuple(verts), self.edges)

    def subgraph(self, indices: Iterable[int]) -> "PlumbingGraph":
        keep = sorted(set(indices))
        ids = {self.vertices[i][0] for i in keep}
        return PlumbingGraph(
            tuple(self.vertices[i] for i in keep),
            frozenset(e for e in self.edges if e[0] in ids and e[1] in ids),
        )

    def fresh_id(self, stem: str = "w") -> str:
        if stem not in self._index:
            return stem
        k = 1
        while f"{stem}{k}" in self._index:
            k += 1
        return f"{stem}{k}"

    def __str__(self) -> str:
        return serialize_graph(self)


def _count_components(n: int, adj: list[list[int]]) -> int:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = n
    for u in range(n):
        for v in adj[u]:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                comps -= 1
    return comps


def from_weights(weights: list[int], edges: Iterable[tuple[int, int]] = (), prefix: str = "v") -> PlumbingGraph:
    """Build a graph with ids ``v0, v1, ...`` from a weight list and index pairs."""
    ids = [f"{prefix}{i}" for i in range(len(weights))]
    return PlumbingGraph(
        tuple(zip(ids, weights)),
        frozenset((ids[a], ids[b]) for a, b in edges),
    )


# ---------------------------------------------------------------------------
# plumb text format
# ---------------------------------------------------------------------------

def parse_graph(text: str) -> PlumbingGraph:
    """Parse a plumb document.

    ``vertices:`` lines (one or more) come first, then zero or more
    ``edges:`` lines.  ``#`` starts a comment.  Errors carry line/column.
    """
    vertices: list[tuple[str, int]] = []
    seen: dict[str, int] = {}
    edges: list[tuple[str, str, int, int]] = []
    section = None
    seen_vertices_line = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        head, sep, rest = line.partition(":")
        key = head.strip()
        if not sep or key not in ("vertices", "edges"):
            raise PlumbParseError("expected 'vertices:' or 'edges:'", lineno, len(line) - len(line.lstrip()) + 1)
        if key == "vertices" and section == "edges":
            raise PlumbParseError("'vertices:' after 'edges:'", lineno, 1)
        section = key
        seen_vertices_line = seen_vertices_line or key == "vertices"
        col0 = len(head) + 1
        for tok, col in _tokens(rest, col0):
            if key == "vertices":
                vid, sep2, wtxt = tok.rpartition(":")
                if not sep2 or not vid:
                    raise PlumbParseError(f"bad vertex token {tok!r}, expected id:weight", lineno, col)
                try:
                    weight = int(wtxt, 10)
                except ValueError:
                    raise PlumbParseError(f"bad weight {wtxt!r}", lineno, col) from None
                if vid in seen:
                    raise PlumbParseError(f"duplicate vertex id {vid!r}", lineno, col)
                if "-" in vid:
                    raise PlumbParseError(f"vertex id {vid!r} may not contain '-'", lineno, col)
                seen[vid] = lineno
                vertices.append((vid, weight))
            else:
                a, sep2, b = tok.partition("-")
                if not sep2 or not a or not b:
                    raise PlumbParseError(f"bad edge token {tok!r}, expected id-id", lineno, col)
                edges.append((a, b, lineno, col))
    if section is None or (section == "edges" and not vertices and not seen_vertices_line):
        raise PlumbParseError("missing 'vertices:' line")

    edge_set: set[tuple[str, str]] = set()
    parent = {v: v for v, _ in vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b, lineno, col in edges:
        for x in (a, b):
            if x not in seen:
                raise PlumbParseError(f"unknown vertex {x!r} in edge", lineno, col)
        if a == b:
            raise PlumbParseError(f"self-loop at {a!r}", lineno, col)
        e = _edge(a, b)
        if e in edge_set:
            raise PlumbParseError(f"parallel edge {a}-{b}", lineno, col)
        ra, rb = find(a), find(b)
        if ra == rb:
            raise PlumbParseError(f"edge {a}-{b} closes a cycle", lineno, col)
        parent[ra] = rb
        edge_set.add(e)
    return PlumbingGraph(tuple(vertices), frozenset(edge_set))


def _tokens(s: str, offset: int) -> Iterator[tuple[str, int]]:
    i = 0
    n = len(s)
    while i < n:
        while i < n and s[i].isspace():
            i += 1
        j = i
        while j < n and not s[j].isspace():
            j += 1
        if j > i:
            yield s[i:j], offset + i + 1
        i = j


def serialize_graph(g: PlumbingGraph) -> str:
    """Canonical text: one vertices line, one edges line, edges sorted."""
    verts = " ".join(f"{v}:{w}" for v, w in g.vertices)
    edges = " ".join(f"{a}-{b}" for a, b in sorted(g.edges))
    return (f"vertices: {verts}".rstrip() + "\n" + f"edges: {edges}".rstrip() + "\n")


def read_graph(path) -> PlumbingGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


# ---------------------------------------------------------------------------
# Kirby-type moves
# ---------------------------------------------------------------------------

def blow_down_normalize(g: PlumbingGraph) -> PlumbingGraph:
    """Blow down (-1)-vertices of degree <= 2 until none remain.

    Raises GraphError if some (-1)-vertex has degree >= 3.
    """
    verts = dict(g.vertices)
    order = [v for v, _ in g.vertices]
    nbrs: dict[str, set[str]] = {v: set() for v in order}
    for a, b in g.edges:
        nbrs[a].add(b)
        nbrs[b].add(a)
    while True:
        target = next((v for v in order if verts[v] == -1), None)
        if target is None:
            break
        ns = sorted(nbrs[target], key=order.index)
        if len(ns) >= 3:
            raise GraphError(f"(-1)-vertex {target!r} has degree {len(ns)}; blow-down leaves the tree class")
        for u in ns:
            verts[u] += 1
            nbrs[u].discard(target)
        if len(ns) == 2:
            a, b = ns
            nbrs[a].add(b)
            nbrs[b].add(a)
        del verts[target], nbrs[target]
        order.remove(target)
    edges = frozenset(_edge(a, b) for a in order for b in nbrs[a])
    return PlumbingGraph(tuple((v, verts[v]) for v in order), edges)


def framing_reduction_step(g: PlumbingGraph, S: Iterable[str], v: str,
                           shift: int = 2) -> tuple[PlumbingGraph, frozenset[str]]:
    """Lower the weight of ``v`` by ``shift`` (2 or 4); the Wu set carries over.

    Requires ``v`` outside ``S`` with exactly ``-n_v`` neighbours inside ``S``.
    """
    if shift not in (2, 4):
        raise ValueError("shift must be 2 or 4")
    S = frozenset(S)
    i = g.index(v)
    if v in S:
        raise GraphError(f"vertex {v!r} lies in the Wu set")
    n_v = g.vertices[i][1]
    inside = sum(1 for j in g.neighbours(i) if g.vertices[j][0] in S)
    if inside != -n_v:
        raise GraphError(f"vertex {v!r} has {inside} neighbours in S, need {-n_v}")
    return g.with_weight(v, n_v - shift), S


def disjoint_union_with_rp3(g: PlumbingGraph, S: Iterable[str]) -> tuple[PlumbingGraph, frozenset[str]]:
    """Add an isolated (-2)-vertex ``w`` and put it in the Wu set."""
    w = g.fresh_id("w")
    return PlumbingGraph(g.vertices + ((w, -2),), g.edges), frozenset(S) | {w}


def blow_up_vertex(g: PlumbingGraph, v: str) -> PlumbingGraph:
    """Attach a new (-1)-leaf to ``v`` and lower its weight by one."""
    e = g.fresh_id("e")
    verts = tuple((u, w - 1 if u == v else w) for u, w in g.vertices) + ((e, -1),)
    g.index(v)
    return PlumbingGraph(verts, g.edges | {(v, e)})


def blow_up_edge(g: PlumbingGraph, a: str, b: str) -> PlumbingGraph:
    """Insert a (-1)-vertex on the edge a-b, lowering both ends by one."""
    if _edge(a, b) not in g.edges:
        raise GraphError(f"no edge {a}-{b}")
    e = g.fresh_id("e")
    verts = tuple((u, w - 1 if u in (a, b) else w) for u, w in g.vertices) + ((e, -1),)
    edges = (g.edges - {_edge(a, b)}) | {(a, e), (e, b)}
    return PlumbingGraph(verts, edges)


def chain(weights: list[int]) -> PlumbingGraph:
    return from_weights(weights, [(i, i + 1) for i in range(len(weights) - 1)])


def star(center: int, arms: list[list[int]]) -> PlumbingGraph:
    """Star-shaped tree; each arm is a chain of weights starting next to the centre."""
    weights = [center]
    edges = []
    for arm in arms:
        prev = 0
        for w in arm:
            weights.append(w)
            edges.append((prev, len(weights) - 1))
            prev = len(weights) - 1
    return from_weights(weights, edges)


def ade(kind: str, n: int) -> PlumbingGraph:
    """Negative (-2)-weighted Dynkin diagram A_n, D_n (n >= 4) or E_6/E_7/E_8."""
    if kind == "A":
        return chain([-2] * n)
    if kind == "D" and n >= 4:
        return star(-2, [[-2], [-2], [-2] * (n - 3)])
    if kind == "E" and n in (6, 7, 8):
        return star(-2, [[-2], [-2, -2], [-2] * (n - 4)])
    raise ValueError(f"no Dynkin diagram {kind}{n}")


# ---------------------------------------------------------------------------
# random generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorParams:
    max_vertices: int
    weight_min: int
    seed: int = 0
    count: int = 1
    require_rational: bool = False

    def __post_init__(self):
        if self.max_vertices < 1:
            raise ValueError("max_vertices must be >= 1")
        if self.weight_min > -2:
            raise ValueError("weight_min must be <= -2")
        if self.count < 0:
            raise ValueError("count must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def random_tree_edges(n: int, rng: random.Random) -> list[tuple[int, int]]:
    """Uniform labelled tree on ``n`` vertices via a random Pruefer code."""
    if n <= 1:
        return []
    if n == 2:
        return [(0, 1)]
    code = [rng.randrange(n) for _ in range(n - 2)]
    degree = [1] * n
    for x in code:
        degree[x] += 1
    edges = []
    for x in code:
        leaf = min(i for i in range(n) if degree[i] == 1)
        edges.append((min(leaf, x), max(leaf, x)))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = [i for i in range(n) if degree[i] == 1]
    edges.append((u, v))
    return sorted(edges)


def generate_candidates(params: GeneratorParams, max_attempts: int | None = None) -> Iterator[PlumbingGraph]:
    """Seeded stream of trees with weights in [weight_min, -2] and n_i + d_i <= 1.

    With ``require_rational`` each emitted graph is also negative definite and
    passes Laufer's test; failing draws are discarded and redrawn.
    """
    from .lattice import build_intersection_form, is_negative_definite
    from .rationality import laufer_rationality

    rng = random.Random(params.seed)
    emitted = attempts = 0
    while emitted < params.count:
        attempts += 1
        if max_attempts is not None and attempts > max_attempts:
            log.warning("generator gave up after %d attempts (%d emitted)", attempts - 1, emitted)
            return
        if attempts % 1000 == 0:
            log.info("generator: %d attempts, %d emitted", attempts, emitted)
        n = rng.randint(1, params.max_vertices)
        edges = random_tree_edges(n, rng)
        deg = [0] * n
        for a, b in edges:
            deg[a] += 1
            deg[b] += 1
        weights = []
        for i in range(n):
            hi = min(-2, 1 - deg[i])
            if hi < params.weight_min:
                break
            weights.append(rng.randint(params.weight_min, hi))
        if len(weights) < n:
            continue
        g = from_weights(weights, edges)
        if params.require_rational:
            if not is_negative_definite(build_intersection_form(g)):
                continue
            if laufer_rationality(g).verdict != "rational":
                continue
        emitted += 1
        yield g
