import random

import pytest

from conftest import FIXTURES
from oracles import artin_oracle
from plumb.graph import (
    GeneratorParams,
    GraphError,
    ade,
    from_weights,
    generate_candidates,
    parse_graph,
    random_tree_edges,
    read_graph,
)
from plumb.lattice import build_intersection_form, is_negative_definite
from plumb.rationality import IterationCapExceeded, laufer_rationality, lemma_precheck

STAR = parse_graph("vertices: c:-1 x:-2 y:-3 z:-7\nedges: c-x c-y c-z")


ADE = [("A", n) for n in range(1, 10)] + [("D", n) for n in range(4, 9)] + [("E", n) for n in (6, 7, 8)]


@pytest.mark.parametrize("kind, n", ADE)
def test_ade_rational(kind, n):
    g = ade(kind, n)
    tr = laufer_rationality(g)
    assert tr.rational
    assert tr.cycles[0] == (1,) * n
    assert artin_oracle(g) == (True, tr.final_cycle)


def test_e8_fundamental_cycle():
    tr = laufer_rationality(read_graph(FIXTURES / "e8.plumb"))
    # highest root of E8 in the a..g chain + h branch labelling
    assert tr.final_cycle == (2, 4, 6, 5, 4, 3, 2, 3)


def test_single_minus_two():
    tr = laufer_rationality(parse_graph("vertices: a:-2"))
    assert tr.rational and len(tr.steps) == 1
    assert (tr.steps[0].product, tr.steps[0].action) == (-2, "halt_rational")


def test_star_not_rational():
    tr = laufer_rationality(STAR)
    assert tr.verdict == "not_rational"
    last = tr.steps[-1]
    assert (last.vertex, last.product, last.action) == ("c", 2, "halt_not_rational")
    assert not lemma_precheck(STAR)
    assert artin_oracle(STAR)[0] is False


def test_lemma_precheck_examples():
    assert lemma_precheck(ade("E", 8))
    assert lemma_precheck(parse_graph("vertices: a:-2"))


def test_trace_invariants():
    for g in generate_candidates(GeneratorParams(8, -4, 11, 150)):
        if not is_negative_definite(build_intersection_form(g)):
            continue
        tr = laufer_rationality(g)
        Q = build_intersection_form(g)
        inc = [s for s in tr.steps if s.action == "increment"]
        assert len(inc) == len(tr.cycles) - 1
        for s, a, b in zip(inc, tr.cycles, tr.cycles[1:]):
            i = g.index(s.vertex)
            assert [y - x for x, y in zip(a, b)] == [int(j == i) for j in range(len(g))]
            assert Q.apply(a)[i] == s.product == 1


def wild_graphs(count, seed):
    # (-1) vertices allowed, so the lemma precheck often fails and non-rational graphs are common
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(1, 8)
        g = from_weights([rng.randint(-4, -1) for _ in range(n)], random_tree_edges(n, rng))
        if is_negative_definite(build_intersection_form(g)):
            out.append(g)
    return out


def test_matches_artin_and_order_independent():
    rng = random.Random(2)
    graphs = wild_graphs(300, 5) + list(generate_candidates(GeneratorParams(7, -4, 13, 100)))
    verdicts = set()
    for g in graphs:
        tr = laufer_rationality(g)
        ok, Z = artin_oracle(g)
        assert tr.rational == ok
        if ok:
            assert tr.final_cycle == Z
            assert lemma_precheck(g)
        for _ in range(3):
            order = list(range(len(g)))
            rng.shuffle(order)
            other = laufer_rationality(g, order=order)
            assert other.verdict == tr.verdict
            if ok:
                assert other.final_cycle == tr.final_cycle
        verdicts.add(tr.verdict)
    assert verdicts == {"rational", "not_rational"}


def test_refuses_non_negative_definite():
    with pytest.raises(GraphError):
        laufer_rationality(parse_graph("vertices: a:0"))
    with pytest.raises(GraphError):
        laufer_rationality(parse_graph("vertices: a:-1 b:-1\nedges: a-b"))


def test_iteration_cap(monkeypatch):
    g = ade("E", 8)
    with pytest.raises(IterationCapExceeded):
        laufer_rationality(g, cap=5)
    monkeypatch.setenv("PLUMB_ITER_CAP", "5")
    with pytest.raises(IterationCapExceeded):
        laufer_rationality(g)
    monkeypatch.delenv("PLUMB_ITER_CAP")
    assert laufer_rationality(g).rational
