import itertools
import random
from collections import Counter
from fractions import Fraction

import pytest

from conftest import FIXTURES, rational_corpus
from oracles import ball_oracle, continued_fraction, in_class, lens_d
from plumb.graph import (
    PlumbingGraph,
    chain,
    disjoint_union_with_rp3,
    framing_reduction_step,
    parse_graph,
    read_graph,
)
from plumb.invariants import (
    PreconditionError,
    char_square,
    closest_coset_vectors,
    d_formula,
    d_oracle,
    d_path,
    d_path_many,
    discharge_path,
    full_path_table,
    is_initial,
    is_terminal,
    m_counter,
    mubar,
    obstruction_report,
    spin_class_count,
    spin_records,
    spinc_table,
    verify_theorem,
)
from plumb.lattice import build_intersection_form, enumerate_spinc_classes, is_characteristic
from plumb.rationality import laufer_rationality
from plumb.spin import enumerate_wu_sets, reduce_mod2

F = Fraction
A3 = parse_graph("vertices: a:-2 c:-2 b:-2\nedges: a-c c-b")
STAR = parse_graph("vertices: c:-1 x:-2 y:-3 z:-7\nedges: c-x c-y c-z")
E8 = read_graph(FIXTURES / "e8.plumb")


def g1(w):
    return parse_graph(f"vertices: v:{w}")


def wu(g, *ids):
    (S,) = [s for s in enumerate_wu_sets(g) if s.S == frozenset(ids)]
    return S


# -- mubar, m_counter ---------------------------------------------------------------

def test_mubar_examples():
    assert mubar(g1(-2), wu(g1(-2))).mubar == -1
    assert mubar(g1(-4), wu(g1(-4), "v")).mubar == 3
    assert mubar(E8, wu(E8)).mubar == -8
    assert mubar(g1(-4), {"v"}).mubar == 3


def test_mubar_rejects_non_wu_set():
    with pytest.raises(Exception):
        mubar(A3, {"a"})


def test_mubar_square_is_sum_of_weights_for_independent_sets():
    for g in rational_corpus(80, 8, -9, seed=41):
        for S in enumerate_wu_sets(g):
            mv = mubar(g, S)
            assert mv.wu_square == sum(w for v, w in g.vertices if v in S.S)
            assert mv.mubar == -len(g) - mv.wu_square


def test_m_counter_examples():
    assert m_counter(A3, wu(A3)) == 0
    assert m_counter(A3, wu(A3, "a", "b")) == 1
    assert m_counter(g1(-4), wu(g1(-4), "v")) == 0


# -- d examples ---------------------------------------------------------------------

def test_d_oracle_examples():
    assert d_oracle(g1(-1), (-1,)).d == 0
    assert d_oracle(g1(-1), (-1,)).witness in ((-1,), (1,))
    assert d_oracle(g1(-2), (0,)).d == F(1, 4)
    assert d_oracle(g1(-2), (2,)).d == F(-1, 4)
    t = d_oracle(E8, (0,) * 8)
    assert t.d == 2 and t.witness == (0,) * 8 and t.certified


def test_d_path_examples():
    Q = build_intersection_form(g1(-2))
    tr = discharge_path(Q, (0,))
    assert (tr.outcome, tr.pivots, tr.final) == ("terminal", (), (0,))
    tr = discharge_path(Q, (2,))
    assert (tr.outcome, tr.pivots, tr.final) == ("terminal", (0,), (-2,))
    assert d_path(g1(-2), (0,)).d == F(1, 4)
    assert d_path(g1(-2), (2,)).d == F(-1, 4)
    g = chain([-2, -2])
    assert discharge_path(build_intersection_form(g), (0, 0)).outcome == "terminal"
    assert d_path(g, (0, 0)).d == F(1, 2)
    assert mubar(g, wu(g)).mubar == -2


def test_verify_theorem_examples():
    r = verify_theorem(g1(-2))
    assert r.passed
    assert sorted((x.mubar, x.d_oracle) for x in r.records) == [(-1, F(1, 4)), (1, F(-1, 4))]
    r = verify_theorem(E8)
    assert r.passed and [(x.mubar, x.d_oracle, x.d_path) for x in r.records] == [(-8, 2, 2)]
    r = verify_theorem(A3)
    got = {tuple(x.wu_set.sorted_ids(A3)): (x.mubar, x.d_oracle, x.d_path) for x in r.records}
    assert r.passed and got == {(): (-3, F(3, 4), F(3, 4)), ("a", "b"): (1, F(-1, 4), F(-1, 4))}


def test_verify_theorem_structured_failures():
    r = verify_theorem(g1(0))
    assert not r.passed and "determinant" in r.error
    r = verify_theorem(STAR)
    assert not r.passed and "rational" in r.error


def test_obstruction_examples():
    v = obstruction_report(g1(-3))
    assert v.det_parity == "odd" and v.mubar_product == 2 and v.any_ball_obstructed is True
    assert [p["d"] for p in v.per_spin] == [F(-1, 2)]
    v = obstruction_report(g1(-4))
    assert v.det_parity == "even" and v.mubar_product == -3
    assert v.spin_ball_obstructed is True and v.any_ball_obstructed == "not_applicable"
    assert sorted(p["d"] for p in v.per_spin) == [F(-3, 4), F(1, 4)]
    assert all(p["spin_c_ball_obstructed"] for p in v.per_spin)
    v = obstruction_report(g1(-1))
    assert v.mubar_product == 0 and v.spin_ball_obstructed is False and v.any_ball_obstructed is False
    assert v.per_spin[0]["spin_c_ball_obstructed"] is False


def test_minus_four_spinc_table():
    g = g1(-4)
    table = {c.class_rep: c.d for c in spinc_table(g)}
    assert sorted(table.values()) == [F(-3, 4), 0, 0, F(1, 4)]
    spin = {S.char for S in enumerate_wu_sets(g)}
    assert sorted(d for K, d in table.items() if any(in_class(build_intersection_form(g), K, s) for s in spin)) \
        == [F(-3, 4), F(1, 4)]


def test_non_rational_verdicts_are_none():
    v = obstruction_report(STAR, spin_records(STAR, uncertified=True))
    assert not v.certified and v.spin_ball_obstructed is None and v.any_ball_obstructed is None
    assert all(p["spin_c_ball_obstructed"] is None for p in v.per_spin)


def test_uncertified_refusal():
    with pytest.raises(PreconditionError):
        d_oracle(STAR, wu(STAR, "x", "y", "z").char)
    with pytest.raises(PreconditionError):
        d_path(STAR, wu(STAR, "x", "y", "z").char)
    t = d_oracle(STAR, wu(STAR, "x", "y", "z").char, uncertified=True)
    assert not t.certified
    assert d_formula(STAR, t.class_rep).d == t.d
    with pytest.raises(PreconditionError):
        d_oracle(g1(0), (0,))
    with pytest.raises(PreconditionError):
        d_oracle(g1(-2), (1,))


def test_sigma237_star_gives_uncertified_record():
    # the boundary of the star is a Brieskorn sphere that is not an L-space; only the formula value is available
    r = spin_records(STAR, uncertified=True)
    assert len(r) == 1 and not r[0].certified
    assert r[0].d_oracle is not None


# -- oracle agreement -----------------------------------------------------------------

def test_oracle_matches_ball_search():
    graphs = [g1(w) for w in range(-1, -8, -1)] + [chain(c) for c in ([-2, -3], [-3, -3], [-2, -5], [-4, -2])]
    graphs += [g for g in rational_corpus(40, 3, -4, seed=77) if abs(build_intersection_form(g).det) <= 30]
    for g in graphs:
        for c in spinc_table(g):
            assert ball_oracle(g, c.class_rep, c.witness) == c.d


@pytest.mark.parametrize("a", [[2], [3], [5], [2, 2], [3, 2], [2, 3, 4], [5, 2, 3], [4, 4], [2, 2, 2, 2], [7, 3]])
def test_chains_match_lens_space_recursion(a):
    g = chain([-x for x in a])
    p, q = continued_fraction(a)
    assert abs(build_intersection_form(g).det) == p
    expected = Counter(lens_d(p, q, i) for i in range(p))
    assert Counter(c.d for c in spinc_table(g)) == expected
    Q = build_intersection_form(g)
    assert Counter(t.d for t in d_path_many(g, enumerate_spinc_classes(Q), Q=Q)) == expected


def test_random_chains_match_lens_space_recursion():
    rng = random.Random(9)
    for _ in range(30):
        a = [rng.randint(2, 6) for _ in range(rng.randint(1, 4))]
        p, q = continued_fraction(a)
        if p > 150:
            continue
        got = Counter(c.d for c in spinc_table(chain([-x for x in a])))
        assert got == Counter(lens_d(p, q, i) for i in range(p))


def test_oracle_equals_path_on_every_class():
    for g in rational_corpus(60, 6, -6, seed=51):
        Q = build_intersection_form(g)
        if abs(Q.det) > 200:
            continue
        reps = enumerate_spinc_classes(Q)
        paths = d_path_many(g, reps, Q=Q)
        for K, t in zip(reps, paths):
            o = d_oracle(g, K, Q=Q)
            assert o.d == t.d
            assert is_characteristic(Q, t.witness) and in_class(Q, t.witness, K)
            assert o.d == (char_square(Q, o.witness) + Q.n) / 4


def test_closest_coset_maximizers_are_in_class():
    Q = build_intersection_form(chain([-3, -3]))
    best, vecs = closest_coset_vectors(Q, (1, 1))
    assert all(in_class(Q, K, (1, 1)) and char_square(Q, K) == best for K in vecs)


# -- structural properties ------------------------------------------------------------

def test_conjugation_symmetry():
    for g in rational_corpus(40, 6, -6, seed=61):
        Q = build_intersection_form(g)
        if abs(Q.det) > 150:
            continue
        for c in spinc_table(g, Q):
            assert d_oracle(g, tuple(-k for k in c.class_rep), Q=Q).d == c.d
        for S in enumerate_wu_sets(g, Q):
            assert in_class(Q, S.char, tuple(-k for k in S.char))
        assert spin_class_count(Q) == 2 ** reduce_mod2(g).q


def test_one_full_path_per_class():
    for g in rational_corpus(60, 7, -7, seed=71):
        Q = build_intersection_form(g)
        if abs(Q.det) > 300:
            continue
        reps = enumerate_spinc_classes(Q)
        table, total = full_path_table(g, reps, Q)
        assert total == abs(Q.det)
        assert all(len(starts) == 1 for starts in table)


def test_discharge_preserves_square_and_is_order_independent():
    rng = random.Random(13)
    for g in rational_corpus(40, 6, -5, seed=81):
        Q = build_intersection_form(g)
        box = [range(n + 2, -n + 1, 2) for n in Q.diagonal]
        starts = list(itertools.product(*box))
        for K in rng.sample(starts, min(25, len(starts))):
            assert is_initial(Q, K)
            ref = discharge_path(Q, K)
            cur = list(K)
            for piv in ref.pivots:
                nxt = [c + 2 * Q.Q[j][piv] for j, c in enumerate(cur)]
                assert char_square(Q, nxt) == char_square(Q, cur)
                cur = nxt
            assert tuple(cur) == ref.final
            if ref.outcome == "terminal":
                assert is_terminal(Q, ref.final)
            for _ in range(20):
                order = list(range(Q.n))
                rng.shuffle(order)
                other = discharge_path(Q, K, order=order)
                assert other.outcome == ref.outcome
                if ref.outcome == "terminal":
                    assert other.final == ref.final


def test_main_identity_on_corpus():
    for g in rational_corpus(100, 8, -9, seed=91):
        r = verify_theorem(g)
        assert r.passed, r.counterexamples


def _framing_candidates(g):
    for S in enumerate_wu_sets(g):
        ids = g.ids
        for i, (v, w) in enumerate(g.vertices):
            if v not in S.S and sum(1 for j in g.neighbours(i) if ids[j] in S.S) == -w:
                yield S, v


def test_framing_reduction_preserves_mubar_and_d():
    seen = 0
    for g in rational_corpus(200, 7, -4, seed=101) + [A3]:
        for S, v in _framing_candidates(g):
            for shift in (2, 4):
                h, S2 = framing_reduction_step(g, S.S, v, shift=shift)
                assert laufer_rationality(h).rational
                before = (mubar(g, S).mubar, d_oracle(g, S.char).d)
                W = wu(h, *S2)
                after = (mubar(h, W).mubar, d_oracle(h, W.char).d)
                assert before == after
                assert d_path(h, W.char).d == after[1]
            seen += 1
    assert seen >= 20


def test_disjoint_union_shifts_mubar_and_d():
    graphs = [PlumbingGraph()] + rational_corpus(60, 6, -6, seed=111)
    for g in graphs:
        for S in enumerate_wu_sets(g):
            h, S2 = disjoint_union_with_rp3(g, S.S)
            W = wu(h, *S2)
            mu_g = mubar(g, S).mubar if len(g) else 0
            d_g = d_oracle(g, S.char).d if len(g) else F(0)
            assert mubar(h, W).mubar == mu_g + 1
            assert d_oracle(h, W.char).d == d_g - F(1, 4)
            assert d_path(h, W.char).d == d_g - F(1, 4)
