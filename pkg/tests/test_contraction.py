import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIXTURES, IMPLS, needs_core, path4, star, triangle
from tabch.contraction import (
    CHResult,
    InconsistentTieBreakerError,
    NodePriority,
    PriorityCoefficients,
    contract,
    run_preprocessing,
    select_independent_set,
    simulate,
    witness_search,
)
from tabch.graph import FORWARD, INF, InputGraph, build_contraction_graph
from tabch.pqueue import MinHeap, make_index_store
from tabch.query import dijkstra_all
from tabch.synth import geometric_graph, random_graph
from tabch.tabulation import init_tables
from tabch.tiebreak import InconsistentTest, TabHash, make_tie_breaker

TABLES = init_tables(0)


def queue(n, kind="xorhash"):
    return MinHeap(make_index_store(kind, n, TABLES))


def overlay_dist(cg, s, skip=None):
    """Plain Dijkstra over the overlay's forward entries."""
    adj = [[(e[0], e[1]) for e in cg.adj[v] if e[2] & FORWARD and e[0] != skip]
           if v != skip else [] for v in range(cg.n)]
    return dijkstra_all(adj, s)


def two_hop(cg, v):
    near = set()
    for e in cg.adj[v]:
        near.add(e[0])
        near.update(e2[0] for e2 in cg.adj[e[0]])
    near.discard(v)
    return near


# -------------------------------------------------------------- witness search

def test_witness_direct_edge():
    cg = build_contraction_graph(triangle())
    assert witness_search(cg, 0, 1, [2], 10, 1000, queue(3)) == {2: 1}


def test_witness_none_on_path():
    cg = build_contraction_graph(path4())
    assert witness_search(cg, 0, 1, [2], 10, 1000, queue(4)) == {2: INF}


def test_witness_upper_bound_and_limit():
    g = InputGraph.undirected(5, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 4, 1), (4, 3, 1)])
    cg = build_contraction_graph(g)
    assert witness_search(cg, 0, 1, [3], 2, 1000, queue(5)) == {3: 2}
    assert witness_search(cg, 0, 1, [3], 1, 1000, queue(5)) == {3: INF}
    assert witness_search(cg, 0, 1, [3], 10, 2, queue(5)) == {3: INF}


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("kind", ["array", "xorhash"])
def test_witness_matches_oracle(seed, kind):
    g = random_graph(100, 400, seed, zero_weights=seed % 2 == 0)
    cg = build_contraction_graph(g)
    q = queue(100, kind)
    rng = random.Random(seed)
    for _ in range(20):
        s, x = rng.sample(range(100), 2)
        truth = overlay_dist(cg, s, skip=x)
        targets = [t for t in range(100) if t not in (s, x)]
        got = witness_search(cg, s, x, targets, INF, 10**9, q)
        assert got == {t: truth.get(t, INF) for t in targets}


# ------------------------------------------------------------------- simulate

def test_simulate_triangle():
    cg = build_contraction_graph(triangle())
    p = simulate(cg, 1, queue(3))
    assert p.edge_difference == -2 and p.composite == -8


def test_simulate_path4():
    cg = build_contraction_graph(path4())
    p = simulate(cg, 1, queue(4))
    assert p.edge_difference == 1 - 2  # one two-way shortcut, two entries removed
    assert [len(cg.edges(v)) for v in range(4)] == [1, 2, 2, 1]  # untouched


def test_simulate_isolated():
    cg = build_contraction_graph(InputGraph.from_edges(2, []))
    p = simulate(cg, 0, queue(2))
    assert (p.edge_difference, p.composite) == (0, 0)


def test_priority_terms():
    p = NodePriority.combine(-1, 3, 4)
    assert p.composite == 4 * -1 + 3 + 4
    assert NodePriority.combine(2, 1, 1, PriorityCoefficients(1, 0, 0)).composite == 2


def test_simulate_counts_represented_originals():
    cg = build_contraction_graph(path4())
    contract(cg, 1, queue(4))
    p = simulate(cg, 0, queue(4), deleted_neighbors=1)
    # node 0 now only holds the two-way shortcut to 2, standing for 2 arcs
    assert p.originals == 2 and p.deleted_neighbors == 1


# ------------------------------------------------------------------- contract

def test_contract_path4():
    cg = build_contraction_graph(path4())
    added = contract(cg, 1, queue(4))
    assert sorted(added) == [(0, 2, 2, 1, FORWARD), (2, 0, 2, 1, FORWARD)]
    assert cg.contracted[1] and cg.arc_weight(0, 2) == 2


def test_contract_triangle():
    cg = build_contraction_graph(triangle())
    assert contract(cg, 1, queue(3)) == []


def test_contract_star_center():
    cg = build_contraction_graph(star())
    added = contract(cg, 0, queue(4))
    assert sorted((u, w, c) for u, w, c, _, _ in added) == [
        (u, w, 2) for u in (1, 2, 3) for w in (1, 2, 3) if u != w]
    assert all(m == 0 for _, _, _, m, _ in added)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_contract_preserves_distances(seed):
    g = random_graph(25, 70, seed, max_weight=9, zero_weights=True)
    cg = build_contraction_graph(g)
    v = seed % 25
    before = {s: overlay_dist(cg, s) for s in range(25) if s != v}
    contract(cg, v, queue(25), node_limit=10**9)
    for s, d in before.items():
        after = overlay_dist(cg, s)
        assert {t: x for t, x in after.items() if t != v} == {t: x for t, x in d.items() if t != v}


# --------------------------------------------------------- independent sets

def test_select_path4():
    cg = build_contraction_graph(path4())
    tb = make_tie_breaker("xor", 4, 0)
    assert select_independent_set(cg, [0, 1, 2, 3], tb) == [0]


def test_select_triangle_consistent():
    cg = build_contraction_graph(triangle())
    for kind in ("bias", "xor"):
        tb = make_tie_breaker(kind, 3, 5)
        chosen = select_independent_set(cg, [0, 0, 0], tb)
        assert chosen == [min(range(3), key=tb.key)]


def test_select_triangle_inconsistent():
    cg = build_contraction_graph(triangle())
    assert select_independent_set(cg, [0, 0, 0], InconsistentTest()) == []


def test_select_far_apart_minima():
    cg = build_contraction_graph(path4())
    tb = make_tie_breaker("bias", 4, 1)
    assert select_independent_set(cg, [0, 1, 1, 0], tb) == [0, 3]


def brute_force_set(cg, prio, tb):
    out = []
    for v in range(cg.n):
        if cg.contracted[v]:
            continue
        if all(prio[v] < prio[u] or (prio[v] == prio[u] and tb.precedes(v, u))
               for u in two_hop(cg, v)):
            out.append(v)
    return out


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["bias", "xor"]))
def test_select_matches_brute_force(seed, kind):
    g = random_graph(40, 60, seed)
    cg = build_contraction_graph(g)
    rng = random.Random(seed)
    prio = [rng.randrange(4) for _ in range(40)]
    tb = make_tie_breaker(kind, 40, seed)
    assert select_independent_set(cg, prio, tb) == brute_force_set(cg, prio, tb)


def test_lemma1_abort():
    with pytest.raises(InconsistentTieBreakerError, match="inconsistent"):
        run_preprocessing(triangle(), impl="pure", tie_breaker=InconsistentTest())


def test_compiled_rejects_inconsistent():
    if "compiled" not in IMPLS:
        pytest.skip("compiled core not built")
    with pytest.raises(ValueError):
        run_preprocessing(triangle(), impl="compiled", tie_breaker=InconsistentTest())


# ---------------------------------------------------------------- full runs

def check_result(g, r):
    n = g.node_count
    assert sorted(r.rank.tolist()) == list(range(n))
    sc = r.shortcuts
    rank = r.rank.astype(np.int64)
    assert np.all(rank[sc["middle"]] < rank[sc["u"]])
    assert np.all(rank[sc["middle"]] < rank[sc["w"]])
    assert 1 <= r.iteration_count <= max(n, 1)


@pytest.mark.parametrize("impl", IMPLS)
def test_fixture_runs(fixture_graph, impl):
    _, g = fixture_graph
    r = run_preprocessing(g, impl=impl)
    check_result(g, r)


def test_path4_iterations():
    r = run_preprocessing(path4(), impl="pure")
    assert r.iteration_count <= 4


def test_result_bytes_roundtrip():
    r = run_preprocessing(geometric_graph(200, 3), impl="pure")
    back, end = CHResult.from_bytes(r.to_bytes())
    assert back == r and end == len(r.to_bytes())
    assert back.level.tolist() == r.level.tolist()


class Recorder:
    def __init__(self, g):
        self.g = g
        self.truth = [dijkstra_all(g.adjacency(), s) for s in range(g.node_count)]
        self.sets = []

    def __call__(self, event, iteration, cg, members):
        if event == "selected":
            self.sets.append(list(members))
            member_set = set(members)
            for v in members:
                assert not (two_hop(cg, v) & member_set), (iteration, v)
            return
        remaining = [v for v in range(cg.n) if not cg.contracted[v]]
        for s in remaining[:15]:
            got = overlay_dist(cg, s)
            want = self.truth[s]
            for t in remaining:
                assert got.get(t) == want.get(t), (iteration, s, t)


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("tb_kind", ["bias", "xor"])
def test_iterations_independent_and_distance_preserving(seed, tb_kind):
    g = (geometric_graph(150, seed, oneway=0.3) if seed % 2
         else random_graph(120, 400, seed, max_weight=5, zero_weights=True))
    rec = Recorder(g)
    r = run_preprocessing(g, seed=seed, tb_kind=tb_kind, observer=rec, threads=2)
    check_result(g, r)
    assert len(rec.sets) == r.iteration_count
    assert sorted(v for s in rec.sets for v in s) == list(range(g.node_count))


@pytest.mark.parametrize("store", ["array", "xorhash"])
def test_pure_thread_determinism(store):
    g = geometric_graph(400, 11, oneway=0.2)
    results = [run_preprocessing(g, threads=t, seed=4, store_kind=store, impl="pure").to_bytes()
               for t in (1, 2, 4)]
    assert results[0] == results[1] == results[2]


def test_store_does_not_change_result():
    g = geometric_graph(300, 2)
    a = run_preprocessing(g, store_kind="array", impl="pure")
    b = run_preprocessing(g, store_kind="xorhash", impl="pure")
    assert a == b


@needs_core
@pytest.mark.parametrize("tb_kind", ["bias", "xor"])
@pytest.mark.parametrize("store", ["array", "xorhash"])
@pytest.mark.parametrize("make", [
    lambda: geometric_graph(500, 7, oneway=0.25),
    lambda: random_graph(200, 700, 3, zero_weights=True),
    lambda: random_graph(150, 300, 8, max_weight=3),
], ids=["geometric", "random-zero", "random-sparse"])
def test_compiled_matches_pure(tb_kind, store, make):
    g = make()
    pure = run_preprocessing(g, seed=9, tb_kind=tb_kind, store_kind=store, impl="pure")
    for threads in (1, 3):
        fast = run_preprocessing(g, seed=9, tb_kind=tb_kind, store_kind=store,
                                 impl="compiled", threads=threads)
        assert fast.to_bytes() == pure.to_bytes()


@needs_core
@pytest.mark.parametrize("limits", [(1, 1), (3, 5), (50, 20)])
def test_compiled_matches_pure_small_limits(limits):
    g = geometric_graph(400, 1, oneway=0.1)
    kw = dict(sim_limit=limits[0], contract_limit=limits[1], seed=2)
    assert run_preprocessing(g, impl="pure", **kw) == run_preprocessing(g, impl="compiled", threads=2, **kw)


def test_argument_checks():
    g = triangle()
    with pytest.raises(ValueError):
        run_preprocessing(g, threads=0)
    with pytest.raises(ValueError):
        run_preprocessing(g, store_kind="btree")
    with pytest.raises(ValueError):
        run_preprocessing(g, tb_kind="nope")
    with pytest.raises(ValueError):
        run_preprocessing(g, sim_limit=0)
