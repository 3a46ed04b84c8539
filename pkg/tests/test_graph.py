"""Conflict graph construction, serial and parallel."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgcuts.cliques import Clique
from cgcuts.graph import (
    build_graph,
    build_graph_parallel,
    empty_graph,
    or_merge,
    trivial_conflicts,
    trivial_graph,
)


def dense_oracle(cliques, n_b, include_trivial=False):
    dim = 2 * n_b
    adj = np.zeros((dim, dim), dtype=bool)
    for q in cliques:
        for u in q.nodes:
            for v in q.nodes:
                if u != v:
                    adj[u, v] = True
    if include_trivial:
        for j in range(n_b):
            adj[j, j + n_b] = adj[j + n_b, j] = True
    return adj


def as_dense(g):
    dim = g.num_nodes
    adj = np.zeros((dim, dim), dtype=bool)
    us, vs = g.edges()
    adj[us, vs] = True
    adj[vs, us] = True
    return adj


def random_cliques(rng, n_b, count, max_len=6):
    out = []
    for _ in range(count):
        t = int(rng.integers(2, min(max_len, 2 * n_b) + 1))
        nodes = rng.choice(2 * n_b, size=t, replace=False)
        out.append(Clique(tuple(sorted(int(v) for v in nodes))))
    return out


def test_trivial_conflicts_shapes():
    assert trivial_conflicts(0) == []
    assert [q.nodes for q in trivial_conflicts(1)] == [(0, 1)]
    assert [q.nodes for q in trivial_conflicts(3)] == [(0, 3), (1, 4), (2, 5)]


def test_build_graph_single_pair():
    g = build_graph([Clique((0, 1))], 2)
    assert g.has_edge(0, 1) and g.has_edge(1, 0)
    assert not g.has_edge(0, 2)
    assert g.stored_nnz == 2


def test_build_graph_triangle():
    g = build_graph([Clique((0, 1, 2))], 3)
    edges = set(zip(*g.edges()))
    assert edges == {(0, 1), (0, 2), (1, 2)}


def test_build_graph_matches_dense_oracle():
    rng = np.random.default_rng(1)
    cliques = random_cliques(rng, 20, 50)
    g = build_graph(cliques, 20)
    assert np.array_equal(as_dense(g), dense_oracle(cliques, 20))


def test_build_graph_rejects_out_of_range_nodes():
    with pytest.raises(ValueError, match="out of range"):
        build_graph([Clique((0, 5))], 2)


def test_or_merge_identity_idempotence_union():
    g = build_graph([Clique((0, 1))], 3)
    h = build_graph([Clique((1, 2))], 3)
    assert or_merge(g, empty_graph(3)) == g
    assert or_merge(g, g) == g
    merged = or_merge(g, h)
    assert set(zip(*merged.edges())) == {(0, 1), (1, 2)}


def test_or_merge_dimension_mismatch():
    with pytest.raises(ValueError, match="dimensions"):
        or_merge(empty_graph(2), empty_graph(3))


def test_parallel_build_adds_trivial_edges():
    g = build_graph_parallel([], 3, k=1, seed=0, mode="serial")
    assert g == trivial_graph(3)


@settings(max_examples=40, deadline=None)
@given(
    k=st.sampled_from([1, 2, 3, 4, 5, 8]),
    seed=st.integers(min_value=0, max_value=10_000),
    data=st.data(),
)
def test_parallel_build_equals_serial_for_any_k_and_seed(k, seed, data):
    n_b = data.draw(st.integers(min_value=1, max_value=12))
    m = data.draw(st.integers(min_value=0, max_value=25))
    rng = np.random.default_rng(seed + 1000)
    cliques = random_cliques(rng, n_b, m, max_len=5)
    g = build_graph_parallel(cliques, n_b, k, seed, mode="serial")
    assert np.array_equal(
        as_dense(g), dense_oracle(cliques, n_b, include_trivial=True)
    )


def test_parallel_build_thread_mode_agrees():
    rng = np.random.default_rng(9)
    cliques = random_cliques(rng, 15, 60)
    serial = build_graph_parallel(cliques, 15, 1, seed=4, mode="serial")
    threaded = build_graph_parallel(cliques, 15, 4, seed=4, mode="thread")
    assert serial == threaded


def test_pair_expansion_counter():
    cliques = [Clique((0, 1, 2)), Clique((3, 4))]
    stats = {}
    build_graph_parallel(cliques, 3, 2, seed=0, mode="serial", stats=stats)
    assert stats["pairs_expanded"] == 3 + 1
    assert not stats["pair_cap_hit"]
    assert stats["downsampled"] == 0


def test_downsampling_flag_and_edge_subset():
    big = Clique(tuple(range(10)))
    stats = {}
    g = build_graph_parallel(
        [big], 5, 1, seed=0, max_clique_sample=4, mode="serial", stats=stats
    )
    assert stats["downsampled"] == 1
    assert stats["pairs_expanded"] == 6  # C(4, 2)
    full = dense_oracle([big], 5, include_trivial=True)
    got = as_dense(g)
    assert np.all(full | ~got)  # got is a subset of the full expansion


def test_pair_cap_stops_later_cliques_and_stays_thread_invariant():
    rng = np.random.default_rng(2)
    cliques = random_cliques(rng, 10, 30, max_len=5)
    baseline = None
    for k in (1, 2, 4, 8):
        stats = {}
        g = build_graph_parallel(
            cliques, 10, k, seed=7, max_pairs=20, mode="serial", stats=stats
        )
        assert stats["pair_cap_hit"]
        assert stats["pairs_expanded"] <= 20
        if baseline is None:
            baseline = g
        assert g == baseline


def test_dump_edges_text():
    g = build_graph([Clique((0, 2))], 2)
    assert g.dump_edges() == "0 2\n"
    assert empty_graph(2).dump_edges() == ""


def test_neighbors_and_degree():
    g = or_merge(build_graph([Clique((0, 1, 2))], 3), trivial_graph(3))
    assert g.neighbors(0) == [1, 2, 3]
    assert g.degree(0) == 3
    assert g.neighbors(4) == [1]
