import math
from collections import Counter

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from rmt_smin import graph as G, profile as P
from rmt_smin.sampler import sample


def lower4():
    return G.build_graph(P.lower_triangular(4), G.GraphParams.raw_override(4, 2.0))


def band6():
    return G.build_graph(P.periodic_band(6, 1), G.GraphParams.raw_override(6, 2.0))


def test_lower_triangular_split_and_edges():
    g = lower4()
    src = g.source
    sp = g.splits[src]
    assert sp.sparse == (2, 3) and sp.dense == (0, 1)
    assert set(sp.supports[0]) == {0, 1, 2, 3} and set(sp.supports[1]) == {1, 2, 3}
    edges = {(e.dst, e.label) for e in g.out_edges(src)}
    assert edges == {((), 0), ((0,), 1), ((2, 3), None)}
    assert g.is_terminal((0,)) and g.is_terminal((2, 3))


def test_band6_terminals():
    g = band6()
    assert g.empty_terminal
    pairs = sorted(g.non_empty_terminals)
    assert len(pairs) == 6
    assert all(len(p) == 2 and (p[1] - p[0]) % 6 in (2, 4) for p in pairs)
    assert len(g.terminals) == 7
    assert all(G.validate(g).values())


def test_structure_count_by_networkx_oracle():
    g = band6()
    ng = nx.MultiDiGraph()
    for e in g.edges:
        ng.add_edge(e.src, e.dst)
    lengths = Counter()
    for t in g.terminals:
        for path in nx.all_simple_edge_paths(ng, g.source, t):
            lengths[len(path)] += 1
    expected = sum(c * (6 + 2) ** d for d, c in lengths.items())
    en = G.enumerate_structures(g, 0)
    assert en.count == expected == len(en.structures)
    assert en.count <= en.bound
    assert all(s.r_sequence[0] == 0 for s in en.structures)


def test_path_bound_holds():
    g = band6()
    assert g.longest_path() <= g.path_length_bound()


def test_from_shift_params():
    p = G.GraphParams.from_shift(8, 2 + 0j, 0.5)
    assert p.delta == pytest.approx(0.25)
    assert p.L == pytest.approx(2 / math.sqrt(8))
    assert p.beta == pytest.approx(8.0 ** -3)
    with pytest.raises(ValueError):
        G.GraphParams.from_shift(8, 0, 0.5)


def test_build_refuses_large_sigma_star():
    with pytest.raises(ValueError):
        G.build_graph(P.full(4).scaled(3.0), G.GraphParams.from_shift(4, 1.0, 0.5))


def test_truncation_flag():
    g = G.build_graph(P.periodic_band(6, 1), G.GraphParams.raw_override(6, 2.0), cap=3)
    assert g.truncated
    assert not G.validate(g)["not_truncated"]
    with pytest.raises(ValueError):
        G.enumerate_structures(g, 0)


def test_json_and_dot():
    g = lower4()
    d = g.to_json_dict()
    assert d["indexBase"] == 0
    assert len(d["vertices"]) == 4
    assert sum(1 for e in d["edges"] if e["from"] == [0, 1, 2, 3]) == 3
    dot = g.to_dot()
    assert "{1,2,3,4}" in dot and "∅" in dot and dot.count("->") == 3


profiles01 = st.integers(2, 6).flatmap(lambda n: arrays(float, (n, n), elements=st.sampled_from([0.0, 1.0])))


@given(profiles01, st.sampled_from([0.5, 1.0, 2.0, 3.0]))
def test_random_graphs_validate(V, L2):
    prof = P.VarianceProfile(V)
    if prof.is_zero():
        return
    g = G.build_graph(prof, G.GraphParams.raw_override(prof.n, L2))
    checks = G.validate(g)
    assert all(checks.values()), checks
    for e in g.edges:
        assert set(e.dst) < set(e.src)
    for t in g.non_empty_terminals:
        assert np.all((V[np.ix_(t, t)] ** 2).sum(axis=0) <= L2)


def test_ladder_values():
    lad = G.dyadic_ladder(64, 64.0 ** -3)
    assert (lad.p0, lad.p0_tilde) == (6, 41)
    assert lad.p0_exact and lad.p0_tilde_exact
    small = G.dyadic_ladder(4, 4.0 ** -3)
    assert small.p0 == 2 and small.p0_tilde == 4 and not small.p0_tilde_exact
    assert small.t(-1) == math.inf and small.t(3) == 0.125


@given(st.floats(1e-6, 10))
def test_largest_index_at_least(v):
    lad = G.dyadic_ladder(30, 1e-5)
    r = lad.largest_index_at_least(v)
    assert lad.t(r) >= v
    if r < 30:
        assert lad.t(r + 1) < v


def test_witness_outcomes_are_consistent():
    prof = P.periodic_band(6, 1)
    params = G.GraphParams.raw_override(6, 2.0)
    g = G.build_graph(prof, params)
    lad = G.dyadic_ladder(6, params)
    found = 0
    for seed in range(20):
        s = sample(prof, z=1.5, seed=seed)
        w = G.deconstruction_witness(s, g, g.source, 6, lad)
        if w.outcome == "precondition_failed":
            assert w.smin_vertex > lad.t(6) * 1.5
            w = G.deconstruction_witness(s, g, g.source, 0, lad)
        if w.outcome == "labeled":
            num, den = G.normalized_pairing(s, g.source, w.edge.label)
            assert num / den <= w.pairing_threshold
            assert w.smin_target <= lad.t(w.r) * 1.5
            found += 1
        elif w.outcome == "terminal":
            assert w.smin_target < lad.t(lad.p0) * 1.5
            found += 1
    assert found > 0
    with pytest.raises(ValueError):
        G.deconstruction_witness(sample(prof, z=1.0), g, (), 0, lad)
