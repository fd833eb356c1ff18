import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import channel, dataset, random_digraph, text
from tgscope.community import community_of, leiden
from tgscope.coordination import (
    COVERAGE_BANDS,
    coverage_band,
    find_core_channels,
    forwarding_delays,
    message_reuse,
    network_coverage,
)
from tgscope.graph import ForwardGraph, build_forward_graph
from tgscope.synth import NetworkSpec, StandardSpec, UniverseSpec, generate_universe

MSG = "coordinated content for everyone"


def test_reuse_counts():
    ds = dataset([channel(i) for i in range(3)],
                 [text(0, 1, 10, MSG)] + [text(i, 1, 20, MSG, fwd_from=0, fwd_date=10) for i in (1, 2)])
    r = message_reuse(ds, [0, 1, 2])
    assert (r.total, r.distinct) == (3, 1) and r.top[0][1:] == (3, MSG)
    unique = dataset([channel(i) for i in range(3)], [text(i, 1, 5, f"item {i}") for i in range(3)])
    r = message_reuse(unique, range(3))
    assert r.total == r.distinct == 3
    with pytest.raises(ValueError):
        message_reuse(unique, [])


def test_delay_statistics():
    ds = dataset([channel(i) for i in range(3)],
                 [text(0, 1, 1000, MSG), text(1, 1, 1060, MSG), text(2, 1, 1120, MSG)])
    p = forwarding_delays(ds, [0, 1, 2])
    (m,) = p.messages
    assert (m.first, m.mean, m.last, m.n_copies) == (60.0, 90.0, 120.0, 2)
    assert p.fast_first_fraction == 1.0


def test_unique_contents_skipped_and_slow_forwards():
    msgs = [text(0, 1, 5, "only once here")]
    msgs += [text(0, 2, 100, MSG)] + [text(i, 1, 400, MSG, fwd_from=0, fwd_date=100) for i in (1, 2)]
    p = forwarding_delays(dataset([channel(i) for i in range(3)], msgs), range(3))
    assert len(p.messages) == 1 and p.messages[0].first == 300 and p.fast_first_fraction == 1.0
    assert p.origin_mismatches == 0
    late = [text(0, 2, 100, MSG), text(1, 1, 800, MSG)]
    assert forwarding_delays(dataset([channel(0), channel(1)], late), [0, 1]).fast_first_fraction == 0.0


def test_coverage_examples():
    n = 98
    msgs = [text(i, 1, 10 + i, MSG) for i in range(n)] + [text(5, 2, 3, "solo message")]
    rep = network_coverage(dataset([channel(i) for i in range(n)], msgs), range(n))
    cov = sorted(rep.coverage.values())
    assert cov == [pytest.approx(1 / 98), 1.0]
    assert rep.histogram["(80,100%]"] == 1 and rep.histogram["0%"] == 1 and len(rep.never_forwarded) == 1
    assert sum(rep.histogram.values()) == len(rep.coverage)


def test_coverage_bands():
    assert coverage_band(0.2, 2) == "(0,20%]" and coverage_band(0.21, 2) == "(20,40%]"
    assert coverage_band(1.0, 5) == "(80,100%]" and coverage_band(0.5, 1) == "0%"
    assert COVERAGE_BANDS[0] == "0%"


def test_core_examples():
    star = ForwardGraph.from_edges(range(5), [(i, 0, 1) for i in range(1, 5)])
    assert find_core_channels(star).core == [0]
    cycle = ForwardGraph.from_edges(range(2), [(0, 1, 1), (1, 0, 1)])
    assert find_core_channels(cycle).core == []
    # 3 of 10 others forward from node 0
    g = ForwardGraph.from_edges(range(11), [(i, 0, 1) for i in (1, 2, 3)])
    assert find_core_channels(g, 0.3).core == [0] and find_core_channels(g, 0.31).core == []
    with pytest.raises(ValueError):
        find_core_channels(ForwardGraph.from_edges([], []))


@given(st.integers(0, 10_000))
def test_core_invariant_under_relabeling(seed):
    rng = np.random.default_rng(seed)
    g = random_digraph(rng, int(rng.integers(1, 25)), float(rng.uniform(0, 0.3)))
    perm = {n: int(p) for n, p in zip(g.nodes, rng.permutation(len(g)) + 1000)}
    h = ForwardGraph.from_edges([perm[n] for n in g.nodes], [(perm[u], perm[v], w) for u, v, w in g.edges()])
    a, b = find_core_channels(g, 0.4), find_core_channels(h, 0.4)
    assert sorted(perm[c] for c in a.core) == sorted(b.core)
    assert a.component_sizes == b.component_sizes


@pytest.fixture(scope="module")
def scripted():
    spec = UniverseSpec(seed=2, standard=StandardSpec(n_standard=150), network=NetworkSpec(size=98))
    return generate_universe(spec)


def test_scripted_network(scripted):
    ds, truth = scripted
    g = build_forward_graph(ds)
    members = community_of(leiden(g, seed=0), truth.anchors).nodes
    assert members == truth.network
    delays = forwarding_delays(ds, members)
    assert abs(delays.fast_first_fraction - truth.stats["fast_first_fraction"]) <= 0.01
    core = find_core_channels(g.subgraph(members))
    assert core.core == [truth.core] and core.n_components == 2
    reuse = message_reuse(ds, members)
    assert (reuse.total, reuse.distinct) == (truth.stats["network_total"], truth.stats["network_distinct"])
    cov = network_coverage(ds, members)
    assert len(cov.never_forwarded) == truth.stats["never_forwarded"]
