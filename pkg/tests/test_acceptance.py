"""Acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (also repeated in the
terminal summary) before asserting, so a failing criterion is still reported.
"""

import json
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from conftest import record_verdict
from helpers import random_digraph
from oracles import (
    INF,
    adjusted_rand,
    brute_force_clones,
    crawl_closure,
    dense_pagerank,
    floyd_warshall,
    scc_partition,
    shapley_by_subsets,
)
from test_clones import _pair_dataset, random_corpus
from test_community import planted, singletons
from test_mlp import max_relative_error, random_model, separable
from test_topics import corpus_of, planted_corpus, model_with
from tgscope.clones import find_clones
from tgscope.community import community_of, leiden, modularity
from tgscope.coordination import find_core_channels, forwarding_delays
from tgscope.features import feature_matrix
from tgscope.graph import build_forward_graph, hop_distances, is_acyclic, pagerank, strongly_connected_components
from tgscope.mlp import cross_validate, exact_shapley, train_mlp
from tgscope.synth import (
    CloneSpec,
    FakeSpec,
    NetworkSpec,
    StandardSpec,
    UniverseSpec,
    generate_universe,
    simulate_crawl,
    window_origins,
)
from tgscope.topics import lda_gibbs, select_topic_count, umass_coherence

HERE = Path(__file__).resolve().parent


@pytest.fixture
def verdict(capsys):
    def emit(name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        record_verdict(line)
        with capsys.disabled():
            print(f"\n{line}")
        assert ok, line
    return emit


def test_graph_oracle(verdict):
    t0 = time.perf_counter()
    bad = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 51))
        g = random_digraph(rng, n, float(rng.uniform(0.0, 0.15)))
        dist = floyd_warshall(n, [(u, v) for u, v, _ in g.edges()])
        cond = strongly_connected_components(g)
        hops = hop_distances(g, range(n), range(n))
        same = ({frozenset(m) for m in cond.members()} == scc_partition(dist) and is_acyclic(cond.dag)
                and all(hops[i][j] == (None if dist[i][j] == INF else dist[i][j]) for i in range(n) for j in range(n)))
        bad += not same
    secs = time.perf_counter() - t0
    verdict("graph_oracle", bad == 0 and secs < 10, f"{100 - bad}/100 digraphs exact, {secs:.2f} s (< 10 s)")


def test_pagerank_oracle(verdict):
    worst_l1 = worst_sum = 0.0
    for seed in range(50):
        rng = np.random.default_rng(500 + seed)
        n = int(rng.integers(1, 31))
        g = random_digraph(rng, n, float(rng.uniform(0.0, 0.4)))
        pr = pagerank(g)
        got = np.array([pr[i] for i in range(n)])
        ref = dense_pagerank(n, [(u, v) for u, v, _ in g.edges()])
        worst_l1 = max(worst_l1, float(np.abs(got - ref).sum()))
        worst_sum = max(worst_sum, abs(float(got.sum()) - 1.0))
    verdict("pagerank", worst_l1 < 1e-8 and worst_sum <= 1e-9,
            f"max L1 {worst_l1:.2e} (< 1e-8), max |sum-1| {worst_sum:.2e} (<= 1e-9) over 50 digraphs")


def test_leiden_planted(verdict):
    t0 = time.perf_counter()
    hits, q_ok = 0, True
    for seed in range(20):
        g, truth = planted(seed)
        a = leiden(g, seed=seed)
        hits += adjusted_rand(truth, [a.membership[i] for i in range(len(g))]) >= 0.9
        q_ok &= modularity(g, a) >= modularity(g, singletons(g)) - 1e-12
    for seed in range(30):
        rng = np.random.default_rng(seed)
        g = random_digraph(rng, int(rng.integers(1, 60)), float(rng.uniform(0, 0.2)))
        q_ok &= modularity(g, leiden(g, seed=seed)) >= modularity(g, singletons(g)) - 1e-12
    secs = time.perf_counter() - t0
    verdict("leiden", hits >= 18 and q_ok and secs < 30,
            f"ARI >= 0.9 in {hits}/20 seeds (>= 18), modularity >= singletons on all graphs: {q_ok}, {secs:.1f} s (< 30 s)")


def test_clone_detection(verdict):
    exact = sum({(e.original_id, e.clone_id, e.shared, e.eligible) for e in find_clones(ds)}
                == brute_force_clones(plain, Fraction(3, 10))
                for ds, plain in map(random_corpus, range(50)))
    ds, truth = generate_universe(UniverseSpec(seed=4, standard=StandardSpec(n_standard=120),
                                               clones=CloneSpec(n_originals=5, clones_per_original=2)))
    found = {(e.original_id, e.clone_id) for e in find_clones(ds)}
    scripted = set(truth.clone_pairs)
    tp = len(found & scripted)
    precision = tp / len(found) if found else 0.0
    recall = tp / len(scripted)
    boundary = [(e.shared, e.eligible) for e in find_clones(_pair_dataset(3, 10))] == [(3, 10)]
    verdict("clone_detection", exact == 50 and precision == recall == 1.0 and len(scripted) == 10 and boundary,
            f"{exact}/50 corpora equal brute force, precision {precision:.2f} recall {recall:.2f} on "
            f"{len(scripted)} scripted clones, 3/10 boundary flagged: {boundary}")


def test_topic_pipeline(verdict):
    picks = [select_topic_count(planted_corpus(s)[0], 2, 6, seed=s, iters=500)[0] for s in range(10)]
    hits = sum(k in (2, 3, 4) for k in picks)
    rows_ok = True
    for s in range(3):
        m = lda_gibbs(planted_corpus(s, D=60)[0], 2 + s, iters=50, seed=s)
        rows_ok &= bool(np.all(np.abs(m.phi.sum(axis=1) - 1) <= 1e-9) and np.all(np.abs(m.theta.sum(axis=1) - 1) <= 1e-9))
    c = corpus_of([[0, 1], [0, 1], [0, 2]], ["a", "b", "c"])
    want = (np.log(3 / 3) + np.log(2 / 3) + np.log(1 / 2)) / 3
    err = abs(umass_coherence(model_with([[0.5, 0.3, 0.2]], c.vocab), c, 3) - want)
    verdict("topics", hits >= 8 and rows_ok and err <= 1e-12,
            f"selected K {picks}: {hits}/10 in {{2,3,4}} (>= 8), rows sum to 1: {rows_ok}, UMass error {err:.1e}")


def test_mlp_numerics(verdict):
    worst = max(max_relative_error(seed) for seed in range(20))
    X, y = separable(1)
    model, _ = train_mlp(X, y, epochs=50, seed=1)
    acc = float(np.mean((model.predict_proba(X) > 0.5) == y))
    verdict("mlp_numerics", worst < 1e-4 and acc >= 0.99,
            f"max gradient relative error {worst:.1e} (< 1e-4) over 20 networks, separable accuracy {acc:.3f} (>= 0.99)")


def test_classifier_proxy(verdict):
    t0 = time.perf_counter()
    ds, truth = generate_universe(UniverseSpec(seed=0, standard=StandardSpec(n_standard=20),
                                               fakes=FakeSpec(n_official=184, n_fake=158)))
    ids = sorted(c for c, r in truth.roles.items() if r in ("official", "fake"))
    X = feature_matrix(ds, ids)
    y = np.array([truth.roles[c] == "fake" for c in ids], dtype=float)
    cv = cross_validate(X, y, folds=5, seed=0, epochs=50)
    secs = time.perf_counter() - t0
    verdict("classifier_proxy", cv.accuracy >= 0.85 and cv.weighted_f1 >= 0.85 and secs < 120,
            f"5-fold accuracy {cv.accuracy:.3f}, weighted F1 {cv.weighted_f1:.3f} (>= 0.85), {secs:.1f} s (< 120 s)")


def test_shapley(verdict):
    worst_eff = worst_dummy = 0.0
    for i in range(100):
        rng = np.random.default_rng(10_000 + i)
        model = random_model(i, dummy=i % 13)
        x, bg = rng.normal(size=13), rng.normal(size=13)
        phi = exact_shapley(model, x, bg)
        full, empty = model.predict_proba(np.vstack([x, bg]))
        worst_eff = max(worst_eff, abs(phi.sum() - (full - empty)))
        worst_dummy = max(worst_dummy, abs(phi[i % 13]))
    x, bg = np.array([1.0, 2.0, 3.0]), np.zeros(3)

    def f(Z):
        Z = np.atleast_2d(Z)
        return Z[:, 0] * Z[:, 1] + 2 * Z[:, 2] + Z[:, 0] * Z[:, 1] * Z[:, 2]

    want = shapley_by_subsets(lambda S: float(f(np.where([k in S for k in range(3)], x, bg))[0]), 3)
    hand = exact_shapley(f, x, bg).tolist() == [float(v) for v in want]
    verdict("shapley", worst_eff <= 1e-9 and worst_dummy <= 1e-9 and hand,
            f"max efficiency gap {worst_eff:.1e}, max dummy |phi| {worst_dummy:.1e} over 100 instances, "
            f"3-feature enumeration exact: {hand}")


def test_coordination_proxy(verdict):
    ds, truth = generate_universe(UniverseSpec(seed=2, standard=StandardSpec(n_standard=150),
                                               network=NetworkSpec(size=98, fast_fraction=0.95)))
    g = build_forward_graph(ds)
    members = community_of(leiden(g, seed=0), truth.anchors).nodes
    frac = forwarding_delays(ds, members).fast_first_fraction
    scripted = truth.stats["fast_first_fraction"]
    core = find_core_channels(g.subgraph(members))
    ok = (members == truth.network and len(members) == 98 and abs(frac - scripted) <= 0.01
          and core.core == [truth.core] and core.n_components == 2)
    verdict("coordination_proxy", ok,
            f"{len(members)} members recovered, fast fraction {frac:.4f} vs scripted {scripted:.4f} (+-0.01), "
            f"core {core.core} vs {[truth.core]}, {core.n_components} SCCs (== 2)")


def test_crawl_simulator(verdict):
    equal = 0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        spec = UniverseSpec(seed=seed, standard=StandardSpec(n_standard=int(rng.integers(10, 60)),
                                                             hub_in_degree=int(rng.integers(0, 8))),
                            network=NetworkSpec(size=int(rng.choice([0, 12])), anchors=2, language_groups=""))
        ds, _ = generate_universe(spec)
        window = int(rng.integers(1, 60))
        seeds = rng.choice(sorted(ds.channels), size=int(rng.integers(1, 4)), replace=False).tolist()
        got = simulate_crawl(ds, seeds, window=window).discovered
        equal += got == crawl_closure(lambda c: window_origins(ds, c, window), seeds)
    verdict("crawl_simulator", equal == 50, f"{equal}/50 universes equal the reachability closure")


@pytest.mark.slow
def test_performance(verdict, tmp_path):
    channels, messages = tmp_path / "channels.jsonl", tmp_path / "messages.jsonl"
    sys.path.insert(0, str(HERE))
    from perfcorpus import write_corpus
    write_corpus(channels, messages)
    runs = {}
    for threads in (1, 4):
        out = subprocess.run([sys.executable, str(HERE / "perfcorpus.py"), str(channels), str(messages), str(threads)],
                             capture_output=True, text=True, check=True)
        runs[threads] = json.loads(out.stdout)
    secs = max(r["seconds"] for r in runs.values())
    peak = max(r["peak_bytes"] for r in runs.values())
    same = runs[1]["pairs"] == runs[4]["pairs"] and len(runs[1]["pairs"]) > 0
    verdict("performance", runs[1]["messages"] == 1_000_000 and secs < 60 and peak < 2 * 1024**3 and same,
            f"1,000,000 messages / 1000 channels in {secs:.1f} s (< 60 s), peak RSS {peak / 1024**2:.0f} MiB "
            f"(< 2048 MiB), {len(runs[1]['pairs'])} clone pairs identical for 1 and 4 threads: {same}")
