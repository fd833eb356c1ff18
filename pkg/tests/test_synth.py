import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import channel, dataset, text
from oracles import crawl_closure
from tgscope.data_model import parse_dataset
from tgscope.synth import (
    CloneSpec,
    FakeSpec,
    NetworkSpec,
    SpecError,
    StandardSpec,
    UniverseSpec,
    generate_universe,
    read_ground_truth,
    simulate_crawl,
    window_origins,
    write_universe,
)

SMALL = dict(standard=StandardSpec(n_standard=40, n_verified=3, n_scam=2, hub_in_degree=8),
             fakes=FakeSpec(n_official=5, n_fake=5), clones=CloneSpec(n_originals=2),
             network=NetworkSpec(size=20, anchors=3, language_groups="it:2"))


def test_zero_channels_empty_archive(tmp_path):
    ds, truth = generate_universe(UniverseSpec(standard=StandardSpec(n_standard=0)))
    assert len(ds.channels) == 0 and ds.n_messages == 0 and not truth.roles
    paths = write_universe(ds, truth, tmp_path)
    assert paths["channels"].read_text() == "" and paths["messages"].read_text() == ""


def test_deterministic_bytes(tmp_path):
    for d in ("a", "b"):
        write_universe(*generate_universe(UniverseSpec(seed=11, **SMALL)), tmp_path / d)
    for name in ("channels.jsonl", "messages.jsonl", "ground_truth.csv", "ground_truth_stats.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    other = tmp_path / "c"
    write_universe(*generate_universe(UniverseSpec(seed=12, **SMALL)), other)
    assert (other / "messages.jsonl").read_bytes() != (tmp_path / "a" / "messages.jsonl").read_bytes()


def test_output_parses_and_truth_round_trips(tmp_path):
    ds, truth = generate_universe(UniverseSpec(seed=3, **SMALL))
    paths = write_universe(ds, truth, tmp_path)
    back = parse_dataset(paths["channels"], paths["messages"])
    assert set(back.channels) == set(ds.channels) and back.n_messages == ds.n_messages
    gt = read_ground_truth(paths["ground_truth"])
    assert gt.roles == truth.roles and gt.clone_pairs == sorted(truth.clone_pairs)
    assert gt.network == truth.network and gt.core == truth.core and sorted(gt.anchors) == sorted(truth.anchors)
    roles = list(truth.roles.values())
    assert roles.count("verified") == 3 and roles.count("scam") == 2 and roles.count("fake") == 5


def test_forward_origins_inside_universe():
    ds, _ = generate_universe(UniverseSpec(seed=5, **SMALL))
    for cid in ds.channels:
        for m in ds.channel_messages(cid):
            if m.fwd is not None:
                assert m.fwd.from_channel_id in ds.channels and m.fwd.from_channel_id != cid


@pytest.mark.parametrize("spec", [
    UniverseSpec(end_time=1_577_836_800),
    UniverseSpec(standard=StandardSpec(n_standard=-1)),
    UniverseSpec(standard=StandardSpec(n_standard=3), clones=CloneSpec(n_originals=5)),
    UniverseSpec(fakes=FakeSpec(n_fake=3)),
    UniverseSpec(network=NetworkSpec(size=2)),
    UniverseSpec(network=NetworkSpec(size=10, anchors=10)),
    UniverseSpec(standard=StandardSpec(copy_noise=1.5)),
])
def test_inconsistent_specs_rejected(spec):
    with pytest.raises(SpecError):
        generate_universe(spec)


def test_from_config(tmp_path):
    p = tmp_path / "u.ini"
    p.write_text("[universe]\nseed = 7\n[standard]\nn_standard = 30\ncopy_noise = 0.2\n[network]\nsize = 12\nanchors = 2\n")
    spec = UniverseSpec.from_config(p)
    assert (spec.seed, spec.standard.n_standard, spec.standard.copy_noise, spec.network.size) == (7, 30, 0.2, 12)
    p.write_text("[standard]\nbogus = 1\n")
    with pytest.raises(SpecError):
        UniverseSpec.from_config(p)
    p.write_text("[weird]\nx = 1\n")
    with pytest.raises(SpecError):
        UniverseSpec.from_config(p)


# -- crawl ---------------------------------------------------------------------------------

def test_crawl_without_forwards_stops_at_seeds():
    ds = dataset([channel(i) for i in range(4)], [text(i, 1, 5, "hi") for i in range(4)])
    r = simulate_crawl(ds, [0, 1])
    assert r.discovered == {0, 1} and len(r.iterations) == 1 and r.reached_fixed_point
    assert r.iterations[0].idle_fraction == 1.0


def test_crawl_chain():
    msgs = [text(0, 1, 5, "a", fwd_from=1, fwd_date=1), text(1, 1, 6, "b", fwd_from=2, fwd_date=1),
            text(2, 1, 7, "c")]
    r = simulate_crawl(dataset([channel(i) for i in range(4)], msgs), [0])
    assert r.discovered == {0, 1, 2} and [i.new_channels for i in r.iterations] == [1, 1, 0]
    assert [i.idle_fraction for i in r.iterations] == [0.0, 0.0, 1.0]
    assert r.iterations[-1].explored_fraction == 1.0 and set(r.dataset.channels) == {0, 1, 2}
    with pytest.raises(KeyError):
        simulate_crawl(dataset([channel(0)], []), [5])


def test_crawl_iteration_cap():
    msgs = [text(i, 1, 5, "x", fwd_from=i + 1, fwd_date=1) for i in range(9)]
    r = simulate_crawl(dataset([channel(i) for i in range(10)], msgs), [0], max_iterations=3)
    assert len(r.iterations) == 3 and not r.reached_fixed_point and r.pending == {3}


def test_window_limits_origins():
    msgs = [text(0, 1, 5, "old", fwd_from=1, fwd_date=1), text(0, 2, 9, "new", fwd_from=2, fwd_date=1)]
    ds = dataset([channel(i) for i in range(3)], msgs)
    assert window_origins(ds, 0, 1) == {2} and simulate_crawl(ds, [0], window=1).discovered == {0, 2}


@settings(max_examples=15)
@given(st.integers(0, 10_000), st.integers(1, 40))
def test_crawl_equals_closure(seed, window):
    ds, _ = generate_universe(UniverseSpec(seed=seed, standard=StandardSpec(n_standard=30, hub_in_degree=5),
                                           network=NetworkSpec(size=10, anchors=2, language_groups="")))
    rng = np.random.default_rng(seed)
    ids = sorted(ds.channels)
    seeds = rng.choice(ids, size=int(rng.integers(1, 4)), replace=False).tolist()
    r = simulate_crawl(ds, seeds, window=window)
    assert r.discovered == crawl_closure(lambda c: window_origins(ds, c, window), seeds)
    bigger = simulate_crawl(ds, seeds + [ids[0]], window=window)
    assert r.discovered <= bigger.discovered
