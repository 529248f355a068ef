import json
import warnings

import numpy as np
import pytest
from dataclasses import replace

from conftest import path_graph
from minorwalk import rng as streams
from minorwalk.clip import EstClipParams, NormBand
from minorwalk.errors import InputError
from minorwalk.generators import generate
from minorwalk.graph import BoundedDegreeGraph, NeighborOracle
from minorwalk.minors import BUILTIN_PATTERNS, has_minor, validate_model
from minorwalk.tester import (
    Decision,
    RejectReason,
    SearchOutcome,
    TesterConfig,
    induced_subgraph,
    is_minor_free,
    load_config,
    local_search,
    asymptotic_preset,
    preset_names,
    walk_length_schedule,
)


def small_config(**over):
    base = dict(
        epsilon=0.25,
        pattern=BUILTIN_PATTERNS["K5"],
        walk_length=8,
        sample_count=6,
        low_threshold=3,
        est_clip=EstClipParams(8, 64, 4, 1 / 3),
        ls_walks=20,
        ls_length=10,
    )
    base.update(over)
    return TesterConfig(**base)


def k5():
    return BoundedDegreeGraph.from_edges(5, [(i, j) for i in range(5) for j in range(i + 1, 5)])


def wagner():
    return BoundedDegreeGraph.from_edges(8, [(i, (i + 1) % 8) for i in range(8)] + [(i, i + 4) for i in range(4)])


def test_single_vertex_accepts():
    g = BoundedDegreeGraph(1, 3, [[]])
    v = is_minor_free(NeighborOracle(g), small_config(pattern=BUILTIN_PATTERNS["K3"]), seed=4)
    assert v.decision is Decision.ACCEPT and v.accepted
    assert v.reject_reason is RejectReason.NONE
    assert all(r.est_clip.value == "HIGH" for r in v.transcript)


def test_empty_graph_rejected():
    with pytest.raises(InputError):
        is_minor_free(NeighborOracle(BoundedDegreeGraph(0, 1, [])), small_config())


def test_local_search_covers_k5():
    config = small_config(ls_walks=50, ls_length=5)
    found = 0
    for seed in range(100):
        res = local_search(NeighborOracle(k5()), seed % 5, config, np.random.default_rng(seed))
        found += res.outcome is SearchOutcome.FOUND
        if res.outcome is SearchOutcome.FOUND:
            assert validate_model(k5(), config.pattern, res.witness)
    assert found >= 99


@pytest.mark.parametrize("pattern", ["K5", "K33"])
def test_local_search_on_planar_never_finds(pattern):
    g = generate("grid", rows=12, cols=12)
    config = small_config(pattern=BUILTIN_PATTERNS[pattern], ls_walks=100, ls_length=30)
    for seed in range(20):
        res = local_search(NeighborOracle(g), seed * 7 % g.n, config, seed)
        assert res.outcome is SearchOutcome.NOT_FOUND


def test_local_search_without_walks():
    o = NeighborOracle(k5())
    res = local_search(o, 2, small_config(ls_walks=0), 0)
    assert res.ball == [2] and res.outcome is SearchOutcome.NOT_FOUND
    assert o.query_count == k5().d


def test_local_search_witness_uses_original_ids():
    g = generate("disjoint_cliques", r=5, n=25)
    res = local_search(NeighborOracle(g), 17, small_config(ls_walks=100), 1)
    assert res.outcome is SearchOutcome.FOUND
    assert set().union(*res.witness.branch_sets) == {15, 16, 17, 18, 19}
    assert validate_model(g, BUILTIN_PATTERNS["K5"], res.witness)


def test_induced_subgraph_whole_graph():
    g = generate("grid", rows=3, cols=4)
    sub, old = induced_subgraph(NeighborOracle(g), range(g.n))
    assert old == list(range(g.n)) and sub.adjacency == g.adjacency


def test_induced_subgraph_row_is_path():
    g = generate("grid", rows=3, cols=3)
    o = NeighborOracle(g)
    sub, old = induced_subgraph(o, [5, 3, 4])
    assert old == [3, 4, 5]
    assert list(sub.edges()) == [(0, 1), (1, 2)]
    assert o.query_count == 3 * g.d
    with pytest.raises(InputError):
        induced_subgraph(o, [])


def test_query_accounting_is_exact():
    g = generate("grid", rows=10, cols=10)
    config = small_config()
    o = NeighborOracle(g)
    v = is_minor_free(o, config, seed=3)
    per_walks = config.est_clip.num_walks * config.walk_length + config.ls_walks * config.ls_length
    for rec in v.transcript:
        assert rec.queries == per_walks + rec.ball_size * g.d
    assert v.query_count == o.query_count == sum(r.queries for r in v.transcript)


def test_deterministic_given_seed():
    g = generate("random_regular", seed=1, n=200, deg=3)
    config = small_config(sample_count=10)
    a = is_minor_free(NeighborOracle(g), config, seed=9).to_json()
    b = is_minor_free(NeighborOracle(g), config, seed=9).to_json()
    assert a == b
    c = is_minor_free(NeighborOracle(g), config, seed=10).to_json()
    assert a != c


def test_seed_defaults_to_config_seed():
    g = generate("grid", rows=6, cols=6)
    config = small_config(seed=77)
    assert is_minor_free(NeighborOracle(g), config).to_json() == is_minor_free(NeighborOracle(g), config, 77).to_json()


def test_samples_are_independent_streams():
    # sample i of a longer run is the same computation as sample i of a shorter one
    g = generate("random_regular", seed=2, n=300, deg=3)
    short = is_minor_free(NeighborOracle(g), small_config(sample_count=3), seed=5)
    long = is_minor_free(NeighborOracle(g), small_config(sample_count=6), seed=5)
    assert [r.to_json() for r in short.transcript] == [r.to_json() for r in long.transcript[:3]]


def test_clique_union_rejects_with_witness():
    g = generate("disjoint_cliques", r=5, n=50)
    v = is_minor_free(NeighborOracle(g), small_config(ls_walks=60), seed=0)
    assert v.decision is Decision.REJECT and v.reject_reason is RejectReason.MINOR_FOUND
    assert validate_model(g, BUILTIN_PATTERNS["K5"], v.witness)


def test_low_count_rejection():
    g = generate("random_regular", seed=0, n=1000, deg=3)
    config = small_config(ls_walks=0, low_threshold=0, est_clip=EstClipParams(8, 64, 60, 0.9))
    v = is_minor_free(NeighborOracle(g), config, seed=0)
    assert v.low_count == config.sample_count
    assert v.decision is Decision.REJECT and v.reject_reason is RejectReason.LOW_COUNT


def test_budget_exhaustion_is_inconclusive():
    config = small_config(node_budget=1, low_threshold=6, ls_walks=100, ls_length=30)
    v = is_minor_free(NeighborOracle(wagner()), config, seed=0)
    assert v.decision is Decision.INCONCLUSIVE and v.reject_reason is RejectReason.NONE
    assert any(r.local_search is SearchOutcome.INCONCLUSIVE for r in v.transcript)
    forced = is_minor_free(NeighborOracle(wagner()), replace(config, low_threshold=0, est_clip=EstClipParams(8, 64, 60, 0.9)), 0)
    assert forced.reject_reason is RejectReason.LOW_COUNT


def test_planar_instances_never_report_a_minor():
    config = load_config("desk-v1")
    for spec in [("grid", dict(rows=15, cols=15)), ("binary_tree", dict(n=127)), ("ladder", dict(length=40))]:
        g = generate(spec[0], **spec[1])
        for pattern in ("K5", "K33"):
            v = is_minor_free(NeighborOracle(g), replace(config, sample_count=4).with_pattern(pattern), seed=1)
            assert v.reject_reason is not RejectReason.MINOR_FOUND
            assert not has_minor(g, BUILTIN_PATTERNS[pattern])


def test_verdict_json():
    v = is_minor_free(NeighborOracle(path_graph(4)), small_config(pattern=BUILTIN_PATTERNS["K3"]), seed=2)
    data = json.loads(json.dumps(v.to_json()))
    assert data["decision"] == "ACCEPT" and len(data["transcript"]) == 6
    assert set(data["transcript"][0]) == {"index", "vertex", "est_clip", "heavy_mass", "local_search", "ball_size", "queries"}


def test_config_validation():
    for over in [
        dict(epsilon=0.0),
        dict(epsilon=0.6),
        dict(sample_count=0),
        dict(ls_walks=-1),
        dict(low_threshold=-1),
        dict(est_clip=EstClipParams(9, 64, 4, 0.5)),
        dict(node_budget=0),
    ]:
        with pytest.raises(InputError):
            small_config(**over)


def test_config_round_trip(tmp_path):
    config = small_config(norm_band=NormBand(0.001, 0.01), name="mine")
    assert TesterConfig.from_dict(config.to_dict()) == config
    custom = config.with_pattern({"r": 3, "edges": [[0, 1], [1, 2]], "name": "P3"})
    assert TesterConfig.from_dict(json.loads(json.dumps(custom.to_dict()))) == custom
    path = tmp_path / "c.json"
    config.save(path)
    assert load_config(str(path)) == config
    with pytest.raises(InputError):
        TesterConfig.from_dict({"epsilon": 0.1})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InputError):
        load_config(str(bad))
    with pytest.raises(InputError):
        load_config("no-such-preset")


def test_desk_preset():
    assert "desk-v1" in preset_names()
    config = load_config("desk-v1")
    assert (config.walk_length, config.sample_count, config.ls_walks, config.ls_length) == (32, 64, 512, 64)
    assert config.est_clip.num_walks == 4096
    assert config.pattern.name == "K5"
    assert load_config("desk-v1", pattern="K33").pattern.name == "K33"


def test_walk_length_schedule():
    assert walk_length_schedule(0.5, 5) == 4 * 125 + 2**20
    assert walk_length_schedule(0.5, 3, alpha=5) == 135 + 2**20
    with pytest.raises(InputError):
        walk_length_schedule(0.0, 5)


def test_asymptotic_preset_is_guarded():
    with pytest.raises(InputError, match="allow_galactic"):
        asymptotic_preset(0.5, "K5")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        config = asymptotic_preset(0.5, "K3", allow_galactic=True)
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)
    ell = walk_length_schedule(0.5, 3)
    assert config.walk_length == ell and config.sample_count == ell**21
    assert config.est_clip.num_walks == ell**14


def test_stream_keys_are_distinct():
    a = streams.stream(0, streams.EST_CLIP, 0).random(4)
    b = streams.stream(0, streams.LOCAL_SEARCH, 0).random(4)
    c = streams.stream(0, streams.EST_CLIP, 1).random(4)
    assert not np.allclose(a, b) and not np.allclose(a, c)
    assert streams.derive_seed(5, streams.TRIAL, 0) == streams.derive_seed(5, streams.TRIAL, 0)
    assert 0 <= streams.derive_seed(5, streams.TRIAL, 1) < 2**63
