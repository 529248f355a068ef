import json

import pytest

from minorwalk import cli
from minorwalk.clip import EstClipParams
from minorwalk.graphio import load_graph
from minorwalk.minors import BUILTIN_PATTERNS
from minorwalk.tester import TesterConfig, load_config


@pytest.fixture
def small_config(tmp_path):
    config = TesterConfig(
        epsilon=0.25,
        pattern=BUILTIN_PATTERNS["K5"],
        walk_length=8,
        sample_count=4,
        low_threshold=2,
        est_clip=EstClipParams(8, 64, 4, 1 / 3),
        ls_walks=16,
        ls_length=8,
    )
    path = tmp_path / "small.json"
    config.save(path)
    return str(path)


def run(argv):
    return cli.main([str(a) for a in argv])


def read(path):
    with open(path) as fh:
        return json.load(fh)


def test_gen_is_deterministic(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert run(["gen", "--graph", "random_regular:n=50,deg=3,seed=4", "--out", a]) == 0
    assert run(["gen", "--graph", "random_regular:n=50,deg=3,seed=4", "--out", b]) == 0
    assert a.read_bytes() == b.read_bytes()
    g = load_graph(a)
    assert g.n == 50 and set(g.degrees().tolist()) == {3}


def test_gen_to_stdout(capsys):
    assert run(["gen", "--graph", "grid:rows=2,cols=2"]) == 0
    assert capsys.readouterr().out == "4 4\n0 1\n0 2\n1 3\n2 3\n"


@pytest.mark.parametrize(
    "argv",
    [
        ["gen", "--graph", "grid:rows=0,cols=2"],
        ["gen", "--graph", "nope:n=3"],
        ["gen", "--graph", "grid:rows=2,cols=2", "--workers", "0"],
        ["test", "--graph", "grid:rows=3,cols=3", "--trials", "0"],
        ["test", "--graph", "grid:rows=3,cols=3", "--config", "no-such-preset"],
        ["test", "--graph", "grid:rows=3,cols=3", "--pattern", "missing.txt"],
        ["estclip", "--graph", "grid:rows=3,cols=3", "--vertex", "9"],
        ["verify", "nope"],
    ],
)
def test_input_errors_exit_1(argv, capsys):
    assert run(argv) == 1
    assert "minorwalk:" in capsys.readouterr().err


def test_test_report(tmp_path, small_config):
    out = tmp_path / "r.json"
    assert run(["test", "--graph", "grid:rows=6,cols=6", "--config", small_config, "--trials", 3, "--seed", 5, "--out", out]) == 0
    rep = read(out)
    assert rep["command"] == "test" and rep["version"]
    assert len(rep["trials"]) == 3 and rep["graph_summary"] == {"n": 36, "d": 4, "edges": 60}
    agg = rep["aggregates"]
    assert agg["accept_rate"] + agg["reject_rate"] == 1.0 and agg["minor_found"] == 0
    assert agg["max_queries"] >= agg["mean_queries"] > 0


def test_report_is_deterministic_up_to_timing(tmp_path, small_config):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    base = ["test", "--graph", "random_regular:n=100,deg=3", "--config", small_config, "--trials", 4, "--seed", 1]
    assert run(base + ["--out", a]) == 0
    assert run(base + ["--out", b, "--workers", 2]) == 0
    ra, rb = read(a), read(b)
    for r in (ra, rb):
        r.pop("wall_clock_s")
        r["spec"].pop("workers")
        r["spec"].pop("out")
    assert ra == rb


def test_cliques_report_minor(tmp_path, small_config):
    out = tmp_path / "r.json"
    assert run(["test", "--graph", "disjoint_cliques:r=5,n=25", "--config", small_config, "--out", out]) == 0
    trial = read(out)["trials"][0]
    assert trial["decision"] == "REJECT" and trial["reject_reason"] == "minor_found"
    assert len(trial["witness"]) == 5


def test_inconclusive_exits_2(tmp_path):
    config = TesterConfig(
        epsilon=0.25,
        pattern=BUILTIN_PATTERNS["K5"],
        walk_length=4,
        sample_count=2,
        low_threshold=2,
        est_clip=EstClipParams(4, 16, 2, 1 / 3),
        ls_walks=100,
        ls_length=30,
        node_budget=1,
    )
    cfg = tmp_path / "c.json"
    config.save(cfg)
    graph = tmp_path / "v8.txt"
    graph.write_text("8 3\n" + "".join(f"{min(a, b)} {max(a, b)}\n" for a, b in sorted(
        {tuple(sorted((i, (i + 1) % 8))) for i in range(8)} | {(i, i + 4) for i in range(4)})))
    out = tmp_path / "r.json"
    assert run(["test", "--graph", graph, "--config", cfg, "--out", out]) == 2
    assert read(out)["aggregates"]["inconclusive"] == 1


def test_estclip_command(tmp_path):
    out = tmp_path / "e.json"
    assert run(["estclip", "--graph", "grid:rows=5,cols=5", "--vertex", 12, "--trials", 2, "--out", out]) == 0
    rep = read(out)
    assert [t["start"] for t in rep["trials"]] == [12, 12]
    assert rep["trials"][0]["queries"] == 32 * 4096
    assert rep["aggregates"]["high_rate"] + rep["aggregates"]["low_rate"] == 1.0


def test_verify_command(tmp_path):
    out = tmp_path / "v.json"
    assert run(["verify", "kac", "--seed", 2, "--out", out]) == 0
    rep = read(out)
    assert rep["result"]["ok"] and rep["result"]["instances"] == 20


def test_verify_violation_exits_3(monkeypatch, tmp_path):
    monkeypatch.setattr(cli, "run_battery", lambda name, seed=0: {"ok": False})
    assert run(["verify", "kac", "--out", tmp_path / "v.json"]) == 3


def test_internal_error_exits_3(monkeypatch, capsys):
    def boom(args):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "cmd_gen", boom)
    assert run(["gen", "--graph", "grid:rows=2,cols=2"]) == 3
    assert "internal error" in capsys.readouterr().err


def test_spec_hash_ignores_workers_and_out():
    a = cli.spec_hash({"command": "x", "seed": 1, "workers": 1, "out": "a"})
    b = cli.spec_hash({"command": "x", "seed": 1, "workers": 8, "out": None})
    c = cli.spec_hash({"command": "x", "seed": 2, "workers": 1, "out": "a"})
    assert a == b != c


def test_calibrate_writes_loadable_preset(tmp_path):
    out, report = tmp_path / "p.json", tmp_path / "cal.json"
    argv = ["calibrate", "--planar", "grid:rows=16,cols=16", "--far", "random_regular:n=256,deg=3"]
    assert run(argv + ["--name", "mine", "--out", out, "--report", report]) == 0
    config = load_config(str(out))
    assert config.name == "mine" and config.walk_length == 32
    assert config.norm_band.low <= config.norm_band.high
    rep = read(report)
    assert rep["calibration"]["choice"]["margin"] > 0
    assert read(out)["calibration"]["planar"] == "grid:rows=16,cols=16"


def test_calibrate_identical_families_fail(tmp_path):
    report = tmp_path / "cal.json"
    argv = ["calibrate", "--planar", "grid:rows=12,cols=12", "--far", "grid:rows=12,cols=12", "--report", report]
    assert run(argv + ["--out", tmp_path / "p.json"]) == 2
    rep = read(report)
    assert "no (tau, mu)" in rep["error"]
    assert max(row["margin"] for row in rep["calibration"]["sweep"]) == 0
    assert not (tmp_path / "p.json").exists()


def test_shipped_preset_is_reproducible(tmp_path):
    out = tmp_path / "desk.json"
    assert run(["calibrate", "--out", out]) == 0
    fresh = read(out)
    assert TesterConfig.from_dict(fresh) == load_config("desk-v1")
