"""Command-line front end: ``minorwalk {gen,test,estclip,verify,calibrate}``.

Every command that produces a report writes self-describing JSON carrying the
package version, a hash of the experiment spec, and the wall-clock time. Exit
codes: 0 success, 1 input error, 2 inconclusive, 3 internal error (including a
verification battery that finds a violation).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from . import rng as streams
from .analysis import BATTERIES, run_battery
from .calibrate import CalibrationError, CalibrationSettings, calibrate
from .clip import est_clip
from .errors import InputError
from .generators import generate, parse_instance
from .graph import BoundedDegreeGraph, NeighborOracle
from .graphio import format_graph, load_graph
from .tester import Decision, TesterConfig, is_minor_free, load_config

EXIT_OK, EXIT_INPUT, EXIT_INCONCLUSIVE, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("minorwalk")


def load_instance(spec: str) -> BoundedDegreeGraph:
    """A graph file path, or a generator spec such as ``grid:rows=8,cols=8``."""
    if os.path.exists(spec):
        return load_graph(spec)
    kind, params = parse_instance(spec)
    seed = int(params.pop("seed", 0))
    return generate(kind, seed=seed, **params)


def spec_hash(spec: dict) -> str:
    body = {k: v for k, v in spec.items() if k not in ("workers", "out")}
    text = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _report(spec: dict, started: float, **body) -> dict:
    return {
        "version": __version__,
        "command": spec["command"],
        "spec": spec,
        "spec_hash": spec_hash(spec),
        "wall_clock_s": round(time.time() - started, 3),
        **body,
    }


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _config(args) -> TesterConfig:
    return load_config(args.config, pattern=args.pattern)


def _check_trials(trials):
    if trials < 1:
        raise InputError(f"--trials must be at least 1, got {trials}")


# -- commands -----------------------------------------------------------------


def cmd_gen(args) -> int:
    graph = load_instance(args.graph)
    text = format_graph(graph)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    return EXIT_OK


def _test_trial(payload):
    graph, config, seed = payload
    return is_minor_free(NeighborOracle(graph), config, seed).to_json()


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def cmd_test(args) -> int:
    started = time.time()
    _check_trials(args.trials)
    graph = load_instance(args.graph)
    config = _config(args)
    spec = {
        "command": "test",
        "graph": args.graph,
        "config": config.to_dict(),
        "trials": args.trials,
        "seed": args.seed,
        "workers": args.workers,
        "out": args.out,
    }
    seeds = [streams.derive_seed(args.seed, streams.TRIAL, i) for i in range(args.trials)]
    verdicts = _map(_test_trial, [(graph, config, s) for s in seeds], args.workers)
    decisions = [v["decision"] for v in verdicts]
    queries = [v["query_count"] for v in verdicts]
    aggregates = {
        "accept_rate": decisions.count(Decision.ACCEPT.value) / len(decisions),
        "reject_rate": decisions.count(Decision.REJECT.value) / len(decisions),
        "inconclusive": decisions.count(Decision.INCONCLUSIVE.value),
        "minor_found": sum(v["reject_reason"] == "minor_found" for v in verdicts),
        "low_count_rejects": sum(v["reject_reason"] == "low_count" for v in verdicts),
        "mean_queries": float(np.mean(queries)),
        "max_queries": int(max(queries)),
    }
    trials = [{"trial": i, "seed": s, **v} for i, (s, v) in enumerate(zip(seeds, verdicts))]
    _emit(_report(spec, started, graph_summary=_graph_summary(graph), aggregates=aggregates, trials=trials), args.out)
    log.info("accept rate %.3f over %d trials", aggregates["accept_rate"], args.trials)
    return EXIT_INCONCLUSIVE if aggregates["inconclusive"] else EXIT_OK


def cmd_estclip(args) -> int:
    started = time.time()
    _check_trials(args.trials)
    graph = load_instance(args.graph)
    config = _config(args)
    spec = {
        "command": "estclip",
        "graph": args.graph,
        "est_clip": config.est_clip.to_dict(),
        "vertex": args.vertex,
        "trials": args.trials,
        "seed": args.seed,
        "workers": args.workers,
        "out": args.out,
    }
    picker = streams.stream(args.seed, streams.SAMPLE_VERTICES)
    trials = []
    for i in range(args.trials):
        s = args.vertex if args.vertex is not None else int(picker.integers(graph.n))
        if not 0 <= s < graph.n:
            raise InputError(f"--vertex {s} out of range [0, {graph.n})")
        oracle = NeighborOracle(graph)
        res = est_clip(oracle, s, config.est_clip, streams.stream(args.seed, streams.EST_CLIP, i))
        entry = res.to_json()
        entry.update({"trial": i, "queries": oracle.query_count})
        trials.append(entry)
    verdicts = [t["verdict"] for t in trials]
    aggregates = {"high_rate": verdicts.count("HIGH") / len(verdicts), "low_rate": verdicts.count("LOW") / len(verdicts)}
    _emit(_report(spec, started, aggregates=aggregates, trials=trials), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    started = time.time()
    spec = {"command": "verify", "battery": args.battery, "seed": args.seed, "workers": args.workers, "out": args.out}
    if args.battery not in BATTERIES:
        raise InputError(f"unknown battery {args.battery!r}; expected one of {', '.join(BATTERIES)}")
    result = run_battery(args.battery, seed=args.seed)
    _emit(_report(spec, started, result=result), args.out)
    return EXIT_OK if result["ok"] else EXIT_INTERNAL


def cmd_calibrate(args) -> int:
    started = time.time()
    settings = CalibrationSettings(pattern=args.pattern or "K5")
    spec = {
        "command": "calibrate",
        "planar": args.planar,
        "far": args.far,
        "settings": settings.__dict__.copy(),
        "name": args.name,
        "seed": args.seed,
        "workers": args.workers,
        "out": args.out,
    }
    planar, far = load_instance(args.planar), load_instance(args.far)
    try:
        config, report = calibrate(planar, far, settings, seed=args.seed, name=args.name, labels=("planar", "far"))
    except CalibrationError as exc:
        _emit(_report(spec, started, error=str(exc), calibration=exc.report), args.report)
        sys.stderr.write(f"minorwalk: calibration failed: {exc}\n")
        return EXIT_INCONCLUSIVE
    preset = config.to_dict()
    preset["calibration"] = {
        "planar": args.planar,
        "far": args.far,
        "seed": args.seed,
        "margin": report["choice"]["margin"],
    }
    _emit(preset, args.out)
    if args.report:
        _emit(_report(spec, started, calibration=report), args.report)
    return EXIT_OK


def _graph_summary(graph):
    return {"n": graph.n, "d": graph.d, "edges": graph.num_edges}


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="minorwalk", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"minorwalk {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        sp.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.add_argument("--workers", type=int, default=1, help="worker processes for trials")
        if config:
            sp.add_argument("--config", default="desk-v1", help="preset name or JSON config path")
            sp.add_argument("--pattern", default=None, help="K3, K4, K5, K33, C4 or a graph file")

    g = sub.add_parser("gen", help="generate an instance and write it as a graph file")
    g.add_argument("--graph", required=True, help="generator spec, e.g. grid:rows=8,cols=8")
    common(g, config=False)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("test", help="run the tester over independent trials")
    t.add_argument("--graph", required=True, help="graph file or generator spec")
    t.add_argument("--trials", type=int, default=1)
    common(t)
    t.set_defaults(func=cmd_test)

    e = sub.add_parser("estclip", help="run the clipped-norm estimator")
    e.add_argument("--graph", required=True, help="graph file or generator spec")
    e.add_argument("--vertex", type=int, default=None, help="start vertex (default: uniform per trial)")
    e.add_argument("--trials", type=int, default=1)
    common(e)
    e.set_defaults(func=cmd_estclip)

    v = sub.add_parser("verify", help="run an analysis battery")
    v.add_argument("battery", help=" | ".join(BATTERIES))
    common(v, config=False)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("calibrate", help="fit estimator thresholds on a planar/far pair and write a preset")
    c.add_argument("--planar", default="grid:rows=32,cols=32")
    c.add_argument("--far", default="random_regular:n=1024,deg=3")
    c.add_argument("--name", default="desk-v1")
    c.add_argument("--pattern", default=None)
    c.add_argument("--report", default=None, help="where to write the calibration report")
    common(c, config=False)
    c.set_defaults(func=cmd_calibrate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    if getattr(args, "workers", 1) < 1:
        sys.stderr.write("minorwalk: --workers must be at least 1\n")
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"minorwalk: {exc}\n")
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        sys.stderr.write(f"minorwalk: internal error: {exc!r}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
