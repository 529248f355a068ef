"""The two-sided H-minor-freeness tester and its local search.

``is_minor_free`` samples a multiset of start vertices. For each start it runs
the clipped-norm estimator and a local search that explores the walk
neighbourhood ``B_s`` and checks ``G[B_s]`` for an H-minor. It rejects on any
minor found or on too many LOW estimates, and accepts otherwise.
"""

from __future__ import annotations

import enum
import json
import math
import os
import warnings
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

from . import rng as streams
from .clip import ClipVerdict, EstClipParams, NormBand, est_clip
from .errors import InputError, MinorBudgetExceeded
from .graph import BOTTOM, BoundedDegreeGraph, NeighborOracle
from .minors import (
    BUILTIN_PATTERNS,
    DEFAULT_NODE_BUDGET,
    DEFAULT_VERTEX_BUDGET,
    MinorModel,
    MinorPattern,
    get_pattern,
    has_minor,
)
from .walks import sample_walks

DEFAULT_ALPHA = 4
GALACTIC_SAMPLES = 10**9


class Decision(str, enum.Enum):
    ACCEPT = "ACCEPT"
    REJECT = "REJECT"
    INCONCLUSIVE = "INCONCLUSIVE"


class RejectReason(str, enum.Enum):
    MINOR_FOUND = "minor_found"
    LOW_COUNT = "low_count"
    NONE = "none"


class SearchOutcome(str, enum.Enum):
    FOUND = "FOUND"
    NOT_FOUND = "NOT_FOUND"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class TesterConfig:
    __test__ = False  # not a pytest class

    epsilon: float
    pattern: MinorPattern
    walk_length: int
    sample_count: int
    low_threshold: float
    est_clip: EstClipParams
    ls_walks: int
    ls_length: int
    seed: int = 0
    vertex_budget: int = DEFAULT_VERTEX_BUDGET
    node_budget: int = DEFAULT_NODE_BUDGET
    norm_band: NormBand | None = None
    name: str = "custom"

    def __post_init__(self):
        if not 0 < self.epsilon <= 0.5:
            raise InputError(f"epsilon must lie in (0, 1/2], got {self.epsilon}")
        if self.walk_length < 1 or self.sample_count < 1:
            raise InputError("walk_length and sample_count must be positive")
        if self.ls_walks < 0 or self.ls_length < 0:
            raise InputError("ls_walks and ls_length must be non-negative")
        if self.low_threshold < 0:
            raise InputError("low_threshold must be non-negative")
        if self.est_clip.walk_length != self.walk_length:
            raise InputError("est_clip.walk_length must equal walk_length")
        if self.vertex_budget < 1 or self.node_budget < 1:
            raise InputError("minor-check budgets must be positive")

    def with_pattern(self, pattern) -> "TesterConfig":
        return replace(self, pattern=get_pattern(pattern))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "epsilon": self.epsilon,
            "pattern": _pattern_ref(self.pattern),
            "walk_length": self.walk_length,
            "sample_count": self.sample_count,
            "low_threshold": self.low_threshold,
            "est_clip": self.est_clip.to_dict(),
            "ls_walks": self.ls_walks,
            "ls_length": self.ls_length,
            "seed": self.seed,
            "vertex_budget": self.vertex_budget,
            "node_budget": self.node_budget,
            "norm_band": None if self.norm_band is None else self.norm_band.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TesterConfig":
        try:
            band = data.get("norm_band")
            return cls(
                epsilon=float(data["epsilon"]),
                pattern=get_pattern(data.get("pattern", "K5")),
                walk_length=int(data["walk_length"]),
                sample_count=int(data["sample_count"]),
                low_threshold=float(data["low_threshold"]),
                est_clip=EstClipParams(**data["est_clip"]),
                ls_walks=int(data["ls_walks"]),
                ls_length=int(data["ls_length"]),
                seed=int(data.get("seed", 0)),
                vertex_budget=int(data.get("vertex_budget", DEFAULT_VERTEX_BUDGET)),
                node_budget=int(data.get("node_budget", DEFAULT_NODE_BUDGET)),
                norm_band=None if band is None else NormBand(**band),
                name=str(data.get("name", "custom")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"invalid tester config: {exc!r}") from None

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _pattern_ref(pattern):
    builtin = BUILTIN_PATTERNS.get(pattern.name)
    return pattern.name if builtin == pattern else pattern.to_json()


def walk_length_schedule(epsilon: float, r: int, alpha: float = DEFAULT_ALPHA) -> int:
    """``l = alpha * r^3 + ceil(eps^-20)``."""
    if not 0 < epsilon <= 0.5:
        raise InputError(f"epsilon must lie in (0, 1/2], got {epsilon}")
    return int(alpha * r**3) + math.ceil(epsilon**-20)


def asymptotic_preset(epsilon: float, pattern, alpha: float = DEFAULT_ALPHA, allow_galactic: bool = False) -> TesterConfig:
    """Configuration with the asymptotic parameter schedule.

    These sizes are astronomically large for every admissible epsilon, so the
    call refuses unless ``allow_galactic`` is set, and then warns.
    """
    pattern = get_pattern(pattern)
    ell = walk_length_schedule(epsilon, pattern.r, alpha)
    samples = ell**21
    if samples > GALACTIC_SAMPLES:
        msg = f"asymptotic schedule needs l^21 = {float(samples):.3g} samples (l = {ell})"
        if not allow_galactic:
            raise InputError(msg + "; pass allow_galactic=True to build it anyway")
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return TesterConfig(
        epsilon=epsilon,
        pattern=pattern,
        walk_length=ell,
        sample_count=samples,
        low_threshold=2 * ell**20,
        est_clip=EstClipParams.asymptotic(ell),
        ls_walks=ell**21,
        ls_length=ell**11,
        norm_band=NormBand.asymptotic(ell),
        name="asymptotic",
    )


def preset_names() -> list[str]:
    root = resources.files("minorwalk") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_config(spec, pattern=None) -> TesterConfig:
    """Load a named preset (e.g. ``desk-v1``) or a JSON config file."""
    spec = str(spec)
    if os.path.exists(spec):
        with open(spec, encoding="utf-8") as fh:
            text = fh.read()
    else:
        res = resources.files("minorwalk") / "presets" / f"{spec}.json"
        if not res.is_file():
            raise InputError(f"unknown preset or missing config file: {spec!r} (presets: {preset_names()})")
        text = res.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"config {spec!r} is not valid JSON: {exc}") from None
    config = TesterConfig.from_dict(data)
    return config if pattern is None else config.with_pattern(pattern)


# -- local search -----------------------------------------------------------


def induced_subgraph(oracle: NeighborOracle, B) -> tuple[BoundedDegreeGraph, list[int]]:
    """Learn ``G[B]`` by querying every slot of every vertex of ``B``.

    Issues exactly ``|B| * d`` queries. Returns the relabeled graph and the
    list mapping new ids to original ids.
    """
    old = sorted(set(int(v) for v in B))
    if not old:
        raise InputError("induced_subgraph needs a nonempty vertex set")
    d = oracle.d
    verts = np.repeat(np.asarray(old, dtype=np.int64), d)
    slots = np.tile(np.arange(1, d + 1, dtype=np.int64), len(old))
    answers = oracle.query_many(verts, slots).reshape(len(old), d)
    index = {v: i for i, v in enumerate(old)}
    adjacency = [sorted(index[int(u)] for u in row if u != BOTTOM and int(u) in index) for row in answers]
    return BoundedDegreeGraph(len(old), d, adjacency), old


@dataclass
class LocalSearchResult:
    outcome: SearchOutcome
    ball: list[int]
    witness: MinorModel | None = None
    detail: str = ""


def local_search(oracle: NeighborOracle, s: int, config: TesterConfig, rng) -> LocalSearchResult:
    """Explore ``B_s`` with ``ls_walks`` walks of length ``ls_length`` and
    look for an H-minor in ``G[B_s]``. A witness is reported in original ids."""
    rng = streams.as_generator(rng)
    if config.ls_walks > 0:
        traj = sample_walks(oracle, np.full(config.ls_walks, s), config.ls_length, rng, record=True)
        ball = np.unique(traj).tolist()
    else:
        ball = [int(s)]
    sub, old = induced_subgraph(oracle, ball)
    try:
        res = has_minor(sub, config.pattern, config.vertex_budget, config.node_budget)
    except MinorBudgetExceeded as exc:
        return LocalSearchResult(SearchOutcome.INCONCLUSIVE, ball, detail=str(exc))
    if not res:
        return LocalSearchResult(SearchOutcome.NOT_FOUND, ball)
    witness = MinorModel(tuple(frozenset(old[v] for v in b) for b in res.model.branch_sets))
    return LocalSearchResult(SearchOutcome.FOUND, ball, witness)


# -- driver -----------------------------------------------------------------


@dataclass
class SampleRecord:
    index: int
    vertex: int
    est_clip: ClipVerdict
    heavy_mass: int
    local_search: SearchOutcome
    ball_size: int
    queries: int

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "vertex": self.vertex,
            "est_clip": self.est_clip.value,
            "heavy_mass": self.heavy_mass,
            "local_search": self.local_search.value,
            "ball_size": self.ball_size,
            "queries": self.queries,
        }


@dataclass
class Verdict:
    decision: Decision
    reject_reason: RejectReason
    transcript: list[SampleRecord] = field(default_factory=list)
    query_count: int = 0
    witness: MinorModel | None = None
    low_count: int = 0
    seed: int = 0

    @property
    def accepted(self) -> bool:
        return self.decision is Decision.ACCEPT

    def to_json(self) -> dict:
        return {
            "decision": self.decision.value,
            "reject_reason": self.reject_reason.value,
            "query_count": self.query_count,
            "low_count": self.low_count,
            "seed": self.seed,
            "witness": None if self.witness is None else self.witness.to_json(),
            "transcript": [r.to_json() for r in self.transcript],
        }


def _run_sample(oracle, config, seed, i, s):
    child = oracle.fork()
    est = est_clip(child, s, config.est_clip, streams.stream(seed, streams.EST_CLIP, i))
    ls = local_search(child, s, config, streams.stream(seed, streams.LOCAL_SEARCH, i))
    return child, est, ls


def is_minor_free(oracle: NeighborOracle, config: TesterConfig, seed: int | None = None) -> Verdict:
    """Run the tester once. Deterministic in ``(graph, config, seed)``.

    ``seed`` defaults to ``config.seed``. A local search whose minor check runs
    out of budget makes the verdict INCONCLUSIVE unless another sample already
    forces a rejection.
    """
    if oracle.n < 1:
        raise InputError("the tester needs a nonempty graph")
    seed = config.seed if seed is None else int(seed)
    starts = streams.stream(seed, streams.SAMPLE_VERTICES).integers(0, oracle.n, size=config.sample_count)
    transcript = []
    witness = None
    low = 0
    inconclusive = False
    for i, s in enumerate(starts.tolist()):
        child, est, ls = _run_sample(oracle, config, seed, i, s)
        oracle.merge(child)
        transcript.append(
            SampleRecord(i, s, est.verdict, est.heavy_mass, ls.outcome, len(ls.ball), child.query_count)
        )
        low += est.verdict is ClipVerdict.LOW
        if ls.outcome is SearchOutcome.FOUND and witness is None:
            witness = ls.witness
        inconclusive |= ls.outcome is SearchOutcome.INCONCLUSIVE
    if witness is not None:
        decision, reason = Decision.REJECT, RejectReason.MINOR_FOUND
    elif low > config.low_threshold:
        decision, reason = Decision.REJECT, RejectReason.LOW_COUNT
    elif inconclusive:
        decision, reason = Decision.INCONCLUSIVE, RejectReason.NONE
    else:
        decision, reason = Decision.ACCEPT, RejectReason.NONE
    queries = sum(r.queries for r in transcript)
    return Verdict(decision, reason, transcript, queries, witness, low, seed)
