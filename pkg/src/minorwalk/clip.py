"""Clipped vectors and the sampling estimator that classifies their norms.

``clip(x, xi)`` removes ``xi`` units of l1 mass from ``x`` so as to minimise
the l2 norm, never raising a coordinate. The minimiser is the water-fill
``y = min(x, theta)`` where ``theta`` solves ``sum(max(x - theta, 0)) = xi``.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InputError
from .graph import NeighborOracle
from .rng import as_generator
from .walks import ProbabilityVector, sample_walks


def _check_xi(xi):
    if not 0 <= xi < 1:
        raise InputError(f"clip mass xi must lie in [0, 1), got {xi}")


def water_level(values, xi: float) -> float:
    """Level ``theta`` such that ``sum(max(values - theta, 0)) == xi``.

    Returns 0 when ``xi`` covers all the mass, ``max(values)`` when ``xi == 0``.
    """
    a = np.sort(np.asarray(values, dtype=np.float64))[::-1]
    if a.size == 0 or xi >= a.sum():
        return 0.0
    if xi <= 0:
        return float(a[0])
    prefix = np.cumsum(a)
    # mass above level a_j; non-decreasing in j
    above = prefix - np.arange(1, a.size + 1) * a
    j = int(np.searchsorted(above, xi, side="right"))
    return float(max((prefix[j - 1] - xi) / j, 0.0))


def clip(x, xi: float):
    """The ``xi``-clipped vector of ``x``.

    Accepts a :class:`ProbabilityVector` (returned as one) or any non-negative
    array (returned as an ndarray).
    """
    _check_xi(xi)
    if isinstance(x, ProbabilityVector):
        return ProbabilityVector(x.indices, _clip_array(x.values, xi))
    return _clip_array(np.asarray(x, dtype=np.float64), xi)


def _clip_array(x, xi):
    if x.size and x.min() < 0:
        raise InputError("clip input must be non-negative")
    if xi == 0:
        return x.copy()
    if xi >= x.sum():
        return np.zeros_like(x)
    return np.minimum(x, water_level(x, xi))


def clipped_norm_sq(x, xi: float) -> float:
    y = clip(x, xi)
    v = y.values if isinstance(y, ProbabilityVector) else y
    return float(np.dot(v, v))


# -- EstClip ----------------------------------------------------------------


class ClipVerdict(str, enum.Enum):
    HIGH = "HIGH"
    LOW = "LOW"


@dataclass(frozen=True)
class EstClipParams:
    walk_length: int
    num_walks: int
    count_threshold: float
    mass_fraction: float

    def __post_init__(self):
        if self.walk_length < 1 or self.num_walks < 1:
            raise InputError("walk_length and num_walks must be positive")
        if self.count_threshold <= 0:
            raise InputError("count_threshold must be positive")
        if not 0 < self.mass_fraction < 1:
            raise InputError("mass_fraction must lie in (0, 1)")

    @classmethod
    def asymptotic(cls, walk_length: int) -> "EstClipParams":
        """``w = l^14`` walks, heavy cutoff ``l^7/2``, HIGH at one third of the walks."""
        ell = int(walk_length)
        return cls(ell, ell**14, ell**7 / 2, 1 / 3)

    @property
    def heavy_probability(self) -> float:
        """Per-vertex probability whose expected count equals the cutoff."""
        return self.count_threshold / self.num_walks

    def to_dict(self):
        return asdict(self)


@dataclass
class EstClipResult:
    verdict: ClipVerdict
    counts: dict[int, int]
    heavy_set: list[int]
    heavy_mass: int
    num_walks: int
    start: int = -1

    @property
    def heavy_fraction(self) -> float:
        return self.heavy_mass / self.num_walks

    def to_json(self) -> dict:
        return {
            "start": self.start,
            "verdict": self.verdict.value,
            "counts": {str(k): v for k, v in sorted(self.counts.items())},
            "heavy_set": self.heavy_set,
            "heavy_mass": self.heavy_mass,
            "num_walks": self.num_walks,
        }


def classify_counts(counts: dict[int, int], params: EstClipParams) -> tuple[ClipVerdict, list[int], int]:
    heavy = sorted(v for v, c in counts.items() if c >= params.count_threshold)
    mass = sum(counts[v] for v in heavy)
    verdict = ClipVerdict.HIGH if mass >= params.mass_fraction * params.num_walks else ClipVerdict.LOW
    return verdict, heavy, mass


def est_clip(oracle: NeighborOracle, s: int, params: EstClipParams, rng) -> EstClipResult:
    """Estimate whether the clipped norm of ``p_{s,l}`` is high or low from
    ``num_walks`` sampled endpoints."""
    rng = as_generator(rng)
    ends = sample_walks(oracle, np.full(params.num_walks, s), params.walk_length, rng)
    verts, cnts = np.unique(ends, return_counts=True)
    counts = {int(v): int(c) for v, c in zip(verts, cnts)}
    verdict, heavy, mass = classify_counts(counts, params)
    return EstClipResult(verdict, counts, heavy, mass, params.num_walks, int(s))


@dataclass(frozen=True)
class NormBand:
    """Clipped-norm thresholds at which the estimator's answer is pinned down.

    ``||clip(p, low_xi)||^2 < low`` should yield LOW and
    ``||clip(p, high_xi)||^2 > high`` should yield HIGH.
    """

    low: float
    high: float
    low_xi: float = 0.25
    high_xi: float = 0.375

    @classmethod
    def asymptotic(cls, walk_length: int) -> "NormBand":
        ell = float(walk_length)
        return cls(ell**-8 / 400, ell**-7)

    def classify(self, x, margin: float = 1.0) -> ClipVerdict | None:
        """Expected verdict for ``x`` if it clears a threshold by ``margin``, else None."""
        if clipped_norm_sq(x, self.high_xi) > margin * self.high:
            return ClipVerdict.HIGH
        if clipped_norm_sq(x, self.low_xi) * margin < self.low:
            return ClipVerdict.LOW
        return None

    def to_dict(self):
        return asdict(self)
