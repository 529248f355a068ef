"""Random-walk property testing for H-minor-freeness in bounded-degree graphs."""

from .clip import ClipVerdict, EstClipParams, NormBand, clip, clipped_norm_sq, est_clip
from .errors import GraphFormatError, InputError, MinorBudgetExceeded, StrandedComponentError
from .generators import generate
from .graph import BoundedDegreeGraph, NeighborOracle, VertexPartition, component_sizes, crossing_edges
from .graphio import load_graph, save_graph
from .minors import MinorModel, MinorPattern, brute_force_has_minor, get_pattern, has_minor, validate_model
from .tester import Decision, TesterConfig, Verdict, is_minor_free, load_config, local_search, asymptotic_preset
from .walks import ProbabilityVector, exact_distribution, lazy_step, sample_walk

__version__ = "0.1.0"

__all__ = [
    "BoundedDegreeGraph",
    "ClipVerdict",
    "Decision",
    "EstClipParams",
    "GraphFormatError",
    "InputError",
    "MinorBudgetExceeded",
    "MinorModel",
    "MinorPattern",
    "NeighborOracle",
    "NormBand",
    "ProbabilityVector",
    "StrandedComponentError",
    "TesterConfig",
    "Verdict",
    "VertexPartition",
    "brute_force_has_minor",
    "clip",
    "clipped_norm_sq",
    "component_sizes",
    "crossing_edges",
    "est_clip",
    "exact_distribution",
    "generate",
    "get_pattern",
    "has_minor",
    "is_minor_free",
    "lazy_step",
    "load_config",
    "load_graph",
    "local_search",
    "asymptotic_preset",
    "sample_walk",
    "save_graph",
    "validate_model",
]
