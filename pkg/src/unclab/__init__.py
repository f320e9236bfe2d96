"""Fuzzy-gate resource accounting: restricted-measurement entropies,
extraction/expenditure protocols, and accessible-dimension estimates for
small qubit registers."""

__version__ = "0.1.0"

from .centropy import (
    MeasOp,
    SearchConfig,
    complexity_entropy,
    complexity_negentropy,
    complexity_profile,
    hypothesis_entropy,
)
from .circuits import Architecture, Circuit, brickwork
from .fuzz import FuzzModel, FuzzVariant, apply_fuzzy_circuit, sample_fuzzy_gate
from .geometry import accessible_dimension, brickwork_monotone_trial, numerical_rank
from .protocols import expend, extract, extraction_converse, plan_extraction
from .qcore import DensityOp, Gate2Q, PureState, haar_su4, trace_distance

__all__ = [
    "__version__",
    "Architecture",
    "Circuit",
    "DensityOp",
    "FuzzModel",
    "FuzzVariant",
    "Gate2Q",
    "MeasOp",
    "PureState",
    "SearchConfig",
    "accessible_dimension",
    "apply_fuzzy_circuit",
    "brickwork",
    "brickwork_monotone_trial",
    "complexity_entropy",
    "complexity_negentropy",
    "complexity_profile",
    "expend",
    "extract",
    "extraction_converse",
    "haar_su4",
    "hypothesis_entropy",
    "numerical_rank",
    "plan_extraction",
    "sample_fuzzy_gate",
    "trace_distance",
]
