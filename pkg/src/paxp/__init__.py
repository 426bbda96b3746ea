"""Exact probabilistic abductive explanations for several classifier families."""
from .engine import (
    ClassifierMeta,
    ContractViolation,
    CountPair,
    ExplanationError,
    Instance,
    axp,
    find_weak_paxp,
    is_lm_paxp,
    is_subset_minimal,
    is_weak_axp,
    is_weak_paxp,
    lm_paxp,
    min_paxp,
    parse_delta,
    precision,
)
from .formats import load_instances, load_model

__all__ = [
    "ClassifierMeta",
    "ContractViolation",
    "CountPair",
    "ExplanationError",
    "Instance",
    "axp",
    "find_weak_paxp",
    "is_lm_paxp",
    "is_subset_minimal",
    "is_weak_axp",
    "is_weak_paxp",
    "lm_paxp",
    "min_paxp",
    "parse_delta",
    "precision",
    "load_model",
    "load_instances",
]
