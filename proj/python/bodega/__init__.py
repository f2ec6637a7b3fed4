"""Keyed learned bloom filters with adversarial security games."""

from ._core import (
    AnalyticScenario,
    BodegaConfigError,
    BodegaDataError,
    BodegaInvalidInput,
    Filter,
    adversarial_bound,
    adversary_names,
    build_filter,
    canonicalize,
    cbf_fpr,
    extract_features,
    generate_url_corpus,
    lbf_fpr_composed,
    learned_rates,
    mixed_workload_fpr,
    optimal_hash_count,
    run_attack,
    sweep,
)

__all__ = [
    "AnalyticScenario",
    "BodegaConfigError",
    "BodegaDataError",
    "BodegaInvalidInput",
    "Filter",
    "adversarial_bound",
    "adversary_names",
    "build_filter",
    "canonicalize",
    "cbf_fpr",
    "extract_features",
    "generate_url_corpus",
    "lbf_fpr_composed",
    "learned_rates",
    "mixed_workload_fpr",
    "optimal_hash_count",
    "run_attack",
    "sweep",
]
