"""Fuzzy agent-based product configuration with consensus seeking."""

from .consensus import (
    ConsensusParams,
    Partition,
    SuperAgent,
    co_cluster,
    expand_configuration,
    seek_consensus,
)
from .fuzzy import FuzzyRelation, average_rows, compose_max_min, validate_relation
from .modelio import fixture_model, parse_model, render_result, serialize_model
from .pipeline import (
    Configuration,
    ConfigurationModel,
    ConfigurationResult,
    PipelineOptions,
    apply_update,
    run_configuration,
)

__all__ = [
    "Configuration",
    "ConfigurationModel",
    "ConfigurationResult",
    "ConsensusParams",
    "FuzzyRelation",
    "Partition",
    "PipelineOptions",
    "SuperAgent",
    "apply_update",
    "average_rows",
    "co_cluster",
    "compose_max_min",
    "expand_configuration",
    "fixture_model",
    "parse_model",
    "render_result",
    "run_configuration",
    "seek_consensus",
    "serialize_model",
    "validate_relation",
]
