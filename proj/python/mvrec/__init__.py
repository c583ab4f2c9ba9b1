"""Multivariate hierarchical forecast reconciliation."""

from ._core import (
    ArgumentError,
    Error,
    FactorizationError,
    Hierarchy,
    ShapeError,
    StructureError,
    ValidationError,
    fit_forecast,
    max_constraint_violation,
    reconcile,
    reconcile_per_variable,
    reconciliation_operator,
    sample_covariance,
    scenario_json,
    shrinkage_covariance,
    simulate_replicate,
    simulate_study,
)

__version__ = "0.1.0"
