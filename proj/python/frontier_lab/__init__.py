"""Portfolio experiments under structural misspecification."""

import json

from ._core import (
    CancellationParams,
    ConfigError,
    ConfounderScaling,
    DataError,
    DegenerateError,
    DomainError,
    Error,
    InsufficientDataError,
    RngStream,
    ShapeError,
    SingularityError,
    attenuated_slope,
    attenuated_slope_derivative,
    biased_loading,
    cosine_alignment,
    fit_logistic,
    min_variance_at_target,
    misspecified_exposure,
    stream_id,
    sweep_frontier,
    tangency_sharpe,
)
from . import _core


def default_config(experiment):
    """Default config of an experiment as a dict."""
    return json.loads(_core.default_config(experiment))


def run_experiment(config, threads=0):
    """Run an experiment config (dict) and return the parsed summary."""
    return json.loads(_core.run_experiment(json.dumps(config), threads))


__all__ = [name for name in dir() if not name.startswith("_") and name != "json"]
