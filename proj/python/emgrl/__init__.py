"""Wind power forecasting with graph-embedded actor-critic ensembles."""

import json

from . import _emgrl
from ._emgrl import (
    ConfigError,
    ensemble_predict,
    gradient_suite,
    haversine_km,
    improvement_pct,
    knn_graph,
    mae,
    rmse,
    run_cli,
)

__all__ = [
    "ConfigError",
    "ensemble_predict",
    "gradient_suite",
    "haversine_km",
    "improvement_pct",
    "knn_graph",
    "mae",
    "resolve_config",
    "rmse",
    "run_cli",
    "run_experiment",
    "synthetic",
]


def _dump(config):
    if config is None:
        return ""
    return config if isinstance(config, str) else json.dumps(config)


def resolve_config(config=None):
    """Full run configuration with defaults filled in, as a dict."""
    return json.loads(_emgrl.resolve_config(_dump(config)))


def synthetic(config=None):
    """Regime-switching synthetic corpus: series, farms, regimes and timestamps."""
    return _emgrl.synthetic(_dump(config))


def run_experiment(config=None):
    """Runs every repetition of a configuration and returns the report as a dict."""
    return json.loads(_emgrl.run_experiment(_dump(config)))
