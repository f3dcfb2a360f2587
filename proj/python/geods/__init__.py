"""Hybrid multiscale stress modelling."""

import json
import os

from ._geods import (
    HIDDEN_UNITS,
    MERGED_FEATURES,
    PARAMETER_COUNT,
    ConfigError,
    DependencyError,
    DivergenceError,
    GeodsError,
    IndexError,
    IntegrityError,
    NonConvergenceError,
    ShapeError,
    SolverError,
    StaleArtifactError,
    initial_parameters,
    model_parameters,
    solve,
    upscale,
)
from . import _geods

__all__ = [
    "HIDDEN_UNITS", "MERGED_FEATURES", "PARAMETER_COUNT",
    "ConfigError", "DependencyError", "DivergenceError", "GeodsError", "IndexError",
    "IntegrityError", "NonConvergenceError", "ShapeError", "SolverError", "StaleArtifactError",
    "default_config", "load_config", "generate", "initial_parameters", "model_parameters",
    "read_artifact", "run_pipeline", "run_stage", "solve", "upscale",
]


def _text(config):
    if config is None:
        return "{}"
    if isinstance(config, (str, os.PathLike)):
        with open(config, encoding="utf-8") as f:
            return f.read()
    return json.dumps(config)


def default_config():
    """Full default configuration as a dict."""
    return json.loads(_geods.default_config_text())


def load_config(config=None):
    """Validated configuration with defaults filled in, from a dict, a path or None."""
    return json.loads(_geods.normalize_config(_text(config)))


def run_pipeline(config=None, force=False):
    """Runs every stage; returns [(stage, ran)] with ran False for up-to-date stages."""
    return _geods.run_pipeline(_text(config), force)


def run_stage(stage, config=None, force=False):
    return _geods.run_stage(stage, _text(config), force)


def generate(config=None):
    """Fine-scale E, nu, rho, pp arrays shaped (nz, ny, nx)."""
    return _geods.generate(_text(config))


def read_artifact(path):
    """Returns (kind, meta, arrays) for a binary artifact."""
    kind, meta, arrays = _geods.read_artifact(os.fspath(path))
    return kind, json.loads(meta), arrays
