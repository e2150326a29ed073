"""Cluster-feature classification: fuzzy clustering feeding a decision tree."""

from cfc._core import (
    Candidate,
    ConfigError,
    Error,
    Model,
    Prediction,
    __version__,
    entropy,
    load_model,
    train,
)

__all__ = [
    "Candidate",
    "ConfigError",
    "Error",
    "Model",
    "Prediction",
    "__version__",
    "entropy",
    "load_model",
    "train",
]
