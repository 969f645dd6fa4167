"""Exact and certificate-based checking of Streett properties on Markov chains."""

from __future__ import annotations

__all__ = [
    "available_models",
    "BadParameter",
    "CheckEntry",
    "CheckReport",
    "MarkovChain",
    "model_path",
    "ReactivityError",
    "Region",
    "StreettCondition",
    "Verdict",
]

import pathlib

from ._common.reactivity_common import (
    BadParameter,
    CheckEntry,
    CheckReport,
    ReactivityError,
    Verdict,
)
from .chain.markov import MarkovChain, Region
from .omega.product import StreettCondition


def available_models() -> dict[str, pathlib.Path]:
    """Return a mapping of bundled model and certificate files and their paths."""
    module_path = pathlib.Path(__file__).parent
    model_paths = (module_path / "models").glob("*.json")
    models = {path.stem: path for path in model_paths}
    return models


def model_path(name: str) -> pathlib.Path:
    """Path of a bundled fixture, given with or without the ``.json`` suffix."""
    models = available_models()
    stem = name[: -len(".json")] if name.endswith(".json") else name
    if stem not in models:
        raise BadParameter(f"no such file or bundled fixture: {name!r}")
    return models[stem]
