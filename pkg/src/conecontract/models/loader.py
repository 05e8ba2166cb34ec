"""Model definition files (JSON).

``{"type": "linear", "A": [[...]]}``

``{"type": "hopfield", "Lambda": [...], "T": [[...]],
"activations": [{"kind": "tanh_like", "a": 0.5, "k": 1}, ...],
"input": {"kind": "constant" | "sin" | "piecewise_constant", "params": {...}}}``

``{"type": "separable_monotone" | "separable_positive", "alphas": [entry, ...],
"interactions": [[entry | null, ...], ...], "input": {...}}``

``{"type": "comparison", "alphas": [...], "gains": [[...]], "input_gains": [...],
"alpha_lower": [...], "alpha_upper": [...]}``

Catalog entries are ``{"kind": ..., <parameters>, "class": optional}``; see
:mod:`conecontract.models.catalog` for the parameterizations.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from ..normcore import as_matrix
from ..odesim import VectorField
from .catalog import InputSignal, ScalarFn
from .comparison import ComparisonSpec
from .hopfield import HopfieldNetwork
from .separable import SeparableSystem

MODEL_TYPES = ("linear", "hopfield", "separable_monotone", "separable_positive", "comparison")


class ModelFormatError(ValueError):
    pass


def _entry(d):
    return None if d is None else ScalarFn.from_dict(d)


def _entries(seq):
    return None if seq is None else tuple(_entry(d) for d in seq)


def load_model(source: str | Path | dict[str, Any]):
    """Build a model object from a dict, JSON text or a path to a JSON file."""
    if isinstance(source, dict):
        d = source
    else:
        text = str(source)
        if not text.lstrip().startswith("{"):
            text = Path(source).read_text()
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"invalid model JSON: {exc}") from exc
    kind = d.get("type")
    if kind not in MODEL_TYPES:
        raise ModelFormatError(f"model type must be one of {MODEL_TYPES}, got {kind!r}")
    try:
        inp = InputSignal.from_dict(d["input"]) if d.get("input") else None
        if kind == "linear":
            A = as_matrix(d["A"])
            return VectorField.linear(A)
        if kind == "hopfield":
            return HopfieldNetwork(np.asarray(d["Lambda"], float), np.asarray(d["T"], float),
                                   _entries(d["activations"]), inp)
        if kind.startswith("separable"):
            return SeparableSystem(_entries(d["alphas"]),
                                   tuple(tuple(_entry(e) for e in row) for row in d["interactions"]),
                                   flavor=kind.split("_", 1)[1], u=inp)
        return ComparisonSpec(len(d["alphas"]), _entries(d["alphas"]),
                              tuple(tuple(_entry(e) for e in row) for row in d["gains"]),
                              _entries(d.get("input_gains")), _entries(d.get("alpha_lower")),
                              _entries(d.get("alpha_upper")))
    except KeyError as exc:
        raise ModelFormatError(f"missing field {exc} for model type {kind}") from exc


def as_vector_field(model) -> VectorField:
    if isinstance(model, VectorField):
        return model
    return model.vector_field()
