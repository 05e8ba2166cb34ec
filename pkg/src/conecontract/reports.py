"""Value objects returned by the numerical checks."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays and infinities for json."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


@dataclass
class CheckReport:
    """Outcome of a sampled inequality check.

    ``worst_margin`` is the minimum over samples of (allowed - observed);
    a check passes when every margin is ``>= -tol``.
    """

    condition: str
    samples: int = 0
    worst_margin: float = math.inf
    tol: float = 0.0
    failures: list[dict[str, Any]] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)
    max_failures: int = 20

    @property
    def passed(self) -> bool:
        return self.worst_margin >= -self.tol

    def record(self, margin: float, inputs: dict[str, Any] | None = None) -> None:
        self.samples += 1
        if margin < self.worst_margin:
            self.worst_margin = float(margin)
        if margin < -self.tol and len(self.failures) < self.max_failures:
            self.failures.append({"inputs": inputs or {}, "value": float(margin)})

    def to_dict(self) -> dict[str, Any]:
        d = {
            "condition": self.condition,
            "samples": self.samples,
            "worst_margin": self.worst_margin,
            "tol": self.tol,
            "passed": self.passed,
            "failures": self.failures,
        }
        if self.flags:
            d["flags"] = self.flags
        if self.extra:
            d["extra"] = self.extra
        return to_jsonable(d)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)
