"""Catalog of scalar functions used as dissipations, gains and activations.

Parameterizations (all accept numpy arrays):

=========================  ==========================  =====================
kind                       value                       parameters
=========================  ==========================  =====================
``linear``                 ``s x``                     ``s > 0``
``power``                  ``a sign(x) |x|^r``         ``a > 0, r >= 1``
``saturating_exponential`` ``a (1 - exp(-k x))``       ``a, k > 0``
``piecewise_linear``       interpolation of ``knots``  ``knots=[[x, y], ...]``
``tanh_like``              ``a tanh(k x)``             ``a, k > 0``
``hump``                   ``a x exp(-k x)``           ``a, k > 0``
``zero``                   ``0``
=========================  ==========================  =====================

``piecewise_linear`` extends linearly beyond its outer knots.  ``hump`` is
nonnegative on ``x >= 0`` but not increasing, so it only qualifies for the
``nonneg`` class (inhibitory-then-excitatory couplings of positive systems).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

KINDS = ("linear", "power", "saturating_exponential", "piecewise_linear", "tanh_like", "hump", "zero")
CLASSES = ("K", "K_inf", "nonneg")


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class ScalarFn:
    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    cls: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CatalogError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        p = dict(self.params)
        req = {"linear": ("s",), "power": ("a", "r"), "saturating_exponential": ("a", "k"),
               "piecewise_linear": ("knots",), "tanh_like": ("a", "k"), "hump": ("a", "k"),
               "zero": ()}[self.kind]
        for name in req:
            if name not in p:
                raise CatalogError(f"{self.kind} needs parameter {name!r}")
        if self.kind == "piecewise_linear":
            knots = np.asarray(p["knots"], float)
            if knots.ndim != 2 or knots.shape[1] != 2 or knots.shape[0] < 2:
                raise CatalogError("knots must be a list of at least two [x, y] pairs")
            if np.any(np.diff(knots[:, 0]) <= 0):
                raise CatalogError("knot abscissae must be strictly increasing")
            p["knots"] = knots.tolist()
        else:
            for name in req:
                if not float(p[name]) > 0:
                    raise CatalogError(f"{self.kind}: parameter {name} must be > 0")
            if self.kind == "power" and float(p["r"]) < 1:
                raise CatalogError("power: r must be >= 1")
        object.__setattr__(self, "params", p)
        if self.cls is not None:
            if self.cls not in CLASSES:
                raise CatalogError(f"unknown class {self.cls!r}")
            self.validate_class(self.cls)

    # constructors
    @classmethod
    def linear(cls, s=1.0, klass=None):
        return cls("linear", {"s": s}, klass)

    @classmethod
    def power(cls, a=1.0, r=3.0, klass=None):
        return cls("power", {"a": a, "r": r}, klass)

    @classmethod
    def saturating_exponential(cls, a=1.0, k=1.0, klass=None):
        return cls("saturating_exponential", {"a": a, "k": k}, klass)

    @classmethod
    def piecewise_linear(cls, knots, klass=None):
        return cls("piecewise_linear", {"knots": knots}, klass)

    @classmethod
    def tanh_like(cls, a=1.0, k=1.0, klass=None):
        return cls("tanh_like", {"a": a, "k": k}, klass)

    @classmethod
    def hump(cls, a=1.0, k=1.0, klass=None):
        return cls("hump", {"a": a, "k": k}, klass)

    @classmethod
    def zero(cls, klass=None):
        return cls("zero", {}, klass)

    @classmethod
    def from_dict(cls, d: dict) -> "ScalarFn":
        d = dict(d)
        kind = d.pop("kind")
        klass = d.pop("class", None)
        return cls(kind, d, klass)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, **self.params}
        if self.cls:
            d["class"] = self.cls
        return d

    # evaluation
    def __call__(self, x):
        x = np.asarray(x, float)
        p = self.params
        k = self.kind
        if k == "linear":
            return p["s"] * x
        if k == "power":
            return p["a"] * np.sign(x) * np.abs(x) ** p["r"]
        if k == "saturating_exponential":
            return p["a"] * -np.expm1(-p["k"] * x)
        if k == "tanh_like":
            return p["a"] * np.tanh(p["k"] * x)
        if k == "hump":
            return p["a"] * x * np.exp(-p["k"] * x)
        if k == "zero":
            return np.zeros_like(x)
        kn = np.asarray(p["knots"])
        xs, ys = kn[:, 0], kn[:, 1]
        out = np.interp(x, xs, ys)
        lo_slope = (ys[1] - ys[0]) / (xs[1] - xs[0])
        hi_slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
        out = np.where(x < xs[0], ys[0] + lo_slope * (x - xs[0]), out)
        return np.where(x > xs[-1], ys[-1] + hi_slope * (x - xs[-1]), out)

    def derivative(self, x, side: str = "right"):
        """Derivative; ``piecewise_linear`` returns the one-sided slope at knots."""
        x = np.asarray(x, float)
        p = self.params
        k = self.kind
        if k == "linear":
            return np.full_like(x, p["s"])
        if k == "power":
            return p["a"] * p["r"] * np.abs(x) ** (p["r"] - 1)
        if k == "saturating_exponential":
            return p["a"] * p["k"] * np.exp(-p["k"] * x)
        if k == "tanh_like":
            return p["a"] * p["k"] / np.cosh(p["k"] * x) ** 2
        if k == "hump":
            return p["a"] * (1 - p["k"] * x) * np.exp(-p["k"] * x)
        if k == "zero":
            return np.zeros_like(x)
        kn = np.asarray(p["knots"])
        xs, ys = kn[:, 0], kn[:, 1]
        slopes = np.diff(ys) / np.diff(xs)
        pos = np.searchsorted(xs, x, side="right" if side == "right" else "left") - 1
        return slopes[np.clip(pos, 0, slopes.size - 1)]

    def at_knot(self, x, tol: float = 1e-12) -> bool:
        if self.kind != "piecewise_linear":
            return False
        xs = np.asarray(self.params["knots"])[:, 0]
        return bool(np.any(np.abs(xs - float(x)) <= tol))

    @property
    def sector_bound(self) -> float:
        """``sup`` of the derivative over the real line (analytic; may be ``inf``)."""
        p = self.params
        k = self.kind
        if k == "linear":
            return float(p["s"])
        if k == "power":
            return float(p["a"]) if p["r"] == 1 else math.inf
        if k in ("saturating_exponential", "hump"):
            return math.inf  # derivative grows without bound as x -> -inf
        if k == "tanh_like":
            return float(p["a"] * p["k"])
        if k == "zero":
            return 0.0
        kn = np.asarray(p["knots"])
        return float(np.max(np.diff(kn[:, 1]) / np.diff(kn[:, 0])))

    def inverse(self, y, hi: float = 1e6):
        """Inverse on ``[0, inf)`` for increasing entries (bisection fallback)."""
        y = np.asarray(y, float)
        p = self.params
        if self.kind == "linear":
            return y / p["s"]
        if self.kind == "power":
            return np.sign(y) * (np.abs(y) / p["a"]) ** (1.0 / p["r"])
        lo_b = np.zeros_like(y)
        hi_b = np.full_like(y, hi)
        if np.any(self(hi_b) < y):
            raise CatalogError("value outside the range of the function")
        for _ in range(200):
            mid = 0.5 * (lo_b + hi_b)
            below = self(mid) < y
            lo_b = np.where(below, mid, lo_b)
            hi_b = np.where(below, hi_b, mid)
        return 0.5 * (lo_b + hi_b)

    def validate_class(self, klass: str, grid=None) -> None:
        """Check the declared class on a grid of ``[0, 100]`` (and at ``10^6``)."""
        g = np.concatenate([[0.0], np.logspace(-6, 2, 400)]) if grid is None else np.asarray(grid)
        v = self(g)
        if abs(float(self(0.0))) > 1e-12:
            raise CatalogError(f"{self.kind}: value at 0 must be 0")
        if klass == "nonneg":
            if np.any(v < -1e-12):
                raise CatalogError(f"{self.kind}: negative value on [0, inf)")
            return
        # saturating entries flatten out in floating point far from 0, so
        # strictness is only demanded on [0, 10]
        d = np.diff(v)
        if np.any(d < 0) or np.any(d[g[1:] <= 10.0] <= 0):
            raise CatalogError(f"{self.kind}: not strictly increasing on the sample grid")
        if klass == "K_inf" and not float(self(1e6)) > 1e3:
            raise CatalogError(f"{self.kind}: not unbounded (value at 1e6 is {float(self(1e6)):.3g})")

    def has_class(self, klass: str) -> bool:
        try:
            self.validate_class(klass)
        except CatalogError:
            return False
        return True


@dataclass(frozen=True)
class InputSignal:
    """``constant(value)``, ``sin(offset, amplitude, omega, phase)`` or
    ``piecewise_constant(times, values)`` (values[k] on [times[k], times[k+1]))."""

    kind: str
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("constant", "sin", "piecewise_constant"):
            raise CatalogError(f"unknown input kind {self.kind!r}")

    @classmethod
    def constant(cls, value):
        return cls("constant", {"value": np.asarray(value, float).tolist()})

    @classmethod
    def sin(cls, offset, amplitude, omega=1.0, phase=0.0):
        return cls("sin", {"offset": np.asarray(offset, float).tolist(),
                           "amplitude": np.asarray(amplitude, float).tolist(),
                           "omega": float(omega), "phase": float(phase)})

    @classmethod
    def from_dict(cls, d: dict) -> "InputSignal":
        kind = d["kind"]
        params = d.get("params", {k: v for k, v in d.items() if k != "kind"})
        if kind == "constant" and not isinstance(params, dict):
            params = {"value": params}
        return cls(kind, dict(params))

    def to_dict(self):
        return {"kind": self.kind, "params": self.params}

    def __call__(self, t: float) -> np.ndarray:
        p = self.params
        if self.kind == "constant":
            return np.asarray(p["value"], float)
        if self.kind == "sin":
            return (np.asarray(p["offset"], float)
                    + np.asarray(p["amplitude"], float) * math.sin(p["omega"] * t + p.get("phase", 0.0)))
        times = np.asarray(p["times"], float)
        vals = np.asarray(p["values"], float)
        k = max(0, int(np.searchsorted(times, t, side="right")) - 1)
        return vals[min(k, len(vals) - 1)]

    @property
    def period(self) -> float | None:
        if self.kind == "sin":
            return 2 * math.pi / self.params["omega"]
        return None

    def check_nonnegative(self, horizon: float = 20.0, m: int = 400) -> bool:
        return all(np.all(self(t) >= -1e-12) for t in np.linspace(0, horizon, m))
