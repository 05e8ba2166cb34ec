"""Weighted p-norms and structural matrix predicates.

A :class:`NormSpec` describes ``x -> ||W x||_p`` where ``W`` is the identity,
a positive diagonal ``[eta]`` or a general invertible nonnegative matrix
``R``.  Everything else in the package takes a ``NormSpec``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

INF = math.inf

#: condition-number threshold above which a general weight is rejected
COND_LIMIT = 1e12


class DimensionError(ValueError):
    pass


def as_vector(x, name: str = "x") -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def as_matrix(A, name: str = "A") -> np.ndarray:
    M = np.asarray(A, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def _parse_p(p) -> float:
    if isinstance(p, str):
        if p.strip().lower() in ("inf", "infinity", "oo"):
            return INF
        p = float(p)
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise ValueError(f"norm exponent must satisfy p >= 1, got {p}")
    return p


@dataclass(frozen=True, eq=False)
class NormSpec:
    """Weighted p-norm ``||W x||_p``.

    Parameters
    ----------
    p : float or "inf"
        Exponent in ``[1, inf]``.  ``math.inf`` (or the string ``"inf"``)
        selects the max-norm; it is handled as its own case, never as a
        large finite power.
    weight : {"identity", "diag", "general"}
        Kind of weight matrix.
    W : ndarray, optional
        The weight data: ``eta`` (a vector) for ``"diag"``, ``R`` for
        ``"general"``.

    Use the constructors :meth:`identity`, :meth:`diag` and :meth:`general`
    rather than calling the class directly.
    """

    p: float
    weight: str = "identity"
    data: np.ndarray | None = field(default=None, repr=False)
    n: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "p", _parse_p(self.p))
        if self.weight == "identity":
            if self.data is not None:
                raise ValueError("identity weight takes no data")
        elif self.weight == "diag":
            eta = as_vector(self.data, "eta")
            if np.any(eta <= 0):
                raise ValueError("diagonal weights must be strictly positive")
            eta.setflags(write=False)
            object.__setattr__(self, "data", eta)
            object.__setattr__(self, "n", eta.size)
        elif self.weight == "general":
            R = as_matrix(self.data, "R")
            if np.any(R < 0):
                raise ValueError("general weight must be entrywise nonnegative")
            if np.linalg.cond(R) > COND_LIMIT:
                raise ValueError("general weight is singular or badly conditioned")
            R.setflags(write=False)
            object.__setattr__(self, "data", R)
            object.__setattr__(self, "n", R.shape[0])
        else:
            raise ValueError(f"unknown weight kind {self.weight!r}")

    # constructors
    @classmethod
    def identity(cls, p) -> "NormSpec":
        return cls(p)

    @classmethod
    def diag(cls, p, eta) -> "NormSpec":
        return cls(p, "diag", np.array(eta, dtype=float))

    @classmethod
    def general(cls, p, R) -> "NormSpec":
        return cls(p, "general", np.array(R, dtype=float))

    # properties
    @property
    def is_inf(self) -> bool:
        return math.isinf(self.p)

    @property
    def monotonic(self) -> bool:
        """Identity and positive diagonal weights give monotonic norms."""
        return self.weight in ("identity", "diag")

    def matrix(self, n: int | None = None) -> np.ndarray:
        """Dense weight matrix (``n`` is required for the identity)."""
        if self.weight == "identity":
            if n is None:
                raise ValueError("dimension needed for identity weight")
            return np.eye(n)
        if self.weight == "diag":
            return np.diag(self.data)
        return np.array(self.data)

    def check_dim(self, n: int) -> None:
        if self.n is not None and self.n != n:
            raise DimensionError(f"norm weight has dimension {self.n}, vector has {n}")

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Return ``W x`` (``x`` may be a stack of vectors along axis 0)."""
        x = np.asarray(x, dtype=float)
        self.check_dim(x.shape[-1])
        if self.weight == "identity":
            return x
        if self.weight == "diag":
            return x * self.data
        return x @ self.data.T

    def similarity(self, A: np.ndarray) -> np.ndarray:
        """``W A W^{-1}``."""
        A = as_matrix(A)
        self.check_dim(A.shape[0])
        if self.weight == "identity":
            return A.copy()
        if self.weight == "diag":
            eta = self.data
            return (eta[:, None] * A) / eta[None, :]
        R = self.data
        return R @ A @ np.linalg.inv(R)

    def unweighted(self) -> "NormSpec":
        return NormSpec(self.p)

    # serialization
    def to_dict(self) -> dict[str, Any]:
        p = "inf" if self.is_inf else self.p
        if self.weight == "identity":
            w: Any = "identity"
        elif self.weight == "diag":
            w = {"diag": self.data.tolist()}
        else:
            w = {"general": self.data.tolist()}
        return {"p": p, "weight": w}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "NormSpec":
        p = d["p"]
        w = d.get("weight", "identity")
        if w == "identity" or w is None:
            return cls.identity(p)
        if isinstance(w, dict) and "diag" in w:
            return cls.diag(p, w["diag"])
        if isinstance(w, dict) and "general" in w:
            return cls.general(p, w["general"])
        raise ValueError(f"cannot parse weight {w!r}")

    @classmethod
    def from_json(cls, text: str) -> "NormSpec":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        p = "inf" if self.is_inf else f"{self.p:g}"
        if self.weight == "identity":
            return f"NormSpec(p={p})"
        return f"NormSpec(p={p}, {self.weight}={np.array2string(self.data, precision=4)})"


def lp_norm(z: np.ndarray, p: float, axis: int = -1) -> np.ndarray:
    """Plain l_p norm along ``axis``; overflow-safe for large finite p."""
    a = np.abs(np.asarray(z, dtype=float))
    if math.isinf(p):
        return a.max(axis=axis)
    if p == 1:
        return a.sum(axis=axis)
    if p == 2:
        return np.sqrt((a * a).sum(axis=axis))
    scale = a.max(axis=axis, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    return np.squeeze(safe, axis=axis) * ((a / safe) ** p).sum(axis=axis) ** (1.0 / p)


def weighted_norm(x, ns: NormSpec) -> float:
    """``||W x||_p`` for a single vector."""
    x = as_vector(x)
    return float(lp_norm(ns.apply(x), ns.p))


def weighted_norms(X, ns: NormSpec) -> np.ndarray:
    """Row-wise weighted norms of a stack ``X`` of shape ``(m, n)``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return lp_norm(ns.apply(X), ns.p, axis=-1)


def is_metzler(A, tol: float = 0.0) -> bool:
    """True iff every off-diagonal entry is ``>= -tol``."""
    A = as_matrix(A)
    off = A[~np.eye(A.shape[0], dtype=bool)]
    return bool(np.all(off >= -tol))


def is_nonnegative(A, tol: float = 0.0) -> bool:
    A = np.asarray(A, dtype=float)
    return bool(np.all(A >= -tol))


def conjugate_exponent(p) -> float:
    """``q`` with ``1/p + 1/q = 1`` (``1/inf = 0``)."""
    p = _parse_p(p)
    if math.isinf(p):
        return 1.0
    if p == 1.0:
        return INF
    return p / (p - 1.0)


def parse_matrix_json(text: str) -> np.ndarray:
    return as_matrix(json.loads(text))
