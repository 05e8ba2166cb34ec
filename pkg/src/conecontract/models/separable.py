"""Separable systems ``xdot_i = -alpha_i(x_i) + sum_{j != i} gamma_ij(x_j) + u_i``."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..certify import Box, Certificate, ordered_pairs
from ..measures import conic_measure, matrix_measure
from ..normcore import NormSpec, weighted_norms
from ..odesim import VectorField
from ..pairings import wp_many
from .catalog import CatalogError, InputSignal, ScalarFn

FLAVORS = ("monotone", "positive")


@dataclass(frozen=True)
class SeparableSystem:
    """``alphas[i]`` dissipations, ``interactions[i][j]`` couplings (``None`` = absent).

    Monotone flavor requires class-K couplings; positive flavor only asks
    for nonnegative couplings vanishing at 0.  ``u`` is an optional
    nonnegative input (callable or :class:`InputSignal`).
    """

    alphas: tuple[ScalarFn, ...]
    interactions: tuple[tuple[ScalarFn | None, ...], ...]
    flavor: str = "monotone"
    u: Callable[[float], np.ndarray] | None = None
    name: str = "separable"

    def __post_init__(self):
        n = len(self.alphas)
        object.__setattr__(self, "alphas", tuple(self.alphas))
        object.__setattr__(self, "interactions", tuple(tuple(r) for r in self.interactions))
        if len(self.interactions) != n or any(len(r) != n for r in self.interactions):
            raise ValueError("interactions must be an n x n table")
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}")
        for i in range(n):
            if self.interactions[i][i] is not None:
                raise ValueError("diagonal interactions are not allowed (fold them into alpha_i)")
            for j in range(n):
                g = self.interactions[i][j]
                if g is None:
                    continue
                if self.flavor == "monotone" and g.kind != "zero" and not g.has_class("K"):
                    raise CatalogError(
                        f"coupling ({i},{j}) of kind {g.kind} is not class K; "
                        "only the positive flavor accepts it")
                if self.flavor == "positive" and not g.has_class("nonneg"):
                    raise CatalogError(f"coupling ({i},{j}) must be nonnegative and vanish at 0")
        if self.u is not None:
            for t in np.linspace(0.0, 20.0, 50):
                if np.any(np.asarray(self.u(t)) < -1e-12):
                    raise ValueError("input u(t) must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.alphas)

    def dissipation(self, x) -> np.ndarray:
        return np.array([a(xi) for a, xi in zip(self.alphas, x)], dtype=float)

    def coupling(self, x) -> np.ndarray:
        n = self.n
        out = np.zeros(n)
        for i in range(n):
            for j in range(n):
                g = self.interactions[i][j]
                if g is not None:
                    out[i] += float(g(x[j]))
        return out

    def rhs(self, t, x) -> np.ndarray:
        f = -self.dissipation(x) + self.coupling(x)
        if self.u is not None:
            f = f + np.asarray(self.u(t), float)
        return f

    def vector_field(self) -> VectorField:
        return VectorField(self.n, self.rhs, lambda t, x: separable_structure_matrix(self, x),
                           name=self.name)


def separable_structure_matrix(sys: SeparableSystem, x, return_flags: bool = False):
    """``-alpha_i'(x_i)`` on the diagonal and ``gamma_ij'(x_j)`` off it.

    At a knot of a piecewise-linear entry the right derivative is used and
    the entry is reported in the flags.
    """
    x = np.asarray(x, float)
    n = sys.n
    M = np.zeros((n, n))
    flags = []
    for i in range(n):
        a = sys.alphas[i]
        M[i, i] = -float(a.derivative(x[i]))
        if a.at_knot(x[i]):
            flags.append(f"alpha_{i + 1} one-sided at {x[i]:g}")
        for j in range(n):
            g = sys.interactions[i][j]
            if g is None:
                continue
            M[i, j] = float(g.derivative(x[j]))
            if g.at_knot(x[j]):
                flags.append(f"gamma_{i + 1}{j + 1} one-sided at {x[j]:g}")
    return (M, flags) if return_flags else M


def separable_contraction(sys: SeparableSystem, ns: NormSpec, c: float, domain: Box | None = None,
                          n_samples: int = 1000, seed: int = 0, tol: float = 1e-7,
                          n_matrix_samples: int = 300) -> Certificate:
    """Incremental pairing condition for the flavor of ``sys`` at rate ``c``.

    Monotone: ``-[[A(y)-A(x), x-y]] >= [[G(x)-G(y), x-y]] + c||x-y||^2``
    for ``x >= y >= 0``.  Positive: ``-[[-A(x), x]] >= [[P(x), x]] + c||x||^2``
    for ``x >= 0``.  The matrix condition (measure of the structure matrix
    ``<= -c``, classical measure for monotone, conic for positive) is swept
    as well and cross-reported under ``evidence['matrix_condition']``.
    """
    n = sys.n
    domain = domain or Box.unit(n)
    if np.any(domain.lo < 0):
        raise ValueError("separable certificates are stated on the nonnegative orthant")
    rng = np.random.default_rng(seed)
    if sys.flavor == "monotone":
        X, Y = ordered_pairs(domain, rng, n_samples, ns)
        cid = "separable_monotone_incremental"
    else:
        X = np.vstack([domain.uniform(rng, n_samples), np.eye(n) * domain.hi, domain.hi[None, :]])
        Y = np.zeros_like(X)
        cid = "separable_positive_incremental"
    D = X - Y
    dA = np.array([sys.dissipation(x) - sys.dissipation(y) for x, y in zip(X, Y)])
    dG = np.array([sys.coupling(x) - sys.coupling(y) for x, y in zip(X, Y)])
    lhs = -wp_many(-dA, D, ns)
    rhs = wp_many(dG, D, ns)
    sq = weighted_norms(D, ns) ** 2
    cert = Certificate(cid, -float(c), ns, domain, tol=tol, seed=seed)
    cert.evidence["c"] = float(c)
    for x, y, l, r, s in zip(X, Y, lhs, rhs, sq):
        if s > 0:
            cert.record(l - r - c * s, s, {"x": x.tolist(), "y": y.tolist()})

    # matrix form
    measure = matrix_measure if sys.flavor == "monotone" else conic_measure
    pts = np.vstack([domain.lattice(), domain.uniform(rng, n_matrix_samples)])
    worst = -np.inf
    argmax = None
    flags = []
    for x in pts:
        M, fl = separable_structure_matrix(sys, x, return_flags=True)
        flags.extend(fl)
        m = measure(M, ns, seed).value
        if m > worst:
            worst, argmax = m, x
    matrix_pass = worst <= -c + 1e-9
    cert.evidence["matrix_condition"] = {
        "condition_id": "separable_monotone_jacobian" if sys.flavor == "monotone"
        else "separable_positive_jacobian",
        "sup_measure": float(worst), "argmax": argmax.tolist(), "passed": bool(matrix_pass),
        "flags": sorted(set(flags))[:20],
    }
    cert.evidence["implication_consistent"] = bool(cert.passed or not matrix_pass)
    return cert
