"""Excitatory Hopfield networks ``xdot = -Lambda x + T g(x) + I(t)``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..certify import (Box, Certificate, check_one_sided_lipschitz,
                       check_trajectory_contraction)
from ..normcore import NormSpec, as_matrix, as_vector, conjugate_exponent, weighted_norms
from ..odesim import VectorField, flow
from ..reports import CheckReport, to_jsonable
from .catalog import InputSignal, ScalarFn
from .perron import PerronPair, perron_eigpair


class NoCertificateError(RuntimeError):
    """The Perron value of ``-Lambda + T G`` is not negative."""


@dataclass(frozen=True)
class HopfieldNetwork:
    lam: np.ndarray
    T: np.ndarray
    activations: tuple[ScalarFn, ...]
    inp: InputSignal | None = None

    def __post_init__(self):
        lam = as_vector(self.lam, "Lambda")
        T = as_matrix(self.T, "T")
        n = lam.size
        if T.shape != (n, n) or len(self.activations) != n:
            raise ValueError("Lambda, T and activations must agree in dimension")
        if np.any(lam <= 0):
            raise ValueError("Lambda must have positive diagonal")
        if np.any(T < 0):
            raise ValueError("T must be nonnegative (excitatory network)")
        for a in self.activations:
            if abs(float(a(0.0))) > 1e-12:
                raise ValueError("activations must vanish at 0")
            g = np.linspace(-10, 10, 401)
            if np.any(np.diff(a(g)) < -1e-12):
                raise ValueError("activations must be nondecreasing")
        if self.inp is not None and not self.inp.check_nonnegative():
            raise ValueError("input I(t) must be nonnegative")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "activations", tuple(self.activations))

    @property
    def n(self) -> int:
        return self.lam.size

    @property
    def sector(self) -> np.ndarray:
        """Slope bounds taken analytically from the catalog entries."""
        return np.array([a.sector_bound for a in self.activations])

    def comparison_matrix(self) -> np.ndarray:
        G = self.sector
        if not np.all(np.isfinite(G)):
            raise ValueError("an activation has no finite sector bound")
        return -np.diag(self.lam) + self.T * G[None, :]

    def g(self, x) -> np.ndarray:
        return np.array([a(xi) for a, xi in zip(self.activations, x)], dtype=float)

    def input(self, t) -> np.ndarray:
        return np.zeros(self.n) if self.inp is None else np.asarray(self.inp(t), float)

    def rhs(self, t, x) -> np.ndarray:
        return -self.lam * x + self.T @ self.g(x) + self.input(t)

    def jacobian(self, t, x) -> np.ndarray:
        d = np.array([float(a.derivative(xi)) for a, xi in zip(self.activations, x)])
        return -np.diag(self.lam) + self.T * d[None, :]

    def vector_field(self, inp: InputSignal | None = None) -> VectorField:
        net = self if inp is None else HopfieldNetwork(self.lam, self.T, self.activations, inp)
        return VectorField(self.n, net.rhs, net.jacobian, name="hopfield")

    def with_input(self, inp: InputSignal | None) -> "HopfieldNetwork":
        return HopfieldNetwork(self.lam, self.T, self.activations, inp)


def hopfield_weights(v, w, p) -> np.ndarray:
    """``eta_i = v_i^(1/p) / w_i^(1/q)`` with ``1/p + 1/q = 1``."""
    v = as_vector(v, "v")
    w = as_vector(w, "w")
    if np.any(v <= 0) or np.any(w <= 0):
        raise ValueError("Perron vectors must be positive")
    q = conjugate_exponent(p)
    ip = 0.0 if math.isinf(p) else 1.0 / p
    iq = 0.0 if math.isinf(q) else 1.0 / q
    return v ** ip / w ** iq


@dataclass
class HopfieldCertificate:
    c: float
    eta: np.ndarray
    perron: PerronPair
    ns: NormSpec
    checks: dict[str, Certificate] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def to_dict(self):
        return to_jsonable({
            "c": self.c, "eta": self.eta, "perron_value": self.perron.value,
            "v": self.perron.left, "w": self.perron.right, "norm": self.ns.to_dict(),
            "verdict": "certified-at-samples" if self.passed else "refuted",
            "checks": {k: v.to_dict() for k, v in self.checks.items()},
        })


def hopfield_certificate(net: HopfieldNetwork, p, horizon: float = 10.0, n_pairs: int = 5,
                         n_samples: int = 1000, box: float = 2.0, seed: int = 0,
                         run_checks: bool = True) -> HopfieldCertificate:
    """Rate ``c = -lambda`` and weights from the Perron pair of ``-Lambda + T G``.

    Runs a one-sided Lipschitz check over all pairs of ``[-box, box]^n`` and
    a trajectory-contraction check at ``b = -c``.
    """
    pp = perron_eigpair(net.comparison_matrix())
    if pp.value >= 0:
        raise NoCertificateError(
            f"no contraction certificate at this sector bound (Perron value {pp.value:.6g} >= 0)")
    c = -pp.value
    eta = hopfield_weights(pp.left, pp.right, p)
    eta = eta / eta.max()  # the rate does not depend on the scale of eta
    ns = NormSpec.diag(p, eta)
    cert = HopfieldCertificate(c, eta, pp, ns)
    if run_checks:
        vf = net.vector_field()
        rng = np.random.default_rng(seed)
        dom = Box(-box * np.ones(net.n), box * np.ones(net.n))
        cert.checks["one_sided_lipschitz"] = check_one_sided_lipschitz(
            vf, ns, -c, dom, ordered_only=False, n_pairs=n_samples, seed=seed)
        pairs = [(rng.uniform(-box, box, net.n), rng.uniform(-box, box, net.n)) for _ in range(n_pairs)]
        cert.checks["trajectory_contraction"] = check_trajectory_contraction(
            vf, ns, -c, pairs, horizon)
    return cert


@dataclass
class HopfieldEquilibrium:
    x: np.ndarray
    residual: float
    newton_iterations: int
    lyapunov: CheckReport

    def to_dict(self):
        return to_jsonable({"x": self.x, "residual": self.residual,
                            "newton_iterations": self.newton_iterations,
                            "lyapunov": self.lyapunov.to_dict()})


def _fd_jacobian(F, x, h=1e-7):
    n = x.size
    J = np.empty((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h * (1 + abs(x[i]))
        J[:, i] = (F(x + e) - F(x - e)) / (2 * e[i])
    return J


def hopfield_equilibrium(net: HopfieldNetwork, i_star, p=2, x0s: Sequence | None = None,
                         horizon: float | None = None, damping: float = 0.5, max_newton: int = 50,
                         step_tol: float = 1e-7, seed: int = 0) -> HopfieldEquilibrium:
    """Equilibrium for constant input ``i_star`` and Lyapunov-trace checks.

    Simulates from 0 up to ``t = 50 / c``, polishes with damped Newton
    (finite-difference Jacobian) and then checks that ``||x(t) - x*||`` and
    ``||F(x(t))||`` in the certified norm do not increase along trajectories
    from ``x0s`` (per step, tolerance ``step_tol``) over ``horizon``
    (default ``50 / c``).
    """
    hc = hopfield_certificate(net, p, run_checks=False)
    if horizon is None:
        horizon = 50.0 / hc.c
    fixed = net.with_input(InputSignal.constant(as_vector(i_star, "I*")))
    F = lambda x: fixed.rhs(0.0, x)  # noqa: E731
    vf = fixed.vector_field()
    x = flow(vf, 0.0, np.zeros(net.n), 50.0 / hc.c).final
    it = 0
    for it in range(1, max_newton + 1):
        r = F(x)
        if np.max(np.abs(r)) <= 1e-14:
            break
        x = x - damping * np.linalg.solve(_fd_jacobian(F, x), r)
    residual = float(np.max(np.abs(F(x))))
    rep = CheckReport("lyapunov_nonincreasing", tol=step_tol)
    rng = np.random.default_rng(seed)
    if x0s is None:
        x0s = [x + rng.uniform(-1, 1, net.n) for _ in range(2)]
    dist_final = []
    for x0 in x0s:
        tr = flow(vf, 0.0, as_vector(x0), horizon, rtol=1e-10, atol=1e-12)
        d = weighted_norms(tr.x - x, hc.ns)
        fv = weighted_norms(tr.dx, hc.ns)
        for k in range(1, len(tr)):
            rep.record(d[k - 1] - d[k], {"trace": "distance", "t": float(tr.t[k])})
            rep.record(fv[k - 1] - fv[k], {"trace": "vector_field", "t": float(tr.t[k])})
        dist_final.append(float(d[-1]))
    rep.extra["final_distances"] = dist_final
    return HopfieldEquilibrium(x, residual, it, rep)
