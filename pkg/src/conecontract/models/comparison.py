"""Comparison systems for interconnections and their ISS envelopes.

Two modes:

* gains mode: ``vdot_i = -alpha_i(v_i) + sum_j gamma_ij(v_j) + gamma_iu(u_i)``
  with class-K gains and class-K_inf dissipations;
* general mode: ``vdot = g(v) + gamma_u(u)`` with only ``g(0) = 0``
  (couplings may be inhibitory).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog, minimize

from ..certify import Box, Certificate, average_jacobian, ordered_pairs
from ..measures import conic_measure
from ..normcore import NormSpec, as_vector, lp_norm, weighted_norms
from ..odesim import VectorField
from ..pairings import wp_many
from ..reports import CheckReport, to_jsonable
from .catalog import CatalogError, ScalarFn


class MissingCertificateError(RuntimeError):
    pass


@dataclass(frozen=True)
class ComparisonSpec:
    """Storage bounds ``alpha_lower_i(|x|_i) <= V_i(x) <= alpha_upper_i(|x|_i)``,
    dissipations ``alphas``, gains ``gains[i][j]`` and input gains."""

    n: int
    alphas: tuple[ScalarFn, ...] | None = None
    gains: tuple[tuple[ScalarFn | None, ...], ...] | None = None
    input_gains: tuple[ScalarFn, ...] | None = None
    alpha_lower: tuple[ScalarFn, ...] | None = None
    alpha_upper: tuple[ScalarFn, ...] | None = None
    g: Callable[[np.ndarray], np.ndarray] | None = None
    g_jacobian: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        n = self.n
        if self.g is None:
            if self.alphas is None or self.gains is None:
                raise ValueError("gains mode needs alphas and gains")
            for a in self.alphas:
                a.validate_class("K_inf")
            for i, row in enumerate(self.gains):
                for j, gm in enumerate(row):
                    if gm is None:
                        continue
                    if i == j:
                        raise ValueError("self gains belong in alpha_i")
                    if gm.kind != "zero":
                        gm.validate_class("K")
        else:
            if np.max(np.abs(self.g(np.zeros(n)))) > 1e-10:
                raise ValueError("general mode needs g(0) = 0")
        for seq in (self.input_gains, self.alpha_lower, self.alpha_upper):
            if seq is not None:
                if len(seq) != n:
                    raise ValueError("per-subsystem lists must have length n")
                for a in seq:
                    if a.kind != "zero":
                        a.validate_class("K")

    @property
    def mode(self) -> str:
        return "gains" if self.g is None else "general"

    def dissipation(self, v) -> np.ndarray:
        return np.array([a(x) for a, x in zip(self.alphas, v)], dtype=float)

    def coupling(self, v) -> np.ndarray:
        out = np.zeros(self.n)
        for i, row in enumerate(self.gains):
            for j, gm in enumerate(row):
                if gm is not None:
                    out[i] += float(gm(v[j]))
        return out

    def field(self, v) -> np.ndarray:
        """Input-free comparison vector field."""
        v = np.asarray(v, float)
        if self.g is not None:
            return np.asarray(self.g(v), float)
        return -self.dissipation(v) + self.coupling(v)

    def input_gain(self, u) -> np.ndarray:
        u = np.abs(np.asarray(u, float))
        if self.input_gains is None:
            return u
        return np.array([gm(x) for gm, x in zip(self.input_gains, u)], dtype=float)

    def lower_inverse(self, i: int, y):
        if self.alpha_lower is None:
            return np.asarray(y, float)
        return self.alpha_lower[i].inverse(y)

    def vector_field(self) -> VectorField:
        jac = None
        if self.g_jacobian is not None:
            jac = lambda t, v: np.asarray(self.g_jacobian(v), float)  # noqa: E731
        return VectorField(self.n, lambda t, v: self.field(v), jac, name="comparison")


def matrosov_certify(spec: ComparisonSpec, ns: NormSpec, c: float, domain: Box | None = None,
                     n_samples: int = 1000, seed: int = 0, tol: float = 1e-7) -> Certificate:
    """Ordered-pair check of the small-gain pairing inequality at rate ``c``:
    ``-[[A(w)-A(v), v-w]] >= [[G(v)-G(w), v-w]] + c||v-w||^2`` for ``v >= w >= 0``.

    A pass certifies (at samples) that the comparison system contracts at
    rate ``c``; the certificate stores ``b = -c``.
    """
    if spec.mode != "gains":
        raise ValueError("matrosov_certify needs a gains-mode specification")
    n = spec.n
    domain = domain or Box.unit(n)
    rng = np.random.default_rng(seed)
    V, W = ordered_pairs(domain, rng, n_samples, ns)
    D = V - W
    dA = np.array([spec.dissipation(v) - spec.dissipation(w) for v, w in zip(V, W)])
    dG = np.array([spec.coupling(v) - spec.coupling(w) for v, w in zip(V, W)])
    lhs = -wp_many(-dA, D, ns)
    rhs = wp_many(dG, D, ns)
    sq = weighted_norms(D, ns) ** 2
    cert = Certificate("comparison_small_gain", -float(c), ns, domain, tol=tol, seed=seed)
    cert.evidence["c"] = float(c)
    for v, w, l, r, s in zip(V, W, lhs, rhs, sq):
        if s > 0:
            cert.record(l - r - c * s, s, {"v": v.tolist(), "w": w.tolist()})
    return cert


def small_gain_linear(spec: ComparisonSpec, eta, c: float, domain: Box | None = None,
                      n_samples: int = 1000, seed: int = 0, tol: float = 1e-7) -> Certificate:
    """Weighted-sum small-gain check for ``v >= w >= 0``:
    ``eta^T (A(v) - A(w)) >= eta^T (G(v) - G(w)) + c eta^T (v - w)``.

    With ``D = v - w > 0`` this is the pairing condition of
    :func:`matrosov_certify` for ``NormSpec.diag(1, eta)`` divided by
    ``||D||``.  Where some ``D_i = 0`` the pairing drops coordinate ``i``
    while this form keeps it, so this check is the stricter of the two.
    """
    if spec.mode != "gains":
        raise ValueError("small_gain_linear needs a gains-mode specification")
    eta = as_vector(eta, "eta")
    if eta.size != spec.n or np.any(eta <= 0):
        raise ValueError("eta must be a positive vector of length n")
    ns = NormSpec.diag(1, eta)
    domain = domain or Box.unit(spec.n)
    rng = np.random.default_rng(seed)
    V, W = ordered_pairs(domain, rng, n_samples, ns)
    cert = Certificate("comparison_small_gain_linear", -float(c), ns, domain, tol=tol, seed=seed)
    cert.evidence["c"] = float(c)
    for v, w in zip(V, W):
        d = float(eta @ (v - w))
        if d <= 0:
            continue
        lhs = eta @ (spec.dissipation(v) - spec.dissipation(w))
        rhs = eta @ (spec.coupling(v) - spec.coupling(w)) + c * d
        cert.record(float(lhs - rhs), d, {"v": v.tolist(), "w": w.tolist()})
    return cert


def coordinate_constants(ns: NormSpec, n: int) -> np.ndarray:
    """Smallest ``L_i`` with ``V_i <= L_i ||V||`` for ``V >= 0``.

    Identity: 1.  Diagonal weights: ``1 / eta_i``.  General ``R``:
    ``max V_i`` subject to ``||R V||_p <= 1, V >= 0`` (a convex program,
    solved as a linear program for ``p`` in {1, inf}).
    """
    if ns.weight == "identity":
        return np.ones(n)
    if ns.weight == "diag":
        return 1.0 / ns.data
    R = ns.matrix(n)
    p = ns.p
    L = np.empty(n)
    for i in range(n):
        c = np.zeros(n)
        c[i] = -1.0
        if p == 1.0:
            # R V >= 0 for V >= 0, so ||RV||_1 = 1^T R V
            res = linprog(c, A_ub=np.ones((1, n)) @ R, b_ub=[1.0], bounds=[(0, None)] * n,
                          method="highs")
            L[i] = -res.fun
        elif math.isinf(p):
            res = linprog(c, A_ub=R, b_ub=np.ones(n), bounds=[(0, None)] * n, method="highs")
            L[i] = -res.fun
        else:
            cons = {"type": "ineq", "fun": lambda V: 1.0 - float(lp_norm(R @ V, p))}
            x0 = np.full(n, 1.0 / float(lp_norm(R @ np.ones(n), p)))
            res = minimize(lambda V: -V[i], x0, constraints=[cons], bounds=[(0, None)] * n,
                           method="SLSQP")
            L[i] = -res.fun * (1 + 1e-9)
    return L


@dataclass
class IssEnvelope:
    t: np.ndarray
    envelope: np.ndarray
    v_bound: np.ndarray
    L: np.ndarray
    report: CheckReport

    @property
    def passed(self) -> bool:
        return self.report.passed

    def to_dict(self):
        return to_jsonable({"t": self.t, "envelope": self.envelope, "v_bound": self.v_bound,
                            "L": self.L, "report": self.report.to_dict()})


def iss_envelope(spec: ComparisonSpec, ns: NormSpec, c: float, t, V, gamma_u, x_norms=None,
                 L=None, certificate: Certificate | None = None,
                 rel_tol: float = 1e-5, require_certificate: bool = True) -> IssEnvelope:
    """Evaluate the ISS envelope on a time grid and check it against traces.

    ``V`` (m x n) are storage values along a simulation, ``gamma_u`` (m x n)
    the input gains ``gamma_iu(u_i(t))`` and ``x_norms`` (m x n) the
    subsystem state norms.  Envelope:
    ``alpha_lower_i^{-1}(L_i (e^{-ct}||V(0)|| + (1-e^{-ct})/c max_{s<=t}||gamma(u(s))||))``.
    The intermediate bound on ``||V(t)||`` is checked too.
    """
    if require_certificate:
        if certificate is None or not certificate.passed:
            raise MissingCertificateError("a passing contraction certificate for rate c is required")
        cert_c = certificate.evidence.get("c", -certificate.b)
        if cert_c + 1e-12 < c:
            raise MissingCertificateError(f"certificate covers rate {cert_c}, not {c}")
    t = np.asarray(t, float)
    V = np.atleast_2d(np.asarray(V, float))
    n = spec.n
    gu = np.zeros_like(V) if gamma_u is None else np.atleast_2d(np.asarray(gamma_u, float))
    if L is None:
        L = coordinate_constants(ns, n)
    L = as_vector(L)
    s = t - t[0]
    decay = np.exp(-c * s)
    gmax = np.maximum.accumulate(weighted_norms(gu, ns))
    v0 = float(weighted_norms(V[:1], ns)[0])
    v_bound = decay * v0 + (1 - decay) / c * gmax
    env = np.column_stack([spec.lower_inverse(i, L[i] * v_bound) for i in range(n)])
    rep = CheckReport("iss_envelope", tol=0.0)
    vn = weighted_norms(V, ns)
    for k in range(t.size):
        rep.record(v_bound[k] * (1 + rel_tol) + 1e-12 - vn[k], {"t": float(t[k]), "bound": "storage"})
    if x_norms is not None:
        X = np.atleast_2d(np.asarray(x_norms, float))
        for k in range(t.size):
            m = env[k] * (1 + rel_tol) + 1e-12 - X[k]
            i = int(np.argmin(m))
            rep.record(float(m[i]), {"t": float(t[k]), "bound": "state", "subsystem": i})
    return IssEnvelope(t, env, v_bound, L, rep)


def interconnection_certify(spec: ComparisonSpec, ns: NormSpec, c: float, domain: Box | None = None,
                            n_samples: int = 1000, n_jacobian_samples: int = 200, seed: int = 0,
                            tol: float = 1e-7) -> Certificate:
    """``[[g(x), x]] <= -c ||x||^2`` on sampled ``x >= 0`` (general mode).

    When ``g`` is differentiable the average-Jacobian condition
    ``mu_plus(int_0^1 Dg(tau x) dtau) <= -c`` is evaluated too; it implies
    the pairing condition, so a pass there with a failure here is flagged.
    """
    if spec.mode != "general":
        raise ValueError("interconnection_certify needs a general-mode specification")
    n = spec.n
    if np.max(np.abs(spec.g(np.zeros(n)))) > 1e-10:
        raise ValueError("g(0) must vanish")
    domain = domain or Box.unit(n)
    rng = np.random.default_rng(seed)
    X = np.vstack([domain.uniform(rng, n_samples), np.eye(n) * domain.hi, domain.hi[None, :],
                   rng.dirichlet(np.full(n, 0.3), n_samples // 4) * domain.hi])
    G = np.array([spec.field(x) for x in X])
    lhs = wp_many(G, X, ns)
    sq = weighted_norms(X, ns) ** 2
    cert = Certificate("interconnection_pairing", -float(c), ns, domain, tol=tol, seed=seed)
    cert.evidence["c"] = float(c)
    for x, l, s in zip(X, lhs, sq):
        if s > 0:
            cert.record(-c * s - l, s, {"x": x.tolist(), "pairing": float(l)})
    vf = spec.vector_field()
    pts = np.vstack([domain.lattice(), domain.uniform(rng, n_jacobian_samples)])
    worst, arg = -np.inf, None
    for x in pts:
        m = conic_measure(average_jacobian(vf, 0.0, x), ns, seed).value
        if m > worst:
            worst, arg = m, x
    jac_pass = worst <= -c + 1e-9
    cert.evidence["average_jacobian"] = {"condition_id": "interconnection_average_jacobian",
                                         "sup_conic_measure": float(worst), "argmax": arg.tolist(),
                                         "passed": bool(jac_pass)}
    cert.evidence["implication_consistent"] = bool(cert.passed or not jac_pass)
    return cert
