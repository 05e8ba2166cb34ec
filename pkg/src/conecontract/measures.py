"""Matrix measures and conic matrix measures for weighted p-norms.

``mu(A)`` is the one-sided derivative of the induced norm of ``I + hA`` at
``h = 0+``.  ``mu_plus(A)`` restricts the supremum to nonnegative vectors.

Closed forms are used where they are exact; every result carries the
``method`` that produced it and whether the value is exact, an upper bound
or a (sampled) lower bound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import linalg
from .normcore import NormSpec, as_matrix, as_vector, is_metzler, weighted_norms
from .pairings import wp_many

# Test hook: when set to a float, every closed form is shifted by it.  Used
# by the self-test to make sure a corrupted formula is actually caught.
_CLOSED_FORM_MUTATION: float | None = None


@dataclass
class MeasureResult:
    value: float
    method: str
    ns: NormSpec
    bound: str = "exact"  # exact | upper | lower | estimate
    evidence: dict[str, Any] = field(default_factory=dict)

    def __float__(self):
        return float(self.value)

    def to_dict(self):
        return {
            "value": self.value,
            "method": self.method,
            "bound": self.bound,
            "norm": self.ns.to_dict(),
            "evidence": self.evidence,
        }


def _mutated(v: float) -> float:
    return v if _CLOSED_FORM_MUTATION is None else v + _CLOSED_FORM_MUTATION


def _col_measure(B: np.ndarray, off: np.ndarray) -> float:
    return float(np.max(np.diag(B) + off.sum(axis=0)))


def _offdiag(B: np.ndarray) -> np.ndarray:
    O = B.copy()
    np.fill_diagonal(O, 0.0)
    return O


def mu1(B) -> float:
    """Unweighted l1 measure: max column of ``b_jj + sum_{i!=j} |b_ij|``."""
    B = as_matrix(B)
    return _mutated(_col_measure(B, np.abs(_offdiag(B))))


def mu_inf(B) -> float:
    B = as_matrix(B)
    return _mutated(_col_measure(B.T, np.abs(_offdiag(B.T))))


def mu2(B) -> float:
    B = as_matrix(B)
    return _mutated(linalg.lambda_max_sym(0.5 * (B + B.T)))


def mu1_plus(B) -> float:
    """``max_j {b_jj + sum_{i != j} [b_ij]_+}``."""
    B = as_matrix(B)
    return _mutated(_col_measure(B, np.maximum(_offdiag(B), 0.0)))


def mu_inf_plus(B) -> float:
    """``max_i {b_ii + sum_{j != i} [b_ij]_+}``."""
    B = as_matrix(B)
    return _mutated(_col_measure(B.T, np.maximum(_offdiag(B.T), 0.0)))


# ---------------------------------------------------------------- samplers

def _cube_vertices(n: int) -> np.ndarray:
    return np.array(list(itertools.product((0.0, 1.0), repeat=n))[1:])


def cone_samples(n: int, ns: NormSpec, rng: np.random.Generator,
                 n_dirichlet: int = 2000) -> np.ndarray:
    """Nonnegative sample directions (rows), seeded.

    Dirichlet draws on the simplex (a flat and a sparse family), coordinate
    axes, the all-ones vector and, for ``n <= 10``, all 0/1 cube vertices.
    For diagonal weights the structured points are placed in weighted
    coordinates so that cube vertices of ``[eta] x`` are hit exactly.
    """
    half = n_dirichlet // 2
    parts = [
        rng.dirichlet(np.ones(n), size=n_dirichlet - half),
        rng.dirichlet(np.full(n, 0.2), size=half),
    ]
    structured = [np.eye(n), np.ones((1, n))]
    if n <= 10:
        structured.append(_cube_vertices(n))
    S = np.vstack(structured)
    if ns.weight == "diag":
        S = S / ns.data[None, :]
    parts.append(S)
    X = np.vstack(parts)
    return X


def sphere_samples(n: int, ns: NormSpec, rng: np.random.Generator,
                   n_samples: int = 2000) -> np.ndarray:
    parts = [rng.standard_normal((n_samples, n)), np.eye(n)]
    if n <= 8:
        parts.append(np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=n))))
    X = np.vstack(parts)
    X = X[np.any(X != 0, axis=1)]
    if ns.weight == "diag":
        X = X / ns.data[None, :]
    return X


def _hill_climb(obj, X0: np.ndarray, rng: np.random.Generator, iters: int,
                cone: bool) -> tuple[float, np.ndarray]:
    """Greedy coordinate/perturbation search maximizing ``obj`` (vectorized).

    Candidate moves per coordinate: scale by 0, 1e-9, 0.25, 0.5, 0.9, 1.1,
    2, 4, snap to the current max entry, and (off the cone) a sign flip.
    Plus four random multiplicative perturbations of shrinking size.
    """
    best_val, best_x = -math.inf, None
    factors = np.array([0.0, 1e-9, 0.25, 0.5, 0.9, 1.1, 2.0, 4.0])
    for x in X0:
        x = x.copy()
        fx = float(obj(x[None, :])[0])
        sigma = 0.5
        for _ in range(iters):
            n = x.size
            cands = []
            for k in range(n):
                C = np.repeat(x[None, :], factors.size + 2, axis=0)
                C[: factors.size, k] *= factors
                C[factors.size, k] = np.max(np.abs(x)) * (np.sign(x[k]) or 1.0)
                C[factors.size + 1, k] = -x[k] if not cone else x[k] + np.max(np.abs(x))
                cands.append(C)
            P = x[None, :] * np.exp(sigma * rng.standard_normal((4, n)))
            cands.append(P)
            C = np.vstack(cands)
            C = C[np.any(C != 0, axis=1)]
            vals = obj(C)
            j = int(np.argmax(vals))
            if vals[j] > fx + 1e-15 * max(1.0, abs(fx)):
                fx, x = float(vals[j]), C[j]
            else:
                sigma *= 0.5
                if sigma < 1e-6:
                    break
        if fx > best_val:
            best_val, best_x = fx, x
    return best_val, best_x


# ---------------------------------------------------------------- classical

def _limit_quotients(A, ns, X, h):
    """``(||(I + hA) x|| / ||x|| - 1) / h`` for rows of ``X``."""
    nx = weighted_norms(X, ns)
    return (weighted_norms(X + h * (X @ A.T), ns) / nx - 1.0) / h


def _default_schedule(A: np.ndarray) -> np.ndarray:
    h = 1e-2 * 2.0 ** -np.arange(13)
    cutoff = 1e-6 * max(1.0, float(np.abs(A).sum(axis=1).max()))
    h = h[h >= cutoff]
    if h.size < 4:
        h = cutoff * 2.0 ** -np.arange(-3, 1)[::-1]
    return h


def _limit_oracle(A, ns, h_schedule, seed, n_samples, cone: bool,
                  refine_top: int = 5, refine_iters: int = 20) -> MeasureResult:
    A = as_matrix(A)
    n = A.shape[0]
    ns.check_dim(n)
    rng = np.random.default_rng(seed)
    h = _default_schedule(A) if h_schedule is None else np.asarray(h_schedule, float)
    X = cone_samples(n, ns, rng, n_samples) if cone else sphere_samples(n, ns, rng, n_samples)
    D = np.empty(h.size)
    for k, hk in enumerate(h):
        q = _limit_quotients(A, ns, X, hk)
        D[k] = q.max()
        if k >= h.size - 4:
            top = X[np.argsort(q)[-refine_top:]]
            val, _ = _hill_climb(lambda Y: _limit_quotients(A, ns, Y, hk), top, rng,
                                 refine_iters, cone)
            D[k] = max(D[k], val)
    hs, Ds = h[-4:], D[-4:]
    slope, intercept = np.polyfit(hs, Ds, 1)
    diffs = np.diff(D)
    flags = []
    slack = 1e-9 * max(1.0, float(np.max(np.abs(D))))
    if not (np.all(diffs <= slack) or np.all(diffs >= -slack)):
        flags.append("nonmonotone in h")
    return MeasureResult(
        float(intercept), "limit_oracle", ns, "estimate",
        {"h": h.tolist(), "sup_quotients": D.tolist(), "samples": int(X.shape[0]),
         "seed": seed, "flags": flags, "cone": cone},
    )


def matrix_measure(A, ns: NormSpec, seed: int = 0) -> MeasureResult:
    """Matrix measure (logarithmic norm) of ``A`` for the norm ``ns``.

    Exact for ``p in {1, 2, inf}``: ``mu_{p,W}(A) = mu_p(W A W^{-1})``.
    Other exponents fall back to the sampled limit oracle.
    """
    A = as_matrix(A)
    ns.check_dim(A.shape[0])
    B = ns.similarity(A)
    if ns.p == 1.0:
        return MeasureResult(mu1(B), "closed_form", ns)
    if ns.is_inf:
        return MeasureResult(mu_inf(B), "closed_form", ns)
    if ns.p == 2.0:
        return MeasureResult(mu2(B), "closed_form", ns)
    return _limit_oracle(A, ns, None, seed, 2000, cone=False)


# ---------------------------------------------------------------- conic

def conic_measure_wp_sup(A, ns: NormSpec, seed: int = 0, n_dirichlet: int = 2000,
                         refine_top: int = 10, refine_iters: int = 50,
                         extra_points=None) -> MeasureResult:
    """Lower estimate of ``mu_plus`` as ``sup_{x >= 0} wp(Ax, x) / ||x||^2``.

    ``extra_points`` (nonnegative rows) are added to the candidate set, e.g.
    the maximizer found for a related matrix.
    """
    A = as_matrix(A)
    n = A.shape[0]
    ns.check_dim(n)
    rng = np.random.default_rng(seed)
    X = cone_samples(n, ns, rng, n_dirichlet)
    if extra_points is not None:
        E = np.atleast_2d(np.asarray(extra_points, float))
        if np.any(E < 0):
            raise ValueError("extra points must be nonnegative")
        X = np.vstack([X, E[np.any(E > 0, axis=1)]])

    def obj(Y):
        return wp_many(Y @ A.T, Y, ns) / weighted_norms(Y, ns) ** 2

    q = obj(X)
    top = X[np.argsort(q)[-refine_top:]]
    val, xbest = _hill_climb(obj, top, rng, refine_iters, cone=True)
    val = max(val, float(q.max()))
    return MeasureResult(
        val, "wp_sup", ns, "lower",
        {"samples": int(X.shape[0]), "seed": seed, "refine_top": refine_top,
         "refine_iters": refine_iters, "argmax": None if xbest is None else xbest.tolist()},
    )


def conic_measure_limit_oracle(A, ns: NormSpec, h_schedule=None, seed: int = 0,
                               n_samples: int = 2000) -> MeasureResult:
    """Brute-force ``mu_plus`` straight from its definition.

    For each ``h`` in a decreasing schedule the supremum of
    ``(||(I + hA)x|| / ||x|| - 1) / h`` over sampled ``x >= 0`` is taken,
    then a straight line through the last four points is extrapolated to
    ``h = 0``.
    """
    return _limit_oracle(A, ns, h_schedule, seed, n_samples, cone=True)


def conic_measure(A, ns: NormSpec, seed: int = 0) -> MeasureResult:
    """Conic matrix measure with method provenance.

    Dispatch: l1 / l_inf closed forms; diagonal weights by exact similarity;
    general nonnegative weights as the similarity upper bound; Metzler
    matrices under monotonic norms equal the classical measure; otherwise the
    sampled pairing supremum (a lower bound).
    """
    A = as_matrix(A)
    n = A.shape[0]
    ns.check_dim(n)
    if ns.weight == "general":
        inner = conic_measure(ns.similarity(A), ns.unweighted(), seed)
        bound = "upper" if inner.bound in ("exact", "upper") else "estimate"
        return MeasureResult(inner.value, "similarity_upper_bound", ns, bound,
                             {"inner_method": inner.method})
    if ns.weight == "diag":
        inner = conic_measure(ns.similarity(A), ns.unweighted(), seed)
        return MeasureResult(inner.value, inner.method, ns, inner.bound,
                             dict(inner.evidence, similarity="diag"))
    if ns.p == 1.0:
        return MeasureResult(mu1_plus(A), "closed_form", ns)
    if ns.is_inf:
        return MeasureResult(mu_inf_plus(A), "closed_form", ns)
    if is_metzler(A):
        m = matrix_measure(A, ns, seed)
        method = "metzler_equality" if m.method == "closed_form" else m.method
        return MeasureResult(m.value, method, ns, m.bound, m.evidence)
    return conic_measure_wp_sup(A, ns, seed)


@dataclass
class MetzlerWeightedMeasures:
    mu1: float
    mu_inf: float
    mu2: float
    mu2_lmi: float

    def to_dict(self):
        return dict(self.__dict__)


def metzler_weighted_measures(A, eta) -> MetzlerWeightedMeasures:
    """Measures of a Metzler ``A`` under ``eta``-weighted norms.

    * ``mu1``: ``mu_{1,[eta]}(A) = max_j (eta^T A)_j / eta_j``
    * ``mu_inf``: ``mu_{inf,[eta]^{-1}}(A) = max_i (A eta)_i / eta_i``
    * ``mu2``: ``mu_{2,[eta]}(A)``, largest eigenvalue of the symmetric part
      of ``[eta] A [eta]^{-1}``
    * ``mu2_lmi``: smallest ``c`` with ``[eta]A + A^T[eta] <= c[eta]``.
      This equals ``2 * mu_{2,[eta]^{1/2}}(A)``, not ``mu_{2,[eta]}(A)``;
      kept for comparison (see README).
    """
    A = as_matrix(A)
    eta = as_vector(eta, "eta")
    if not is_metzler(A):
        raise ValueError("matrix is not Metzler")
    if np.any(eta <= 0):
        raise ValueError("eta must be strictly positive")
    m1 = float(np.max((eta @ A) / eta))
    minf = float(np.max((A @ eta) / eta))
    B = (eta[:, None] * A) / eta[None, :]
    m2 = linalg.lambda_max_sym(0.5 * (B + B.T))
    s = 1.0 / np.sqrt(eta)
    L = eta[:, None] * A + A.T * eta[None, :]
    m2s = linalg.lambda_max_sym(s[:, None] * L * s[None, :])
    return MetzlerWeightedMeasures(_mutated(m1), _mutated(minf), _mutated(m2), m2s)
