"""Sampling/simulation checks of contraction conditions, producing certificates.

Nothing here is a formal proof.  A passing certificate says the inequality
held at every sampled point (verdict ``"certified-at-samples"``); a failing
one carries a concrete witness that reproduces the violation.

Condition identifiers
---------------------
Monotone systems (all equivalent for monotonic norms):

* ``jacobian_conic_measure``       mu_plus(Df(t,x)) <= b on the domain
* ``ordered_one_sided_lipschitz``  [[f(x)-f(y), x-y]] <= b||x-y||^2, x >= y
* ``dini_contraction``             D+ of the distance of two flows <= b * distance
* ``trajectory_contraction``       distance(t) <= M e^{b(t-s)} distance(s)
* ``l1_eta_monotone`` / ``linf_eta_monotone``: the diagonal l1 / l_inf forms

Positive systems with equilibrium at the origin:

* ``equilibrium_one_sided``        [[f(x), x]] <= b||x||^2 for x >= 0
* ``equilibrium_trajectory``       ||phi(t)|| <= e^{b(t-s)}||phi(s)||
* ``factored_conic_measure``       mu_plus(A(t,x)) <= b, f = A(t,x) x
* ``l1_eta_positive`` / ``linf_eta_positive``

General vector fields: ``one_sided_lipschitz`` (all pairs).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.optimize import linprog, minimize

from .measures import conic_measure, conic_measure_wp_sup
from .normcore import NormSpec, as_vector, is_metzler, weighted_norm, weighted_norms, lp_norm
from .odesim import HypothesisViolation, Trajectory, VectorField, flow, flow_pair
from .pairings import TAU, _structure, stencil_width, wp, wp_many
from .reports import to_jsonable

CERTIFIED = "certified-at-samples"
REFUTED = "refuted"


@dataclass(frozen=True)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = as_vector(self.lo, "lo")
        hi = as_vector(self.hi, "hi")
        if lo.shape != hi.shape or np.any(lo > hi):
            raise ValueError("box needs lo <= hi of equal dimension")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def unit(cls, n: int, scale: float = 1.0) -> "Box":
        return cls(np.zeros(n), np.full(n, float(scale)))

    @property
    def n(self) -> int:
        return self.lo.size

    def uniform(self, rng, m: int) -> np.ndarray:
        return self.lo + rng.uniform(size=(m, self.n)) * (self.hi - self.lo)

    def lattice(self, levels: int = 3, max_points: int = 729) -> np.ndarray:
        """Tensor grid (corners always included); thinned when too large."""
        n = self.n
        if levels ** n > max_points:
            levels = 2
        axes = [np.linspace(l, h, levels) for l, h in zip(self.lo, self.hi)]
        if levels ** n > max_points:
            pts = np.array([self.lo, self.hi, 0.5 * (self.lo + self.hi)])
            return pts
        return np.array(list(itertools.product(*axes)))

    def to_dict(self):
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass
class Certificate:
    condition_id: str
    b: float
    ns: NormSpec | None
    domain: Box | None = None
    n_samples: int = 0
    worst_margin: float = math.inf
    tol: float = 0.0
    witness: dict[str, Any] | None = None
    seed: int | None = None
    evidence: dict[str, Any] = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return CERTIFIED if self.witness is None else REFUTED

    @property
    def passed(self) -> bool:
        return self.witness is None

    def record(self, margin: float, scale: float, witness: dict[str, Any]) -> None:
        """Register one sample: violation iff ``margin < -tol * scale``."""
        self.n_samples += 1
        rel = margin / scale if scale > 0 else margin
        if rel < self.worst_margin:
            self.worst_margin = float(rel)
            if rel < -self.tol:
                self.witness = dict(witness, margin=float(margin), scale=float(scale))

    def to_dict(self) -> dict[str, Any]:
        d = {
            "condition_id": self.condition_id,
            "b": self.b,
            "norm": None if self.ns is None else self.ns.to_dict(),
            "domain": None if self.domain is None else self.domain.to_dict(),
            "n_samples": self.n_samples,
            "worst_margin": self.worst_margin,
            "tol": self.tol,
            "verdict": self.verdict,
            "seed": self.seed,
        }
        if self.witness is not None:
            d["witness"] = self.witness
        if self.evidence:
            d["evidence"] = self.evidence
        return to_jsonable(d)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _times(rng, t_window, m):
    lo, hi = t_window
    return np.full(m, lo) if hi <= lo else rng.uniform(lo, hi, m)


# ---------------------------------------------------------------- Jacobian

def certify_jacobian_conic(vf: VectorField, domain: Box, ns: NormSpec, b: float | None = None,
                           t_window=(0.0, 10.0), n_random: int = 500, seed: int = 0,
                           assert_monotone: bool = True, tol: float = 1e-9) -> Certificate:
    """Sup of ``mu_plus(Df)`` over a lattice plus random points of the domain.

    With ``b=None`` the sampled supremum ``b_hat`` is returned as the rate.
    A non-Metzler Jacobian refutes when the caller asserted monotonicity.
    """
    rng = np.random.default_rng(seed)
    X = np.vstack([domain.lattice(), domain.uniform(rng, n_random)])
    T = _times(rng, t_window, X.shape[0])
    T[: domain.lattice().shape[0]] = t_window[0]
    mus = np.empty(X.shape[0])
    non_metzler = None
    methods = set()
    for k, (t, x) in enumerate(zip(T, X)):
        J = vf.jac(t, x)
        if assert_monotone and non_metzler is None and not is_metzler(J, 1e-8):
            non_metzler = {"t": float(t), "x": x.tolist(), "jacobian": J.tolist()}
        r = conic_measure(J, ns, seed)
        methods.add(r.method)
        mus[k] = r.value
    k = int(np.argmax(mus))
    b_hat = float(mus[k])
    cert = Certificate("jacobian_conic_measure", b_hat if b is None else float(b), ns, domain,
                       tol=tol, seed=seed)
    for j, (t, x) in enumerate(zip(T, X)):
        cert.record(cert.b - mus[j], 1.0, {"t": float(t), "x": x.tolist(), "mu_plus": float(mus[j])})
    cert.evidence.update({"b_hat": b_hat, "argmax": {"t": float(T[k]), "x": X[k].tolist()},
                          "methods": sorted(methods)})
    if non_metzler is not None:
        cert.witness = dict(non_metzler, reason="non-Metzler Jacobian")
        cert.worst_margin = -math.inf
    return cert


# ---------------------------------------------------------------- pair samplers

def _extra_directions(vf: VectorField, ns: NormSpec, domain: Box, t: float, seed: int):
    """Maximizing cone directions of the pairing quotient at a few Jacobians."""
    dirs = []
    for x in (domain.lo, 0.5 * (domain.lo + domain.hi)):
        try:
            J = vf.jac(t, x)
        except Exception:  # noqa: BLE001 - jacobian may be unavailable
            continue
        r = conic_measure_wp_sup(J, ns, seed, n_dirichlet=400, refine_top=3, refine_iters=30)
        if r.evidence.get("argmax") is not None:
            d = np.abs(np.asarray(r.evidence["argmax"]))
            if d.max() > 0:
                dirs.append(d / d.max())
    return dirs


def ordered_pairs(domain: Box, rng, m: int, ns: NormSpec | None = None,
                  directions: Sequence[np.ndarray] = ()) -> tuple[np.ndarray, np.ndarray]:
    """Pairs ``x >= y`` inside the box.

    ``y`` uniform, ``x = y + d`` with ``d`` a Dirichlet draw, a coordinate
    axis (optionally plus a tiny all-ones part), the all-ones/eta ray or a
    supplied direction; ``d`` is scaled log-uniformly and clipped so that
    ``x`` stays inside the box.
    """
    n = domain.n
    width = domain.hi - domain.lo
    D = [rng.dirichlet(np.ones(n), size=m // 2), rng.dirichlet(np.full(n, 0.2), size=m // 4)]
    structured = [np.eye(n), np.eye(n) + 1e-6, np.ones((1, n))]
    if ns is not None and ns.weight == "diag":
        structured += [ns.data[None, :], (1.0 / ns.data)[None, :]]
    structured += [np.asarray(d)[None, :] for d in directions]
    S = np.vstack(structured)
    reps = max(1, (m - sum(len(a) for a in D)) // len(S))
    D.append(np.repeat(S, reps, axis=0))
    Dmat = np.vstack(D)
    k = Dmat.shape[0]
    Y = domain.lo + rng.uniform(size=(k, n)) * width
    # structured directions: half start from the lower corner
    Y[-len(S) * reps:: 2] = domain.lo
    Dmat = Dmat / np.max(Dmat, axis=1, keepdims=True)
    scale = np.exp(rng.uniform(np.log(1e-3), 0.0, k))[:, None] * width.max()
    Dmat = Dmat * scale
    room = np.where(Dmat > 0, (domain.hi - Y) / np.where(Dmat > 0, Dmat, 1.0), np.inf)
    s = np.minimum(1.0, room.min(axis=1))[:, None]
    Dmat = Dmat * s
    keep = np.any(Dmat > 0, axis=1)
    return Y[keep] + Dmat[keep], Y[keep]


def check_one_sided_lipschitz(vf: VectorField, ns: NormSpec, b: float, domain: Box,
                              ordered_only: bool = True, n_pairs: int = 1000,
                              t_window=(0.0, 10.0), seed: int = 0, tol: float = 1e-7,
                              directions: Sequence[np.ndarray] | None = None) -> Certificate:
    """``b ||x-y||^2 - [[f(x)-f(y), x-y]] >= -tol ||x-y||^2`` on sampled pairs."""
    rng = np.random.default_rng(seed)
    if ordered_only:
        if directions is None:
            directions = _extra_directions(vf, ns, domain, t_window[0], seed)
        X, Y = ordered_pairs(domain, rng, n_pairs, ns, directions)
        cid = "ordered_one_sided_lipschitz"
    else:
        X, Y = domain.uniform(rng, n_pairs), domain.uniform(rng, n_pairs)
        cid = "one_sided_lipschitz"
    T = _times(rng, t_window, X.shape[0])
    F = np.array([vf.f(t, x) - vf.f(t, y) for t, x, y in zip(T, X, Y)])
    lhs = wp_many(F, X - Y, ns)
    sq = weighted_norms(X - Y, ns) ** 2
    cert = Certificate(cid, float(b), ns, domain, tol=tol, seed=seed)
    for t, x, y, l, s in zip(T, X, Y, lhs, sq):
        if s == 0:
            continue
        cert.record(b * s - l, s, {"t": float(t), "x": x.tolist(), "y": y.tolist(),
                                   "pairing": float(l), "dist_sq": float(s)})
    return cert


# ---------------------------------------------------------------- trajectories

def norm_equivalence_constant(ns: NormSpec, n: int) -> float:
    """``M = (M2 / M1)^2`` with ``M1 ||v|| <= ||v||_inf <= M2 ||v||``.

    Monotonic norms return 1.  For diagonal weights ``M1 = 1 / ||eta||_p``
    and ``M2 = 1 / min eta``.  For a general weight ``R``,
    ``1/M1 = max_{||v||_inf = 1} ||Rv||_p`` is attained at a cube vertex and
    ``1/M2 = min_{||v||_inf = 1} ||Rv||_p`` is a convex program per face
    (linear program for ``p`` in {1, inf}).
    """
    if ns.monotonic:
        return 1.0
    R = ns.matrix(n)
    V = np.array(list(itertools.product((-1.0, 1.0), repeat=n)))
    inv_m1 = float(lp_norm(V @ R.T, ns.p, axis=1).max())
    best = math.inf
    for i in range(n):
        for sgn in (-1.0, 1.0):
            best = min(best, _face_min(R, ns.p, i, sgn))
    return float((inv_m1 / best) ** 2)


def _face_min(R, p, i, sgn):
    n = R.shape[0]
    bounds = [(-1.0, 1.0)] * n
    bounds[i] = (sgn, sgn)
    if p == 1.0 or math.isinf(p):
        # variables v (n) and t (n for p=1, 1 for p=inf)
        m = n if p == 1.0 else 1
        c = np.concatenate([np.zeros(n), np.ones(m)])
        T = np.eye(n) if p == 1.0 else np.ones((n, 1))
        A_ub = np.block([[R, -T], [-R, -T]])
        res = linprog(c, A_ub=A_ub, b_ub=np.zeros(2 * n), bounds=bounds + [(0, None)] * m,
                      method="highs")
        return float(lp_norm(R @ res.x[:n], p))
    v0 = np.zeros(n)
    v0[i] = sgn
    res = minimize(lambda v: float(lp_norm(R @ v, p)) ** p, v0, bounds=bounds, method="L-BFGS-B")
    return float(lp_norm(R @ res.x, p))


def _pair_traces(vf, x0, y0, t0, t1, kw):
    a, b_ = flow_pair(vf, x0, y0, t0, t1, **kw)
    return a, b_


def check_trajectory_contraction(vf: VectorField, ns: NormSpec, b: float,
                                 pairs: Iterable[tuple[Sequence[float], Sequence[float]]],
                                 horizon: float, M: float | None = None, t0: float = 0.0,
                                 tol: float = 1e-5, domain: Box | None = None,
                                 floor: float = 1e-6, **kw) -> Certificate:
    """``d(t) <= M e^{b(t-s)} d(s) (1 + tol)`` for every pair of grid times.

    ``d`` is the ``ns``-distance between the two flows on their common
    adaptive grid.  Checked through the running minimum of
    ``log d(s) - b s``.  Times where ``d`` has fallen below ``floor * d(t0)``
    are skipped (integration noise).  For a non-monotonic norm ``M`` is
    computed from norm equivalence and the pairs must lie in ``domain``.
    """
    kw.setdefault("rtol", 1e-10)
    kw.setdefault("atol", 1e-12)
    pairs = [(as_vector(x), as_vector(y)) for x, y in pairs]
    n = vf.n
    if M is None:
        if not ns.monotonic:
            if domain is None:
                raise HypothesisViolation("non-monotonic norm: a box domain is required")
            for x, y in pairs:
                for z in (x, y):
                    if np.any(z < domain.lo - 1e-12) or np.any(z > domain.hi + 1e-12):
                        raise HypothesisViolation("initial condition outside the box domain")
        M = norm_equivalence_constant(ns, n)
    cid = "trajectory_contraction"
    cert = Certificate(cid, float(b), ns, domain, tol=0.0)
    cert.evidence["M"] = M
    logM = math.log(M) + math.log1p(tol)
    rates = []
    for x0, y0 in pairs:
        a, c = _pair_traces(vf, x0, y0, t0, t0 + horizon, kw)
        d = weighted_norms(a.x - c.x, ns)
        if d[0] == 0:
            continue
        ok = d > floor * d[0]
        t = a.t[ok]
        g = np.log(d[ok]) - b * t
        run_min = np.minimum.accumulate(g)
        arg = np.zeros(g.size, dtype=int)
        for j in range(1, g.size):
            arg[j] = j if g[j] <= g[arg[j - 1]] else arg[j - 1]
        excess = g - run_min
        for j in range(g.size):
            cert.record(logM - excess[j], 1.0,
                        {"x0": x0.tolist(), "y0": y0.tolist(), "s": float(t[arg[j]]),
                         "t": float(t[j])})
        if t.size > 1:
            rates.append(-(math.log(d[ok][-1]) - math.log(d[0])) / (t[-1] - t[0]))
    cert.evidence["measured_rates"] = rates
    return cert


def check_dini_contraction(vf: VectorField, ns: NormSpec, b: float,
                           pairs: Iterable[tuple[Sequence[float], Sequence[float]]],
                           horizon: float, t0: float = 0.0, h_rel: float = 1e-4,
                           tol: float = 1e-6, **kw) -> Certificate:
    """Forward-difference ``D+ d(t) <= b d(t) + tol (d(t) + 1e-9)`` at grid points.

    Grid points whose difference stencil crosses a change of the active
    index set / sign pattern of the difference are skipped.
    """
    kw.setdefault("rtol", 1e-10)
    kw.setdefault("atol", 1e-12)
    cert = Certificate("dini_contraction", float(b), ns, tol=tol)
    skipped = 0
    for x0, y0 in pairs:
        x0, y0 = as_vector(x0), as_vector(y0)
        a, c = _pair_traces(vf, x0, y0, t0, t0 + horizon, kw)
        for k in range(len(a) - 1):
            tk = a.t[k]
            h = stencil_width(a.t, k, h_rel)
            z0 = a.x[k] - c.x[k]
            zh = a(tk + 0.5 * h) - c(tk + 0.5 * h)
            zf = a(tk + h) - c(tk + h)
            s0 = _structure(ns.apply(z0), ns.p, TAU)
            if s0 != _structure(ns.apply(zh), ns.p, TAU) or s0 != _structure(ns.apply(zf), ns.p, TAU):
                skipped += 1
                continue
            d0 = weighted_norm(z0, ns)
            if d0 == 0:
                continue
            dini = 2 * (weighted_norm(zh, ns) - d0) / (0.5 * h) - (weighted_norm(zf, ns) - d0) / h
            cert.record(b * d0 - dini, d0 + 1e-9,
                        {"x0": x0.tolist(), "y0": y0.tolist(), "t": float(tk), "dini": float(dini),
                         "distance": float(d0)})
    cert.evidence["skipped_switch_points"] = skipped
    return cert


# ---------------------------------------------------------------- diagonal forms

def check_l1_eta(vf: VectorField, eta, b: float, monotone: bool = True, domain: Box | None = None,
                 n_samples: int = 1000, t_window=(0.0, 10.0), seed: int = 0,
                 tol: float = 1e-7) -> Certificate:
    """``eta.(f(x)-f(y)) <= b eta.(x-y)`` for ``x >= y`` (monotone mode) or
    ``eta.f(x) <= b eta.x`` for ``x >= 0`` (positive mode)."""
    eta = as_vector(eta, "eta")
    rng = np.random.default_rng(seed)
    domain = domain or Box.unit(eta.size)
    ns = NormSpec.diag(1, eta)
    if monotone:
        X, Y = ordered_pairs(domain, rng, n_samples, ns)
        cid = "l1_eta_monotone"
    else:
        X = np.vstack([domain.uniform(rng, n_samples), np.eye(eta.size) * domain.hi])
        Y = np.zeros_like(X)
        cid = "l1_eta_positive"
    T = _times(rng, t_window, X.shape[0])
    cert = Certificate(cid, float(b), ns, domain, tol=tol, seed=seed)
    for t, x, y in zip(T, X, Y):
        df = vf.f(t, x) - (vf.f(t, y) if monotone else 0.0)
        s = float(eta @ (x - y))
        if s <= 0:
            continue
        cert.record(b * s - float(eta @ df), s, {"t": float(t), "x": x.tolist(), "y": y.tolist()})
    return cert


def check_linf_eta(vf: VectorField, eta, b: float, monotone: bool = True, domain: Box | None = None,
                   n_samples: int = 1000, t_window=(0.0, 10.0), seed: int = 0,
                   tol: float = 1e-7, tau: float = TAU) -> Certificate:
    """Monotone mode: ``f(y + c eta) - f(y) <= b c eta`` componentwise, ``c > 0``
    (norm ``||x||_{inf,[eta]^{-1}}``).  Positive mode: ``f_i(x) <= b x_i`` for
    ``i`` in the max set of ``[eta] x``, ``x >= 0`` (norm ``||x||_{inf,[eta]}``)."""
    eta = as_vector(eta, "eta")
    n = eta.size
    rng = np.random.default_rng(seed)
    domain = domain or Box.unit(n)
    if monotone:
        ns = NormSpec.diag(np.inf, 1.0 / eta)
        cert = Certificate("linf_eta_monotone", float(b), ns, domain, tol=tol, seed=seed)
        Y = np.vstack([domain.uniform(rng, n_samples), domain.lo[None, :]])
        room = np.min((domain.hi - Y) / eta, axis=1)
        C = np.exp(rng.uniform(np.log(1e-3), 0.0, Y.shape[0])) * room
        T = _times(rng, t_window, Y.shape[0])
        for t, y, c in zip(T, Y, C):
            if c <= 0:
                continue
            x = y + c * eta
            r = b * c * eta - (vf.f(t, x) - vf.f(t, y))
            j = int(np.argmin(r / eta))
            cert.record(float(r[j] / eta[j]), c, {"t": float(t), "y": y.tolist(), "c": float(c),
                                                  "component": j})
        return cert
    ns = NormSpec.diag(np.inf, eta)
    cert = Certificate("linf_eta_positive", float(b), ns, domain, tol=tol, seed=seed)
    # the ray where every component of [eta] x is maximal at once
    ray = np.min(domain.hi * eta) / eta
    X = np.vstack([domain.uniform(rng, n_samples), np.eye(n) * domain.hi, ray[None, :]])
    T = _times(rng, t_window, X.shape[0])
    for t, x in zip(T, X):
        z = eta * x
        m = z.max()
        if m <= 0:
            continue
        fx = vf.f(t, x)
        idx = np.flatnonzero(np.abs(z) >= (1 - tau) * m)
        r = (b * x - fx)[idx]
        j = int(np.argmin(r))
        cert.record(float(r[j]), float(x[idx[j]]), {"t": float(t), "x": x.tolist(),
                                                     "component": int(idx[j])})
    return cert


# ---------------------------------------------------------------- positive systems

def check_equilibrium_trajectory(vf: VectorField, ns: NormSpec, b: float, x0s, horizon: float,
                                 t0: float = 0.0, tol: float = 1e-5, floor: float = 1e-6,
                                 **kw) -> Certificate:
    """``||phi(t)|| <= e^{b(t-s)} ||phi(s)|| (1 + tol)`` from nonnegative starts."""
    kw.setdefault("rtol", 1e-10)
    kw.setdefault("atol", 1e-12)
    cert = Certificate("equilibrium_trajectory", float(b), ns, tol=0.0)
    lt = math.log1p(tol)
    for x0 in x0s:
        x0 = as_vector(x0)
        if np.any(x0 < 0):
            raise HypothesisViolation("initial states must be nonnegative")
        tr = flow(vf, t0, x0, t0 + horizon, **kw)
        d = tr.norm_trace(ns)
        if d[0] == 0:
            continue
        ok = d > floor * d[0]
        g = np.log(d[ok]) - b * tr.t[ok]
        excess = g - np.minimum.accumulate(g)
        for j, e in enumerate(excess):
            cert.record(lt - e, 1.0, {"x0": x0.tolist(), "t": float(tr.t[ok][j])})
    return cert


def check_equilibrium_contraction(vf: VectorField, ns: NormSpec, b: float, domain: Box | None = None,
                                  n_samples: int = 1000, t_window=(0.0, 10.0), seed: int = 0,
                                  tol: float = 1e-7, horizon: float = 5.0, n_traj: int = 5,
                                  companion: bool = True) -> Certificate:
    """``b||x||^2 - [[f(t,x), x]] >= -tol ||x||^2`` for sampled ``x >= 0``.

    The equilibrium must sit at the origin (shift coordinates first).  The
    companion trajectory check is stored under ``evidence['trajectory']``
    and also decides the verdict.
    """
    n = vf.n
    domain = domain or Box.unit(n)
    rng = np.random.default_rng(seed)
    for t in np.linspace(*t_window, 5):
        if np.max(np.abs(vf.f(t, np.zeros(n)))) > 1e-10:
            raise HypothesisViolation("f(t, 0) != 0; shift the equilibrium to the origin")
    X = np.vstack([domain.uniform(rng, n_samples), np.eye(n) * domain.hi, domain.hi[None, :],
                   rng.dirichlet(np.full(n, 0.3), n_samples // 4) * domain.hi])
    T = _times(rng, t_window, X.shape[0])
    F = np.array([vf.f(t, x) for t, x in zip(T, X)])
    lhs = wp_many(F, X, ns)
    sq = weighted_norms(X, ns) ** 2
    cert = Certificate("equilibrium_one_sided", float(b), ns, domain, tol=tol, seed=seed)
    for t, x, l, s in zip(T, X, lhs, sq):
        if s > 0:
            cert.record(b * s - l, s, {"t": float(t), "x": x.tolist(), "pairing": float(l)})
    if companion:
        x0s = domain.uniform(rng, n_traj)
        tc = check_equilibrium_trajectory(vf, ns, b, x0s, horizon, t0=t_window[0])
        cert.evidence["trajectory"] = tc.to_dict()
        if not tc.passed and cert.witness is None:
            cert.witness = dict(tc.witness, source="trajectory")
    return cert


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_GL_TAU = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


def average_jacobian(vf: VectorField, t: float, x, x_star=None) -> np.ndarray:
    """``int_0^1 Df(t, tau x + (1 - tau) x*) dtau`` by 16-point Gauss-Legendre."""
    x = as_vector(x)
    xs = np.zeros_like(x) if x_star is None else as_vector(x_star)
    J = np.zeros((x.size, x.size))
    for tau, w in zip(_GL_TAU, _GL_W):
        J += w * vf.jac(t, tau * x + (1 - tau) * xs)
    return J


def check_factored_conic(vf: VectorField, ns: NormSpec, b: float, domain: Box | None = None,
                         n_samples: int = 300, t_window=(0.0, 10.0), seed: int = 0,
                         tol: float = 1e-9, residual_tol: float = 1e-8) -> Certificate:
    """``mu_plus(A(t,x)) <= b`` with ``f(t,x) = A(t,x) x`` on sampled ``x >= 0``.

    Uses ``vf.factor`` when present, else the average Jacobian about 0.
    """
    n = vf.n
    domain = domain or Box.unit(n)
    rng = np.random.default_rng(seed)
    X = np.vstack([domain.lattice(), domain.uniform(rng, n_samples)])
    T = _times(rng, t_window, X.shape[0])
    if vf.factor is not None:
        factor = lambda t, x: np.asarray(vf.factor(t, x), float)  # noqa: E731
        source = "supplied"
    else:
        factor = lambda t, x: average_jacobian(vf, t, x)  # noqa: E731
        source = "average_jacobian"
    cert = Certificate("factored_conic_measure", float(b), ns, domain, tol=tol, seed=seed)
    worst_res = 0.0
    for t, x in zip(T, X):
        A = factor(t, x)
        res = float(np.max(np.abs(vf.f(t, x) - A @ x), initial=0.0))
        worst_res = max(worst_res, res / (1.0 + np.max(np.abs(x))))
        if res > residual_tol * (1.0 + np.max(np.abs(x))) * (1e3 if source != "supplied" else 1.0):
            raise ValueError(f"factorization residual {res:.2e} too large at x={x}")
        mu = conic_measure(A, ns, seed).value
        cert.record(b - mu, 1.0, {"t": float(t), "x": x.tolist(), "mu_plus": float(mu)})
    cert.evidence.update({"factorization": source, "max_residual": worst_res})
    return cert


# ---------------------------------------------------------------- witnesses

def recheck_witness(cert: Certificate, vf: VectorField) -> float:
    """Recompute the (scaled) margin at a certificate's witness.

    A genuine violation returns a value ``< -cert.tol``.
    """
    w = cert.witness
    if w is None:
        raise ValueError("certificate has no witness")
    ns, b = cert.ns, cert.b
    cid = cert.condition_id
    if cid in ("ordered_one_sided_lipschitz", "one_sided_lipschitz"):
        x, y, t = np.array(w["x"]), np.array(w["y"]), w["t"]
        s = weighted_norm(x - y, ns) ** 2
        return (b * s - wp(vf.f(t, x) - vf.f(t, y), x - y, ns)) / s
    if cid == "jacobian_conic_measure":
        if "reason" in w:
            return -math.inf if not is_metzler(np.array(w["jacobian"]), 1e-8) else 0.0
        return b - conic_measure(vf.jac(w["t"], np.array(w["x"])), ns).value
    if cid == "factored_conic_measure":
        x = np.array(w["x"])
        A = np.asarray(vf.factor(w["t"], x)) if vf.factor is not None else average_jacobian(vf, w["t"], x)
        return b - conic_measure(A, ns).value
    if cid == "equilibrium_one_sided" and "pairing" in w:
        x = np.array(w["x"])
        s = weighted_norm(x, ns) ** 2
        return (b * s - wp(vf.f(w["t"], x), x, ns)) / s
    if cid == "trajectory_contraction":
        x0, y0 = np.array(w["x0"]), np.array(w["y0"])
        a, c = flow_pair(vf, x0, y0, 0.0, w["t"], rtol=1e-11, atol=1e-13)
        ds = weighted_norm(a(w["s"]) - c(w["s"]), ns)
        dt = weighted_norm(a.x[-1] - c.x[-1], ns)
        M = cert.evidence.get("M", 1.0)
        return math.log(M) - (math.log(dt) - math.log(ds) - b * (w["t"] - w["s"]))
    if cid == "l1_eta_monotone" or cid == "l1_eta_positive":
        eta = ns.data
        x, y = np.array(w["x"]), np.array(w["y"])
        df = vf.f(w["t"], x) - (vf.f(w["t"], y) if cid == "l1_eta_monotone" else 0.0)
        s = float(eta @ (x - y))
        return (b * s - float(eta @ df)) / s
    if cid == "linf_eta_monotone":
        eta = 1.0 / ns.data
        y, c = np.array(w["y"]), w["c"]
        r = b * c * eta - (vf.f(w["t"], y + c * eta) - vf.f(w["t"], y))
        return float(np.min(r / eta)) / c
    if cid == "linf_eta_positive":
        x = np.array(w["x"])
        j = w["component"]
        return float(b * x[j] - vf.f(w["t"], x)[j]) / x[j]
    raise NotImplementedError(f"no witness recheck for {cid}")
