"""Weak pairings for the weighted p-norm family.

For ``W`` the weight matrix of a :class:`NormSpec` the pairing is

* ``1 < p < inf``: ``||y|| * sum_i sign(z_i) |z_i|^(p-1) (Wx)_i`` with
  ``z = Wy / ||Wy||_p``;
* ``p = 1``: ``||Wy||_1 * sign(Wy) . Wx``;
* ``p = inf``: ``max_{i in I(Wy)} (Wy)_i (Wx)_i`` where ``I`` is the set of
  positions where ``|Wy|`` attains its maximum.

``wp(x, 0) == 0`` for every ``p``.  The general formula is 0/0 at ``y = 0``;
zero is the only value compatible with weak homogeneity at ``alpha = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .normcore import NormSpec, as_vector, lp_norm, weighted_norm, weighted_norms
from .reports import CheckReport

TAU = 1e-9


class ZeroVectorError(ValueError):
    pass


@dataclass(frozen=True)
class MaxIndexSet:
    indices: tuple[int, ...]
    tau: float

    def __contains__(self, i):
        return i in self.indices

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)


def max_index_set(x, tau: float = TAU) -> MaxIndexSet:
    """Positions where ``|x_i| >= (1 - tau) * max|x|`` (0-based)."""
    a = np.abs(as_vector(x))
    m = a.max(initial=0.0)
    if m == 0.0:
        raise ZeroVectorError("max index set of the zero vector is undefined")
    idx = np.flatnonzero(a >= (1.0 - tau) * m)
    return MaxIndexSet(tuple(int(i) for i in idx), tau)


def _wp_weighted(zx: np.ndarray, zy: np.ndarray, p: float, tau: float) -> float:
    if math.isinf(p):
        a = np.abs(zy)
        m = a.max(initial=0.0)
        if m == 0.0:
            return 0.0
        idx = a >= (1.0 - tau) * m
        return float(np.max(zy[idx] * zx[idx]))
    ny = float(lp_norm(zy, p))
    if ny == 0.0:
        return 0.0
    if p == 1.0:
        return ny * float(np.sign(zy) @ zx)
    if p == 2.0:
        return float(zy @ zx)
    z = zy / ny
    # sign(z)|z|^(p-1) -> 0 where z == 0 (limit for p > 1)
    return ny * float((np.sign(z) * np.abs(z) ** (p - 1.0)) @ zx)


def wp(x, y, ns: NormSpec, tau: float = TAU) -> float:
    """Weak pairing ``[[x, y]]`` for the norm ``ns``."""
    x = as_vector(x, "x")
    y = as_vector(y, "y")
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    ns.check_dim(x.size)
    return _wp_weighted(ns.apply(x), ns.apply(y), ns.p, tau)


def wp_many(X, Y, ns: NormSpec, tau: float = TAU) -> np.ndarray:
    """Row-wise ``wp(X[k], Y[k])`` for stacks of shape ``(m, n)``."""
    X = np.atleast_2d(np.asarray(X, float))
    Y = np.atleast_2d(np.asarray(Y, float))
    ZX, ZY = ns.apply(X), ns.apply(Y)
    p = ns.p
    if math.isinf(p):
        a = np.abs(ZY)
        m = a.max(axis=1, keepdims=True)
        mask = a >= (1.0 - tau) * m
        prod = np.where(mask, ZY * ZX, -np.inf)
        out = prod.max(axis=1)
        return np.where(m[:, 0] > 0, out, 0.0)
    ny = lp_norm(ZY, p, axis=1)
    if p == 1.0:
        return ny * np.sum(np.sign(ZY) * ZX, axis=1)
    if p == 2.0:
        return np.sum(ZY * ZX, axis=1)
    safe = np.where(ny > 0, ny, 1.0)
    Z = ZY / safe[:, None]
    return ny * np.sum(np.sign(Z) * np.abs(Z) ** (p - 1.0) * ZX, axis=1)


def _default_h_schedule(x, y, ns) -> np.ndarray:
    nx = weighted_norm(x, ns)
    ny = weighted_norm(y, ns)
    scale = ny / nx if nx > 0 else 1.0
    return 1e-2 * scale * 2.0 ** -np.arange(13)


def directional_derivative(x, y, ns: NormSpec, h_schedule=None):
    """Estimate ``lim_{h->0+} (||y + h x|| - ||y||) / h``.

    Forward differences on ``h_schedule`` followed by two rounds of
    Richardson extrapolation (removing the ``h`` and ``h^2`` error terms).
    Returns ``(estimate, spread)`` where ``spread`` is the range of the last
    three extrapolants.
    """
    x = as_vector(x)
    y = as_vector(y)
    h = _default_h_schedule(x, y, ns) if h_schedule is None else np.asarray(h_schedule, float)
    ny = weighted_norm(y, ns)
    D = (weighted_norms(y[None, :] + h[:, None] * x[None, :], ns) - ny) / h
    ratio = h[:-1] / h[1:]
    R = (ratio * D[1:] - D[:-1]) / (ratio - 1.0)
    r2 = ratio[1:] * ratio[:-1]
    R = (r2 * R[1:] - R[:-1]) / (r2 - 1.0)
    tail = R[-3:]
    return float(R[-1]), float(tail.max() - tail.min())


def check_deimling(x, y, ns: NormSpec, h_schedule=None, tol: float = 1e-7,
                   report: CheckReport | None = None) -> CheckReport:
    """Margin ``||y|| * D_x||y|| - wp(x, y)``, which must be ``>= -tol``."""
    y = as_vector(y)
    if not np.any(y):
        raise ZeroVectorError("Deimling check needs y != 0")
    rep = report or CheckReport("deimling", tol=tol)
    est, spread = directional_derivative(x, y, ns, h_schedule)
    ny = weighted_norm(y, ns)
    margin = ny * est - wp(x, y, ns)
    if spread > 1e-5 * max(1.0, abs(est)):
        rep.flags.append(f"nonconvergent extrapolation (spread {spread:.2e})")
    rep.record(margin, {"x": np.asarray(x).tolist(), "y": y.tolist()})
    return rep


def _structure(z: np.ndarray, p: float, tau: float):
    """Local pattern on which the norm is smooth: active max set or signs."""
    if math.isinf(p):
        a = np.abs(z)
        m = a.max(initial=0.0)
        if m == 0.0:
            return ()
        return tuple(np.flatnonzero(a >= (1.0 - tau) * m)) + tuple(np.sign(z[a >= (1.0 - tau) * m]))
    if p == 2.0:
        return ()
    return tuple(np.sign(z))


def stencil_width(t: np.ndarray, k: int, h_rel: float) -> float:
    """Forward-difference width at grid point ``k``: a fraction of the step,
    floored so that rounding in the norm does not swamp the difference."""
    h = max(h_rel * (t[k + 1] - t[k]), 1e-7 * max(1.0, abs(t[k])))
    return min(h, t[-1] - t[k])


def check_curve_norm_derivative(traj, ns: NormSpec, h_rel: float = 1e-4,
                                tol: float = 1e-6, tau: float = TAU) -> CheckReport:
    """Compare ``||x|| D+||x||`` with ``wp(xdot, x)`` along a trajectory.

    ``D+`` is a forward difference on the dense output (with one Richardson
    step) from each accepted grid point.  Points whose finite-difference
    stencil crosses a change of the active index set / sign pattern are
    excluded, since the identity is only claimed almost everywhere.
    """
    rep = CheckReport("curve_norm_derivative", tol=tol)
    t = traj.t
    excluded = []
    residuals = []
    for k in range(len(t) - 1):
        tk = t[k]
        h = stencil_width(t, k, h_rel)
        xk = traj.x[k]
        x_half = traj(tk + 0.5 * h)
        x_full = traj(tk + h)
        s0 = _structure(ns.apply(xk), ns.p, tau)
        if s0 != _structure(ns.apply(x_full), ns.p, tau) or s0 != _structure(ns.apply(x_half), ns.p, tau):
            excluded.append(float(tk))
            continue
        n0 = weighted_norm(xk, ns)
        d_half = (weighted_norm(x_half, ns) - n0) / (0.5 * h)
        d_full = (weighted_norm(x_full, ns) - n0) / h
        dini = 2.0 * d_half - d_full
        r = abs(n0 * dini - wp(traj.dx[k], xk, ns, tau))
        residuals.append(r)
        rep.record(-r, {"t": float(tk)})
    rep.extra["excluded_times"] = excluded
    rep.extra["max_residual"] = max(residuals, default=0.0)
    return rep
