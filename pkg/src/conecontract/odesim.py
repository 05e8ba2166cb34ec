"""Adaptive Dormand-Prince integration and simulation-based structural checks."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .measures import conic_measure
from .normcore import NormSpec, as_vector, is_metzler, weighted_norm, weighted_norms
from .reports import CheckReport

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


class IntegrationError(RuntimeError):
    """Step size underflow; ``trajectory`` holds everything up to the failure."""

    def __init__(self, msg, trajectory=None):
        super().__init__(msg)
        self.trajectory = trajectory


class HypothesisViolation(ValueError):
    """Raised when a check is asked to run outside its stated hypotheses."""


@dataclass
class VectorField:
    """Time-varying vector field ``xdot = f(t, x)``.

    ``jacobian`` falls back to central differences with step
    ``1e-6 * (1 + |x_i|)``.  ``factor`` is an optional map ``A(t, x)`` with
    ``f(t, x) = A(t, x) x``.  ``box`` is an optional declared forward
    invariant box ``(x_min, x_max)``.
    """

    n: int
    rhs: Callable[[float, np.ndarray], np.ndarray]
    jacobian: Callable[[float, np.ndarray], np.ndarray] | None = None
    factor: Callable[[float, np.ndarray], np.ndarray] | None = None
    box: tuple[np.ndarray, np.ndarray] | None = None
    name: str = ""

    def f(self, t, x) -> np.ndarray:
        return np.asarray(self.rhs(t, np.asarray(x, float)), dtype=float)

    def jac(self, t, x) -> np.ndarray:
        x = np.asarray(x, float)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(t, x), dtype=float)
        J = np.empty((self.n, self.n))
        for i in range(self.n):
            h = 1e-6 * (1.0 + abs(x[i]))
            e = np.zeros(self.n)
            e[i] = h
            J[:, i] = (self.f(t, x + e) - self.f(t, x - e)) / (2 * h)
        return J

    def factor_residual(self, t, x) -> float:
        """``||f(t,x) - A(t,x) x||_inf / (1 + ||x||_inf)``."""
        if self.factor is None:
            raise ValueError("vector field has no conic factorization")
        x = np.asarray(x, float)
        r = self.f(t, x) - np.asarray(self.factor(t, x)) @ x
        return float(np.max(np.abs(r), initial=0.0) / (1.0 + np.max(np.abs(x), initial=0.0)))

    @classmethod
    def linear(cls, A, name: str = "linear") -> "VectorField":
        A = np.array(A, dtype=float)
        return cls(A.shape[0], lambda t, x: A @ x, lambda t, x: A,
                   lambda t, x: A, name=name)

    @classmethod
    def linear_tv(cls, Afun: Callable[[float], np.ndarray], n: int,
                  name: str = "ltv") -> "VectorField":
        return cls(n, lambda t, x: np.asarray(Afun(t)) @ x, lambda t, x: np.asarray(Afun(t)),
                   lambda t, x: np.asarray(Afun(t)), name=name)

    def stacked(self) -> "VectorField":
        """The pair system ``(x, y) -> (f(t,x), f(t,y))`` on R^{2n}."""
        n = self.n

        def rhs(t, z):
            return np.concatenate([self.f(t, z[:n]), self.f(t, z[n:])])

        return VectorField(2 * n, rhs, name=f"{self.name}x2")


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    dx: np.ndarray
    stats: dict = field(default_factory=dict)

    def __len__(self):
        return self.t.size

    @property
    def final(self) -> np.ndarray:
        return self.x[-1]

    def __call__(self, s: float) -> np.ndarray:
        """Cubic Hermite dense output at time ``s``."""
        t = self.t
        if s <= t[0]:
            return self.x[0].copy()
        if s >= t[-1]:
            return self.x[-1].copy()
        k = int(np.searchsorted(t, s, side="right")) - 1
        h = t[k + 1] - t[k]
        th = (s - t[k]) / h
        h10 = th * (1 - th) ** 2
        h01 = th * th * (3 - 2 * th)
        h11 = th * th * (th - 1)
        # h00 = 1 - h01; written this way a constant segment is reproduced exactly
        return (self.x[k] + h01 * (self.x[k + 1] - self.x[k])
                + h * (h10 * self.dx[k] + h11 * self.dx[k + 1]))

    def sample(self, times: Sequence[float]) -> np.ndarray:
        return np.array([self(s) for s in times])

    def norm_trace(self, ns: NormSpec) -> np.ndarray:
        return weighted_norms(self.x, ns)

    def to_csv(self, ns: NormSpec | None = None, extra: dict[str, np.ndarray] | None = None) -> str:
        """CSV with header ``t,x1..xn[,norm][,extra...]``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        n = self.x.shape[1]
        header = ["t"] + [f"x{i + 1}" for i in range(n)]
        cols = []
        if ns is not None:
            header.append("norm")
            cols.append(self.norm_trace(ns))
        for k, v in (extra or {}).items():
            header.append(k)
            cols.append(np.asarray(v))
        w.writerow(header)
        for j in range(self.t.size):
            row = [repr(float(self.t[j]))] + [repr(float(v)) for v in self.x[j]]
            row += [repr(float(c[j])) for c in cols]
            w.writerow(row)
        return buf.getvalue()


def _err_norm(err, y0, y1, atol, rtol):
    sc = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / sc) ** 2))) if err.size else 0.0


def flow(vf: VectorField, t0: float, x0, t1: float, rtol: float = 1e-8,
         atol: float = 1e-9, h0: float | None = None, hmax: float = math.inf,
         max_steps: int = 1_000_000) -> Trajectory:
    """Integrate ``vf`` from ``(t0, x0)`` to ``t1`` with Dormand-Prince 5(4).

    PI step-size control; the returned trajectory stores every accepted step
    together with ``f`` at that step for cubic Hermite dense output.
    """
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    x = as_vector(x0, "x0").copy()
    if x.size != vf.n:
        raise ValueError(f"x0 has dimension {x.size}, field has {vf.n}")
    t = float(t0)
    k1 = vf.f(t, x)
    ts, xs, dxs = [t], [x.copy()], [k1.copy()]
    if t1 == t0:
        return Trajectory(np.array(ts), np.array(xs), np.array(dxs), {"steps": 0, "rejected": 0})
    span = t1 - t0
    if h0 is None:
        d0 = np.linalg.norm(x / (atol + rtol * np.abs(x)))
        d1 = np.linalg.norm(k1 / (atol + rtol * np.abs(x)))
        h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
        h = min(h, span, hmax)
    else:
        h = min(h0, span, hmax)
    safety, beta = 0.9, 0.04
    alpha = 0.2 - 0.75 * beta
    err_prev = 1e-4
    rejected = 0
    steps = 0
    K = np.empty((7, x.size))
    while t < t1:
        if steps >= max_steps:
            raise IntegrationError("maximum number of steps exceeded",
                                   Trajectory(np.array(ts), np.array(xs), np.array(dxs)))
        h = min(h, t1 - t, hmax)
        if h < 1e-14 * max(1.0, abs(t)):
            raise IntegrationError(f"step size underflow at t={t:.6g}",
                                   Trajectory(np.array(ts), np.array(xs), np.array(dxs)))
        K[0] = k1
        # overflow in a trial step is caught below as a rejected step
        with np.errstate(over="ignore", invalid="ignore"):
            for s in range(1, 7):
                xi = x + h * (np.asarray(_A[s]) @ K[:s])
                K[s] = vf.f(t + _C[s] * h, xi)
            x_new = x + h * (_B5 @ K)
            err = _err_norm(h * (_E @ K), x, x_new, atol, rtol)
        if not np.all(np.isfinite(x_new)):
            err = math.inf
        if err <= 1.0:
            t_new = t1 if (t1 - (t + h)) <= 1e-14 * max(1.0, abs(t1)) else t + h
            t, x, k1 = t_new, x_new, K[6].copy()
            ts.append(t)
            xs.append(x.copy())
            dxs.append(k1.copy())
            steps += 1
            err = max(err, 1e-10)
            fac = safety * err ** -alpha * err_prev ** beta
            h *= min(5.0, max(0.2, fac))
            err_prev = err
        else:
            rejected += 1
            fac = safety * err ** -0.2 if np.isfinite(err) else 0.1
            h *= max(0.1, fac)
    return Trajectory(np.array(ts), np.array(xs), np.array(dxs),
                      {"steps": steps, "rejected": rejected, "rtol": rtol, "atol": atol})


def flow_pair(vf: VectorField, x0, y0, t0: float, t1: float, **kw):
    """Integrate two initial conditions on one common adaptive grid."""
    n = vf.n
    tr = flow(vf.stacked(), t0, np.concatenate([as_vector(x0), as_vector(y0)]), t1, **kw)
    a = Trajectory(tr.t, tr.x[:, :n], tr.dx[:, :n], tr.stats)
    b = Trajectory(tr.t, tr.x[:, n:], tr.dx[:, n:], tr.stats)
    return a, b


def check_order_preservation(vf: VectorField, x0, y0, horizon: float, t0: float = 0.0,
                             tol: float = 1e-7, **kw) -> CheckReport:
    """Simulate ``x0 <= y0`` and report ``min_t min_i (y_i(t) - x_i(t))``."""
    x0 = as_vector(x0)
    y0 = as_vector(y0)
    if np.any(x0 > y0):
        raise ValueError("need x0 <= y0 entrywise")
    a, b = flow_pair(vf, x0, y0, t0, t0 + horizon, **kw)
    gaps = (b.x - a.x).min(axis=1)
    rep = CheckReport("order_preservation", tol=tol)
    k = int(np.argmin(gaps))
    for j, g in enumerate(gaps):
        rep.record(g, {"t": float(a.t[j])} if j == k else None)
    rep.extra["argmin_t"] = float(a.t[k])
    return rep


def check_positivity(vf: VectorField, box=None, per_face: int = 100, t_window=(0.0, 5.0),
                     n_sim: int = 5, horizon: float = 5.0, seed: int = 0,
                     tol: float = 1e-9) -> CheckReport:
    """Subtangentiality on the faces ``x_i = 0`` plus simulated positivity.

    Points are drawn on each face of ``[0, x_max]`` (default ``[0, 1]^n``);
    ``f_i(t, x) >= -tol`` must hold there.  ``n_sim`` trajectories from
    random nonnegative initial states report their smallest entry.
    """
    rng = np.random.default_rng(seed)
    n = vf.n
    if box is None:
        box = vf.box
    hi = np.ones(n) if box is None else np.asarray(box[1], float)
    if n > 10:
        per_face = max(10, int(per_face * 10 / n))
    rep = CheckReport("positivity", tol=tol)
    for i in range(n):
        X = rng.uniform(0.0, 1.0, (per_face, n)) * hi
        X[:, i] = 0.0
        T = rng.uniform(*t_window, per_face)
        for x, t in zip(X, T):
            fi = vf.f(t, x)[i]
            rep.record(fi, {"t": float(t), "x": x.tolist(), "face": i})
    min_entry = math.inf
    for _ in range(n_sim):
        x0 = rng.uniform(0.0, 1.0, n) * hi
        tr = flow(vf, t_window[0], x0, t_window[0] + horizon)
        min_entry = min(min_entry, float(tr.x.min()))
    rep.extra["min_simulated_entry"] = min_entry
    if n_sim and min_entry < -1e-7:
        rep.record(min_entry, {"simulated": True})
    return rep


def coppel_check(Afun: Callable[[float], np.ndarray], x0, ns: NormSpec, horizon: float,
                 rel_tol: float = 1e-6, substeps: int = 4, n_metzler_samples: int = 200,
                 seed: int = 0, **kw) -> CheckReport:
    """Check ``||x(t)|| <= exp(int_0^t mu_plus(A)) ||x(0)||`` for ``xdot = A(t) x``.

    Requires ``A(t)`` Metzler (sampled) and ``x0 >= 0``.  The integral uses
    the trapezoid rule on the adaptive grid, each step split in
    ``substeps`` equal pieces.
    """
    x0 = as_vector(x0)
    if np.any(x0 < 0):
        raise HypothesisViolation("x0 must be nonnegative")
    for s in np.linspace(0.0, horizon, n_metzler_samples):
        if not is_metzler(Afun(s)):
            raise HypothesisViolation(f"A(t) is not Metzler at t={s:.6g}")
    n = x0.size
    vf = VectorField.linear_tv(Afun, n)
    tr = flow(vf, 0.0, x0, horizon, **kw)
    # fine grid for the quadrature
    frac = np.linspace(0.0, 1.0, substeps + 1)[:-1]
    fine = np.concatenate([tr.t[k] + frac * (tr.t[k + 1] - tr.t[k]) for k in range(len(tr) - 1)]
                          + [tr.t[-1:]])
    mus = np.array([conic_measure(Afun(s), ns, seed).value for s in fine])
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (mus[1:] + mus[:-1]) * np.diff(fine))])
    integral = cum[::substeps]
    n0 = weighted_norm(x0, ns)
    bound = np.exp(integral) * n0
    norms = tr.norm_trace(ns)
    rep = CheckReport("conic_coppel", tol=0.0)
    for j in range(len(tr)):
        allowed = bound[j] * (1.0 + rel_tol)
        rep.record(allowed - norms[j], {"t": float(tr.t[j])})
    rep.extra.update({"t": tr.t, "norm": norms, "bound": bound, "rel_tol": rel_tol})
    return rep
