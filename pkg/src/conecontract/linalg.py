"""Small dense eigensolvers: cyclic Jacobi and shifted power iteration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ConvergenceError(RuntimeError):
    pass


def jacobi_eigh(S, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with ascending eigenvalues ``w`` and orthonormal
    eigenvectors in the columns of ``V``.  Iteration stops once the
    off-diagonal Frobenius norm drops below ``tol * max(1, ||S||_F)``.
    """
    A = np.array(S, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(A, A.T, atol=1e-12 * max(1.0, np.abs(A).max(initial=0.0))):
        raise ValueError("matrix must be symmetric")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    offmask = ~np.eye(n, dtype=bool)
    scale = max(1.0, np.linalg.norm(A))
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(A[offmask] ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-18 * scale:
                    A[p, q] = A[q, p] = 0.0
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # rotate rows/columns p, q
                Ap = A[:, p].copy()
                Aq = A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap = A[p, :].copy()
                Aq = A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
                A[p, q] = A[q, p] = 0.0
                Vp = V[:, p].copy()
                Vq = V[:, q].copy()
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq
    else:
        raise ConvergenceError("Jacobi sweeps did not converge")
    w = np.diag(A).copy()
    order = np.argsort(w)
    return w[order], V[:, order]


def lambda_max_sym(S) -> float:
    """Largest eigenvalue of a symmetric matrix."""
    S = np.asarray(S, dtype=float)
    if S.shape == (1, 1):
        return float(S[0, 0])
    return float(jacobi_eigh(S)[0][-1])


@dataclass
class PowerResult:
    value: float
    vector: np.ndarray
    iterations: int
    residual: float
    converged: bool


def power_iteration(B, x0=None, tol: float = 1e-12, patience: int = 5,
                    max_iter: int = 100_000) -> PowerResult:
    """Dominant eigenpair of a nonnegative primitive matrix ``B``.

    The vector is kept positive and normalized to unit 1-norm; the
    eigenvalue estimate is ``||B x||_1`` (exact at a nonnegative fixed
    point).  Stops when the estimate moves by less than ``tol`` (relative)
    for ``patience`` consecutive iterations and the vector has settled.
    """
    B = np.asarray(B, dtype=float)
    n = B.shape[0]
    x = np.full(n, 1.0 / n) if x0 is None else np.asarray(x0, float) / np.sum(np.abs(x0))
    lam = np.inf
    calm = 0
    for k in range(1, max_iter + 1):
        y = B @ x
        lam_new = float(np.sum(np.abs(y)))
        if lam_new == 0.0:
            raise ConvergenceError("iteration collapsed to zero; matrix is not primitive")
        y /= lam_new
        dx = float(np.max(np.abs(y - x)))
        dl = abs(lam_new - lam)
        x, lam = y, lam_new
        if dl <= tol * max(1.0, abs(lam)) and dx <= tol:
            calm += 1
            if calm >= patience:
                res = float(np.max(np.abs(B @ x - lam * x)))
                return PowerResult(lam, x, k, res, True)
        else:
            calm = 0
    res = float(np.max(np.abs(B @ x - lam * x)))
    return PowerResult(lam, x, max_iter, res, False)
