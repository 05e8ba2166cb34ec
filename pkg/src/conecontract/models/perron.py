"""Perron eigenpairs of irreducible Metzler matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..linalg import ConvergenceError, power_iteration
from ..normcore import as_matrix, is_metzler


class ReducibleMatrixError(ValueError):
    pass


def is_irreducible(M) -> bool:
    """Strong connectivity of the graph ``i -> j`` iff ``M_ij != 0`` (i != j)."""
    M = as_matrix(M)
    n = M.shape[0]
    adj = (M != 0) & ~np.eye(n, dtype=bool)

    def reach(a):
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        stack = [0]
        while stack:
            i = stack.pop()
            for j in np.flatnonzero(a[i] & ~seen):
                seen[j] = True
                stack.append(int(j))
        return seen.all()

    return n == 1 or (reach(adj) and reach(adj.T))


@dataclass(frozen=True)
class PerronPair:
    value: float
    left: np.ndarray
    right: np.ndarray
    residual_left: float
    residual_right: float
    iterations: int

    def __iter__(self):
        return iter((self.value, self.left, self.right))


def perron_eigpair(M, tol: float = 1e-12, max_iter: int = 100_000) -> PerronPair:
    """Dominant eigenvalue with positive left/right eigenvectors (unit 1-norm).

    Power iteration on ``M + sI`` with ``s = max|M_ii| + 1``.  Residuals
    above ``1e-10`` (slow convergence from a small spectral gap) raise
    :class:`ConvergenceError`.
    """
    M = as_matrix(M)
    if not is_metzler(M):
        raise ValueError("Perron eigenpair needs a Metzler matrix")
    if not is_irreducible(M):
        raise ReducibleMatrixError("matrix is reducible (off-diagonal support graph not strongly connected)")
    s = float(np.max(np.abs(np.diag(M)))) + 1.0
    B = M + s * np.eye(M.shape[0])
    right = power_iteration(B, tol=tol, max_iter=max_iter)
    left = power_iteration(B.T, tol=tol, max_iter=max_iter)
    lam = right.value - s
    w = right.vector / right.vector.sum()
    v = left.vector / left.vector.sum()
    rr = float(np.max(np.abs(M @ w - lam * w)))
    rl = float(np.max(np.abs(v @ M - lam * v)))
    scale = max(1.0, float(np.max(np.abs(M))))
    if rr > 1e-10 * scale or rl > 1e-10 * scale:
        raise ConvergenceError(
            f"power iteration residuals {rr:.2e}/{rl:.2e}: spectral gap too small")
    return PerronPair(lam, v, w, rl, rr, max(right.iterations, left.iterations))
