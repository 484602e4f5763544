"""Noise-robust l1 synthesis solver.

Solves ``min ||a||_1  s.t. ||z - M a||_2 <= sigma`` with an alternating
direction augmented-Lagrangian scheme using complex magnitude shrinkage.
One solver covers both the basis-pursuit baseline and the l1 projection
scheme.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ._validation import as_matrix, as_vector

__all__ = ["bpdn", "BpdnInfo"]

DEFAULT_PENALTY = 1.0
DEFAULT_MAX_ITER = 2000
DEFAULT_TOL = 1e-8


@dataclass
class BpdnInfo:
    iterations: int
    converged: bool
    primal_residual: float
    dual_residual: float


def _soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    # magnitude shrinkage; preserves the phase of complex entries
    mag = np.abs(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > t, 1.0 - t / np.where(mag > 0, mag, 1.0), 0.0)
    return v * scale


def _ball_projection(v: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    diff = v - center
    norm = np.linalg.norm(diff)
    if norm <= radius or norm == 0.0:
        return v
    return center + diff * (radius / norm)


def bpdn(M, z, sigma: float, rho: float = DEFAULT_PENALTY,
         max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL,
         parseval: bool = False):
    """Minimize ``||a||_1`` subject to ``||z - M a||_2 <= sigma``.

    Returns ``(a, BpdnInfo)``. Non-convergence is not an error: the last
    iterate is returned with ``converged=False``.

    With ``parseval=True`` the solver assumes ``M M* = I`` and uses the
    closed form ``(I + M* M)^-1 = I - M* M / 2``, skipping any
    factorization; otherwise a Cholesky factorization of the smaller of
    ``I + M M*`` and ``I + M* M`` is computed once.
    """
    M = as_matrix(M)
    z = as_vector(z, "z")
    if M.shape[0] != z.shape[0]:
        raise ValueError(f"dimension mismatch: M has {M.shape[0]} rows, z has length {z.shape[0]}")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    m, d = M.shape
    Mh = M.conj().T

    # solve (I + M*M) a = b, returning M a as well (free in the Parseval
    # case: M a = M b - (M M*)(M b)/2 = (M b)/2)
    if parseval:
        def solve_normal(b):
            t = M @ b
            return b - Mh @ t / 2.0, t / 2.0
    elif m < d:
        # Woodbury: (I + M*M)^-1 b = b - M*(I + MM*)^-1 M b
        factor = cho_factor(np.eye(m) + M @ Mh, check_finite=False)

        def solve_normal(b):
            a = b - Mh @ cho_solve(factor, M @ b, check_finite=False)
            return a, M @ a
    else:
        factor = cho_factor(np.eye(d) + Mh @ M, check_finite=False)

        def solve_normal(b):
            a = cho_solve(factor, b, check_finite=False)
            return a, M @ a

    a = Mh @ z
    w = a.copy()
    v = _ball_projection(M @ a, z, sigma)
    u1 = np.zeros(d, dtype=np.complex128)
    u2 = np.zeros(m, dtype=np.complex128)

    pri = dual = np.inf
    it = 0
    scale = max(np.linalg.norm(z), 1e-300)
    check_every = 5  # convergence tests cost an extra adjoint product
    w_chk, v_chk = w, v
    for it in range(1, max_iter + 1):
        a, Ma = solve_normal((w - u1) + Mh @ (v - u2))
        w = _soft_threshold(a + u1, 1.0 / rho)
        v = _ball_projection(Ma + u2, z, sigma)
        u1 = u1 + (a - w)
        u2 = u2 + (Ma - v)
        if it % check_every == 0 or it == max_iter:
            pri = np.sqrt(np.linalg.norm(a - w) ** 2 + np.linalg.norm(Ma - v) ** 2)
            dual = (rho / check_every) * np.linalg.norm(Mh @ (v - v_chk) + (w - w_chk))
            w_chk, v_chk = w, v
            if pri <= tol * scale and dual <= tol * scale:
                return w, BpdnInfo(it, True, float(pri), float(dual))
    return w, BpdnInfo(it, False, float(pri), float(dual))
