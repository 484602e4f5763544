"""Signal-space subspace pursuit.

Each iteration expands the working support with candidates identified in
signal space, solves least squares on the combined operator, shrinks back
to the sparsity budget, and re-projects. The projection scheme is
pluggable (thresholding, pursuit algorithms, l1, or the brute-force
oracle).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ._validation import as_vector
from .dictionaries import Dictionary, SensingMatrix
from .projections import ProjectionScheme, project_with_scheme
from .signals import SparseCoef

__all__ = ["SsspConfig", "RecoveryResult", "sssp_recover", "estimate_sparsity"]

RESIDUAL_FLOOR_REL = 1e-12

STOP_RELATIVE_CHANGE = "relative-change"
STOP_MAX_ITER = "max-iter"
STOP_RESIDUAL_FLOOR = "residual-floor"


@dataclass
class SsspConfig:
    """Sparsity budget, candidate budget, scheme, and stopping rules.

    ``candidate_factor * k`` atoms are added per iteration (clamped so the
    working support never exceeds the dictionary width). ``max_iter``
    defaults to ``max(50, 10 k)``. ``eps_rel`` is the relative-change
    stopping tolerance. ``noise_norm_hint``, when given, raises the
    residual stopping floor to the known noise level so iterations stop
    once the residual is down to noise.
    """

    k: int
    candidate_factor: int = 3
    scheme: ProjectionScheme = field(default_factory=ProjectionScheme)
    max_iter: int | None = None
    eps_rel: float = 1e-6
    noise_norm_hint: float | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.candidate_factor < 1:
            raise ValueError("candidate_factor must be >= 1")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.eps_rel <= 0:
            raise ValueError("eps_rel must be positive")

    @property
    def effective_max_iter(self) -> int:
        return self.max_iter if self.max_iter is not None else max(50, 10 * self.k)


@dataclass(eq=False)
class RecoveryResult:
    """Recovered signal with its synthesis support and iteration trace."""

    x_hat: np.ndarray
    support: np.ndarray
    a_hat: SparseCoef
    iterations: int
    residual_trace: list
    converged: bool
    stop_reason: str
    iterates: list | None = None


def _unwrap(op, cls):
    return op.matrix if isinstance(op, cls) else np.asarray(op, dtype=np.complex128)


def sssp_recover(A, D, y, cfg: SsspConfig, keep_iterates: bool = False) -> RecoveryResult:
    """Recover ``x = D a`` with ``a`` k-sparse from ``y = A x + e``.

    ``A`` may be a :class:`SensingMatrix` or a plain m x n array, ``D`` a
    :class:`Dictionary` or a plain n x d array. With ``keep_iterates`` the
    result carries every per-iteration estimate (for convergence
    diagnostics).

    Stops on relative change of the estimate (skipped while the previous
    estimate is zero), on the residual floor, or at ``max_iter``.
    """
    A_mat = _unwrap(A, SensingMatrix)
    y = as_vector(y, "y")
    D_mat = _unwrap(D, Dictionary)
    D_obj = D if isinstance(D, Dictionary) else D_mat  # keeps the Parseval flag
    n, d = D_mat.shape
    if A_mat.shape[1] != n:
        raise ValueError(f"sensing matrix has {A_mat.shape[1]} columns, dictionary has {n} rows")
    if A_mat.shape[0] != y.shape[0]:
        raise ValueError(f"y has length {y.shape[0]}, expected {A_mat.shape[0]}")
    if cfg.k > d:
        raise ValueError(f"k={cfg.k} exceeds dictionary width d={d}")

    ynorm = float(np.linalg.norm(y))
    floor = RESIDUAL_FLOOR_REL * ynorm
    if cfg.noise_norm_hint is not None:
        floor = max(floor, float(cfg.noise_norm_hint))

    support = np.empty(0, dtype=np.int64)
    x = np.zeros(n, dtype=np.complex128)
    coef = np.zeros(0, dtype=np.complex128)
    r = y.copy()
    trace = [ynorm]
    iterates = [] if keep_iterates else None

    stop_reason = STOP_MAX_ITER
    iterations = 0
    for _ in range(cfg.effective_max_iter):
        iterations += 1
        # S1: proxy in signal space, candidate atoms from the scheme
        u = A_mat.conj().T @ r
        budget = min(cfg.candidate_factor * cfg.k, d - support.size)
        omega = project_with_scheme(D_obj, u, budget, cfg.scheme).support if budget > 0 \
            else np.empty(0, dtype=np.int64)
        # S2: merge with the previous support
        T = np.union1d(omega, support)
        # S3: least squares against the combined operator on T
        cols_T = A_mat @ D_mat[:, T]
        sol, *_ = np.linalg.lstsq(cols_T, y, rcond=1e-10)
        x_tilde = D_mat[:, T] @ sol
        # S4: shrink back to k atoms in signal space
        support = project_with_scheme(D_obj, x_tilde, cfg.k, cfg.scheme).support
        # S5: orthogonal projection onto the pruned span, coefficients re-fit
        cols_I = D_mat[:, support]
        coef, *_ = np.linalg.lstsq(cols_I, x_tilde, rcond=1e-10)
        x_new = cols_I @ coef
        # S6: new residual
        r = y - A_mat @ x_new
        rnorm = float(np.linalg.norm(r))
        trace.append(rnorm)
        if keep_iterates:
            iterates.append((support.copy(), x_new.copy()))

        x_prev_norm = float(np.linalg.norm(x))
        change = float(np.linalg.norm(x_new - x))
        x = x_new
        if rnorm <= floor:
            stop_reason = STOP_RESIDUAL_FLOOR
            break
        if x_prev_norm > 0 and change / x_prev_norm <= cfg.eps_rel:
            stop_reason = STOP_RELATIVE_CHANGE
            break

    a_hat = SparseCoef(d, support[coef != 0], coef[coef != 0])
    return RecoveryResult(
        x_hat=x,
        support=support,
        a_hat=a_hat,
        iterations=iterations,
        residual_trace=trace,
        converged=stop_reason != STOP_MAX_ITER,
        stop_reason=stop_reason,
        iterates=iterates,
    )


def estimate_sparsity(A, D, y, k_grid, cfg_template: SsspConfig) -> int:
    """Pick the sparsity level whose recovery leaves the smallest residual.

    Runs the engine at every level in the ascending ``k_grid`` and returns
    the level minimizing ``||y - A D a||_2``. Residuals within the
    engine's own floor of the minimum are treated as ties, resolved toward
    the smaller level.
    """
    k_grid = list(k_grid)
    if not k_grid:
        raise ValueError("k_grid must be non-empty")
    if sorted(k_grid) != k_grid:
        raise ValueError("k_grid must be ascending")
    y = as_vector(y, "y")
    floor = RESIDUAL_FLOOR_REL * float(np.linalg.norm(y))
    residuals = []
    for k in k_grid:
        result = sssp_recover(A, D, y, replace(cfg_template, k=k))
        residuals.append(result.residual_trace[-1])
    best = min(residuals)
    for k, res in zip(k_grid, residuals):
        if res <= best + floor:
            return int(k)
    return int(k_grid[int(np.argmin(residuals))])
