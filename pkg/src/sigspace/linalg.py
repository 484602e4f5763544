"""Dense linear-algebra primitives shared by every solver.

Everything operates on complex128 arrays; real problems embed with zero
imaginary parts. Adjoints are conjugate transposes throughout. All
functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import numpy as np

from ._validation import as_matrix, as_vector, check_support

__all__ = [
    "normalized_correlations",
    "least_squares_on_support",
    "project_onto_span",
    "top_k_indices",
    "opnorm_gram_deviation",
    "spectral_norm_hermitian",
]

# Relative singular-value cutoff for rank-deficient least squares.
RANK_RCOND = 1e-10

# Above this dimension Hermitian spectral norms switch from a dense
# eigen-solve to power iteration.
EIG_DIM_LIMIT = 512
POWER_MAX_ITER = 10_000
POWER_TOL = 1e-10


def normalized_correlations(M, r) -> np.ndarray:
    """Per-column projection lengths |<r, M_i>| / ||M_i||_2.

    Columns with zero norm contribute 0. The result is a real vector of
    length ``M.shape[1]``.
    """
    M = as_matrix(M)
    r = as_vector(r, "r")
    if M.shape[0] != r.shape[0]:
        raise ValueError(f"dimension mismatch: M has {M.shape[0]} rows, r has length {r.shape[0]}")
    inner = np.abs(M.conj().T @ r)
    norms = np.linalg.norm(M, axis=0)
    out = np.zeros_like(inner)
    nz = norms > 0
    out[nz] = inner[nz] / norms[nz]
    return out


def least_squares_on_support(Phi, y, T) -> np.ndarray:
    """Minimum-norm least-squares fit of ``y`` restricted to columns ``T``.

    Returns a full-length coefficient vector that is zero off ``T``; on
    ``T`` it minimizes ``||y - Phi_T a_T||_2``, with the minimum-norm
    solution when ``Phi_T`` is rank deficient. An empty support returns
    the zero vector.
    """
    Phi = as_matrix(Phi, "Phi")
    y = as_vector(y, "y")
    if Phi.shape[0] != y.shape[0]:
        raise ValueError(f"dimension mismatch: Phi has {Phi.shape[0]} rows, y has length {y.shape[0]}")
    T = check_support(T, Phi.shape[1])
    a = np.zeros(Phi.shape[1], dtype=np.complex128)
    if T.size == 0:
        return a
    sol, *_ = np.linalg.lstsq(Phi[:, T], y, rcond=RANK_RCOND)
    a[T] = sol
    return a


def project_onto_span(D, L, z) -> np.ndarray:
    """Orthogonal projection of ``z`` onto the span of the columns ``D_L``."""
    D = as_matrix(D, "D")
    z = as_vector(z, "z")
    if D.shape[0] != z.shape[0]:
        raise ValueError(f"dimension mismatch: D has {D.shape[0]} rows, z has length {z.shape[0]}")
    L = check_support(L, D.shape[1])
    if L.size == 0:
        return np.zeros_like(z)
    cols = D[:, L]
    coef, *_ = np.linalg.lstsq(cols, z, rcond=RANK_RCOND)
    return cols @ coef


def top_k_indices(v, k: int) -> np.ndarray:
    """Indices of the ``k`` largest-modulus entries, sorted ascending.

    Ties break toward the lowest index.
    """
    v = as_vector(v, "v")
    if not 0 <= k <= v.shape[0]:
        raise ValueError(f"k must be in [0, {v.shape[0]}], got {k}")
    if k == 0:
        return np.empty(0, dtype=np.int64)
    # stable sort on negated moduli keeps the lowest index first among ties
    order = np.argsort(-np.abs(v), kind="stable")
    return np.sort(order[:k]).astype(np.int64)


def opnorm_gram_deviation(M) -> float:
    """Spectral norm of the Gram deviation ``||M* M - I||_2``."""
    M = as_matrix(M)
    G = M.conj().T @ M
    G -= np.eye(G.shape[0])
    return spectral_norm_hermitian(G)


def spectral_norm_hermitian(H) -> float:
    """Spectral norm of a Hermitian matrix.

    Dense eigen-solve up to ``EIG_DIM_LIMIT``; power iteration on H^2
    (sign-free for indefinite H) above, with a deterministic start.
    """
    H = as_matrix(H, "H")
    if H.shape[0] != H.shape[1]:
        raise ValueError(f"H must be square, got {H.shape}")
    n = H.shape[0]
    if n <= EIG_DIM_LIMIT:
        return float(np.max(np.abs(np.linalg.eigvalsh(H))))
    # deterministic, non-degenerate start vector
    v = np.ones(n, dtype=np.complex128) + 1e-3 * np.arange(n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(POWER_MAX_ITER):
        w = H @ (H @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new_est = np.sqrt(nw)  # ||H^2 v|| -> lambda_max(H^2) = ||H||^2
        v = w / nw
        if abs(new_est - est) <= POWER_TOL * max(new_est, 1e-300):
            return float(new_est)
        est = new_est
    return float(est)
