"""Optimal and near-optimal projections onto small sets of dictionary atoms.

The brute-force projector enumerates every size-k atom set and is the
oracle the near-optimal schemes (norm-weighted thresholding, pursuit
algorithms, l1 synthesis) are measured against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple

import numpy as np

from ._validation import as_vector
from .dictionaries import PARSEVAL_KINDS, Dictionary
from .l1 import bpdn
from .linalg import normalized_correlations, project_onto_span, top_k_indices
from .pursuit import SolverSpec, solve

__all__ = [
    "ProjectionScheme",
    "ProjectionResult",
    "NearOptimality",
    "lambda_opt_bruteforce",
    "sd_threshold",
    "sd_pursuit",
    "project_with_scheme",
    "near_optimality_constants",
    "DEFAULT_BRUTEFORCE_CAP",
]

SCHEME_KINDS = ("threshold", "omp", "cosamp", "sp", "l1", "bruteforce")
PURSUIT_KINDS = ("omp", "cosamp", "sp", "l1")

# maximum number of candidate supports the brute-force oracle may visit
DEFAULT_BRUTEFORCE_CAP = 2_000_000

# the l1 projection solves min ||a||_1 s.t. ||z - D a||_2 <= sigma with
# sigma = L1_SIGMA_REL * ||z||_2, then keeps the top-k support
L1_SIGMA_REL = 1e-6


@dataclass
class ProjectionScheme:
    """Which support-identification procedure to run, and its budgets.

    ``inner_iters`` bounds the iterations of pursuit-style schemes;
    ``l1_max_iter``/``l1_tol`` control the augmented-Lagrangian l1 solve;
    ``bruteforce_cap`` bounds oracle enumeration.
    """

    kind: str = "threshold"
    inner_iters: int = 20
    l1_max_iter: int = 2000
    l1_tol: float = 1e-8
    bruteforce_cap: int = DEFAULT_BRUTEFORCE_CAP

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown projection scheme {self.kind!r}")
        if self.inner_iters < 1:
            raise ValueError("inner_iters must be >= 1")


@dataclass(eq=False)
class ProjectionResult:
    """A selected support together with the orthogonal projection onto it."""

    support: np.ndarray
    projected: np.ndarray
    residual_norm: float


def _atoms(D):
    """Matrix and column norms from a Dictionary or plain array."""
    if isinstance(D, Dictionary):
        return D.matrix, D.column_norms
    M = np.asarray(D, dtype=np.complex128)
    return M, np.linalg.norm(M, axis=0)


def _is_parseval_kind(D) -> bool:
    return isinstance(D, Dictionary) and D.kind in PARSEVAL_KINDS


def _result(M, support, z) -> ProjectionResult:
    projected = project_onto_span(M, support, z)
    return ProjectionResult(support, projected, float(np.linalg.norm(z - projected)))


def lambda_opt_bruteforce(D, z, k: int, cap: int = DEFAULT_BRUTEFORCE_CAP) -> ProjectionResult:
    """Best size-k atom set by exhaustive search.

    Minimizes ``||z - P_S z||_2`` over all supports of size k (padding a
    support never hurts, so size-k attains the optimum over sizes <= k);
    ties break lexicographically. Raises if ``C(d, k)`` exceeds ``cap``.
    """
    M, _ = _atoms(D)
    z = as_vector(z, "z")
    if M.shape[0] != z.shape[0]:
        raise ValueError("dimension mismatch between dictionary and z")
    d = M.shape[1]
    k = min(k, d)
    if k == 0:
        return ProjectionResult(np.empty(0, dtype=np.int64),
                                np.zeros_like(z), float(np.linalg.norm(z)))
    n_supports = math.comb(d, k)
    if n_supports > cap:
        raise ValueError(f"brute force needs {n_supports} support evaluations, cap is {cap}")
    best_support = None
    best_res = np.inf
    for comb in combinations(range(d), k):
        cols = M[:, comb]
        coef, *_ = np.linalg.lstsq(cols, z, rcond=1e-10)
        res = np.linalg.norm(z - cols @ coef)
        if res < best_res:
            best_res = res
            best_support = comb
    return _result(M, np.asarray(best_support, dtype=np.int64), z)


def sd_threshold(D, z, k: int) -> ProjectionResult:
    """Support of the k largest norm-weighted analysis coefficients.

    Atoms are ranked by ``|<z, D_i>| / ||D_i||_2`` so non-normalized
    dictionaries are scored by projection length rather than raw
    correlation; this is optimal when the dictionary is orthonormal.
    """
    M, _ = _atoms(D)
    z = as_vector(z, "z")
    support = top_k_indices(normalized_correlations(M, z), min(k, M.shape[1]))
    return _result(M, support, z)


def sd_pursuit(D, z, k: int, scheme: ProjectionScheme) -> ProjectionResult:
    """Near-optimal projection via a coefficient-space solve of ``z ~ D a``.

    Runs the scheme's pursuit algorithm (or the l1 solve followed by
    top-k extraction) and re-projects ``z`` onto the selected atoms.
    Inner-solver non-convergence is not an error: the best support found
    is returned with its residual.
    """
    if scheme.kind not in PURSUIT_KINDS:
        raise ValueError(f"sd_pursuit needs a pursuit scheme, got {scheme.kind!r}")
    M, _ = _atoms(D)
    z = as_vector(z, "z")
    k = min(k, M.shape[1])
    if k == 0 or not np.any(z):
        return _result(M, np.empty(0, dtype=np.int64) if k == 0 else
                       top_k_indices(np.zeros(M.shape[1]), k), z)
    if scheme.kind == "l1":
        sigma = L1_SIGMA_REL * float(np.linalg.norm(z))
        a, _ = bpdn(M, z, sigma, max_iter=scheme.l1_max_iter, tol=scheme.l1_tol,
                    parseval=_is_parseval_kind(D))
        support = top_k_indices(a, k)
    else:
        spec = SolverSpec(kind=scheme.kind, k=k, max_iter=scheme.inner_iters)
        support = solve(M, z, spec).support
    return _result(M, support, z)


def project_with_scheme(D, z, k: int, scheme: ProjectionScheme) -> ProjectionResult:
    """Dispatch to the scheme's projector (threshold, pursuit, or oracle)."""
    if scheme.kind == "threshold":
        return sd_threshold(D, z, k)
    if scheme.kind == "bruteforce":
        return lambda_opt_bruteforce(D, z, k, cap=scheme.bruteforce_cap)
    return sd_pursuit(D, z, k, scheme)


class NearOptimality(NamedTuple):
    """Empirical worst-case projection quality over sampled inputs.

    ``c1`` bounds residual inflation from above, ``c2`` bounds captured
    energy from below; samples whose optimal residual is below 1e-12
    (exact hits, where the residual ratio is vacuous) are counted
    separately and excluded from ``c1``.
    """

    c1: float
    c2: float
    exact_hits: int


def near_optimality_constants(D, scheme: ProjectionScheme, k: int, samples: int,
                              seed: int) -> NearOptimality:
    """Measure the scheme against the brute-force oracle on random inputs."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    M, _ = _atoms(D)
    n = M.shape[0]
    rng = np.random.default_rng(seed)
    c1 = 0.0
    c2 = np.inf
    exact = 0
    for _ in range(samples):
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        opt = lambda_opt_bruteforce(D, x, k, cap=scheme.bruteforce_cap)
        got = project_with_scheme(D, x, k, scheme)
        opt_norm = np.linalg.norm(opt.projected)
        if opt.residual_norm < 1e-12:
            exact += 1
        else:
            c1 = max(c1, got.residual_norm / opt.residual_norm)
        if opt_norm > 1e-12:
            c2 = min(c2, np.linalg.norm(got.projected) / opt_norm)
    return NearOptimality(float(c1), float(c2), exact)
