"""Coefficient-space recovery baselines: OMP, ROMP, CoSaMP, SP, and basis
pursuit. All operate on an explicit matrix (typically the combined
operator ``A D``) and return a :class:`~sigspace.signals.SparseCoef`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import as_matrix, as_vector
from .l1 import bpdn
from .linalg import least_squares_on_support, top_k_indices
from .signals import SparseCoef

__all__ = ["SolverSpec", "SolverInfo", "solve", "solve_with_info", "exact_recovery"]

SOLVER_KINDS = ("omp", "romp", "cosamp", "sp", "bp")


@dataclass
class SolverSpec:
    """Configuration for :func:`solve`.

    ``tol`` is relative to ``||y||_2`` and stops a solver once the residual
    falls below it. ``bp_sigma`` is the absolute residual bound of the
    basis-pursuit constraint; ``None`` defaults to ``1e-6 * ||y||_2``.
    ``bp_debias`` re-fits the top-k support by least squares so the output
    is comparable to greedy outputs.
    """

    kind: str
    k: int
    max_iter: int | None = None
    tol: float = 1e-12
    bp_sigma: float | None = None
    bp_debias: bool = True
    bp_max_iter: int = 2000
    bp_tol: float = 1e-8

    def __post_init__(self):
        if self.kind not in SOLVER_KINDS:
            raise ValueError(f"unknown solver kind {self.kind!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class SolverInfo:
    iterations: int
    converged: bool
    residual_trace: list = field(default_factory=list)


def solve(Phi, y, spec: SolverSpec) -> SparseCoef:
    """Recover a sparse coefficient vector from ``y ~ Phi a``."""
    return solve_with_info(Phi, y, spec)[0]


def solve_with_info(Phi, y, spec: SolverSpec):
    """Like :func:`solve` but also returns per-iteration diagnostics.

    Non-convergence is not an error; the best iterate found is returned
    with ``converged=False`` in the info record.
    """
    Phi = as_matrix(Phi, "Phi")
    y = as_vector(y, "y")
    if Phi.shape[0] != y.shape[0]:
        raise ValueError(f"dimension mismatch: Phi has {Phi.shape[0]} rows, y has length {y.shape[0]}")
    if spec.k > Phi.shape[1]:
        raise ValueError(f"k={spec.k} exceeds the number of columns {Phi.shape[1]}")
    runner = {
        "omp": _omp,
        "romp": _romp,
        "cosamp": _cosamp,
        "sp": _sp,
        "bp": _bp,
    }[spec.kind]
    dense, info = runner(Phi, y, spec)
    return SparseCoef.from_dense(dense), info


def exact_recovery(a_true, a_hat, rel_tol: float) -> bool:
    """Success test ``||a_true - a_hat||_2 <= rel_tol * ||a_true||_2``.

    Accepts sparse or dense vectors; the same rule applies verbatim to
    signal-space vectors.
    """
    t = a_true.dense() if isinstance(a_true, SparseCoef) else as_vector(a_true, "a_true")
    h = a_hat.dense() if isinstance(a_hat, SparseCoef) else as_vector(a_hat, "a_hat")
    if t.shape[0] != h.shape[0]:
        raise ValueError("vectors must have equal length")
    return bool(np.linalg.norm(t - h) <= rel_tol * np.linalg.norm(t))


def _refit(Phi, y, support):
    a = least_squares_on_support(Phi, y, support)
    return a, y - Phi @ a


def _omp(Phi, y, spec):
    # classic rule: grow by the largest-magnitude correlation
    ynorm = np.linalg.norm(y)
    max_iter = spec.max_iter if spec.max_iter is not None else spec.k
    support = np.empty(0, dtype=np.int64)
    a = np.zeros(Phi.shape[1], dtype=np.complex128)
    r = y.copy()
    trace = [float(np.linalg.norm(r))]
    it = 0
    for it in range(1, min(max_iter, spec.k) + 1):
        corr = np.abs(Phi.conj().T @ r)
        corr[support] = -1.0  # never reselect
        j = int(np.argmax(corr))
        support = np.sort(np.append(support, j))
        a, r = _refit(Phi, y, support)
        trace.append(float(np.linalg.norm(r)))
        if trace[-1] <= spec.tol * ynorm:
            break
    done = trace[-1] <= spec.tol * ynorm or support.size >= spec.k
    return a, SolverInfo(it, done, trace)


def _regularized_group(u_abs, candidates):
    """Max-energy subset of ``candidates`` whose |u| values are within a
    factor of 2 of each other (the classic ROMP regularization)."""
    order = candidates[np.argsort(-u_abs[candidates], kind="stable")]
    vals = u_abs[order]
    best, best_energy = order[:1], float(vals[0] ** 2)
    i = 0
    while i < len(order):
        j = i
        energy = 0.0
        while j < len(order) and vals[j] > vals[i] / 2.0:
            energy += float(vals[j] ** 2)
            j += 1
        if energy > best_energy:
            best, best_energy = order[i:j], energy
        i += 1
    return np.sort(best)


def _romp(Phi, y, spec):
    ynorm = np.linalg.norm(y)
    max_iter = spec.max_iter if spec.max_iter is not None else 2 * spec.k
    support = np.empty(0, dtype=np.int64)
    a = np.zeros(Phi.shape[1], dtype=np.complex128)
    r = y.copy()
    trace = [float(np.linalg.norm(r))]
    it = 0
    for it in range(1, max_iter + 1):
        u_abs = np.abs(Phi.conj().T @ r)
        u_abs[support] = 0.0
        candidates = top_k_indices(u_abs, min(spec.k, int(np.count_nonzero(u_abs))))
        if candidates.size == 0:
            break
        group = _regularized_group(u_abs, candidates)
        support = np.union1d(support, group)
        a, r = _refit(Phi, y, support)
        trace.append(float(np.linalg.norm(r)))
        if trace[-1] <= spec.tol * ynorm or support.size >= 2 * spec.k:
            break
    done = trace[-1] <= spec.tol * ynorm or support.size >= spec.k
    return a, SolverInfo(it, done, trace)


def _cosamp(Phi, y, spec):
    ynorm = np.linalg.norm(y)
    max_iter = spec.max_iter if spec.max_iter is not None else 10 * spec.k
    a = np.zeros(Phi.shape[1], dtype=np.complex128)
    r = y.copy()
    best_a, best_res = a, float(np.linalg.norm(r))
    trace = [best_res]
    it = 0
    for it in range(1, max_iter + 1):
        u = Phi.conj().T @ r
        omega = top_k_indices(u, min(2 * spec.k, Phi.shape[1]))
        T = np.union1d(np.flatnonzero(a), omega)
        b = least_squares_on_support(Phi, y, T)
        keep = top_k_indices(b, spec.k)
        a = np.zeros_like(a)
        a[keep] = b[keep]
        r = y - Phi @ a
        res = float(np.linalg.norm(r))
        trace.append(res)
        if res < best_res:
            best_a, best_res = a, res
        if res <= spec.tol * ynorm:
            break
    # debias on the final support so the returned residual is an LS residual
    support = np.flatnonzero(best_a)
    out, r_out = _refit(Phi, y, support)
    done = float(np.linalg.norm(r_out)) <= spec.tol * ynorm or it < max_iter
    return out, SolverInfo(it, done, trace)


def _sp(Phi, y, spec):
    ynorm = np.linalg.norm(y)
    max_iter = spec.max_iter if spec.max_iter is not None else 10 * spec.k
    support = top_k_indices(Phi.conj().T @ y, spec.k)
    a, r = _refit(Phi, y, support)
    res = float(np.linalg.norm(r))
    trace = [float(ynorm), res]
    it = 0
    for it in range(1, max_iter + 1):
        candidates = np.union1d(support, top_k_indices(Phi.conj().T @ r, spec.k))
        b = least_squares_on_support(Phi, y, candidates)
        new_support = top_k_indices(b, spec.k)
        new_a, new_r = _refit(Phi, y, new_support)
        new_res = float(np.linalg.norm(new_r))
        if new_res >= res:
            break  # classic SP acceptance rule: keep the previous iterate
        support, a, r, res = new_support, new_a, new_r, new_res
        trace.append(res)
        if res <= spec.tol * ynorm:
            break
    return a, SolverInfo(it, True, trace)


def _bp(Phi, y, spec):
    # solve in column-normalized coordinates (weighted l1) so atoms with
    # large norms are not preferred merely for their scale
    sigma = spec.bp_sigma if spec.bp_sigma is not None else 1e-6 * float(np.linalg.norm(y))
    norms = np.linalg.norm(Phi, axis=0)
    weights = np.where(norms > 0, norms, 1.0)
    a_n, info = bpdn(Phi / weights, y, sigma, max_iter=spec.bp_max_iter, tol=spec.bp_tol)
    a = a_n / weights
    trace = [float(np.linalg.norm(y)), float(np.linalg.norm(y - Phi @ a))]
    if spec.bp_debias:
        support = top_k_indices(a_n, min(spec.k, int(np.count_nonzero(a_n))))
        a, r = _refit(Phi, y, support)
        trace.append(float(np.linalg.norm(r)))
    return a, SolverInfo(info.iterations, info.converged, trace)
