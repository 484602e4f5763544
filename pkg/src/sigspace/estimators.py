"""Estimator-style wrappers around the recovery solvers.

Both classes follow the scikit-learn convention: constructor arguments
are hyperparameters (inspectable via ``get_params`` and compatible with
``sklearn.base.clone``), ``fit`` consumes the measurement operator as X
and the measurements as y, and results land in trailing-underscore
attributes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import as_matrix, as_vector
from .dictionaries import Dictionary
from .projections import ProjectionScheme
from .pursuit import SolverSpec, solve_with_info
from .sssp import SsspConfig, sssp_recover

__all__ = ["SignalSpacePursuit", "CoefficientPursuit"]


class SignalSpacePursuit(BaseEstimator):
    """Signal-space subspace pursuit against a fixed dictionary.

    Parameters
    ----------
    dictionary : Dictionary or array
        n x d synthesis operator the signal is sparse under.
    k : int
        Sparsity budget.
    scheme : str
        Projection scheme: threshold | omp | cosamp | sp | l1 | bruteforce.
    candidate_factor, max_iter, eps_rel, inner_iters, noise_norm_hint
        Engine knobs; see :class:`~sigspace.sssp.SsspConfig`.

    Attributes
    ----------
    signal_ : recovered signal (length n)
    coef_ : dense recovered coefficient vector (length d)
    support_ : selected atom indices
    n_iter_, residual_trace_, converged_, stop_reason_ : diagnostics
    """

    def __init__(self, dictionary=None, k=1, scheme="threshold", candidate_factor=3,
                 max_iter=None, eps_rel=1e-6, inner_iters=20, noise_norm_hint=None):
        self.dictionary = dictionary
        self.k = k
        self.scheme = scheme
        self.candidate_factor = candidate_factor
        self.max_iter = max_iter
        self.eps_rel = eps_rel
        self.inner_iters = inner_iters
        self.noise_norm_hint = noise_norm_hint

    def fit(self, X, y):
        """Recover from measurements ``y`` taken through the operator ``X``."""
        if self.dictionary is None:
            raise ValueError("dictionary must be set before fit")
        X = X if hasattr(X, "matrix") else as_matrix(X, "X")
        y = as_vector(y, "y")
        cfg = SsspConfig(
            k=self.k,
            candidate_factor=self.candidate_factor,
            scheme=ProjectionScheme(kind=self.scheme, inner_iters=self.inner_iters),
            max_iter=self.max_iter,
            eps_rel=self.eps_rel,
            noise_norm_hint=self.noise_norm_hint,
        )
        result = sssp_recover(X, self.dictionary, y, cfg)
        self.signal_ = result.x_hat
        self.coef_ = result.a_hat.dense()
        self.support_ = result.support
        self.n_iter_ = result.iterations
        self.residual_trace_ = list(result.residual_trace)
        self.converged_ = result.converged
        self.stop_reason_ = result.stop_reason
        return self

    def predict(self, X):
        """Measurements the recovered signal would produce under ``X``."""
        if not hasattr(self, "signal_"):
            raise ValueError("fit must be called before predict")
        X = X.matrix if hasattr(X, "matrix") else as_matrix(X, "X")
        return X @ self.signal_


class CoefficientPursuit(BaseEstimator):
    """Greedy or l1 coefficient recovery on an explicit operator.

    ``method`` is one of omp | romp | cosamp | sp | bp; ``fit(X, y)``
    solves ``y ~ X a`` with ``a`` k-sparse and stores ``coef_``,
    ``support_``, ``n_iter_``, ``residual_trace_``, ``converged_``.
    """

    def __init__(self, method="omp", k=1, max_iter=None, tol=1e-12,
                 bp_sigma=None, bp_debias=True):
        self.method = method
        self.k = k
        self.max_iter = max_iter
        self.tol = tol
        self.bp_sigma = bp_sigma
        self.bp_debias = bp_debias

    def fit(self, X, y):
        X = as_matrix(X, "X")
        y = as_vector(y, "y")
        spec = SolverSpec(kind=self.method, k=self.k, max_iter=self.max_iter,
                          tol=self.tol, bp_sigma=self.bp_sigma, bp_debias=self.bp_debias)
        coef, info = solve_with_info(X, y, spec)
        self.coef_ = coef.dense()
        self.support_ = coef.support
        self.n_iter_ = info.iterations
        self.residual_trace_ = list(info.residual_trace)
        self.converged_ = info.converged
        return self

    def predict(self, X):
        """Measurements the recovered coefficients produce under ``X``."""
        if not hasattr(self, "coef_"):
            raise ValueError("fit must be called before predict")
        return as_matrix(X, "X") @ self.coef_
