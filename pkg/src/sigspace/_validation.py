"""Input validation helpers shared by every module.

All public entry points normalize their inputs through these functions so
that downstream code can assume 1-D/2-D complex128 arrays with finite
entries and well-formed support index sets.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_vector",
    "as_matrix",
    "check_support",
    "check_same_length",
]


def as_vector(x, name: str = "x") -> np.ndarray:
    """Coerce to a 1-D complex128 array with finite entries."""
    v = np.asarray(x, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {v.shape}")
    if v.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def as_matrix(M, name: str = "M") -> np.ndarray:
    """Coerce to a 2-D complex128 array with finite entries."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if A.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    return A


def check_support(indices, width: int, budget: int | None = None, name: str = "support") -> np.ndarray:
    """Normalize a support to a sorted int64 index array.

    Indices must be unique and lie in ``[0, width)``; if ``budget`` is given
    the support may not exceed it.
    """
    idx = np.asarray(indices, dtype=np.int64).ravel()
    if idx.size:
        idx = np.sort(idx)
        if idx[0] < 0 or idx[-1] >= width:
            raise ValueError(f"{name} indices must lie in [0, {width})")
        if np.any(np.diff(idx) == 0):
            raise ValueError(f"{name} contains duplicate indices")
    if budget is not None and idx.size > budget:
        raise ValueError(f"{name} has {idx.size} indices, budget is {budget}")
    return idx


def check_same_length(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {what} ({a.shape[0]} vs {b.shape[0]})")
