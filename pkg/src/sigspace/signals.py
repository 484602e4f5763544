"""Ground-truth sparse and compressible signal generators.

All generators are pure functions of their arguments (seed included), so
trials can be reproduced and distributed freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import as_vector, check_support

__all__ = [
    "SparseCoef",
    "SupportModel",
    "gen_sparse_coef",
    "gen_p_compressible",
    "add_noise",
]

SUPPORT_KINDS = ("uniform", "separated", "clustered")


@dataclass(eq=False)
class SparseCoef:
    """A length-``length`` coefficient vector stored as (support, values)."""

    length: int
    support: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.support = check_support(self.support, self.length)
        self.values = np.asarray(self.values, dtype=np.complex128).ravel()
        if self.values.shape[0] != self.support.shape[0]:
            raise ValueError("support and values must have equal length")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values contain non-finite entries")

    @classmethod
    def from_dense(cls, vec, support=None) -> "SparseCoef":
        """Build from a dense vector; keeps the nonzeros of ``support``
        (or of the whole vector when omitted)."""
        vec = as_vector(vec, "vec")
        if support is None:
            support = np.flatnonzero(vec)
        else:
            support = check_support(support, vec.shape[0])
            support = support[vec[support] != 0]
        return cls(vec.shape[0], support, vec[support])

    def dense(self) -> np.ndarray:
        out = np.zeros(self.length, dtype=np.complex128)
        out[self.support] = self.values
        return out

    @property
    def k(self) -> int:
        return int(self.support.shape[0])


@dataclass
class SupportModel:
    """How nonzero locations are placed: uniform, well separated, or one
    contiguous (circularly wrapping) cluster.

    ``min_gap`` applies to the separated model only; ``None`` means the
    default ``d // (2 k)``.
    """

    kind: str = "uniform"
    min_gap: int | None = None

    def __post_init__(self):
        if self.kind not in SUPPORT_KINDS:
            raise ValueError(f"unknown support model {self.kind!r}")
        if self.min_gap is not None and self.min_gap < 1:
            raise ValueError("min_gap must be >= 1")


def _circular_gaps_ok(idx: np.ndarray, d: int, min_gap: int) -> bool:
    diff = np.abs(idx[:, None] - idx[None, :])
    gaps = np.minimum(diff, d - diff)
    np.fill_diagonal(gaps, d)
    return bool(np.min(gaps) >= min_gap)


def _draw_support(d: int, k: int, model: SupportModel, rng: np.random.Generator) -> np.ndarray:
    if model.kind == "uniform":
        return np.sort(rng.choice(d, size=k, replace=False))
    if model.kind == "clustered":
        start = int(rng.integers(d))
        return np.sort((start + np.arange(k)) % d)
    min_gap = model.min_gap if model.min_gap is not None else max(1, d // (2 * k))
    if k * min_gap > d:
        raise ValueError(f"separated support infeasible: k*min_gap = {k * min_gap} > d = {d}")
    for _ in range(100_000):
        idx = np.sort(rng.choice(d, size=k, replace=False))
        if k == 1 or _circular_gaps_ok(idx, d, min_gap):
            return idx
    raise ValueError("separated support rejection sampling did not terminate")


def gen_sparse_coef(d: int, k: int, model: SupportModel, seed: int,
                    complex_valued: bool = True) -> SparseCoef:
    """Draw a k-sparse coefficient vector with Gaussian values.

    The support follows ``model``; values are i.i.d. standard complex
    Gaussian (real N(0,1) with ``complex_valued=False``). Separated
    supports are rejection-sampled until every pairwise circular gap is at
    least ``min_gap``; clusters are one contiguous run that may wrap.
    """
    if not 1 <= k <= d:
        raise ValueError(f"need 1 <= k <= d, got k={k}, d={d}")
    rng = np.random.default_rng(seed)
    support = _draw_support(d, k, model, rng)
    if complex_valued:
        vals = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) / np.sqrt(2)
    else:
        vals = rng.standard_normal(k).astype(np.complex128)
    # resample the (measure-zero) exact zeros so the support is honest
    while np.any(vals == 0):
        vals[vals == 0] = rng.standard_normal(np.count_nonzero(vals == 0))
    return SparseCoef(d, support, vals)


def gen_p_compressible(n: int, p: float, R: float, seed: int) -> np.ndarray:
    """Signal whose sorted magnitudes follow the power law ``R * i^(-1/p)``.

    Magnitudes are deterministic and meet the decay bound with equality;
    phases and the placement permutation are random. ``p`` must lie in
    (0, 1).
    """
    if not 0 < p < 1:
        raise ValueError(f"p must be in (0, 1), got {p}")
    if R <= 0:
        raise ValueError("R must be positive")
    rng = np.random.default_rng(seed)
    mags = R * np.arange(1, n + 1, dtype=np.float64) ** (-1.0 / p)
    phases = np.exp(2j * np.pi * rng.uniform(size=n))
    x = mags * phases
    return x[rng.permutation(n)]


def add_noise(y, noise_norm: float, seed: int) -> np.ndarray:
    """Add a Gaussian-direction perturbation of exact l2 norm ``noise_norm``."""
    y = as_vector(y, "y")
    if noise_norm < 0:
        raise ValueError("noise_norm must be >= 0")
    if noise_norm == 0:
        return y.copy()
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(y.shape[0]) + 1j * rng.standard_normal(y.shape[0])
    e *= noise_norm / np.linalg.norm(e)
    return y + e
