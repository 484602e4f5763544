"""Isometry, localization, and error-bound diagnostics.

These quantities underpin the recovery guarantees: dictionary-restricted
isometry constants, the localization factor of a dictionary, tail
energies and model mismatch of signals, SNR/error measures, measurement
bounds, and evaluators for the right-hand sides of the convergence
inequalities used by the property-test suite.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ._validation import as_vector
from .dictionaries import Dictionary, SensingMatrix
from .linalg import least_squares_on_support, opnorm_gram_deviation, top_k_indices
from .projections import (
    DEFAULT_BRUTEFORCE_CAP,
    ProjectionScheme,
    project_with_scheme,
)

__all__ = [
    "DripEstimate",
    "BoundReport",
    "drip_constant",
    "localization_factor",
    "tail_energy",
    "model_mismatch",
    "recovery_error",
    "r_snr",
    "measurement_bound",
    "convergence_constants",
    "bound_report",
]


def _matrix(op):
    if isinstance(op, (Dictionary, SensingMatrix)):
        return op.matrix
    return np.asarray(op, dtype=np.complex128)


@dataclass
class DripEstimate:
    """Restricted-isometry constant of a combined operator at order ``k``.

    ``bruteforce`` estimates are exact maxima over all supports; sampled
    estimates are lower bounds on the true constant.
    """

    k: int
    delta: float
    method: str
    supports_checked: int


def drip_constant(A, D, k: int, method: str = "bruteforce", trials: int = 200,
                  seed: int = 0, cap: int = DEFAULT_BRUTEFORCE_CAP) -> DripEstimate:
    """Isometry constant ``max_T ||(AD)_T* (AD)_T - I||_2`` over size-k supports."""
    Phi = _matrix(A) @ _matrix(D)
    d = Phi.shape[1]
    if not 1 <= k <= d:
        raise ValueError(f"need 1 <= k <= {d}, got k={k}")
    if method == "bruteforce":
        n_supports = math.comb(d, k)
        if n_supports > cap:
            raise ValueError(f"brute force needs {n_supports} supports, cap is {cap}")
        delta = max(opnorm_gram_deviation(Phi[:, list(T)])
                    for T in combinations(range(d), k))
        return DripEstimate(k, float(delta), "bruteforce", n_supports)
    if method != "sampled":
        raise ValueError(f"unknown method {method!r}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    delta = max(opnorm_gram_deviation(Phi[:, np.sort(rng.choice(d, size=k, replace=False))])
                for _ in range(trials))
    return DripEstimate(k, float(delta), "sampled", trials)


def _l2_to_l1_sup(H: np.ndarray, rng: np.random.Generator, restarts: int) -> float:
    """sup of ||H c||_1 over unit-norm c, by projected power ascent.

    The iteration c <- H* phase(H c) / ||.|| increases the objective
    monotonically; restarts cover the non-convex landscape. The result is
    a lower bound on the true supremum.
    """
    t = H.shape[1]
    # deterministic start: the top right singular vector (l2 maximizer)
    _, _, vh = np.linalg.svd(H, full_matrices=False)
    starts = [vh[0].conj()]
    for _ in range(restarts - 1):
        c = rng.standard_normal(t) + 1j * rng.standard_normal(t)
        starts.append(c / np.linalg.norm(c))
    best = 0.0
    for c in starts:
        obj = 0.0
        for _ in range(200):
            Hc = H @ c
            new_obj = float(np.linalg.norm(Hc, 1))
            phases = np.where(np.abs(Hc) > 0, Hc / np.where(np.abs(Hc) > 0, np.abs(Hc), 1.0), 1.0)
            g = H.conj().T @ phases
            gn = np.linalg.norm(g)
            if gn == 0:
                break
            c = g / gn
            if new_obj - obj <= 1e-12 * max(new_obj, 1.0):
                obj = new_obj
                break
            obj = new_obj
        best = max(best, obj)
    return best


def localization_factor(D, k: int, method: str = "bruteforce", samples: int = 200,
                        seed: int = 0, restarts: int = 20,
                        cap: int = DEFAULT_BRUTEFORCE_CAP) -> float:
    """Analysis-domain spread ``sup ||D* D a||_1 / sqrt(k)`` over unit-norm
    k-atom syntheses ``D a``.

    Per support the inner supremum is lifted to ``sup ||(D* Q) c||_1``
    over the unit sphere (Q an orthonormal basis of the atom span) and
    estimated by projected power ascent with restarts; ``bruteforce``
    enumerates every support, ``sampled`` draws random ones. The value is
    a lower bound except in exhaustive + converged-ascent mode.
    """
    M = _matrix(D)
    d = M.shape[1]
    if not 1 <= k <= d:
        raise ValueError(f"need 1 <= k <= {d}, got k={k}")
    rng = np.random.default_rng(seed)
    if method == "bruteforce":
        n_supports = math.comb(d, k)
        if n_supports > cap:
            raise ValueError(f"brute force needs {n_supports} supports, cap is {cap}")
        supports = combinations(range(d), k)
    elif method == "sampled":
        supports = (np.sort(rng.choice(d, size=k, replace=False)) for _ in range(samples))
    else:
        raise ValueError(f"unknown method {method!r}")
    Mh = M.conj().T
    best = 0.0
    for T in supports:
        cols = M[:, list(T)]
        Q, R = np.linalg.qr(cols)
        rank = int(np.sum(np.abs(np.diag(R)) > 1e-12 * max(np.abs(np.diag(R)).max(), 1e-300)))
        if rank == 0:
            continue
        H = Mh @ Q[:, :rank]
        best = max(best, _l2_to_l1_sup(H, rng, restarts))
    return best / np.sqrt(k)


def tail_energy(x, k: int, noise_norm: float = 0.0) -> float:
    """Baseline error floor ``||x - x_k||_2 + ||x - x_k||_1 / sqrt(k) + ||e||_2``.

    ``x_k`` keeps the k largest-modulus entries (ties toward the lowest
    index).
    """
    x = as_vector(x, "x")
    if not 0 <= k <= x.shape[0]:
        raise ValueError(f"k must be in [0, {x.shape[0]}]")
    if noise_norm < 0:
        raise ValueError("noise_norm must be >= 0")
    tail = x.copy()
    tail[top_k_indices(x, k)] = 0
    return float(np.linalg.norm(tail) + np.linalg.norm(tail, 1) / np.sqrt(max(k, 1))
                 + noise_norm)


def model_mismatch(x, D, k: int, scheme: ProjectionScheme | None = None) -> float:
    """Combined tail norm of ``x`` against a k-atom synthesis.

    Evaluates ``||x - D a_k||_2 + ||x - D a_k||_1 / sqrt(k)`` at the
    least-squares coefficients on the scheme-selected support; this
    upper-bounds the true infimum. The ``bruteforce`` scheme enumerates
    every support and minimizes the mismatch value itself (not just the
    l2 residual), so it dominates every single-support scheme.
    """
    x = as_vector(x, "x")
    scheme = scheme if scheme is not None else ProjectionScheme(kind="bruteforce")

    def value(projected):
        diff = x - projected
        return float(np.linalg.norm(diff) + np.linalg.norm(diff, 1) / np.sqrt(max(k, 1)))

    if scheme.kind != "bruteforce":
        return value(project_with_scheme(D, x, k, scheme).projected)
    M = _matrix(D)
    d = M.shape[1]
    kk = min(k, d)
    if kk == 0:
        return value(np.zeros_like(x))
    n_supports = math.comb(d, kk)
    if n_supports > scheme.bruteforce_cap:
        raise ValueError(f"brute force needs {n_supports} supports, cap is {scheme.bruteforce_cap}")
    best = np.inf
    for T in combinations(range(d), kk):
        cols = M[:, T]
        coef, *_ = np.linalg.lstsq(cols, x, rcond=1e-10)
        best = min(best, value(cols @ coef))
    return best


def recovery_error(x, x_hat) -> float:
    """Relative l2 recovery error ``||x - x_hat||_2 / ||x||_2``."""
    x = as_vector(x, "x")
    x_hat = as_vector(x_hat, "x_hat")
    if x.shape[0] != x_hat.shape[0]:
        raise ValueError("vectors must have equal length")
    xnorm = np.linalg.norm(x)
    if xnorm == 0:
        raise ValueError("recovery error is undefined for a zero true signal")
    return float(np.linalg.norm(x - x_hat) / xnorm)


def r_snr(x, x_hat) -> float:
    """Amplitude-ratio SNR ``10 log10(||x||_2 / ||x - x_hat||_2)`` in dB.

    Note this is 10 log of an amplitude (not power) ratio, matching the
    recovery-error convention used throughout. Exact recovery returns
    ``inf``.
    """
    x = as_vector(x, "x")
    x_hat = as_vector(x_hat, "x_hat")
    diff = np.linalg.norm(x - x_hat)
    if diff == 0:
        return math.inf
    return float(10.0 * np.log10(np.linalg.norm(x) / diff))


def _c0_gaussian(eps: float) -> float:
    return eps * eps / 4.0 - eps ** 3 / 6.0


C0_KINDS = {"gaussian": _c0_gaussian}


def measurement_bound(k: int, d: int, delta: float, alpha: float,
                      c0_kind: str = "gaussian", variant: str = "dictionary") -> int:
    """Measurements sufficient for a near-isometry on k-atom signals.

    ``variant="dictionary"`` counts every size-k atom subset of a width-d
    dictionary: ``ceil((2k log(42 e d / (delta k)) + log(4/alpha)) /
    c0(delta/sqrt(2)))``. ``variant="subspace"`` is the single-subspace
    bound with numerator ``2k log(42/delta) + log(4/alpha)``. ``c0`` is the
    concentration constant family of the matrix ensemble (Gaussian:
    ``eps^2/4 - eps^3/6``).
    """
    if not 0 < delta < 1 or not 0 < alpha < 1:
        raise ValueError("delta and alpha must lie in (0, 1)")
    if k < 1 or d < 1:
        raise ValueError("k and d must be >= 1")
    c0 = C0_KINDS.get(c0_kind)
    if c0 is None:
        raise ValueError(f"unknown c0 kind {c0_kind!r}; have {sorted(C0_KINDS)}")
    if variant == "dictionary":
        numer = 2 * k * math.log(42 * math.e * d / (delta * k)) + math.log(4 / alpha)
    elif variant == "subspace":
        numer = 2 * k * math.log(42 / delta) + math.log(4 / alpha)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return math.ceil(numer / c0(delta / math.sqrt(2)))


def convergence_constants(delta4k: float, lambda1: float, lambda2: float):
    """Per-iteration contraction and noise-amplification constants.

    ``C1 = ((2 + l1) delta + l1)(2 + l2) sqrt((1 + delta)/(1 - delta))``
    and ``C2 = (2 + l2)((2 + l1)(1 + delta) + 2) / sqrt(1 - delta)``.
    """
    if not 0 <= delta4k < 1:
        raise ValueError("delta4k must lie in [0, 1)")
    root = math.sqrt((1 + delta4k) / (1 - delta4k))
    c1 = ((2 + lambda1) * delta4k + lambda1) * (2 + lambda2) * root
    c2 = (2 + lambda2) * ((2 + lambda1) * (1 + delta4k) + 2) / math.sqrt(1 - delta4k)
    return float(c1), float(c2)


@dataclass
class BoundReport:
    """Measured error next to the bound that should dominate it.

    The comparison is only meaningful when ``condition_met`` (the
    delta_4k <= 0.1 hypothesis) holds; reports serialize to JSON lines
    for the test suite's evidence log.
    """

    equation_id: str
    lhs_error: float
    rhs_bound: float
    condition_met: bool

    def holds(self, slack: float = 0.0) -> bool:
        return self.lhs_error <= self.rhs_bound + slack

    def to_json(self) -> str:
        return json.dumps({
            "equation_id": self.equation_id,
            "lhs_error": self.lhs_error,
            "rhs_bound": self.rhs_bound,
            "condition_met": self.condition_met,
        })


def bound_report(equation_id: str, *, x=None, x_prev=None, x_iter=None,
                 x_synth=None, A=None, a=None, a_k=None, e_norm: float = 0.0,
                 delta: float | None = None, k: int | None = None,
                 l: int | None = None, C1: float | None = None,
                 C2: float | None = None, mismatch: float | None = None,
                 tail: float | None = None) -> BoundReport:
    """Evaluate one convergence inequality on supplied iterates.

    ``equation_id`` selects the bound; the ``*g`` variants are the
    geometric (iteration-count) lines of the same inequalities:

    - ``"iteration-cap"``: error after the prescribed iteration count,
      needs ``x``, ``x_iter``, ``C1``, ``C2``, ``l``, ``e_norm``.
    - ``"contraction"`` / ``"contraction-g"``: exact-representation decay,
      needs ``x``, ``x_prev``/``l``, ``x_iter``, ``e_norm``.
    - ``"mismatch-raw"`` / ``"mismatch-raw-g"``: arbitrary signals via the
      measured ``A (x - D a_k)`` term, needs ``A``, ``x_synth``.
    - ``"rip-upper"``: norm inflation ``||A x||``, needs ``A``, ``x``,
      ``delta``, ``k``.
    - ``"mismatch"`` / ``"mismatch-g"``: arbitrary signals via the model
      mismatch value, needs ``mismatch``, ``delta``.
    - ``"tail"`` / ``"tail-g"``: via the tail energy, needs ``tail``.
    - ``"coef-tail"``: coefficient-space inflation, needs ``A`` (the
      combined operator), ``a``, ``a_k``, ``delta``, ``k``.

    The flag ``condition_met`` records whether ``delta <= 0.1`` was
    verified for bounds that assume it.
    """
    cond = delta is not None and delta <= 0.1

    def norm(v):
        return float(np.linalg.norm(v))

    if equation_id == "iteration-cap":
        lhs = norm(np.asarray(x) - np.asarray(x_iter))
        rhs = (1 + (1 - C1 ** (l + 1)) / (1 - C1)) * C2 * e_norm
        return BoundReport(equation_id, lhs, float(rhs), cond)
    if equation_id == "contraction":
        lhs = norm(np.asarray(x) - np.asarray(x_iter))
        rhs = 0.5 * norm(np.asarray(x) - np.asarray(x_prev)) + 7.5 * e_norm
        return BoundReport(equation_id, lhs, float(rhs), cond)
    if equation_id == "contraction-g":
        lhs = norm(np.asarray(x) - np.asarray(x_iter))
        rhs = 2.0 ** (-l) * norm(x) + 15.0 * e_norm
        return BoundReport(equation_id, lhs, float(rhs), cond)
    if equation_id in ("mismatch-raw", "mismatch-raw-g"):
        A_mat = _matrix(A)
        drift = norm(A_mat @ (np.asarray(x) - np.asarray(x_synth)))
        gap = norm(np.asarray(x) - np.asarray(x_synth))
        lhs = norm(np.asarray(x) - np.asarray(x_iter))
        if equation_id == "mismatch-raw":
            rhs = 0.5 * norm(np.asarray(x) - np.asarray(x_prev)) + gap + 7.5 * drift + 7.5 * e_norm
        else:
            rhs = 2.0 ** (-l) * norm(x_synth) + gap + 15.0 * drift + 15.0 * e_norm
        return BoundReport(equation_id, lhs, float(rhs), cond)
    if equation_id == "rip-upper":
        A_mat = _matrix(A)
        xv = as_vector(x, "x")
        lhs = norm(A_mat @ xv)
        rhs = math.sqrt(1 + delta) * (norm(xv) + float(np.linalg.norm(xv, 1)) / math.sqrt(k))
        return BoundReport(equation_id, lhs, float(rhs), cond)
    if equation_id in ("mismatch", "mismatch-g"):
        lhs = norm(np.asarray(x) - np.asarray(x_iter))
        inflate = math.sqrt(1 + delta)
        if equation_id == "mismatch":
            rhs = 0.5 * norm(np.asarray(x) - np.asarray(x_prev)) + 7.5 * e_norm + 8.5 * inflate * mismatch
        else:
            rhs = 2.0 ** (-l) * norm(x_synth) + 15.0 * e_norm + 16.0 * inflate * mismatch
        return BoundReport(equation_id, lhs, float(rhs), cond)
    if equation_id in ("tail", "tail-g"):
        lhs = norm(np.asarray(x) - np.asarray(x_iter))
        if equation_id == "tail":
            rhs = 0.5 * norm(np.asarray(x) - np.asarray(x_prev)) + 10.0 * tail
        else:
            rhs = 2.0 ** (-l) * norm(x_synth) + 20.0 * tail
        return BoundReport(equation_id, lhs, float(rhs), cond)
    if equation_id == "coef-tail":
        Phi = _matrix(A)
        diff = np.asarray(a) - np.asarray(a_k)
        lhs = norm(Phi @ diff)
        rhs = math.sqrt(1 + delta) * (norm(diff) + float(np.linalg.norm(diff, 1)) / math.sqrt(k))
        return BoundReport(equation_id, lhs, float(rhs), cond)
    raise ValueError(f"unknown equation id {equation_id!r}")
