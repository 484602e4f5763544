"""Shared instance builders for the property and acceptance suites."""

import numpy as np

from sigspace.dictionaries import Dictionary, SensingMatrix, make_random_orthonormal
from sigspace.metrics import drip_constant
from sigspace.signals import SupportModel, add_noise, gen_sparse_coef


def controlled_spectrum_sensing(n: int, seed: int, spread: float = 0.08) -> SensingMatrix:
    """Square sensing matrix with singular values in sqrt([1-spread, 1+spread]).

    Submatrix Gram deviations are bounded by the full-spectrum deviation,
    so these matrices pass a brute-forced isometry gate by construction
    (the gate is still verified, never assumed).
    """
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.standard_normal((n, n)))
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = np.sqrt(rng.uniform(1 - spread, 1 + spread, size=n))
    return SensingMatrix((U * s) @ V.T)


def gated_instance(seed: int, n: int = 12, k: int = 2, noise_rel: float = 0.0,
                   delta_gate: float = 0.1):
    """A (A, D, coef, x, y, noise_norm, delta) tuple with brute-forced
    delta_4k <= ``delta_gate``, or None if the gate fails.

    The gate forces d == n here: any d > n dictionary at desk scale has a
    kernel vector whose mass on some 4k coordinates already drives the
    submatrix Gram deviation past 0.1.
    """
    A = controlled_spectrum_sensing(n, seed)
    D = make_random_orthonormal(n, seed + 5000)
    est = drip_constant(A, D, min(4 * k, n), method="bruteforce")
    if est.delta > delta_gate:
        return None
    coef = gen_sparse_coef(n, k, SupportModel("uniform"), seed=seed + 77)
    x = D.matrix @ coef.dense()
    y0 = A.matrix @ x
    noise_norm = noise_rel * float(np.linalg.norm(y0))
    y = add_noise(y0, noise_norm, seed=seed + 13) if noise_norm > 0 else y0
    return A, D, coef, x, y, noise_norm, est.delta


def parseval_frame(n: int, d: int, seed: int) -> Dictionary:
    """Random n x d Parseval frame (rows of a Haar orthogonal matrix)."""
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((d, d)))
    Q = Q * np.sign(np.diag(R))
    return Dictionary(Q[:n, :].astype(np.complex128), kind="custom")
