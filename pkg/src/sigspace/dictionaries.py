"""Dictionaries and sensing matrices with verifiable structural properties.

Constructors are deterministic in their seed and return immutable value
objects. Matrices are dense complex128; real constructions embed with
zero imaginary parts.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_matrix
from .linalg import spectral_norm_hermitian

__all__ = [
    "Dictionary",
    "SensingMatrix",
    "make_identity",
    "make_random_orthonormal",
    "make_renormalized_orthogonal",
    "make_overcomplete_dft",
    "make_gaussian_sensing",
    "is_parseval",
    "save_matrix",
    "load_matrix",
]

PARSEVAL_KINDS = ("identity", "random-orthonormal", "overcomplete-dft")
DICTIONARY_KINDS = PARSEVAL_KINDS + ("renormalized-orthogonal", "custom")

PARSEVAL_TOL = 1e-10
COLUMN_NORM_TOL = 1e-12


@dataclass(eq=False)
class Dictionary:
    """An n x d synthesis operator whose columns are the atoms.

    ``kind`` records the construction; kinds other than
    ``renormalized-orthogonal`` and ``custom`` are Parseval frames
    (``D D* = I``). ``column_norms`` always matches the actual atom norms.
    """

    matrix: np.ndarray
    kind: str = "custom"
    column_norms: np.ndarray = field(default=None)

    def __post_init__(self):
        self.matrix = as_matrix(self.matrix, "dictionary matrix")
        n, d = self.matrix.shape
        if n > d:
            raise ValueError(f"dictionary must have n <= d, got {n}x{d}")
        if self.kind not in DICTIONARY_KINDS:
            raise ValueError(f"unknown dictionary kind {self.kind!r}")
        norms = np.linalg.norm(self.matrix, axis=0)
        if self.column_norms is None:
            self.column_norms = norms
        elif np.max(np.abs(np.asarray(self.column_norms) - norms)) > COLUMN_NORM_TOL:
            raise ValueError("column_norms disagree with the matrix")
        if self.kind in PARSEVAL_KINDS and not is_parseval(self, PARSEVAL_TOL):
            raise ValueError(f"kind {self.kind!r} requires D D* = I within {PARSEVAL_TOL}")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def d(self) -> int:
        return self.matrix.shape[1]

    def save(self, path) -> None:
        save_matrix(path, self.matrix)


@dataclass(eq=False)
class SensingMatrix:
    """An m x n measurement operator, optionally column-normalized."""

    matrix: np.ndarray
    column_normalized: bool = False
    seed: int = 0

    def __post_init__(self):
        self.matrix = as_matrix(self.matrix, "sensing matrix")
        m, n = self.matrix.shape
        if m > n:
            raise ValueError(f"sensing matrix must have m <= n, got {m}x{n}")
        if self.column_normalized:
            norms = np.linalg.norm(self.matrix, axis=0)
            if np.max(np.abs(norms - 1.0)) > COLUMN_NORM_TOL:
                raise ValueError("column_normalized set but columns are not unit norm")

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    def save(self, path) -> None:
        save_matrix(path, self.matrix)


def make_identity(n: int) -> Dictionary:
    """Identity dictionary (orthonormal special case)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Dictionary(np.eye(n, dtype=np.complex128), kind="identity")


def _haar_orthonormal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Approximately Haar orthogonal matrix via sign-fixed QR of a Gaussian draw."""
    G = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(G)
    # fixing the R diagonal signs removes the QR sign ambiguity
    Q = Q * np.sign(np.diag(R))
    return Q.astype(np.complex128)


def make_random_orthonormal(n: int, seed: int) -> Dictionary:
    """Square dictionary with orthonormal columns, deterministic in ``seed``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    return Dictionary(_haar_orthonormal(n, rng), kind="random-orthonormal")


def make_renormalized_orthogonal(n: int, seed: int, scale_min: float = 0.1,
                                 scale_max: float = 10.0) -> Dictionary:
    """Orthogonal but non-normalized dictionary ``Q diag(s)``.

    Column scales are drawn log-uniform in ``[scale_min, scale_max]``, so
    atoms stay mutually orthogonal while their norms spread over the
    requested range. With ``scale_min == scale_max == 1`` this reduces to
    ``make_random_orthonormal`` for the same seed.
    """
    if not 0 < scale_min <= scale_max:
        raise ValueError("need 0 < scale_min <= scale_max")
    rng = np.random.default_rng(seed)
    Q = _haar_orthonormal(n, rng)
    scales = np.exp(rng.uniform(np.log(scale_min), np.log(scale_max), size=n))
    return Dictionary(Q * scales, kind="renormalized-orthogonal")


def make_overcomplete_dft(n: int, oversampling: int) -> Dictionary:
    """Oversampled DFT dictionary ``D[j, w] = exp(2 pi i j w / d) / sqrt(d)``.

    ``d = oversampling * n``; the 1/sqrt(d) scale makes the frame Parseval
    (``D D* = I``), so atoms have norm sqrt(n/d) rather than 1. Neighboring
    atoms are highly coherent for oversampling > 1.
    """
    if n < 1 or oversampling < 1:
        raise ValueError("n and oversampling must be >= 1")
    d = oversampling * n
    j = np.arange(n)[:, None]
    w = np.arange(d)[None, :]
    D = np.exp(2j * np.pi * j * w / d) / np.sqrt(d)
    return Dictionary(D, kind="overcomplete-dft")


def make_gaussian_sensing(m: int, n: int, seed: int,
                          normalize_columns: bool = False) -> SensingMatrix:
    """Gaussian sensing matrix with real i.i.d. N(0, 1/m) entries.

    The 1/m variance makes ``E||Ax||^2 = ||x||^2``. With
    ``normalize_columns`` every column is rescaled to unit norm after the
    draw. Deterministic in ``seed``.
    """
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n)) / np.sqrt(m)
    if normalize_columns:
        A = A / np.linalg.norm(A, axis=0)
    return SensingMatrix(A.astype(np.complex128), column_normalized=normalize_columns, seed=seed)


def is_parseval(D, tol: float = PARSEVAL_TOL) -> bool:
    """True iff ``||D D* - I||_2 <= tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = D.matrix if isinstance(D, Dictionary) else as_matrix(D, "D")
    G = M @ M.conj().T - np.eye(M.shape[0])
    return spectral_norm_hermitian(G) <= tol


# ---------------------------------------------------------------------------
# binary cache format: magic "SPDM", little-endian u32 rows, u32 cols,
# u8 complex-flag, then f64 row-major entries (interleaved re/im when
# the complex flag is set).

_MAGIC = b"SPDM"


def save_matrix(path, M) -> None:
    """Write a matrix in the SPDM little-endian binary layout."""
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValueError("can only serialize 2-D matrices")
    is_complex = np.iscomplexobj(M)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IIB", M.shape[0], M.shape[1], 1 if is_complex else 0))
        if is_complex:
            buf = np.empty((M.shape[0], M.shape[1], 2), dtype="<f8")
            buf[:, :, 0] = M.real
            buf[:, :, 1] = M.imag
        else:
            buf = np.ascontiguousarray(M, dtype="<f8")
        fh.write(buf.tobytes(order="C"))


def load_matrix(path) -> np.ndarray:
    """Read a matrix written by :func:`save_matrix`."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError(f"not an SPDM file (magic {magic!r})")
        rows, cols, cflag = struct.unpack("<IIB", fh.read(9))
        count = rows * cols * (2 if cflag else 1)
        data = np.frombuffer(fh.read(count * 8), dtype="<f8", count=count)
    if cflag:
        data = data.reshape(rows, cols, 2)
        return (data[:, :, 0] + 1j * data[:, :, 1]).astype(np.complex128)
    return data.reshape(rows, cols).astype(np.float64)
