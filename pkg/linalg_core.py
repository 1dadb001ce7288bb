"""Dense linear algebra used by every other lab module.

Eigenvalues come from LAPACK through scipy: ``geev`` balances, reduces to
Hessenberg form and runs the implicitly shifted QR iteration; the real path
asks for the real Schur form and decodes its 1x1 / 2x2 diagonal blocks here,
so that real eigenvalues are flagged exactly and complex ones come out as
exact conjugate pairs.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Iterator, Union

import numpy as np
import scipy.linalg

from errors import ConvergenceError, DomainError, ShapeError

logger = logging.getLogger(__name__)

MAX_EIGEN_DIM = 4096
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-8


@dataclass(frozen=True)
class ComplexMatrix:
    """Dense matrix with finite entries.

    Real ensembles keep a float64 buffer so that "exactly real" survives;
    everything else is complex128.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.data)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeError(f"expected a non-empty 2-D array, got shape {arr.shape}")
        if not np.issubdtype(arr.dtype, np.floating) and not np.issubdtype(arr.dtype, np.complexfloating):
            arr = arr.astype(np.complex128)
        elif arr.dtype not in (np.float64, np.complex128):
            arr = arr.astype(np.complex128 if np.iscomplexobj(arr) else np.float64)
        if not np.all(np.isfinite(arr)):
            raise DomainError("matrix has non-finite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, values) -> "ComplexMatrix":
        return cls(np.array(values))

    @property
    def n_rows(self) -> int:
        return int(self.data.shape[0])

    @property
    def n_cols(self) -> int:
        return int(self.data.shape[1])

    @property
    def is_square(self) -> bool:
        return self.n_rows == self.n_cols

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.data)

    def trace(self) -> complex:
        return complex(np.trace(self.data))


MatrixLike = Union[ComplexMatrix, np.ndarray]


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalue multiset with exact real flags."""

    eigenvalues: np.ndarray
    real_flags: np.ndarray
    source_dim: int
    trace_residual: float = field(default=0.0)

    def __post_init__(self) -> None:
        if len(self.eigenvalues) != self.source_dim or len(self.real_flags) != self.source_dim:
            raise ShapeError("spectrum length does not match source dimension")

    @property
    def real_count(self) -> int:
        return int(np.count_nonzero(self.real_flags))

    def real_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues[self.real_flags].real

    def complex_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues[~self.real_flags]


def as_array(matrix: MatrixLike) -> np.ndarray:
    if isinstance(matrix, ComplexMatrix):
        return matrix.data
    return np.asarray(matrix)


def _require_square(arr: np.ndarray) -> int:
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"square matrix required, got shape {arr.shape}")
    return int(arr.shape[0])


def _trace_residual(arr: np.ndarray, eigenvalues: np.ndarray) -> float:
    n = arr.shape[0]
    scale = max(1.0, float(np.linalg.norm(arr)))
    residual = abs(complex(np.sum(eigenvalues)) - complex(np.trace(arr))) / scale
    if residual > TRACE_TOL * n:
        logger.warning(f"eigenvalue sum misses the trace by {residual:.3e} (n={n})")
    return residual


def eigenvalues_complex(matrix: MatrixLike) -> Spectrum:
    """All eigenvalues of a square matrix, with algebraic multiplicity."""
    arr = as_array(matrix)
    n = _require_square(arr)
    if n > MAX_EIGEN_DIM:
        raise DomainError(f"dimension {n} exceeds {MAX_EIGEN_DIM}")
    try:
        eigenvalues = scipy.linalg.eigvals(arr, check_finite=False)
    except np.linalg.LinAlgError as e:
        raise ConvergenceError(f"QR iteration failed to converge: {e}") from e
    eigenvalues = np.asarray(eigenvalues, dtype=np.complex128)
    return Spectrum(
        eigenvalues=eigenvalues,
        real_flags=eigenvalues.imag == 0.0,
        source_dim=n,
        trace_residual=_trace_residual(arr, eigenvalues),
    )


def _decode_quasi_triangular(t: np.ndarray) -> tuple:
    n = t.shape[0]
    eigenvalues = np.empty(n, dtype=np.complex128)
    flags = np.zeros(n, dtype=bool)
    i = 0
    while i < n:
        if i + 1 < n and t[i + 1, i] != 0.0:
            a, b = t[i, i], t[i, i + 1]
            c, d = t[i + 1, i], t[i + 1, i + 1]
            p = 0.5 * (a + d)
            disc = 0.25 * (a - d) ** 2 + b * c
            if disc >= 0.0:
                # LAPACK standardises 2x2 blocks to complex pairs; a real split
                # only shows up after external tampering with T.
                r = np.sqrt(disc)
                eigenvalues[i], eigenvalues[i + 1] = p + r, p - r
                flags[i] = flags[i + 1] = True
            else:
                q = np.sqrt(-disc)
                eigenvalues[i] = complex(p, q)
                eigenvalues[i + 1] = complex(p, -q)
            i += 2
        else:
            eigenvalues[i] = complex(t[i, i], 0.0)
            flags[i] = True
            i += 1
    return eigenvalues, flags


def eigenvalues_real_schur(matrix: MatrixLike) -> Spectrum:
    """Eigenvalues of a real matrix read off its real Schur form."""
    arr = as_array(matrix)
    n = _require_square(arr)
    if np.iscomplexobj(arr):
        if np.any(arr.imag != 0.0):
            raise DomainError("real Schur form needs a real matrix")
        arr = arr.real
    try:
        t, _ = scipy.linalg.schur(arr, output="real", check_finite=False)
    except np.linalg.LinAlgError as e:
        raise ConvergenceError(f"Francis double-shift QR failed to converge: {e}") from e
    eigenvalues, flags = _decode_quasi_triangular(t)
    return Spectrum(
        eigenvalues=eigenvalues,
        real_flags=flags,
        source_dim=n,
        trace_residual=_trace_residual(arr, eigenvalues),
    )


def spectrum_of(matrix: ComplexMatrix) -> Spectrum:
    """Real Schur path for real matrices, complex QR otherwise."""
    if matrix.is_real:
        return eigenvalues_real_schur(matrix)
    return eigenvalues_complex(matrix)


def lu_logabsdet(matrix: MatrixLike) -> float:
    """log|det M| from a partially pivoted LU; -inf for an exactly singular M."""
    arr = as_array(matrix)
    _require_square(arr)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, _ = scipy.linalg.lu_factor(arr, check_finite=False)
    diag = np.abs(np.diag(lu))
    if np.any(diag == 0.0):
        return float("-inf")
    return float(np.sum(np.log(diag)))


def shifted_logabsdet(matrix: MatrixLike, shifts: np.ndarray, chunk: int = 512) -> np.ndarray:
    """log|det(M - z I)| for every z in ``shifts`` (batched LU, -inf if singular)."""
    arr = as_array(matrix)
    n = _require_square(arr)
    shifts = np.asarray(shifts, dtype=np.complex128).ravel()
    out = np.empty(shifts.shape[0])
    eye = np.eye(n, dtype=np.complex128)
    for start, stop in _chunks(shifts.shape[0], chunk):
        stack = arr[None, :, :] - shifts[start:stop, None, None] * eye[None, :, :]
        _, logabs = np.linalg.slogdet(stack)
        out[start:stop] = logabs
    return out


def _chunks(total: int, size: int) -> Iterator[tuple]:
    for start in range(0, total, size):
        yield start, min(total, start + size)


def eigenvalues_hermitian(matrix: MatrixLike) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix."""
    arr = as_array(matrix)
    _require_square(arr)
    asym = float(np.max(np.abs(arr - arr.conj().T))) if arr.size else 0.0
    if asym > HERMITIAN_TOL:
        raise DomainError(f"matrix is not Hermitian (max asymmetry {asym:.3e})")
    try:
        values = scipy.linalg.eigh(arr, eigvals_only=True, check_finite=False)
    except np.linalg.LinAlgError as e:
        raise ConvergenceError(f"symmetric QR failed to converge: {e}") from e
    return np.sort(np.asarray(values, dtype=np.float64))
