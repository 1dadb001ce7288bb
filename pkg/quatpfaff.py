"""Complexified quaternions, self-dual quaternion matrices and Pfaffians.

A quaternion q = q0 + q1 e1 + q2 e2 + q3 e3 (complex q_i) is represented by
the 2x2 complex matrix

    phi(q) = [[q0 + i q3,  i q1 - q2],
              [i q1 + q2,  q0 - i q3]]

so e1 = [[0, i], [i, 0]], e2 = [[0, -1], [1, 0]], e3 = [[i, 0], [0, -i]].
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence

import numpy as np

from errors import DomainError, SelfDualityError, ShapeError
from linalg_core import ComplexMatrix, MatrixLike, as_array

logger = logging.getLogger(__name__)

SKEW_TOL = 1e-12
SELF_DUAL_TOL = 1e-12
SCALAR_TOL = 1e-10
MAX_CYCLE_EXPANSION_N = 7
MAX_COMBINATORIAL_DIM = 6


@dataclass(frozen=True)
class Quaternion:
    q0: complex = 0j
    q1: complex = 0j
    q2: complex = 0j
    q3: complex = 0j

    def __post_init__(self) -> None:
        for name in ("q0", "q1", "q2", "q3"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    @classmethod
    def scalar(cls, value: complex) -> "Quaternion":
        return cls(complex(value))

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[complex]) -> "Quaternion":
        return cls(*(complex(c) for c in coeffs))

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "Quaternion":
        a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
        return cls((a + d) / 2, (b + c) / 2j, (c - b) / 2, (a - d) / 2j)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.q0, self.q1, self.q2, self.q3], dtype=np.complex128)

    def matrix(self) -> np.ndarray:
        return _phi_block(self.coefficients)

    def is_scalar(self, tol: float = SCALAR_TOL) -> bool:
        scale = max(1.0, abs(self.q0))
        return max(abs(self.q1), abs(self.q2), abs(self.q3)) <= tol * scale

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return quat_mul(self, other)
        return Quaternion.from_coefficients(self.coefficients * complex(other))

    def __rmul__(self, other) -> "Quaternion":
        return Quaternion.from_coefficients(self.coefficients * complex(other))

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion.from_coefficients(self.coefficients + other.coefficients)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion.from_coefficients(self.coefficients - other.coefficients)

    def __neg__(self) -> "Quaternion":
        return Quaternion.from_coefficients(-self.coefficients)


ONE = Quaternion(1)
E1 = Quaternion(0, 1)
E2 = Quaternion(0, 0, 1)
E3 = Quaternion(0, 0, 0, 1)


def quat_mul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product extended bilinearly to complex coefficients."""
    a0, av = a.q0, np.array([a.q1, a.q2, a.q3])
    b0, bv = b.q0, np.array([b.q1, b.q2, b.q3])
    s = a0 * b0 - np.dot(av, bv)
    v = a0 * bv + b0 * av + np.cross(av, bv)
    return Quaternion(s, v[0], v[1], v[2])


def quat_dual(q: Quaternion) -> Quaternion:
    """[[a, b], [c, d]] -> [[d, -b], [-c, a]], i.e. q0 - q1 e1 - q2 e2 - q3 e3."""
    return Quaternion(q.q0, -q.q1, -q.q2, -q.q3)


def _phi_block(coeffs: np.ndarray) -> np.ndarray:
    """phi applied to the trailing axis of a (..., 4) coefficient array."""
    q0, q1, q2, q3 = coeffs[..., 0], coeffs[..., 1], coeffs[..., 2], coeffs[..., 3]
    out = np.empty(coeffs.shape[:-1] + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = q0 + 1j * q3
    out[..., 0, 1] = 1j * q1 - q2
    out[..., 1, 0] = 1j * q1 + q2
    out[..., 1, 1] = q0 - 1j * q3
    return out


class QuaternionMatrix:
    """n x n grid of quaternions stored as an (n, n, 4) complex coefficient array."""

    def __init__(self, coefficients: np.ndarray) -> None:
        arr = np.asarray(coefficients, dtype=np.complex128)
        if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != 4:
            raise ShapeError(f"expected an (n, n, 4) coefficient array, got {arr.shape}")
        self.coefficients = arr

    @classmethod
    def from_entries(cls, rows: Iterable[Iterable[Quaternion]]) -> "QuaternionMatrix":
        return cls(np.array([[q.coefficients for q in row] for row in rows]))

    @classmethod
    def identity(cls, n: int) -> "QuaternionMatrix":
        return cls.diagonal([1.0] * n)

    @classmethod
    def diagonal(cls, scalars: Sequence[complex]) -> "QuaternionMatrix":
        n = len(scalars)
        coeffs = np.zeros((n, n, 4), dtype=np.complex128)
        coeffs[np.arange(n), np.arange(n), 0] = scalars
        return cls(coeffs)

    @classmethod
    def random_self_dual(cls, rng: np.random.Generator, n: int) -> "QuaternionMatrix":
        def cnormal(*shape):
            return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

        coeffs = np.zeros((n, n, 4), dtype=np.complex128)
        for i in range(n):
            coeffs[i, i, 0] = cnormal(1)[0]
            for j in range(i + 1, n):
                q = cnormal(4)
                coeffs[i, j] = q
                coeffs[j, i] = quat_dual(Quaternion.from_coefficients(q)).coefficients
        return cls(coeffs)

    @property
    def n(self) -> int:
        return int(self.coefficients.shape[0])

    def __getitem__(self, index) -> Quaternion:
        i, j = index
        return Quaternion.from_coefficients(self.coefficients[i, j])

    def self_duality_defect(self) -> float:
        swapped = np.transpose(self.coefficients, (1, 0, 2)).copy()
        swapped[..., 1:] *= -1
        return float(np.max(np.abs(self.coefficients - swapped))) if self.n else 0.0

    def is_self_dual(self, tol: float = SELF_DUAL_TOL) -> bool:
        return self.self_duality_defect() <= tol

    def blocks(self) -> np.ndarray:
        """(n, n, 2, 2) array of phi(q_ij)."""
        return _phi_block(self.coefficients)


def phi_array(q: QuaternionMatrix) -> np.ndarray:
    n = q.n
    return q.blocks().transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)


def phi(q: QuaternionMatrix) -> ComplexMatrix:
    """2n x 2n complex matrix obtained by replacing every entry by its 2x2 block."""
    return ComplexMatrix(phi_array(q))


def _require_skew(a: np.ndarray) -> int:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"square matrix required, got shape {a.shape}")
    n = int(a.shape[0])
    if n % 2:
        raise ShapeError(f"Pfaffian needs an even dimension, got {n}")
    scale = max(1.0, float(np.max(np.abs(a)))) if n else 1.0
    asym = float(np.max(np.abs(a + a.T))) if n else 0.0
    if asym > SKEW_TOL * scale:
        raise DomainError(f"matrix is not skew-symmetric (max |A + A^T| = {asym:.3e})")
    return n


def pfaffian(matrix: MatrixLike) -> complex:
    """Pfaffian by Parlett-Reid reduction to tridiagonal form with row/column pivoting."""
    a = np.array(as_array(matrix), dtype=np.complex128)
    n = _require_skew(a)
    if n == 0:
        return 1.0 + 0j
    pf = 1.0 + 0j
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.abs(a[k + 1:, k]).argmax())
        if kp != k + 1:
            # symmetric interchange of k+1 and kp flips the sign
            tmp = a[k + 1, k:].copy()
            a[k + 1, k:] = a[kp, k:]
            a[kp, k:] = tmp
            tmp = a[k:, k + 1].copy()
            a[k:, k + 1] = a[k:, kp]
            a[k:, kp] = tmp
            pf = -pf
        if a[k + 1, k] == 0.0:
            return 0j
        pf *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2:] / a[k, k + 1]
            a[k + 2:, k + 2:] += np.outer(tau, a[k + 2:, k + 1])
            a[k + 2:, k + 2:] -= np.outer(a[k + 2:, k + 1], tau)
    return complex(pf)


def _permutation_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = perm[i]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def pfaffian_combinatorial(matrix: MatrixLike) -> complex:
    """(1 / (2^n n!)) sum over S_2n of sgn(s) prod A[s(2i-1), s(2i)]; dimension <= 6."""
    a = np.asarray(as_array(matrix), dtype=np.complex128)
    dim = _require_skew(a)
    if dim > MAX_COMBINATORIAL_DIM:
        raise DomainError(f"combinatorial Pfaffian limited to dimension {MAX_COMBINATORIAL_DIM}")
    half = dim // 2
    total = 0j
    for perm in itertools.permutations(range(dim)):
        term = complex(_permutation_sign(perm))
        for i in range(half):
            term *= a[perm[2 * i], perm[2 * i + 1]]
        total += term
    return total / (2**half * math.factorial(half))


def _cycles_largest_first(perm: Sequence[int]) -> List[List[int]]:
    """Cycles of ``perm`` each led by its largest element, ordered by decreasing leader."""
    seen = [False] * len(perm)
    cycles = []
    for leader in range(len(perm) - 1, -1, -1):
        if seen[leader]:
            continue
        cycle = [leader]
        seen[leader] = True
        i = perm[leader]
        while i != leader:
            cycle.append(i)
            seen[i] = True
            i = perm[i]
        cycles.append(cycle)
    return cycles


def moore_dyson_det(q: QuaternionMatrix) -> complex:
    """Moore-Dyson determinant by cycle expansion (n <= 7).

    det Q = sum over permutations of (-1)^(n - #cycles) times the ordered
    product of q_{a, s(a)} along each cycle, cycles starting at their largest
    index and taken in decreasing order of that index.
    """
    n = q.n
    if n > MAX_CYCLE_EXPANSION_N:
        raise DomainError(f"cycle expansion is factorial; n={n} exceeds {MAX_CYCLE_EXPANSION_N}")
    defect = q.self_duality_defect()
    if defect > SELF_DUAL_TOL:
        raise SelfDualityError(f"quaternion matrix is not self-dual (defect {defect:.3e})")
    if n == 0:
        return 1.0 + 0j

    blocks = q.blocks()
    eye = np.eye(2, dtype=np.complex128)
    total = np.zeros((2, 2), dtype=np.complex128)
    for perm in itertools.permutations(range(n)):
        cycles = _cycles_largest_first(perm)
        product = eye
        for cycle in cycles:
            for a in cycle:
                product = product @ blocks[a, perm[a]]
        sign = -1.0 if (n - len(cycles)) % 2 else 1.0
        total += sign * product

    value = Quaternion.from_matrix(total)
    if not value.is_scalar():
        raise SelfDualityError(
            f"cycle expansion left a non-scalar part {max(abs(value.q1), abs(value.q2), abs(value.q3)):.3e}"
        )
    return complex(value.q0)


def skew_embedding(q: QuaternionMatrix) -> np.ndarray:
    """Z phi(Q) with Z = diag([[0, 1], [-1, 0]], ...)."""
    n = q.n
    z = np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    return z @ phi_array(q)


def det_via_pfaffian(q: QuaternionMatrix) -> complex:
    """Moore-Dyson determinant as Pf(Z phi(Q)); polynomial cost, any n."""
    a = skew_embedding(q)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    asym = float(np.max(np.abs(a + a.T))) if a.size else 0.0
    if asym > SKEW_TOL * scale:
        raise SelfDualityError(f"Z phi(Q) is not skew-symmetric (max |A + A^T| = {asym:.3e})")
    if a.size == 0:
        return 1.0 + 0j
    return pfaffian(0.5 * (a - a.T))
