"""Independent-entry random matrices.

Every matrix is a pure function of ``(master_seed, sample_index)``: the
per-sample seed comes from ``SeedSequence`` mixing and feeds a counter-based
Philox generator with one counter range per row, so parallel and serial
sampling produce the same bits and a larger dim extends a smaller one.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Any, Dict, Iterable, Optional, TextIO, Tuple, Union

import numpy as np

from errors import DomainError, ShapeError
from linalg_core import ComplexMatrix

logger = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)
MAX_SEED = 2**64 - 1

# Moments of the real standardised atoms, orders 0..4.
_GAUSSIAN_MOMENTS = (Fraction(1), Fraction(0), Fraction(1), Fraction(0), Fraction(3))
_THREE_POINT_MOMENTS = (Fraction(1), Fraction(0), Fraction(1), Fraction(0), Fraction(3))


class AtomKind(str, enum.Enum):
    COMPLEX_GAUSSIAN = "complex-gaussian"
    REAL_GAUSSIAN = "real-gaussian"
    MATCHED_DISCRETE_REAL = "matched-discrete-real"
    MATCHED_DISCRETE_COMPLEX = "matched-discrete-complex"

    @property
    def is_complex(self) -> bool:
        return self in (AtomKind.COMPLEX_GAUSSIAN, AtomKind.MATCHED_DISCRETE_COMPLEX)


@dataclass(frozen=True)
class AtomDistribution:
    """Entry law, mean zero with E|xi|^2 = ``variance`` (1 unless deliberately mismatched)."""

    kind: AtomKind
    variance: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", AtomKind(self.kind))
        if not (self.variance > 0.0 and math.isfinite(self.variance)):
            raise DomainError(f"atom variance must be positive and finite, got {self.variance}")

    @property
    def is_complex(self) -> bool:
        return self.kind.is_complex

    def draw(self, rng: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
        """Draw entries in row-major order; complex kinds interleave (re, im) per entry."""
        kind = self.kind
        if kind is AtomKind.REAL_GAUSSIAN:
            values = rng.standard_normal(shape)
        elif kind is AtomKind.MATCHED_DISCRETE_REAL:
            values = _three_point(rng.integers(0, 6, size=shape))
        elif kind is AtomKind.COMPLEX_GAUSSIAN:
            parts = rng.standard_normal(shape + (2,))
            values = (parts[..., 0] + 1j * parts[..., 1]) / math.sqrt(2.0)
        else:
            parts = _three_point(rng.integers(0, 6, size=shape + (2,)))
            values = (parts[..., 0] + 1j * parts[..., 1]) / math.sqrt(2.0)
        if self.variance != 1.0:
            values = values * math.sqrt(self.variance)
        return values

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "variance": self.variance}


def _three_point(faces: np.ndarray) -> np.ndarray:
    # {-sqrt3, 0, sqrt3} with probabilities {1/6, 2/3, 1/6}
    out = np.zeros(faces.shape)
    out[faces == 0] = -SQRT3
    out[faces == 5] = SQRT3
    return out


@dataclass(frozen=True)
class EnsembleSpec:
    atom: AtomDistribution
    dim: int
    master_seed: int = 0

    def __post_init__(self) -> None:
        if isinstance(self.atom, (str, AtomKind)):
            object.__setattr__(self, "atom", AtomDistribution(AtomKind(self.atom)))
        if int(self.dim) != self.dim or self.dim < 2:
            raise DomainError(f"dim must be an integer >= 2, got {self.dim}")
        if not 0 <= int(self.master_seed) <= MAX_SEED:
            raise DomainError(f"master_seed must fit in 64 unsigned bits, got {self.master_seed}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "master_seed", int(self.master_seed))

    @property
    def is_real(self) -> bool:
        return not self.atom.is_complex

    @property
    def scaling(self) -> float:
        return 1.0 / math.sqrt(self.dim)

    def require_even(self) -> None:
        if self.dim % 2:
            raise ShapeError(f"real-ensemble experiments work at even dimension 2n, got {self.dim}")

    def to_dict(self) -> Dict[str, Any]:
        return {"atom": self.atom.to_dict(), "dim": self.dim, "master_seed": self.master_seed}


def derive_sample_seed(master_seed: int, sample_index: int) -> int:
    """64-bit seed for one sample; distinct indices give independent streams."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(sample_index),))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def sample_generator(spec: EnsembleSpec, sample_index: int, row: int = 0) -> np.random.Generator:
    """Stream of one matrix row; the row index sits in the high counter words."""
    key = derive_sample_seed(spec.master_seed, sample_index)
    return np.random.Generator(np.random.Philox(key=key, counter=int(row) << 128))


def sample_matrix(spec: EnsembleSpec, sample_index: int) -> ComplexMatrix:
    """dim x dim matrix with i.i.d. atom entries scaled by dim^{-1/2}.

    The unscaled top-left k x k block is the same for every dim >= k.
    """
    rows = [spec.atom.draw(sample_generator(spec, sample_index, i), (spec.dim,)) for i in range(spec.dim)]
    return ComplexMatrix(np.stack(rows) * spec.scaling)


def _real_moment_row(kind: AtomKind) -> Tuple[Fraction, ...]:
    if kind in (AtomKind.REAL_GAUSSIAN, AtomKind.COMPLEX_GAUSSIAN):
        return _GAUSSIAN_MOMENTS
    return _THREE_POINT_MOMENTS


def _i_power(k: int) -> Tuple[int, int]:
    return ((1, 0), (0, 1), (-1, 0), (0, -1))[k % 4]


@dataclass(frozen=True)
class MomentTable:
    """Exact moments keyed by order (real kinds) or by (a, b) for E[xi^a conj(xi)^b]."""

    kind: AtomKind
    order: int
    values: Dict[Union[int, Tuple[int, int]], Fraction] = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]


def atom_moments(dist: AtomDistribution, order: int = 4) -> MomentTable:
    """Analytic moment table of an atom up to ``order`` (at most 4)."""
    if order not in (1, 2, 3, 4):
        raise DomainError(f"moment order must be 1..4, got {order}")
    v = Fraction(dist.variance)
    row = _real_moment_row(dist.kind)
    values: Dict[Union[int, Tuple[int, int]], Fraction] = {}

    if not dist.is_complex:
        for k in range(1, order + 1):
            values[k] = row[k] * v ** (k // 2) if k % 2 == 0 else Fraction(0)
        return MomentTable(dist.kind, order, values)

    # xi = sqrt(v/2) (A + iB), A and B i.i.d. with moment row ``row``
    for total in range(1, order + 1):
        for a in range(total + 1):
            b = total - a
            re, im = Fraction(0), Fraction(0)
            for p in range(a + 1):
                for q in range(b + 1):
                    weight = comb(a, p) * comb(b, q) * row[p + q] * row[total - p - q]
                    if weight == 0:
                        continue
                    r1, i1 = _i_power(a - p)
                    r2, i2 = _i_power(3 * (b - q))  # (-i)^k = i^{3k}
                    re += weight * (r1 * r2 - i1 * i2)
                    im += weight * (r1 * i2 + i1 * r2)
            if im != 0:
                raise ArithmeticError(f"moment ({a}, {b}) has a non-zero imaginary part")
            values[(a, b)] = re * (v / 2) ** (total // 2) if total % 2 == 0 else Fraction(0)
    return MomentTable(dist.kind, order, values)


def write_matrix_csv(matrices: Iterable[ComplexMatrix], out: Optional[Union[str, TextIO]] = None,
                     start_index: int = 0) -> int:
    """``sample_index,i,j,re,im`` rows (stdout when ``out`` is None); returns the row count."""
    if isinstance(out, str):
        with open(out, "w", newline="", encoding="utf-8") as f:
            return write_matrix_csv(matrices, f, start_index)
    writer = csv.writer(out if out is not None else sys.stdout, lineterminator="\n")
    writer.writerow(["sample_index", "i", "j", "re", "im"])
    rows = 0
    for index, matrix in enumerate(matrices, start=start_index):
        data = np.asarray(matrix.data, dtype=np.complex128)
        for (i, j), z in np.ndenumerate(data):
            writer.writerow([index, i, j, repr(float(z.real)), repr(float(z.imag))])
            rows += 1
    return rows
