"""Girko hermitization and the deterministic singular-value law of M - z.

``hermitize`` builds the Hermitian block matrix W(z) = [[0, M - z], [(M - z)*, 0]]
(divided by sqrt(n) in the "scaled" normalization). ``classical_density`` is
the density p_c(x, z) of the squared singular values of M - z for M carrying
the n^{-1/2} scaling: it is read off the Stieltjes branch m_c of the cubic

    w m^3 + 2 w m^2 + (w + 1 - |z|^2) m + 1 = 0,

which is m^{-1} = -w (1 + m) + |z|^2 (1 + m)^{-1} cleared of denominators.
"""

from __future__ import annotations

import csv
import logging
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, TextIO, Tuple, Union

import numpy as np
from scipy import optimize

from errors import ConvergenceError, DomainError, ShapeError
from linalg_core import ComplexMatrix, MatrixLike, as_array, eigenvalues_complex, eigenvalues_hermitian, shifted_logabsdet
from observables import TestFunction
from quadrature import QuadratureOptions, gauss_legendre, tensor_grid

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-9
RESIDUAL_TOL = 1e-12
CDF_TOL = 1e-8
MASS_TOL = 1e-6
RIGIDITY_MAX_Z = 0.8
CDF_PANELS = 64
CDF_NODES = 16


@dataclass(frozen=True)
class HermitizedMatrix:
    base_dim: int
    z: complex
    W: ComplexMatrix
    normalization: str = "scaled"
    _eigenvalues: list = field(default_factory=list, repr=False, compare=False)

    def eigenvalues(self) -> np.ndarray:
        """Ascending spectrum of W (computed once)."""
        if not self._eigenvalues:
            self._eigenvalues.append(eigenvalues_hermitian(self.W))
        return self._eigenvalues[0]

    def positive_eigenvalues(self) -> np.ndarray:
        """The upper half of the +/- pairs (singular values of the block), ascending."""
        return np.sort(np.abs(self.eigenvalues()[self.base_dim:]))


def hermitize(matrix: MatrixLike, z: complex, normalization: str = "scaled", check_symmetry: Optional[bool] = None) -> HermitizedMatrix:
    """2n x 2n Hermitian embedding of M - z.

    ``normalization="scaled"`` divides by sqrt(n); ``"unit"`` leaves M - z as
    is, which is what a matrix already carrying n^{-1/2} wants.
    """
    m = as_array(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"square matrix required, got shape {m.shape}")
    if normalization not in ("scaled", "unit"):
        raise DomainError(f"normalization must be 'scaled' or 'unit', got {normalization!r}")
    n = int(m.shape[0])
    a = m.astype(np.complex128) - complex(z) * np.eye(n)
    if normalization == "scaled":
        a = a / math.sqrt(n)
    w = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    w[:n, n:] = a
    w[n:, :n] = a.conj().T
    herm = HermitizedMatrix(base_dim=n, z=complex(z), W=ComplexMatrix(w), normalization=normalization)

    if check_symmetry is None:
        check_symmetry = logger.isEnabledFor(logging.DEBUG)
    if check_symmetry:
        mu = herm.eigenvalues()
        gap = float(np.max(np.abs(mu + mu[::-1])))
        if gap > SYMMETRY_TOL * max(1.0, float(np.max(np.abs(mu)))):
            logger.warning(f"W(z) spectrum is not symmetric about 0 (gap {gap:.3e})")
    return herm


def stieltjes(herm: HermitizedMatrix, zeta: complex, trace_norm: str = "n") -> complex:
    """(1/n) tr (W - zeta)^{-1} from the spectrum of W.

    ``trace_norm="n"`` divides the 2n-term trace by n; ``"2n"`` gives the
    probability-normalised transform.
    """
    zeta = complex(zeta)
    if not zeta.imag > 0.0:
        raise DomainError(f"Stieltjes transform needs Im zeta > 0, got {zeta}")
    if trace_norm not in ("n", "2n"):
        raise DomainError(f"trace_norm must be 'n' or '2n', got {trace_norm!r}")
    mu = herm.eigenvalues()
    norm = herm.base_dim if trace_norm == "n" else 2 * herm.base_dim
    return complex(np.sum(1.0 / (mu - zeta)) / norm)


# --- Girko identity --------------------------------------------------------------


def _girko_box(f: TestFunction, domain: Optional[Tuple[float, float, float, float]]):
    if not f.is_bump:
        raise DomainError("the Girko identity needs a compactly supported test function")
    box = f.support_box()
    if domain is None:
        return box
    xmin, xmax, ymin, ymax = box
    dxmin, dxmax, dymin, dymax = domain
    if xmin < dxmin or xmax > dxmax or ymin < dymin or ymax > dymax:
        raise DomainError(f"support {box} of f exceeds the quadrature domain {domain}")
    return domain


def log_abs_char_poly(matrix: MatrixLike, points: np.ndarray, path: str = "spectrum") -> np.ndarray:
    """log |prod_j (z - lambda_j)| at each point, from the spectrum or from LU."""
    points = np.asarray(points, dtype=np.complex128)
    if path == "spectrum":
        lam = eigenvalues_complex(matrix).eigenvalues
        out = np.zeros(points.shape)
        for value in lam:
            out += np.log(np.abs(points - value))
        return out
    if path == "determinant":
        return shifted_logabsdet(matrix, points)
    raise DomainError(f"path must be 'spectrum' or 'determinant', got {path!r}")


def girko_reconstruct(
    f: TestFunction,
    matrix: MatrixLike,
    options: QuadratureOptions = QuadratureOptions(),
    path: str = "spectrum",
    domain: Optional[Tuple[float, float, float, float]] = None,
) -> float:
    """sum_j f(lambda_j) recovered as (1/2pi) int Laplacian(f)(z) log|prod_j (z - lambda_j)| d^2z."""
    box = _girko_box(f, domain)
    if f.amplitude == 0.0:
        return 0.0
    points, weights = tensor_grid(box, options.nodes_2d, options.panels_2d)
    lap = f.laplacian(points)
    keep = lap != 0.0
    with np.errstate(divide="ignore"):
        logdet = log_abs_char_poly(matrix, points[keep], path)
    if not np.all(np.isfinite(logdet)):
        logger.warning("quadrature node hit an eigenvalue; dropping it")
        finite = np.isfinite(logdet)
        logdet = np.where(finite, logdet, 0.0)
    logger.debug("Girko prefactor 1/(2 pi); the W-normalised form carries 1/(8 pi) with a log|det W| four times as large")
    return float(np.sum(weights[keep] * lap[keep] * logdet) / (2.0 * math.pi))


@dataclass(frozen=True)
class GirkoEstimate:
    value: float
    bound: float
    samples: int
    delta: float


def girko_monte_carlo(f: TestFunction, matrix: MatrixLike, samples: int, seed: int = 0, delta: float = 0.1, path: str = "spectrum") -> GirkoEstimate:
    """Uniform-sampling estimate of the Girko integral with its Chebyshev error bound.

    With probability at least 1 - delta the estimate is within
    sqrt(Var / (delta * samples)) of the integral.
    """
    if samples < 2:
        raise DomainError("need at least two sample points")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    xmin, xmax, ymin, ymax = _girko_box(f, None)
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    u = rng.random((samples, 2))
    points = (xmin + (xmax - xmin) * u[:, 0]) + 1j * (ymin + (ymax - ymin) * u[:, 1])
    area = (xmax - xmin) * (ymax - ymin)
    with np.errstate(divide="ignore"):
        logdet = log_abs_char_poly(matrix, points, path)
    logdet = np.where(np.isfinite(logdet), logdet, 0.0)
    summands = area * f.laplacian(points) * logdet / (2.0 * math.pi)
    value = float(np.mean(summands))
    bound = math.sqrt(float(np.var(summands, ddof=1)) / (delta * samples))
    return GirkoEstimate(value=value, bound=bound, samples=samples, delta=delta)


# --- m_c, p_c and classical positions --------------------------------------------------


def _cubic_roots(w: np.ndarray, z2: float) -> np.ndarray:
    """Roots of w m^3 + 2 w m^2 + (w + 1 - z2) m + 1 along a trailing axis of length 3."""
    w = np.asarray(w, dtype=np.complex128)
    comp = np.zeros(w.shape + (3, 3), dtype=np.complex128)
    comp[..., 0, 0] = -2.0
    comp[..., 0, 1] = -(w + 1.0 - z2) / w
    comp[..., 0, 2] = -1.0 / w
    comp[..., 1, 0] = 1.0
    comp[..., 2, 1] = 1.0
    return np.linalg.eigvals(comp)


def _mc_residual(m: np.ndarray, w: np.ndarray, z2: float) -> np.ndarray:
    return 1.0 / m + w * (1.0 + m) - z2 / (1.0 + m)


def _polish(m: np.ndarray, w: np.ndarray, z2: float, steps: int = 8) -> np.ndarray:
    for _ in range(steps):
        f = _mc_residual(m, w, z2)
        df = -1.0 / m**2 + w + z2 / (1.0 + m) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(df != 0.0, f / df, 0.0)
        m = m - step
    return m


def solve_mc(w, z: complex):
    """Stieltjes branch m_c(w, z) (Im m_c > 0) for Im w > 0; vectorised over w."""
    w_arr = np.asarray(w, dtype=np.complex128)
    if np.any(w_arr.imag <= 0.0):
        raise DomainError("solve_mc needs Im w > 0")
    z2 = abs(complex(z)) ** 2
    roots = _cubic_roots(w_arr, z2)
    pick = np.take_along_axis(roots, np.argmax(roots.imag, axis=-1)[..., None], axis=-1)[..., 0]
    if np.any(pick.imag <= 0.0):
        raise DomainError("no root of the m_c cubic lies in the upper half-plane")
    m = _polish(pick, w_arr, z2)
    residual = np.abs(_mc_residual(m, w_arr, z2))
    if np.any(residual > RESIDUAL_TOL * np.maximum(1.0, np.abs(1.0 / m))):
        logger.warning(f"m_c residual {float(np.max(residual)):.3e} above {RESIDUAL_TOL}")
    return m[()] if m.ndim == 0 else m


def spectral_edges(z: complex) -> Tuple[float, float]:
    """Support [lower, upper] of p_c(., z)."""
    r2 = abs(complex(z)) ** 2
    alpha = math.sqrt(1.0 + 8.0 * r2)
    upper = (alpha + 3.0) ** 3 / (8.0 * (alpha + 1.0))
    lower = 0.0 if r2 <= 1.0 else (alpha - 3.0) ** 3 / (8.0 * (alpha - 1.0))
    return max(0.0, lower), upper


def classical_density(x, z: complex):
    """p_c(x, z): Im m_c(x + i0, z) / pi, zero outside the support.

    Inside the support the real cubic at w = x has one conjugate pair; the
    boundary value of m_c is the member with Im m > 0.
    """
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(x_arr.shape)
    lower, upper = spectral_edges(z)
    inside = (x_arr > lower) & (x_arr < upper)
    if inside.any():
        w = x_arr[inside].astype(np.complex128)
        z2 = abs(complex(z)) ** 2
        roots = _cubic_roots(w, z2)
        m0 = np.take_along_axis(roots, np.argmax(roots.imag, axis=-1)[..., None], axis=-1)[..., 0]
        m0 = _polish(m0, w, z2)
        out[inside] = np.clip(m0.imag / math.pi, 0.0, None)
    if np.ndim(x) == 0:
        return float(out[0])
    return out.reshape(np.shape(x))


def hermitized_density(sigma, z: complex):
    """Density of the +/- spectrum of the unit-normalised W(z): |sigma| p_c(sigma^2, z)."""
    sigma = np.asarray(sigma, dtype=float)
    value = np.abs(sigma) * classical_density(sigma**2, z)
    return float(value) if np.ndim(value) == 0 else value


class _Cumulative:
    """CDF of p_c in the variable x = a + (b - a)(1 - cos t)/2, t in [0, pi]."""

    def __init__(self, z: complex) -> None:
        self.z = z
        self.a, self.b = spectral_edges(z)
        self.edges = np.linspace(0.0, math.pi, CDF_PANELS + 1)
        partial = np.array([self._panel(t0, t1) for t0, t1 in zip(self.edges[:-1], self.edges[1:])])
        self.cumulative = np.concatenate([[0.0], np.cumsum(partial)])
        self.total = float(self.cumulative[-1])

    def x_of(self, t: float) -> float:
        return self.a + (self.b - self.a) * (1.0 - math.cos(t)) / 2.0

    def _panel(self, t0: float, t1: float) -> float:
        if t1 <= t0:
            return 0.0
        t, w = gauss_legendre(t0, t1, CDF_NODES)
        x = self.a + (self.b - self.a) * (1.0 - np.cos(t)) / 2.0
        jac = (self.b - self.a) * np.sin(t) / 2.0
        return float(np.sum(w * classical_density(x, self.z) * jac))

    def at_t(self, t: float) -> float:
        k = min(int(np.searchsorted(self.edges, t, side="right")) - 1, CDF_PANELS - 1)
        return float(self.cumulative[k]) + self._panel(float(self.edges[k]), t)

    def at_x(self, x: float) -> float:
        if x <= self.a:
            return 0.0
        if x >= self.b:
            return self.total
        t = math.acos(1.0 - 2.0 * (x - self.a) / (self.b - self.a))
        return self.at_t(t)


def classical_cdf(x: float, z: complex) -> float:
    return _Cumulative(z).at_x(x)


def classical_positions(N: int, z: complex) -> np.ndarray:
    """gamma_j, j = 1..N, with int_0^{gamma_j} p_c(x, z) dx = j / N."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    cdf = _Cumulative(z)
    if abs(cdf.total - 1.0) > MASS_TOL:
        raise DomainError(f"p_c(., {z}) carries mass {cdf.total:.9f} instead of 1")
    positions = np.empty(N)
    lo = 0.0
    for j in range(1, N + 1):
        target = cdf.total * j / N
        if j == N:
            t = math.pi
        else:
            t = optimize.brentq(lambda s: cdf.at_t(s) - target, lo, math.pi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
        positions[j - 1] = cdf.x_of(t)
        lo = t
    if np.any(np.diff(positions) <= 0.0):
        raise ConvergenceError("classical positions are not strictly increasing")
    return positions


@dataclass(frozen=True)
class ClassicalProfile:
    z: complex
    grid: np.ndarray
    density: np.ndarray
    positions: np.ndarray

    def mass(self) -> float:
        return _Cumulative(self.z).total

    def to_dict(self) -> Dict[str, Any]:
        lower, upper = spectral_edges(self.z)
        return {
            "z": [self.z.real, self.z.imag],
            "support": [lower, upper],
            "grid_points": int(self.grid.size),
            "positions": int(self.positions.size),
        }


def classical_profile(z: complex, N: int, grid_points: int = 401) -> ClassicalProfile:
    lower, upper = spectral_edges(z)
    grid = np.linspace(lower, upper, grid_points)
    return ClassicalProfile(z=complex(z), grid=grid, density=classical_density(grid, z), positions=classical_positions(N, z))


def write_profile_csv(profile: ClassicalProfile, out: Optional[Union[str, TextIO]] = None) -> None:
    """``x,p_c`` rows followed by ``j,gamma_j`` rows."""
    if isinstance(out, str):
        with open(out, "w", newline="", encoding="utf-8") as f:
            write_profile_csv(profile, f)
        return
    writer = csv.writer(out if out is not None else sys.stdout, lineterminator="\n")
    writer.writerow(["x", "p_c"])
    for x, p in zip(profile.grid, profile.density):
        writer.writerow([repr(float(x)), repr(float(p))])
    writer.writerow(["j", "gamma_j"])
    for j, g in enumerate(profile.positions, start=1):
        writer.writerow([j, repr(float(g))])


@dataclass(frozen=True)
class RigidityReport:
    value: float
    excluded: int
    count: int

    def to_dict(self) -> Dict[str, Any]:
        return {"value": self.value, "excluded": self.excluded, "count": self.count}


def rigidity_diagnostic(matrix: MatrixLike, z: complex, positions: Optional[np.ndarray] = None) -> RigidityReport:
    """sum_j (log lambda_j(z) - log gamma_j(z)) over the squared singular values of M - z, paired by rank."""
    if abs(complex(z)) > RIGIDITY_MAX_Z:
        raise DomainError(f"rigidity diagnostic is restricted to |z| <= {RIGIDITY_MAX_Z}")
    herm = hermitize(matrix, z, normalization="unit", check_symmetry=False)
    squared = herm.positive_eigenvalues() ** 2
    n = herm.base_dim
    gamma = classical_positions(n, z) if positions is None else np.asarray(positions, dtype=float)
    if gamma.size != n:
        raise ShapeError(f"expected {n} classical positions, got {gamma.size}")
    keep = squared > 0.0
    excluded = int(n - np.count_nonzero(keep))
    if excluded:
        logger.info(f"rigidity diagnostic: {excluded} zero singular value(s) excluded at z={z}")
    value = float(np.sum(np.log(squared[keep]) - np.log(gamma[keep])))
    return RigidityReport(value=value, excluded=excluded, count=n)
