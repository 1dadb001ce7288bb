"""Monte Carlo harness for linear-statistic CLTs.

Batches are computed over sample indices with a thread pool; ``executor.map``
returns results in index order, so every reduction below sees the same
sequence whatever the worker count.
"""

from __future__ import annotations

import csv
import dataclasses
import itertools
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
from scipy import stats

from ensembles import EnsembleSpec, sample_matrix
from errors import DomainError, InsufficientSamplesError, ShapeError
from kernels import BULK_CONSTANT, KernelContext, Regime, kernel_matrices, pair_grid, single_grid, density_on
from linalg_core import Spectrum, spectrum_of
from observables import TestFamily, TestFunction, linear_statistic
from quadrature import QuadratureOptions, circle_nodes, disc_grid, gauss_legendre, tensor_grid

logger = logging.getLogger(__name__)

__all__ = [
    "TestFamily",
    "TestFunction",
    "linear_statistic",
    "CumulantReport",
    "k_statistics",
    "predict_bulk_variance",
    "predict_line_variance",
    "predict_ginue_variance",
    "multinomial",
    "identity_aN",
    "identity_bN",
    "costin_lebowitz_cumulant",
    "universality_compare",
    "normality_report",
    "monte_carlo_map",
    "monte_carlo_statistics",
    "fit_power_law",
    "write_statistics_csv",
]

MIN_NORMALITY_SAMPLES = 1000
MAX_MULTINOMIAL_N = 64
MAX_IDENTITY_N = 16
MAX_CL_ORDER = 3
MAX_CL_HALF_DIM = 32


# --- cumulants --------------------------------------------------------------------------


@dataclass(frozen=True)
class CumulantReport:
    """k-statistics k1..k4 (unbiased), plug-in cumulants of order 5 and 6, jackknife SEs."""

    sample_count: int
    kappas: Tuple[float, ...]
    standard_errors: Dict[int, float] = field(default_factory=dict)

    def kappa(self, order: int) -> float:
        return self.kappas[order - 1]

    def se(self, order: int) -> float:
        return self.standard_errors[order]

    @property
    def mean(self) -> float:
        return self.kappas[0]

    @property
    def variance(self) -> float:
        return self.kappas[1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sample_count": self.sample_count,
            "kappa": {str(i + 1): k for i, k in enumerate(self.kappas)},
            "se": {str(k): v for k, v in self.standard_errors.items()},
        }


def _k_from_power_sums(n, s1, s2, s3, s4) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    k2 = (n * s2 - s1**2) / (n * (n - 1))
    k3 = (2 * s1**3 - 3 * n * s1 * s2 + n**2 * s3) / (n * (n - 1) * (n - 2))
    k4 = (
        -6 * s1**4
        + 12 * n * s1**2 * s2
        - 3 * n * (n - 1) * s2**2
        - 4 * n * (n + 1) * s1 * s3
        + n**2 * (n + 1) * s4
    ) / (n * (n - 1) * (n - 2) * (n - 3))
    return k2, k3, k4


def _jackknife_se(y: np.ndarray, max_order: int) -> Dict[int, float]:
    """Leave-one-out SEs of k2..k4; NaN where n - 1 samples cannot carry k_p."""
    n = y.size
    powers = [np.sum(y**p) for p in range(1, 5)]
    loo = [s - y**p for p, s in zip(range(1, 5), powers)]
    with np.errstate(divide="ignore", invalid="ignore"):
        estimates = _k_from_power_sums(float(n - 1), *loo)
    out = {}
    for order, theta in zip((2, 3, 4), estimates):
        if order > max_order:
            break
        if n - 1 < order:
            out[order] = math.nan
            continue
        out[order] = float(math.sqrt((n - 1) / n * np.sum((theta - theta.mean()) ** 2)))
    return out


def k_statistics(samples: Sequence[float], max_order: int = 6) -> CumulantReport:
    """Cumulant estimates up to ``max_order`` (at most 6)."""
    x = np.asarray(samples, dtype=float).ravel()
    if not 1 <= max_order <= 6:
        raise DomainError(f"max_order must be 1..6, got {max_order}")
    if x.size < max(2, max_order):
        raise InsufficientSamplesError(f"{x.size} samples are too few for cumulants up to order {max_order}")
    mean = float(np.mean(x))
    y = x - mean
    kappas: List[float] = [mean]
    for order in range(2, min(max_order, 4) + 1):
        kappas.append(float(stats.kstat(y, order)))
    if max_order >= 5:
        mu = {p: float(np.mean(y**p)) for p in range(2, 7)}
        kappas.append(mu[5] - 10 * mu[3] * mu[2])
        if max_order >= 6:
            kappas.append(mu[6] - 15 * mu[4] * mu[2] - 10 * mu[3] ** 2 + 30 * mu[2] ** 3)
    se = _jackknife_se(y, max_order)
    return CumulantReport(sample_count=int(x.size), kappas=tuple(kappas), standard_errors=se)


@dataclass(frozen=True)
class NormalityReport:
    predicted_variance: float
    kappa2: float
    tolerance: float
    variance_ok: bool
    kappa3_ok: bool
    kappa4_ok: bool
    kappa3_z: float
    kappa4_z: float

    @property
    def passed(self) -> bool:
        return self.variance_ok and self.kappa3_ok and self.kappa4_ok

    def to_dict(self) -> Dict[str, Any]:
        out = dataclasses.asdict(self)
        out["passed"] = self.passed
        return out


def normality_report(report: Optional[CumulantReport], predicted_variance: float, tol: float = 0.12) -> NormalityReport:
    """Variance within ``tol`` (relative) of the prediction; kappa3, kappa4 within 4 SE of zero."""
    if report is None or report.sample_count < MIN_NORMALITY_SAMPLES:
        count = 0 if report is None else report.sample_count
        raise InsufficientSamplesError(f"normality check needs >= {MIN_NORMALITY_SAMPLES} samples, got {count}")
    if len(report.kappas) < 4:
        raise InsufficientSamplesError("normality check needs cumulants up to order 4")
    k2, k3, k4 = report.kappa(2), report.kappa(3), report.kappa(4)
    se3, se4 = report.se(3), report.se(4)
    z3 = abs(k3) / se3 if se3 > 0 else (0.0 if k3 == 0 else math.inf)
    z4 = abs(k4) / se4 if se4 > 0 else (0.0 if k4 == 0 else math.inf)
    return NormalityReport(
        predicted_variance=float(predicted_variance),
        kappa2=k2,
        tolerance=tol,
        variance_ok=abs(k2 - predicted_variance) <= tol * abs(predicted_variance),
        kappa3_ok=z3 <= 4.0,
        kappa4_ok=z4 <= 4.0,
        kappa3_z=z3,
        kappa4_z=z4,
    )


# --- limiting variances ----------------------------------------------------------------


def _require_family(f: TestFunction, *families: TestFamily) -> None:
    if f.family not in families:
        names = ", ".join(fam.value for fam in families)
        raise DomainError(f"expected a test function of family {names}, got {f.family.value}")


def dirichlet_energy(f: TestFunction, options: QuadratureOptions = QuadratureOptions()) -> float:
    """int |grad f|^2 over the unit disc."""
    if f.family is TestFamily.HARMONIC_POLYNOMIAL:
        points, weights = disc_grid(0j, 1.0, max(32, f.degree + 8), max(64, 4 * f.degree + 8))
    else:
        points, weights = tensor_grid(f.support_box(), options.nodes_2d, options.panels_2d)
    return float(np.sum(weights * np.abs(f.gradient(points)) ** 2))


def predict_bulk_variance(f: TestFunction, options: QuadratureOptions = QuadratureOptions()) -> float:
    """(1/4pi) int (f_x^2 + f_y^2) for a bump in the upper half of the disc."""
    _require_family(f, TestFamily.UPPER_HALF_BUMP)
    return dirichlet_energy(f, options) / (4.0 * math.pi)


def predict_line_variance(f: TestFunction, options: QuadratureOptions = QuadratureOptions()) -> float:
    """((2 - sqrt2) / sqrt(pi)) int f(x)^2 dx for a bump on (-1, 1)."""
    _require_family(f, TestFamily.INTERVAL_BUMP)
    a, b = f.support_interval()
    x, w = gauss_legendre(a, b, options.nodes_1d)
    return BULK_CONSTANT * float(np.sum(w * f.evaluate(x) ** 2))


def boundary_fourier(f: TestFunction, truncation: int = 64, nodes: int = 512) -> np.ndarray:
    """Trapezoid-rule Fourier coefficients f_k, k = -truncation..truncation, of f on |z| = 1."""
    theta = circle_nodes(nodes)
    values = f.evaluate(np.exp(1j * theta))
    k = np.arange(-truncation, truncation + 1)
    return (np.exp(-1j * np.outer(k, theta)) @ values) / nodes


def predict_ginue_variance(
    f: TestFunction,
    options: QuadratureOptions = QuadratureOptions(),
    truncation: int = 64,
    nodes: int = 512,
) -> Tuple[float, float]:
    """(sigma_A^2, sigma_B^2): (1/4pi) int_D |grad f|^2 and (1/2) sum_k |k| |f_k|^2."""
    _require_family(f, TestFamily.DISC_BUMP, TestFamily.UPPER_HALF_BUMP, TestFamily.HARMONIC_POLYNOMIAL)
    sigma_a = dirichlet_energy(f, options) / (4.0 * math.pi)
    coeffs = boundary_fourier(f, truncation, nodes)
    k = np.arange(-truncation, truncation + 1)
    sigma_b = 0.5 * float(np.sum(np.abs(k) * np.abs(coeffs) ** 2))
    return sigma_a, sigma_b


# --- combinatorics ------------------------------------------------------------------------


def multinomial(N: int, parts: Sequence[int]) -> int:
    """N! / (k_1! ... k_m!)."""
    if any(int(k) != k or k < 1 for k in parts):
        raise DomainError(f"parts must be positive integers, got {list(parts)}")
    if sum(parts) != N:
        raise DomainError(f"parts {list(parts)} do not sum to {N}")
    if N > MAX_MULTINOMIAL_N:
        raise DomainError(f"N={N} exceeds {MAX_MULTINOMIAL_N}")
    out = math.factorial(N)
    for k in parts:
        out //= math.factorial(k)
    return out


def compositions(N: int, m: int) -> Iterator[Tuple[int, ...]]:
    """Ordered m-tuples of positive integers summing to N."""
    for cuts in itertools.combinations(range(1, N), m - 1):
        bounds = (0,) + cuts + (N,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(m))


def _signed_composition_sum(N: int, weight: Callable[[Tuple[int, ...]], int]) -> Fraction:
    if not 1 <= N <= MAX_IDENTITY_N:
        raise DomainError(f"N must be in 1..{MAX_IDENTITY_N}, got {N}")
    total = Fraction(0)
    for m in range(1, N + 1):
        inner = sum(multinomial(N, parts) * weight(parts) for parts in compositions(N, m))
        total += Fraction((-1) ** (m - 1), m) * inner
    return total


def identity_aN(N: int) -> Fraction:
    """sum_m ((-1)^{m-1}/m) sum_{k_1+..+k_m=N} N!/(k_1!..k_m!); 1 for N = 1, 0 beyond."""
    return _signed_composition_sum(N, lambda parts: 1)


def identity_bN(N: int) -> Fraction:
    """As identity_aN with the extra weight sum_{i != j} k_i k_j; -2 at N = 2, 0 beyond."""

    def cross(parts: Tuple[int, ...]) -> int:
        s = sum(parts)
        return s * s - sum(k * k for k in parts)

    return _signed_composition_sum(N, cross)


def costin_lebowitz_cumulant(ctx: KernelContext, f: TestFunction, k: int) -> float:
    """k-th cumulant of sum f(lambda_j) from cyclic products of the S kernel.

    C_k = sum_m ((-1)^{m-1}/m) sum_{k_1+..+k_m=k} (k!/prod k_h!)
          int prod_h f(z_h)^{k_h} S(z_1, z_2) ... S(z_m, z_1),
    each cyclic integral evaluated as tr prod_h (diag(f^{k_h} w) K).
    """
    if not 1 <= k <= MAX_CL_ORDER:
        raise DomainError(f"cumulant order must be 1..{MAX_CL_ORDER}, got {k}")
    ctx.require(Regime.COMPLEX_COMPLEX)
    if ctx.n > MAX_CL_HALF_DIM:
        raise DomainError(f"Costin-Lebowitz evaluation is limited to n <= {MAX_CL_HALF_DIM}")
    _require_family(f, TestFamily.UPPER_HALF_BUMP)

    nodes, weights = single_grid(ctx, f)
    fv = f.evaluate(nodes)
    rho = density_on(ctx, nodes)
    pnodes, pweights = pair_grid(ctx, f)
    pf = f.evaluate(pnodes)
    measure = pweights * 2.0 * ctx.n
    kernel = kernel_matrices(ctx, pnodes)["S"] if k > 1 else None

    total = 0.0
    for m in range(1, k + 1):
        inner = 0.0
        for parts in compositions(k, m):
            if m == 1:
                integral = float(np.sum(weights * fv ** parts[0] * rho))
            else:
                product = np.eye(pnodes.size, dtype=np.complex128)
                for kh in parts:
                    product = product @ ((measure * pf**kh)[:, None] * kernel)
                integral = float(np.real(np.trace(product)))
            inner += multinomial(k, parts) * integral
        total += (-1) ** (m - 1) / m * inner
    return total


# --- Monte Carlo ------------------------------------------------------------------------------


def monte_carlo_map(
    spec: EnsembleSpec,
    fn: Callable[[Spectrum], Any],
    count: int,
    threads: int = 1,
    start_index: int = 0,
) -> List[Any]:
    """fn(spectrum of sample i) for i in [start_index, start_index + count), in index order."""
    if count < 1:
        raise DomainError(f"count must be positive, got {count}")

    def one(index: int) -> Any:
        return fn(spectrum_of(sample_matrix(spec, index)))

    indices = range(start_index, start_index + count)
    if threads <= 1:
        return [one(i) for i in indices]
    with ThreadPoolExecutor(max_workers=threads, thread_name_prefix="LabWorker") as executor:
        return list(executor.map(one, indices))


def monte_carlo_statistics(
    spec: EnsembleSpec,
    f: TestFunction,
    count: int,
    threads: int = 1,
    normalization: str = "none",
    quarter_dim: str = "half",
    start_index: int = 0,
) -> np.ndarray:
    """Linear statistics of ``count`` independent samples."""
    logger.info(f"sampling {count} x {spec.atom.kind.value} matrices of dim {spec.dim} on {threads} thread(s)")
    values = monte_carlo_map(
        spec, lambda s: linear_statistic(f, s, normalization, quarter_dim), count, threads, start_index
    )
    return np.asarray(values, dtype=float)


@dataclass(frozen=True)
class UniversalityReport:
    report_a: CumulantReport
    report_b: CumulantReport
    differences: Dict[int, float]
    combined_se: Dict[int, float]
    ks_statistic: float
    ks_pvalue: float

    def z_score(self, order: int) -> float:
        se = self.combined_se[order]
        d = abs(self.differences[order])
        return d / se if se > 0 else (0.0 if d == 0 else math.inf)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "a": self.report_a.to_dict(),
            "b": self.report_b.to_dict(),
            "differences": {str(k): v for k, v in self.differences.items()},
            "combined_se": {str(k): v for k, v in self.combined_se.items()},
            "ks_statistic": self.ks_statistic,
            "ks_pvalue": self.ks_pvalue,
        }


def universality_compare(
    spec_a: EnsembleSpec,
    spec_b: EnsembleSpec,
    f: TestFunction,
    count: int,
    master_seed: Optional[int] = None,
    threads: int = 1,
) -> UniversalityReport:
    """Cumulant differences and a two-sample KS statistic between two ensembles."""
    if spec_a.dim != spec_b.dim:
        raise ShapeError(f"ensembles differ in dimension ({spec_a.dim} vs {spec_b.dim})")
    if master_seed is not None:
        spec_a = dataclasses.replace(spec_a, master_seed=master_seed)
        spec_b = dataclasses.replace(spec_b, master_seed=master_seed)
    values_a = monte_carlo_statistics(spec_a, f, count, threads)
    values_b = monte_carlo_statistics(spec_b, f, count, threads)
    report_a = k_statistics(values_a, 4)
    report_b = k_statistics(values_b, 4)
    diffs = {k: report_a.kappa(k) - report_b.kappa(k) for k in (2, 3, 4)}
    ses = {k: math.hypot(report_a.se(k), report_b.se(k)) for k in (2, 3, 4)}
    ks = stats.ks_2samp(values_a - values_a.mean(), values_b - values_b.mean())
    return UniversalityReport(report_a, report_b, diffs, ses, float(ks.statistic), float(ks.pvalue))


def fit_power_law(dims: Sequence[float], values: Sequence[float]) -> Tuple[float, float]:
    """Least-squares (exponent, prefactor) of values ~ prefactor * dims^exponent."""
    d = np.asarray(dims, dtype=float)
    v = np.asarray(values, dtype=float)
    if d.size < 2 or d.size != v.size:
        raise DomainError("need at least two (dim, value) pairs of equal length")
    if np.any(d <= 0) or np.any(v <= 0):
        raise DomainError("power-law fit needs positive dims and values")
    slope, intercept = np.polyfit(np.log(d), np.log(v), 1)
    return float(slope), float(math.exp(intercept))


def write_statistics_csv(values: Sequence[float], out: Optional[Union[str, TextIO]] = None, start_index: int = 0) -> None:
    """``sample_index,value`` rows."""
    if isinstance(out, str):
        with open(out, "w", newline="", encoding="utf-8") as f:
            write_statistics_csv(values, f, start_index)
        return
    writer = csv.writer(out if out is not None else sys.stdout, lineterminator="\n")
    writer.writerow(["sample_index", "value"])
    for i, v in enumerate(values, start=start_index):
        writer.writerow([i, repr(float(v))])
