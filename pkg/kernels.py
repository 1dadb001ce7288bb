"""Correlation kernels of the real Ginibre ensemble and the finite-n variance.

Every kernel entry is a product of Gaussian factors, erfc factors and a
truncated exponential series whose pieces individually overflow long before
the product does (around 2n = 80). All of them are therefore assembled as a
single complex logarithm and exponentiated once.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, TextIO, Union

import numpy as np
from scipy import special

from errors import ConvergenceError, DomainError
from observables import TestFamily, TestFunction
from quadrature import QuadratureOptions, adaptive, gauss_legendre, tensor_grid
from quatpfaff import pfaffian

logger = logging.getLogger(__name__)

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
SQRT2 = math.sqrt(2.0)
EPS = 1e-17
FPMIN = 1e-300
MAX_ITER = 10000
SKEW_TOL = 1e-10
MAX_CORRELATION_POINTS = 6
BULK_CONSTANT = (2.0 - math.sqrt(2.0)) / math.sqrt(math.pi)


class Regime(str, enum.Enum):
    COMPLEX_COMPLEX = "complex-complex"
    REAL_REAL = "real-real"


@dataclass(frozen=True)
class KernelContext:
    """Kernel of a 2n x 2n real Ginibre matrix in one of the two pure regimes."""

    half_dim: int
    regime: Regime = Regime.COMPLEX_COMPLEX
    s2n_include_j0: bool = True
    quadrature: QuadratureOptions = field(default_factory=QuadratureOptions)

    def __post_init__(self) -> None:
        object.__setattr__(self, "regime", Regime(self.regime))
        if int(self.half_dim) != self.half_dim or self.half_dim < 2:
            raise DomainError(f"half_dim must be an integer >= 2, got {self.half_dim}")
        object.__setattr__(self, "half_dim", int(self.half_dim))

    @property
    def n(self) -> int:
        return self.half_dim

    @property
    def dim(self) -> int:
        return 2 * self.half_dim

    @property
    def scale(self) -> float:
        """sqrt(2n): maps unit-disc coordinates to kernel coordinates."""
        return math.sqrt(2.0 * self.half_dim)

    def require(self, regime: Regime) -> None:
        if self.regime is not regime:
            raise DomainError(f"operation needs the {regime.value} regime, context is {self.regime.value}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "half_dim": self.half_dim,
            "regime": self.regime.value,
            "s2n_include_j0": self.s2n_include_j0,
            "quadrature": self.quadrature.to_dict(),
        }


# --- truncated exponential series -------------------------------------------------


def _tail_series(z: np.ndarray, top: int) -> np.ndarray:
    # sum_k z^k (top+1)! / (top+1+k)!
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(1, MAX_ITER):
        term = term * z / (top + 1 + k)
        total = total + term
        if np.all(np.abs(term) <= EPS * np.abs(total)):
            return total
    raise ConvergenceError(f"tail series of the order-{top} exponential sum did not converge")


def _head_series(z: np.ndarray, top: int) -> np.ndarray:
    # sum_{k=0}^{top} prod_{i<k} (top - i) / z, i.e. the partial sum read from its last term
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(1, top + 1):
        term = term * (top - k + 1) / z
        total = total + term
        if np.all(np.abs(term) <= EPS * np.abs(total)):
            break
    return total


def _log_one_minus_exp(log_t: np.ndarray) -> np.ndarray:
    out = np.empty_like(log_t)
    big = log_t.real > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        out[big] = log_t[big] + np.log(np.exp(-log_t[big]) - 1.0)
        out[~big] = np.log1p(-np.exp(log_t[~big]))
    return out


def log_partial_exp(top: int, z) -> np.ndarray:
    """log(e^{-z} sum_{j=0}^{top} z^j / j!) for complex z, principal branch.

    Inside |z| < top + 1 the value is 1 minus the (convergent) tail; outside
    it the sum is read backwards from its largest term.
    """
    z = np.asarray(z, dtype=np.complex128)
    flat = z.ravel()
    out = np.zeros(flat.shape, dtype=np.complex128)
    r = np.abs(flat)
    tail = (r > 0.0) & (r < top + 1)
    head = r >= top + 1
    if tail.any():
        zt = flat[tail]
        log_t = -zt + (top + 1) * np.log(zt) - special.gammaln(top + 2) + np.log(_tail_series(zt, top))
        out[tail] = _log_one_minus_exp(log_t)
    if head.any():
        zh = flat[head]
        out[head] = -zh + top * np.log(zh) - special.gammaln(top + 1) + np.log(_head_series(zh, top))
    return out.reshape(z.shape)


def log_s2n(n: int, z, include_j0: bool = True) -> np.ndarray:
    """log s_2n(z), s_2n(z) = e^{-z} sum_{j=j0}^{2n-2} z^j / j!."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    log_s = log_partial_exp(2 * n - 2, z)
    if include_j0:
        return log_s
    z = np.asarray(z, dtype=np.complex128)
    with np.errstate(divide="ignore", invalid="ignore"):
        return log_s + np.log1p(-np.exp(-z - log_s))


def s2n(n: int, z, include_j0: bool = True):
    value = np.exp(log_s2n(n, z, include_j0))
    return value[()] if np.ndim(value) == 0 else value


def s2n_gamma_discrepancy(n: int, x: np.ndarray) -> float:
    """Largest relative gap between s_2n and Q(2n-1, x) over real positive x."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("incomplete-gamma cross-check needs x > 0")
    ours = np.exp(log_s2n(n, x)).real
    reference = special.gammaincc(2 * n - 1, x)
    mask = reference > 1e-250
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(ours[mask] - reference[mask]) / reference[mask]))


def partial_cosh(n: int, w) -> np.ndarray:
    """sum_{m=0}^{n-1} w^{2m} / (2m)! as (E(w) + E(-w)) / 2, E the order-(2n-1) partial exponential."""
    w = np.asarray(w, dtype=np.complex128)
    plus = np.exp(w + log_partial_exp(2 * n - 1, w))
    minus = np.exp(-w + log_partial_exp(2 * n - 1, -w))
    return 0.5 * (plus + minus)


# --- incomplete gamma ----------------------------------------------------------------


def log_lower_incomplete_gamma(a: float, x: float) -> float:
    """log gamma(a, x): series below x = a + 1, Lentz continued fraction above."""
    if not a > 0.0 or x < 0.0:
        raise DomainError(f"lower incomplete gamma needs a > 0 and x >= 0, got a={a}, x={x}")
    if x == 0.0:
        return float("-inf")
    if x < a + 1.0:
        ap = a
        term = 1.0 / a
        total = term
        for _ in range(MAX_ITER):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * EPS:
                return -x + a * math.log(x) + math.log(total)
        raise ConvergenceError(f"incomplete gamma series failed for a={a}, x={x}")

    b = x + 1.0 - a
    c = 1.0 / FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < FPMIN:
            d = FPMIN
        c = b + an / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            log_upper = -x + a * math.log(x) + math.log(h)
            log_gamma_a = float(special.gammaln(a))
            return log_gamma_a + math.log1p(-math.exp(log_upper - log_gamma_a))
    raise ConvergenceError(f"incomplete gamma continued fraction failed for a={a}, x={x}")


def lower_incomplete_gamma(a: float, x: float) -> float:
    return math.exp(log_lower_incomplete_gamma(a, x))


# --- G and the complex/complex entries -------------------------------------------------


def _log_erfc(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        return np.where(x >= 0.0, np.log(special.erfcx(np.abs(x))) - x**2, np.log(special.erfc(x)))


def log_kernel_G(z, w) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    return 0.5 * (_log_erfc(SQRT2 * z.imag) + _log_erfc(SQRT2 * w.imag))


def kernel_G(z, w):
    """sqrt(erfc(sqrt2 Im z) erfc(sqrt2 Im w))."""
    value = np.exp(log_kernel_G(z, w))
    return value[()] if np.ndim(value) == 0 else value


def _upper_pair(ctx: KernelContext, z, w):
    ctx.require(Regime.COMPLEX_COMPLEX)
    z, w = np.broadcast_arrays(np.asarray(z, dtype=np.complex128), np.asarray(w, dtype=np.complex128))
    if np.any(z.imag <= 0.0) or np.any(w.imag <= 0.0):
        raise DomainError("complex/complex kernel entries need Im z > 0 and Im w > 0")
    return z, w


def _scalar(value: np.ndarray):
    return value[()] if np.ndim(value) == 0 else value


def S_cc(ctx: KernelContext, z, w):
    """i e^{-(z - conj w)^2 / 2} (conj w - z) G(z, w) s_2n(z conj w) / sqrt(2 pi)."""
    z, w = _upper_pair(ctx, z, w)
    wb = np.conj(w)
    log_rest = -0.5 * (z - wb) ** 2 - LOG_SQRT_2PI + log_kernel_G(z, w) + log_s2n(ctx.n, z * wb, ctx.s2n_include_j0)
    return _scalar(1j * (wb - z) * np.exp(log_rest))


def D_cc(ctx: KernelContext, z, w):
    z, w = _upper_pair(ctx, z, w)
    log_rest = -0.5 * (z - w) ** 2 - LOG_SQRT_2PI + log_kernel_G(z, w) + log_s2n(ctx.n, z * w, ctx.s2n_include_j0)
    return _scalar((w - z) * np.exp(log_rest))


def I_cc(ctx: KernelContext, z, w):
    z, w = _upper_pair(ctx, z, w)
    zb, wb = np.conj(z), np.conj(w)
    log_rest = -0.5 * (zb - wb) ** 2 - LOG_SQRT_2PI + log_kernel_G(z, w) + log_s2n(ctx.n, zb * wb, ctx.s2n_include_j0)
    return _scalar((zb - wb) * np.exp(log_rest))


# --- real/real entries ------------------------------------------------------------------


def _real_pair(ctx: KernelContext, x, y):
    ctx.require(Regime.REAL_REAL)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return x, y


def _log_main_rr(n: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # e^{-(x-y)^2/2} e^{-xy} sum_{m<=2n-2} (xy)^m / m!, as a complex log (xy may be negative)
    return -0.5 * (x - y) ** 2 - LOG_SQRT_2PI + log_partial_exp(2 * n - 2, x * y)


def _log_correction_factors(n: int, x: np.ndarray, y: np.ndarray):
    log_c = (n - 1.5) * math.log(2.0) - float(special.gammaln(2 * n - 1)) - LOG_SQRT_2PI
    with np.errstate(divide="ignore"):
        log_u = log_c - 0.5 * x**2 + (2 * n - 1) * np.log(np.abs(x))
    a = n - 0.5
    unique_y, inverse = np.unique(np.abs(y).ravel(), return_inverse=True)
    log_g = np.array([log_lower_incomplete_gamma(a, 0.5 * v * v) for v in unique_y])
    log_v = log_g[inverse].reshape(y.shape)
    return log_u, log_v


def log_srr_correction(ctx: KernelContext, x, y) -> np.ndarray:
    """log of |correction term| of S_rr (-inf where it vanishes)."""
    x, y = _real_pair(ctx, x, y)
    log_u, log_v = _log_correction_factors(ctx.n, x, y)
    return np.where((x == 0.0) | (y == 0.0), -np.inf, log_u + log_v)


def S_rr(ctx: KernelContext, x, y):
    """Real/real S entry including the 2^{n-3/2} x^{2n-1} gamma(n - 1/2, y^2/2) correction."""
    x, y = _real_pair(ctx, x, y)
    main = np.exp(_log_main_rr(ctx.n, x, y)).real
    correction = np.sign(x) * np.sign(y) * np.exp(log_srr_correction(ctx, x, y))
    return _scalar(main + correction)


def D_rr(ctx: KernelContext, x, y):
    x, y = _real_pair(ctx, x, y)
    return _scalar((y - x) * np.exp(_log_main_rr(ctx.n, x, y)).real)


def _poisson_weights(n: int, x: np.ndarray) -> np.ndarray:
    # e^{-x^2/2} (x^2/2)^m / m!, m = 0..n-1, on a trailing axis
    lam = 0.5 * np.asarray(x, dtype=float)[..., None] ** 2
    m = np.arange(n)
    return np.exp(special.xlogy(m, lam) - lam - special.gammaln(m + 1))


def _gamma_p_rows(n: int, y: np.ndarray) -> np.ndarray:
    m = np.arange(n)
    return special.gammainc(m + 0.5, 0.5 * np.asarray(y, dtype=float)[..., None] ** 2)


def _half_integral(n: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """e^{-x^2/2} / sqrt(2 pi) * int_0^y e^{-u^2/2} C_n(ux) du (signed in y).

    Expanding the partial cosh sum termwise gives
    (sgn y / 2) sum_m Poisson(m; x^2/2) P(m + 1/2, y^2/2).
    """
    return 0.5 * np.sign(y) * np.sum(_poisson_weights(n, x) * _gamma_p_rows(n, y), axis=-1)


def _half_integral_quadrature(n: int, x: float, y: float, nodes_per_unit: int = 16) -> float:
    if y == 0.0:
        return 0.0
    panels = max(1, int(math.ceil(abs(y))))
    u, w = gauss_legendre(min(0.0, y), max(0.0, y), nodes_per_unit, panels)
    # e^{-x^2/2 - u^2/2} C_n(ux) = (e^{-(x-u)^2/2} Q(ux) + e^{-(x+u)^2/2} Q(-ux)) / 2
    top = 2 * n - 1
    plus = np.exp(-0.5 * (x - u) ** 2 + log_partial_exp(top, u * x)).real
    minus = np.exp(-0.5 * (x + u) ** 2 + log_partial_exp(top, -u * x)).real
    value = float(np.sum(w * 0.5 * (plus + minus))) / math.sqrt(2.0 * math.pi)
    return value if y > 0.0 else -value


def I_rr(ctx: KernelContext, x, y, method: str = "series"):
    """Real/real I entry; ``method="quadrature"`` integrates the partial cosh sum directly."""
    x, y = _real_pair(ctx, x, y)
    if method == "series":
        value = _half_integral(ctx.n, x, y) - _half_integral(ctx.n, y, x)
    elif method == "quadrature":
        flat = [
            _half_integral_quadrature(ctx.n, a, b) - _half_integral_quadrature(ctx.n, b, a)
            for a, b in zip(x.ravel(), y.ravel())
        ]
        value = np.array(flat).reshape(x.shape)
    else:
        raise DomainError(f"unknown I_rr method {method!r}")
    return _scalar(value + 0.5 * np.sign(x - y))


# --- blocks, correlations, tables -------------------------------------------------------


@dataclass(frozen=True)
class KernelBlock:
    """[[D(x, y), S(x, y)], [-S(y, x), I(x, y)]]."""

    D: complex
    S: complex
    minus_S_swapped: complex
    I: complex

    def matrix(self) -> np.ndarray:
        return np.array([[self.D, self.S], [self.minus_S_swapped, self.I]], dtype=np.complex128)


def kernel_entries(ctx: KernelContext, x, y) -> Dict[str, np.ndarray]:
    """S(x, y), S(y, x), D(x, y), I(x, y) with broadcasting."""
    if ctx.regime is Regime.COMPLEX_COMPLEX:
        return {"S": S_cc(ctx, x, y), "S_swapped": S_cc(ctx, y, x), "D": D_cc(ctx, x, y), "I": I_cc(ctx, x, y)}
    return {"S": S_rr(ctx, x, y), "S_swapped": S_rr(ctx, y, x), "D": D_rr(ctx, x, y), "I": I_rr(ctx, x, y)}


def kernel_block(ctx: KernelContext, x, y) -> KernelBlock:
    e = kernel_entries(ctx, x, y)
    return KernelBlock(D=complex(e["D"]), S=complex(e["S"]), minus_S_swapped=-complex(e["S_swapped"]), I=complex(e["I"]))


def correlation_matrix(ctx: KernelContext, points: Sequence) -> np.ndarray:
    k = len(points)
    pts = np.asarray(points, dtype=np.complex128 if ctx.regime is Regime.COMPLEX_COMPLEX else float)
    xi, xj = np.meshgrid(pts, pts, indexing="ij")
    e = kernel_entries(ctx, xi, xj)
    out = np.zeros((2 * k, 2 * k), dtype=np.complex128)
    out[0::2, 0::2] = e["D"]
    out[0::2, 1::2] = e["S"]
    out[1::2, 0::2] = -np.asarray(e["S_swapped"])
    out[1::2, 1::2] = e["I"]
    return out


def correlation(ctx: KernelContext, points: Sequence) -> float:
    """k-point correlation function Pf[K(x_i, x_j)], k <= 6."""
    k = len(points)
    if not 1 <= k <= MAX_CORRELATION_POINTS:
        raise DomainError(f"correlation supports 1..{MAX_CORRELATION_POINTS} points, got {k}")
    mat = correlation_matrix(ctx, points)
    scale = max(1.0, float(np.max(np.abs(mat))))
    asym = float(np.max(np.abs(mat + mat.T)))
    if asym > SKEW_TOL * scale:
        raise ConvergenceError(f"kernel assembly is not skew-symmetric (defect {asym:.3e})")
    value = pfaffian(0.5 * (mat - mat.T))
    if abs(value.imag) > 1e-8 * max(1.0, abs(value.real)):
        logger.warning(f"correlation has imaginary part {value.imag:.3e}")
    return float(value.real)


def kernel_table(ctx: KernelContext, grid: Sequence) -> List[Dict[str, Any]]:
    """Rows x, y, S, D, I over every ordered pair of grid points."""
    rows = []
    for x in grid:
        for y in grid:
            block = kernel_block(ctx, x, y)
            rows.append({"x": x, "y": y, "S": block.S, "D": block.D, "I": block.I})
    return rows


def _fmt(value) -> str:
    value = complex(value)
    if value.imag == 0.0:
        return repr(value.real)
    return f"{value.real!r}{value.imag:+.17g}j"


def write_kernel_table(rows: List[Dict[str, Any]], out: Optional[Union[str, TextIO]] = None) -> None:
    if isinstance(out, str):
        with open(out, "w", newline="", encoding="utf-8") as f:
            write_kernel_table(rows, f)
        return
    writer = csv.writer(out if out is not None else sys.stdout, lineterminator="\n")
    writer.writerow(["x", "y", "S", "D", "I"])
    for row in rows:
        writer.writerow([_fmt(row[k]) for k in ("x", "y", "S", "D", "I")])


# --- variance ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VarianceTerms:
    """Var = diagonal - di - ss (each already carrying its n-dependent prefactor)."""

    diagonal: float
    di: float
    ss: float

    @property
    def total(self) -> float:
        return self.diagonal - self.di - self.ss

    @property
    def s_part(self) -> float:
        return self.diagonal - self.ss

    def to_dict(self) -> Dict[str, float]:
        return {"diagonal": self.diagonal, "di": self.di, "ss": self.ss, "total": self.total}


def _check_support(ctx: KernelContext, f: TestFunction) -> None:
    if ctx.regime is Regime.COMPLEX_COMPLEX:
        if f.family is not TestFamily.UPPER_HALF_BUMP:
            raise DomainError(f"complex/complex variance needs an upper-half bump, got {f.family.value}")
    elif f.family is not TestFamily.INTERVAL_BUMP:
        raise DomainError(f"real/real variance needs an interval bump, got {f.family.value}")


def pair_grid(ctx: KernelContext, f: TestFunction):
    """Nodes and weights used for every double integral over supp f."""
    opts = ctx.quadrature
    if ctx.regime is Regime.COMPLEX_COMPLEX:
        return tensor_grid(f.support_box(), opts.pair_nodes)
    a, b = f.support_interval()
    return gauss_legendre(a, b, opts.pair_nodes_1d)


def single_grid(ctx: KernelContext, f: TestFunction):
    opts = ctx.quadrature
    if ctx.regime is Regime.COMPLEX_COMPLEX:
        return tensor_grid(f.support_box(), opts.nodes_2d, opts.panels_2d)
    a, b = f.support_interval()
    return gauss_legendre(a, b, opts.nodes_1d)


def density_on(ctx: KernelContext, points: np.ndarray) -> np.ndarray:
    """One-point function at unit-disc points, in unit-disc measure (2n S or sqrt(2n) S)."""
    s = ctx.scale
    if ctx.regime is Regime.COMPLEX_COMPLEX:
        p = s * np.asarray(points, dtype=np.complex128)
        return 2.0 * ctx.n * np.real(S_cc(ctx, p, p))
    p = s * np.asarray(points, dtype=float)
    return s * np.asarray(S_rr(ctx, p, p))


def kernel_matrices(ctx: KernelContext, points: np.ndarray, chunk: int = 128) -> Dict[str, np.ndarray]:
    """S, D, I matrices at kernel coordinates sqrt(2n) * points, built in row chunks."""
    s = ctx.scale
    dtype = np.complex128 if ctx.regime is Regime.COMPLEX_COMPLEX else float
    p = s * np.asarray(points, dtype=dtype)
    size = p.shape[0]
    mats = {name: np.empty((size, size), dtype=np.complex128) for name in ("S", "D", "I")}
    for start in range(0, size, chunk):
        stop = min(size, start + chunk)
        rows = p[start:stop, None]
        if ctx.regime is Regime.COMPLEX_COMPLEX:
            mats["S"][start:stop] = S_cc(ctx, rows, p[None, :])
            mats["D"][start:stop] = D_cc(ctx, rows, p[None, :])
            mats["I"][start:stop] = I_cc(ctx, rows, p[None, :])
        else:
            mats["S"][start:stop] = S_rr(ctx, rows, p[None, :])
            mats["D"][start:stop] = D_rr(ctx, rows, p[None, :])
            mats["I"][start:stop] = I_rr(ctx, rows, p[None, :])
    return mats


def variance_terms(ctx: KernelContext, f: TestFunction) -> VarianceTerms:
    """Diagonal, D*I and S*S parts of the exact finite-n variance of sum f(lambda_j)."""
    _check_support(ctx, f)
    if f.amplitude == 0.0:
        return VarianceTerms(0.0, 0.0, 0.0)
    n = ctx.n
    measure = 2.0 * n if ctx.regime is Regime.COMPLEX_COMPLEX else ctx.scale

    nodes, weights = single_grid(ctx, f)
    fv = f.evaluate(nodes)
    diagonal = float(np.sum(weights * fv**2 * density_on(ctx, nodes)))

    pnodes, pweights = pair_grid(ctx, f)
    g = pweights * f.evaluate(pnodes) * measure
    mats = kernel_matrices(ctx, pnodes)
    di = float(np.real(g @ (mats["D"] * mats["I"]) @ g))
    ss = float(np.real(g @ (mats["S"] * mats["S"].T) @ g))
    logger.debug(f"variance terms n={n} regime={ctx.regime.value}: diag={diagonal:.6g} di={di:.6g} ss={ss:.6g}")
    return VarianceTerms(diagonal, di, ss)


def finite_n_variance(ctx: KernelContext, f: TestFunction) -> float:
    return variance_terms(ctx, f).total


# --- real eigenvalue counts ---------------------------------------------------------------


def expected_real_count(n: int, options: QuadratureOptions = QuadratureOptions()) -> float:
    """Integral of the real one-point function of a 2n x 2n real Ginibre matrix."""
    ctx = KernelContext(n, Regime.REAL_REAL, quadrature=options)
    s = ctx.scale
    delta = 10.0 / s

    def density(x: float) -> float:
        return float(s * S_rr(ctx, s * x, s * x))

    edge = 1.0 + delta
    # symmetric density; integrate [0, edge] and double
    return 2.0 * adaptive(density, 0.0, edge, options, points=[1.0])


def _double_factorial(k: int) -> int:
    return 1 if k <= 0 else math.prod(range(k, 0, -2))


def exact_real_count_series(N: int) -> Fraction:
    """Rational part of the closed form: E_N = sqrt2 * this (even N), 1 + sqrt2 * this (odd N)."""
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    if N % 2 == 0:
        return sum((Fraction(_double_factorial(4 * k - 1), _double_factorial(4 * k)) for k in range(N // 2)), Fraction(0))
    return sum(
        (Fraction(_double_factorial(4 * k - 3), _double_factorial(4 * k - 2)) for k in range(1, (N - 1) // 2 + 1)),
        Fraction(0),
    )


def exact_real_count(N: int) -> float:
    """Expected number of real eigenvalues of an N x N real Ginibre matrix."""
    series = float(exact_real_count_series(N))
    return SQRT2 * series if N % 2 == 0 else 1.0 + SQRT2 * series
