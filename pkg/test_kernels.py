import io
import math

import numpy as np
import pytest
from scipy import special

from clt_harness import predict_line_variance
from errors import DomainError
from kernels import (
    D_cc,
    D_rr,
    I_cc,
    I_rr,
    KernelContext,
    Regime,
    S_cc,
    S_rr,
    correlation,
    correlation_matrix,
    density_on,
    exact_real_count,
    exact_real_count_series,
    expected_real_count,
    finite_n_variance,
    kernel_block,
    kernel_G,
    kernel_table,
    log_kernel_G,
    log_partial_exp,
    log_srr_correction,
    lower_incomplete_gamma,
    partial_cosh,
    s2n,
    s2n_gamma_discrepancy,
    variance_terms,
    write_kernel_table,
)
from observables import TestFunction
from quadrature import QuadratureOptions

CC = KernelContext(8, Regime.COMPLEX_COMPLEX)
RR = KernelContext(8, Regime.REAL_REAL)


def _direct_partial_exp(top, z):
    return np.exp(-z) * sum(z**j / math.factorial(j) for j in range(top + 1))


@pytest.mark.parametrize("z", [0.3 + 0.1j, 2.0 + 1.0j, -1.5 + 0.5j, 20.0, 12.0 - 9.0j])
def test_log_partial_exp_matches_direct_sum(z):
    value = np.exp(log_partial_exp(5, z))
    expected = _direct_partial_exp(5, z)
    assert abs(value - expected) <= 1e-12 * abs(expected)


def test_log_partial_exp_at_zero():
    assert log_partial_exp(10, 0.0) == 0.0


@pytest.mark.parametrize("n", [2, 8, 32])
def test_s2n_agrees_with_regularized_upper_gamma(n):
    x = np.linspace(0.1, 4.0 * n, 120)
    assert s2n_gamma_discrepancy(n, x) <= 1e-9


def test_s2n_bulk_error_is_order_one_over_n():
    halves = np.array([50, 100, 200, 400])
    u = np.linspace(0.05, 0.75, 200)
    gaps = np.array([np.max(np.abs(s2n(n, 2.0 * n * u) - 1.0)) for n in halves])
    fitted = float(np.sum(gaps / halves) / np.sum(1.0 / halves**2))
    assert fitted <= 5.0


def test_s2n_without_j0_drops_the_constant_term():
    z = 1.3
    assert s2n(4, z, False) == pytest.approx(s2n(4, z, True) - math.exp(-z), rel=1e-12)


def test_partial_cosh():
    w = 1.7
    expected = sum(w ** (2 * m) / math.factorial(2 * m) for m in range(3))
    assert partial_cosh(3, w).real == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("x", [0.5, 3.0, 20.0])
def test_lower_incomplete_gamma(x):
    expected = special.gammainc(3.5, x) * special.gamma(3.5)
    assert lower_incomplete_gamma(3.5, x) == pytest.approx(expected, rel=1e-10)


def test_lower_incomplete_gamma_domain():
    assert lower_incomplete_gamma(2.0, 0.0) == 0.0
    with pytest.raises(DomainError):
        lower_incomplete_gamma(0.0, 1.0)


def test_kernel_G_on_the_real_line():
    assert kernel_G(0.0, 0.0) == pytest.approx(1.0)


def test_kernel_G_symmetry_and_tail():
    z, w = 0.3 + 1.2j, -0.7 + 0.4j
    assert kernel_G(z, w) == pytest.approx(kernel_G(w, z), rel=1e-15)
    assert kernel_G(z, z) == pytest.approx(special.erfc(math.sqrt(2.0) * 1.2), rel=1e-12)
    # erfc(x) ~ e^{-x^2} / (sqrt(pi) x)
    x = 5.0 * math.sqrt(2.0)
    assert log_kernel_G(5j, 5j) == pytest.approx(-x * x - math.log(math.sqrt(math.pi) * x), rel=1e-3)
    assert np.isfinite(log_kernel_G(40j, 40j))


def test_exact_real_count_closed_forms():
    assert exact_real_count(1) == 1.0
    assert exact_real_count(2) == pytest.approx(math.sqrt(2.0))
    assert exact_real_count(3) == pytest.approx(1.0 + 1.0 / math.sqrt(2.0))
    assert exact_real_count(4) == pytest.approx(11.0 * math.sqrt(2.0) / 8.0, rel=1e-15)
    with pytest.raises(DomainError):
        exact_real_count_series(0)


def test_real_count_grows_like_sqrt_dimension():
    N = 400
    # E_N = sqrt(2N/pi) + 1/2 + O(N^{-1/2})
    assert exact_real_count(N) - math.sqrt(2.0 * N / math.pi) == pytest.approx(0.5, abs=0.05)


@pytest.mark.parametrize("n", [2, 8])
def test_integrated_real_density_matches_exact_count(n):
    assert expected_real_count(n) == pytest.approx(exact_real_count(2 * n), rel=1e-6)


def test_complex_entries_need_the_upper_half_plane():
    with pytest.raises(DomainError):
        S_cc(CC, 0.5, 1.0j)
    with pytest.raises(DomainError):
        D_cc(CC, 1.0j, -0.2j)


def test_regime_mismatch_raises():
    with pytest.raises(DomainError):
        S_rr(CC, 0.1, 0.2)
    with pytest.raises(DomainError):
        S_cc(RR, 1j, 1j)


def test_complex_entries_skew():
    z, w = 0.4 + 1.1j, -0.3 + 0.6j
    assert D_cc(CC, z, w) == pytest.approx(-D_cc(CC, w, z), rel=1e-12)
    assert I_cc(CC, z, w) == pytest.approx(-I_cc(CC, w, z), rel=1e-12)
    assert D_cc(CC, z, z) == 0.0


def test_real_entries_skew():
    x, y = 0.7, -1.3
    assert D_rr(RR, x, y) == pytest.approx(-D_rr(RR, y, x), rel=1e-12)
    assert I_rr(RR, x, y) == pytest.approx(-I_rr(RR, y, x), rel=1e-12)
    assert I_rr(RR, x, x) == 0.0


@pytest.mark.parametrize("x,y", [(0.7, -1.3), (2.5, 0.4), (-3.0, -1.0), (0.0, 1.8)])
def test_I_rr_series_matches_quadrature(x, y):
    assert I_rr(RR, x, y) == pytest.approx(I_rr(RR, x, y, method="quadrature"), abs=1e-9)


def test_I_rr_unknown_method():
    with pytest.raises(DomainError):
        I_rr(RR, 0.1, 0.2, method="trapezoid")


def test_real_density_at_origin():
    assert S_rr(RR, 0.0, 0.0) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=1e-14)


def test_bulk_densities():
    n = 32
    cc = KernelContext(n, Regime.COMPLEX_COMPLEX)
    rr = KernelContext(n, Regime.REAL_REAL)
    assert density_on(cc, np.array([0.5j]))[0] == pytest.approx(2 * n / math.pi, rel=0.03)
    assert density_on(rr, np.array([0.3]))[0] == pytest.approx(math.sqrt(2 * n) / math.sqrt(2 * math.pi), rel=1e-6)


def test_complex_entries_stay_finite_at_large_dimension():
    ctx = KernelContext(2000, Regime.COMPLEX_COMPLEX)
    p = ctx.scale * (0.3 + 0.5j)
    value = S_cc(ctx, p, p)
    assert np.isfinite(value)
    assert value.real > 0.0


def test_one_point_correlation_is_the_density():
    assert correlation(RR, [0.3]) == pytest.approx(S_rr(RR, 0.3, 0.3), rel=1e-12)
    assert correlation(CC, [0.2 + 0.9j]) == pytest.approx(S_cc(CC, 0.2 + 0.9j, 0.2 + 0.9j).real, rel=1e-12)


@pytest.mark.parametrize(
    "ctx,x,y,S,D,I",
    [
        (RR, 0.3, 1.1, S_rr, D_rr, I_rr),
        (CC, 0.2 + 0.9j, -0.4 + 1.3j, S_cc, D_cc, I_cc),
    ],
)
def test_two_point_correlation_closed_form(ctx, x, y, S, D, I):
    expected = S(ctx, x, x) * S(ctx, y, y) - D(ctx, x, y) * I(ctx, x, y) - S(ctx, x, y) * S(ctx, y, x)
    assert correlation(ctx, [x, y]) == pytest.approx(complex(expected).real, rel=1e-10)


def test_two_point_correlation_is_nonnegative_in_the_bulk():
    rng = np.random.Generator(np.random.Philox(key=21))
    real_pairs = RR.scale * rng.uniform(-0.9, 0.9, size=(200, 2))
    radius = 0.9 * np.sqrt(rng.uniform(0.01, 1.0, size=(200, 2)))
    angle = rng.uniform(0.05 * math.pi, 0.95 * math.pi, size=(200, 2))
    complex_pairs = CC.scale * radius * np.exp(1j * angle)
    assert min(correlation(RR, list(p)) for p in real_pairs) >= -1e-9
    assert min(correlation(CC, list(p)) for p in complex_pairs) >= -1e-9


@pytest.mark.parametrize("ctx,x,y", [(RR, 0.3, -1.2), (CC, 0.2 + 0.9j, -0.4 + 1.3j)])
def test_kernel_block_is_the_off_diagonal_block(ctx, x, y):
    block = kernel_block(ctx, x, y)
    assert np.allclose(block.matrix(), correlation_matrix(ctx, [x, y])[0:2, 2:4], rtol=1e-13, atol=0.0)


def test_real_correction_term_decays_exponentially_in_the_bulk():
    halves = np.array([25, 50, 100, 200])
    logs = []
    for n in halves:
        s = math.sqrt(2 * n)
        logs.append(float(log_srr_correction(KernelContext(n, Regime.REAL_REAL), s * 0.3, s * 0.5)))
    logs = np.array(logs)
    assert np.all(np.diff(logs) < 0.0)
    assert np.polyfit(halves, logs, 1)[0] < -1.0
    ctx = KernelContext(2, Regime.REAL_REAL)
    assert log_srr_correction(ctx, 0.0, 0.5) == -np.inf


def test_coincident_points_repel():
    assert correlation(RR, [0.5, 0.5]) == pytest.approx(0.0, abs=1e-10)
    assert correlation(CC, [0.4 + 1j, 0.4 + 1j]) == pytest.approx(0.0, abs=1e-10)


def test_correlation_point_limit():
    with pytest.raises(DomainError):
        correlation(RR, [0.1 * k for k in range(7)])
    with pytest.raises(DomainError):
        correlation(RR, [])


def test_kernel_table_rows_and_csv():
    rows = kernel_table(RR, [-1.0, 0.0, 0.5])
    assert len(rows) == 9
    out = io.StringIO()
    write_kernel_table(rows, out)
    lines = out.getvalue().splitlines()
    assert lines[0] == "x,y,S,D,I"
    assert len(lines) == 10


COARSE = QuadratureOptions(nodes_2d=24, pair_nodes=12, nodes_1d=60, pair_nodes_1d=40)


def test_variance_terms_positive_and_quadratic_in_amplitude():
    ctx = KernelContext(4, Regime.COMPLEX_COMPLEX, quadrature=COARSE)
    f = TestFunction("upper-half-bump", 0.5j, 0.3)
    terms = variance_terms(ctx, f)
    assert terms.total > 0.0
    doubled = variance_terms(ctx, f.scaled(2.0))
    assert doubled.total == pytest.approx(4.0 * terms.total, rel=1e-12)
    assert set(terms.to_dict()) == {"diagonal", "di", "ss", "total"}


def test_variance_terms_real_regime():
    ctx = KernelContext(4, Regime.REAL_REAL, quadrature=COARSE)
    terms = variance_terms(ctx, TestFunction("interval-bump", 0.0, 0.5))
    assert terms.total > 0.0


def test_real_variance_grows_like_sqrt_n():
    f = TestFunction("interval-bump", 0.0, 0.5)
    value = finite_n_variance(KernelContext(400, Regime.REAL_REAL), f)
    assert value / math.sqrt(400) == pytest.approx(predict_line_variance(f), rel=0.10)


def test_variance_terms_family_checks():
    with pytest.raises(DomainError):
        variance_terms(KernelContext(4, Regime.COMPLEX_COMPLEX), TestFunction("interval-bump", 0.0, 0.5))
    with pytest.raises(DomainError):
        variance_terms(KernelContext(4, Regime.REAL_REAL), TestFunction("disc-bump", 0j, 0.5))
    zero = TestFunction("upper-half-bump", 0.5j, 0.3, amplitude=0.0)
    assert variance_terms(KernelContext(4, Regime.COMPLEX_COMPLEX), zero).total == 0.0


def test_context_validation():
    with pytest.raises(DomainError):
        KernelContext(1)
    with pytest.raises(ValueError):
        KernelContext(4, "mixed")
    assert KernelContext(4).dim == 8
