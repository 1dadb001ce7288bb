import io
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from clt_harness import (
    compositions,
    costin_lebowitz_cumulant,
    dirichlet_energy,
    fit_power_law,
    identity_aN,
    identity_bN,
    k_statistics,
    monte_carlo_map,
    monte_carlo_statistics,
    multinomial,
    normality_report,
    predict_bulk_variance,
    predict_ginue_variance,
    predict_line_variance,
    universality_compare,
    write_statistics_csv,
)
from ensembles import EnsembleSpec
from errors import DomainError, InsufficientSamplesError, ShapeError
from kernels import BULK_CONSTANT, KernelContext, Regime, density_on, variance_terms
from observables import TestFunction
from quadrature import QuadratureOptions, tensor_grid


def _normals(seed, size):
    return np.random.Generator(np.random.Philox(key=seed)).standard_normal(size)


# --- cumulants ----------------------------------------------------------------


def test_k_statistics_of_a_symmetric_sample():
    report = k_statistics(np.arange(1.0, 11.0), max_order=4)
    assert report.mean == pytest.approx(5.5)
    assert report.variance == pytest.approx(np.var(np.arange(1.0, 11.0), ddof=1))
    assert report.kappa(3) == pytest.approx(0.0, abs=1e-9)
    assert set(report.standard_errors) == {2, 3, 4}


def test_k_statistics_of_a_constant_sample():
    report = k_statistics(np.full(20, 3.0))
    assert report.mean == 3.0
    assert report.kappas[1:] == pytest.approx((0.0,) * 5, abs=1e-12)
    assert report.se(4) == 0.0


def test_k_statistics_of_normals():
    report = k_statistics(_normals(1, 20000))
    assert report.variance == pytest.approx(1.0, abs=0.05)
    assert abs(report.kappa(3)) <= 4 * report.se(3)
    assert abs(report.kappa(4)) <= 4 * report.se(4)
    assert len(report.kappas) == 6


def test_k_statistics_of_three_points():
    report = k_statistics([1.0, 2.0, 3.0], max_order=3)
    assert report.kappas == pytest.approx((2.0, 1.0, 0.0), abs=1e-12)
    assert math.isnan(report.se(3))
    assert math.isfinite(report.se(2))


def test_k_statistics_of_a_small_sample():
    report = k_statistics([1.0, 2.0, 4.0, 7.0], max_order=2)
    assert report.mean == pytest.approx(3.5)
    assert report.variance == pytest.approx(7.0)
    assert set(report.standard_errors) == {2}


def test_k_statistics_errors():
    with pytest.raises(InsufficientSamplesError):
        k_statistics([1.0, 2.0, 3.0])
    with pytest.raises(InsufficientSamplesError):
        k_statistics([1.0, 2.0, 3.0], max_order=4)
    with pytest.raises(InsufficientSamplesError):
        k_statistics([1.0], max_order=1)
    with pytest.raises(DomainError):
        k_statistics(np.arange(20.0), max_order=7)


def test_normality_report():
    report = k_statistics(_normals(2, 4000), max_order=4)
    assert normality_report(report, 1.0).passed
    wrong = normality_report(report, 2.0)
    assert not wrong.variance_ok
    assert not wrong.passed
    assert wrong.to_dict()["passed"] is False


def test_normality_report_needs_samples():
    with pytest.raises(InsufficientSamplesError):
        normality_report(None, 1.0)
    with pytest.raises(InsufficientSamplesError):
        normality_report(k_statistics(_normals(3, 999), max_order=4), 1.0)


# --- limiting variances ----------------------------------------------------------


def test_ginue_variance_of_re_z():
    sigma_a, sigma_b = predict_ginue_variance(TestFunction("harmonic-polynomial", degree=1))
    assert sigma_a == pytest.approx(0.25, rel=1e-10)
    assert sigma_b == pytest.approx(0.25, rel=1e-10)


def test_ginue_variance_of_re_z_squared():
    sigma_a, sigma_b = predict_ginue_variance(TestFunction("harmonic-polynomial", degree=2))
    assert sigma_a == pytest.approx(0.5, rel=1e-10)
    assert sigma_b == pytest.approx(0.5, rel=1e-10)


def test_ginue_variance_is_quadratic_in_amplitude():
    base = predict_ginue_variance(TestFunction("harmonic-polynomial", degree=3))
    doubled = predict_ginue_variance(TestFunction("harmonic-polynomial", degree=3, amplitude=2.0))
    assert doubled[0] == pytest.approx(4 * base[0], rel=1e-10)
    assert doubled[1] == pytest.approx(4 * base[1], rel=1e-10)


def test_interior_bump_has_no_boundary_term():
    sigma_a, sigma_b = predict_ginue_variance(TestFunction("disc-bump", 0.1j, 0.5))
    assert sigma_a > 0.0
    assert sigma_b == pytest.approx(0.0, abs=1e-20)


def test_bulk_variance_is_scale_invariant():
    small = predict_bulk_variance(TestFunction("upper-half-bump", 0.5j, 0.2))
    large = predict_bulk_variance(TestFunction("upper-half-bump", 0.5j, 0.3))
    assert small == pytest.approx(large, rel=1e-6)
    with pytest.raises(DomainError):
        predict_bulk_variance(TestFunction("disc-bump", 0j, 0.5))


def test_line_variance_constant():
    assert BULK_CONSTANT == pytest.approx(0.3305, abs=1e-4)
    f = TestFunction("interval-bump", 0.1, 0.5)
    norm, _ = integrate.quad(lambda x: float(f.evaluate(x)) ** 2, -0.4, 0.6)
    assert predict_line_variance(f) == pytest.approx(BULK_CONSTANT * norm, rel=1e-7)
    with pytest.raises(DomainError):
        predict_line_variance(TestFunction("upper-half-bump", 0.5j, 0.2))


def test_dirichlet_energy_of_re_z():
    assert dirichlet_energy(TestFunction("harmonic-polynomial")) == pytest.approx(math.pi, rel=1e-12)


# --- combinatorics ------------------------------------------------------------------


def test_multinomial():
    assert multinomial(4, [2, 2]) == 6
    assert multinomial(5, [1, 2, 2]) == 30
    assert multinomial(3, [3]) == 1
    with pytest.raises(DomainError):
        multinomial(4, [2, 1])
    with pytest.raises(DomainError):
        multinomial(2, [2, 0])
    with pytest.raises(DomainError):
        multinomial(65, [65])


def test_compositions():
    assert list(compositions(4, 2)) == [(1, 3), (2, 2), (3, 1)]
    assert list(compositions(3, 3)) == [(1, 1, 1)]
    assert len(list(compositions(6, 3))) == 10


def test_identity_aN():
    assert identity_aN(1) == 1
    for N in range(2, 11):
        assert identity_aN(N) == 0


def test_identity_bN():
    assert identity_bN(1) == 0
    assert identity_bN(2) == Fraction(-2)
    for N in range(3, 11):
        assert identity_bN(N) == 0
    with pytest.raises(DomainError):
        identity_bN(17)


# --- Costin-Lebowitz ------------------------------------------------------------------

COARSE = QuadratureOptions(nodes_2d=24, pair_nodes=12)


def test_costin_lebowitz_second_cumulant_is_the_s_part():
    ctx = KernelContext(4, Regime.COMPLEX_COMPLEX, quadrature=COARSE)
    f = TestFunction("upper-half-bump", 0.5j, 0.3)
    c2 = costin_lebowitz_cumulant(ctx, f, 2)
    assert c2 == pytest.approx(variance_terms(ctx, f).s_part, rel=1e-10)


def test_costin_lebowitz_first_cumulant_is_the_mean_count():
    ctx = KernelContext(4)
    f = TestFunction("upper-half-bump", 0.5j, 0.3)
    nodes, weights = tensor_grid(f.support_box(), 128, panels=4)
    mean = float(np.sum(weights * f.evaluate(nodes) * density_on(ctx, nodes)))
    assert costin_lebowitz_cumulant(ctx, f, 1) == pytest.approx(mean, rel=1e-5)
    assert mean > 0.0


def test_costin_lebowitz_limits():
    f = TestFunction("upper-half-bump", 0.5j, 0.3)
    with pytest.raises(DomainError):
        costin_lebowitz_cumulant(KernelContext(4), f, 4)
    with pytest.raises(DomainError):
        costin_lebowitz_cumulant(KernelContext(33), f, 2)
    with pytest.raises(DomainError):
        costin_lebowitz_cumulant(KernelContext(4, Regime.REAL_REAL), f, 2)
    with pytest.raises(DomainError):
        costin_lebowitz_cumulant(KernelContext(4), TestFunction("disc-bump", 0j, 0.5), 2)


# --- Monte Carlo --------------------------------------------------------------------------


def test_monte_carlo_map_is_independent_of_threads():
    spec = EnsembleSpec("real-gaussian", 8, master_seed=9)
    serial = monte_carlo_map(spec, lambda s: s.real_count, 12, threads=1)
    pooled = monte_carlo_map(spec, lambda s: s.real_count, 12, threads=3)
    assert serial == pooled
    with pytest.raises(DomainError):
        monte_carlo_map(spec, lambda s: 0, 0)


def test_monte_carlo_statistics_start_index():
    spec = EnsembleSpec("complex-gaussian", 6, master_seed=2)
    f = TestFunction("harmonic-polynomial")
    full = monte_carlo_statistics(spec, f, 6)
    tail = monte_carlo_statistics(spec, f, 3, start_index=3)
    assert np.array_equal(full[3:], tail)


def test_universality_of_identical_ensembles():
    spec = EnsembleSpec("real-gaussian", 4, master_seed=5)
    report = universality_compare(spec, spec, TestFunction("harmonic-polynomial"), 40)
    assert all(d == 0.0 for d in report.differences.values())
    assert report.ks_statistic == 0.0
    assert report.z_score(2) == 0.0
    assert set(report.to_dict()) == {"a", "b", "differences", "combined_se", "ks_statistic", "ks_pvalue"}


def test_universality_dimension_mismatch():
    with pytest.raises(ShapeError):
        universality_compare(
            EnsembleSpec("real-gaussian", 4),
            EnsembleSpec("matched-discrete-real", 6),
            TestFunction("harmonic-polynomial"),
            10,
        )


def test_fit_power_law():
    dims = np.array([8.0, 16.0, 32.0, 64.0])
    slope, prefactor = fit_power_law(dims, 3.0 * dims**-0.5)
    assert slope == pytest.approx(-0.5, abs=1e-12)
    assert prefactor == pytest.approx(3.0, rel=1e-12)
    with pytest.raises(DomainError):
        fit_power_law([8.0], [1.0])
    with pytest.raises(DomainError):
        fit_power_law([8.0, 16.0], [1.0, -1.0])


def test_write_statistics_csv():
    out = io.StringIO()
    write_statistics_csv([0.5, -1.25], out, start_index=4)
    assert out.getvalue().splitlines() == ["sample_index,value", "4,0.5", "5,-1.25"]
