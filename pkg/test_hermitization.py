import io
import math

import numpy as np
import pytest

from ensembles import EnsembleSpec, sample_matrix
from errors import DomainError, ShapeError
from hermitization import (
    classical_cdf,
    classical_density,
    classical_positions,
    classical_profile,
    girko_monte_carlo,
    girko_reconstruct,
    hermitize,
    hermitized_density,
    log_abs_char_poly,
    rigidity_diagnostic,
    solve_mc,
    spectral_edges,
    stieltjes,
    write_profile_csv,
)
from observables import TestFunction
from quadrature import QuadratureOptions, gauss_legendre

TRIANGULAR = np.array(
    [
        [0.3 + 0.4j, 0.2, -0.1j],
        [0.0, 0.5, 0.3],
        [0.0, 0.0, -0.2j],
    ]
)
EIGENVALUES = np.array([0.3 + 0.4j, 0.5, -0.2j])


def test_hermitized_spectrum_is_plus_minus_singular_values():
    m = np.diag([3.0, -1.0, 2.0j])
    herm = hermitize(m, 0.5, normalization="unit", check_symmetry=True)
    sigma = np.sort(np.abs(np.diag(m) - 0.5))
    assert np.allclose(herm.eigenvalues(), np.concatenate([-sigma[::-1], sigma]), atol=1e-12)
    assert np.allclose(herm.positive_eigenvalues(), sigma, atol=1e-12)


def test_scaled_normalization_divides_by_sqrt_n():
    m = np.diag([4.0, 8.0, 12.0, 16.0])
    scaled = hermitize(m, 0.0).positive_eigenvalues()
    unit = hermitize(m, 0.0, normalization="unit").positive_eigenvalues()
    assert np.allclose(scaled * 2.0, unit)


def test_hermitize_validation():
    with pytest.raises(ShapeError):
        hermitize(np.zeros((2, 3)), 0.0)
    with pytest.raises(DomainError):
        hermitize(np.eye(2), 0.0, normalization="sqrt")


def test_stieltjes_matches_resolvent_trace():
    m = sample_matrix(EnsembleSpec("complex-gaussian", 6, 2), 0)
    herm = hermitize(m, 0.1 + 0.2j, normalization="unit")
    zeta = 0.3 + 0.05j
    resolvent = np.linalg.inv(herm.W.data - zeta * np.eye(12))
    assert stieltjes(herm, zeta) == pytest.approx(np.trace(resolvent) / 6, rel=1e-10)
    assert stieltjes(herm, zeta, "2n") == pytest.approx(np.trace(resolvent) / 12, rel=1e-10)
    with pytest.raises(DomainError):
        stieltjes(herm, 0.3)


def test_log_abs_char_poly_paths_agree():
    points = np.array([0.1 + 0.1j, -0.6, 0.9j])
    a = log_abs_char_poly(TRIANGULAR, points, "spectrum")
    b = log_abs_char_poly(TRIANGULAR, points, "determinant")
    assert np.allclose(a, b, atol=1e-10)
    with pytest.raises(DomainError):
        log_abs_char_poly(TRIANGULAR, points, "qr")


def test_girko_reconstructs_linear_statistic():
    f = TestFunction("disc-bump", 0j, 0.7)
    exact = float(np.sum(f.evaluate(EIGENVALUES)))
    options = QuadratureOptions(nodes_2d=48, panels_2d=4)
    assert girko_reconstruct(f, TRIANGULAR, options) == pytest.approx(exact, abs=1e-3)
    via_lu = girko_reconstruct(f, TRIANGULAR, options, path="determinant")
    assert via_lu == pytest.approx(girko_reconstruct(f, TRIANGULAR, options), abs=1e-8)


def test_girko_domain_and_family_checks():
    f = TestFunction("disc-bump", 0j, 0.7)
    with pytest.raises(DomainError):
        girko_reconstruct(f, TRIANGULAR, domain=(-0.5, 0.5, -0.5, 0.5))
    with pytest.raises(DomainError):
        girko_reconstruct(TestFunction("harmonic-polynomial"), TRIANGULAR)


def test_girko_monte_carlo_within_bound():
    f = TestFunction("disc-bump", 0j, 0.7)
    exact = float(np.sum(f.evaluate(EIGENVALUES)))
    estimate = girko_monte_carlo(f, TRIANGULAR, samples=20000, seed=4, delta=0.1)
    assert estimate.bound > 0.0
    assert abs(estimate.value - exact) <= 3.0 * estimate.bound
    with pytest.raises(DomainError):
        girko_monte_carlo(f, TRIANGULAR, samples=1)
    with pytest.raises(DomainError):
        girko_monte_carlo(f, TRIANGULAR, samples=10, delta=1.0)


@pytest.mark.parametrize("z", [0.0, 0.5 + 0.3j, 1.4j])
def test_solve_mc_solves_the_cubic(z):
    w = np.array([0.5 + 0.1j, 2.0 + 1e-3j, -1.0 + 2.0j])
    m = solve_mc(w, z)
    z2 = abs(z) ** 2
    assert np.all(m.imag > 0.0)
    assert np.allclose(w * m**3 + 2 * w * m**2 + (w + 1 - z2) * m + 1, 0.0, atol=1e-10)
    with pytest.raises(DomainError):
        solve_mc(1.0, z)


def test_marchenko_pastur_at_the_origin():
    assert spectral_edges(0.0) == (0.0, pytest.approx(4.0))
    assert classical_density(1.0, 0.0) == pytest.approx(math.sqrt(3.0) / (2.0 * math.pi), rel=1e-8)
    assert classical_density(5.0, 0.0) == 0.0
    assert classical_cdf(2.0, 0.0) == pytest.approx(0.5 + 1.0 / math.pi, abs=1e-7)


def test_spectral_edges():
    assert spectral_edges(1.0) == (0.0, pytest.approx(6.75))
    lower, upper = spectral_edges(2.0)
    assert 0.0 < lower < upper
    assert classical_density(0.5 * lower, 2.0) == 0.0
    assert classical_density(0.5 * (lower + upper), 2.0) > 0.0


def test_hermitized_density_is_symmetric():
    sigma = np.array([-1.2, 1.2])
    values = hermitized_density(sigma, 0.3)
    assert values[0] == pytest.approx(values[1])


@pytest.mark.parametrize("z", [0.0, 0.3 + 0.2j, 0.8, 1.5j])
def test_classical_positions(z):
    positions = classical_positions(16, z)
    assert np.all(np.diff(positions) > 0.0)
    assert positions[-1] == pytest.approx(spectral_edges(z)[1])
    for j in (3, 8, 12):
        assert classical_cdf(positions[j - 1], z) == pytest.approx(j / 16, abs=1e-8)


@pytest.mark.parametrize("z", [0.0, 0.3 + 0.2j, -0.5j, 0.8, 1.5j])
def test_classical_density_has_unit_mass(z):
    assert classical_cdf(spectral_edges(z)[1], z) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("z", [0.0, 0.5, 0.6j])
def test_classical_density_hard_edge(z):
    # m_c ~ i sqrt((1 - |z|^2) / x) as x -> 0
    x = np.logspace(-10, -6, 5)
    scaled = classical_density(x, z) * math.pi * np.sqrt(x)
    assert np.allclose(scaled, math.sqrt(1.0 - abs(z) ** 2), rtol=1e-3)


@pytest.mark.parametrize("z", [0.0, 0.3 + 0.2j, 0.7j])
@pytest.mark.parametrize("w", [1.0 + 0.5j, 0.2 + 0.1j, 3.0 + 1.0j])
def test_classical_density_reproduces_stieltjes_transform(z, w):
    upper = spectral_edges(z)[1]
    t, weights = gauss_legendre(0.0, math.pi, 32, panels=64)
    x = upper * (1.0 - np.cos(t)) / 2.0
    jac = upper * np.sin(t) / 2.0
    transform = np.sum(weights * jac * classical_density(x, z) / (x - w))
    assert abs(transform - solve_mc(w, z)) <= 1e-5


def test_singular_values_follow_classical_positions():
    n, z = 256, 0.3
    spec = EnsembleSpec("complex-gaussian", n, master_seed=12)
    squared = np.mean(
        [hermitize(sample_matrix(spec, i), z, normalization="unit").positive_eigenvalues() ** 2 for i in range(3)],
        axis=0,
    )
    gamma = classical_positions(n, z)
    for j in (26, 64, 128, 192, 230):
        assert squared[j - 1] == pytest.approx(gamma[j - 1], abs=0.05)


def test_classical_positions_need_n():
    with pytest.raises(DomainError):
        classical_positions(0, 0.1)


def test_classical_profile_and_csv():
    profile = classical_profile(0.3 + 0.2j, 20, grid_points=101)
    assert abs(profile.mass() - 1.0) <= 1e-6
    assert np.all(profile.density >= 0.0)
    out = io.StringIO()
    write_profile_csv(profile, out)
    lines = out.getvalue().splitlines()
    assert lines[0] == "x,p_c"
    assert lines[102] == "j,gamma_j"
    assert len(lines) == 123
    assert profile.to_dict()["positions"] == 20


def test_rigidity_diagnostic():
    m = sample_matrix(EnsembleSpec("complex-gaussian", 32, 6), 0)
    report = rigidity_diagnostic(m, 0.2 + 0.1j)
    assert report.count == 32
    assert report.excluded == 0
    assert math.isfinite(report.value)
    with pytest.raises(DomainError):
        rigidity_diagnostic(m, 0.9)
    with pytest.raises(ShapeError):
        rigidity_diagnostic(m, 0.2, positions=np.ones(5))
