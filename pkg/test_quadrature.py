import math

import numpy as np
import pytest

from errors import DomainError
from quadrature import QuadratureOptions, adaptive, circle_nodes, disc_grid, gauss_legendre, tensor_grid


def test_gauss_legendre_integrates_polynomials_exactly():
    x, w = gauss_legendre(-1.0, 2.0, 5)
    # degree 9 is exact for 5 nodes
    assert np.sum(w * x**9) == pytest.approx((2.0**10 - 1.0) / 10.0, rel=1e-13)


def test_composite_panels_sum_to_length():
    x, w = gauss_legendre(0.0, 3.0, 4, panels=7)
    assert x.size == 28
    assert np.sum(w) == pytest.approx(3.0, rel=1e-14)
    assert np.all((x > 0.0) & (x < 3.0))


def test_empty_interval_raises():
    with pytest.raises(DomainError):
        gauss_legendre(1.0, 1.0, 4)


def test_tensor_grid_area_and_moment():
    points, weights = tensor_grid((0.0, 1.0, -1.0, 1.0), 6)
    assert np.sum(weights) == pytest.approx(2.0, rel=1e-14)
    assert np.sum(weights * points.real * points.imag**2) == pytest.approx(1.0 / 3.0, rel=1e-13)


def test_disc_grid_area():
    points, weights = disc_grid(0.3j, 0.5, 12, 24)
    assert np.sum(weights) == pytest.approx(math.pi * 0.25, rel=1e-13)
    assert np.all(np.abs(points - 0.3j) <= 0.5)


def test_circle_nodes_trapezoid_exact_for_trig_polynomials():
    theta = circle_nodes(16)
    assert np.mean(np.cos(3 * theta) ** 2) == pytest.approx(0.5, abs=1e-15)


def test_adaptive():
    assert adaptive(math.exp, 0.0, 1.0) == pytest.approx(math.e - 1.0, rel=1e-12)


def test_options_validation():
    with pytest.raises(DomainError):
        QuadratureOptions(nodes_2d=0)
    with pytest.raises(DomainError):
        QuadratureOptions(tol=0.0)
    assert QuadratureOptions().to_dict()["pair_nodes"] == 32
