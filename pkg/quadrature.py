"""Quadrature rules shared by the Girko, kernel and variance integrals."""

from __future__ import annotations

import logging
import warnings
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Any, Callable, Dict, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from errors import DomainError

logger = logging.getLogger(__name__)

Box = Tuple[float, float, float, float]


@dataclass(frozen=True)
class QuadratureOptions:
    """Node counts and tolerances.

    ``nodes_2d`` / ``panels_2d`` drive single integrals over the plane,
    ``pair_nodes`` the (much more expensive) double integrals over pairs of
    points, and ``nodes_1d`` / ``pair_nodes_1d`` the real-line analogues.
    """

    nodes_2d: int = 96
    panels_2d: int = 1
    pair_nodes: int = 32
    nodes_1d: int = 200
    pair_nodes_1d: int = 160
    tol: float = 1e-9
    limit: int = 400

    def __post_init__(self) -> None:
        for name in ("nodes_2d", "panels_2d", "pair_nodes", "nodes_1d", "pair_nodes_1d", "limit"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be positive")
        if not self.tol > 0.0:
            raise DomainError("tol must be positive")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@lru_cache(maxsize=64)
def _reference_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a: float, b: float, n: int, panels: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """Composite n-point Gauss-Legendre rule on [a, b] split into equal panels."""
    if not b > a:
        raise DomainError(f"empty interval [{a}, {b}]")
    x, w = _reference_rule(int(n))
    edges = np.linspace(a, b, int(panels) + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def tensor_grid(box: Box, n: int, panels: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre nodes over a box, returned as complex points and weights."""
    xmin, xmax, ymin, ymax = box
    xs, wx = gauss_legendre(xmin, xmax, n, panels)
    ys, wy = gauss_legendre(ymin, ymax, n, panels)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    points = (gx + 1j * gy).ravel()
    weights = np.outer(wx, wy).ravel()
    return points, weights


def disc_grid(center: complex, radius: float, n_radial: int, n_angular: int) -> Tuple[np.ndarray, np.ndarray]:
    """Polar product rule on a disc: Gauss-Legendre in r (with Jacobian), trapezoid in angle."""
    r, wr = gauss_legendre(0.0, radius, n_radial)
    theta = 2.0 * np.pi * np.arange(n_angular) / n_angular
    points = (center + r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = (wr[:, None] * r[:, None] * np.full(n_angular, 2.0 * np.pi / n_angular)[None, :]).ravel()
    return points, weights


def circle_nodes(m: int) -> np.ndarray:
    """m equispaced angles on the unit circle (periodic trapezoid rule)."""
    return 2.0 * np.pi * np.arange(m) / m


def adaptive(func: Callable[[float], float], a: float, b: float, options: QuadratureOptions = QuadratureOptions(), **kwargs: Any) -> float:
    """Adaptive Gauss-Kronrod via QUADPACK; accuracy warnings are logged, not raised."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        value, err = integrate.quad(func, a, b, epsabs=options.tol, epsrel=options.tol, limit=options.limit, **kwargs)
    for w in caught:
        logger.warning(f"quad on [{a}, {b}]: {w.message} (error estimate {err:.2e})")
    return float(value)
