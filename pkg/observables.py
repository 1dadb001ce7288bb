"""Test functions and the observables built from a spectrum."""

from __future__ import annotations

import csv
import enum
import logging
import math
import sys
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Optional, TextIO, Tuple, Union

import numpy as np
from scipy import stats

from errors import DomainError
from linalg_core import Spectrum

logger = logging.getLogger(__name__)

Box = Tuple[float, float, float, float]


class TestFamily(str, enum.Enum):
    __test__ = False

    DISC_BUMP = "disc-bump"
    UPPER_HALF_BUMP = "upper-half-bump"
    INTERVAL_BUMP = "interval-bump"
    HARMONIC_POLYNOMIAL = "harmonic-polynomial"


def _profile(s: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """g(s) = exp(1 - 1/(1 - s)) on s < 1 and its first two derivatives; zero elsewhere."""
    g = np.zeros_like(s)
    g1 = np.zeros_like(s)
    g2 = np.zeros_like(s)
    inside = s < 1.0
    t = 1.0 / (1.0 - s[inside])
    gi = np.exp(1.0 - t)
    g[inside] = gi
    g1[inside] = -gi * t**2
    g2[inside] = gi * (t**4 - 2.0 * t**3)
    return g, g1, g2


@dataclass(frozen=True)
class TestFunction:
    """f(z) with analytic gradient and Laplacian.

    Bumps are ``amplitude * g(|z - center|^2 / radius^2)``; the interval bump
    is the same profile in Re z and only sees points exactly on the real
    line; the harmonic family is ``amplitude * Re z^degree``.
    """

    __test__ = False

    family: TestFamily
    center: complex = 0j
    radius: float = 0.5
    degree: int = 1
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", TestFamily(self.family))
        object.__setattr__(self, "center", complex(self.center))
        c, r = self.center, float(self.radius)
        fam = self.family
        if fam is TestFamily.HARMONIC_POLYNOMIAL:
            if int(self.degree) != self.degree or self.degree < 1:
                raise DomainError(f"harmonic degree must be a positive integer, got {self.degree}")
            return
        if not r > 0.0:
            raise DomainError(f"radius must be positive, got {r}")
        if fam is TestFamily.INTERVAL_BUMP:
            if c.imag != 0.0 or abs(c.real) + r >= 1.0:
                raise DomainError(f"interval bump support [{c.real - r}, {c.real + r}] must lie inside (-1, 1)")
            return
        if abs(c) + r >= 1.0:
            raise DomainError(f"bump support |z - {c}| <= {r} leaves the open unit disc")
        if fam is TestFamily.UPPER_HALF_BUMP and c.imag - r <= 0.0:
            raise DomainError(f"upper-half bump touches the real line (Im center {c.imag} <= radius {r})")

    @property
    def is_bump(self) -> bool:
        return self.family is not TestFamily.HARMONIC_POLYNOMIAL

    def scaled(self, factor: float) -> "TestFunction":
        return TestFunction(self.family, self.center, self.radius, self.degree, self.amplitude * factor)

    def support_box(self) -> Box:
        c, r = self.center, self.radius
        if self.family is TestFamily.HARMONIC_POLYNOMIAL:
            return (-1.0, 1.0, -1.0, 1.0)
        if self.family is TestFamily.INTERVAL_BUMP:
            return (c.real - r, c.real + r, 0.0, 0.0)
        return (c.real - r, c.real + r, c.imag - r, c.imag + r)

    def support_interval(self) -> Tuple[float, float]:
        xmin, xmax, _, _ = self.support_box()
        return xmin, xmax

    def _s(self, z: np.ndarray) -> np.ndarray:
        if self.family is TestFamily.INTERVAL_BUMP:
            return ((z.real - self.center.real) / self.radius) ** 2
        return np.abs(z - self.center) ** 2 / self.radius**2

    def _on_line(self, z: np.ndarray) -> np.ndarray:
        return z.imag == 0.0

    def evaluate(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        if self.family is TestFamily.HARMONIC_POLYNOMIAL:
            return self.amplitude * (z**self.degree).real
        g, _, _ = _profile(self._s(z))
        if self.family is TestFamily.INTERVAL_BUMP:
            g = np.where(self._on_line(z), g, 0.0)
        return self.amplitude * g

    def gradient(self, z) -> np.ndarray:
        """f_x + i f_y (for the interval bump: f' along the line)."""
        z = np.asarray(z, dtype=np.complex128)
        if self.family is TestFamily.HARMONIC_POLYNOMIAL:
            dz = self.degree * z ** (self.degree - 1)
            return self.amplitude * (dz.real - 1j * dz.imag)
        _, g1, _ = _profile(self._s(z))
        if self.family is TestFamily.INTERVAL_BUMP:
            d = g1 * 2.0 * (z.real - self.center.real) / self.radius**2
            return self.amplitude * np.where(self._on_line(z), d, 0.0).astype(np.complex128)
        return self.amplitude * g1 * 2.0 * (z - self.center) / self.radius**2

    def laplacian(self, z) -> np.ndarray:
        """f_xx + f_yy (for the interval bump: f'')."""
        z = np.asarray(z, dtype=np.complex128)
        if self.family is TestFamily.HARMONIC_POLYNOMIAL:
            return np.zeros(z.shape)
        s = self._s(z)
        _, g1, g2 = _profile(s)
        r2 = self.radius**2
        if self.family is TestFamily.INTERVAL_BUMP:
            u = 2.0 * (z.real - self.center.real) / r2
            d2 = g2 * u**2 + g1 * 2.0 / r2
            return self.amplitude * np.where(self._on_line(z), d2, 0.0)
        return self.amplitude * (4.0 / r2) * (s * g2 + g1)

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"family": self.family.value, "amplitude": self.amplitude}
        if self.family is TestFamily.HARMONIC_POLYNOMIAL:
            out["degree"] = self.degree
        else:
            out["center"] = [self.center.real, self.center.imag]
            out["radius"] = self.radius
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TestFunction":
        center = data.get("center", 0j)
        if isinstance(center, (list, tuple)):
            center = complex(center[0], center[1])
        return cls(
            family=data["family"],
            center=complex(center),
            radius=float(data.get("radius", 0.5)),
            degree=int(data.get("degree", 1)),
            amplitude=float(data.get("amplitude", 1.0)),
        )


def linear_statistic(f: TestFunction, spectrum: Spectrum, normalization: str = "none", quarter_dim: str = "half") -> float:
    """Sum of f over the eigenvalues, optionally divided by n^{1/4}.

    ``quarter_dim="half"`` takes n = dim / 2 (a 2n-dimensional real matrix),
    ``"full"`` takes n = dim.
    """
    value = float(np.sum(f.evaluate(spectrum.eigenvalues)))
    if normalization == "none":
        return value
    if normalization != "n_quarter":
        raise DomainError(f"unknown normalization {normalization!r}")
    if quarter_dim not in ("half", "full"):
        raise DomainError(f"quarter_dim must be 'half' or 'full', got {quarter_dim!r}")
    n = spectrum.source_dim / 2.0 if quarter_dim == "half" else float(spectrum.source_dim)
    return value / n**0.25


def radial_cdf_target(r: np.ndarray) -> np.ndarray:
    return np.clip(np.asarray(r) ** 2, 0.0, 1.0)


def circular_law_distance(spectra: Iterable[Spectrum]) -> float:
    """Kolmogorov distance between the pooled radial CDF and r^2 on [0, 1]."""
    radii = np.concatenate([np.abs(s.eigenvalues) for s in spectra])
    if radii.size == 0:
        raise DomainError("no eigenvalues to compare")
    return float(stats.kstest(radii, radial_cdf_target).statistic)


def real_count_mean(spectra: Iterable[Spectrum]) -> Tuple[float, float]:
    """Mean number of exactly real eigenvalues and its standard error."""
    counts = np.array([s.real_count for s in spectra], dtype=float)
    if counts.size < 2:
        raise DomainError("need at least two spectra")
    return float(counts.mean()), float(counts.std(ddof=1) / math.sqrt(counts.size))


def write_spectra_csv(spectra: Iterable[Spectrum], out: Optional[Union[str, TextIO]] = None, start_index: int = 0) -> int:
    """``sample_index,re,im,is_real`` rows; returns the number of rows written."""
    if isinstance(out, str):
        with open(out, "w", newline="", encoding="utf-8") as f:
            return write_spectra_csv(spectra, f, start_index)
    writer = csv.writer(out if out is not None else sys.stdout, lineterminator="\n")
    writer.writerow(["sample_index", "re", "im", "is_real"])
    rows = 0
    for index, spectrum in enumerate(spectra, start=start_index):
        for value, flag in zip(spectrum.eigenvalues, spectrum.real_flags):
            writer.writerow([index, repr(float(value.real)), repr(float(value.imag)), int(bool(flag))])
            rows += 1
    return rows
