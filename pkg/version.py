"""
Version metadata for ginibre-lab.

``python version.py`` prints the metadata as JSON.
"""

import json
import platform
from typing import Any, Dict

__version__ = "0.3.0"
__release_date__ = "2026-10-19"

FEATURES = (
    "Complex and real Ginibre sampling with counter-based seeding",
    "Four-moment-matched discrete atoms",
    "Real Schur spectra with exact real-eigenvalue flags",
    "Complex/complex and real/real correlation kernels",
    "Pfaffians and Moore-Dyson quaternion determinants",
    "Finite-n variance and Costin-Lebowitz cumulants",
    "Monte Carlo CLT and universality experiments",
    "Hermitization, Girko identity and classical positions",
)


def get_version_string() -> str:
    return f"ginibre-lab v{__version__}"


def get_version_info() -> Dict[str, Any]:
    """Version, release date and runtime versions of the numerical stack."""
    import numpy
    import scipy

    return {
        "version": __version__,
        "release_date": __release_date__,
        "python": platform.python_version(),
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "features": list(FEATURES),
    }


if __name__ == "__main__":
    print(json.dumps({"version_info": get_version_info()}, indent=2))
