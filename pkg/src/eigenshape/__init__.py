"""Dirichlet eigenvalues of convex planar bodies under set-function
constraints: geometry kernel, reference spectra, grid eigensolver,
inequality certificates and shape optimisation."""

from __future__ import annotations

__version__ = "0.1.0"

from . import analytic, functionals, geometry, inequalities, spectral, variational  # noqa: E402
from .analytic import AnalyticBody  # noqa: E402
from .functionals import SetFunctional  # noqa: E402
from .geometry import BodyUnion, ConvexBody, make_body  # noqa: E402
from .inequalities import InequalityCertificate  # noqa: E402
from .spectral import SolverConfig, SpectralResult  # noqa: E402

__all__ = [
    "AnalyticBody",
    "BodyUnion",
    "ConvexBody",
    "InequalityCertificate",
    "SetFunctional",
    "SolverConfig",
    "SpectralResult",
    "analytic",
    "functionals",
    "geometry",
    "inequalities",
    "make_body",
    "spectral",
    "variational",
]
