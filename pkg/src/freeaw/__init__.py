"""Free Askey-Wilson functionals and the stationary measure of geometric LPP on a strip."""

__version__ = "0.1.0"

from .aw_functional import (  # noqa: E402
    ChebPolyKernel,
    ContourSpec,
    Evaluation,
    PowerKernel,
    contour_eval,
    evaluate,
    power_kernel_eval,
    representation_eval,
)
from .config import DEFAULTS, Tolerances  # noqa: E402
from .errors import ConstraintError, DomainError, FreeAwError, QuadratureError, UnsupportedConfiguration  # noqa: E402
from .lpp_gibbs import LppConfig, PathPair  # noqa: E402
from .moment_functional import AwParams, ChebPoly, moment_poly, moment_u  # noqa: E402

__all__ = [
    "AwParams",
    "ChebPoly",
    "ChebPolyKernel",
    "ConstraintError",
    "ContourSpec",
    "DEFAULTS",
    "DomainError",
    "Evaluation",
    "FreeAwError",
    "LppConfig",
    "PathPair",
    "PowerKernel",
    "QuadratureError",
    "Tolerances",
    "UnsupportedConfiguration",
    "contour_eval",
    "evaluate",
    "moment_poly",
    "moment_u",
    "power_kernel_eval",
    "representation_eval",
]
