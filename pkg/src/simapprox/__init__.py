"""Simultaneous polynomial approximation and interpolation on planar continua."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:
    __version__ = "0.0.0"

from .geometry import Continuum, builtin_domain, parse_domain  # noqa: E402
from .conformal import ExteriorMap, build_map, level_curve, rho_delta  # noqa: E402
from .polynomial import CPolynomial, Frame, NodeSet  # noqa: E402
from .functions import FunctionHandle, builtin_functions, parse_function  # noqa: E402
from .approx import global_modulus_profile, local_modulus, near_best  # noqa: E402
from .kernels import (KernelSpec, combined_kernel, damping, first_order_kernel,  # noqa: E402
                      powered_kernel)
from .extension import area_integral_tn, extend  # noqa: E402
from .constructions import (Compact, hermite_correct, localized_correct,  # noqa: E402
                            theorem1_pipeline, theorem2d_pipeline, theorem3_pipeline,
                            walsh_correct)
from .fekete import equilibrium_diagnostic, fekete_points, spacing_diagnostic  # noqa: E402

__all__ = [
    "Continuum", "builtin_domain", "parse_domain", "ExteriorMap", "build_map", "level_curve",
    "rho_delta", "CPolynomial", "Frame", "NodeSet", "FunctionHandle", "builtin_functions",
    "parse_function", "global_modulus_profile", "local_modulus", "near_best", "KernelSpec",
    "combined_kernel", "damping", "first_order_kernel", "powered_kernel", "area_integral_tn",
    "extend", "Compact", "hermite_correct", "localized_correct", "theorem1_pipeline",
    "theorem2d_pipeline", "theorem3_pipeline", "walsh_correct", "equilibrium_diagnostic",
    "fekete_points", "spacing_diagnostic", "__version__",
]
