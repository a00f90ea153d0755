"""Distribution of the mean of products of zero-mean correlated normals."""

from .special_functions import (
    BesselOrder,
    bessel_i,
    bessel_k,
    bessel_k_integral_oracle,
    bessel_k_scaled,
    ln_gamma,
)
from .numerics import (
    BracketError,
    QuadratureError,
    QuadratureResult,
    find_root_bracketed,
    finite_diff_derivatives,
    integrate_adaptive,
    integrate_real_line,
)

__all__ = [
    "BesselOrder",
    "bessel_i",
    "bessel_k",
    "bessel_k_integral_oracle",
    "bessel_k_scaled",
    "ln_gamma",
    "BracketError",
    "QuadratureError",
    "QuadratureResult",
    "find_root_bracketed",
    "finite_diff_derivatives",
    "integrate_adaptive",
    "integrate_real_line",
]
