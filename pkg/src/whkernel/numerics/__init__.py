"""Shared numerical kernel."""

from .bromwich import BromwichConfig, InversionWarning, bromwich_invert
from .quad import (DivergentIntegralError, IntegralOverflowError, SingularWeightIntegral, power_weight_quad,
                   singular_integral)
from .roots import RootError, expand_bracket, find_root_monotone
from .special import KummerError, hermite_prob, kummer_M, kummer_U, kummer_U_prime

__all__ = [
    "BromwichConfig", "InversionWarning", "bromwich_invert",
    "DivergentIntegralError", "IntegralOverflowError", "SingularWeightIntegral", "power_weight_quad", "singular_integral",
    "RootError", "expand_bracket", "find_root_monotone",
    "KummerError", "hermite_prob", "kummer_M", "kummer_U", "kummer_U_prime",
]
