"""Workload/inventory densities and bankruptcy probabilities for M/G/1-type
models with state-dependent clearing, via Wiener-Hopf factorisation."""

from . import constant_omega, equations, linear_omega, numerics, simulate
from .constant_omega import solve_insurance, solve_queue
from .dist import ServiceDistribution, erlang, exponential, from_json, hyperexp, rational
from .linear_omega import appendix_solve, classify, direct_solve

__all__ = [
    "ServiceDistribution", "erlang", "exponential", "from_json", "hyperexp", "rational",
    "solve_queue", "solve_insurance", "classify", "appendix_solve", "direct_solve",
    "constant_omega", "equations", "linear_omega", "numerics", "simulate",
]
