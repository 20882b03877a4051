"""The residual functions must vanish on known solutions and flag wrong ones."""
import math

import pytest

from whkernel.constant_omega import classical_ruin
from whkernel.dist import exponential
from whkernel.equations import (insurance_minus_residual, insurance_plus_residual,
                                queue_minus_residual, queue_plus_residual)


def test_queue_residuals_detect_perturbation():
    # exact constant-omega solution for lam=1, Exp(2), omega=2
    d = (1 + math.sqrt(17)) / 2
    A = 0.5 * d * d / 2
    v0 = 0.5 * d * (d - 2) / 2
    dist = exponential(2.0)
    vm = lambda x: A * math.exp(-d * x)
    vp = lambda x: v0 * math.exp(-x)
    for x in (0.2, 1.0, 3.0):
        assert abs(queue_plus_residual(x, 1.0, dist, vp, vm)) < 1e-9
        assert abs(queue_minus_residual(x, 1.0, dist, vm, lambda y: 2.0)) < 1e-9
    bad = lambda x: 1.01 * vp(x)
    assert abs(queue_plus_residual(1.0, 1.0, dist, bad, vm)) > 1e-4


def test_insurance_classical_limit():
    # with no bankruptcy on the negative side the first equation reduces to classical ruin
    lam, c, nu = 1.0, 1.0, 2.0
    dist = exponential(nu)
    u = lambda x: float(classical_ruin(x, lam, c, nu))
    for x in (0.25, 1.0, 2.5):
        assert abs(insurance_plus_residual(x, lam, c, dist, u, lambda y: 1.0)) < 1e-7


def test_insurance_minus_equation_constant_solution():
    # ut = 1 solves the negative-side equation for any rate
    dist = exponential(2.0)
    for x in (0.0, 0.7, 2.0):
        assert abs(insurance_minus_residual(x, 1.0, 1.0, dist, lambda y: 1.0,
                                            lambda y: 3.0)) < 1e-12
