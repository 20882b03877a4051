"""Residuals of the level-crossing and bankruptcy integro-differential equations.

These are model-level identities that any correct solution must satisfy; the
solvers never use them, so they serve as independent checks.

Queue (workload ``v_+`` on x > 0, inventory ``v_-`` on x > 0)::

    v_+(x) = lam int_0^x P(B > x-y) v_+(y) dy + lam int_0^inf P(B > x+y) v_-(y) dy
    v_-(x) = lam int_x^inf P(B > y-x) v_-(y) dy + int_x^inf omega(y) v_-(y) dy

Insurance (bankruptcy probability ``u_+`` from surplus x, ``ut_-`` from -x)::

    0 = c u_+'(x) - lam u_+(x) + lam (int_0^x u_+(x-y) dB(y) + int_x^inf ut_-(y-x) dB(y))
    0 = -c ut_-'(x) - (lam + omega(x)) ut_-(x) + omega(x) + lam int_0^inf ut_-(x+y) dB(y)
"""

from __future__ import annotations

import math
from typing import Callable

from scipy.integrate import quad

from .dist import ServiceDistribution

Fn = Callable[[float], float]

_OPTS = dict(epsabs=1e-13, epsrel=1e-10, limit=200)


def _int(f: Fn, lo: float, hi: float) -> float:
    if hi <= lo:
        return 0.0
    return quad(lambda t: float(f(t)), lo, hi, **_OPTS)[0]


def _int_inf(f: Fn, lo: float, split: float = 8.0) -> float:
    mid = max(lo, split)
    return _int(f, lo, mid) + quad(lambda t: float(f(t)), mid, math.inf, **_OPTS)[0]


def queue_plus_residual(x: float, lam: float, dist: ServiceDistribution,
                        v_plus: Fn, v_minus: Fn) -> float:
    rhs = lam * _int(lambda y: dist.sf(x - y) * v_plus(y), 0.0, x) \
        + lam * _int_inf(lambda y: dist.sf(x + y) * v_minus(y), 0.0)
    return float(v_plus(x)) - rhs


def queue_minus_residual(x: float, lam: float, dist: ServiceDistribution,
                         v_minus: Fn, omega: Fn) -> float:
    rhs = _int_inf(lambda y: (lam * dist.sf(y - x) + omega(y)) * v_minus(y), x)
    return float(v_minus(x)) - rhs


def _deriv(f: Fn, x: float, h: float = 1e-4) -> float:
    if x > 2 * h:
        return (f(x + h) - f(x - h)) / (2 * h)
    return (-3 * f(x) + 4 * f(x + h) - f(x + 2 * h)) / (2 * h)


def insurance_plus_residual(x: float, lam: float, c: float, dist: ServiceDistribution,
                            u_plus: Fn, ut_minus: Fn) -> float:
    jump = _int(lambda y: u_plus(x - y) * dist.pdf(y), 0.0, x) \
        + _int_inf(lambda y: ut_minus(y - x) * dist.pdf(y), x)
    return c * _deriv(u_plus, x) - lam * float(u_plus(x)) + lam * jump


def insurance_minus_residual(x: float, lam: float, c: float, dist: ServiceDistribution,
                             ut_minus: Fn, omega: Fn) -> float:
    jump = _int_inf(lambda y: ut_minus(x + y) * dist.pdf(y), 0.0)
    om = omega(x)
    return -c * _deriv(ut_minus, x) - (lam + om) * float(ut_minus(x)) + om + lam * jump
