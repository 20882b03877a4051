"""Quadrature for integrands with an integrable power singularity at 0.

The singular factor ``v**p`` (``-1 < p < 0``) is removed by the substitution
``v = u**(1/(1+p))``, which turns ``v**p dv`` into ``du/(1+p)``. The smooth
remainder is then integrated panel by panel with adaptive Gauss-Kronrod
(``scipy.integrate.quad``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

__all__ = ["DivergentIntegralError", "IntegralOverflowError", "SingularWeightIntegral", "power_weight_quad",
           "singular_integral"]

EPSREL = 1e-12
EPSABS = 1e-15


class IntegralOverflowError(ArithmeticError):
    """The integrand peak exceeds double range; rescale with ``shift``."""


class DivergentIntegralError(ValueError):
    pass


def _quad(g, a, b, complex_func=False):
    val, _ = quad(g, a, b, epsabs=EPSABS, epsrel=EPSREL, limit=400, complex_func=complex_func)
    return val


def power_weight_quad(g: Callable, p: float, upper: float, *, lower: float = 0.0,
                      cutoff: float | None = None, panels: int = 8, complex_func: bool = False):
    """``int_lower^upper v**p g(v) dv`` for smooth ``g``, ``p > -1``, ``lower >= 0``.

    ``cutoff`` (only for ``upper = inf``) is a point in ``v`` beyond which the
    integrand is negligible; the interval up to it is split into ``panels``
    equal pieces in the transformed variable and the remainder is handed to
    ``quad`` as an infinite tail.
    """
    if not p > -1:
        raise DivergentIntegralError(f"power {p} <= -1 is not integrable at 0")
    if p < 0:
        q = 1.0 + p

        def h(u):
            return g(u ** (1.0 / q)) / q

        def to_u(v):
            return v**q
    else:
        def h(v):
            return v**p * g(v) if p else g(v)

        def to_u(v):
            return v

    if math.isinf(upper):
        if cutoff is None:
            raise ValueError("cutoff required for an infinite range")
        end = to_u(cutoff)
    else:
        end = to_u(upper)
    edges = np.linspace(to_u(lower), end, panels + 1)
    total = sum(_quad(h, lo, hi, complex_func) for lo, hi in zip(edges[:-1], edges[1:]))
    if math.isinf(upper):
        # no singularity out here: integrate in v to avoid overflow in u**(1/q)
        total += _quad(lambda v: v**p * g(v), cutoff, math.inf, complex_func)
    return total


@dataclass(frozen=True)
class SingularWeightIntegral:
    """``int_0^T v**p exp(shift + s(theta1 v - theta2 v**2)) dv`` with ``s = +1``,
    or ``int_0^T v**p exp(shift - (theta1 v + theta2 v**2)) dv`` with ``s = -1``.
    """

    power: float
    theta1: float
    theta2: float
    upper: float = math.inf
    sign: int = -1
    shift: float = 0.0
    panels: int = 8

    def exponent(self, v):
        if self.sign > 0:
            return self.shift + self.theta1 * v - self.theta2 * v * v
        return self.shift - (self.theta1 * v + self.theta2 * v * v)


def _decay_cutoff(spec: SingularWeightIntegral) -> float:
    # point past the peak where the exponent has dropped by ~60 below its max
    t1, t2 = spec.theta1, spec.theta2
    if spec.sign > 0:
        vpk = t1 / (2 * t2)
        return vpk + math.sqrt(60.0 / t2) + max(spec.power, 0.0) / max(t2, 1e-300) ** 0.5
    if t2 > 0:
        v = (-t1 + math.sqrt(t1 * t1 + 240.0 * t2)) / (2 * t2)
    else:
        v = 60.0 / t1
    return v * (1.0 + max(spec.power, 0.0) / 10.0) + max(spec.power, 0.0) / max(t1, 1e-300)


MAX_EXPONENT = 700.0


def _peak_exponent(spec: SingularWeightIntegral) -> float:
    if spec.sign < 0:
        return spec.shift
    vpk = spec.theta1 / (2 * spec.theta2) if spec.theta2 > 0 else math.inf
    return float(spec.exponent(min(vpk, spec.upper)))


def singular_integral(spec: SingularWeightIntegral) -> float:
    if not spec.power > -1:
        raise DivergentIntegralError(f"power {spec.power} <= -1")
    if spec.theta1 < 0 or spec.theta2 < 0:
        raise ValueError("theta1, theta2 must be nonnegative")
    infinite = math.isinf(spec.upper)
    if infinite:
        decays = spec.theta2 > 0 if spec.sign > 0 else (spec.theta1 > 0 or spec.theta2 > 0)
        if not decays:
            raise DivergentIntegralError("weight does not decay on [0, inf)")
    if _peak_exponent(spec) > MAX_EXPONENT:
        raise IntegralOverflowError(f"weight peak exp({_peak_exponent(spec):.4g}) overflows")
    cutoff = _decay_cutoff(spec) if infinite else None
    val = float(power_weight_quad(lambda v: np.exp(spec.exponent(v)), spec.power, spec.upper,
                                   cutoff=cutoff, panels=spec.panels))
    if not math.isfinite(val):
        raise IntegralOverflowError("integral is not finite in double precision")
    return val
