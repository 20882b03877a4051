"""Probabilists' Hermite polynomials and Kummer confluent hypergeometric functions."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gamma, hyp1f1, rgamma

from .quad import power_weight_quad

__all__ = ["KummerError", "hermite_prob", "kummer_M", "kummer_U", "kummer_U_prime"]

# Below this argument U is built from the M-series connection formula; above it
# from the Laplace-type integral plus a downward recurrence in the first
# parameter. The connection formula cancels two terms of size ~e^z.
CONNECTION_MAX_Z = 2.0


class KummerError(ArithmeticError):
    pass


def hermite_prob(n: int, x):
    """``He_n(x)`` via ``He_{k+1} = x He_k - k He_{k-1}``."""
    if n < 0:
        raise ValueError("order must be nonnegative")
    x = np.asarray(x, dtype=float)
    h0 = np.ones_like(x)
    if n == 0:
        return h0[()] if h0.ndim == 0 else h0
    h1 = x.copy()
    for k in range(1, n):
        h0, h1 = h1, x * h1 - k * h0
    return h1[()] if h1.ndim == 0 else h1


def _is_nonpos_int(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def kummer_M(a: float, b: float, z: float) -> float:
    """Kummer's ``M(a, b, z) = sum (a)_s / ((b)_s s!) z**s`` (scipy ``hyp1f1``)."""
    if _is_nonpos_int(b) and not (_is_nonpos_int(a) and a > b):
        raise KummerError(f"M undefined for b={b}")
    val = float(hyp1f1(a, b, z))
    if not math.isfinite(val):
        raise KummerError(f"M({a}, {b}, {z}) is not finite")
    return val


def _u_connection(a: float, b: float, z: float) -> float:
    m1 = kummer_M(a, b, z)
    m2 = kummer_M(a - b + 1.0, 2.0 - b, z)
    return gamma(1.0 - b) * rgamma(a - b + 1.0) * m1 + gamma(b - 1.0) * rgamma(a) * z ** (1.0 - b) * m2


def _u_integral(a: float, b: float, z: float) -> float:
    # U(a,b,z) Gamma(a) = int_0^inf e^{-zt} t^{a-1} (1+t)^{b-a-1} dt,  a > 0
    c = b - a - 1.0
    cutoff = (60.0 + max(c, 0.0) * 5.0) / z
    val = power_weight_quad(lambda t: np.exp(-z * t) * (1.0 + t) ** c, a - 1.0, math.inf,
                            cutoff=cutoff, panels=4)
    return float(val / gamma(a))


def kummer_U(a: float, b: float, z: float) -> float:
    """Tricomi's ``U(a, b, z)`` for real parameters and ``z > 0``."""
    if not z > 0:
        raise KummerError("U needs z > 0")
    if _is_nonpos_int(a):
        n = int(-a)
        poch = 1.0
        for j in range(n):
            poch *= b + j
        return (-1) ** n * poch * kummer_M(a, b, z)
    if z <= CONNECTION_MAX_Z and not float(b).is_integer():
        return float(_u_connection(a, b, z))
    if a >= 1:
        return _u_integral(a, b, z)
    # the integral form loses accuracy as a -> 0+ (t**(a-1) nearly non-integrable),
    # so start from a0 = a + n >= 1 and step down with
    # U(a-1) = (2a + z - b) U(a) - a (a - b + 1) U(a+1); backward is the stable direction
    n = math.ceil(1.0 - a)
    a0 = a + n
    u_hi = _u_integral(a0 + 1.0, b, z)
    u = _u_integral(a0, b, z)
    ak = a0
    for _ in range(n):
        u, u_hi = (2 * ak + z - b) * u - ak * (ak - b + 1.0) * u_hi, u
        ak -= 1.0
    return float(u)


def kummer_U_prime(a: float, b: float, z: float) -> float:
    """``dU/dz = -a U(a+1, b+1, z)``."""
    if a == 0:
        return 0.0
    return -a * kummer_U(a + 1.0, b + 1.0, z)
