"""Bracketed root finding for monotone scalar functions."""

from __future__ import annotations

import math
from typing import Callable

from scipy.optimize import brentq

__all__ = ["RootError", "find_root_monotone", "expand_bracket"]


class RootError(ArithmeticError):
    pass


def find_root_monotone(f: Callable[[float], float], lo: float, hi: float,
                       maxiter: int = 200) -> float:
    """Root of a continuous, strictly monotone ``f`` on ``[lo, hi]``.

    Raises :class:`RootError` when ``f`` does not change sign on the bracket
    or Brent's method fails to converge.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if math.copysign(1.0, flo) == math.copysign(1.0, fhi):
        raise RootError(f"no sign change on [{lo}, {hi}]: f={flo}, {fhi}")
    try:
        root, info = brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=maxiter,
                            full_output=True)
    except RuntimeError as exc:
        raise RootError(str(exc)) from None
    if not info.converged:
        raise RootError(f"brentq did not converge after {info.iterations} iterations")
    return float(root)


def expand_bracket(f: Callable[[float], float], lo: float, hi: float,
                   max_doublings: int = 60) -> tuple[float, float]:
    """Double ``hi`` until ``f`` changes sign on ``[lo, hi]``."""
    flo = f(lo)
    for _ in range(max_doublings):
        if math.copysign(1.0, f(hi)) != math.copysign(1.0, flo):
            return lo, hi
        hi *= 2.0
    raise RootError("could not bracket a sign change")
