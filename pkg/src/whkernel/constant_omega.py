"""Constant clearing / bankruptcy rate: Wiener-Hopf solutions.

Queue side: the inventory density is exponential, ``v_-(x) = A exp(-delta x)``
with ``delta`` the positive zero of ``lam*beta(s) + s - lam - omega`` and
``A = (1 - rho) delta**2 / omega``; the workload transform ``phi_+`` follows in
closed form. Insurance side: same structure with premium rate ``c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as P

from .dist import ServiceDistribution
from .numerics import BromwichConfig, bromwich_invert, expand_bracket, find_root_monotone

__all__ = [
    "UnstableSystemError",
    "ConstantOmegaQueueSolution",
    "ConstantOmegaInsuranceSolution",
    "ExceptionalFirstService",
    "solve_queue",
    "solve_insurance",
    "classical_ruin",
]

REMOVABLE_RADIUS = 1e-3
CAUCHY_NODES = 64


class UnstableSystemError(ValueError):
    """rho >= 1: no steady state / ruin is certain."""


def _cauchy(fn: Callable[[complex], complex], s: complex, center: float, radius: float) -> complex:
    # Cauchy integral on a circle around a removable point, trapezoidal nodes
    theta = 2 * np.pi * np.arange(CAUCHY_NODES) / CAUCHY_NODES
    zeta = center + radius * np.exp(1j * theta)
    vals = np.array([fn(z) for z in zeta])
    return complex(np.mean(vals * (zeta - center) / (zeta - s)))


def _safe_radius(center: float, singular: np.ndarray, other: float) -> float:
    d = np.abs(singular - center)
    d = d[d > 1e-8 * max(1.0, abs(center))]
    cands = [1.0, 0.5 * abs(other - center)]
    if d.size:
        cands.append(0.5 * d.min())
    return min(cands)


def _solve_delta(f: Callable[[float], float], hi: float) -> float:
    lo, hi = expand_bracket(f, 0.0, hi)
    return find_root_monotone(f, lo, hi)


def _default_gamma(dist: ServiceDistribution) -> float:
    return 0.5 * min(float(np.min(np.abs(dist.poles.real))), 1.0)


@dataclass(frozen=True)
class ExceptionalFirstService:
    """M/G/1 with an exceptional first service per busy period.

    The first service is the overshoot of ``B`` over an Exp(``delta``)
    inventory level.
    """

    delta: float
    dist: ServiceDistribution
    mean: float
    pi0: float

    def _lst_raw(self, s: complex) -> complex:
        d, b = self.delta, self.dist
        bd = b.lst(d)
        return d / (s - d) * (bd - b.lst(s)) / (1 - bd)

    def lst(self, s: complex) -> complex:
        d = self.delta
        if abs(s - d) < REMOVABLE_RADIUS * max(1.0, d):
            return _cauchy(self._lst_raw, complex(s), d, _safe_radius(d, self.dist.poles, 0.0))
        return self._lst_raw(s)


@dataclass(frozen=True)
class ConstantOmegaQueueSolution:
    lam: float
    omega: float
    dist: ServiceDistribution
    rho: float
    delta: float
    A: float

    @property
    def phi_minus_0(self) -> float:
        return self.A / self.delta

    @property
    def phi_plus_0(self) -> float:
        return 1.0 - self.A / self.delta

    def phi_minus(self, s):
        """Laplace transform of ``v_-``: ``A / (s + delta)``."""
        return self.A / (np.asarray(s) + self.delta)

    def v_minus(self, x):
        return self.A * np.exp(-self.delta * np.asarray(x, dtype=float))

    def _phi_plus_raw(self, s: complex) -> complex:
        lam, om, d = self.lam, self.omega, self.delta
        one_b = 1.0 - self.dist.lst(s)
        num = (d - om) * s - lam * d * one_b
        den = (s - lam * one_b) * (s - d)
        return (1 - self.rho) * d / om * num / den

    def _singular_points(self) -> np.ndarray:
        n, d = self.dist.rational_form()
        lam, om = self.lam, self.omega
        p0 = P.polysub(P.polymul([0.0, 1.0], d), lam * P.polysub(d, n))
        pw = P.polysub(p0, om * d)
        return np.concatenate([np.roots(p0[::-1]), np.roots(pw[::-1]), self.dist.poles])

    def phi_plus(self, s):
        """Laplace transform of ``v_+`` for ``Re s >= 0``."""
        if np.ndim(s):
            return np.array([self.phi_plus(v) for v in np.ravel(s)]).reshape(np.shape(s))
        s = complex(s)
        for center, other in ((0.0, self.delta), (self.delta, 0.0)):
            if abs(s - center) < REMOVABLE_RADIUS * max(1.0, center):
                r = _safe_radius(center, self._singular_points(), other)
                val = _cauchy(self._phi_plus_raw, s, center, r)
                break
        else:
            val = self._phi_plus_raw(s)
        return val.real if s.imag == 0 else val

    def v_plus(self, x, config: BromwichConfig | None = None):
        """Workload density. Closed form for exponential service, else inversion."""
        x = np.asarray(x, dtype=float)
        # v_+(0+) = lim s phi_+(s) as s -> inf, whatever the service law
        v0 = (1 - self.rho) * self.delta * (self.delta - self.omega) / self.omega
        if self.dist.kind == "exponential":
            mu = self.dist.params["mu"]
            return v0 * np.exp(-(mu - self.lam) * x)
        cfg = config or BromwichConfig(gamma=_default_gamma(self.dist))
        out = np.array([v0 if v == 0 else bromwich_invert(self.phi_plus, float(v), cfg)
                        for v in np.ravel(x)])
        return out.reshape(x.shape)[()] if x.ndim == 0 else out.reshape(x.shape)

    def exceptional_first_service(self) -> ExceptionalFirstService:
        bd = self.dist.lst(self.delta)
        mean_hat = self.dist.mean() / (1 - bd) - 1 / self.delta
        pi0 = (1 - self.rho) / (1 - self.rho + self.lam * mean_hat)
        return ExceptionalFirstService(self.delta, self.dist, mean_hat, pi0)

    def summary(self) -> dict:
        return {"lambda": self.lam, "omega": self.omega, "rho": self.rho,
                "delta": self.delta, "A": self.A, "phi_minus_0": self.phi_minus_0,
                "phi_plus_0": self.phi_plus_0, "dist": self.dist.to_json()}


def solve_queue(lam: float, omega: float, dist: ServiceDistribution) -> ConstantOmegaQueueSolution:
    if not (lam > 0 and omega > 0):
        raise ValueError("lambda and omega must be positive")
    rho = lam * dist.mean()
    if rho >= 1:
        raise UnstableSystemError(f"rho = {rho:.6g} >= 1")

    def f(s):
        return float(lam * dist.lst(s) + s - lam - omega)

    delta = _solve_delta(f, omega + lam + 1.0)
    A = (1 - rho) * delta**2 / omega
    return ConstantOmegaQueueSolution(lam, omega, dist, rho, delta, A)


@dataclass(frozen=True)
class ConstantOmegaInsuranceSolution:
    lam: float
    c: float
    omega: float
    dist: ServiceDistribution
    rho: float
    delta: float
    Z: float

    @property
    def psi_minus_0(self) -> float:
        return -self.Z / self.delta

    def u_minus(self, x):
        """Survival probability from surplus ``-x``."""
        return -self.Z * np.exp(-self.delta * np.asarray(x, dtype=float))

    def u_tilde_minus(self, x):
        """Bankruptcy probability from surplus ``-x``."""
        return 1.0 - self.u_minus(x)

    def psi_minus(self, s):
        return -self.Z / (np.asarray(s) + self.delta)

    def _f(self, s, omega):
        return self.c * s - self.lam * (1.0 - self.dist.lst(s)) - omega

    def _psi_plus_raw(self, s: complex) -> complex:
        fw = self._f(s, self.omega)
        f0 = self._f(s, 0.0)
        return self.Z * fw / ((s - self.delta) * f0) + 1.0 / s

    def _singular_points(self) -> np.ndarray:
        n, d = self.dist.rational_form()
        p0 = P.polysub(self.c * P.polymul([0.0, 1.0], d), self.lam * P.polysub(d, n))
        pw = P.polysub(p0, self.omega * d)
        return np.concatenate([np.roots(p0[::-1]), np.roots(pw[::-1]), self.dist.poles])

    def psi_plus(self, s):
        """Laplace transform of ``u_+`` for ``Re s >= 0``."""
        if np.ndim(s):
            return np.array([self.psi_plus(v) for v in np.ravel(s)]).reshape(np.shape(s))
        s = complex(s)
        for center, other in ((0.0, self.delta), (self.delta, 0.0)):
            if abs(s - center) < REMOVABLE_RADIUS * max(1.0, center):
                r = _safe_radius(center, self._singular_points(), other)
                val = _cauchy(self._psi_plus_raw, s, center, r)
                break
        else:
            val = self._psi_plus_raw(s)
        return val.real if s.imag == 0 else val

    def survival_transform(self, s):
        """Laplace transform of ``1 - u_+``."""
        return 1.0 / s - self.psi_plus(s)

    def _eta(self) -> float:
        nu = self.dist.params["mu"]
        b = self.c * nu - self.omega - self.lam
        return (-math.sqrt(b * b + 4 * self.omega * nu * self.c) - b) / (2 * self.c)

    def u_plus(self, x, config: BromwichConfig | None = None):
        """Bankruptcy probability from surplus ``x >= 0``."""
        x = np.asarray(x, dtype=float)
        if self.dist.kind == "exponential":
            nu = self.dist.params["mu"]
            k = nu - self.lam / self.c
            return (1.0 - k / -self._eta()) * np.exp(-k * x)
        cfg = config or BromwichConfig(gamma=_default_gamma(self.dist))
        out = np.array([bromwich_invert(self.psi_plus, float(v), cfg) for v in np.ravel(x)])
        return out.reshape(x.shape)[()] if x.ndim == 0 else out.reshape(x.shape)

    def u(self, x0):
        """Bankruptcy probability from any initial surplus (either sign)."""
        x0 = np.asarray(x0, dtype=float)
        out = np.where(x0 >= 0, self.u_plus(np.abs(x0)), self.u_tilde_minus(np.abs(x0)))
        return out[()] if out.ndim == 0 else out

    def ai_survival_hat(self, x):
        """Survival under Poisson(omega) ruin detection, exponential claims only.

        Averages the classical survival probability over an Exp(delta) shift.
        """
        if self.dist.kind != "exponential":
            raise NotImplementedError("closed-form classical survival needs exponential claims")
        nu = self.dist.params["mu"]
        lam, c, d = self.lam, self.c, self.delta
        x = np.asarray(x, dtype=float)
        return 1.0 - d / (d + nu * c - lam) * lam / (nu * c) * np.exp(-(nu - lam / c) * x)

    def summary(self) -> dict:
        return {"lambda": self.lam, "c": self.c, "omega": self.omega, "rho": self.rho,
                "delta": self.delta, "Z": self.Z, "psi_minus_0": self.psi_minus_0,
                "u_plus_0": float(self.u_plus(0.0)), "u_minus_0": float(self.u_minus(0.0)),
                "dist": self.dist.to_json()}


def classical_ruin(x, lam: float, c: float, nu: float):
    """Cramer-Lundberg ruin probability with Exp(nu) claims."""
    return lam / (nu * c) * np.exp(-(nu - lam / c) * np.asarray(x, dtype=float))


def solve_insurance(lam: float, c: float, omega: float,
                    dist: ServiceDistribution) -> ConstantOmegaInsuranceSolution:
    if not (lam > 0 and c > 0 and omega > 0):
        raise ValueError("lambda, c and omega must be positive")
    rho = lam * dist.mean() / c
    if rho >= 1:
        raise UnstableSystemError(f"rho = {rho:.6g} >= 1")

    def f(s):
        return float(c * s - lam * (1.0 - dist.lst(s)) - omega)

    delta = _solve_delta(f, (omega + lam) / c + 1.0)
    Z = -c * delta * (1 - rho) / omega
    return ConstantOmegaInsuranceSolution(lam, c, omega, dist, rho, delta, Z)
