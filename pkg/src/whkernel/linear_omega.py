"""Linear clearing rate ``omega(x) = a x`` with Exp(mu) service.

Two independent solution routes:

* the coefficient pipeline (``appendix_solve``): a finite chain of constants
  ``c_0..c_K`` with ``K = ceil(sigma)``, ``sigma = mu*lam/a``, pinned down by
  Gaussian-type weight integrals; yields ``r1`` (workload density at 0+) and
  the mean inventory ``EI`` directly;
* the direct route (``direct_solve``): the inventory density is a Kummer U
  function times a Gaussian factor, reducing to a Hermite polynomial when
  ``sigma`` is an integer.

Each route is the other's oracle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .numerics import (BromwichConfig, SingularWeightIntegral, bromwich_invert, hermite_prob,
                       kummer_U, kummer_U_prime, power_weight_quad, singular_integral)

__all__ = [
    "ParameterError",
    "ConditioningWarning",
    "RecursionDegeneracyError",
    "LinearExpModel",
    "AppendixSolution",
    "DirectSolution",
    "classify",
    "appendix_solve",
    "direct_solve",
    "v_plus_linear",
]

INTEGER_TOL = 1e-12
NEAR_INTEGER_TOL = 1e-6
DEGENERACY_TOL = 1e-12


class ParameterError(ValueError):
    pass


class ConditioningWarning(UserWarning):
    """sigma is close to, but not treated as, an integer."""


class RecursionDegeneracyError(ArithmeticError):
    pass


@dataclass(frozen=True)
class LinearExpModel:
    lam: float
    mu: float
    a: float
    sigma: float
    K: int
    is_integer: bool

    @property
    def rho(self) -> float:
        return self.lam / self.mu

    def A1(self, w):
        return ((self.mu + self.lam) * w - 0.5 * w * w) / self.a

    def A2(self, w):
        return -((self.mu + self.lam) * w + 0.5 * w * w) / self.a


def classify(lam: float, mu: float, a: float) -> LinearExpModel:
    if not (lam > 0 and mu > 0 and a > 0):
        raise ParameterError("lambda, mu and a must be positive")
    if not mu > lam:
        raise ParameterError("need mu > lambda")
    lam, mu, a = float(lam), float(mu), float(a)
    sigma = mu * lam / a
    near = round(sigma)
    gap = abs(sigma - near)
    if near >= 1 and gap < INTEGER_TOL * sigma:
        return LinearExpModel(lam, mu, a, sigma, int(near), True)
    if near >= 1 and gap < NEAR_INTEGER_TOL * sigma:
        warnings.warn(f"sigma = {sigma!r} is within {gap:.1e} of an integer; the weight "
                      "integrals are ill-conditioned", ConditioningWarning, stacklevel=2)
    return LinearExpModel(lam, mu, a, sigma, int(math.ceil(sigma)), False)


# -- weight integrals -------------------------------------------------------------


def _I(m: LinearExpModel, p: float) -> float:
    """``int_0^inf v**p exp(A2(v)) dv``."""
    return singular_integral(SingularWeightIntegral(p, (m.mu + m.lam) / m.a, 0.5 / m.a))


def _J_scaled(m: LinearExpModel, p: float, upper: float) -> float:
    """``exp(-A1(upper)) int_0^upper v**p exp(A1(v)) dv``."""
    if upper == 0.0:
        return 0.0
    spec = SingularWeightIntegral(p, (m.mu + m.lam) / m.a, 0.5 / m.a, upper=upper, sign=1,
                                  shift=-m.A1(upper))
    return singular_integral(spec)


def _tail_scaled(m: LinearExpModel, p: float, w: float) -> float:
    """``exp(-A2(w)) int_w^inf v**p exp(A2(v)) dv`` for ``w >= 0``."""
    zl = w + m.mu + m.lam
    ucut = -zl + math.sqrt(zl * zl + 120.0 * m.a)
    a2w = m.A2(w)
    return float(power_weight_quad(lambda v: np.exp(m.A2(v) - a2w), p, math.inf, lower=w,
                                   cutoff=w + ucut))


# -- coefficient pipeline -----------------------------------------------------------


@dataclass(frozen=True)
class AppendixSolution:
    model: LinearExpModel
    c: np.ndarray
    B: np.ndarray
    I_hi: float
    I_lo: float | None
    J_hi: float
    J_lo: float | None
    R_K: float
    r1: float
    EI: float

    @property
    def lam(self) -> float:
        return self.model.lam

    @property
    def mu(self) -> float:
        return self.model.mu

    @property
    def d(self) -> np.ndarray:
        return self.c * (-1.0) ** np.arange(self.c.size)

    @property
    def phi_minus_0(self) -> float:
        return 1.0 - self.r1 / (self.mu - self.lam)

    # transform ---------------------------------------------------------------

    def _phi_left(self, w: float) -> float:
        # 0 <= z <= mu, w = mu - z
        m, c, K = self.model, self.c, self.model.K
        val = sum(c[k] * w**k for k in range(K))
        if w == 0.0:
            return float(val)
        ws = w**m.sigma
        if m.is_integer:
            val += c[K] * w**K * math.exp(-m.A1(w))
        else:
            val -= ws * (m.sigma - K) * c[K] * _J_scaled(m, K - m.sigma - 1, w)
        val += ws * c[K - 1] / m.a * _J_scaled(m, K - m.sigma, w)
        return float(val)

    def _phi_right(self, w: float) -> float:
        # z >= mu, w = z - mu
        m, d, K = self.model, self.d, self.model.K
        val = sum(d[k] * w**k for k in range(K))
        if w == 0.0:
            return float(val)
        tail = d[K - 1] / m.a * _tail_scaled(m, K - m.sigma, w)
        if not m.is_integer:
            tail -= (m.sigma - K) * d[K] * _tail_scaled(m, K - m.sigma - 1, w)
        return float(val - w**m.sigma * tail)

    def phi_minus(self, z):
        """Laplace transform of the inventory density for real ``z >= 0``."""
        if np.ndim(z):
            return np.array([self.phi_minus(v) for v in np.ravel(z)]).reshape(np.shape(z))
        z = float(z)
        if z < 0:
            raise ValueError("z must be nonnegative")
        return self._phi_left(self.mu - z) if z <= self.mu else self._phi_right(z - self.mu)

    def phi_minus_complex(self, z: complex) -> complex:
        """Analytic continuation to ``Re z > mu``.

        Integral form without cancellation; the path in ``u`` is rotated
        towards the steepest-descent direction of ``exp(-(z + lam) u / a)``.
        """
        m = self.model
        z = complex(z)
        w = z - m.mu
        if w.real <= 0:
            raise ValueError("need Re z > mu")
        zl = z + m.lam
        psi = -float(np.clip(np.angle(zl), -np.pi / 4, np.pi / 4))
        rot = np.exp(1j * psi)
        EI, r1, a, sig = self.EI, self.r1, m.a, m.sigma

        def g(s):
            u = s * rot
            wu = w + u
            return (EI + r1 * (z + u) / (a * wu)) * (w / wu) ** sig \
                * np.exp(-(zl * u + 0.5 * u * u) / a) * rot

        decay = (zl * rot).real
        cut = -decay + math.sqrt(decay * decay + 120.0 * a * max((rot * rot).real, 1e-3))
        cut = max(cut / max((rot * rot).real, 1e-3), 1e-12)
        edges = np.linspace(0.0, cut, 5)
        total = 0j
        for lo, hi in zip(edges[:-1], edges[1:]):
            total += quad(g, lo, hi, epsabs=1e-15, epsrel=1e-12, limit=200, complex_func=True)[0]
        total += quad(g, cut, math.inf, epsabs=1e-15, epsrel=1e-12, limit=200,
                      complex_func=True)[0]
        return total

    # density -------------------------------------------------------------------

    def v_minus_integer(self, t):
        """Inventory density for integer sigma (Hermite closed form)."""
        m = self.model
        if not m.is_integer:
            raise ParameterError("Hermite form requires integer sigma")
        t = np.asarray(t, dtype=float)
        sa = math.sqrt(m.a)
        y = (m.mu + m.lam) / sa + sa * t
        out = self.c[m.K - 1] * m.a ** (m.K / 2) * np.exp(-m.lam * t - 0.5 * m.a * t * t) \
            * hermite_prob(m.K, y)
        return out[()] if out.ndim == 0 else out

    def v_minus_noninteger(self, x, config: BromwichConfig | None = None):
        m = self.model
        if m.is_integer:
            raise ParameterError("inversion route is for non-integer sigma")
        cfg = config or BromwichConfig(gamma=m.mu + 1.0)
        if not cfg.gamma > m.mu:
            raise ValueError("Bromwich abscissa must exceed mu")
        x = np.asarray(x, dtype=float)
        # v_-(0+) = lim z phi_-(z) = a EI + r1
        v0 = m.a * self.EI + self.r1
        out = np.array([v0 if v == 0 else bromwich_invert(self.phi_minus_complex, float(v), cfg)
                        for v in np.ravel(x)]).reshape(x.shape)
        return out[()] if out.ndim == 0 else out

    def v_minus(self, x, config: BromwichConfig | None = None):
        if self.model.is_integer:
            return self.v_minus_integer(x)
        return self.v_minus_noninteger(x, config)

    def v_plus(self, x):
        return v_plus_linear(self, x)

    # checks ----------------------------------------------------------------

    def recursion_residuals(self) -> np.ndarray:
        m, c = self.model, self.c
        return np.array([(k * m.a - m.mu * m.lam) * c[k] + (m.mu + m.lam) * c[k - 1] - c[k - 2]
                         for k in range(2, m.K + 1)])

    def ode_residual(self, z: float, h: float | None = None) -> float:
        """Residual of the first-order ODE satisfied by ``phi_minus`` at real ``z``."""
        m = self.model
        if abs(z - m.mu) < 1e-12:
            # regular singular point: (1 - sigma) phi'(mu) = mu c0 / a - EI
            dphi = -self.c[1] if m.K >= 1 and self.c.size > 1 else 0.0
            return (1 - m.sigma) * dphi - (m.mu * self.c[0] / m.a - self.EI)
        h = h or 1e-4 * max(1.0, z)
        dphi = (self.phi_minus(z + h) - self.phi_minus(z - h)) / (2 * h) if z > h else \
            (-3 * self.phi_minus(z) + 4 * self.phi_minus(z + h) - self.phi_minus(z + 2 * h)) / (2 * h)
        phi = self.phi_minus(z)
        return m.a * (m.mu - z) * dphi + z * (z + m.lam - m.mu) * phi \
            + m.a * self.EI * (m.mu - z) - self.r1 * z

    def summary(self) -> dict:
        m = self.model
        return {"lambda": m.lam, "mu": m.mu, "a": m.a, "sigma": m.sigma, "K": m.K,
                "c": [float(v) for v in self.c], "r1": self.r1, "EI": self.EI,
                "phi_minus_0": self.phi_minus_0, "route": "appendix"}


def appendix_solve(model: LinearExpModel) -> AppendixSolution:
    m = model
    lam, mu, a, sig, K = m.lam, m.mu, m.a, m.sigma, m.K
    a1mu = m.A1(mu)
    I_hi = _I(m, K - sig)
    J_hi_s = _J_scaled(m, K - sig, mu)
    if abs(I_hi) < DEGENERACY_TOL:
        raise RecursionDegeneracyError("vanishing weight integral")
    B = np.zeros(K + 1)
    B[K] = 1.0
    if m.is_integer:
        I_lo = J_lo = None
        B[K - 1] = a / I_hi
        R_scaled = math.exp(-a1mu)
    else:
        I_lo = _I(m, K - sig - 1)
        J_lo_s = _J_scaled(m, K - sig - 1, mu)
        J_lo = J_lo_s * math.exp(a1mu)
        B[K - 1] = a * (K - sig) * I_lo / I_hi
        R_scaled = (K - sig) * J_lo_s
    for k in range(K, 1, -1):
        B[k - 2] = (k * a - mu * lam) * B[k] + (mu + lam) * B[k - 1]
    denom = mu / (mu - lam) * B[0] + sum(B[k] * mu**k for k in range(1, K)) \
        + mu**sig * (J_hi_s * B[K - 1] / a + R_scaled)
    if abs(denom) < DEGENERACY_TOL:
        raise RecursionDegeneracyError("normalizing divisor vanishes")
    c = B / denom
    r1 = lam * c[0]
    EI = mu / a * c[0] + (1 - sig) * c[1]
    return AppendixSolution(model=m, c=c, B=B, I_hi=I_hi, I_lo=I_lo,
                            J_hi=J_hi_s * math.exp(a1mu), J_lo=J_lo,
                            R_K=R_scaled * math.exp(a1mu), r1=float(r1), EI=float(EI))


# -- direct route ----------------------------------------------------------------


@dataclass(frozen=True)
class DirectSolution:
    model: LinearExpModel
    nu: float
    C: float
    K_dir: float
    route: str
    K_star: float | None
    density: Callable = None

    @property
    def r1(self) -> float:
        return self.model.lam * self.C

    @property
    def lam(self) -> float:
        return self.model.lam

    @property
    def mu(self) -> float:
        return self.model.mu

    def v_minus(self, x):
        x = np.asarray(x, dtype=float)
        out = np.array([self.density(float(v)) for v in np.ravel(x)]).reshape(x.shape)
        return out[()] if out.ndim == 0 else out

    def v_plus(self, x):
        return v_plus_linear(self, x)

    @property
    def phi_minus_0(self) -> float:
        return _integrate(self.density)

    @property
    def EI(self) -> float:
        return _integrate(lambda x: x * self.density(x))

    def C_from_density(self) -> float:
        """``int_0^inf exp(-mu x) v_-(x) dx``; equals ``C``."""
        return _integrate(lambda x: math.exp(-self.mu * x) * self.density(x))

    def summary(self) -> dict:
        m = self.model
        return {"lambda": m.lam, "mu": m.mu, "a": m.a, "sigma": m.sigma, "K": m.K,
                "C": self.C, "K_dir": self.K_dir, "K_star": self.K_star, "r1": self.r1,
                "EI": self.EI, "route": self.route}


def _integrate(f: Callable[[float], float]) -> float:
    val = 0.0
    for lo, hi in ((0.0, 1.0), (1.0, 4.0), (4.0, 12.0)):
        val += quad(f, lo, hi, epsabs=1e-15, epsrel=1e-12, limit=200)[0]
    val += quad(f, 12.0, math.inf, epsabs=1e-15, epsrel=1e-12, limit=200)[0]
    return val


def direct_solve(model: LinearExpModel) -> DirectSolution:
    m = model
    lam, mu, a, nu = m.lam, m.mu, m.a, m.sigma
    at, bt = -nu / 2.0, 0.5
    sa = math.sqrt(a)
    zeta0 = (lam + mu) ** 2 / (2 * a)

    if m.is_integer:
        n = m.K
        route = "hermite-even" if n % 2 == 0 else "hermite-odd"
        scale = 2.0 ** (-n / 2)

        def shape(x: float) -> float:
            y = sa * x + (lam + mu) / sa
            return math.exp(-0.5 * a * x * x - lam * x) * scale * float(hermite_prob(n, y))

        # dU/dzeta at zeta0 via He_n' = n He_{n-1}, dzeta/dy = y
        y0 = (lam + mu) / sa
        Up = scale * n * float(hermite_prob(n - 1, y0)) / y0
    else:
        if abs(nu / 2 - round(nu / 2)) < INTEGER_TOL * nu:
            raise ParameterError("Kummer branch needs lam*mu/(2a) non-integer")
        route = "kummer"

        def shape(x: float) -> float:
            zeta = 0.5 * a * (x + (lam + mu) / a) ** 2
            return math.exp(-0.5 * a * x * x - lam * x) * kummer_U(at, bt, zeta)

        Up = kummer_U_prime(at, bt, zeta0)

    rho = lam / mu
    c_per_k = (lam + mu) * Up / (lam * mu)
    mass = _integrate(shape)
    K_dir = 1.0 / (c_per_k * rho / (1 - rho) + mass)
    C = K_dir * c_per_k
    K_star = None
    if route == "hermite-even":
        h = m.K // 2
        K_star = K_dir * (-1) ** h * math.factorial(2 * h) / (math.factorial(h) * 4.0**h)

    def density(x: float) -> float:
        return K_dir * shape(x)

    return DirectSolution(model=m, nu=nu, C=float(C), K_dir=float(K_dir), route=route,
                          K_star=K_star, density=density)


def v_plus_linear(sol, x):
    """Workload density ``r1 exp(-(mu - lam) x)``."""
    x = np.asarray(x, dtype=float)
    out = sol.r1 * np.exp(-(sol.mu - sol.lam) * x)
    return out[()] if out.ndim == 0 else out
