"""Service-requirement / claim-size laws with rational Laplace-Stieltjes transforms.

Every law is carried as a pair of polynomials ``(N, D)`` in ascending-power
order, ``beta(s) = N(s) / D(s)``, with ``deg N < deg D`` and ``N(0) = D(0)``.
The named variants (exponential, Erlang, hyperexponential) can also be sampled;
a bare rational transform cannot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.polynomial import polynomial as P

__all__ = [
    "DistributionError",
    "PoleProximityError",
    "ServiceDistribution",
    "exponential",
    "erlang",
    "hyperexp",
    "rational",
    "from_json",
    "lst_eval",
]

POLE_TOL = 1e-12
COPRIME_TOL = 1e-9


class DistributionError(ValueError):
    """Invalid distribution parameters."""


class PoleProximityError(ArithmeticError):
    """The transform was evaluated too close to a pole of ``D``."""


def _trim(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    nz = np.nonzero(np.abs(c) > 0)[0]
    if nz.size == 0:
        return np.zeros(1)
    return c[: nz[-1] + 1]


@dataclass(frozen=True)
class ServiceDistribution:
    """A service/claim distribution with rational LST.

    Use the module-level constructors (:func:`exponential`, :func:`erlang`,
    :func:`hyperexp`, :func:`rational`) rather than instantiating directly.
    """

    kind: str
    params: dict[str, Any]
    num: np.ndarray = field(repr=False, compare=False)
    den: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        num, den = _trim(self.num), _trim(self.den)
        if den.size < 2:
            raise DistributionError("denominator must have degree >= 1")
        if num.size >= den.size:
            raise DistributionError("need deg N < deg D")
        if not math.isclose(num[0], den[0], rel_tol=1e-12, abs_tol=0.0):
            raise DistributionError("beta(0) != 1: n0 must equal d0")
        poles = np.roots(den[::-1])
        if np.any(poles.real >= 0):
            raise DistributionError("D has a zero with Re s >= 0")
        if num.size > 1:
            zeros = np.roots(num[::-1])
            gaps = np.abs(zeros[:, None] - poles[None, :])
            if gaps.size and gaps.min() < COPRIME_TOL * max(1.0, np.abs(poles).max()):
                raise DistributionError("N and D share a root; reduce the fraction")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        if not self.mean() > 0:
            raise DistributionError("mean must be positive")

    # -- transform ---------------------------------------------------------

    @property
    def poles(self) -> np.ndarray:
        """Zeros of ``D``, i.e. the points ``-mu_j``."""
        return np.roots(self.den[::-1])

    @property
    def degree(self) -> int:
        return self.den.size - 1

    def lst(self, s):
        """``beta(s) = N(s)/D(s)``; accepts scalars or arrays, real or complex."""
        s = np.asarray(s)
        d = P.polyval(s, self.den)
        if np.any(np.abs(d) < POLE_TOL * np.abs(self.den).max()):
            raise PoleProximityError(f"|D(s)| below tolerance near s={s}")
        out = P.polyval(s, self.num) / d
        return out[()] if out.ndim == 0 else out

    def lst_derivative(self, s):
        """``beta'(s)`` from the quotient rule on the polynomial pair."""
        s = np.asarray(s)
        n, d = self.num, self.den
        dn, dd = P.polyder(n) if n.size > 1 else np.zeros(1), P.polyder(d)
        D = P.polyval(s, d)
        out = (P.polyval(s, dn) * D - P.polyval(s, n) * P.polyval(s, dd)) / D**2
        return out[()] if out.ndim == 0 else out

    def mean(self) -> float:
        n1 = self.num[1] if self.num.size > 1 else 0.0
        return float((self.den[1] - n1) / self.den[0])

    def rational_form(self) -> tuple[np.ndarray, np.ndarray]:
        """Ascending coefficients ``(N, D)``."""
        return self.num.copy(), self.den.copy()

    # -- named-variant extras ------------------------------------------------

    @property
    def samplable(self) -> bool:
        return self.kind in ("exponential", "erlang", "hyperexp")

    def sample(self, rng: np.random.Generator, size=None):
        """Exact draws from ``B``."""
        p = self.params
        if self.kind == "exponential":
            return rng.exponential(1.0 / p["mu"], size)
        if self.kind == "erlang":
            return rng.gamma(p["k"], 1.0 / p["mu"], size)
        if self.kind == "hyperexp":
            w = np.asarray(p["p"])
            mu = np.asarray(p["mu"])
            idx = rng.choice(w.size, size=size, p=w)
            return rng.exponential(1.0, size) / mu[idx]
        raise NotImplementedError("sampling a general rational LST is not supported")

    def sf(self, x):
        """Survival function ``P(B > x)`` for the named variants."""
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == "exponential":
            out = np.exp(-p["mu"] * x)
        elif self.kind == "erlang":
            mx = p["mu"] * x
            term = np.ones_like(mx)
            acc = np.ones_like(mx)
            for j in range(1, p["k"]):
                term = term * mx / j
                acc = acc + term
            out = np.exp(-mx) * acc
        elif self.kind == "hyperexp":
            out = sum(w * np.exp(-m * x) for w, m in zip(p["p"], p["mu"]))
        else:
            raise NotImplementedError("sf needs a named variant")
        out = np.where(x < 0, 1.0, out)
        return out[()] if out.ndim == 0 else out

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == "exponential":
            out = p["mu"] * np.exp(-p["mu"] * x)
        elif self.kind == "erlang":
            k, mu = p["k"], p["mu"]
            out = mu**k * x ** (k - 1) * np.exp(-mu * x) / math.factorial(k - 1)
        elif self.kind == "hyperexp":
            out = sum(w * m * np.exp(-m * x) for w, m in zip(p["p"], p["mu"]))
        else:
            raise NotImplementedError("pdf needs a named variant")
        out = np.where(x < 0, 0.0, out)
        return out[()] if out.ndim == 0 else out

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        if self.kind == "rational":
            return {"type": "rational", "num": self.num.tolist(), "den": self.den.tolist()}
        return {"type": self.kind, **self.params}


def exponential(mu: float) -> ServiceDistribution:
    if not mu > 0:
        raise DistributionError("rate must be positive")
    mu = float(mu)
    return ServiceDistribution("exponential", {"mu": mu}, np.array([mu]), np.array([mu, 1.0]))


def erlang(k: int, mu: float) -> ServiceDistribution:
    if int(k) != k or k < 1:
        raise DistributionError("phases must be a positive integer")
    if not mu > 0:
        raise DistributionError("rate must be positive")
    k, mu = int(k), float(mu)
    den = P.polypow([mu, 1.0], k)
    return ServiceDistribution("erlang", {"k": k, "mu": mu}, np.array([mu**k]), den)


def hyperexp(p, mu) -> ServiceDistribution:
    p = [float(v) for v in p]
    mu = [float(v) for v in mu]
    if len(p) != len(mu) or not p:
        raise DistributionError("weights and rates must have equal, nonzero length")
    if any(v <= 0 for v in p) or not math.isclose(sum(p), 1.0, abs_tol=1e-12):
        raise DistributionError("weights must be positive and sum to 1")
    if any(v <= 0 for v in mu):
        raise DistributionError("rates must be positive")
    # equal rates would leave a common factor in (N, D)
    merged: dict[float, float] = {}
    for w, m in zip(p, mu):
        merged[m] = merged.get(m, 0.0) + w
    rates = list(merged)
    den = np.array([1.0])
    for m in rates:
        den = P.polymul(den, [m, 1.0])
    num = np.zeros(1)
    for m in rates:
        others = np.array([1.0])
        for m2 in rates:
            if m2 != m:
                others = P.polymul(others, [m2, 1.0])
        num = P.polyadd(num, merged[m] * m * others)
    return ServiceDistribution("hyperexp", {"p": p, "mu": mu}, num, den)


def rational(num, den) -> ServiceDistribution:
    return ServiceDistribution("rational", {}, np.asarray(num, float), np.asarray(den, float))


def from_json(spec: dict[str, Any]) -> ServiceDistribution:
    kind = spec.get("type")
    try:
        if kind == "exponential":
            return exponential(spec["mu"])
        if kind == "erlang":
            return erlang(spec["k"], spec["mu"])
        if kind == "hyperexp":
            return hyperexp(spec["p"], spec["mu"])
        if kind == "rational":
            return rational(spec["num"], spec["den"])
    except KeyError as exc:
        raise DistributionError(f"missing field {exc} for {kind!r}") from None
    raise DistributionError(f"unknown distribution type {kind!r}")


def lst_eval(dist: ServiceDistribution, s):
    """Functional alias for :meth:`ServiceDistribution.lst`."""
    return dist.lst(s)
