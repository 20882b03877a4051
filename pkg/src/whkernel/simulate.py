"""Monte Carlo oracle for the workload/inventory queue and the bankruptcy model.

Clearing and bankruptcy epochs are drawn by exact inversion of the
cumulative hazard, and occupancy is integrated exactly along the
piecewise-linear path. Each replication runs in a numba kernel seeded from
its own ``SeedSequence`` child, so results are bit-reproducible regardless of
the thread count.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numba
import numpy as np

from .dist import ServiceDistribution
from .numerics import find_root_monotone

__all__ = [
    "SimConfigError",
    "OmegaSpec",
    "SimConfig",
    "DensityEstimate",
    "BankruptcyEstimate",
    "simulate_workload",
    "simulate_bankruptcy",
    "adjustment_coefficient",
    "survival_threshold",
]

THREADS_ENV = "WHKERNEL_THREADS"


class SimConfigError(ValueError):
    pass


@dataclass(frozen=True)
class OmegaSpec:
    """Clearing / bankruptcy rate: ``constant`` (value = omega) or ``linear`` (value = a)."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("constant", "linear"):
            raise SimConfigError(f"unknown rate kind {self.kind!r}")
        if not (self.value > 0 and math.isfinite(self.value)):
            raise SimConfigError("rate parameter must be positive and finite")

    @property
    def code(self) -> int:
        return 0 if self.kind == "constant" else 1


@dataclass(frozen=True)
class SimConfig:
    seed: int = 12345
    replications: int = 10
    total_time: float = 1e6
    burn_in: float = 1e3
    bin_width: float = 0.05
    x_max_neg: float = 10.0
    x_max_pos: float = 10.0
    survival_M: float | None = None
    eps_tail: float = 1e-6
    n_paths: int = 100_000

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise SimConfigError("seed must fit in 64 bits")
        if self.replications < 2:
            raise SimConfigError("need at least 2 replications for standard errors")
        if not (0 <= self.burn_in < self.total_time):
            raise SimConfigError("need 0 <= burn_in < total_time")
        if not self.bin_width > 0:
            raise SimConfigError("bin width must be positive")
        if not (self.x_max_neg > 0 and self.x_max_pos > 0):
            raise SimConfigError("histogram range must be positive")
        if self.survival_M is not None and not self.survival_M > 0:
            raise SimConfigError("survival threshold must be positive")
        if not 0 < self.eps_tail < 1:
            raise SimConfigError("eps_tail must lie in (0, 1)")
        if self.n_paths < 1:
            raise SimConfigError("n_paths must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


# -- numba kernels --------------------------------------------------------------

_EXP, _ERLANG, _HYPER = 0, 1, 2


@numba.njit(cache=True, nogil=True)
def _draw_service(kind, k, probs, rates):
    if kind == _EXP:
        return np.random.exponential(1.0 / rates[0])
    if kind == _ERLANG:
        acc = 0.0
        for _ in range(k):
            acc += np.random.exponential(1.0)
        return acc / rates[0]
    u = np.random.random()
    cum = 0.0
    for j in range(probs.size):
        cum += probs[j]
        if u < cum:
            return np.random.exponential(1.0) / rates[j]
    return np.random.exponential(1.0) / rates[probs.size - 1]


@numba.njit(cache=True, nogil=True)
def _deposit(hist, lo, hi, w):
    # add the overlap of the level interval [lo, hi] with each bin; unit speed
    # makes level length equal to time. Returns time falling beyond the range.
    nb = hist.size
    top = nb * w
    over = 0.0
    if hi > top:
        over = hi - max(lo, top)
        hi = top
    if hi <= lo:
        return over
    i0 = int(lo / w)
    i1 = min(int(hi / w), nb - 1)
    for i in range(i0, i1 + 1):
        a = max(lo, i * w)
        b = min(hi, (i + 1) * w)
        if b > a:
            hist[i] += b - a
    return over


@numba.njit(cache=True, nogil=True)
def _clearing_time(mode, par, inv):
    e = np.random.exponential(1.0)
    if mode == 0:
        return e / par
    return -inv + math.sqrt(inv * inv + 2.0 * e / par)


@numba.njit(cache=True, nogil=True)
def _workload_kernel(seed, lam, kind, k, probs, rates, mode, par, t_total, burn, w,
                     hist_neg, hist_pos):
    """Returns (time_neg, int_inventory, n_clear, n_arrivals, overflow, end_time)."""
    np.random.seed(seed)
    t = 0.0
    x = 0.0
    time_neg = 0.0
    int_inv = 0.0
    n_clear = 0
    n_arr = 0
    over = 0.0
    while t < t_total:
        ta = np.random.exponential(1.0 / lam)
        if x > 0.0:
            dur = min(ta, x)
            x_end = x - dur
            t_end = t + dur
            if t_end > burn:
                # keep only the part of the segment after burn-in
                lo_t = max(t, burn)
                x_top = x - (lo_t - t)
                over += _deposit(hist_pos, x_end, x_top, w)
            t = t_end
            x = x_end
            if ta <= dur:
                x += _draw_service(kind, k, probs, rates)
                n_arr += 1
        else:
            inv = -x
            tc = _clearing_time(mode, par, inv)
            dur = min(ta, tc)
            t_end = t + dur
            if t_end > burn:
                lo_t = max(t, burn)
                i_lo = inv + (lo_t - t)
                i_hi = inv + dur
                time_neg += t_end - lo_t
                int_inv += 0.5 * (i_lo + i_hi) * (i_hi - i_lo)
                over += _deposit(hist_neg, i_lo, i_hi, w)
            t = t_end
            if ta < tc:
                x = -(inv + dur) + _draw_service(kind, k, probs, rates)
                n_arr += 1
            else:
                x = 0.0
                if t > burn:
                    n_clear += 1
    return time_neg, int_inv, n_clear, n_arr, over, t


@numba.njit(cache=True, nogil=True)
def _bankruptcy_kernel(seed, n, x0, lam, c, kind, k, probs, rates, mode, par, m_surv):
    np.random.seed(seed)
    bankrupt = 0
    for _ in range(n):
        cap = x0
        while True:
            if cap >= m_surv:
                break
            ta = np.random.exponential(1.0 / lam)
            if cap >= 0.0:
                if cap + c * ta >= m_surv:
                    break
                cap += c * ta - _draw_service(kind, k, probs, rates)
                continue
            y0 = -cap
            t_zero = y0 / c
            e = np.random.exponential(1.0)
            if mode == 0:
                tb = e / par
            else:
                # hazard a (y0 - c s) until the surplus reaches zero
                cap_h = par * y0 * y0 / (2.0 * c)
                tb = np.inf if e >= cap_h else (y0 - math.sqrt(y0 * y0 - 2.0 * c * e / par)) / c
            if tb < ta and tb < t_zero:
                bankrupt += 1
                break
            if t_zero <= ta:
                cap = 0.0
            else:
                cap += c * ta - _draw_service(kind, k, probs, rates)
    return bankrupt


# -- drivers ------------------------------------------------------------------------


def _service_args(dist: ServiceDistribution):
    if not dist.samplable:
        raise SimConfigError("simulation needs an exponential, Erlang or hyperexponential law")
    p = dist.params
    if dist.kind == "exponential":
        return _EXP, 1, np.ones(1), np.array([p["mu"]])
    if dist.kind == "erlang":
        return _ERLANG, int(p["k"]), np.ones(1), np.array([p["mu"]])
    return _HYPER, 1, np.asarray(p["p"], float), np.asarray(p["mu"], float)


def _seeds(seed: int, n: int) -> list[int]:
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(ch.generate_state(1, np.uint32)[0]) for ch in children]


def _threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise SimConfigError(f"{THREADS_ENV} must be an integer") from None
        if n < 1:
            raise SimConfigError(f"{THREADS_ENV} must be >= 1")
        return n
    return os.cpu_count() or 1


def _run_parallel(fn, jobs):
    n = min(_threads(), len(jobs))
    if n <= 1:
        return [fn(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, jobs))


def _mean_se(x: np.ndarray):
    x = np.asarray(x, float)
    return x.mean(axis=0), x.std(axis=0, ddof=1) / math.sqrt(x.shape[0])


@dataclass
class DensityEstimate:
    """Time-stationary occupancy estimates; densities are per unit level."""

    edges_neg: np.ndarray
    density_neg: np.ndarray
    se_neg: np.ndarray
    edges_pos: np.ndarray
    density_pos: np.ndarray
    se_pos: np.ndarray
    phi_minus_0: float
    phi_minus_0_se: float
    phi_plus_0: float
    phi_plus_0_se: float
    EI: float
    EI_se: float
    clearing_rate: float
    clearing_rate_se: float
    overflow_fraction: float
    n_arrivals: int
    seed: int
    config: dict = field(default_factory=dict)

    def to_csv(self, side: str) -> str:
        """``bin_left, bin_right, density, stderr`` for ``side`` in {inventory, workload}."""
        if side == "inventory":
            e, d, s = self.edges_neg, self.density_neg, self.se_neg
        elif side == "workload":
            e, d, s = self.edges_pos, self.density_pos, self.se_pos
        else:
            raise ValueError(f"unknown side {side!r}")
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["bin_left", "bin_right", "density", "stderr"])
        for i in range(d.size):
            wr.writerow([f"{v:.17g}" for v in (e[i], e[i + 1], d[i], s[i])])
        return buf.getvalue()

    def summary(self) -> dict:
        keys = ("phi_minus_0", "phi_minus_0_se", "phi_plus_0", "phi_plus_0_se", "EI", "EI_se",
                "clearing_rate", "clearing_rate_se", "overflow_fraction", "n_arrivals", "seed")
        out = {k: getattr(self, k) for k in keys}
        out["config"] = self.config
        return out


def simulate_workload(lam: float, dist: ServiceDistribution, omega: OmegaSpec,
                      config: SimConfig) -> DensityEstimate:
    if not lam > 0:
        raise SimConfigError("lambda must be positive")
    rho = lam * dist.mean()
    if rho >= 1:
        raise SimConfigError(f"rho = {rho:.6g} >= 1: no steady state")
    kind, k, probs, rates = _service_args(dist)
    w = config.bin_width
    nneg = int(math.ceil(config.x_max_neg / w - 1e-9))
    npos = int(math.ceil(config.x_max_pos / w - 1e-9))
    seeds = _seeds(config.seed, config.replications)

    def one(sd):
        hn = np.zeros(nneg)
        hp = np.zeros(npos)
        res = _workload_kernel(sd, lam, kind, k, probs, rates, omega.code, omega.value,
                               config.total_time, config.burn_in, w, hn, hp)
        return hn, hp, res

    out = _run_parallel(one, seeds)
    dens_neg, dens_pos, fneg, ei, rate, over, narr = [], [], [], [], [], [], 0
    for hn, hp, (tneg, iinv, ncl, na, ov, t_end) in out:
        # the last segment may run past total_time; it is kept whole
        span = t_end - config.burn_in
        dens_neg.append(hn / (span * w))
        dens_pos.append(hp / (span * w))
        fneg.append(tneg / span)
        ei.append(iinv / span)
        rate.append(ncl / span)
        over.append(ov / span)
        narr += na
    dn, sn = _mean_se(np.array(dens_neg))
    dp, sp = _mean_se(np.array(dens_pos))
    pm, pm_se = _mean_se(np.array(fneg))
    e_mean, e_se = _mean_se(np.array(ei))
    r_mean, r_se = _mean_se(np.array(rate))
    return DensityEstimate(
        edges_neg=np.arange(nneg + 1) * w, density_neg=dn, se_neg=sn,
        edges_pos=np.arange(npos + 1) * w, density_pos=dp, se_pos=sp,
        phi_minus_0=float(pm), phi_minus_0_se=float(pm_se),
        phi_plus_0=float(1 - pm), phi_plus_0_se=float(pm_se),
        EI=float(e_mean), EI_se=float(e_se),
        clearing_rate=float(r_mean), clearing_rate_se=float(r_se),
        overflow_fraction=float(np.mean(over)), n_arrivals=int(narr), seed=config.seed,
        config={"lambda": lam, "dist": dist.to_json(), "omega": asdict(omega),
                **config.to_dict()})


# -- bankruptcy ------------------------------------------------------------------


def adjustment_coefficient(lam: float, c: float, dist: ServiceDistribution) -> float:
    """Positive root ``R`` of ``lam (beta(-R) - 1) = c R``."""
    if dist.kind == "exponential":
        return dist.params["mu"] - lam / c
    pole = float(np.min(np.abs(dist.poles.real)))

    def g(r):
        return float(lam * (dist.lst(-r) - 1.0) - c * r)

    # g(0) = 0, g'(0) = lam E B - c < 0 and g -> +inf at the pole
    return find_root_monotone(g, 1e-9 * pole, pole * (1 - 1e-4))


def survival_threshold(lam: float, c: float, dist: ServiceDistribution, eps: float) -> float:
    """Level ``M`` from which classical ruin has probability at most ``eps``."""
    R = adjustment_coefficient(lam, c, dist)
    if dist.kind == "exponential":
        nu = dist.params["mu"]
        return max(math.log(lam / (nu * c * eps)) / R, 1e-12)
    return math.log(1.0 / eps) / R


@dataclass
class BankruptcyEstimate:
    x0: float
    probability: float
    stderr: float
    ci_low: float
    ci_high: float
    n_paths: int
    n_bankrupt: int
    threshold_M: float
    eps_tail: float
    seed: int
    config: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return asdict(self)


def simulate_bankruptcy(lam: float, c: float, omega: OmegaSpec, dist: ServiceDistribution,
                        x0: float, config: SimConfig) -> BankruptcyEstimate:
    if not (lam > 0 and c > 0):
        raise SimConfigError("lambda and c must be positive")
    rho = lam * dist.mean() / c
    if rho >= 1:
        raise SimConfigError(f"rho = {rho:.6g} >= 1: ruin is certain")
    kind, k, probs, rates = _service_args(dist)
    M = config.survival_M or survival_threshold(lam, c, dist, config.eps_tail)
    if x0 >= M:
        M = x0 + M
    reps = config.replications
    sizes = [config.n_paths // reps + (1 if i < config.n_paths % reps else 0) for i in range(reps)]
    seeds = _seeds(config.seed, reps)

    def one(job):
        sd, n = job
        return _bankruptcy_kernel(sd, n, float(x0), lam, c, kind, k, probs, rates,
                                  omega.code, omega.value, M)

    hits = _run_parallel(one, list(zip(seeds, sizes)))
    nb = int(sum(hits))
    n = config.n_paths
    p = nb / n
    se = math.sqrt(max(p * (1 - p), 0.0) / n)
    return BankruptcyEstimate(x0=float(x0), probability=p, stderr=se,
                              ci_low=max(p - 1.96 * se, 0.0), ci_high=min(p + 1.96 * se, 1.0),
                              n_paths=n, n_bankrupt=nb, threshold_M=M,
                              eps_tail=config.eps_tail, seed=config.seed,
                              config={"lambda": lam, "c": c, "omega": asdict(omega),
                                      "dist": dist.to_json(), **config.to_dict()})

