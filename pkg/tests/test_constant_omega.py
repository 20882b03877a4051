import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from numpy.polynomial import polynomial as P
from scipy.integrate import quad

from whkernel.constant_omega import (UnstableSystemError, classical_ruin, solve_insurance,
                                     solve_queue)
from whkernel.dist import erlang, exponential, hyperexp
from whkernel.equations import (insurance_minus_residual, insurance_plus_residual,
                                queue_minus_residual, queue_plus_residual)

DELTA = (1 + math.sqrt(17)) / 2


@pytest.fixture(scope="module")
def q_exp():
    return solve_queue(1.0, 2.0, exponential(2.0))


@pytest.fixture(scope="module")
def q_erl():
    return solve_queue(1.0, 2.0, erlang(2, 4.0))


@pytest.fixture(scope="module")
def ins_exp():
    return solve_insurance(1.0, 1.0, 2.0, exponential(2.0))


def _product_form(sol, s):
    # workload transform written as M/G/1 transform times a correction factor
    lam, om, d = sol.lam, sol.omega, sol.delta
    one_b = 1 - sol.dist.lst(s)
    first = (1 - sol.rho) * lam * one_b / (s - lam * one_b)
    second = d / om * ((d - om) / lam * s / one_b - d) / (s - d)
    return first * second


# -- queue --------------------------------------------------------------------------


def test_queue_exponential_values(q_exp):
    assert q_exp.delta == pytest.approx(DELTA, abs=1e-12)
    assert q_exp.A == pytest.approx(1.6403882, abs=1e-7)
    assert q_exp.A == pytest.approx(0.5 * DELTA**2 / 2, abs=1e-12)
    assert q_exp.phi_minus_0 == pytest.approx(0.6403882, abs=1e-7)
    assert q_exp.phi_minus_0 + q_exp.phi_plus_0 == pytest.approx(1.0, abs=1e-12)


def test_queue_erlang_delta_against_companion_roots(q_erl):
    n, d = q_erl.dist.rational_form()
    lam, om = 1.0, 2.0
    poly = P.polysub(P.polysub(P.polymul([0, 1], d), lam * P.polysub(d, n)), om * d)
    roots = np.roots(poly[::-1])
    pos = roots[(np.abs(roots.imag) < 1e-12) & (roots.real > 0)].real
    assert pos.size == 1
    assert q_erl.delta == pytest.approx(pos[0], abs=1e-12)


def test_v_minus(q_exp):
    assert q_exp.v_minus(0.0) == pytest.approx(1.6403882, abs=1e-7)
    assert q_exp.v_minus(60.0) < 1e-60
    integral = quad(q_exp.v_minus, 0, math.inf, epsabs=1e-14)[0]
    assert integral == pytest.approx(q_exp.phi_minus_0, abs=1e-12)


def test_phi_plus_special_points(q_exp, q_erl):
    assert q_exp.phi_plus(0.0) == pytest.approx(0.3596118, abs=1e-7)
    for sol in (q_exp, q_erl):
        assert sol.phi_plus(0.0) == pytest.approx(1 - sol.phi_minus_0, abs=1e-12)
        # removable point at delta: compare with neighbours
        d = sol.delta
        mid = sol.phi_plus(d)
        side = 0.5 * (sol.phi_plus(d - 1e-2) + sol.phi_plus(d + 1e-2))
        assert mid == pytest.approx(side, abs=1e-4)
        assert abs(sol.phi_plus(1e6)) < 1e-5
    assert q_exp.phi_plus(1.0) == pytest.approx(_product_form(q_exp, 1.0), abs=1e-12)


@pytest.mark.parametrize("which", ["exp", "erl"])
def test_factorization_identity_random_points(which, q_exp, q_erl):
    sol = q_exp if which == "exp" else q_erl
    rng = np.random.default_rng(7)
    s = rng.uniform(1e-3, 10, 20) + 1j * rng.uniform(-10, 10, 20)
    for v in s:
        assert abs(sol.phi_plus(v) - _product_form(sol, v)) < 1e-10


def test_v_plus_exponential(q_exp):
    assert q_exp.v_plus(0.0) == pytest.approx(0.3596118, abs=1e-7)
    integral = quad(q_exp.v_plus, 0, math.inf, epsabs=1e-14)[0]
    assert integral == pytest.approx(q_exp.phi_plus_0, abs=1e-12)
    # log slope is -(mu - lambda)
    x = np.array([0.5, 2.0])
    slope = np.diff(np.log(q_exp.v_plus(x)))[0] / 1.5
    assert slope == pytest.approx(-1.0, abs=1e-12)


def test_v_plus_coefficient_cross_check(q_exp):
    # eta: other zero of s^2 + (mu - lam - omega) s - omega mu, delta eta = -omega mu
    mu, lam, om, d = 2.0, 1.0, 2.0, q_exp.delta
    eta = -om * mu / d
    ours = (1 - q_exp.rho) * d * (d - om) / om
    with_plus = (mu - lam) * (mu + eta) * d**2 / (mu**2 * om)
    with_minus = (mu - lam) * (mu - eta) * d**2 / (mu**2 * om)
    assert ours == pytest.approx(with_plus, abs=1e-12)
    assert with_minus / (mu - lam) != pytest.approx(q_exp.phi_plus_0, abs=1e-3)
    assert ours / (mu - lam) == pytest.approx(q_exp.phi_plus_0, abs=1e-12)


def test_v_plus_erlang_inversion(q_erl):
    total = quad(q_erl.v_plus, 0, 40, limit=200, epsabs=1e-10)[0]
    assert total == pytest.approx(q_erl.phi_plus_0, abs=1e-5)
    # initial value theorem
    assert q_erl.v_plus(0.0) == pytest.approx(1e5 * q_erl.phi_plus(1e5).real, rel=1e-3)
    assert q_erl.v_plus(1e-3) == pytest.approx(q_erl.v_plus(0.0), abs=5e-3)


@pytest.mark.parametrize("which", ["exp", "erl"])
def test_total_mass_by_quadrature(which, q_exp, q_erl):
    sol = q_exp if which == "exp" else q_erl
    m = quad(sol.v_minus, 0, math.inf)[0] + quad(sol.v_plus, 0, 40, limit=200)[0]
    assert m == pytest.approx(1.0, abs=1e-6)


def test_exceptional_first_service_exponential(q_exp):
    efs = q_exp.exceptional_first_service()
    for s in (0.0, 0.3, 1.0, 4.0, 2 + 3j):
        assert abs(efs.lst(s) - q_exp.dist.lst(s)) < 1e-12
    assert efs.mean == pytest.approx(0.5, abs=1e-12)
    assert efs.pi0 == pytest.approx(1 - q_exp.rho, abs=1e-12)
    assert efs.lst(q_exp.delta) == pytest.approx(q_exp.dist.lst(q_exp.delta), abs=1e-10)


@pytest.mark.parametrize("dist", [erlang(2, 4.0), hyperexp([0.3, 0.7], [1.0, 5.0])])
@pytest.mark.parametrize("lam", [1.0, 1.5])
def test_exceptional_first_service_identity(dist, lam):
    sol = solve_queue(lam, 2.0, dist)
    efs = sol.exceptional_first_service()
    assert efs.lst(0.0) == pytest.approx(1.0, abs=1e-12)
    h = 1e-5
    assert -(efs.lst(h) - efs.lst(-h)).real / (2 * h) == pytest.approx(efs.mean, rel=1e-6)
    bd = dist.lst(sol.delta)
    rng = np.random.default_rng(3)
    for s in rng.uniform(0.05, 10, 10) + 1j * rng.uniform(-5, 5, 10):
        one_b = 1 - dist.lst(s)
        bracket = ((sol.delta - sol.omega) * s - lam * sol.delta * one_b) / \
            ((s - lam * one_b) * (s - sol.delta))
        # the bracket carries the factor lam (1 - beta(delta)) in front
        rhs = lam * (1 - bd) * (1 - efs.lst(s)) / (s - lam * one_b)
        assert abs(bracket - rhs) < 1e-10
        # conditional workload transform of the exceptional-service queue
        cond = efs.pi0 * lam / (1 - efs.pi0) * (1 - efs.lst(s)) / (s - lam * one_b)
        assert abs(sol.phi_plus(s) / sol.phi_plus_0 - cond) < 1e-10


@pytest.mark.parametrize("dist", [exponential(2.0), erlang(2, 4.0)])
def test_queue_level_crossing(dist):
    sol = solve_queue(1.0, 2.0, dist)
    for x in (0.1, 0.5, 1.0, 2.0, 4.0):
        assert abs(queue_plus_residual(x, 1.0, dist, sol.v_plus, sol.v_minus)) < 1e-6
        assert abs(queue_minus_residual(x, 1.0, dist, sol.v_minus, lambda y: 2.0)) < 1e-6


def test_unstable():
    with pytest.raises(UnstableSystemError):
        solve_queue(1.0, 2.0, exponential(1.0))
    with pytest.raises(UnstableSystemError):
        solve_insurance(2.0, 1.0, 2.0, exponential(2.0))
    with pytest.raises(ValueError):
        solve_queue(1.0, 0.0, exponential(2.0))


@st.composite
def stable_queue(draw):
    lam = draw(st.floats(0.1, 5.0))
    om = draw(st.floats(0.05, 20.0))
    kind = draw(st.sampled_from(["exp", "erl", "hyp"]))
    rho = draw(st.floats(0.05, 0.95))
    mean = rho / lam
    if kind == "exp":
        dist = exponential(1 / mean)
    elif kind == "erl":
        k = draw(st.integers(2, 4))
        dist = erlang(k, k / mean)
    else:
        p = draw(st.floats(0.1, 0.9))
        r = draw(st.floats(0.2, 5.0))
        # rates m1 = r m2 with p/m1 + (1-p)/m2 = mean
        m2 = (p / r + 1 - p) / mean
        assume(abs(r - 1) > 1e-3)
        dist = hyperexp([p, 1 - p], [r * m2, m2])
    return lam, om, dist


@given(stable_queue())
@settings(max_examples=60, deadline=None)
def test_queue_invariants(args):
    lam, om, dist = args
    sol = solve_queue(lam, om, dist)
    f = lam * dist.lst(sol.delta) + sol.delta - lam - om
    assert abs(f) <= 1e-12 * (lam + om)
    assert sol.delta > 0
    assert sol.A == pytest.approx((1 - sol.rho) * sol.delta**2 / om, rel=1e-14)
    assert sol.phi_minus_0 + sol.phi_plus(0.0) == pytest.approx(1.0, abs=1e-10)
    assert 0 < sol.phi_minus_0 < 1
    # insurance with c = 1 shares delta
    ins = solve_insurance(lam, 1.0, om, dist)
    assert abs(ins.delta - sol.delta) < 1e-12 * max(1.0, sol.delta)


# -- insurance ------------------------------------------------------------------------------


def test_insurance_values(ins_exp):
    assert ins_exp.delta == pytest.approx(2.5615528, abs=1e-7)
    assert ins_exp.Z == pytest.approx(-0.6403882, abs=1e-7)
    assert ins_exp.psi_minus_0 == pytest.approx(0.25, abs=1e-12)
    assert ins_exp.psi_minus_0 == pytest.approx((1 - 1 * 0.5) / 2, abs=1e-12)
    assert ins_exp.u_plus(0.0) + ins_exp.u_minus(0.0) == pytest.approx(1.0, abs=1e-12)
    assert ins_exp.u_minus(0.0) == pytest.approx(0.6403882, abs=1e-7)
    assert ins_exp.u_tilde_minus(0.0) == pytest.approx(0.3596118, abs=1e-7)
    assert ins_exp.u_plus(0.0) == pytest.approx(0.3596118, abs=1e-7)
    assert ins_exp.u_tilde_minus(50.0) == pytest.approx(1.0, abs=1e-12)


def test_insurance_u_minus_quadratic_form(ins_exp):
    nu, lam, c = 2.0, 1.0, 1.0
    eta = ins_exp._eta()
    assert eta < 0
    for x in (0.0, 0.5, 2.0):
        alt = (nu - lam / c) / (-eta) * math.exp(-ins_exp.delta * x)
        assert ins_exp.u_minus(x) == pytest.approx(alt, abs=1e-12)


def test_insurance_transforms(ins_exp):
    # initial value theorem
    s = 1e7
    assert s * ins_exp.psi_plus(s) == pytest.approx(ins_exp.u_plus(0.0), abs=1e-5)
    # Psi_+(0) is the integral of u_+
    total = quad(ins_exp.u_plus, 0, math.inf)[0]
    assert ins_exp.psi_plus(0.0) == pytest.approx(total, abs=1e-10)
    x = np.linspace(0, 10, 101)
    assert np.all(np.diff(ins_exp.u_plus(x)) <= 0)


def test_exponential_detection_survival_identity(ins_exp):
    for x in (0.0, 0.5, 1.0, 2.0):
        assert 1 - ins_exp.u_plus(x) == pytest.approx(ins_exp.ai_survival_hat(x), abs=1e-8)
    assert ins_exp.ai_survival_hat(0.0) == pytest.approx(0.6403882, abs=1e-7)
    assert ins_exp.ai_survival_hat(80.0) == pytest.approx(1.0, abs=1e-12)
    # closed form against the exponential average of classical survival
    d = ins_exp.delta
    val = quad(lambda t: d * math.exp(-d * t) * (1 - classical_ruin(1.0 + t, 1.0, 1.0, 2.0)),
               0, math.inf, epsabs=1e-14, epsrel=1e-13)[0]
    assert ins_exp.ai_survival_hat(1.0) == pytest.approx(val, abs=1e-8)


def test_ai_unsupported():
    sol = solve_insurance(1.0, 1.0, 2.0, erlang(2, 4.0))
    with pytest.raises(NotImplementedError):
        sol.ai_survival_hat(1.0)


def test_insurance_erlang_inversion():
    sol = solve_insurance(1.0, 1.0, 2.0, erlang(2, 4.0))
    x = np.array([0.05, 0.5, 1.0, 3.0])
    u = sol.u_plus(x)
    assert np.all(np.diff(u) < 0)
    # continuity across zero surplus
    assert float(sol.u_plus(1e-4)) == pytest.approx(sol.u_tilde_minus(0.0), abs=1e-4)
    assert 1e7 * sol.psi_plus(1e7) == pytest.approx(sol.u_tilde_minus(0.0), abs=1e-5)
    total = quad(sol.u_plus, 0, 40, limit=200)[0]
    assert total == pytest.approx(sol.psi_plus(0.0), abs=1e-5)


@pytest.mark.parametrize("dist", [exponential(2.0), erlang(2, 4.0)])
def test_insurance_integro_differential_equations(dist):
    sol = solve_insurance(1.0, 1.0, 2.0, dist)
    up = (lambda x: float(sol.u_plus(x))) if dist.kind == "exponential" else \
        (lambda x: float(sol.u_plus(max(x, 1e-9))))
    for x in (0.25, 0.5, 1.0, 2.0):
        r_plus = insurance_plus_residual(x, 1.0, 1.0, dist, up, sol.u_tilde_minus)
        r_minus = insurance_minus_residual(x, 1.0, 1.0, dist, sol.u_tilde_minus, lambda y: 2.0)
        assert abs(r_plus) < 1e-5
        assert abs(r_minus) < 1e-5


def test_insurance_equation_uses_bankruptcy_probability(ins_exp):
    # with the survival probability in the jump term the balance fails
    r = insurance_plus_residual(0.5, 1.0, 1.0, ins_exp.dist, ins_exp.u_plus, ins_exp.u_minus)
    assert abs(r) > 0.1


def test_large_omega_recovers_classical_ruin():
    x = np.array([0.0, 0.5, 1.0, 2.0])
    sol = solve_insurance(1.0, 1.0, 1e8, exponential(2.0))
    np.testing.assert_allclose(sol.u_plus(x), classical_ruin(x, 1.0, 1.0, 2.0), atol=1e-4)


def test_small_omega_bankruptcy_vanishes():
    sol = solve_insurance(1.0, 1.0, 1e-6, exponential(2.0))
    assert sol.u_plus(0.0) < 1e-3


def test_summaries(q_exp, ins_exp):
    s = q_exp.summary()
    assert set(s) >= {"lambda", "omega", "rho", "delta", "A", "phi_minus_0", "phi_plus_0"}
    s = ins_exp.summary()
    assert set(s) >= {"lambda", "c", "omega", "rho", "delta", "Z"}
