import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from whkernel.dist import (DistributionError, PoleProximityError, erlang, exponential,
                           from_json, hyperexp, lst_eval, rational)

rates = st.floats(min_value=0.1, max_value=20.0)


def named_dists():
    return st.one_of(
        rates.map(exponential),
        st.builds(erlang, st.integers(1, 6), rates),
        st.builds(lambda p, m1, m2: hyperexp([p, 1 - p], [m1, m2]),
                  st.floats(0.05, 0.95), rates, rates),
    )


def test_lst_examples():
    assert lst_eval(exponential(2.0), 0.0) == 1.0
    assert lst_eval(exponential(2.0), 2.0) == pytest.approx(0.5, abs=1e-15)
    assert lst_eval(erlang(2, 3.0), 1.0) == pytest.approx(0.5625, abs=1e-15)


def test_erlang_lst_against_density_quadrature():
    d = erlang(2, 3.0)
    val = quad(lambda x: math.exp(-x) * d.pdf(x), 0, math.inf, epsabs=1e-14)[0]
    assert val == pytest.approx(0.5625, abs=1e-12)


def test_means():
    assert exponential(2.0).mean() == pytest.approx(0.5)
    assert erlang(2, 3.0).mean() == pytest.approx(2 / 3)
    assert hyperexp([0.5, 0.5], [1.0, 2.0]).mean() == pytest.approx(0.75)


def test_rational_forms():
    n, d = exponential(3.0).rational_form()
    np.testing.assert_allclose(n, [3.0])
    np.testing.assert_allclose(d, [3.0, 1.0])
    n, d = erlang(2, 3.0).rational_form()
    np.testing.assert_allclose(n, [9.0])
    np.testing.assert_allclose(d, [9.0, 6.0, 1.0])
    p, m1, m2 = 0.3, 1.0, 4.0
    n, d = hyperexp([p, 1 - p], [m1, m2]).rational_form()
    # p m1 (m2 + s) + (1-p) m2 (m1 + s)
    np.testing.assert_allclose(n, [p * m1 * m2 + (1 - p) * m2 * m1, p * m1 + (1 - p) * m2])
    np.testing.assert_allclose(d, [m1 * m2, m1 + m2, 1.0])


@given(named_dists())
def test_beta_zero_is_one(dist):
    assert lst_eval(dist, 0.0) == pytest.approx(1.0, abs=1e-14)


@given(named_dists())
def test_derivative_at_zero_is_minus_mean(dist):
    h = 1e-5
    fd = (dist.lst(h) - dist.lst(-h)) / (2 * h)
    assert fd == pytest.approx(-dist.mean(), rel=1e-6, abs=1e-6)
    assert dist.lst_derivative(0.0) == pytest.approx(-dist.mean(), rel=1e-12)


@given(named_dists(), st.floats(0, 10), st.floats(-10, 10))
def test_modulus_bounded_on_right_half_plane(dist, re, im):
    assert abs(dist.lst(complex(re, im))) <= 1 + 1e-12


@given(named_dists())
def test_rational_form_matches_variant(dist):
    n, d = dist.rational_form()
    rng = np.random.default_rng(0)
    s = rng.uniform(0, 10, 100) + 1j * rng.uniform(-10, 10, 100)
    direct = np.polynomial.polynomial.polyval(s, n) / np.polynomial.polynomial.polyval(s, d)
    if dist.kind == "exponential":
        ref = dist.params["mu"] / (dist.params["mu"] + s)
    elif dist.kind == "erlang":
        ref = (dist.params["mu"] / (dist.params["mu"] + s)) ** dist.params["k"]
    else:
        ref = sum(p * m / (m + s) for p, m in zip(dist.params["p"], dist.params["mu"]))
    np.testing.assert_allclose(direct, ref, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(dist.lst(s), ref, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("dist", [exponential(2.0), erlang(3, 4.0),
                                  hyperexp([0.3, 0.7], [0.5, 3.0])])
def test_sample_mean(dist):
    rng = np.random.default_rng(42)
    x = dist.sample(rng, 10**6)
    se = x.std() / math.sqrt(x.size)
    assert abs(x.mean() - dist.mean()) < 4 * se
    assert np.all(x > 0)


def test_sf_and_pdf_consistent():
    for d in (exponential(2.0), erlang(3, 4.0), hyperexp([0.3, 0.7], [0.5, 3.0])):
        for x in (0.1, 1.0, 3.0):
            tail = quad(d.pdf, x, math.inf, epsabs=1e-14)[0]
            assert d.sf(x) == pytest.approx(tail, abs=1e-12)
        assert d.sf(-1.0) == 1.0


def test_validation_errors():
    with pytest.raises(DistributionError):
        exponential(-1.0)
    with pytest.raises(DistributionError):
        erlang(0, 1.0)
    with pytest.raises(DistributionError):
        hyperexp([0.5, 0.6], [1.0, 2.0])
    with pytest.raises(DistributionError):
        rational([1.0], [2.0, 1.0])            # n0 != d0
    with pytest.raises(DistributionError):
        rational([1.0], [1.0, -1.0])           # pole at s = 1
    with pytest.raises(DistributionError):
        rational([2.0, 1.0], [2.0, 3.0, 1.0])  # shared factor (s + 2)
    with pytest.raises(DistributionError):
        rational([1.0, 0.5], [1.0, 1.0])       # deg N = deg D


def test_pole_proximity():
    with pytest.raises(PoleProximityError):
        exponential(2.0).lst(-2.0)


def test_equal_rate_hyperexp_merges_to_exponential_transform():
    h = hyperexp([0.4, 0.6], [2.0, 2.0])
    assert h.degree == 1
    assert h.lst(1.3) == pytest.approx(exponential(2.0).lst(1.3), abs=1e-15)


def test_rational_cannot_be_sampled():
    r = rational([2.0], [2.0, 3.0, 1.0])
    assert not r.samplable
    with pytest.raises(NotImplementedError):
        r.sample(np.random.default_rng(0), 3)
    assert r.mean() == pytest.approx(1.5)


@settings(max_examples=30)
@given(named_dists())
def test_json_round_trip(dist):
    back = from_json(dist.to_json())
    assert back.kind == dist.kind
    assert back.lst(0.7) == pytest.approx(dist.lst(0.7), abs=1e-15)


def test_json_errors():
    with pytest.raises(DistributionError):
        from_json({"type": "weibull"})
    with pytest.raises(DistributionError):
        from_json({"type": "erlang", "mu": 2})
