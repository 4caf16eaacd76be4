import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from hemirobin.boundary import constant, from_terms
from hemirobin.cluster import cluster_trace
from hemirobin.density import (
    TestFunction,
    empirical_value,
    empirical_vs_limit,
    geodesic_average,
    limit_functional,
    parse_test_function,
    rho_constant_closed_form,
    rho_density,
    trig_roots,
    weinstein_comparison,
    weinstein_naive,
)
from hemirobin.numerics import DomainError

ONE_PLUS_COS2 = from_terms({0: 1.0, 2: 0.5})
LINEAR = parse_test_function("x")


def test_parse_test_function():
    assert parse_test_function("x") == TestFunction((1.0,))
    assert parse_test_function("x^2*bump(6)") == TestFunction((0.0, 1.0), 6.0)
    assert parse_test_function("poly(1, -0.5)*bump(3)") == TestFunction((1.0, -0.5), 3.0)
    for bad in ["y", "x^0", "poly(a)", "x*bump(q)"]:
        with pytest.raises(ValueError):
            parse_test_function(bad)
    f = parse_test_function("poly(1,2)*bump(4)")
    x = np.array([0.0, 1.0, 3.9, 4.0, -5.0])
    expected = (x + 2 * x**2) * np.where(np.abs(x) < 4, np.exp(1 - 1 / (1 - np.minimum((x / 4) ** 2, 0.5))), 0)
    expected[:3] = (x[:3] + 2 * x[:3] ** 2) * np.exp(1 - 1 / (1 - (x[:3] / 4) ** 2))
    assert np.allclose(f(x), expected, rtol=1e-14, atol=0)


def test_trig_roots():
    assert np.allclose(trig_roots(from_terms({1: 0.5})), [-np.pi / 2, np.pi / 2], atol=1e-13)
    r = trig_roots(from_terms({0: 0.2, 2: 0.5}))  # 0.2 + cos 2phi
    assert len(r) == 4
    assert np.allclose(0.2 + np.cos(2 * r), 0, atol=1e-13)
    # tangential roots of 1 + cos 2phi are reported once each
    r = trig_roots(ONE_PLUS_COS2)
    assert np.allclose(r, [-np.pi / 2, np.pi / 2], atol=1e-7)
    assert trig_roots(constant(1.0)).size == 0
    # subnormal coefficients must not overflow the companion matrix
    assert np.allclose(trig_roots(from_terms({2: 2.2e-311})), [-3 * np.pi / 4, -np.pi / 4, np.pi / 4, 3 * np.pi / 4])


def test_rho_near_tangency_is_finite_and_peaked():
    top = 8 / np.pi  # max of 4(1 + cos 2phi)/pi
    below = rho_density(ONE_PLUS_COS2, top - 1e-10)
    above = rho_density(ONE_PLUS_COS2, top + 1e-10)
    # log peak: same size from both sides, and larger than further away
    assert below == pytest.approx(above, rel=1e-6)
    assert below > rho_density(ONE_PLUS_COS2, top - 1e-3) > rho_density(ONE_PLUS_COS2, 2.0)


def test_limit_functional_examples():
    assert limit_functional(constant(1.0), LINEAR) == pytest.approx(2.0, abs=1e-12)
    for c in [0.3, 2.5, -1.2]:
        assert limit_functional(constant(c), LINEAR) == pytest.approx(2 * c, abs=1e-12)
    assert limit_functional(from_terms({1: 1.0, 3: 0.4}), parse_test_function("x^2*bump(3)")) == 0.0


def test_limit_functional_refuses_unbounded_polynomials():
    with pytest.raises(DomainError):
        limit_functional(constant(1.0), parse_test_function("x^2"))


def _limit_oracle(sigma, f, n_phi=1 << 15, n_u=2000):
    # independent route: xi = cos u, trapezoid in u (integrand is flat at
    # both ends) and periodic trapezoid in phi, no cell splitting
    from hemirobin.boundary import even_part, evaluate

    phi = -np.pi + 2 * np.pi * np.arange(n_phi) / n_phi
    s = 4 * evaluate(even_part(sigma), phi) / np.pi
    u = np.pi * np.arange(1, n_u) / n_u
    su = np.sin(u)
    total = 0.0
    for chunk in np.array_split(s, 64):
        total += float(np.sum(f(chunk[:, None] / su[None, :]) * su[None, :]))
    return total * (np.pi / n_u) * (2 * np.pi / n_phi) / (4 * np.pi)


@pytest.mark.parametrize("spec", ["x*bump(6)", "x^2*bump(3)"])
def test_limit_functional_matches_direct_quadrature(spec):
    f = parse_test_function(spec)
    s = from_terms({0: 0.3, 1: 0.2, 2: 0.4 - 0.2j})
    assert limit_functional(s, f) == pytest.approx(_limit_oracle(s, f), rel=1e-6)


@settings(max_examples=20, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-1, 1), st.floats(-3, 3))
def test_limit_functional_linear_in_f_and_depends_on_even_part(a, b, c0, c2):
    s = from_terms({0: c0, 1: 0.3, 2: c2})
    f1 = TestFunction((1.0, 0.0), 5.0)
    f2 = TestFunction((0.0, 1.0), 5.0)
    fab = TestFunction((a, b), 5.0)
    lhs = limit_functional(s, fab)
    rhs = a * limit_functional(s, f1) + b * limit_functional(s, f2)
    assert lhs == pytest.approx(rhs, abs=1e-8 * (1 + abs(a) + abs(b)))
    assert limit_functional(s.shifted(np.pi), f2) == pytest.approx(limit_functional(s, f2), abs=1e-9)


def test_rho_constant_closed_form_and_negative_side():
    for c in [0.5, 1.0, 2.0]:
        for y in np.linspace(4 * c / np.pi + 0.01, 10, 40):
            assert rho_density(constant(c), y) == pytest.approx(rho_constant_closed_form(c, y), rel=1e-10, abs=1e-14)
        assert rho_density(constant(c), -1.0) == 0.0
        assert rho_density(constant(c), 0.5 * 4 * c / np.pi) == 0.0


def test_rho_rejects_zero():
    with pytest.raises(DomainError):
        rho_density(constant(1.0), 0.0)


def test_rho_negative_constant_mirrors_positive():
    for y in [2.0, 3.5]:
        assert rho_density(constant(-1.0), -y) == pytest.approx(rho_density(constant(1.0), y), rel=1e-12)


@pytest.mark.parametrize(
    "sigma,spec",
    [(ONE_PLUS_COS2, "x*bump(6)"), (from_terms({0: 0.2, 2: 0.6}), "x*bump(4)"), (from_terms({0: 0.2, 2: 0.6}), "x^2*bump(4)")],
)
def test_rho_integrates_to_limit_functional(sigma, spec):
    from hemirobin.boundary import even_part, evaluate

    f = parse_test_function(spec)
    r = f.radius
    s = 4 * evaluate(even_part(sigma), np.linspace(-np.pi, np.pi, 4001)) / np.pi
    # rho has a log peak at the extrema of s; hand them to quad as breakpoints
    top = [s.max()] if 0 < s.max() < r else None
    bottom = [s.min()] if -r < s.min() < 0 else None
    g = lambda y: rho_density(sigma, y) * float(f(y))
    pos = integrate.quad(g, 0, r, points=top, limit=200, epsabs=1e-8)[0]
    neg = integrate.quad(g, -r, 0, points=bottom, limit=200, epsabs=1e-8)[0]
    assert pos + neg == pytest.approx(limit_functional(sigma, f), abs=1e-4)


def test_empirical_examples():
    rep = empirical_vs_limit(constant(0.0), LINEAR, [5, 10])
    assert rep.limit == 0 and rep.empirical == (0.0, 0.0)
    for ell in [50, 400]:
        assert empirical_value(constant(1.0), LINEAR, ell) == pytest.approx(cluster_trace(constant(1.0), ell) / (ell + 1), rel=1e-12)
    assert 1.93 <= empirical_value(constant(1.0), LINEAR, 400) <= 2.02
    with pytest.raises(ValueError):
        empirical_vs_limit(constant(1.0), LINEAR, [10, 10])


@pytest.mark.parametrize("spec", ["x*bump(6)", "x^2*bump(6)"])
def test_empirical_deviation_decreases_along_ladder(spec):
    rep = empirical_vs_limit(ONE_PLUS_COS2, parse_test_function(spec), [50, 100, 200, 400])
    assert all(b < a for a, b in zip(rep.deviations[:-1], rep.deviations[1:]))
    assert rep.deviations[-1] <= 0.05 * abs(rep.limit)


def test_weinstein_examples():
    w = weinstein_comparison(constant(1.0), LINEAR)
    assert w["naive"] == pytest.approx(1.0, abs=1e-12)
    assert w["correct"] == pytest.approx(2.0, abs=1e-12)
    s = from_terms({0: 0.2, 1: 0.4, 2: 0.5})
    w = weinstein_comparison(s, LINEAR)
    assert abs(w["naive"] - w["correct"] / 2) <= 1e-10


@pytest.mark.parametrize(
    "sigma,spec",
    [
        (ONE_PLUS_COS2, "x*bump(6)"),
        (from_terms({0: 0.2, 1: 0.4, 2: 0.5}), "x^2*bump(3)"),
        (from_terms({0: -0.5, 2: 0.3j, 4: 0.2}), "poly(1,-0.3)*bump(2)"),
        (constant(0.7), "x^2*bump(5)"),
        (from_terms({1: 1.0}), "x*bump(2)"),
    ],
)
def test_weinstein_substitution(sigma, spec):
    assert weinstein_comparison(sigma, parse_test_function(spec))["substitution_check"] <= 1e-10


def test_weinstein_naive_uses_shifted_symbol():
    # naive integrates sigma_even(phi + pi/2); for a pi-periodic sigma_even
    # the shift by pi/2 changes the integrand but not the value
    s = from_terms({0: 0.1, 2: 0.6})
    f = parse_test_function("x^2*bump(3)")
    assert weinstein_naive(s, f) == pytest.approx(limit_functional(s.scaled(0.5), f), abs=1e-10)


def test_geodesic_average():
    assert geodesic_average(np.pi / 2, 0.3, constant(0.0), 0.1) == 0.0
    devs = [abs(geodesic_average(np.pi / 2, 0.3, constant(1.0), e) - 2 / np.pi) for e in [0.2, 0.1, 0.05]]
    assert devs[-1] <= 1e-12
    s = from_terms({1: 1.0, 3: 0.5})
    vals = [abs(geodesic_average(1.0, 0.4, s, e)) for e in [0.2, 0.1, 0.05, 0.025]]
    assert all(b < a for a, b in zip(vals[:-1], vals[1:]))
    with pytest.raises(DomainError):
        geodesic_average(0.3, 0.0, constant(1.0), 0.2)


def test_geodesic_average_limit_formula():
    s = from_terms({0: 0.4, 1: 0.3, 2: 0.2 + 0.1j})
    theta, phi = 1.1, 0.7
    from hemirobin.boundary import even_part, evaluate

    target = 2 * float(evaluate(even_part(s), phi + np.pi / 2)) / (np.pi * math.sin(theta))
    errs = [abs(geodesic_average(theta, phi, s, e) - target) for e in [0.1, 0.05, 0.025, 0.0125]]
    assert all(b < a for a, b in zip(errs[:-1], errs[1:]))
    assert errs[-1] <= 1e-3


def test_limit_functional_near_zero_value_converges():
    # a symmetric sigma_even makes the odd test function integrate to ~0;
    # convergence is judged against the magnitude of the integrand
    s = from_terms({0: 0.0, 1: 0.3, 2: 2.5})
    val, err = limit_functional(s, TestFunction((1.0, 0.0), 5.0), return_error=True)
    assert abs(val) < 1e-12 and err < 1e-12
