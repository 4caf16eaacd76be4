import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hemirobin.numerics import DomainError
from hemirobin.sl1d import (
    SL1DProblem,
    eigen_table,
    finite_difference_eigenvalues,
    gap_ladder,
    mode_index,
    node_count,
    robin_eigenvalue,
    robin_secular,
    step_eigenvalue,
    step_wronskian,
)


def test_neumann_limits():
    for n in range(1, 8):
        assert robin_eigenvalue(0.0, n) == pytest.approx((math.pi * (n - 1)) ** 2, abs=1e-12)
        assert step_eigenvalue(0.0, 0.3, n) == pytest.approx((math.pi * (n - 1)) ** 2, rel=1e-14, abs=1e-12)


def test_robin_gap_at_fifty():
    lam = robin_eigenvalue(1.0, 50)
    assert abs(lam - (math.pi * 49) ** 2 - 2.0) <= 2e-2


def test_step_gap_at_hundred():
    mu = step_eigenvalue(1.0, 0.1, 100)
    assert abs(mu - (math.pi * mode_index(100)) ** 2 - 1.0) <= 5e-2


def test_step_converges_to_robin_for_fixed_mode():
    lam = robin_eigenvalue(1.0, 10)
    devs = [abs(step_eigenvalue(1.0, e, 10) - lam) for e in [0.1, 0.05, 0.025]]
    assert devs[0] > devs[1] > devs[2]


def test_factor_two_between_gap_constants():
    ns = [50, 100, 200]
    robin = gap_ladder(0.5, ns)
    step = gap_ladder(0.5, ns, epsilon=0.2)
    assert np.allclose(robin, 1.0, atol=1e-2)
    assert np.allclose(step, 0.5, atol=5e-2)
    assert abs(robin[-1] / step[-1] - 2.0) < 0.1


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 5), st.integers(1, 300))
def test_robin_secular_residual_and_nodes(sigma, n):
    lam, res = robin_eigenvalue(sigma, n, return_residual=True)
    assert res <= 1e-12
    if lam > 0:
        assert abs(robin_secular(sigma, math.sqrt(lam))) <= 1e-12 * max(1.0, math.sqrt(lam))
    assert node_count(sigma, None, lam) == n - 1


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 4), st.floats(0.02, 0.9), st.integers(1, 40))
def test_step_residual_and_nodes(sigma, eps, n):
    mu, res = step_eigenvalue(sigma, eps, n, return_residual=True)
    assert res <= 1e-12
    assert node_count(sigma, eps, mu) == n - 1


@settings(max_examples=20, deadline=None)
@given(st.floats(-2, 2), st.floats(0.01, 1), st.integers(1, 20))
def test_eigenvalues_increase_with_sigma(sigma, delta, n):
    assert robin_eigenvalue(sigma + delta, n) > robin_eigenvalue(sigma, n)
    assert step_eigenvalue(sigma + delta, 0.2, n) > step_eigenvalue(sigma, 0.2, n)


@pytest.mark.parametrize("sigma", [-0.5, 0.0, 1.0, 3.0])
@pytest.mark.parametrize("eps", [None, 0.1, 0.25])
def test_finite_difference_oracle(sigma, eps):
    fd = finite_difference_eigenvalues(sigma, 10, epsilon=eps, n_cells=4000)
    if eps is None:
        exact = np.array([robin_eigenvalue(sigma, n) for n in range(1, 11)])
    else:
        exact = np.array([step_eigenvalue(sigma, eps, n) for n in range(1, 11)])
    assert np.all(np.abs(fd - exact) <= 1e-4 * np.maximum(1.0, np.abs(exact)))


def test_wronskian_continuous_across_turning_point():
    sigma, eps = 1.0, 0.1
    t = sigma / eps
    left = float(step_wronskian(sigma, eps, t - 1e-10))
    right = float(step_wronskian(sigma, eps, t + 1e-10))
    assert left == pytest.approx(right, abs=1e-8)


def test_negative_sigma_has_negative_ground_state():
    assert robin_eigenvalue(-0.5, 1) < 0 < robin_eigenvalue(-0.5, 2)
    assert step_eigenvalue(-0.5, 0.1, 1) < 0


def test_problem_and_table():
    p = SL1DProblem(1.0, "step", 0.1)
    assert p.eigenvalue(3) == step_eigenvalue(1.0, 0.1, 3)
    assert SL1DProblem(1.0).eigenvalue(3) == robin_eigenvalue(1.0, 3)
    rows = eigen_table(1.0, [1, 2])
    assert rows[1][0] == 2 and rows[1][2] == pytest.approx(rows[1][1] - math.pi**2)
    for bad in [dict(variant="wave"), dict(variant="step"), dict(variant="step", epsilon=1.0)]:
        with pytest.raises(DomainError):
            SL1DProblem(1.0, **bad)
    with pytest.raises(DomainError):
        robin_eigenvalue(1.0, 0)
