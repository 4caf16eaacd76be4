import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hemirobin.boundary import constant, even_part, from_terms
from hemirobin.cluster import (
    build_cluster_matrix,
    bump,
    cluster_trace,
    commutator_hs_norm,
    gap_spectrum,
    model_operator_trace,
    sandwich_spectra,
)
from hemirobin.harmonics import trace_amplitudes
from hemirobin.numerics import DomainError, gauss_legendre


ONE_PLUS_COS2 = from_terms({0: 1.0, 2: 0.5})


def test_constant_sigma_gives_diagonal_a_squared():
    for ell in [0, 1, 5, 12]:
        cm = build_cluster_matrix(constant(1.0), ell)
        amp = trace_amplitudes(ell)
        assert np.allclose(cm.matrix, np.diag(amp.a[cm.indices + ell] ** 2), rtol=0, atol=1e-15)


def test_odd_sigma_gives_zero_matrix():
    cm = build_cluster_matrix(from_terms({1: 1.0}), 10)
    assert np.array_equal(cm.matrix, np.zeros((11, 11)))


def test_one_plus_cos2_at_ell_one():
    cm = build_cluster_matrix(ONE_PLUS_COS2, 1)
    assert np.allclose(cm.matrix, 1.5 * np.array([[1.0, 0.5], [0.5, 1.0]]), atol=1e-14)
    gs = gap_spectrum(ONE_PLUS_COS2, 1)
    assert np.allclose(gs.gaps, [0.75, 2.25], atol=1e-14)


def test_gap_spectrum_examples():
    assert np.allclose(gap_spectrum(constant(1.0), 1).gaps, [1.5, 1.5], atol=1e-14)
    gs = gap_spectrum(constant(0.0), 9)
    assert len(gs) == 10 and np.all(gs.gaps == 0)


def test_cluster_trace_examples():
    tr = cluster_trace(constant(1.0), 400)
    assert 0.95 * 800 <= tr <= 1.05 * 800
    assert cluster_trace(from_terms({1: 1.0, 3: 0.2}), 30) == 0.0
    assert cluster_trace(from_terms({2: 0.7}), 30) == 0.0


@pytest.mark.parametrize(
    "sigma",
    [constant(2.0), ONE_PLUS_COS2, from_terms({0: -0.3, 1: 0.5j, 2: 0.2 - 0.1j, 4: 0.4})],
)
@pytest.mark.parametrize("ell", [3, 40, 151])
def test_trace_matches_eigenvalue_sum(sigma, ell):
    gaps = gap_spectrum(sigma, ell).gaps
    assert abs(np.sum(gaps) - cluster_trace(sigma, ell)) <= 1e-9 * ell * sigma.sup_norm()


def test_jacobi_route_agrees():
    s = from_terms({0: 0.4, 2: 0.3 + 0.2j, 4: -0.1})
    a = gap_spectrum(s, 30).gaps
    b = gap_spectrum(s, 30, method="jacobi").gaps
    assert np.max(np.abs(a - b)) <= 1e-12


def test_even_part_gives_same_matrix():
    s = from_terms({0: 0.2, 1: 0.7, 2: 0.3j, 3: -0.5})
    for ell in [4, 9, 20]:
        assert np.array_equal(build_cluster_matrix(s, ell).matrix, build_cluster_matrix(even_part(s), ell).matrix)


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=-math.pi, max_value=math.pi), st.integers(min_value=1, max_value=40))
def test_spectrum_invariant_under_rotation(phi0, ell):
    s = from_terms({0: 0.1, 2: 0.4 - 0.3j, 4: 0.25})
    a = gap_spectrum(s, ell).gaps
    b = gap_spectrum(s.shifted(phi0), ell).gaps
    assert np.max(np.abs(a - b)) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=0.01, max_value=50.0))
def test_spectrum_scales_linearly(c):
    a = gap_spectrum(ONE_PLUS_COS2, 25).gaps
    b = gap_spectrum(ONE_PLUS_COS2.scaled(c), 25).gaps
    assert np.allclose(b, c * a, rtol=1e-12, atol=1e-12 * c)


def test_operator_norm_bound_and_sqrt_growth():
    s = from_terms({0: 0.3, 2: 0.6, 4: -0.2j})
    ratios = []
    for ell in [50, 100, 200, 400]:
        gaps = gap_spectrum(s, ell).gaps
        sup_a2 = np.max(trace_amplitudes(ell).a ** 2)
        norm = np.max(np.abs(gaps))
        assert norm <= s.sup_norm() * sup_a2 * (1 + 1e-12)
        ratios.append(norm / math.sqrt(ell))
    assert max(ratios) / min(ratios) < 1.2


def test_sandwich_nonnegative_sigma_scales():
    lo, hi = sandwich_spectra(ONE_PLUS_COS2, 6, 0.1)
    g = gap_spectrum(ONE_PLUS_COS2, 6).gaps
    assert np.allclose(lo.gaps, 0.9 * g, atol=1e-13)
    assert np.allclose(hi.gaps, 1.1 * g, atol=1e-13)
    assert np.all(lo.gaps <= hi.gaps)


def test_sandwich_sign_changing_sigma():
    s = from_terms({0: 0.2, 2: 0.5, 1: 0.4})
    lo, hi = sandwich_spectra(s, 8, 0.2)
    assert np.all(lo.gaps <= hi.gaps + 1e-14)
    assert lo.meta["doubling_drift"] <= 1e-6
    g = gap_spectrum(s, 8).gaps
    # sigma - eps|sigma| <= sigma <= sigma + eps|sigma| pointwise, and W_l is monotone in sigma
    assert np.all(lo.gaps <= g + 1e-12) and np.all(g <= hi.gaps + 1e-12)
    lo0, hi0 = sandwich_spectra(s, 8, 1e-9)
    assert np.max(np.abs(lo0.gaps - g)) <= 1e-8 and np.max(np.abs(hi0.gaps - g)) <= 1e-8


def test_sandwich_requires_positive_epsilon():
    with pytest.raises(DomainError):
        sandwich_spectra(ONE_PLUS_COS2, 4, 0.0)


def test_model_trace_constant_sigma_k1():
    ell = 200
    numeric, limit = model_operator_trace(bump, constant(1.0), ell, 1)
    m = np.arange(-ell + 2, ell - 1, 2)
    assert numeric == pytest.approx(np.sum(bump(m / ell) ** 2) / (ell + 1), rel=1e-12)
    gl = gauss_legendre(400)
    assert limit == pytest.approx(0.5 * gl.integrate(bump(gl.nodes) ** 2), rel=1e-10)
    assert numeric == pytest.approx(limit, rel=0.02)


def test_model_trace_mean_zero_k1_vanishes():
    numeric, limit = model_operator_trace(bump, from_terms({2: 0.5}), 50, 1)
    assert numeric == pytest.approx(0.0, abs=1e-13)
    assert limit == pytest.approx(0.0, abs=1e-13)


def test_model_trace_k2_converges_along_ladder():
    devs = []
    for ell in [75, 150, 300]:
        numeric, limit = model_operator_trace(bump, ONE_PLUS_COS2, ell, 2)
        devs.append(abs(numeric - limit) / abs(limit))
    assert devs[-1] <= 0.05
    assert devs[0] > devs[1] > devs[2]


def _commutator_entrywise(omega, sigma, ell):
    w = {m: float(omega(np.array([m / ell]))[0]) for m in range(-ell + 2, ell - 1, 2)}
    total = 0.0
    d = sigma.degree
    for m in range(-ell - d, ell + d + 1):
        for mp in range(m - d, m + d + 1):
            c = sigma.coeff(mp - m)
            if c:
                total += abs(c) ** 2 * (w.get(m, 0.0) - w.get(mp, 0.0)) ** 2
    return math.sqrt(total)


def test_commutator_examples():
    assert commutator_hs_norm(bump, constant(3.0), 40) == 0.0
    assert commutator_hs_norm(lambda x: np.zeros_like(x), ONE_PLUS_COS2, 40) == 0.0
    s = from_terms({0: 0.1, 2: 0.5, 1: 0.3j})
    assert commutator_hs_norm(bump, s, 60) == pytest.approx(_commutator_entrywise(bump, s, 60), rel=1e-12)


def test_commutator_bounded_along_ladder():
    s = from_terms({2: 0.5})
    vals = [commutator_hs_norm(bump, s, ell) for ell in [100, 200, 400, 800]]
    assert vals[0] == pytest.approx(_commutator_entrywise(bump, s, 100), rel=1e-12)
    assert np.all(np.diff(vals) <= 0)
