import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hemirobin.boundary import (
    BoundarySymbol,
    SymmetryError,
    constant,
    convolution_matrix,
    evaluate,
    even_part,
    from_samples,
    from_terms,
    multiplication_matrix,
    odd_part,
    symbol_from_json,
    symbol_to_json,
)
from hemirobin.harmonics import lemma_b2_diagnostics, symbol, trace_amplitudes
from hemirobin.numerics import DomainError


def grid(n):
    return -np.pi + 2 * np.pi * np.arange(n) / n


def test_from_samples_examples():
    phi = grid(16)
    s = from_samples(1 + np.cos(2 * phi), 2)
    assert abs(s.coeff(0) - 1) <= 1e-12
    assert abs(s.coeff(2) - 0.5) <= 1e-12 and abs(s.coeff(-2) - 0.5) <= 1e-12
    assert abs(s.coeff(1)) <= 1e-12
    s = from_samples(2 * np.cos(phi), 1)
    assert abs(s.coeff(1) - 1) <= 1e-12 and abs(s.coeff(-1) - 1) <= 1e-12
    assert np.all(from_samples(np.zeros(8), 1).coeffs == 0)


def test_from_samples_sine_phase():
    phi = grid(32)
    s = from_samples(np.sin(3 * phi), 3)
    # sin 3phi = (e^{3i phi} - e^{-3i phi}) / (2i)
    assert abs(s.coeff(3) - (-0.5j)) <= 1e-12
    assert abs(s.coeff(-3) - 0.5j) <= 1e-12


def test_from_samples_aliasing_guard():
    with pytest.raises(DomainError):
        from_samples(np.ones(10), 2)


def test_even_part_examples():
    assert np.all(even_part(from_terms({1: 1.0})).coeffs == 0)
    s = from_terms({0: 1.0, 2: 0.5})
    assert np.array_equal(even_part(s).coeffs, s.coeffs)
    e = even_part(from_terms({1: 0.5, 2: 0.5}))
    assert e.coeff(1) == 0 and e.coeff(2) == 0.5
    phi = np.linspace(-3, 3, 7)
    s = from_terms({0: 0.3, 1: 0.2 + 0.1j, 2: -0.4j, 3: 0.7})
    assert np.allclose(evaluate(even_part(s), phi), 0.5 * (evaluate(s, phi) + evaluate(s, phi + np.pi)))


def test_evaluate_examples():
    assert evaluate(constant(1.0), 0.7) == 1.0
    assert evaluate(from_terms({1: 1.0}), 0.0) == pytest.approx(2.0)
    assert evaluate(from_terms({0: 1.0, 2: 0.5}), np.pi / 2) == pytest.approx(0.0, abs=1e-15)


def test_symmetry_is_enforced():
    c = np.array([0.0, 1.0, 0.5 + 0.1j])
    with pytest.raises(SymmetryError):
        BoundarySymbol(c, 1)


def test_multiplication_matrix_examples():
    assert np.array_equal(multiplication_matrix(constant(3.0), [-2, 0, 2]), 3 * np.eye(3))
    m = multiplication_matrix(from_terms({1: 1.0}), [-1, 1])
    assert np.array_equal(m, np.zeros((2, 2)))  # c_{+-2} = 0 for 2 cos phi
    m = multiplication_matrix(from_terms({1: 1.0}), [-1, 0, 1])
    assert np.array_equal(m, np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float))
    m = multiplication_matrix(from_terms({0: 1.0, 2: 0.5}), [-2, 0, 2])
    assert np.array_equal(m, np.array([[1, 0.5, 0], [0.5, 1, 0.5], [0, 0.5, 1]]))


def test_multiplication_matrix_orientation():
    s = from_terms({0: 0.0, 1: 0.3 + 0.4j})
    m = multiplication_matrix(s, [0, 1])
    # row m'=1, col m=0 carries c_1
    assert m[1, 0] == s.coeff(1) and m[0, 1] == s.coeff(-1)


def test_multiplication_matrix_norm_bound():
    rng = np.random.default_rng(4)
    for _ in range(20):
        terms = {k: complex(*rng.normal(size=2)) for k in range(1, 6)}
        terms[0] = float(rng.normal())
        s = from_terms(terms)
        m = multiplication_matrix(s, np.arange(-30, 31))
        assert np.linalg.norm(m, 2) <= s.sup_norm() * (1 + 1e-9)


def test_convolution_matrix_examples():
    ell = 6
    y = symbol(ell, "y")
    x = symbol(ell, "x")
    idx = np.arange(-ell, ell + 1, 2)
    cy = convolution_matrix(y, idx)
    assert np.allclose(np.diag(cy), trace_amplitudes(ell).a[idx + ell] ** 2)
    cx = convolution_matrix(x, idx)
    assert np.linalg.norm(cx, 2) ** 2 == pytest.approx(lemma_b2_diagnostics(ell)["sup_a2"])
    assert np.allclose(cx @ cx, cy, rtol=1e-14, atol=0)
    assert np.linalg.norm(cx, "fro") ** 2 == pytest.approx(np.sum(x.coeffs**2))


coef = st.floats(min_value=-2, max_value=2, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=64), st.data())
def test_round_trip_samples(degree, data):
    re = data.draw(st.lists(coef, min_size=degree + 1, max_size=degree + 1))
    im = data.draw(st.lists(coef, min_size=degree + 1, max_size=degree + 1))
    terms = {k: complex(re[k], im[k] if k else 0.0) for k in range(degree + 1)}
    s = from_terms(terms)
    n = 4 * degree + 4
    back = from_samples(evaluate(s, grid(n)), degree)
    assert np.max(np.abs(back.coeffs - s.coeffs)) <= 1e-12 * max(1.0, np.sum(np.abs(s.coeffs)))


@settings(max_examples=40, deadline=None)
@given(st.lists(coef, min_size=1, max_size=9))
def test_even_part_is_projection(vals):
    s = from_terms({k: v for k, v in enumerate(vals)})
    e = even_part(s)
    assert np.array_equal(even_part(e).coeffs, e.coeffs)
    assert np.array_equal((e + odd_part(s)).coeffs, s.coeffs)


def test_json_round_trip_and_errors():
    s = from_terms({0: 1.0, 2: 0.25 - 0.5j, 3: 0.1})
    doc = json.dumps(symbol_to_json(s))
    back = symbol_from_json(doc)
    assert np.array_equal(back.coeffs, s.coeffs)
    samples = {"type": "samples", "values": list(1 + np.cos(2 * grid(12))), "degree": 2}
    assert symbol_from_json(samples).coeff(2) == pytest.approx(0.5)
    with pytest.raises(ValueError, match="sigma.coeffs"):
        symbol_from_json({"type": "coeffs", "coeffs": [[1, 1.0, 0.0]]})
    with pytest.raises(ValueError, match=r"sigma.coeffs\[0\]"):
        symbol_from_json({"type": "coeffs", "coeffs": [[0, "a", 0]]})
    with pytest.raises(ValueError, match="sigma.type"):
        symbol_from_json({"type": "poly"})
    with pytest.raises(ValueError, match="sigma.degree"):
        symbol_from_json({"type": "samples", "values": [1.0] * 8, "degree": -1})
    with pytest.raises(ValueError, match="sigma.values"):
        symbol_from_json({"type": "samples", "values": [1.0] * 5, "degree": 2})
    with pytest.raises(ValueError, match="invalid JSON"):
        symbol_from_json("{not json")
    with pytest.raises(ValueError, match="conjugate"):
        symbol_from_json({"type": "coeffs", "coeffs": [[1, 1.0, 0.5], [-1, 1.0, 0.5]]})


def test_shift_and_scale():
    s = from_terms({0: 0.5, 1: 0.3j, 2: 0.2})
    phi = np.linspace(-3, 3, 11)
    assert np.allclose(evaluate(s.shifted(0.4), phi), evaluate(s, phi - 0.4))
    assert np.allclose(evaluate(s.scaled(3), phi), 3 * evaluate(s, phi))
    assert s.effective_degree == 2 and constant(0.0).effective_degree == 0
    assert from_terms({1: 1.0, 3: 2.0}).is_odd() and not s.is_odd()
    assert constant(2.0).sup_norm() == pytest.approx(2.0)
    assert math.isclose(from_terms({1: 1.0}).sup_norm(), 2.0, rel_tol=1e-6)
