"""Cluster operators W_l[sigma] = C[x_l] M[sigma] C[x_l] and their spectra.

The cluster matrix lives on span{e^{i m phi}: m = -l, -l+2, ..., l}; the
entry in row m', column m is A_{l,m'} c_{m'-m} A_{l,m}. Its eigenvalues
approximate the Robin-Neumann gaps of the l-th cluster.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .boundary import BoundarySymbol, evaluate, from_samples, multiplication_matrix
from .harmonics import trace_amplitudes
from .numerics import DomainError, gauss_legendre, hermitian_eigen, periodic_rule

__all__ = [
    "ClusterMatrix",
    "GapSpectrum",
    "build_cluster_matrix",
    "gap_spectrum",
    "cluster_trace",
    "abs_symbol",
    "sandwich_spectra",
    "bump",
    "model_operator_trace",
    "commutator_hs_norm",
]


@dataclass(frozen=True)
class ClusterMatrix:
    ell: int
    indices: np.ndarray
    matrix: np.ndarray


@dataclass(frozen=True)
class GapSpectrum:
    """Ascending eigenvalues of a cluster operator (or a Galerkin window)."""

    ell: int
    gaps: np.ndarray
    method: str = "cluster-operator"
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.gaps)


def build_cluster_matrix(sigma: BoundarySymbol, ell: int) -> ClusterMatrix:
    """Matrix of W_l[sigma] on the Neumann-type Fourier indices of cluster l."""
    if ell < 0:
        raise DomainError("ell must be nonnegative")
    amp = trace_amplitudes(ell)
    idx = amp.neumann_m
    a = amp.a[idx + ell]
    mat = a[:, None] * multiplication_matrix(sigma, idx) * a[None, :]
    return ClusterMatrix(ell=ell, indices=idx, matrix=mat)


def gap_spectrum(sigma: BoundarySymbol, ell: int, method: str = "lapack") -> GapSpectrum:
    """Eigenvalues of W_l[sigma] in ascending order."""
    cm = build_cluster_matrix(sigma, ell)
    gaps = hermitian_eigen(cm.matrix, method=method, vectors=False)
    return GapSpectrum(ell=ell, gaps=np.asarray(gaps), meta={"solver": method})


def cluster_trace(sigma: BoundarySymbol, ell: int) -> float:
    """Tr W_l[sigma] = c_0 * sum_m A_{l,m}^2."""
    return sigma.mean * math.fsum(trace_amplitudes(ell).a ** 2)


# ---------------------------------------------------------------------------
# Sandwich
# ---------------------------------------------------------------------------


def _sample_count(degree: int) -> int:
    # enough samples that aliasing of a kinked |sigma| (c_k ~ k^-2) stays ~1e-10
    return max(1 << 16, 16 * (degree + 1))


def abs_symbol(sigma: BoundarySymbol, degree: int, n_samples: int | None = None) -> BoundarySymbol:
    """Trigonometric polynomial of degree ``degree`` approximating |sigma|.

    If sigma is nonnegative on the sampling grid, sigma itself is returned
    (|sigma| = sigma exactly).
    """
    n = _sample_count(degree) if n_samples is None else n_samples
    phi = -np.pi + 2 * np.pi * np.arange(n) / n
    vals = evaluate(sigma, phi)
    if np.all(vals >= 0):
        return sigma
    return from_samples(np.abs(vals), degree)


def _sandwich_pair(sigma, ell, epsilon, degree, n_samples):
    mag = abs_symbol(sigma, degree, n_samples)
    lower = sigma + mag.scaled(-epsilon)
    upper = sigma + mag.scaled(epsilon)
    return gap_spectrum(lower, ell).gaps, gap_spectrum(upper, ell).gaps


def sandwich_spectra(sigma: BoundarySymbol, ell: int, epsilon: float, check_tol: float = 1e-6):
    """Gap spectra of V_l[sigma - eps|sigma|] and V_l[sigma + eps|sigma|].

    |sigma| enters as a sampled symbol of degree max(4D, 2l); coefficients
    beyond 2l do not reach the (l+1)-dimensional block. The truncation is
    validated by recomputing at twice the degree and twice the samples.

    Raises
    ------
    DomainError
        If epsilon <= 0.
    RuntimeError
        If the degree-doubling check differs by more than ``check_tol``.
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    degree = max(4 * sigma.effective_degree, 2 * ell, 1)
    n = _sample_count(degree)
    lo, hi = _sandwich_pair(sigma, ell, epsilon, degree, n)
    lo2, hi2 = _sandwich_pair(sigma, ell, epsilon, 2 * degree, 2 * n)
    drift = float(max(np.max(np.abs(lo - lo2)), np.max(np.abs(hi - hi2))))
    if drift > check_tol:
        raise RuntimeError(f"|sigma| truncation at degree {degree} not converged (drift {drift:.2e})")
    meta = {"abs_degree": degree, "doubling_drift": drift, "epsilon": epsilon}
    return (
        GapSpectrum(ell=ell, gaps=lo, meta=dict(meta, side="lower")),
        GapSpectrum(ell=ell, gaps=hi, meta=dict(meta, side="upper")),
    )


# ---------------------------------------------------------------------------
# Model operators with a smooth window
# ---------------------------------------------------------------------------


def bump(xi):
    """exp(1 - 1/(1 - xi^2)) on (-1, 1), zero outside; equals 1 at 0."""
    xi = np.asarray(xi, dtype=float)
    out = np.zeros_like(xi)
    inside = np.abs(xi) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi[inside] ** 2))
    return out


def _window_indices(ell: int) -> np.ndarray:
    # m = -l+2, ..., l-2 with m - l even
    return np.arange(-ell + 2, ell - 1, 2)


def model_operator_trace(
    omega: Callable[[np.ndarray], np.ndarray], sigma: BoundarySymbol, ell: int, k: int, n_xi: int = 200
) -> tuple[float, float]:
    """Normalized trace of (C[omega_l] M[sigma] C[omega_l]^*)^k and its limit.

    Returns ``(numeric, limit)`` with numeric = Tr(...)/(l+1) and
    limit = (1/4pi) int int omega(xi)^{2k} sigma_even(phi)^k dxi dphi.
    """
    if k < 1:
        raise DomainError("power k must be >= 1")
    idx = _window_indices(ell)
    if idx.size:
        w = np.asarray(omega(idx / ell), dtype=float)
        mat = w[:, None] * multiplication_matrix(sigma, idx) * w[None, :]
        ev = hermitian_eigen(mat, vectors=False)
        numeric = float(np.sum(ev**k)) / (ell + 1)
    else:
        numeric = 0.0
    gl = gauss_legendre(n_xi)
    xi_part = gl.integrate(np.asarray(omega(gl.nodes), dtype=float) ** (2 * k))
    per = periodic_rule(max(64, 4 * k * sigma.degree + 4))
    even_vals = 0.5 * (evaluate(sigma, per.nodes) + evaluate(sigma, per.nodes + np.pi))
    phi_part = per.integrate(even_vals**k)
    return numeric, float(xi_part * phi_part / (4 * np.pi))


def commutator_hs_norm(omega: Callable[[np.ndarray], np.ndarray], sigma: BoundarySymbol, ell: int) -> float:
    """Hilbert-Schmidt norm of M[sigma] C[omega_l] - C[omega_l] M[sigma].

    The compression to |m| <= l + D is exact, since every nonzero entry has
    one index in the window support |m| <= l - 2.
    """
    d = sigma.degree
    idx = np.arange(-ell - d, ell + d + 1)
    w = np.zeros(idx.size)
    inside = (np.abs(idx) <= ell - 2) & ((idx - ell) % 2 == 0)
    w[inside] = np.asarray(omega(idx[inside] / ell), dtype=float)
    mat = multiplication_matrix(sigma, idx)
    comm = mat * w[None, :] - w[:, None] * mat
    return float(np.linalg.norm(comm))
