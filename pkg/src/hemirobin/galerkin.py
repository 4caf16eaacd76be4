"""Galerkin solver for the Robin Laplacian on the upper hemisphere.

The trial space is spanned by restrictions of sphere harmonics of degree
<= L_max to the hemisphere {x = cos(theta) > 0}. For l - m even the
harmonic has zero normal derivative on the equator (Neumann type), for
l - m odd it vanishes there (Dirichlet type). Both families are needed,
the two are not orthogonal on the hemisphere, and all matrices are real
after factoring out e^{i m phi}.

Sign convention: each Neumann-type function is scaled by +-1 so that its
equatorial trace is +A_{l,m}/sqrt(2 pi) e^{i m phi}, and each Dirichlet-type
function so that its outward normal derivative is B_{l,m} e^{i m phi}.
The boundary block of degree l is then exactly the cluster matrix.

The harmonic basis is exponentially ill-conditioned on the hemisphere (the
two parity families nearly reproduce each other on [0, 1]), so the spectra
are computed in an orthonormal basis of the same trial space: for fixed m
that space is (1 - x^2)^{|m|/2} times polynomials of degree <= lmax - |m|.
Ritz values depend only on the space, not on the basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .boundary import BoundarySymbol, evaluate
from .harmonics import normalized_legendre, normalized_legendre_derivative, trace_amplitudes
from .numerics import DomainError, gauss_legendre, generalized_eigen, hermitian_eigen, numerical_rank

__all__ = [
    "GalerkinBasis",
    "GalerkinSystem",
    "RobinSpectrum",
    "OddConstruction",
    "AssemblyError",
    "build_basis",
    "gram_matrix",
    "stiffness_matrix",
    "boundary_matrix",
    "assemble",
    "harmonic_ritz_values",
    "orthonormal_system",
    "robin_spectrum",
    "constant_sigma_spectrum",
    "cluster_window",
    "cluster_window_counts",
    "windows_disjoint",
    "odd_eigenspace_construction",
    "boundary_condition_nullity",
]

MAX_LMAX = 60  # harmonic-basis matrices only; the orthonormal solver has no cap


class AssemblyError(RuntimeError):
    """Green-identity assembly produced a non-Hermitian stiffness matrix."""


# ---------------------------------------------------------------------------
# Basis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GalerkinBasis:
    """Hemisphere harmonics Y_{l,m}, l <= lmax, ordered by m then l."""

    lmax: int
    ell: np.ndarray
    m: np.ndarray
    neumann: np.ndarray

    def __len__(self) -> int:
        return self.ell.size

    def block(self, m: int) -> slice:
        """Index range of the fixed-m block (l = |m|..lmax)."""
        start = sum(self.lmax - abs(k) + 1 for k in range(-self.lmax, m))
        return slice(start, start + self.lmax - abs(m) + 1)

    def index(self, ell: int, m: int) -> int:
        return self.block(m).start + ell - abs(m)


def build_basis(lmax: int) -> GalerkinBasis:
    if lmax < 0:
        raise DomainError("lmax must be nonnegative")
    ms, ells = [], []
    for m in range(-lmax, lmax + 1):
        for ell in range(abs(m), lmax + 1):
            ms.append(m)
            ells.append(ell)
    ell = np.asarray(ells)
    m = np.asarray(ms)
    return GalerkinBasis(lmax=lmax, ell=ell, m=m, neumann=(ell - m) % 2 == 0)


@lru_cache(maxsize=256)
def _block_data(lmax: int, m: int):
    """Signed Legendre rows for the fixed-m block.

    Returns (signs, equator values, equator derivatives, quadrature nodes,
    weights, values at nodes) with the sign convention of the module
    docstring already applied.
    """
    mm = abs(m)
    ells = np.arange(mm, lmax + 1)
    p0 = normalized_legendre(lmax, m, np.array([0.0]))[:, 0]
    dp0 = normalized_legendre_derivative(lmax, m, np.array([0.0]))[:, 0]
    signs = np.ones(ells.size)
    for i, ell in enumerate(ells):
        if (ell - m) % 2 == 0:
            signs[i] = 1.0 if p0[i] >= 0 else -1.0
        else:
            b = trace_amplitudes(ell).b_at(m)
            signs[i] = 1.0 if (-dp0[i]) * b >= 0 else -1.0
    # integrand of the fixed-m gram block is a polynomial of degree <= 2 lmax
    gl = gauss_legendre(lmax + mm + 2, 0.0, 1.0)
    vals = normalized_legendre(lmax, m, gl.nodes) * signs[:, None]
    return signs, signs * p0, signs * dp0, gl.nodes, gl.weights, vals


def _check_lmax(lmax: int):
    if lmax > MAX_LMAX:
        raise DomainError(f"lmax <= {MAX_LMAX} required for a reliably positive definite gram matrix")


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------


def gram_matrix(basis: GalerkinBasis) -> np.ndarray:
    """L^2(hemisphere) inner products; block diagonal in m.

    Same-parity off-diagonal entries are set to exactly 0 (even integrand,
    full-sphere orthogonality); cross-parity entries come from an exact
    Gauss-Legendre rule on [0, 1].
    """
    _check_lmax(basis.lmax)
    n = len(basis)
    g = np.zeros((n, n))
    for m in range(-basis.lmax, basis.lmax + 1):
        sl = basis.block(m)
        *_, w, vals = _block_data(basis.lmax, m)
        blk = 2 * np.pi * (vals * w[None, :]) @ vals.T
        ells = basis.ell[sl]
        same = (ells[:, None] - ells[None, :]) % 2 == 0
        blk[same & ~np.eye(ells.size, dtype=bool)] = 0.0
        g[sl, sl] = 0.5 * (blk + blk.T)
    return g


def stiffness_matrix(basis: GalerkinBasis, gram: np.ndarray | None = None, tol: float = 1e-9) -> np.ndarray:
    """Dirichlet integral int grad u . grad v over the hemisphere.

    Green's identity with -Delta u = l(l+1) u gives

        K(u, v) = l_u (l_u + 1) G(u, v) + 2 pi (d_n u)(trace v),

    nonzero in the second term only for Dirichlet-type u against
    Neumann-type v of the same m. The two assembly directions agree in exact
    arithmetic; their mismatch is checked against ``tol``.

    Raises
    ------
    AssemblyError
        If the assembled matrix is not Hermitian to ``tol`` relative.
    """
    g = gram_matrix(basis) if gram is None else gram
    k = basis.ell * (basis.ell + 1.0)
    mat = k[:, None] * g  # row index = u
    for m in range(-basis.lmax, basis.lmax + 1):
        sl = basis.block(m)
        _, p0, dp0, *_ = _block_data(basis.lmax, m)
        neu = basis.neumann[sl]
        normal = np.where(neu, 0.0, -dp0)  # outward derivative d/dn = -d/dx
        trace = np.where(neu, p0, 0.0)
        mat[sl, sl] += 2 * np.pi * normal[:, None] * trace[None, :]
    dev = float(np.max(np.abs(mat - mat.T))) if mat.size else 0.0
    scale = float(np.max(np.abs(mat))) if mat.size else 1.0
    if dev > tol * max(scale, 1.0):
        raise AssemblyError(f"stiffness Hermiticity deviation {dev:.2e} exceeds {tol:g} relative")
    return 0.5 * (mat + mat.T)


def boundary_matrix(basis: GalerkinBasis, sigma: BoundarySymbol) -> np.ndarray:
    """int sigma |u|^2 dphi over the equator, as a Hermitian matrix.

    Entry (row v, column u) = 2 pi sigma_hat_{m_v - m_u} t_u t_v on
    Neumann-type pairs, with t the trace coefficient A/sqrt(2 pi).
    """
    trace = np.zeros(len(basis))
    for m in range(-basis.lmax, basis.lmax + 1):
        sl = basis.block(m)
        _, p0, *_ = _block_data(basis.lmax, m)
        trace[sl] = np.where(basis.neumann[sl], p0, 0.0)
    dm = basis.m[:, None] - basis.m[None, :]
    d = sigma.degree
    coeffs = np.where(np.abs(dm) <= d, sigma.coeffs[np.clip(dm + d, 0, 2 * d)], 0.0)
    mat = 2 * np.pi * coeffs * trace[:, None] * trace[None, :]
    if np.all(np.abs(mat.imag) == 0):
        return mat.real.copy()
    return mat


@dataclass(frozen=True)
class GalerkinSystem:
    basis: GalerkinBasis
    gram: np.ndarray
    stiffness: np.ndarray
    boundary: np.ndarray
    meta: dict = field(default_factory=dict)


def assemble(sigma: BoundarySymbol, lmax: int) -> GalerkinSystem:
    """Gram, stiffness and boundary matrices in the signed harmonic basis."""
    basis = build_basis(lmax)
    g = gram_matrix(basis)
    return GalerkinSystem(
        basis=basis,
        gram=g,
        stiffness=stiffness_matrix(basis, g),
        boundary=boundary_matrix(basis, sigma),
        meta={"lmax": lmax, "gram_min_eigenvalue": float(np.linalg.eigvalsh(g)[0]) if len(basis) else 1.0},
    )


def harmonic_ritz_values(sigma: BoundarySymbol, lmax: int) -> np.ndarray:
    """Ritz values from the harmonic-basis matrices (Cholesky route).

    Only usable for small lmax: the gram matrix loses positive
    definiteness in double precision around lmax = 10.
    """
    sys = assemble(sigma, lmax)
    return np.sort(np.asarray(generalized_eigen(sys.stiffness + sys.boundary, sys.gram)))


# ---------------------------------------------------------------------------
# Spectra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RobinSpectrum:
    """Ascending Ritz values; those below ``cutoff`` are flagged trusted.

    The cutoff is (lmax//2 + 1)^2, the top of the region that holds the
    clusters l <= lmax/2.
    """

    eigenvalues: np.ndarray
    lmax: int
    cutoff: float

    @property
    def trusted(self) -> np.ndarray:
        return self.eigenvalues[self.eigenvalues < self.cutoff]


def _cutoff(lmax: int) -> float:
    return float((lmax // 2 + 1) ** 2)


@lru_cache(maxsize=512)
def _orthonormal_block(lmax: int, m: int):
    """Orthonormal basis of the fixed-m trial space, tabulated.

    u_j = (1 - x^2)^{|m|/2} q_j(x) e^{i m phi}, j = 0..lmax-|m|, where q_j are
    orthonormal for 2 pi (1 - x^2)^{|m|} dx on [0, 1]. The recurrence
    coefficients come from a Lanczos run on the Gauss-Legendre discretized
    measure (exact for the degrees involved); q_j and q_j' are then
    evaluated by the three-term recurrence.

    Returns (nodes, weights, q, dq, q_at_0) with q, dq of shape (n_poly, n_nodes).
    """
    mm = abs(m)
    n_poly = lmax - mm + 1
    gl = gauss_legendre(lmax + 2, 0.0, 1.0)
    x, w = gl.nodes, gl.weights
    mu = 2 * np.pi * w * (1.0 - x * x) ** mm
    # Lanczos on diag(x) with start vector sqrt(mu), full reorthogonalization
    v = np.zeros((n_poly, x.size))
    alpha = np.zeros(n_poly)
    beta = np.zeros(n_poly + 1)
    beta[0] = math.sqrt(float(np.sum(mu)))
    v[0] = np.sqrt(mu) / beta[0]
    for j in range(n_poly):
        r = x * v[j]
        alpha[j] = float(v[j] @ r)
        r -= alpha[j] * v[j]
        if j > 0:
            r -= beta[j] * v[j - 1]
        r -= v[: j + 1].T @ (v[: j + 1] @ r)
        beta[j + 1] = float(np.linalg.norm(r))
        if j + 1 < n_poly:
            v[j + 1] = r / beta[j + 1]

    pts = np.concatenate([x, [0.0]])
    q = np.zeros((n_poly, pts.size))
    dq = np.zeros_like(q)
    q[0] = 1.0 / beta[0]
    for j in range(n_poly - 1):
        prev = q[j - 1] if j > 0 else 0.0
        dprev = dq[j - 1] if j > 0 else 0.0
        q[j + 1] = ((pts - alpha[j]) * q[j] - beta[j] * prev) / beta[j + 1]
        dq[j + 1] = (q[j] + (pts - alpha[j]) * dq[j] - beta[j] * dprev) / beta[j + 1]
    return x, w, q[:, :-1], dq[:, :-1], q[:, -1]


def _orthonormal_stiffness(lmax: int, m: int) -> np.ndarray:
    """int |grad u|^2 over the hemisphere for the orthonormal block.

    With u = (1-x^2)^{|m|/2} q e^{i m phi} the integrand is
    2 pi (1-x^2)^{|m|-1} (F_j F_k + m^2 q_j q_k), F = (1-x^2) q' - |m| x q,
    a polynomial of degree <= 2 lmax, integrated exactly.
    """
    mm = abs(m)
    x, w, q, dq, _ = _orthonormal_block(lmax, m)
    one = 1.0 - x * x
    f = one * dq - mm * x * q
    wt = 2 * np.pi * w * one ** (mm - 1)
    k = (f * wt) @ f.T + mm * mm * (q * wt) @ q.T
    return 0.5 * (k + k.T)


def _orthonormal_traces(lmax: int) -> tuple[np.ndarray, np.ndarray]:
    ms, traces = [], []
    for m in range(-lmax, lmax + 1):
        *_, q0 = _orthonormal_block(lmax, m)
        ms.append(np.full(q0.size, m))
        traces.append(q0)
    return np.concatenate(ms), np.concatenate(traces)


def orthonormal_system(sigma: BoundarySymbol, lmax: int) -> tuple[np.ndarray, np.ndarray]:
    """(stiffness, boundary) in the orthonormal basis; the gram matrix is I."""
    blocks = [_orthonormal_stiffness(lmax, m) for m in range(-lmax, lmax + 1)]
    n = sum(b.shape[0] for b in blocks)
    k = np.zeros((n, n))
    i = 0
    for b in blocks:
        k[i : i + b.shape[0], i : i + b.shape[0]] = b
        i += b.shape[0]
    ms, t = _orthonormal_traces(lmax)
    dm = ms[:, None] - ms[None, :]
    d = sigma.degree
    coeffs = np.where(np.abs(dm) <= d, sigma.coeffs[np.clip(dm + d, 0, 2 * d)], 0.0)
    h = 2 * np.pi * coeffs * t[:, None] * t[None, :]
    if np.all(h.imag == 0):
        h = h.real.copy()
    return k, h


def robin_spectrum(sigma: BoundarySymbol, lmax: int, method: str = "lapack") -> RobinSpectrum:
    """Ritz values of the Robin form on harmonics of degree <= lmax.

    Requires lmax >= 4 + 2 deg(sigma). Ritz values are upper bounds for the
    Robin eigenvalues and are non-increasing in lmax (nested spaces).
    """
    if lmax < 4 + 2 * sigma.effective_degree:
        raise DomainError("lmax must be at least 4 + 2 * degree(sigma)")
    k, h = orthonormal_system(sigma, lmax)
    ev = hermitian_eigen(k + h, method=method, vectors=False)
    return RobinSpectrum(eigenvalues=np.sort(np.asarray(ev)), lmax=lmax, cutoff=_cutoff(lmax))


def constant_sigma_spectrum(c: float, lmax: int) -> RobinSpectrum:
    """Robin spectrum for constant sigma = c, solved block by block in m.

    A constant sigma does not couple different m, so each fixed-m block is
    an independent problem of size lmax - |m| + 1.
    """
    if lmax < 4:
        raise DomainError("lmax must be at least 4")
    out = []
    for m in range(-lmax, lmax + 1):
        *_, q0 = _orthonormal_block(lmax, m)
        blk = _orthonormal_stiffness(lmax, m) + 2 * np.pi * c * np.outer(q0, q0)
        out.append(hermitian_eigen(blk, vectors=False))
    return RobinSpectrum(eigenvalues=np.sort(np.concatenate(out)), lmax=lmax, cutoff=_cutoff(lmax))


def cluster_window(ell: int, c: float) -> tuple[float, float]:
    """Open interval (l(l+1) - C sqrt(l+1), l(l+1) + C sqrt(l+1))."""
    centre = ell * (ell + 1.0)
    half = c * math.sqrt(ell + 1.0)
    return centre - half, centre + half


def windows_disjoint(ell: int, c: float) -> bool:
    """Whether the windows of l and l+1 do not overlap.

    Their centres are 2(l+1) apart, so this is C(sqrt(l+1) + sqrt(l+2)) <= 2(l+1).
    """
    return c * (math.sqrt(ell + 1.0) + math.sqrt(ell + 2.0)) <= 2 * (ell + 1.0)


def cluster_window_counts(eigenvalues: Sequence[float], c: float, ells: Sequence[int], cutoff: float | None = None) -> dict:
    """Eigenvalue counts per cluster window.

    Returns a dict with

    ``window``
        count in Lambda_l for each l (windows may overlap for small l);
    ``cell``
        count in Lambda_l intersected with (l^2, (l+1)^2], a partition of
        the half line that attributes every eigenvalue to one cluster;
    ``stragglers``
        eigenvalues below ``cutoff`` (default: the largest eigenvalue)
        outside the union of all windows that start below the cutoff.
    """
    ev = np.asarray(eigenvalues, dtype=float)
    ells = [int(l) for l in ells]
    window, cell = {}, {}
    for ell in ells:
        lo, hi = cluster_window(ell, c)
        inside = (ev > lo) & (ev < hi)
        window[ell] = int(np.sum(inside))
        cell[ell] = int(np.sum(inside & (ev > ell * ell) & (ev <= (ell + 1) ** 2)))
    top = float(ev.max()) if cutoff is None else cutoff
    covered = np.zeros(ev.size, dtype=bool)
    for ell in range(0, int(math.isqrt(max(int(top), 0))) + 2):
        lo, hi = cluster_window(ell, c)
        covered |= (ev > lo) & (ev < hi)
    stragglers = ev[(~covered) & (ev < top)]
    return {"window": window, "cell": cell, "stragglers": stragglers}


# ---------------------------------------------------------------------------
# Odd sigma: explicit eigenfunctions at l(l+1)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OddConstruction:
    ell: int
    degree: int
    dimension: int
    residuals: np.ndarray
    neumann_m: np.ndarray
    coefficients: list  # per f_N: dict {(l, m): coefficient} in the signed basis


def _odd_degree(sigma: BoundarySymbol) -> int:
    d = sigma.effective_degree
    if not sigma.is_odd() or d == 0:
        raise DomainError("sigma must be a nonzero odd trigonometric polynomial")
    if d % 2 == 0:  # pragma: no cover - an odd symbol has odd top degree
        raise DomainError("odd sigma must have odd degree")
    return d


def odd_eigenspace_construction(sigma: BoundarySymbol, ell: int, n_grid: int | None = None) -> OddConstruction:
    """Robin eigenfunctions with eigenvalue l(l+1) for odd sigma.

    For every e^{i m phi} with |m| <= l - d - 1 and l - m even, take the
    Neumann-type harmonic F_N with that trace, and the Dirichlet-type
    combination F_D = sum_k c_k Y_{l, m+k} with c_k = -sigma_hat_k / B_{l,m+k},
    so that d_n F_D = -sigma f_N. Then F = F_N + F_D satisfies
    d_n F + sigma F = 0 on the equator.

    Residuals ||sigma F + d_n F||_{L^2(equator)} are evaluated on a phi grid
    from the Legendre recurrence values at the equator, not from A and B,
    so they check the amplitude bookkeeping.
    """
    d = _odd_degree(sigma)
    if ell <= d:
        raise DomainError("need l > degree(sigma)")
    amp = trace_amplitudes(ell)
    ms = np.arange(-(ell - d - 1), ell - d, 2)
    n = n_grid or max(64, 4 * (ell + d) + 4)
    phi = -np.pi + 2 * np.pi * np.arange(n) / n
    sig = evaluate(sigma, phi)
    residuals, coefficients = [], []
    for m in ms:
        coef = {(ell, int(m)): 1.0 / (amp.a_at(int(m)) / math.sqrt(2 * math.pi))}
        for k in range(-d, d + 1, 2):
            c = sigma.coeff(k)
            if c == 0:
                continue
            b = amp.b_at(int(m) + k)
            if b == 0:  # pragma: no cover - B vanishes only for l - m even
                raise ArithmeticError(f"B_{{{ell},{m + k}}} vanishes")
            coef[(ell, int(m) + k)] = -c / b
        trace = np.zeros(n, dtype=complex)
        normal = np.zeros(n, dtype=complex)
        for (l_, mm), c in coef.items():
            _, p0, dp0, *_ = _block_data(ell, mm)
            i = l_ - abs(mm)
            e = np.exp(1j * mm * phi)
            trace += c * p0[i] * e
            normal += c * (-dp0[i]) * e
        res = sig * trace + normal
        residuals.append(math.sqrt(2 * math.pi * float(np.mean(np.abs(res) ** 2))))
        coefficients.append(coef)
    return OddConstruction(
        ell=ell,
        degree=d,
        dimension=int(ms.size),
        residuals=np.asarray(residuals),
        neumann_m=ms,
        coefficients=coefficients,
    )


def boundary_condition_nullity(sigma: BoundarySymbol, ell: int) -> int:
    """dim of {F in degree-l harmonics : d_n F + sigma F = 0 on the equator}.

    The map sends the 2l+1 signed harmonics of degree l to the Fourier
    coefficients (|j| <= l + deg sigma) of d_n F + sigma F; the nullity is
    2l+1 minus its numerical rank.
    """
    d = sigma.degree
    js = np.arange(-ell - d, ell + d + 1)
    cols = []
    for m in range(-ell, ell + 1):
        _, p0, dp0, *_ = _block_data(ell, m)
        i = ell - abs(m)
        col = np.zeros(js.size, dtype=complex)
        col[js == m] += -dp0[i]
        for k in range(-d, d + 1):
            col[js == m + k] += sigma.coeff(k) * p0[i]
        cols.append(col)
    mat = np.column_stack(cols)
    sv = np.linalg.svd(mat, compute_uv=False)
    rank = numerical_rank(sv, scale=float(sv[0]) if sv.size else 1.0, rel_tol=1e-10)
    return 2 * ell + 1 - rank
