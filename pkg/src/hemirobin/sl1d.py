"""One-dimensional companion problems on [0, 1].

Robin problem

    -u'' = lam u,   -u'(0) + sigma u(0) = 0,   u'(1) = 0,

and the step-potential problem

    -u'' + (sigma / eps) chi_(0, eps) u = mu u,   u'(0) = u'(1) = 0.

For large mode number the Robin gap lam - pi^2 N^2 tends to 2 sigma while
the step gap mu - pi^2 N^2 tends to sigma, although mu -> lam for each fixed
mode as eps -> 0. The two limits do not commute.

Indexing: modes are numbered n = 1, 2, ... from the bottom of the spectrum,
and the gap of mode n is taken against pi^2 (n - 1)^2 (the n-th Neumann
eigenvalue). ``mode_index(n)`` returns that n - 1.

Secular equations
-----------------
Robin: u = cos(k (1 - x)) satisfies the right condition, and the left one
becomes k sin k - sigma cos k = 0 (k = sqrt(lam)). A negative eigenvalue
-kappa^2 exists only for sigma < 0 and solves kappa tanh kappa = -sigma.

Step: the Neumann solution on (0, eps) is cos(z x) with z^2 = mu - sigma/eps
(cosh when z^2 < 0), the Neumann solution on (eps, 1) is cos(k (1 - x)).
Their Wronskian at x = eps,

    W(mu) = k sin(k (1 - eps)) cos(z eps) + z sin(z eps) cos(k (1 - eps)),

vanishes exactly at the eigenvalues. cos(z x) and z sin(z x) are entire in
z^2, so W is continuous across the turning point mu = sigma / eps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import linalg, optimize

from .numerics import ConvergenceError, DomainError

__all__ = [
    "SL1DProblem",
    "mode_index",
    "robin_secular",
    "robin_eigenvalue",
    "step_wronskian",
    "step_eigenvalue",
    "node_count",
    "finite_difference_eigenvalues",
    "eigen_table",
    "gap_ladder",
]

_XTOL = 1e-15


@dataclass(frozen=True)
class SL1DProblem:
    """sigma and variant ('robin' or 'step'); epsilon only for 'step'."""

    sigma: float
    variant: str = "robin"
    epsilon: float | None = None

    def __post_init__(self):
        if self.variant not in ("robin", "step"):
            raise DomainError(f"unknown variant {self.variant!r}")
        if self.variant == "step":
            if self.epsilon is None or not 0 < self.epsilon < 1:
                raise DomainError("step variant needs epsilon in (0, 1)")

    def eigenvalue(self, n: int) -> float:
        if self.variant == "robin":
            return robin_eigenvalue(self.sigma, n)
        return step_eigenvalue(self.sigma, self.epsilon, n)


def mode_index(n: int) -> int:
    """Neumann mode number N = n - 1 that the gap of mode n refers to."""
    _check_n(n)
    return n - 1


def _check_n(n):
    if int(n) != n or n < 1:
        raise DomainError("mode number n must be a positive integer")


# ---------------------------------------------------------------------------
# Robin
# ---------------------------------------------------------------------------


def robin_secular(sigma: float, k: float) -> float:
    """k sin k - sigma cos k; zero at k = sqrt(lam)."""
    return k * math.sin(k) - sigma * math.cos(k)


def robin_eigenvalue(sigma: float, n: int, return_residual: bool = False):
    """n-th Robin eigenvalue (n = 1 is the lowest).

    For sigma >= 0 the n-th root k lies in [pi N, pi N + pi/2], N = n - 1.
    For sigma < 0 the lowest eigenvalue is negative and the n-th (n >= 2)
    root lies in [pi N - pi/2, pi N]. The root is found for the offset
    delta = k - pi N from the shifted equation

        (pi N + delta) sin delta - sigma cos delta = 0,

    which is (-1)^N times the secular function but keeps delta accurate to
    the last bit when N is large.
    """
    _check_n(n)
    sigma = float(sigma)
    big_n = n - 1
    if sigma < 0 and n == 1:
        g = lambda kap: kap * math.tanh(kap) + sigma
        hi = 1.0
        while g(hi) < 0:
            hi *= 2
        kap = optimize.brentq(g, 0.0, hi, xtol=_XTOL, rtol=4 * np.finfo(float).eps)
        lam = -kap * kap
        res = abs(kap * math.sinh(kap) + sigma * math.cosh(kap)) / math.cosh(kap)
        return (lam, res) if return_residual else lam
    base = math.pi * big_n
    h = lambda d: (base + d) * math.sin(d) - sigma * math.cos(d)
    lo, hi = (0.0, math.pi / 2) if sigma >= 0 else (-math.pi / 2, 0.0)
    if h(lo) * h(hi) > 0:  # pragma: no cover - the bracket is analytic
        raise ConvergenceError(f"Robin bracket for n={n} does not change sign")
    delta = optimize.brentq(h, lo, hi, xtol=_XTOL, rtol=4 * np.finfo(float).eps)
    lam = (base + delta) ** 2
    return (lam, abs(h(delta))) if return_residual else lam


# ---------------------------------------------------------------------------
# Step potential
# ---------------------------------------------------------------------------


def _cos_and_zsin(z2, x):
    """cos(z x) and z sin(z x) as functions of z^2 (entire)."""
    z2 = np.asarray(z2, dtype=float)
    z = np.sqrt(np.abs(z2))
    zx = np.broadcast_to(z * x, np.broadcast_shapes(z.shape, np.shape(x)))
    z = np.broadcast_to(z, zx.shape)
    pos = np.broadcast_to(z2 >= 0, zx.shape)
    c = np.empty(zx.shape)
    s = np.empty(zx.shape)
    c[pos] = np.cos(zx[pos])
    s[pos] = z[pos] * np.sin(zx[pos])
    c[~pos] = np.cosh(zx[~pos])
    s[~pos] = -z[~pos] * np.sinh(zx[~pos])
    return c, s


def step_wronskian(sigma: float, epsilon: float, mu):
    """Matching Wronskian at x = eps; zero exactly at the eigenvalues."""
    mu = np.asarray(mu, dtype=float)
    cl, sl = _cos_and_zsin(mu - sigma / epsilon, epsilon)
    cr, sr = _cos_and_zsin(mu, 1.0 - epsilon)
    return sr * cl + sl * cr


def _step_scan_grid(sigma, epsilon, n):
    """Increasing mu grid that separates the lowest n + 1 eigenvalues.

    Eigenvalues lie above min(0, sigma/eps) and below pi^2 n^2 + max(0, sigma/eps)
    (min-max against the Neumann problem with a bounded potential). In
    k = sqrt(mu) consecutive eigenvalues are separated by a fixed fraction of
    pi, so a step of pi/128 in k keeps roots in separate cells; node_count
    confirms the indexing in the tests.
    """
    vmin = min(0.0, sigma / epsilon)
    vmax = max(0.0, sigma / epsilon)
    kmax = math.sqrt(math.pi**2 * n * n + vmax) + math.pi
    ks = np.arange(0.0, kmax + math.pi / 128, math.pi / 128)
    grid = ks * ks
    if vmin < 0:
        kneg = math.sqrt(-vmin)
        neg = -(np.arange(kneg + 1e-3, 0.0, -math.pi / 128) ** 2)
        grid = np.concatenate([[vmin - 1.0], neg, grid[1:]])
    return grid


def step_eigenvalue(sigma: float, epsilon: float, n: int, return_residual: bool = False):
    """n-th eigenvalue of the step-potential problem (n = 1 is the lowest).

    Roots of the matching Wronskian are bracketed by a sign scan in sqrt(mu),
    counted from the bottom, and refined with Brent's method.
    """
    _check_n(n)
    if not 0 < epsilon < 1:
        raise DomainError("epsilon must lie in (0, 1)")
    sigma = float(sigma)
    grid = _step_scan_grid(sigma, epsilon, n)
    w = step_wronskian(sigma, epsilon, grid)
    exact = np.flatnonzero(w == 0)
    change = np.flatnonzero(np.sign(w[:-1]) * np.sign(w[1:]) < 0)
    # a grid point that is an exact root is counted once, via `exact`
    roots = sorted([(grid[i], grid[i]) for i in exact] + [(grid[i], grid[i + 1]) for i in change])
    if len(roots) < n:
        raise ConvergenceError(f"found only {len(roots)} step eigenvalues below the scan limit, need {n}")
    a, b = roots[n - 1]
    if a == b:
        mu = float(a)
    else:
        f = lambda t: float(step_wronskian(sigma, epsilon, t))
        mu = optimize.brentq(f, a, b, xtol=_XTOL * max(1.0, abs(a)), rtol=4 * np.finfo(float).eps)
    if return_residual:
        scale = math.sqrt(abs(mu)) + math.sqrt(abs(mu - sigma / epsilon)) + 1.0
        return mu, abs(float(step_wronskian(sigma, epsilon, mu))) / scale
    return mu


def node_count(sigma: float, epsilon: float | None, mu: float, n_grid: int = 20001) -> int:
    """Interior zeros of the eigenfunction for eigenvalue ``mu``.

    Robin variant when ``epsilon`` is None. Sturm oscillation says mode n
    has n - 1 zeros, which makes this an independent check on indexing.
    """
    x = np.linspace(0.0, 1.0, n_grid)
    if epsilon is None:
        u = _cos_and_zsin(mu, 1.0 - x)[0]
    else:
        left = _cos_and_zsin(mu - sigma / epsilon, x)[0]
        cl = _cos_and_zsin(mu - sigma / epsilon, epsilon)[0]
        cr = _cos_and_zsin(mu, 1.0 - epsilon)[0]
        right = _cos_and_zsin(mu, 1.0 - x)[0]
        # scale the right piece to match at eps; if cos(k(1-eps)) = 0 the left
        # piece vanishes there too and the derivative fixes the scale
        if abs(cr) > 1e-8:
            amp = cl / cr
        else:
            _, sl = _cos_and_zsin(mu - sigma / epsilon, epsilon)
            _, sr = _cos_and_zsin(mu, 1.0 - epsilon)
            amp = -sl / sr
        u = np.where(x < epsilon, left, amp * right)
    s = np.sign(u[1:-1])
    s = s[s != 0]
    return int(np.sum(s[:-1] != s[1:]))


# ---------------------------------------------------------------------------
# Finite-difference oracle
# ---------------------------------------------------------------------------


def finite_difference_eigenvalues(sigma: float, k: int, epsilon: float | None = None, n_cells: int = 4000) -> np.ndarray:
    """Lowest ``k`` eigenvalues from a 3-point vertex-centred scheme.

    Ghost points give the boundary rows; the trapezoid mass matrix makes the
    pencil symmetric. With ``epsilon`` the step potential is sampled at the
    nodes, with the half value at a node that sits on the jump. Second order
    in h for smooth eigenfunctions.
    """
    h = 1.0 / n_cells
    x = np.linspace(0.0, 1.0, n_cells + 1)
    diag = np.full(n_cells + 1, 2.0 / h**2)
    off = np.full(n_cells, -1.0 / h**2)
    mass = np.ones(n_cells + 1)
    mass[0] = mass[-1] = 0.5
    diag[0] = diag[-1] = 1.0 / h**2
    if epsilon is None:
        diag[0] += sigma / h
    else:
        v = np.where(x < epsilon, sigma / epsilon, 0.0)
        v[np.isclose(x, epsilon, atol=1e-12 * h, rtol=0)] = 0.5 * sigma / epsilon
        diag += v * mass
    d = 1.0 / np.sqrt(mass)
    a = diag * d * d
    b = off * d[:-1] * d[1:]
    return linalg.eigh_tridiagonal(a, b, eigvals_only=True, select="i", select_range=(0, k - 1))


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------


def eigen_table(sigma: float, ns: Iterable[int], epsilon: float | None = None) -> list[tuple[int, float, float]]:
    """Rows (n, eigenvalue, eigenvalue - pi^2 (n-1)^2); step variant if epsilon is given."""
    rows = []
    for n in ns:
        lam = robin_eigenvalue(sigma, n) if epsilon is None else step_eigenvalue(sigma, epsilon, n)
        rows.append((int(n), float(lam), float(lam - (math.pi * mode_index(n)) ** 2)))
    return rows


def gap_ladder(sigma: float, ns: Sequence[int], epsilon: float | None = None) -> np.ndarray:
    """Gaps along a ladder of mode numbers."""
    return np.array([row[2] for row in eigen_table(sigma, ns, epsilon)])
