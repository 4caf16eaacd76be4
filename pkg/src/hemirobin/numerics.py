"""Self-contained numeric kernels.

Log-Gamma (series near the two real zeros, recurrence, Stirling tail),
Gauss-Legendre and periodic quadrature, dense Hermitian and generalized
Hermitian eigensolvers, rank counting and the trace-difference inequality.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

__all__ = [
    "DomainError",
    "ConvergenceError",
    "NotPositiveDefiniteError",
    "log_gamma",
    "log_gamma_ratio",
    "QuadratureRule",
    "gauss_legendre",
    "periodic_rule",
    "check_hermitian",
    "hermitian_eigen",
    "jacobi_eigh",
    "generalized_eigen",
    "numerical_rank",
    "trace_difference_bound_check",
]


class DomainError(ValueError):
    """Argument outside the domain of a function."""


class ConvergenceError(RuntimeError):
    """An iterative kernel exceeded its iteration budget."""


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Cholesky factorization of a Gram matrix failed."""


# ---------------------------------------------------------------------------
# log-Gamma
# ---------------------------------------------------------------------------

EULER_GAMMA = 0.57721566490153286061
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
# B_2, B_4, ..., B_16
_BERNOULLI = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
)
_STIRLING_MIN = 12.0
_SERIES_TERMS = 60


def _zeta_minus_one(s: int, n_direct: int = 16) -> float:
    # Euler-Maclaurin: sum_{n>=2} n^-s with 16 explicit terms and 8 corrections.
    head = math.fsum(n ** (-float(s)) for n in range(2, n_direct))
    N = float(n_direct)
    tail = N ** (1 - s) / (s - 1) + 0.5 * N ** (-s)
    rising = float(s)  # s (s+1) ... (s+2j-2)
    for j, b2j in enumerate(_BERNOULLI, start=1):
        tail += b2j / math.factorial(2 * j) * rising * N ** (-s - 2 * j + 1)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
    return head + tail


_ZM1 = np.array([0.0, 0.0] + [_zeta_minus_one(k) for k in range(2, _SERIES_TERMS + 1)])
_K = np.arange(_SERIES_TERMS + 1, dtype=float)
_K[0] = 1.0
_SIGN = (-1.0) ** np.arange(_SERIES_TERMS + 1)


def _series_at_two(z: np.ndarray) -> np.ndarray:
    """ln Gamma(2 + z) for |z| <= 1/2."""
    # ln G(2+z) = (1 - gamma) z + sum_{k>=2} (-1)^k (zeta(k) - 1) z^k / k
    acc = np.zeros_like(z)
    for k in range(_SERIES_TERMS, 1, -1):
        acc = (acc + _SIGN[k] * _ZM1[k] / _K[k]) * z
    return ((1.0 - EULER_GAMMA) + acc) * z


def _series_at_one(z: np.ndarray) -> np.ndarray:
    """ln Gamma(1 + z) for |z| <= 1/2."""
    # ln G(1+z) = ln G(2+z) - ln(1+z)
    return _series_at_two(z) - np.log1p(z)


def _stirling(x: np.ndarray) -> np.ndarray:
    inv = 1.0 / x
    inv2 = inv * inv
    corr = np.zeros_like(x)
    for j in range(len(_BERNOULLI), 0, -1):
        b2j = _BERNOULLI[j - 1]
        corr = corr * inv2 + b2j / (2 * j * (2 * j - 1))
    corr *= inv
    return (x - 0.5) * np.log(x) - x + _HALF_LOG_2PI + corr


def _log_gamma_array(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    big = x >= _STIRLING_MIN
    out[big] = _stirling(x[big])

    small = ~big
    if np.any(small):
        xs = x[small].copy()
        shift = np.zeros_like(xs)
        # x < 1/2: Gamma(x) = Gamma(x + 1) / x
        tiny = xs < 0.5
        shift[tiny] -= np.log(xs[tiny])
        xs[tiny] += 1.0
        # 2.5 < x < 12: step down into (1.5, 2.5]; every log factor exceeds ln 1.5
        while True:
            high = xs > 2.5
            if not np.any(high):
                break
            xs[high] -= 1.0
            shift[high] += np.log(xs[high])
        res = np.empty_like(xs)
        near_one = xs <= 1.5
        res[near_one] = _series_at_one(xs[near_one] - 1.0)
        res[~near_one] = _series_at_two(xs[~near_one] - 2.0)
        out[small] = res + shift
    return out


def log_gamma(x):
    """Natural log of the Gamma function for positive real arguments.

    Accepts scalars or arrays. Relative accuracy is about 1e-15 on
    [0.5, 1e6]; the zeros at x = 1 and x = 2 are resolved by Taylor
    series about those points.

    Raises
    ------
    DomainError
        If any argument is not a finite positive number.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError("log_gamma requires finite x > 0")
    out = _log_gamma_array(np.atleast_1d(arr).ravel()).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def log_gamma_ratio(p, q):
    """ln Gamma(p) - ln Gamma(q), accurate when p and q are large and close.

    For arguments past the Stirling threshold the leading terms are combined
    analytically (``log1p`` of the relative offset), so no digits are lost
    to cancellation between two large logarithms.
    """
    p_arr, q_arr = np.broadcast_arrays(np.asarray(p, dtype=float), np.asarray(q, dtype=float))
    if np.any(p_arr <= 0.0) or np.any(q_arr <= 0.0):
        raise DomainError("log_gamma_ratio requires positive arguments")
    p1 = np.atleast_1d(p_arr).ravel()
    q1 = np.atleast_1d(q_arr).ravel()
    out = np.empty_like(p1)

    both = (p1 >= _STIRLING_MIN) & (q1 >= _STIRLING_MIN)
    if np.any(both):
        a, b = p1[both], q1[both]
        d = a - b
        lead = (b - 0.5) * np.log1p(d / b) + d * np.log(a) - d
        corr = np.zeros_like(a)
        for j, b2j in enumerate(_BERNOULLI, start=1):
            e = 2 * j - 1
            # a^-e - b^-e without cancellation: b^-e * expm1(-e * log1p(d/b))
            corr += b2j / (2 * j * e) * (b ** (-e)) * np.expm1(-e * np.log1p(d / b))
        out[both] = lead + corr
    rest = ~both
    if np.any(rest):
        out[rest] = _log_gamma_array(p1[rest]) - _log_gamma_array(q1[rest])
    out = out.reshape(p_arr.shape)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights of a 1D rule.

    ``kind`` is ``"gauss-legendre"`` (interval [a, b]) or
    ``"uniform-periodic"`` (interval [-pi, pi), equal weights).
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    interval: tuple[float, float]

    def integrate(self, values: np.ndarray, axis: int = -1):
        """Apply the rule to samples taken at ``nodes`` along ``axis``."""
        return np.tensordot(values, self.weights, axes=([axis], [0]))

    def __len__(self) -> int:
        return len(self.nodes)


def _legendre_and_derivative(n: int, x: np.ndarray):
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    """n-point Gauss-Legendre rule on [a, b] (Newton iteration on P_n)."""
    if n < 1:
        raise DomainError("gauss_legendre needs n >= 1")
    if n == 1:
        x = np.zeros(1)
        w = np.array([2.0])
    else:
        i = np.arange(1, n + 1)
        x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
        for _ in range(100):
            p, dp = _legendre_and_derivative(n, x)
            dx = p / dp
            x = x - dx
            if np.max(np.abs(dx)) < 1e-16:
                break
        else:  # pragma: no cover - Newton converges quadratically from these guesses
            raise ConvergenceError("Gauss-Legendre Newton iteration did not converge")
        _, dp = _legendre_and_derivative(n, x)
        w = 2.0 / ((1.0 - x * x) * dp * dp)
        x = x[::-1].copy()
        w = w[::-1].copy()
    half = 0.5 * (b - a)
    return QuadratureRule(
        nodes=half * x + 0.5 * (a + b),
        weights=half * w,
        kind="gauss-legendre",
        interval=(float(a), float(b)),
    )


def periodic_rule(n: int) -> QuadratureRule:
    """Trapezoid rule with n equispaced nodes on [-pi, pi).

    Exact for trigonometric polynomials of degree < n.
    """
    if n < 1:
        raise DomainError("periodic_rule needs n >= 1")
    nodes = -np.pi + 2.0 * np.pi * np.arange(n) / n
    return QuadratureRule(
        nodes=nodes,
        weights=np.full(n, 2.0 * np.pi / n),
        kind="uniform-periodic",
        interval=(-np.pi, np.pi),
    )


# ---------------------------------------------------------------------------
# Eigensolvers
# ---------------------------------------------------------------------------


def check_hermitian(m, rtol: float = 1e-12, name: str = "matrix") -> np.ndarray:
    """Validate a square Hermitian matrix with finite entries and return it
    exactly symmetrized as ``(m + m^H) / 2``."""
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    a = a.astype(complex) if np.iscomplexobj(a) else a.astype(float)
    dev = np.max(np.abs(a - a.conj().T))
    scale = max(1.0, float(np.max(np.abs(a))))
    if dev > rtol * scale:
        raise ValueError(f"{name} is not Hermitian (deviation {dev:.3e})")
    herm = 0.5 * (a + a.conj().T)
    if np.iscomplexobj(herm) and not np.any(herm.imag):
        herm = herm.real.copy()
    return herm


def jacobi_eigh(m, tol: float = 1e-12, max_sweeps: int = 30):
    """Cyclic Jacobi eigensolver for a dense Hermitian matrix.

    Each pivot (p, q) is first made real by a phase on column q, then
    annihilated by a plane rotation. Sweeps stop when the off-diagonal
    Frobenius norm drops below ``tol * ||m||_F``.

    Returns
    -------
    eigenvalues : ndarray, ascending
    eigenvectors : ndarray, columns unitary

    Raises
    ------
    ConvergenceError
        If ``max_sweeps`` sweeps do not reach the threshold.
    """
    a = check_hermitian(m).astype(complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    fro = np.linalg.norm(a)
    if fro == 0.0 or n == 1:
        w = a.diagonal().real.copy()
        order = np.argsort(w, kind="stable")
        return w[order], v[:, order]
    target = tol * fro
    for _ in range(max_sweeps):
        off = math.sqrt(max(fro**2 - float(np.sum(np.abs(a.diagonal()) ** 2)), 0.0))
        off = np.linalg.norm(a - np.diag(a.diagonal())) if off < 10 * target else off
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= 1e-300 or r < 1e-18 * fro:
                    continue
                phase = apq / r
                app = a[p, p].real
                aqq = a[q, q].real
                zeta = (aqq - app) / (2.0 * r)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # columns: new_p = c e_p - s phase* e_q ; new_q = s phase e_p + c e_q
                rot = np.array([[c, s * phase], [-s * np.conj(phase), c]])
                cols = a[:, [p, q]] @ rot
                a[:, [p, q]] = cols
                a[[p, q], :] = rot.conj().T @ a[[p, q], :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, [p, q]] = v[:, [p, q]] @ rot
    else:
        off = np.linalg.norm(a - np.diag(a.diagonal()))
        if off > target:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps (off={off:.3e})")
    w = a.diagonal().real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def hermitian_eigen(m, method: str = "lapack", vectors: bool = True):
    """Eigen-decomposition of a dense Hermitian matrix.

    Parameters
    ----------
    m : array_like
        Square Hermitian matrix with finite entries.
    method : {"lapack", "jacobi"}
        ``"lapack"`` calls the divide-and-conquer driver behind
        :func:`numpy.linalg.eigh`; ``"jacobi"`` runs :func:`jacobi_eigh`
        (accurate but O(n^3) Python-level rotations, practical to a few
        hundred rows).
    vectors : bool
        If False only the eigenvalues are returned.

    Returns
    -------
    eigenvalues (ascending) or (eigenvalues, eigenvectors).
    """
    a = check_hermitian(m)
    if method == "jacobi":
        w, v = jacobi_eigh(a)
        return (w, v) if vectors else w
    if method != "lapack":
        raise ValueError(f"unknown eigensolver method {method!r}")
    if vectors:
        w, v = np.linalg.eigh(a)
        return w, v
    return np.linalg.eigvalsh(a)


def generalized_eigen(a, g, method: str = "lapack", vectors: bool = False):
    """Eigenvalues of ``A c = lambda G c`` with G Hermitian positive definite.

    Reduces to a standard problem through the Cholesky factor G = R^H R
    and solves ``R^{-H} A R^{-1}``.

    Raises
    ------
    NotPositiveDefiniteError
        If G is not numerically positive definite (for a Gram matrix this
        means the basis is linearly dependent).
    """
    a = check_hermitian(a, rtol=1e-9, name="A")
    g = check_hermitian(g, rtol=1e-9, name="G")
    if a.shape != g.shape:
        raise ValueError("A and G must have the same shape")
    try:
        low = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("gram matrix not positive definite") from exc
    x = solve_triangular(low, a, lower=True)
    c = solve_triangular(low, x.conj().T, lower=True)
    c = 0.5 * (c + c.conj().T)
    if not vectors:
        return hermitian_eigen(c, method=method, vectors=False)
    w, y = hermitian_eigen(c, method=method)
    return w, solve_triangular(low.conj().T, y, lower=False)


def cholesky_min_pivot(g) -> float:
    """Smallest diagonal entry of the Cholesky factor of G."""
    try:
        low = np.linalg.cholesky(np.asarray(g))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("gram matrix not positive definite") from exc
    return float(np.min(np.abs(np.diag(low))))


def numerical_rank(eigenvalues: Sequence[float], scale: float, rel_tol: float) -> int:
    """Number of entries with ``|lambda| > rel_tol * scale``."""
    if scale <= 0 or rel_tol <= 0:
        raise DomainError("scale and rel_tol must be positive")
    ev = np.asarray(eigenvalues, dtype=float)
    return int(np.count_nonzero(np.abs(ev) > rel_tol * scale))


def trace_difference_bound_check(a, b, f_coeffs: Sequence[float], interval: tuple[float, float]):
    """Check ``|Tr f(A) - Tr f(B)| <= max|f'| * ||A - B||_{S_1}``.

    ``f_coeffs`` are polynomial coefficients in ascending order
    (``f(x) = c0 + c1 x + ...``). ``max|f'|`` is sampled on 10^4 points of
    ``interval``, which must contain both spectra. The trace norm of the
    Hermitian difference is the sum of its absolute eigenvalues.

    Returns
    -------
    (lhs, rhs, holds)
    """
    a = check_hermitian(a, name="A")
    b = check_hermitian(b, name="B")
    if a.shape != b.shape:
        raise ValueError("A and B must have the same dimension")
    poly = np.polynomial.Polynomial(np.asarray(f_coeffs, dtype=float))
    ea = hermitian_eigen(a, vectors=False)
    eb = hermitian_eigen(b, vectors=False)
    lo, hi = interval
    slack = 1e-12 * max(1.0, abs(lo), abs(hi))
    if min(ea[0], eb[0]) < lo - slack or max(ea[-1], eb[-1]) > hi + slack:
        raise DomainError("interval does not contain both spectra")
    lhs = abs(float(np.sum(poly(ea)) - np.sum(poly(eb))))
    grid = np.linspace(lo, hi, 10_000)
    fprime_max = float(np.max(np.abs(poly.deriv()(grid))))
    s1 = float(np.sum(np.abs(hermitian_eigen(a - b, vectors=False))))
    rhs = fprime_max * s1
    return lhs, rhs, bool(lhs <= rhs * (1.0 + 1e-9))
