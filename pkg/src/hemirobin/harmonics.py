"""Equator trace data of hemisphere spherical harmonics.

Hemisphere harmonics are normalized in L^2 of the upper hemisphere,

    Y_l^m(theta, phi) = pbar_l^m(cos theta) e^{i m phi},
    pbar_l^m = sqrt((2l+1)/(2 pi) (l-m)!/(l+m)!) P_l^m,

with the Condon-Shortley phase in P_l^m. On the equator x = cos theta = 0
the restriction of a Neumann-type harmonic (l - m even) has modulus
A_{l,m}/sqrt(2 pi) and the outward normal derivative of a Dirichlet-type
harmonic (l - m odd) is B_{l,m} e^{i m phi}. Amplitudes are computed from
Gamma-function ratios in log space; the Legendre recurrence is kept as an
independent route.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .numerics import DomainError, log_gamma, log_gamma_ratio

__all__ = [
    "TraceAmplitudes",
    "SymbolSequence",
    "gamma_ratio",
    "trace_amplitudes",
    "normalized_legendre",
    "normalized_legendre_derivative",
    "legendre_p_at",
    "legendre_rows",
    "equator_amplitude_by_recurrence",
    "equator_derivative_by_recurrence",
    "symbol",
    "lemma_b2_diagnostics",
    "symbol_hs_deviation",
    "resolvent_coefficient_bound",
]

_LOG_PI = math.log(math.pi)


def _log_gamma_ratio_half(x):
    """ln gamma_ratio(x) = ln Gamma(x/2 + 1/2) - ln Gamma(x/2 + 1)."""
    x = np.asarray(x, dtype=float)
    return log_gamma_ratio(x / 2 + 0.5, x / 2 + 1.0)


def gamma_ratio(x):
    """Gamma(x/2 + 1/2) / Gamma(x/2 + 1) for x >= 0.

    Behaves like sqrt(2/x) for large x.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise DomainError("gamma_ratio requires finite x >= 0")
    out = np.exp(_log_gamma_ratio_half(arr))
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Amplitudes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceAmplitudes:
    """Equator amplitudes of cluster ``ell``.

    ``a[m + ell]`` holds A_{ell,m} (zero for ell - m odd) and ``b[m + ell]``
    holds B_{ell,m} (zero for ell - m even), for m = -ell..ell.
    """

    ell: int
    a: np.ndarray
    b: np.ndarray

    @property
    def m(self) -> np.ndarray:
        return np.arange(-self.ell, self.ell + 1)

    def a_at(self, m: int) -> float:
        return float(self.a[m + self.ell]) if abs(m) <= self.ell else 0.0

    def b_at(self, m: int) -> float:
        return float(self.b[m + self.ell]) if abs(m) <= self.ell else 0.0

    @property
    def neumann_m(self) -> np.ndarray:
        """m = -ell, -ell+2, ..., ell (the Neumann-type indices)."""
        return np.arange(-self.ell, self.ell + 1, 2)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@lru_cache(maxsize=4096)
def trace_amplitudes(ell: int) -> TraceAmplitudes:
    """A_{l,m} and B_{l,m} for m = -l..l.

    A_{l,m}^2 = (2l+1)/pi * gamma(l-m) gamma(l+m) for l - m even, and

        B_{l,m} = -sqrt((2l+1)/(2 pi) (l-m)!/(l+m)!) P'_{l,m}(0),
        P'_{l,m}(0) = 2^{m+1}/sqrt(pi) sin(pi (l+m)/2)
                      Gamma((l+m)/2 + 1) / Gamma((l-m+1)/2),

    for l - m odd; factorials and Gamma values are combined in log space.
    """
    ell = int(ell)
    if ell < 0:
        raise DomainError("ell must be nonnegative")
    m = np.arange(-ell, ell + 1)
    even = (ell - m) % 2 == 0
    a = np.zeros(2 * ell + 1)
    b = np.zeros(2 * ell + 1)

    me = np.abs(m[even])  # |m| keeps A_{l,-m} = A_{l,m} bit-exact
    log_a2 = math.log(2 * ell + 1) - _LOG_PI + _log_gamma_ratio_half(ell - me) + _log_gamma_ratio_half(ell + me)
    a[even] = np.exp(0.5 * log_a2)

    mo = m[~even].astype(float)
    if mo.size:
        # (l-m)!/(l+m)! and the derivative's Gamma ratio, all in log space
        log_fact = log_gamma(ell - mo + 1.0) - log_gamma(ell + mo + 1.0)
        log_norm = 0.5 * (math.log((2 * ell + 1) / (2 * math.pi)) + log_fact)
        log_dp = (
            (mo + 1.0) * math.log(2.0)
            - 0.5 * _LOG_PI
            + log_gamma((ell + mo) / 2 + 1.0)
            - log_gamma((ell - mo + 1.0) / 2)
        )
        # sin(pi (l+m)/2) = (-1)^((l+m-1)/2) for l+m odd
        sign_dp = np.where(((ell + m[~even] - 1) // 2) % 2 == 0, 1.0, -1.0)
        b[~even] = -sign_dp * np.exp(log_norm + log_dp)

    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):  # pragma: no cover
        raise FloatingPointError(f"non-finite trace amplitudes at ell={ell}")
    return TraceAmplitudes(ell=ell, a=_readonly(a), b=_readonly(b))


# ---------------------------------------------------------------------------
# Legendre functions
# ---------------------------------------------------------------------------


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0):
        raise DomainError("Legendre argument must lie in [-1, 1]")
    return x


def normalized_legendre(ell_max: int, m: int, x) -> np.ndarray:
    """pbar_l^m(x) for l = |m|..ell_max, shape (ell_max - |m| + 1, len(x)).

    Upward three-term recurrence on the normalized functions, so no
    factorial ever overflows. Negative m uses Y_l^{-m} = (-1)^m conj(Y_l^m).
    """
    x = np.atleast_1d(_check_x(x))
    mm = abs(int(m))
    if ell_max < mm:
        raise DomainError("ell_max must be at least |m|")
    out = np.empty((ell_max - mm + 1, x.size))
    s2 = np.maximum(1.0 - x * x, 0.0)
    # pbar_m^m = (-1)^m sqrt((2m+1)/(2 pi)) sqrt(prod (2k-1)/(2k)) s^m
    log_start = 0.5 * math.log((2 * mm + 1) / (2 * math.pi))
    log_start += 0.5 * sum(math.log((2 * k - 1) / (2 * k)) for k in range(1, mm + 1))
    with np.errstate(divide="ignore"):
        start = np.exp(log_start + 0.5 * mm * np.log(s2)) if mm else np.full(x.size, math.exp(log_start))
    out[0] = (-1) ** mm * start
    if ell_max > mm:
        out[1] = x * math.sqrt(2 * mm + 3) * out[0]
    for i, ell in enumerate(range(mm + 2, ell_max + 1), start=2):
        a = math.sqrt((4 * ell * ell - 1) / (ell * ell - mm * mm))
        b = math.sqrt(((ell - 1) ** 2 - mm * mm) / (4 * (ell - 1) ** 2 - 1))
        out[i] = a * (x * out[i - 1] - b * out[i - 2])
    if m < 0 and mm % 2:
        out = -out
    return out


def normalized_legendre_derivative(ell_max: int, m: int, x, values: np.ndarray | None = None) -> np.ndarray:
    """d/dx pbar_l^m(x) for l = |m|..ell_max on |x| < 1.

    Uses (1 - x^2) pbar_l' = sqrt((2l+1)/(2l-1) (l^2 - m^2)) pbar_{l-1} - l x pbar_l.
    """
    x = np.atleast_1d(_check_x(x))
    if np.any(np.abs(x) >= 1.0):
        raise DomainError("derivative formula needs |x| < 1")
    mm = abs(int(m))
    p = normalized_legendre(ell_max, m, x) if values is None else values
    ells = np.arange(mm, ell_max + 1)
    d = -ells[:, None] * x[None, :] * p
    if p.shape[0] > 1:
        l1 = ells[1:]
        coef = np.sqrt((2 * l1 + 1) / (2 * l1 - 1) * (l1 * l1 - mm * mm))
        d[1:] += coef[:, None] * p[:-1]
    return d / (1.0 - x * x)[None, :]


def legendre_p_at(ell: int, m: int, x: float) -> float:
    """Associated Legendre function P_l^m(x), Condon-Shortley phase.

    For m < 0 the standard relation
    P_l^{-m} = (-1)^m (l-m)!/(l+m)! P_l^m is used. Values are produced
    from the normalized recurrence and rescaled in log space; very large
    |P| may overflow to inf.
    """
    x = float(_check_x(x))
    if abs(m) > ell or ell < 0:
        raise DomainError("need 0 <= |m| <= ell")
    pbar = float(normalized_legendre(ell, m, [x])[-1, 0])
    if pbar == 0.0:
        return 0.0
    # pbar_l^m = N_{l,m} P_l^m with N_{l,m} = sqrt((2l+1)/(2pi) (l-m)!/(l+m)!)
    log_n = 0.5 * (
        math.log((2 * ell + 1) / (2 * math.pi)) + math.lgamma(ell - m + 1) - math.lgamma(ell + m + 1)
    )
    with np.errstate(over="ignore"):
        mag = float(np.exp(math.log(abs(pbar)) - log_n))
    return math.copysign(mag, pbar)


def legendre_rows(ell: int, x: float) -> tuple[np.ndarray, np.ndarray]:
    """pbar_l^m(x) and pbar_{l-1}^m(x) for m = 0..l at a single point.

    Runs the degree recurrence for every order simultaneously; entry m of
    the second array is zero when m > l - 1.
    """
    x = float(_check_x(x))
    if ell < 0:
        raise DomainError("ell must be nonnegative")
    s2 = max(1.0 - x * x, 0.0)
    m = np.arange(ell + 1)
    # sectoral start values pbar_m^m for every m
    k = np.arange(1, ell + 1)
    log_prod = np.concatenate([[0.0], np.cumsum(np.log((2 * k - 1) / (2 * k)))])
    with np.errstate(divide="ignore"):
        log_s = 0.5 * np.log(s2) if s2 > 0 else -np.inf
        log_start = 0.5 * np.log((2 * m + 1) / (2 * math.pi)) + 0.5 * log_prod + np.where(m > 0, m * log_s, 0.0)
    sect = np.where(m % 2, -1.0, 1.0) * np.exp(log_start)
    cur = np.zeros(ell + 1)  # degree d row
    prev = np.zeros(ell + 1)  # degree d-1 row
    for d in range(0, ell + 1):
        new = np.zeros(ell + 1)
        new[d] = sect[d]
        if d >= 1:
            # first step above the sectoral value, m = d - 1
            new[d - 1] = x * math.sqrt(2 * (d - 1) + 3) * cur[d - 1]
            if d >= 2:
                mm = m[: d - 1]
                a = np.sqrt((4 * d * d - 1) / (d * d - mm * mm))
                b = np.sqrt(((d - 1) ** 2 - mm * mm) / (4 * (d - 1) ** 2 - 1))
                new[: d - 1] = a * (x * cur[: d - 1] - b * prev[: d - 1])
        prev, cur = cur, new
    return cur, prev


def equator_amplitude_by_recurrence(ell: int) -> np.ndarray:
    """sqrt(2 pi) |Y_l^m(pi/2, .)| for m = -l..l from the Legendre recurrence."""
    row, _ = legendre_rows(ell, 0.0)
    half = np.abs(row) * math.sqrt(2 * math.pi)
    return np.concatenate([half[:0:-1], half])


def equator_derivative_by_recurrence(ell: int) -> np.ndarray:
    """-d/dx pbar_l^m(0) for m = -l..l (outward normal derivative on the equator).

    At x = 0 the derivative identity reduces to
    pbar_l' = sqrt((2l+1)/(2l-1) (l^2 - m^2)) pbar_{l-1}.
    """
    if ell == 0:
        return np.zeros(1)
    _, prev = legendre_rows(ell, 0.0)
    m = np.arange(ell + 1)
    pos = -np.sqrt((2 * ell + 1) / (2 * ell - 1) * (ell * ell - m * m)) * prev
    neg = np.where(m % 2, -1.0, 1.0) * pos
    return np.concatenate([neg[:0:-1], pos])


# ---------------------------------------------------------------------------
# Symbol sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymbolSequence:
    """Fourier coefficients ``coeffs[m + ell]`` of x_l, y_l or z_l."""

    ell: int
    coeffs: np.ndarray
    kind: str

    @property
    def m(self) -> np.ndarray:
        return np.arange(-self.ell, self.ell + 1)


def _z_coeffs(ell: int) -> np.ndarray:
    m = np.arange(-ell, ell + 1)
    out = np.zeros(2 * ell + 1)
    mask = (np.abs(m) <= ell - 2) & ((ell - m) % 2 == 0)
    if ell > 0:
        out[mask] = (2 / math.sqrt(math.pi)) * (1 - (m[mask] / ell) ** 2) ** -0.25
    return out


def symbol(ell: int, kind: str) -> SymbolSequence:
    """x_l (coefficients A), y_l (A^2) or the model symbol z_l."""
    amp = trace_amplitudes(ell)
    if kind == "x":
        coeffs = amp.a.copy()
    elif kind == "y":
        coeffs = amp.a**2
    elif kind == "z":
        if ell < 1:
            raise DomainError("z symbol needs ell >= 1")
        coeffs = _z_coeffs(ell)
    else:
        raise ValueError(f"unknown symbol kind {kind!r}")
    return SymbolSequence(ell=ell, coeffs=coeffs, kind=kind)


def lemma_b2_diagnostics(ell: int) -> dict:
    """Sum, sup and l^1 distance to the arcsine profile of A_{l,m}^2.

    ``l1_deviation`` sums |A^2 - (4/pi)(1-(m/l)^2)^{-1/2}| over |m| <= l-1,
    l - m even.
    """
    if ell < 2:
        raise DomainError("lemma_b2_diagnostics needs ell >= 2")
    amp = trace_amplitudes(ell)
    a2 = amp.a**2
    m = amp.m
    mask = (np.abs(m) <= ell - 1) & ((ell - m) % 2 == 0)
    profile = (4 / math.pi) / np.sqrt(1 - (m[mask] / ell) ** 2)
    return {
        "ell": ell,
        "sum_a2": float(math.fsum(a2)),
        "sup_a2": float(a2.max()),
        "l1_deviation": float(np.sum(np.abs(a2[mask] - profile))),
    }


def symbol_hs_deviation(ell: int) -> float:
    """sum_m (A_{l,m} - z-coefficient)^2, the squared HS distance of C[x_l] and C[z_l]."""
    return float(np.sum((trace_amplitudes(ell).a - _z_coeffs(ell)) ** 2))


def resolvent_coefficient_bound(ell: int, lam: float, k_max: int) -> float:
    """sup_m |sum_{k != l, k <= k_max} A_{k,m}^2 / (k(k+1) - lam)|.

    These are the Fourier coefficients of the boundary restriction of the
    reduced Neumann resolvent, truncated at degree ``k_max``; m with
    |m| > k_max carry no amplitude.

    Raises
    ------
    DomainError
        If ``lam`` is outside [l^2, (l+1)^2] or ``k_max < 4 l``.
    ZeroDivisionError
        If ``lam`` coincides with a Neumann eigenvalue k(k+1), k != l.
    """
    if not (ell**2 <= lam <= (ell + 1) ** 2):
        raise DomainError("lambda must lie in [ell^2, (ell+1)^2]")
    if k_max < 4 * ell:
        raise DomainError("k_max must be at least 4*ell")
    # ln gamma_ratio(j) for j = 0..2 k_max, shared by every degree k
    lgr = _log_gamma_ratio_half(np.arange(2 * k_max + 1, dtype=float))
    coeff = np.zeros(2 * k_max + 1)
    for k in range(0, k_max + 1):
        if k == ell:
            continue
        denom = k * (k + 1) - lam
        if abs(denom) <= 1e-12 * max(1.0, lam):  # pragma: no cover - excluded by the lambda window
            raise ZeroDivisionError(f"lambda hits the Neumann eigenvalue {k * (k + 1)}")
        m = np.arange(-k, k + 1, 2)
        a2 = (2 * k + 1) / math.pi * np.exp(lgr[k - m] + lgr[k + m])
        coeff[k_max + m] += a2 / denom
    return float(np.max(np.abs(coeff)))
