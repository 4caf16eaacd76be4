"""Limiting densities of Robin-Neumann gaps.

With s(phi) = 4 sigma_even(phi)/pi the limiting cluster functional is

    (1/4pi) int_{-pi}^{pi} int_{-1}^{1} f(s(phi)/sqrt(1 - xi^2)) dxi dphi,

which the module evaluates (``limit_functional``), rewrites as an integral
against a density rho(sigma; y) (``rho_density``), compares with the ladder
of cluster spectra (``empirical_vs_limit``) and with the formal Weinstein
average of a thin boundary-layer potential (``weinstein_comparison``,
``geodesic_average``).
"""
from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .boundary import BoundarySymbol, even_part, evaluate
from .cluster import bump, gap_spectrum
from .numerics import ConvergenceError, DomainError, gauss_legendre

__all__ = [
    "TestFunction",
    "DensityReport",
    "parse_test_function",
    "trig_roots",
    "limit_functional",
    "rho_density",
    "rho_constant_closed_form",
    "empirical_value",
    "empirical_vs_limit",
    "weinstein_naive",
    "weinstein_comparison",
    "geodesic_average",
]


# ---------------------------------------------------------------------------
# Test functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """f(x) = sum_j coeffs[j-1] x^j, optionally times bump(x/radius).

    ``coeffs`` start at the linear term, so f(0) = 0 by construction.
    ``radius=None`` means a bare polynomial (no compact support).
    """

    coeffs: tuple[float, ...]
    radius: float | None = None

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("test function needs at least one coefficient")
        if self.radius is not None and not self.radius > 0:
            raise ValueError("bump radius must be positive")

    @property
    def kind(self) -> str:
        return "polynomial-with-zero-constant" if self.radius is None else "compact-bump-times-polynomial"

    @property
    def degree(self) -> int:
        nz = [j + 1 for j, c in enumerate(self.coeffs) if c != 0]
        return max(nz) if nz else 0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        poly = np.zeros_like(x)
        for c in reversed(self.coeffs):
            poly = (poly + c) * x
        if self.radius is None:
            return poly
        return poly * bump(x / self.radius)

    def scaled_argument(self, factor: float) -> "TestFunction":
        """x -> f(factor * x), in the same family."""
        coeffs = tuple(c * factor ** (j + 1) for j, c in enumerate(self.coeffs))
        radius = None if self.radius is None else self.radius / factor
        return TestFunction(coeffs, radius)

    def describe(self) -> str:
        terms = " + ".join(f"{c:g}*x^{j + 1}" for j, c in enumerate(self.coeffs) if c)
        return terms if self.radius is None else f"({terms})*bump(x/{self.radius:g})"


_POWER = re.compile(r"^x(?:\^(\d+))?$")


def parse_test_function(spec: str) -> TestFunction:
    """Parse ``x``, ``x^k``, ``poly(c1,c2,...)``, each optionally followed
    by ``*bump(R)``; e.g. ``x^2*bump(6)``."""
    text = spec.replace(" ", "")
    radius = None
    m = re.search(r"\*bump\(([^)]*)\)$", text)
    if m:
        try:
            radius = float(m.group(1))
        except ValueError as exc:
            raise ValueError(f"f: bad bump radius {m.group(1)!r}") from exc
        text = text[: m.start()]
    pm = _POWER.match(text)
    if pm:
        k = int(pm.group(1) or 1)
        if k < 1:
            raise ValueError("f: power must be >= 1 so that f(0) = 0")
        coeffs = tuple([0.0] * (k - 1) + [1.0])
    else:
        cm = re.match(r"^poly\(([^)]*)\)$", text)
        if not cm:
            raise ValueError(f"f: cannot parse {spec!r}")
        try:
            coeffs = tuple(float(v) for v in cm.group(1).split(","))
        except ValueError as exc:
            raise ValueError(f"f: bad coefficient list in {spec!r}") from exc
    return TestFunction(coeffs, radius)


# ---------------------------------------------------------------------------
# Roots of trigonometric polynomials
# ---------------------------------------------------------------------------


def trig_roots(sigma: BoundarySymbol, level: float = 0.0) -> np.ndarray:
    """Sorted phi in [-pi, pi) with sigma(phi) = level.

    Roots of z^D (sigma(z) - level) on the unit circle via the companion
    matrix, polished by Newton steps where they converge. Tangential roots
    are returned once, accurate to about sqrt(machine epsilon).
    """
    d = sigma.effective_degree
    mags = np.array([abs(sigma.coeff(k)) for k in range(d + 1)])
    big = max(float(np.max(mags)), abs(level))
    # trim leading coefficients that would overflow the companion matrix
    while d > 0 and mags[d] <= 1e-14 * big:
        d -= 1
    if d == 0:
        return np.zeros(0)
    c = np.array([sigma.coeff(k) for k in range(-d, d + 1)], dtype=complex)
    c[d] -= level
    # exact power-of-two rescale; plain complex division overflows for subnormal input
    e = np.frexp(np.max(np.abs(c)))[1]
    c = np.ldexp(c.real, -e) + 1j * np.ldexp(c.imag, -e)
    z = np.roots(c[::-1])
    scale = max(1.0, float(np.sum(np.abs(c))))
    on_circle = z[np.abs(np.abs(z) - 1.0) < 1e-5]
    phi = np.angle(on_circle)
    k = np.arange(-d, d + 1)
    out = []
    for p in phi:
        q = p
        for _ in range(8):
            e = np.exp(1j * k * q)
            g = float((e @ c).real)
            dg = float((1j * k * e @ c).real)
            if dg == 0.0:
                break
            step = g / dg
            if abs(step) > 1e-3:
                break
            q -= step
            if abs(step) < 1e-15:
                break
        gq = abs(float((np.exp(1j * k * q) @ c).real))
        gp = abs(float((np.exp(1j * k * p) @ c).real))
        out.append(q if gq <= gp else p)
        if gp > 1e-6 * scale and gq > 1e-6 * scale:  # pragma: no cover - companion roots are reliable here
            raise RuntimeError("root polishing failed")
    if not out:
        return np.zeros(0)
    out = np.sort(np.mod(np.asarray(out) + np.pi, 2 * np.pi) - np.pi)
    keep = [out[0]]
    for v in out[1:]:
        if v - keep[-1] > 1e-6:
            keep.append(v)
    if len(keep) > 1 and keep[0] + 2 * np.pi - keep[-1] <= 1e-6:
        keep.pop()
    return np.asarray(keep)


def _breakpoints(sigma_even: BoundarySymbol, levels: Sequence[float]) -> np.ndarray:
    pts = [-np.pi, np.pi]
    for lv in levels:
        pts.extend(trig_roots(sigma_even, lv).tolist())
    pts = np.unique(np.asarray(pts))
    return pts[np.concatenate([[True], np.diff(pts) > 1e-9])]


def _cell_rule(breaks: np.ndarray, n: int):
    gl = gauss_legendre(n)
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        h = 0.5 * (b - a)
        nodes.append(0.5 * (a + b) + h * gl.nodes)
        weights.append(h * gl.weights)
    return np.concatenate(nodes), np.concatenate(weights)


def _tanh_sinh(levels_per_unit: int, t_max: float = 3.5):
    """Half of a tanh-sinh rule on [0, 1]: offsets x from the left end and
    weights w, for t in (-t_max, 0] with step 1/levels_per_unit.

    The mirrored half (offsets from the right end) reuses x and w; the
    midpoint t = 0 is weighted by one half in each copy.
    """
    h = 1.0 / levels_per_unit
    t = -h * np.arange(int(t_max * levels_per_unit) + 1)
    u = 0.5 * np.pi * np.sinh(t)
    x = 1.0 / (1.0 + np.exp(-2 * u))  # distance from the left end, in (0, 1/2]
    w = h * 0.5 * np.pi * np.cosh(t) / (2 * np.cosh(u) ** 2)
    w[0] *= 0.5
    return x, w


def _refine(compute, rtol: float, start: int, max_nodes: int):
    """Double the node count until successive values agree.

    ``compute(n)`` returns either a value or ``(value, magnitude)``, where
    magnitude is the integral of the absolute integrand. Round-off is then
    judged against the magnitude, so a value that cancels to nearly zero
    still counts as converged.
    """

    def call(n):
        out = compute(n)
        return out if isinstance(out, tuple) else (out, abs(out))

    n = start
    prev, _ = call(n)
    while True:
        n *= 2
        cur, mag = call(n)
        err = abs(cur - prev)
        if err <= rtol * max(abs(cur), 1e-300) or err <= max(1e-15, 1e-13 * mag):
            return cur, err
        if n >= max_nodes:
            raise ConvergenceError(f"quadrature did not reach rtol={rtol:g} (last change {err:.2e})")
        prev = cur


# ---------------------------------------------------------------------------
# Limit functional
# ---------------------------------------------------------------------------


def _check_family(f: TestFunction, sigma_even: BoundarySymbol):
    if f.radius is None and f.degree >= 2 and np.any(sigma_even.coeffs):
        raise DomainError(
            "polynomial f of degree >= 2 without compact support makes the limit integral diverge"
        )


def _xi_integral(f: TestFunction, s: np.ndarray, n: int) -> np.ndarray:
    """int_{-1}^{1} f(s/sqrt(1-xi^2)) dxi for every s, via xi = sin t."""
    gl = gauss_legendre(n)
    out = np.zeros_like(s)
    if f.radius is None:
        # f(s/cos t) cos t is a polynomial in s/cos t times cos t; only the
        # linear term survives (degree >= 2 is refused upstream)
        return f.coeffs[0] * s * np.pi
    idx = np.flatnonzero(np.abs(s) < f.radius)
    # chunk over s so the (len(s), n) work arrays stay near 2**20 entries
    step = max(1, (1 << 20) // n)
    for lo in range(0, idx.size, step):
        part = idx[lo : lo + step]
        sa = s[part]
        tmax = np.arccos(np.minimum(1.0, np.abs(sa) / f.radius))
        ct = np.cos(tmax[:, None] * gl.nodes[None, :])
        vals = f(sa[:, None] / ct) * ct
        out[part] = tmax * (vals @ gl.weights)
    return out


def limit_functional(sigma: BoundarySymbol, f: TestFunction, rtol: float = 1e-10, return_error: bool = False):
    """(1/4pi) int int f(4 sigma_even(phi) / (pi sqrt(1 - xi^2))) dxi dphi.

    The xi integral uses xi = sin t, cut to the support of f; the phi
    integral uses Gauss-Legendre cells split at the zeros of sigma_even
    (where the inner integral has an s|s| kink) and at s = +-R. Nodes are
    doubled until the relative change is below ``rtol``.

    Raises
    ------
    DomainError
        For a bare polynomial of degree >= 2 with sigma_even != 0.
    """
    se = even_part(sigma)
    _check_family(f, se)
    if not np.any(se.coeffs):
        return (0.0, 0.0) if return_error else 0.0
    levels = [0.0]
    if f.radius is not None:
        levels += [np.pi * f.radius / 4, -np.pi * f.radius / 4]
    breaks = _breakpoints(se, levels)

    def compute(n):
        phi, w = _cell_rule(breaks, n)
        s = 4 * evaluate(se, phi) / np.pi
        inner = _xi_integral(f, s, 2 * n)
        return float(w @ inner) / (4 * np.pi), float(w @ np.abs(inner)) / (4 * np.pi)

    val, err = _refine(compute, rtol, 16, 1 << 12)
    return (val, err) if return_error else val


# ---------------------------------------------------------------------------
# Density rho(sigma; y)
# ---------------------------------------------------------------------------


def rho_constant_closed_form(c: float, y: float) -> float:
    """rho for sigma = c > 0: 16c^2/(pi^2 y^3) (1 - (4c/(pi y))^2)^{-1/2} for
    y > 4c/pi, zero otherwise."""
    if c <= 0:
        raise DomainError("closed form is for positive constants")
    r = 4 * c / (np.pi * y)
    if y <= 0 or r >= 1:
        return 0.0
    return 16 * c * c / (np.pi**2 * y**3) / math.sqrt(1 - r * r)


def rho_density(sigma: BoundarySymbol, y: float, rtol: float = 1e-10) -> float:
    """Density of the limiting gap distribution at y != 0.

    rho(y) = 1/(2 pi |y|^3) int s_pm(phi)^2 (1 - (s_pm/y)^2)_+^{-1/2} dphi with
    s_pm = 4 (sigma_even)_pm / pi, the positive part for y > 0 and the
    negative part for y < 0. Cells are split where sigma_even = 0 and where
    s = |y| and at the extrema of sigma_even. Each cell uses a tanh-sinh
    rule, which absorbs the inverse square-root endpoint singularities and
    the near-singular behaviour when |y| is close to an extremum of s.
    """
    if y == 0 or not math.isfinite(y):
        raise DomainError("rho_density needs finite y != 0")
    se = even_part(sigma)
    sign = 1.0 if y > 0 else -1.0
    ay = abs(y)
    breaks = _breakpoints(se, [0.0, sign * np.pi * ay / 4])
    # extrema of sigma_even: for |y| near max s the kernel peaks there
    d = se.degree
    slope = BoundarySymbol(se.coeffs * (1j * np.arange(-d, d + 1)), d)
    breaks = np.unique(np.concatenate([breaks, trig_roots(slope)]))

    # keep only cells where 0 < s_pm < |y| (test at the midpoint)
    mids = 0.5 * (breaks[:-1] + breaks[1:])
    s_mid = sign * 4 * evaluate(se, mids) / np.pi
    cells = [(a, b) for a, b, sm in zip(breaks[:-1], breaks[1:], s_mid) if 0 < sm < ay]
    if not cells:
        return 0.0

    k = np.arange(-d, d + 1)

    round_off = 1e-12 * 4 * float(np.sum(np.abs(se.coeffs))) / np.pi

    def end_gap(p):
        # |y| - s at a cell end; a computed root is an exact crossing, and
        # what is left there is evaluation rounding (absolute, set by the
        # coefficient scale rather than by |y|)
        g = ay - sign * 4 * float(evaluate(se, p)) / np.pi
        return 0.0 if abs(g) <= round_off else g

    def drop(base, off):
        # s(base) - s(base + off) without cancellation:
        # e^{ikb} - e^{ik(b+o)} = -2i e^{ik(b+o/2)} sin(ko/2)
        ph = np.exp(1j * k[None, :] * (base + 0.5 * off[:, None]))
        terms = -2j * ph * np.sin(0.5 * k[None, :] * off[:, None])
        return sign * 4 * (terms @ se.coeffs).real / np.pi

    def compute(n):
        x, w = _tanh_sinh(n)
        total = 0.0
        for a, b in cells:
            # offsets from both ends are formed directly and |y| - s is built
            # from the end value plus an exact drop, so nodes next to a
            # crossing or an extremum keep their relative accuracy
            length = b - a
            for end, direction in ((a, 1.0), (b, -1.0)):
                off = direction * length * x
                phi = end + off
                s = np.maximum(sign * 4 * evaluate(se, phi) / np.pi, 0.0)
                gap = end_gap(end) + drop(end, off)
                gap = np.maximum(gap, 0.0)
                with np.errstate(divide="ignore", invalid="ignore"):
                    kern = np.where(gap > 0, s * s * ay / np.sqrt(gap * (ay + s)), 0.0)
                total += float((w * length) @ kern)
        return total / (2 * np.pi * ay**3)

    val, _ = _refine(compute, rtol, 4, 1 << 8)
    return val


# ---------------------------------------------------------------------------
# Empirical cluster functionals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityReport:
    ells: tuple[int, ...]
    empirical: tuple[float, ...]
    limit: float
    deviations: tuple[float, ...] = field(default=())

    def rows(self):
        for ell, e, d in zip(self.ells, self.empirical, self.deviations):
            yield ell, e, self.limit, d


def empirical_value(sigma: BoundarySymbol, f: TestFunction, ell: int) -> float:
    """(1/(l+1)) sum_k f(gap_k) over the spectrum of the cluster operator."""
    gaps = gap_spectrum(sigma, ell).gaps
    return float(np.sum(f(gaps))) / (ell + 1)


def empirical_vs_limit(sigma: BoundarySymbol, f: TestFunction, ell_ladder: Sequence[int], executor=None) -> DensityReport:
    """Empirical cluster functionals along a strictly increasing ladder,
    compared with the limit. ``executor`` (optional) maps the per-l jobs."""
    ells = tuple(int(l) for l in ell_ladder)
    if any(b <= a for a, b in zip(ells[:-1], ells[1:])):
        raise ValueError("ell ladder must be strictly increasing")
    limit = limit_functional(sigma, f)
    mapper = map if executor is None else executor.map
    # a partial, not a lambda, so process pools can pickle the job
    emp = tuple(mapper(functools.partial(empirical_value, sigma, f), ells))
    return DensityReport(ells=ells, empirical=emp, limit=limit, deviations=tuple(abs(e - limit) for e in emp))


# ---------------------------------------------------------------------------
# Weinstein comparison
# ---------------------------------------------------------------------------


def weinstein_naive(sigma: BoundarySymbol, f: TestFunction, rtol: float = 1e-12) -> float:
    """(1/pi) int_0^pi int_0^{pi/2} f(2 sigma_even(phi + pi/2)/(pi sin theta)) sin theta dtheta dphi.

    Evaluated in the geodesic variables (theta, phi) directly, independent
    of :func:`limit_functional`.
    """
    se = even_part(sigma)
    _check_family(f, se)
    if not np.any(se.coeffs):
        return 0.0
    shifted = se.shifted(-np.pi / 2)  # phi -> sigma_even(phi + pi/2)
    levels = [0.0]
    if f.radius is not None:
        levels += [np.pi * f.radius / 2, -np.pi * f.radius / 2]
    breaks = _breakpoints(shifted, levels)
    breaks = np.unique(np.clip(np.concatenate([breaks, [0.0]]), 0.0, np.pi))

    def inner(q, n):
        gl = gauss_legendre(n)
        out = np.zeros_like(q)
        if f.radius is None:
            return f.coeffs[0] * q * (np.pi / 2)
        active = np.abs(q) < f.radius
        qa = q[active]
        th0 = np.arcsin(np.minimum(1.0, np.abs(qa) / f.radius))
        half = 0.5 * (np.pi / 2 - th0)
        th = (th0 + half)[:, None] + half[:, None] * gl.nodes[None, :]
        st = np.sin(th)
        out[active] = half * ((f(qa[:, None] / st) * st) @ gl.weights)
        return out

    def compute(n):
        phi, w = _cell_rule(breaks, n)
        q = 2 * evaluate(shifted, phi) / np.pi
        return float(w @ inner(q, 2 * n)) / np.pi

    val, _ = _refine(compute, rtol, 16, 1 << 12)
    return val


def weinstein_comparison(sigma: BoundarySymbol, f: TestFunction) -> dict:
    """naive Weinstein value, the correct limit, and |naive(sigma) - correct(sigma/2)|."""
    naive = weinstein_naive(sigma, f)
    correct = limit_functional(sigma, f, rtol=1e-12)
    halved = limit_functional(sigma.scaled(0.5), f, rtol=1e-12)
    return {"naive": naive, "correct": correct, "substitution_check": abs(naive - halved)}


def geodesic_average(theta: float, phi: float, sigma: BoundarySymbol, epsilon: float, n: int = 64) -> float:
    """Average of V_eps = sigma/eps on the layer theta > pi/2 - eps over the
    reflected geodesic Gamma(theta, phi).

    The geodesic is the union of the upper halves of the great circles with
    poles (theta, phi) and (theta, phi + pi); both meet the equator at
    azimuths phi +- pi/2. On each half, parametrized by arclength s in
    (0, pi), the height is sin(s) sin(theta), so the layer is crossed for
    sin(s) < sin(eps)/sin(theta).
    """
    if not (0 < theta <= np.pi / 2):
        raise DomainError("theta must lie in (0, pi/2]")
    if not (0 < epsilon < theta / 2):
        raise DomainError("epsilon must lie in (0, theta/2) for the layer geometry")
    s_eps = math.asin(math.sin(epsilon) / math.sin(theta))
    gl = gauss_legendre(n, 0.0, s_eps)
    total = 0.0
    for pole_phi in (phi, phi + np.pi):
        u = np.array([-math.sin(pole_phi), math.cos(pole_phi), 0.0])
        v = np.array(
            [-math.cos(theta) * math.cos(pole_phi), -math.cos(theta) * math.sin(pole_phi), math.sin(theta)]
        )
        for s in (gl.nodes, np.pi - gl.nodes):
            p = np.cos(s)[:, None] * u[None, :] + np.sin(s)[:, None] * v[None, :]
            az = np.arctan2(p[:, 1], p[:, 0])
            total += float(gl.weights @ evaluate(sigma, az)) / epsilon
    return total / (2 * np.pi)
