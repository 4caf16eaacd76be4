"""The Robin coefficient as a real trigonometric polynomial on the equator.

Fourier convention: sigma(phi) = sum_k c_k e^{i k phi},
c_k = (1/2pi) int sigma(phi) e^{-i k phi} dphi, with c_{-k} = conj(c_k).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .numerics import DomainError

__all__ = [
    "SymmetryError",
    "BoundarySymbol",
    "from_samples",
    "from_terms",
    "constant",
    "even_part",
    "odd_part",
    "split_even_odd",
    "evaluate",
    "multiplication_matrix",
    "convolution_matrix",
    "symbol_from_json",
    "symbol_to_json",
    "MAX_DEGREE",
]

MAX_DEGREE = 512
_SYM_TOL = 1e-12


class SymmetryError(ValueError):
    """Coefficients do not describe a real-valued function."""


@dataclass(frozen=True)
class BoundarySymbol:
    """Fourier coefficients ``coeffs[k + degree]`` for k = -degree..degree."""

    coeffs: np.ndarray
    degree: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size != 2 * self.degree + 1:
            raise ValueError("coeffs must have length 2*degree+1")
        if not np.all(np.isfinite(c)):
            raise ValueError("coeffs must be finite")
        dev = np.max(np.abs(c - np.conj(c[::-1])))
        if dev > _SYM_TOL * max(1.0, float(np.max(np.abs(c)))):
            raise SymmetryError(f"coefficients violate c_-k = conj(c_k) (deviation {dev:.3e})")
        c = 0.5 * (c + np.conj(c[::-1]))
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def coeff(self, k: int) -> complex:
        return complex(self.coeffs[k + self.degree]) if abs(k) <= self.degree else 0.0j

    def coeff_array(self, ks) -> np.ndarray:
        """c_k for an integer array ``ks`` (zero outside [-degree, degree])."""
        ks = np.asarray(ks)
        out = np.zeros(ks.shape, dtype=complex)
        inside = np.abs(ks) <= self.degree
        out[inside] = self.coeffs[ks[inside] + self.degree]
        return out

    @property
    def mean(self) -> float:
        return float(self.coeffs[self.degree].real)

    @property
    def effective_degree(self) -> int:
        """Largest k with c_k != 0 (0 for constants and for sigma = 0)."""
        nz = np.nonzero(self.coeffs)[0]
        return int(np.max(np.abs(nz - self.degree))) if nz.size else 0

    def is_odd(self) -> bool:
        return not np.any(self.coeffs[(np.arange(-self.degree, self.degree + 1) % 2) == 0])

    def __call__(self, phi):
        return evaluate(self, phi)

    def scaled(self, factor: float) -> "BoundarySymbol":
        return BoundarySymbol(np.asarray(self.coeffs) * float(factor), self.degree)

    def shifted(self, phi0: float) -> "BoundarySymbol":
        """sigma(phi - phi0)."""
        k = np.arange(-self.degree, self.degree + 1)
        return BoundarySymbol(self.coeffs * np.exp(-1j * k * phi0), self.degree)

    def padded(self, degree: int) -> "BoundarySymbol":
        if degree < self.degree:
            raise ValueError("cannot pad to a smaller degree")
        c = np.zeros(2 * degree + 1, dtype=complex)
        c[degree - self.degree : degree + self.degree + 1] = self.coeffs
        return BoundarySymbol(c, degree)

    def __add__(self, other: "BoundarySymbol") -> "BoundarySymbol":
        d = max(self.degree, other.degree)
        return BoundarySymbol(self.padded(d).coeffs + other.padded(d).coeffs, d)

    def sup_norm(self, n_grid: int = 4096) -> float:
        """max |sigma| on a dense uniform grid (at least 16 points per mode)."""
        n = max(n_grid, 16 * (2 * self.degree + 1))
        return float(np.max(np.abs(evaluate(self, -np.pi + 2 * np.pi * np.arange(n) / n))))


def constant(c: float) -> BoundarySymbol:
    return BoundarySymbol(np.array([complex(c)]), 0)


def from_terms(terms: Mapping[int, complex]) -> BoundarySymbol:
    """Symbol from a mapping k -> c_k; negative k are filled by symmetry
    when absent and checked when present."""
    degree = max([abs(int(k)) for k in terms] + [0])
    c = np.zeros(2 * degree + 1, dtype=complex)
    for k, v in terms.items():
        c[int(k) + degree] = complex(v)
    for k, v in terms.items():
        k = int(k)
        if -k not in terms and k != 0:
            c[-k + degree] = np.conj(complex(v))
    return BoundarySymbol(c, degree)


def from_samples(values: Sequence[float], degree: int) -> BoundarySymbol:
    """Fourier coefficients of degree <= ``degree`` from samples on
    phi_j = -pi + 2 pi j / N by the trapezoid (DFT) rule.

    Raises
    ------
    DomainError
        If N < 4 degree + 4 (the aliasing guard) or degree > MAX_DEGREE.
    """
    v = np.asarray(values, dtype=float)
    n = v.size
    if degree < 0 or degree > MAX_DEGREE:
        raise DomainError(f"degree must lie in [0, {MAX_DEGREE}]")
    if n < 4 * degree + 4:
        raise DomainError(f"{n} samples are too few for degree {degree}: need at least {4 * degree + 4}")
    if not np.all(np.isfinite(v)):
        raise ValueError("samples must be finite")
    # phi_j = -pi + 2 pi j/N, so e^{-ik phi_j} = (-1)^k e^{-2 pi i k j/N}
    fft = np.fft.fft(v) / n
    k = np.arange(-degree, degree + 1)
    c = fft[k % n] * np.where(k % 2, -1.0, 1.0)
    c = 0.5 * (c + np.conj(c[::-1]))
    return BoundarySymbol(c, degree)


def even_part(s: BoundarySymbol) -> BoundarySymbol:
    """(sigma(phi) + sigma(phi + pi))/2: keeps the even-index coefficients."""
    k = np.arange(-s.degree, s.degree + 1)
    return BoundarySymbol(np.where(k % 2 == 0, s.coeffs, 0), s.degree)


def odd_part(s: BoundarySymbol) -> BoundarySymbol:
    k = np.arange(-s.degree, s.degree + 1)
    return BoundarySymbol(np.where(k % 2 == 1, s.coeffs, 0), s.degree)


def split_even_odd(s: BoundarySymbol) -> tuple[BoundarySymbol, BoundarySymbol]:
    return even_part(s), odd_part(s)


def evaluate(s: BoundarySymbol, phi):
    """Real values of sigma at ``phi`` (scalar or array).

    Raises
    ------
    SymmetryError
        If the imaginary residue exceeds 1e-12 (relative to the coefficient
        l^1 norm).
    """
    phi_arr = np.asarray(phi, dtype=float)
    k = np.arange(-s.degree, s.degree + 1)
    vals = np.exp(1j * np.multiply.outer(phi_arr, k)) @ s.coeffs
    scale = max(1.0, float(np.sum(np.abs(s.coeffs))))
    if np.any(np.abs(vals.imag) > _SYM_TOL * scale):
        raise SymmetryError("symbol evaluates to non-real values")
    out = vals.real
    return float(out) if out.ndim == 0 else out


def multiplication_matrix(s: BoundarySymbol, basis_indices: Sequence[int]) -> np.ndarray:
    """Compression of multiplication by sigma to span{e^{i m phi}}.

    Row for m', column for m holds c_{m' - m}. The result is Hermitian and
    real whenever all coefficients are real (sigma even in phi).
    """
    idx = np.asarray(basis_indices, dtype=int)
    mat = s.coeff_array(idx[:, None] - idx[None, :])
    if not np.any(mat.imag):
        return mat.real.copy()
    return mat


def convolution_matrix(coeffs_by_m, basis_indices: Sequence[int], ell: int | None = None) -> np.ndarray:
    """Diagonal matrix of a convolution operator in the Fourier basis.

    ``coeffs_by_m`` is either a :class:`~hemirobin.harmonics.SymbolSequence`
    or an array indexed by ``m + ell``.
    """
    if hasattr(coeffs_by_m, "coeffs"):
        ell = coeffs_by_m.ell
        coeffs = np.asarray(coeffs_by_m.coeffs)
    else:
        coeffs = np.asarray(coeffs_by_m)
        if ell is None:
            ell = (coeffs.size - 1) // 2
    idx = np.asarray(basis_indices, dtype=int)
    diag = np.zeros(idx.size)
    inside = np.abs(idx) <= ell
    diag[inside] = coeffs[idx[inside] + ell]
    return np.diag(diag)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def symbol_from_json(spec) -> BoundarySymbol:
    """Parse the JSON form of a symbol (a dict or a JSON string).

    Two layouts are accepted::

        {"type": "coeffs", "coeffs": [[k, re, im], ...]}
        {"type": "samples", "values": [...], "degree": D}

    Every k listed must have its partner -k listed with the conjugate value
    (k = 0 must be real); missing partners are an error. Errors name the
    offending field.
    """
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise ValueError(f"sigma: invalid JSON ({exc.msg})") from exc
    if not isinstance(spec, dict):
        raise ValueError("sigma: expected a JSON object")
    kind = spec.get("type")
    if kind == "coeffs":
        rows = spec.get("coeffs")
        if not isinstance(rows, list) or not rows:
            raise ValueError("sigma.coeffs: expected a non-empty list of [k, re, im]")
        terms: dict[int, complex] = {}
        for i, row in enumerate(rows):
            if not (isinstance(row, (list, tuple)) and len(row) == 3):
                raise ValueError(f"sigma.coeffs[{i}]: expected [k, re, im]")
            k, re, im = row
            if not (isinstance(k, int) and not isinstance(k, bool)):
                raise ValueError(f"sigma.coeffs[{i}][0]: k must be an integer")
            if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (re, im)):
                raise ValueError(f"sigma.coeffs[{i}]: re and im must be numbers")
            if not (math.isfinite(re) and math.isfinite(im)):
                raise ValueError(f"sigma.coeffs[{i}]: re and im must be finite")
            if k in terms:
                raise ValueError(f"sigma.coeffs[{i}]: duplicate k={k}")
            if abs(k) > MAX_DEGREE:
                raise ValueError(f"sigma.coeffs[{i}]: |k| exceeds {MAX_DEGREE}")
            terms[k] = complex(re, im)
        for k, v in terms.items():
            partner = terms.get(-k)
            if partner is None:
                raise ValueError(f"sigma.coeffs: k={k} has no partner k={-k} (sigma must be real)")
            if abs(partner - np.conj(v)) > _SYM_TOL * max(1.0, abs(v)):
                raise ValueError(f"sigma.coeffs: c_{-k} is not the conjugate of c_{k}")
        degree = max(abs(k) for k in terms)
        c = np.zeros(2 * degree + 1, dtype=complex)
        for k, v in terms.items():
            c[k + degree] = v
        return BoundarySymbol(c, degree)
    if kind == "samples":
        values = spec.get("values")
        degree = spec.get("degree")
        if not isinstance(values, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
        ):
            raise ValueError("sigma.values: expected a list of real numbers")
        if not (isinstance(degree, int) and not isinstance(degree, bool)) or degree < 0:
            raise ValueError("sigma.degree: expected a nonnegative integer")
        try:
            return from_samples(values, degree)
        except DomainError as exc:
            raise ValueError(f"sigma.values: {exc}") from exc
    raise ValueError("sigma.type: expected 'coeffs' or 'samples'")


def symbol_to_json(s: BoundarySymbol) -> dict:
    """Inverse of :func:`symbol_from_json` (coefficient layout, zeros dropped
    except c_0)."""
    rows = []
    for k in range(-s.degree, s.degree + 1):
        c = s.coeff(k)
        if c != 0 or k == 0:
            rows.append([k, float(c.real), float(c.imag)])
    return {"type": "coeffs", "coeffs": rows}
