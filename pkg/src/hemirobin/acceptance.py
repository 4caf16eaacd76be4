"""Acceptance suite: one function per criterion, each returning a verdict.

A verdict records the measured quantity, the bound it is held to, the wall
time and whether both the numerical check and the runtime budget passed.
``run_acceptance`` runs any subset; ``cmd_verify`` in the CLI wraps it.
"""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import Executor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .boundary import constant, from_terms
from .cluster import (
    bump,
    cluster_trace,
    commutator_hs_norm,
    gap_spectrum,
    build_cluster_matrix,
    model_operator_trace,
    sandwich_spectra,
)
from .density import (
    TestFunction,
    empirical_value,
    empirical_vs_limit,
    rho_constant_closed_form,
    rho_density,
    weinstein_comparison,
)
from .galerkin import (
    cluster_window_counts,
    constant_sigma_spectrum,
    odd_eigenspace_construction,
    orthonormal_system,
    robin_spectrum,
)
from .harmonics import equator_amplitude_by_recurrence, trace_amplitudes
from .numerics import hermitian_eigen, trace_difference_bound_check
from .sl1d import finite_difference_eigenvalues, mode_index, robin_eigenvalue, step_eigenvalue

__all__ = ["Verdict", "CRITERIA", "run_acceptance", "verdicts_to_json", "load_verdicts"]

ONE_PLUS_COS2 = from_terms({0: 1.0, 2: 0.5})
BUMP_RADIUS = 6.0  # see the decisions ledger for the scan behind this choice


@dataclass(frozen=True)
class Verdict:
    criterion: int
    name: str
    measured: float
    bound: str
    passed: bool
    runtime_s: float = 0.0
    runtime_limit_s: float = math.inf
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["pass"] = out.pop("passed")
        return out

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.criterion:2d} {self.name}: measured={self.measured:.6g} bound={self.bound} ({self.runtime_s:.2f}s)"


def _amplitudes(ell: int, scale: float) -> np.ndarray:
    return trace_amplitudes(ell).a * scale


# ---------------------------------------------------------------------------
# Criteria. Each returns (measured, bound, ok, detail).
# ---------------------------------------------------------------------------


def _c1(amplitude_scale: float = 1.0):
    worst = 0.0
    for ell in range(0, 201):
        a = _amplitudes(ell, amplitude_scale)
        even = (ell - np.arange(-ell, ell + 1)) % 2 == 0
        rec = equator_amplitude_by_recurrence(ell)
        worst = max(worst, float(np.max(np.abs(a[even] - rec[even]) / rec[even])))
    return worst, "<= 1e-9 relative", worst <= 1e-9, {}


def _c2(amplitude_scale: float = 1.0):
    ladder = [100, 200, 400, 800]
    sup, l1, total = [], [], []
    for ell in ladder:
        a2 = _amplitudes(ell, amplitude_scale) ** 2
        m = np.arange(-ell, ell + 1)
        mask = (np.abs(m) <= ell - 1) & ((ell - m) % 2 == 0)
        profile = (4 / math.pi) / np.sqrt(1 - (m[mask] / ell) ** 2)
        sup.append(float(a2.max()) / math.sqrt(ell))
        l1.append(float(np.sum(np.abs(a2[mask] - profile))) / ell ** (2 / 3))
        total.append(float(math.fsum(a2)) / (2 * ell))
    band_ok = all(1.0 <= s <= 1.25 for s in sup) and not np.all(np.diff(sup) > 0)
    l1_ok = max(l1) <= 1.0
    sum_ok = 0.97 <= total[-1] <= 1.03
    detail = {"sup_over_sqrt_l": sup, "l1_over_l23": l1, "sum_over_2l": total}
    return total[-1], "sum A^2/(2l) in [0.97, 1.03] at l=800; sup A^2/sqrt(l) in [1, 1.25] without monotone growth; l1/l^(2/3) <= 1", band_ok and l1_ok and sum_ok, detail


def _c3():
    value = empirical_value(constant(1.0), TestFunction((1.0,)), 400)
    samples = [
        constant(0.7),
        from_terms({0: 1.0, 2: 0.5}),
        from_terms({0: -0.3, 1: 0.2 + 0.1j, 3: 0.4}),
        from_terms({0: 2.0, 5: -0.6j}),
        from_terms({1: 1.0}),
    ]
    worst = 0.0
    for s in samples:
        for ell in [20, 101]:
            direct = float(np.trace(build_cluster_matrix(s, ell).matrix).real)
            eig = float(np.sum(gap_spectrum(s, ell).gaps))
            formula = cluster_trace(s, ell)
            scale = max(abs(formula), float(np.sum(trace_amplitudes(ell).a ** 2)) * 1e-3)
            worst = max(worst, abs(eig - formula) / scale, abs(direct - formula) / scale)
    ok = 1.93 <= value <= 2.02 and worst <= 1e-9
    return value, "Tr/(l+1) in [1.93, 2.02] at l=400; trace identity <= 1e-9 relative", ok, {"trace_identity_worst": worst}


def _c4(executor: Executor | None = None):
    ladder = [50, 100, 200, 400]
    worst, monotone, detail = 0.0, True, {}
    for coeffs in [(1.0,), (0.0, 1.0)]:
        f = TestFunction(coeffs, BUMP_RADIUS)
        rep = empirical_vs_limit(ONE_PLUS_COS2, f, ladder, executor=executor)
        rel = rep.deviations[-1] / abs(rep.limit)
        worst = max(worst, rel)
        monotone &= all(b < a for a, b in zip(rep.deviations[:-1], rep.deviations[1:]))
        detail[f.describe()] = {"limit": rep.limit, "deviations": list(rep.deviations)}
    return worst, "monotone along {50,100,200,400}; <= 0.05 relative at l=400", monotone and worst <= 0.05, detail


def _c5():
    worst, zero_ok = 0.0, True
    for c in [0.5, 1.0, 2.0]:
        for y in np.linspace(4 * c / math.pi + 0.01, 10.0, 60):
            exact = rho_constant_closed_form(c, y)
            worst = max(worst, abs(rho_density(constant(c), y) - exact) / exact)
        zero_ok &= all(rho_density(constant(c), -y) == 0.0 for y in [0.1, 1.0, 5.0])
    return worst, "<= 1e-10 relative; rho = 0 for y < 0", worst <= 1e-10 and zero_ok, {}


def _c6():
    pairs = [
        (ONE_PLUS_COS2, TestFunction((1.0,), 6.0)),
        (from_terms({0: 0.2, 1: 0.4, 2: 0.5}), TestFunction((0.0, 1.0), 3.0)),
        (from_terms({0: -0.5, 2: 0.3j, 4: 0.2}), TestFunction((1.0, -0.3), 2.0)),
        (constant(0.7), TestFunction((0.0, 1.0), 5.0)),
        (from_terms({1: 1.0}), TestFunction((1.0,), 2.0)),
    ]
    sub = max(weinstein_comparison(s, f)["substitution_check"] for s, f in pairs)
    half = 0.0
    for s in [constant(1.0), from_terms({0: 0.2, 1: 0.4, 2: 0.5}), from_terms({0: 0.5, 2: -0.3})]:
        w = weinstein_comparison(s, TestFunction((1.0,)))
        half = max(half, abs(w["naive"] - w["correct"] / 2))
    measured = max(sub, half)
    return measured, "<= 1e-10", measured <= 1e-10, {"substitution": sub, "naive_vs_half": half}


def _c7():
    worst_res, ok, detail = 0.0, True, {}
    for name, sigma in [("2cos", from_terms({1: 1.0})), ("cos+cos3", from_terms({1: 0.5, 3: 0.5}))]:
        for ell in [6, 10, 20]:
            oc = odd_eigenspace_construction(sigma, ell)
            ev = robin_spectrum(sigma, 2 * ell + 8).eigenvalues
            count = int(np.sum(np.abs(ev - ell * (ell + 1)) <= 1e-6))
            need = ell - oc.degree
            res = float(np.max(oc.residuals))
            worst_res = max(worst_res, res)
            ok &= oc.dimension == need and res <= 1e-10 and count >= need
            detail[f"{name}, l={ell}"] = {"dimension": oc.dimension, "max_residual": res, "galerkin_count": count, "needed": need}
    return worst_res, "dimension = l-d; residual <= 1e-10; >= l-d Galerkin eigenvalues within 1e-6", ok, detail


def _c8():
    eps = 0.2
    coarse = robin_spectrum(ONE_PLUS_COS2, 24).eigenvalues
    fine = robin_spectrum(ONE_PLUS_COS2, 48).eigenvalues
    worst, ok, detail = -math.inf, True, {}
    for ell in range(4, 9):
        cell = lambda ev: ev[(ev > ell * ell) & (ev <= (ell + 1) ** 2)]
        c, f = cell(coarse), cell(fine)
        if c.size != ell + 1 or f.size != ell + 1:
            ok = False
            detail[ell] = {"cell_size": int(c.size)}
            continue
        gaps = c - ell * (ell + 1)
        delta = 10 * float(np.max(np.abs(c - f)))
        lo, hi = sandwich_spectra(ONE_PLUS_COS2, ell, eps)
        # signed excess: > 0 means a gap falls outside its interval
        excess = float(max(np.max(lo.gaps - delta - gaps), np.max(gaps - hi.gaps - delta)))
        worst = max(worst, excess)
        ok &= excess <= 0
        detail[ell] = {"gaps": gaps.tolist(), "lower": lo.gaps.tolist(), "upper": hi.gaps.tolist(), "delta": delta}
    return worst, "max excess outside [lower - delta, upper + delta] <= 0", ok, detail


def _c9():
    sp = constant_sigma_spectrum(1.0, 80)
    rep = cluster_window_counts(sp.trusted, 10.0, range(0, 21), cutoff=sp.cutoff)
    wrong = [ell for ell in range(0, 21) if rep["cell"][ell] != ell + 1]
    measured = float(len(wrong) + rep["stragglers"].size)
    detail = {"cell_counts": rep["cell"], "window_counts": rep["window"], "stragglers": rep["stragglers"].tolist()}
    return measured, "0 clusters with count != l+1 and 0 stragglers", measured == 0, detail


def _c10():
    robin_gap = robin_eigenvalue(1.0, 50) - (math.pi * mode_index(50)) ** 2
    step_gap = step_eigenvalue(1.0, 0.1, 100) - (math.pi * mode_index(100)) ** 2
    lam = robin_eigenvalue(1.0, 10)
    ladder = [abs(step_eigenvalue(1.0, e, 10) - lam) for e in [0.1, 0.05, 0.025]]
    fd = finite_difference_eigenvalues(1.0, 10)
    exact = np.array([robin_eigenvalue(1.0, n) for n in range(1, 11)])
    fd_rel = float(np.max(np.abs(fd - exact) / np.maximum(1.0, exact)))
    ok = abs(robin_gap - 2) <= 2e-2 and abs(step_gap - 1) <= 5e-2 and ladder[0] > ladder[1] > ladder[2] and fd_rel <= 1e-4
    detail = {"robin_gap_n50": robin_gap, "step_gap_n100": step_gap, "eps_ladder_dev": ladder, "fd_rel": fd_rel}
    return abs(robin_gap - 2), "|gap-2| <= 2e-2; |step gap-1| <= 5e-2; eps ladder shrinks", ok, detail


def _c11(seed: int = 20240601):
    devs = []
    for k in [1, 2, 3]:
        numeric, limit = model_operator_trace(bump, ONE_PLUS_COS2, 300, k)
        devs.append(abs(numeric - limit) / abs(limit))
    # even frequencies only: an odd Fourier mode couples the window's support
    # (l - m even) to indices where the window is zero, and those entries do
    # not shrink with l
    s = from_terms({0: 0.3, 2: 0.5, 4: 0.2j})
    comm = [commutator_hs_norm(bump, s, ell) for ell in [100, 200, 400, 800]]
    comm_ok = max(comm) <= 1.1 * comm[0]
    rng = np.random.default_rng(seed)
    fails = 0
    for _ in range(1000):
        a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        b = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        a, b = (a + a.conj().T) / 2, (b + b.conj().T) / 2
        sc = 1.9 / max(np.abs(np.linalg.eigvalsh(a)).max(), np.abs(np.linalg.eigvalsh(b)).max())
        fails += not trace_difference_bound_check(sc * a, sc * b, [0.0, 0.5, 1.0, -0.2], (-2.0, 2.0))[2]
    ok = max(devs) <= 0.05 and comm_ok and fails == 0
    detail = {"trace_rel_dev": devs, "commutator_hs": comm, "trace_bound_failures": fails}
    return max(devs), "trace <= 5%; commutator bounded; 0/1000 bound failures", ok, detail


def _c12(seed: int = 7):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in [5, 40, 120]:
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        a = (a + a.conj().T) / 2
        w, v = hermitian_eigen(a)
        scale = float(np.linalg.norm(a, 2))
        worst = max(worst, float(np.max(np.abs(a @ v - v * w))) / scale)
        worst = max(worst, float(np.max(np.abs(v.conj().T @ v - np.eye(n)))))
    for s, ell in [(from_terms({0: 0.4, 1: 0.3 - 0.1j, 3: 0.2}), 60), (ONE_PLUS_COS2, 201)]:
        m = build_cluster_matrix(s, ell).matrix
        worst = max(worst, float(np.max(np.abs(m - m.conj().T))))
    k, h = orthonormal_system(from_terms({0: 0.3, 1: 0.2 + 0.4j}), 16)
    worst = max(worst, float(np.max(np.abs(k - k.T))) / float(np.max(np.abs(k))), float(np.max(np.abs(h - h.conj().T))))
    same = gap_spectrum(ONE_PLUS_COS2, 150).gaps.tobytes() == gap_spectrum(ONE_PLUS_COS2, 150).gaps.tobytes()
    same &= robin_spectrum(ONE_PLUS_COS2, 12).eigenvalues.tobytes() == robin_spectrum(ONE_PLUS_COS2, 12).eigenvalues.tobytes()
    return worst, "residual, unitarity, Hermiticity <= 1e-10; repeated runs bit-identical", worst <= 1e-10 and same, {"deterministic": bool(same)}


CRITERIA: dict[int, tuple[str, Callable, float]] = {
    1: ("amplitude consistency", _c1, 5.0),
    2: ("amplitude ladder", _c2, 10.0),
    3: ("trace law", _c3, 10.0),
    4: ("density convergence", _c4, 120.0),
    5: ("constant-sigma density", _c5, 1.0),
    6: ("factor-two substitution", _c6, 5.0),
    7: ("odd-sigma eigenspace", _c7, 180.0),
    8: ("sandwich bounds", _c8, 300.0),
    9: ("cluster counting", _c9, 60.0),
    10: ("one-dimensional example", _c10, 5.0),
    11: ("model operators", _c11, 120.0),
    12: ("solver hygiene", _c12, 60.0),
}


def run_criterion(
    number: int, amplitude_scale: float = 1.0, executor: Executor | None = None, seed: int | None = None
) -> Verdict:
    name, fn, limit = CRITERIA[number]
    kwargs = {}
    if number in (1, 2):
        kwargs["amplitude_scale"] = amplitude_scale
    if number == 4:
        kwargs["executor"] = executor
    if number in (11, 12) and seed is not None:
        kwargs["seed"] = seed
    t0 = time.perf_counter()
    measured, bound, ok, detail = fn(**kwargs)
    dt = time.perf_counter() - t0
    return Verdict(
        criterion=number,
        name=name,
        measured=float(measured),
        bound=bound,
        passed=bool(ok) and dt <= limit,
        runtime_s=dt,
        runtime_limit_s=limit,
        detail=_jsonable(detail),
    )


def run_acceptance(
    which=None, amplitude_scale: float = 1.0, executor: Executor | None = None, seed: int | None = None
) -> list[Verdict]:
    """Run the selected criteria (all by default) in order.

    ``amplitude_scale`` multiplies every A_{l,m} seen by criteria 1 and 2;
    it exists so that the suite's sensitivity can be tested. ``seed`` feeds
    the random trials of criteria 11 and 12.
    """
    numbers = sorted(CRITERIA) if which is None else sorted(which)
    unknown = [n for n in numbers if n not in CRITERIA]
    if unknown:
        raise ValueError(f"criteria: unknown criterion numbers {unknown}")
    return [run_criterion(n, amplitude_scale, executor, seed) for n in numbers]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int, bool, np.bool_)):
        return obj.item() if hasattr(obj, "item") else obj
    return obj


def verdicts_to_json(verdicts: list[Verdict], include_timing: bool = True) -> str:
    rows = []
    for v in verdicts:
        d = v.as_dict()
        if not include_timing:
            d.pop("runtime_s")
        rows.append(d)
    payload = {"all_pass": all(v.passed for v in verdicts), "criteria": rows}
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)


_REQUIRED = {"criterion": int, "name": str, "measured": float, "bound": str, "pass": bool}


def load_verdicts(text: str) -> list[Verdict]:
    """Parse and validate a verdict JSON document."""
    data = json.loads(text)
    if not isinstance(data, dict) or "criteria" not in data or not isinstance(data["criteria"], list):
        raise ValueError("verdict JSON needs a 'criteria' list")
    out = []
    for i, row in enumerate(data["criteria"]):
        for key, typ in _REQUIRED.items():
            if key not in row:
                raise ValueError(f"criteria[{i}] is missing field {key!r}")
            val = row[key]
            if typ is float and isinstance(val, int) and not isinstance(val, bool):
                val = float(val)
            if not isinstance(val, typ):
                raise ValueError(f"criteria[{i}].{key} must be {typ.__name__}")
        out.append(
            Verdict(
                criterion=row["criterion"],
                name=row["name"],
                measured=float(row["measured"]),
                bound=row["bound"],
                passed=row["pass"],
                runtime_s=float(row.get("runtime_s", 0.0)),
                runtime_limit_s=float(row.get("runtime_limit_s", math.inf)),
                detail=row.get("detail", {}),
            )
        )
    return out
