"""Command-line entry point: ``hemirobin <subcommand> [flags]``.

Every subcommand takes its parameters from flags, from a JSON config file
(``--config``, keys named like the long flags without dashes), or both,
with flags winning. Results go to ``--out DIR`` or, without it, to stdout.

Exit codes: 0 success, 1 a verify criterion failed, 2 invalid
configuration, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import acceptance, cluster, density, galerkin, sl1d
from .boundary import BoundarySymbol, constant, symbol_from_json, symbol_to_json
from .numerics import ConvergenceError, DomainError, NotPositiveDefiniteError

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

COMMANDS = ("cluster-spectrum", "density", "rho", "weinstein", "galerkin", "sl1d", "odd-construct", "verify")
_KEYS = ("sigma", "ell", "ladder", "lmax", "f", "epsilon", "out", "jobs", "seed", "y", "criteria")


class ConfigError(ValueError):
    """Invalid run configuration; the message names the field."""


def fmt(x: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    command: str
    sigma: object = None  # BoundarySymbol, or float for sl1d
    ells: tuple = ()
    lmax: int | None = None
    f: density.TestFunction | None = None
    epsilon: float | None = None
    out: Path | None = None
    jobs: int = 1
    seed: int | None = None
    y: tuple = ()
    criteria: tuple | None = None


def _parse_int_list(name: str, value) -> tuple[int, ...]:
    """int, list of ints, "a,b,c" or "a:b:step" (inclusive of b when hit)."""
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected integers")
    if isinstance(value, int):
        return (value,)
    if isinstance(value, list):
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"{name}: expected a list of integers")
        return tuple(value)
    if not isinstance(value, str):
        raise ConfigError(f"{name}: expected an integer, a list or a:b:step")
    try:
        if ":" in value:
            parts = [int(p) for p in value.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ConfigError(f"{name}: expected a:b:step with step > 0")
            a, b, step = parts
            return tuple(range(a, b + 1, step))
        return tuple(int(p) for p in value.split(",") if p.strip())
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{name}: could not parse {value!r} as integers") from exc


def _parse_y(value) -> tuple[float, ...]:
    """"a:b:num" (linspace) or a list / comma list of floats."""
    try:
        if isinstance(value, list):
            ys = tuple(float(v) for v in value)
        elif isinstance(value, str) and ":" in value:
            a, b, n = value.split(":")
            ys = tuple(float(v) for v in np.linspace(float(a), float(b), int(n)))
        elif isinstance(value, str):
            ys = tuple(float(v) for v in value.split(",") if v.strip())
        else:
            ys = (float(value),)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"y: could not parse {value!r}") from exc
    if not ys or not all(math.isfinite(v) for v in ys):
        raise ConfigError("y: expected finite values")
    return ys


def _load_sigma(value) -> BoundarySymbol:
    """Inline JSON, a path to a JSON file, a bare number (constant sigma) or a dict."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return constant(float(value))
    if isinstance(value, str):
        if os.path.isfile(value):
            value = Path(value).read_text()
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"sigma: invalid JSON ({exc.msg})") from exc
        if isinstance(parsed, (int, float)) and not isinstance(parsed, bool):
            return constant(float(parsed))
        value = parsed
    try:
        return symbol_from_json(value)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _real_sigma(value) -> float:
    try:
        s = float(json.loads(value) if isinstance(value, str) else value)
    except (TypeError, ValueError) as exc:
        raise ConfigError("sigma: the sl1d command needs a real number") from exc
    if not math.isfinite(s):
        raise ConfigError("sigma: must be finite")
    return s


def _merge(args: argparse.Namespace) -> dict:
    raw: dict = {}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"config: cannot read {args.config} ({exc.strerror})") from exc
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON ({exc.msg})") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config: expected a JSON object")
        unknown = sorted(set(raw) - set(_KEYS))
        if unknown:
            raise ConfigError(f"config: unknown keys {unknown}")
    for key in _KEYS:
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    return raw


def build_config(command: str, raw: dict) -> RunConfig:
    """Validate the merged parameters for ``command``."""

    def need(key):
        if raw.get(key) is None:
            raise ConfigError(f"{key}: required by '{command}'")
        return raw[key]

    kw: dict = {"command": command}
    if command == "sl1d":
        kw["sigma"] = _real_sigma(need("sigma"))
    elif command != "verify":
        kw["sigma"] = _load_sigma(need("sigma"))

    if command in ("cluster-spectrum", "odd-construct"):
        kw["ells"] = _parse_int_list("ell", need("ell"))
    elif command in ("density", "sl1d"):
        key = "ladder" if raw.get("ladder") is not None else "ell"
        kw["ells"] = _parse_int_list(key, need(key) if key == "ell" else raw[key])
    if kw.get("ells") is not None and any(e < 0 for e in kw["ells"]):
        raise ConfigError("ell: values must be nonnegative")
    if command in ("cluster-spectrum", "odd-construct", "density", "sl1d") and not kw["ells"]:
        raise ConfigError("ell: at least one value is required")
    if command == "sl1d" and any(n < 1 for n in kw["ells"]):
        raise ConfigError("ladder: mode numbers must be >= 1")
    if command == "density" and any(b <= a for a, b in zip(kw["ells"][:-1], kw["ells"][1:])):
        raise ConfigError("ladder: must be strictly increasing")

    if command in ("density", "weinstein"):
        try:
            kw["f"] = density.parse_test_function(str(need("f")))
        except ValueError as exc:
            raise ConfigError(f"f: {exc}") from exc
    if command == "galerkin":
        lmax = need("lmax")
        if not isinstance(lmax, int) or isinstance(lmax, bool) or lmax < 0:
            raise ConfigError("lmax: expected a nonnegative integer")
        kw["lmax"] = lmax
    if command == "rho":
        kw["y"] = _parse_y(need("y"))
    if raw.get("epsilon") is not None:
        eps = raw["epsilon"]
        if isinstance(eps, bool) or not isinstance(eps, (int, float)) or not 0 < eps < 1:
            raise ConfigError("epsilon: expected a number in (0, 1)")
        kw["epsilon"] = float(eps)
    if raw.get("out") is not None:
        kw["out"] = Path(raw["out"])
    jobs = raw.get("jobs", 1)
    if not isinstance(jobs, int) or isinstance(jobs, bool) or jobs < 1:
        raise ConfigError("jobs: expected a positive integer")
    kw["jobs"] = jobs
    seed = raw.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool) or seed < 0):
        raise ConfigError("seed: expected a nonnegative integer")
    kw["seed"] = seed
    if command == "verify" and raw.get("criteria") is not None:
        crit = _parse_int_list("criteria", raw["criteria"])
        bad = [c for c in crit if c not in acceptance.CRITERIA]
        if bad:
            raise ConfigError(f"criteria: unknown criterion numbers {bad}")
        kw["criteria"] = crit
    return RunConfig(**kw)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(cfg: RunConfig, name: str, text: str, stdout) -> None:
    if cfg.out is None:
        stdout.write(text)
        return
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / name).write_text(text)


def _executor(cfg: RunConfig):
    return ProcessPoolExecutor(max_workers=cfg.jobs) if cfg.jobs > 1 else nullcontext(None)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_cluster_spectrum(cfg: RunConfig, stdout=sys.stdout) -> int:
    with _executor(cfg) as ex:
        args = [(cfg.sigma, ell) for ell in cfg.ells]
        spectra = list(ex.map(_gap_job, args)) if ex else [_gap_job(a) for a in args]
    rows = [(ell, k, float(g)) for ell, gaps in zip(cfg.ells, spectra) for k, g in enumerate(gaps)]
    _emit(cfg, "cluster_spectrum.csv", _csv_text(["ell", "k", "gap"], rows), stdout)
    return EXIT_OK


def _gap_job(arg):
    sigma, ell = arg
    return cluster.gap_spectrum(sigma, ell).gaps


def cmd_density(cfg: RunConfig, stdout=sys.stdout) -> int:
    with _executor(cfg) as ex:
        rep = density.empirical_vs_limit(cfg.sigma, cfg.f, list(cfg.ells), executor=ex)
    rows = [(ell, e, float(rep.limit), d) for ell, e, d in zip(rep.ells, rep.empirical, rep.deviations)]
    _emit(cfg, "density.csv", _csv_text(["ell", "empirical", "limit", "deviation"], rows), stdout)
    return EXIT_OK


def cmd_rho(cfg: RunConfig, stdout=sys.stdout) -> int:
    rows = [(y, density.rho_density(cfg.sigma, y)) for y in cfg.y]
    _emit(cfg, "rho.csv", _csv_text(["y", "rho"], rows), stdout)
    return EXIT_OK


def cmd_weinstein(cfg: RunConfig, stdout=sys.stdout) -> int:
    w = density.weinstein_comparison(cfg.sigma, cfg.f)
    out = {k: float(v) for k, v in w.items()}
    out["sigma"] = symbol_to_json(cfg.sigma)
    out["f"] = cfg.f.describe()
    _emit(cfg, "weinstein.json", _json_text(out), stdout)
    return EXIT_OK


def _cell_of(ev: float) -> int:
    # cluster l owns (l^2, (l+1)^2]
    return 0 if ev <= 0 else max(0, math.ceil(math.sqrt(ev)) - 1)


def cmd_galerkin(cfg: RunConfig, stdout=sys.stdout) -> int:
    sp = galerkin.robin_spectrum(cfg.sigma, cfg.lmax)
    rows = []
    for i, ev in enumerate(sp.trusted):
        ell = _cell_of(float(ev))
        rows.append((i, float(ev), ell, float(ev) - ell * (ell + 1)))
    _emit(cfg, "galerkin_spectrum.csv", _csv_text(["index", "eigenvalue", "cluster", "gap"], rows), stdout)
    manifest = {
        "lmax": cfg.lmax,
        "sigma": symbol_to_json(cfg.sigma),
        "trusted_cutoff": sp.cutoff,
        "n_trusted": int(sp.trusted.size),
        "n_total": int(sp.eigenvalues.size),
        "basis": "orthonormal per m, same span as harmonics of degree <= lmax",
    }
    if cfg.out is not None:
        _emit(cfg, "galerkin_manifest.json", _json_text(manifest), stdout)
    return EXIT_OK


def cmd_sl1d(cfg: RunConfig, stdout=sys.stdout) -> int:
    rows = sl1d.eigen_table(cfg.sigma, cfg.ells, cfg.epsilon)
    name = "sl1d_step.csv" if cfg.epsilon is not None else "sl1d_robin.csv"
    _emit(cfg, name, _csv_text(["n", "eigenvalue", "gap"], rows), stdout)
    return EXIT_OK


def cmd_odd_construct(cfg: RunConfig, stdout=sys.stdout) -> int:
    out = []
    for ell in cfg.ells:
        oc = galerkin.odd_eigenspace_construction(cfg.sigma, ell)
        out.append(
            {
                "ell": ell,
                "degree": oc.degree,
                "dimension": oc.dimension,
                "neumann_m": [int(m) for m in oc.neumann_m],
                "residuals": [float(r) for r in oc.residuals],
            }
        )
    _emit(cfg, "odd_construction.json", _json_text(out), stdout)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, stdout=sys.stdout, stderr=sys.stderr, amplitude_scale: float = 1.0) -> int:
    with _executor(cfg) as ex:
        verdicts = acceptance.run_acceptance(cfg.criteria, amplitude_scale=amplitude_scale, executor=ex, seed=cfg.seed)
    for v in verdicts:
        stderr.write(v.line() + "\n")
    # timings stay out of the JSON so repeated runs are byte-identical
    _emit(cfg, "verdict.json", acceptance.verdicts_to_json(verdicts, include_timing=False) + "\n", stdout)
    return EXIT_OK if all(v.passed for v in verdicts) else EXIT_FAILED


_DISPATCH = {
    "cluster-spectrum": cmd_cluster_spectrum,
    "density": cmd_density,
    "rho": cmd_rho,
    "weinstein": cmd_weinstein,
    "galerkin": cmd_galerkin,
    "sl1d": cmd_sl1d,
    "odd-construct": cmd_odd_construct,
    "verify": cmd_verify,
}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hemirobin", description="Robin eigenvalue clusters on the hemisphere.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON file with default parameters")
        s.add_argument("--sigma", help="boundary function: inline JSON, a JSON file, or a number")
        s.add_argument("--ell", help="degree(s): N, a,b,c or a:b:step")
        s.add_argument("--ladder", help="increasing degrees (density) or mode numbers (sl1d)")
        s.add_argument("--lmax", type=int, help="Galerkin truncation degree")
        s.add_argument("--f", help="test function, e.g. x, x^2*bump(6), poly(1,-0.5)*bump(3)")
        s.add_argument("--epsilon", type=float, help="step width for sl1d")
        s.add_argument("--y", help="rho sample points: a:b:num or a comma list")
        s.add_argument("--criteria", help="verify: subset of criterion numbers")
        s.add_argument("--out", help="output directory (default: stdout)")
        s.add_argument("--jobs", type=int, help="worker processes")
        s.add_argument("--seed", type=int, help="seed for randomized checks")
    return p


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = build_config(args.command, _merge(args))
    except ConfigError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    fn = _DISPATCH[cfg.command]
    try:
        if cfg.command == "verify":
            return fn(cfg, stdout=stdout, stderr=stderr)
        return fn(cfg, stdout=stdout)
    except DomainError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except (ConvergenceError, NotPositiveDefiniteError, galerkin.AssemblyError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
