"""Experiment harness: drives the library from JSON configuration files and
writes deterministic CSV/JSON artifacts.

Exit codes: 0 success (inconclusive results are still 0, with the status in
the artifact), 2 configuration/schema violation, 3 numerical nonconvergence,
4 I/O failure.  For a fixed (config, seed) pair the artifact bytes are
identical across runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .corpus import (
    random_blaschke,
    random_critical_targets,
    random_disk_point,
    random_origin_fixing_map,
    rng_from_seed,
)
from .errors import BlaschkeError, DomainError, NonconvergenceError
from .indestructible import verify_stability_ibp
from .iteration import covering_certificate, default_grid, detect_convergence
from .maximal import (
    canonicalize,
    curvature,
    decomposition_check,
    lambda_field,
    solve_maximal,
)
from .multiset import PointMultiset
from .products import (
    FiniteBlaschke,
    compose_explicit,
    critical_set,
    default_probe_grid,
    map_distance,
)
from .serialize import config_hash, sequence_from_spec, write_csv

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

COMMANDS = ("iterate", "solve-maximal", "verify-ibp", "verify-mbp", "curvature", "covering", "decompose")

# Multipliers applied to tolerance defaults, selected by environment
# variable BLASCHKE_TOLERANCE_PROFILE.
_PROFILES = {"strict": 0.1, "default": 1.0, "loose": 10.0}

_TOP_KEYS = {"version", "command", "inputs", "seed", "output_path", "tolerances"}
_INPUT_KEYS = {
    "iterate": {"sequence", "n_max", "tol", "grid_radii", "grid_angles"},
    "solve-maximal": {"critical_points"},
    "verify-ibp": {"sequence", "n_list", "a_samples", "a_count", "a_radius"},
    "verify-mbp": {"cases", "max_degree"},
    "curvature": {"map", "r_max", "spacing"},
    "covering": {"cases", "epsilons"},
    "decompose": {"a1", "a2", "cases", "max_degree"},
}
_TOLERANCE_KEYS = {"tol", "residual_tol", "series_tol", "taylor_tol"}


def validate_config(config: dict) -> dict:
    """Strict schema check; unknown keys anywhere are rejected."""
    if not isinstance(config, dict):
        raise DomainError("config must be a JSON object")
    extras = set(config) - _TOP_KEYS
    if extras:
        raise DomainError(f"unknown config keys: {sorted(extras)}")
    if config.get("version") != 1:
        raise DomainError("config needs 'version': 1")
    command = config.get("command")
    if command not in COMMANDS:
        raise DomainError(f"command must be one of {COMMANDS}, got {command!r}")
    inputs = config.get("inputs", {})
    if not isinstance(inputs, dict):
        raise DomainError("'inputs' must be an object")
    extras = set(inputs) - _INPUT_KEYS[command]
    if extras:
        raise DomainError(f"unknown input keys for {command}: {sorted(extras)}")
    tols = config.get("tolerances", {})
    if not isinstance(tols, dict) or set(tols) - _TOLERANCE_KEYS:
        raise DomainError(f"tolerances accepts only {sorted(_TOLERANCE_KEYS)}")
    seed = config.get("seed", 0)
    if not isinstance(seed, int) or not (0 <= seed < 2**64):
        raise DomainError("seed must be an integer in [0, 2^64)")
    if "output_path" in config and not isinstance(config["output_path"], str):
        raise DomainError("output_path must be a string")
    return config


def _tolerance(config, key, default):
    profile = os.environ.get("BLASCHKE_TOLERANCE_PROFILE", "default")
    if profile not in _PROFILES:
        raise DomainError(f"unknown tolerance profile {profile!r}")
    return config.get("tolerances", {}).get(key, default * _PROFILES[profile])


def run(config: dict, out_override: str | None = None, seed_override: int | None = None,
        quiet: bool = False) -> int:
    """Execute one experiment; returns the process exit code."""
    try:
        config = validate_config(config)
    except DomainError as exc:
        if not quiet:
            print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA

    seed = seed_override if seed_override is not None else config.get("seed", 0)
    out_path = out_override or config.get("output_path")
    if not out_path:
        if not quiet:
            print("no output path given (config output_path or --out)", file=sys.stderr)
        return EXIT_SCHEMA

    meta = {
        "tool_version": __version__,
        "config_hash": config_hash(config),
        "seed": seed,
    }
    handler = _HANDLERS[config["command"]]
    try:
        handler(config, seed, out_path, meta)
    except DomainError as exc:
        if not quiet:
            print(f"input error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (NonconvergenceError, BlaschkeError) as exc:
        if not quiet:
            print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        if not quiet:
            print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO
    if not quiet:
        print(f"wrote {out_path}")
    return EXIT_OK


# -- command handlers ---------------------------------------------------------


def _cmd_iterate(config, seed, out_path, meta):
    inputs = config["inputs"]
    seq = sequence_from_spec(inputs.get("sequence", {"family": "squaring"}))
    n_max = int(inputs.get("n_max", 200))
    tol = float(_tolerance(config, "tol", 1e-9))
    radii = tuple(inputs.get("grid_radii", (0.3, 0.6, 0.9)))
    angles = int(inputs.get("grid_angles", 20))
    report = detect_convergence(seq, default_grid(radii, angles), n_max=n_max, tol=tol,
                                series_tol=_tolerance(config, "series_tol", 1e-5))
    record = report.to_record()
    write_csv(out_path, list(record.keys()), [list(record.values())], meta)


def _cmd_solve_maximal(config, seed, out_path, meta):
    pts = config["inputs"].get("critical_points", [])
    targets = PointMultiset([complex(p[0], p[1]) for p in pts], [int(p[2]) for p in pts]) \
        if pts else PointMultiset.empty()
    result = solve_maximal(targets, residual_tol=_tolerance(config, "residual_tol", 1e-9))
    payload = {
        "meta": meta,
        "product": result.product.to_dict(),
        "residual": result.residual,
        "homotopy_steps": result.homotopy_steps,
        "newton_iters": result.newton_iters,
    }
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _cmd_verify_ibp(config, seed, out_path, meta):
    inputs = config["inputs"]
    seq = sequence_from_spec(inputs.get("sequence", {"family": "tangential"}))
    n_list = [int(n) for n in inputs.get("n_list", [1, 2, 3, 4])]
    if "a_samples" in inputs:
        samples = [complex(a[0], a[1]) for a in inputs["a_samples"]]
    else:
        rng = rng_from_seed(seed)
        count = int(inputs.get("a_count", 5))
        radius = float(inputs.get("a_radius", 0.8))
        samples = [random_disk_point(rng, radius) for _ in range(count)]
    rows = verify_stability_ibp(seq, samples, n_list,
                                taylor_tol=_tolerance(config, "taylor_tol", 1e-8))
    table = [
        [r.n, r.condition, (r.a.real if r.a is not None else 0.0),
         (r.a.imag if r.a is not None else 0.0), r.lhs, r.rhs, r.residual]
        for r in rows
    ]
    write_csv(out_path, ["n", "condition", "a_re", "a_im", "lhs", "rhs", "residual"], table, meta)


def _cmd_verify_mbp(config, seed, out_path, meta):
    inputs = config["inputs"]
    cases = int(inputs.get("cases", 50))
    max_degree = int(inputs.get("max_degree", 6))
    rng = rng_from_seed(seed)
    probes = default_probe_grid()
    rows = []
    for case in range(cases):
        b_true = random_blaschke(rng, max_degree=max_degree, min_degree=2)
        solved = solve_maximal(critical_set(b_true),
                               residual_tol=_tolerance(config, "residual_tol", 1e-9))
        dist = map_distance(solved.product, canonicalize(b_true), probes)
        rows.append([case, b_true.degree, solved.residual, dist,
                     solved.homotopy_steps, solved.newton_iters])
    write_csv(out_path,
              ["case", "degree", "residual", "map_distance", "homotopy_steps", "newton_iters"],
              rows, meta)


def _cmd_curvature(config, seed, out_path, meta):
    inputs = config["inputs"]
    spec = inputs.get("map", {"power": 2})
    if "power" in spec:
        f = FiniteBlaschke.power_map(int(spec["power"]))
    else:
        f = FiniteBlaschke.from_dict(spec)
    field = lambda_field(f, r_max=float(inputs.get("r_max", 0.8)),
                         spacing=float(inputs.get("spacing", 0.02)))
    kappa = curvature(field)
    zz = field.grid()
    rows = []
    for i in range(zz.shape[0]):
        for j in range(zz.shape[1]):
            lam = field.values[i, j]
            if np.isnan(lam):
                continue
            k = kappa[i, j]
            excluded = int(np.isnan(k))
            rows.append([float(zz[i, j].real), float(zz[i, j].imag), float(lam),
                         0.0 if excluded else float(k), excluded])
    write_csv(out_path, ["z_re", "z_im", "lambda", "kappa", "excluded_flag"], rows, meta)


def _cmd_covering(config, seed, out_path, meta):
    inputs = config["inputs"]
    cases = int(inputs.get("cases", 20))
    epsilons = [float(e) for e in inputs.get("epsilons", (0.01, 0.04))]
    rng = rng_from_seed(seed)
    rows = []
    for case in range(cases):
        eps = epsilons[case % len(epsilons)]
        h = random_origin_fixing_map(rng, eps)
        min_mod, covered = covering_certificate(h, eps)
        rows.append([case, eps, min_mod, 1.0 - 3.0 * np.sqrt(eps), covered])
    write_csv(out_path, ["case", "epsilon", "min_modulus", "bound", "covered"], rows, meta)


def _cmd_decompose(config, seed, out_path, meta):
    inputs = config["inputs"]
    probes = default_probe_grid()
    rows = []
    if "a1" in inputs or "a2" in inputs:
        a1 = FiniteBlaschke.from_dict(inputs["a1"])
        a2 = FiniteBlaschke.from_dict(inputs["a2"])
        rep = decomposition_check(a1, a2, probes,
                                  residual_tol=_tolerance(config, "residual_tol", 1e-9))
        rows.append([0, a1.degree, a2.degree, rep.gap_a1, rep.gap_a2, rep.gap_composite])
    else:
        cases = int(inputs.get("cases", 20))
        max_degree = int(inputs.get("max_degree", 3))
        rng = rng_from_seed(seed)
        for case in range(cases):
            a1, a2 = _decomposable_pair(rng, max_degree)
            rep = decomposition_check(a1, a2, probes,
                                      residual_tol=_tolerance(config, "residual_tol", 1e-9))
            rows.append([case, a1.degree, a2.degree, rep.gap_a1, rep.gap_a2, rep.gap_composite])
    write_csv(out_path, ["case", "deg_a1", "deg_a2", "gap_a1", "gap_a2", "gap_composite"],
              rows, meta)


def _decomposable_pair(rng, max_degree):
    """Random factor pair whose composite keeps its critical set away from
    the boundary (the solver's well-conditioned regime)."""
    while True:
        a1 = random_blaschke(rng, max_degree=max_degree, min_degree=2, r_max=0.5)
        a2 = random_blaschke(rng, max_degree=max_degree, min_degree=2, r_max=0.5)
        crit = critical_set(compose_explicit(a1, a2))
        if all(abs(p) <= 0.9 for p, _ in crit):
            return a1, a2


_HANDLERS = {
    "iterate": _cmd_iterate,
    "solve-maximal": _cmd_solve_maximal,
    "verify-ibp": _cmd_verify_ibp,
    "verify-mbp": _cmd_verify_mbp,
    "curvature": _cmd_curvature,
    "covering": _cmd_covering,
    "decompose": _cmd_decompose,
}


# -- plot data ----------------------------------------------------------------


def emit_plot_data(report, kind: str, path: str, meta: dict | None = None) -> None:
    """Columnar text for external plotting.

    Kinds: 'orbit' (re, im rows from a list of complex orbit points),
    'field' (z_re, z_im, lambda, kappa from a PseudometricField),
    'residual-trajectory' (n, residual from a McLaughlin report list).
    """
    meta = meta or {"tool_version": __version__}
    if kind == "orbit":
        if not isinstance(report, (list, tuple)):
            raise DomainError("orbit plot data needs a list of complex points")
        rows = [[complex(z).real, complex(z).imag] for z in report]
        write_csv(path, ["re", "im"], rows, meta)
    elif kind == "field":
        from .maximal import PseudometricField, curvature as _curv

        if not isinstance(report, PseudometricField):
            raise DomainError("field plot data needs a PseudometricField")
        kappa = _curv(report)
        zz = report.grid()
        rows = []
        for i in range(zz.shape[0]):
            for j in range(zz.shape[1]):
                if np.isnan(report.values[i, j]):
                    continue
                k = kappa[i, j]
                rows.append([zz[i, j].real, zz[i, j].imag, float(report.values[i, j]),
                             float(k) if np.isfinite(k) else 0.0])
        write_csv(path, ["z_re", "z_im", "lambda", "kappa"], rows, meta)
    elif kind == "residual-trajectory":
        try:
            rows = [[r.n, r.residual] for r in report]
        except AttributeError as exc:
            raise DomainError("residual trajectory needs McLaughlin reports") from exc
        write_csv(path, ["n", "residual"], rows, meta)
    else:
        raise DomainError(f"unknown plot kind {kind!r}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="blaschke",
        description="Run a Blaschke-product experiment from a JSON config file.",
    )
    parser.add_argument("--config", required=True, help="path to the JSON configuration")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="override the config output path")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        if not args.quiet:
            print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        if not args.quiet:
            print(f"config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_SCHEMA

    return run(config, out_override=args.out, seed_override=args.seed, quiet=args.quiet)


if __name__ == "__main__":
    sys.exit(main())
