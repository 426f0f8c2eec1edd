"""Command-line front end.

Usage examples::

    gaudin solve --N 3 --L 1 --c 1 --n 1,2,3
    gaudin multistart --N 5 --L 1 --c 1 --n 1,2,3,4,5 --starts 20 --seed 7
    gaudin scan-minors --N 10 --samples 100 --seed 1

Data goes to stdout (or ``--out``); diagnostics go to stderr. Exit codes:
0 success, 1 computational failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import analysis, equations as eq
from .model import InvalidSpec, SystemSpec, canonicalize, momentum_labels, reduced_labels, validate_spec
from .solver import (
    FactorizationError,
    NoConvergence,
    OracleStall,
    SolverConfig,
    multistart_probe,
    oracle_solve,
    solve,
)

log = logging.getLogger("gaudin")

COMMANDS = ("solve", "verify", "scan-minors", "limits", "compare-bc", "multistart")
# commands that can run without L, c, n
NEEDS_STATE = {"solve", "verify", "limits", "compare-bc", "multistart"}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    spec: SystemSpec
    n: tuple
    solver: SolverConfig = field(default_factory=SolverConfig)
    output_format: str = "json"
    output_path: Optional[str] = None
    seed: int = 0
    starts: int = 20
    box: float = 50.0
    samples: int = 100
    sampler: str = "perturbed"
    step_scale: float = 0.1


def _parse_n(text) -> tuple:
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [s for s in str(text).replace(" ", "").split(",") if s]
    try:
        return tuple(int(v) for v in items)
    except ValueError:
        raise UsageError(f"--n: expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaudin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with default values for the flags")
        p.add_argument("--N", type=int)
        p.add_argument("--L", type=float)
        p.add_argument("--c", type=float)
        p.add_argument("--n", help="comma-separated quantum numbers, e.g. 1,2,3")
        p.add_argument("--starts", type=int)
        p.add_argument("--box", type=float)
        p.add_argument("--samples", type=int)
        p.add_argument("--sampler", choices=("homogeneous", "perturbed"))
        p.add_argument("--step-scale", dest="step_scale", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--format", dest="format", choices=("json", "csv"))
        p.add_argument("--out")
        p.add_argument("--grad-tol", dest="grad_tol", type=float)
        p.add_argument("--max-iters", dest="max_iters", type=int)
    return parser


# config-file keys accepted besides the flag names
_ALIASES = {"n_particles": "N", "length": "L", "coupling": "c",
            "output_format": "format", "output_path": "out"}


def _load_config_text(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--config: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise UsageError("--config: top level must be an object")
    flat = {}
    for key, value in data.items():
        if key in ("spec", "solver") and isinstance(value, dict):
            for k2, v2 in value.items():
                flat[_ALIASES.get(k2, k2)] = v2
        else:
            flat[_ALIASES.get(key, key).replace("-", "_")] = value
    return flat


def parse_config(args, file_text: Optional[str] = None) -> RunConfig:
    """Build a RunConfig from CLI tokens; flag values override the config file."""
    ns = build_parser().parse_args(args)
    values = {}
    if file_text is None and ns.config:
        try:
            with open(ns.config) as fh:
                file_text = fh.read()
        except OSError as exc:
            raise UsageError(f"--config: {exc}") from None
    if file_text:
        values.update(_load_config_text(file_text))
    for key, value in vars(ns).items():
        if key not in ("command", "config") and value is not None:
            values[key] = value

    command = ns.command
    needs_state = command in NEEDS_STATE
    if values.get("N") is None:
        raise UsageError("--N is required")
    for key in ("L", "c"):
        if values.get(key) is None:
            if needs_state:
                raise UsageError(f"--{key} is required")
            values[key] = 1.0
    if needs_state and values.get("n") is None:
        raise UsageError("--n is required")
    n = _parse_n(values["n"]) if values.get("n") is not None else ()
    try:
        spec = SystemSpec(int(values["N"]), float(values["L"]), float(values["c"]))
        validate_spec(spec, n if needs_state else (0,) * spec.n_particles)
        solver = SolverConfig(grad_tol=float(values.get("grad_tol", 1e-12)),
                              max_iters=int(values.get("max_iters", 200)))
    except (InvalidSpec, TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    cfg = RunConfig(
        command=command,
        spec=spec,
        n=n,
        solver=solver,
        output_format=values.get("format", "json"),
        output_path=values.get("out"),
        seed=int(values.get("seed", 0)),
        starts=int(values.get("starts", 20)),
        box=float(values.get("box", 50.0)),
        samples=int(values.get("samples", 100)),
        sampler=values.get("sampler", "perturbed"),
        step_scale=float(values.get("step_scale", 0.1)),
    )
    if cfg.output_format not in ("json", "csv"):
        raise UsageError(f"--format: unknown format {cfg.output_format!r}")
    if command == "multistart" and cfg.starts < 2:
        raise UsageError("--starts must be >= 2")
    if command == "scan-minors" and cfg.samples < 1:
        raise UsageError("--samples must be >= 1")
    return cfg


# -- payload builders ---------------------------------------------------------------

def _floats(x):
    return [float(v) for v in np.asarray(x, dtype=float)]


def _input_echo(cfg: RunConfig) -> dict:
    return {"N": cfg.spec.n_particles, "L": cfg.spec.length, "c": cfg.spec.coupling,
            "n": list(cfg.n)}


def _canonical_record(canon) -> dict:
    return {
        "canonical_n": list(canon.canonical_n),
        "sign_map": list(canon.sign_map),
        "zero_reduced": canon.zero_reduced,
        "pinned_index": canon.pinned_index,
        "permutation": list(canon.permutation),
        "excluded_by_physics": canon.excluded_by_physics,
        "equivalence_class_size": canon.equivalence_class_size,
    }


def _ordering_record(rep) -> dict:
    return {
        "roots_strictly_increasing_positive": rep.roots_strictly_increasing_positive,
        "n_nondecreasing": rep.n_nondecreasing,
        "difference_residuals": _floats(rep.difference_residuals),
        "four_sums_nonpositive": list(rep.four_sums_nonpositive),
    }


def _transformed_residual(spec, report) -> float:
    canon = report.canonical
    x = report.unknowns
    if x.size == 0:
        return 0.0
    if canon.zero_reduced:
        r = eq.residual_reduced(x, reduced_labels(canon.canonical_n).labels, spec)
    else:
        r = eq.residual_transformed(x, momentum_labels(canon.canonical_n).labels, spec)
    return float(np.max(np.abs(r)))


def _solve_payload(cfg: RunConfig, verify: bool) -> dict:
    spec = cfg.spec
    rep = solve(spec, cfg.n, cfg.solver, with_minors=verify)
    canon = rep.canonical
    ordering = analysis.check_ordering(rep.unknowns, canon.canonical_n, spec,
                                      pinned=canon.zero_reduced)
    out = {
        "command": cfg.command,
        "input": _input_echo(cfg),
        "canonicalization": _canonical_record(canon),
        "system": rep.system,
        "roots": _floats(rep.roots),
        "signed_roots": _floats(rep.signed_roots),
        "b_value": rep.b_value,
        "iterations": rep.iterations,
        "residual_norms": {
            "transformed": _transformed_residual(spec, rep),
            "raw": rep.raw_residual_norm,
        },
        "hessian_pd": rep.hessian_pd,
        "ordering": _ordering_record(ordering),
        "coincident_magnitudes": rep.coincident_magnitudes,
        "energy": analysis.energy(rep.roots),
    }
    if verify:
        H = (eq.hessian_B_reduced if canon.zero_reduced else eq.hessian_B)(rep.unknowns, spec)
        try:
            chain = analysis.dominant_minors(H)
            out["minor_chain"] = {"log_minors": list(chain.log_minors),
                                  "all_positive": chain.all_positive,
                                  "strictly_increasing": chain.strictly_increasing}
        except analysis.NotPositiveDefinite as exc:
            out["minor_chain"] = {"log_minors": list(exc.chain.log_minors),
                                  "all_positive": False, "strictly_increasing": False}
        if spec.n_particles <= 6:
            ref = oracle_solve(spec, cfg.n)
            out["oracle_max_deviation"] = float(np.max(np.abs(ref - rep.roots)))
    return out


def _multistart_payload(cfg: RunConfig) -> dict:
    rep = multistart_probe(cfg.spec, cfg.n, cfg.starts, cfg.box, cfg.seed, cfg.solver)
    return {
        "command": cfg.command,
        "input": _input_echo(cfg),
        "starts": cfg.starts,
        "box": cfg.box,
        "seed": cfg.seed,
        "clusters": rep.n_clusters,
        "cluster_roots": [_floats(r) for r in rep.clusters],
        "converged": rep.n_converged,
        "failures": [{"start": i, "error": msg} for i, msg in rep.failures],
        "equivalence_class_size": rep.equivalence_class_size,
    }


def _scan_payload(cfg: RunConfig) -> dict:
    scan = analysis.scan_minor_chains(cfg.spec, cfg.sampler, cfg.spec.n_particles, cfg.samples,
                                      cfg.step_scale, cfg.seed)
    log.info("scan-minors: N=%d samples=%d runtime %.3f s", scan.n_particles, scan.samples,
             scan.elapsed)
    return {
        "command": cfg.command,
        "input": {"N": cfg.spec.n_particles, "L": cfg.spec.length, "c": cfg.spec.coupling},
        "sampler": scan.sampler,
        "samples": scan.samples,
        "step_scale": cfg.step_scale,
        "seed": cfg.seed,
        "chain_ok": scan.chain_ok,
        "chain_ok_fraction": scan.chain_ok_fraction,
        "all_positive_fraction": scan.all_positive / scan.samples,
        "min_log_pivot": scan.min_log_pivot,
        "per_sample": [dict(r) for r in scan.records],
    }


def _limits_payload(cfg: RunConfig) -> dict:
    out = {"command": cfg.command, "input": _input_echo(cfg)}
    roots = solve(cfg.spec, cfg.n, cfg.solver).roots
    out["roots"] = _floats(roots)
    for regime in ("free", "tonks"):
        ok = analysis.in_regime(cfg.spec, cfg.n, regime)
        if not ok:
            log.warning("c = %g is outside the %s regime", cfg.spec.coupling, regime)
        ref = analysis.limit_reference(cfg.spec, cfg.n, regime)
        out[regime] = {"deviation": float(np.max(np.abs(roots - ref))), "in_regime": ok,
                       "reference": _floats(ref)}
    return out


def _compare_payload(cfg: RunConfig) -> dict:
    rep = analysis.periodic_halving_check(cfg.spec, cfg.n, cfg.solver)
    return {
        "command": cfg.command,
        "input": _input_echo(cfg),
        "full_n": list(rep.full_n),
        "full_roots": _floats(rep.full_roots),
        "half_roots": _floats(rep.half_roots),
        "half_system_residual": rep.half_residual,
        "mirror_error": rep.mirror_error,
        "zero_bc_residual": rep.zero_bc_residual,
        "obstruction": rep.obstruction,
        "obstruction_ok": rep.obstruction_ok,
        "periodic_raw_residual": rep.periodic_raw_residual,
    }


def build_payload(cfg: RunConfig) -> dict:
    if cfg.command in ("solve", "verify"):
        return _solve_payload(cfg, verify=cfg.command == "verify")
    if cfg.command == "multistart":
        return _multistart_payload(cfg)
    if cfg.command == "scan-minors":
        return _scan_payload(cfg)
    if cfg.command == "limits":
        return _limits_payload(cfg)
    return _compare_payload(cfg)


# -- serialization ---------------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def to_json(payload: dict) -> str:
    # float repr is the shortest string that round-trips to the same double
    return json.dumps(_clean(payload), indent=2) + "\n"


def to_csv(payload: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cmd = payload["command"]
    if cmd in ("solve", "verify"):
        w.writerow(["index", "root", "signed_root"])
        for i, (a, b) in enumerate(zip(payload["roots"], payload["signed_roots"])):
            w.writerow([i, repr(a), repr(b)])
    elif cmd == "scan-minors":
        rows = payload["per_sample"]
        w.writerow(list(rows[0]) if rows else ["sample"])
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row.values()])
    elif cmd == "multistart":
        w.writerow(["cluster", "index", "root"])
        for ci, roots in enumerate(payload["cluster_roots"]):
            for i, v in enumerate(roots):
                w.writerow([ci, i, repr(v)])
    else:
        w.writerow(["key", "value"])
        for key, value in _flatten(_clean(payload)):
            w.writerow([key, json.dumps(value) if not isinstance(value, str) else value])
    return buf.getvalue()


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    else:
        yield prefix.rstrip("."), obj


def run(cfg: RunConfig) -> int:
    try:
        payload = build_payload(cfg)
    except (NoConvergence, FactorizationError, OracleStall, ArithmeticError) as exc:
        print(f"gaudin: computation failed: {exc}", file=sys.stderr)
        return 1
    except (InvalidSpec, ValueError) as exc:
        print(f"gaudin: {exc}", file=sys.stderr)
        return 2
    text = to_json(payload) if cfg.output_format == "json" else to_csv(payload)
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s", stream=sys.stderr)
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"gaudin: usage error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        # argparse already printed its message
        return int(exc.code or 0)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
