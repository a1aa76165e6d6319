"""Command-line front end: config ingestion, dispatch, and run manifests.

Configs are JSON with unit-suffixed keys (_f, _h, _hz, _s, _ohm); curves are
written as CSV, structured results as JSON, and every run leaves a
``manifest.json`` recording the resolved parameters, seeds, input digests and
output files.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .abcd import cascade_abcd, default_grid
from .bands import dispersion_curve
from .dressed import solve_dressed_states
from .dynamics import (Protocol, simulate_emission, simulate_emission_quantum,
                       simulate_mirror)
from .params import (ArraySpec, EmitterParams, QubitCircuitParams,
                     UnitCellParams, ValidationError)
from .taper import TaperProblem, optimize
from . import disorder as disorder_mod

TWO_PI = 2.0 * math.pi


# --------------------------------------------------------------------------
# config plumbing

def parse_config(path: str) -> dict:
    """Load a JSON config; schema validation happens per subcommand."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {path}: {exc}")


def _check_keys(cfg: dict, known, required, path: str = "config") -> None:
    unknown = set(cfg) - set(known)
    if unknown:
        raise ValidationError(f"{path}: unknown keys {sorted(unknown)}")
    for k in required:
        if k not in cfg:
            raise ValidationError(f"{path}: missing required key '{k}'")


def _sub(cfg: dict, key: str, builder, path: str = "config"):
    try:
        return builder(cfg[key])
    except ValidationError as exc:
        raise ValidationError(f"{path}.{key}: {exc}")


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_dir: str, command: str, params: dict, seed,
                    inputs: dict, outputs: list, started: str) -> None:
    manifest = {
        "command": command,
        "parameters": params,
        "version": __version__,
        "seed": seed,
        "input_digests": inputs,
        "outputs": sorted(outputs),
        "started_utc": started,
        "finished_utc": datetime.now(timezone.utc).isoformat(),
    }
    final = os.path.join(out_dir, "manifest.json")
    tmp = final + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, final)


# --------------------------------------------------------------------------
# subcommands: each returns the list of output file names it wrote

def _cmd_band(cfg: dict, out: str, args) -> list:
    _check_keys(cfg, {"cell", "n_points"}, {"cell"})
    cell = _sub(cfg, "cell", UnitCellParams.from_dict)
    curve = dispersion_curve(cell, int(cfg.get("n_points", 1001)))
    curve.to_csv(os.path.join(out, "dispersion.csv"))
    return ["dispersion.csv"]


def _cmd_s21(cfg: dict, out: str, args) -> list:
    _check_keys(cfg, {"spec", "n_points", "f_min_hz", "f_max_hz"}, {"spec"})
    spec = _sub(cfg, "spec", ArraySpec.from_dict)
    n = int(cfg.get("n_points", 2001))
    if "f_min_hz" in cfg or "f_max_hz" in cfg:
        for k in ("f_min_hz", "f_max_hz"):
            if k not in cfg:
                raise ValidationError(f"config: '{k}' required when the other "
                                      "grid bound is given")
        grid = np.linspace(TWO_PI * float(cfg["f_min_hz"]),
                           TWO_PI * float(cfg["f_max_hz"]), n)
    else:
        grid = default_grid(spec.interior, n)
    cascade_abcd(spec, grid).to_csv(os.path.join(out, "s21.csv"))
    return ["s21.csv"]


def _cmd_taper_opt(cfg: dict, out: str, args) -> list:
    problem = TaperProblem.from_dict(cfg)
    report = optimize(problem)
    with open(os.path.join(out, "tapered_spec.json"), "w", encoding="utf-8") as fh:
        fh.write(report.spec.to_json())
        fh.write("\n")
    hist = np.array(report.history, dtype=float).reshape(-1, 2)
    np.savetxt(os.path.join(out, "convergence.csv"), hist, delimiter=",",
               header="iter,ripple_db", comments="", fmt=["%d", "%.6f"])
    with open(os.path.join(out, "taper_report.json"), "w", encoding="utf-8") as fh:
        json.dump({"ripple_db": report.ripple_db,
                   "n_iterations": report.n_iterations,
                   "converged": report.converged}, fh, indent=2)
        fh.write("\n")
    return ["tapered_spec.json", "convergence.csv", "taper_report.json"]


def _cmd_dressed(cfg: dict, out: str, args) -> list:
    _check_keys(cfg, {"cell", "emitter", "model", "edge"}, {"cell", "emitter"})
    cell = _sub(cfg, "cell", UnitCellParams.from_dict)
    emitter = _sub(cfg, "emitter", EmitterParams.from_dict)
    sol = solve_dressed_states(emitter, cell,
                               model=cfg.get("model", "effective_mass"),
                               edge=cfg.get("edge", "upper"))
    payload = {
        "e_bound_hz": sol.e_bound / TWO_PI,
        "e_radiative_hz_re": sol.e_radiative.real / TWO_PI,
        "e_radiative_hz_im": sol.e_radiative.imag / TWO_PI,
        "qubit_weight": sol.qubit_weight,
        "lambda_cells": sol.localization_length,
        "splitting_hz": sol.splitting / TWO_PI,
    }
    with open(os.path.join(out, "dressed.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return ["dressed.json"]


_DYNAMICS_METHODS = {
    "emission": simulate_emission,
    "mirror": simulate_mirror,
    "quantum": simulate_emission_quantum,
}


def _cmd_dynamics(cfg: dict, out: str, args) -> list:
    _check_keys(cfg, {"spec", "qubit", "protocol", "method",
                      "sweep_omega_interact_hz"}, {"spec", "qubit", "protocol"})
    spec = _sub(cfg, "spec", ArraySpec.from_dict)
    qubit = _sub(cfg, "qubit", QubitCircuitParams.from_dict)
    protocol = _sub(cfg, "protocol", Protocol.from_dict)
    method = cfg.get("method", "emission")
    if method not in _DYNAMICS_METHODS:
        raise ValidationError(f"config.method: unknown method '{method}'")
    run = _DYNAMICS_METHODS[method]
    sweep = cfg.get("sweep_omega_interact_hz")
    if getattr(args, "sweep", False) and sweep is None:
        raise ValidationError("--sweep requires config key "
                              "'sweep_omega_interact_hz'")
    if sweep is None:
        run(spec, qubit, protocol).to_csv(os.path.join(out, "trace.csv"))
        return ["trace.csv"]
    outputs = []
    index = []
    for i, f_hz in enumerate(sweep):
        p = dataclasses.replace(protocol, omega_interact=TWO_PI * float(f_hz))
        name = f"trace_{i:03d}.csv"
        run(spec, qubit, p).to_csv(os.path.join(out, name))
        outputs.append(name)
        index.append((float(f_hz), name))
    with open(os.path.join(out, "index.csv"), "w", encoding="utf-8") as fh:
        fh.write("omega_interact_hz,file\n")
        for f_hz, name in index:
            fh.write(f"{f_hz:.12e},{name}\n")
    outputs.append("index.csv")
    return outputs


def _cmd_disorder(cfg: dict, out: str, args) -> list:
    mode = args.mode
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    threads = args.threads
    if mode == "extinction":
        _check_keys(cfg, {"spec", "sigma_over_j", "n_realizations", "seed"},
                    {"spec", "sigma_over_j", "n_realizations"})
        spec = _sub(cfg, "spec", ArraySpec.from_dict)
        res = disorder_mod.extinction_curve(
            spec, np.asarray(cfg["sigma_over_j"], dtype=float),
            int(cfg["n_realizations"]), seed, threads=threads)
        res.to_csv(os.path.join(out, "extinction.csv"))
        return ["extinction.csv"]
    _check_keys(cfg, {"spec", "measured_delta_fsr_hz", "sigma_grid_hz",
                      "n_realizations", "seed"},
                {"spec", "measured_delta_fsr_hz", "sigma_grid_hz"})
    spec = _sub(cfg, "spec", ArraySpec.from_dict)
    cal = disorder_mod.calibrate_sigma(
        TWO_PI * float(cfg["measured_delta_fsr_hz"]), spec,
        TWO_PI * np.asarray(cfg["sigma_grid_hz"], dtype=float),
        n_realizations=int(cfg.get("n_realizations", 500)),
        seed=seed, threads=threads)
    cal.to_csv(os.path.join(out, "calibration_table.csv"))
    with open(os.path.join(out, "calibration.json"), "w", encoding="utf-8") as fh:
        json.dump({"sigma_estimate_hz": cal.sigma_estimate / TWO_PI,
                   "monotone": cal.monotone}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return ["calibration_table.csv", "calibration.json"]


# --------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slowline",
        description="Resonator-array slow-light waveguide toolkit")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, func, **extra_flags):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.set_defaults(func=func)
        return p

    add("band", _cmd_band)
    add("s21", _cmd_s21)
    add("taper-opt", _cmd_taper_opt)
    add("dressed", _cmd_dressed)
    p_dyn = add("dynamics", _cmd_dynamics)
    p_dyn.add_argument("--sweep", action="store_true")
    p_dis = add("disorder", _cmd_disorder)
    p_dis.add_argument("mode", choices=("extinction", "calibrate"))
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    started = datetime.now(timezone.utc).isoformat()
    try:
        cfg = parse_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        outputs = args.func(cfg, args.out, args)
    except ValidationError as exc:
        json.dump({"error": str(exc), "type": "validation",
                   "subcommand": args.subcommand}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except OSError as exc:
        json.dump({"error": str(exc), "type": "io",
                   "subcommand": args.subcommand}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    command = args.subcommand + (f" {args.mode}" if args.subcommand == "disorder" else "")
    _write_manifest(args.out, command, cfg, args.seed,
                    {args.config: _digest(args.config)}, outputs, started)
    return 0


if __name__ == "__main__":
    sys.exit(main())
