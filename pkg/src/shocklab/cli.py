"""Experiment harness: config ingestion, run orchestration, deterministic
CSV/JSON outputs.

    shocklab <command> --config <path> [--out <dir>] [--seed <u64>]

Commands: profile, evolve, verify-lemmas, sweep.  Exit status 0 on success,
2 on config errors, 3 on runtime aborts (blow-up, radius violation,
monotonicity violation); aborts still write the partial diagnostics.
The dissipation strength nu enters only here: evolve maps x -> x/nu,
t -> t/nu onto the nu = 1 core and un-maps the t and gamma columns on
output, so nu-runs reproduce the core run exactly.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, constants
from .config import (COMMANDS, build_model, initial_field, load_config,
                     sweep_points, validate_scalar_config)
from .errors import ConfigError, ShockLabError
from .functionals import compute_x_space
from .inequalities import (TestFunctionFamily, functional_sign_search,
                           gn_suite, poincare_sweep, y_bounds_search)
from .model import normalize_flux
from .profile import build_weight, solve_profile
from .shift import DiagnosticsRecord, evolve_coupled
from .solver import Grid

THREADS_ENV = "SHOCKLAB_THREADS"


def _fmt(value):
    """Shortest round-trip decimal for floats; plain text otherwise."""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_manifest(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _manifest(cfg, extra):
    return {
        "config": cfg.as_dict(),
        "constants": constants.load(),
        "version": __version__,
        **extra,
    }


def _prepare(cfg):
    """Shared setup: normalized model, internal (nu=1) grid, profile, weight."""
    base = build_model(cfg.model)
    model = normalize_flux(base, cfg.eps, -cfg.eps)
    L_int = cfg.L_dom / cfg.nu
    grid = Grid(L_dom=L_int, n_cells=cfg.n_cells)
    prof = solve_profile(model, cfg.eps, grid)
    weight = build_weight(prof, model, cfg.lam)
    return model, grid, prof, weight


def cmd_profile(cfg, out_dir):
    model, grid, prof, weight = _prepare(cfg)
    rows = [(format(x, ".17g"), format(s, ".17g"))
            for x, s in zip(grid.x * cfg.nu, prof.s_values)]
    with open(out_dir / "profile.csv", "w") as fh:
        fh.write("x,s\n")
        for x, s in rows:
            fh.write(f"{x},{s}\n")
    write_manifest(out_dir / "manifest.json", _manifest(cfg, {
        "derived": {"Lambda": model.Lambda, "dx_internal": grid.dx,
                    "lambda": weight.lam, "L_dom_internal": grid.L_dom},
    }))
    return 0


def _internal_evolve_cfg(cfg):
    """Map the physical config onto the nu = 1 core (x -> x/nu, t -> t/nu)."""
    doc = cfg.as_dict()
    nu = cfg.nu
    doc.update({
        "nu": 1.0,
        "L_dom": cfg.L_dom / nu,
        "T": cfg.T / nu,
        "output_interval": cfg.output_interval / nu,
        "width": cfg.width / nu if cfg.kind in ("gaussian", "fourier") else cfg.width,
        "center": cfg.center / nu,
        "amplitude": (cfg.amplitude / nu if cfg.kind == "translation"
                      else cfg.amplitude),
    })
    doc["custom_samples"] = cfg.custom_samples
    from .config import config_from_dict
    return config_from_dict(doc)


def run_evolution(cfg):
    """Execute one evolve run; returns (records, result_or_None, model)."""
    internal = _internal_evolve_cfg(cfg)
    model, grid, prof, weight = _prepare(internal)
    field0 = initial_field(internal, prof)
    result = evolve_coupled(model, prof, weight, field0, internal.T,
                            eps0=internal.eps0, cfl=internal.cfl,
                            scheme=internal.scheme,
                            output_interval=internal.output_interval)
    return result, model, grid


def _diag_rows(records, nu):
    rows = []
    for r in records:
        vals = r.csv_values()
        vals[0] = vals[0] * nu   # t
        vals[1] = vals[1] * nu   # gamma
        rows.append(vals)
    return rows


def cmd_evolve(cfg, out_dir):
    try:
        result, model, grid = run_evolution(cfg)
    except ConfigError:
        raise
    except ShockLabError as exc:
        partial = getattr(exc, "partial_result", None)
        diag_path = out_dir / "diagnostics.csv"
        if partial is not None:
            write_csv(diag_path, DiagnosticsRecord.CSV_COLUMNS,
                      _diag_rows(partial.records, cfg.nu))
        write_manifest(out_dir / "manifest.json", _manifest(cfg, {
            "status": type(exc).__name__, "error": str(exc),
        }))
        print(f"run aborted: {exc}; diagnostics at {diag_path}", file=sys.stderr)
        return 3
    write_csv(out_dir / "diagnostics.csv", DiagnosticsRecord.CSV_COLUMNS,
              _diag_rows(result.records, cfg.nu))
    write_manifest(out_dir / "manifest.json", _manifest(cfg, {
        "status": "ok",
        "derived": {
            "Lambda": model.Lambda, "dt_internal": result.dt,
            "dx_internal": grid.dx, "steps": result.steps,
            "max_abs_gamma_dot": result.max_abs_gamma_dot,
            "worst_slack": result.worst_slack,
            "gamma_cap": result.gamma_cap,
            "final_E": result.final.report.E,
        },
    }))
    return 0


def cmd_verify_lemmas(cfg, out_dir):
    model, grid, prof, weight = _prepare(cfg)
    family = TestFunctionFamily(kind="mixed", seed=cfg.seed)
    n = cfg.samples
    poin = poincare_sweep(family, C1=4.0, delta_grid=[cfg.delta],
                          n_samples=n, n_grid=513)
    gn = gn_suite(TestFunctionFamily(kind="mixed", seed=cfg.seed + 1),
                  h=0.5, L=1.0, p=2, q=0.5, n_samples=min(n, 2000))
    yb = y_bounds_search(model, prof, weight,
                         TestFunctionFamily(kind="mixed", seed=cfg.seed + 2),
                         n_samples=n, n_anneal=n)
    sign = functional_sign_search(model, prof, weight,
                                  TestFunctionFamily(kind="mixed",
                                                     seed=cfg.seed + 3),
                                  eps0=cfg.eps0, n_samples=n, n_anneal=n)
    violations = (poin.violations + gn.violations + yb.violations
                  + sign.violations)
    write_csv(out_dir / "violations.csv",
              ("seed", "lemma", "parameters", "value", "hypothesis_ok"),
              [(v.seed, v.lemma, v.parameters, v.value, v.hypothesis_ok)
               for v in violations])
    write_manifest(out_dir / "manifest.json", _manifest(cfg, {
        "status": "ok" if not violations else "violations",
        "summary": {
            "poincare_max": poin.max_value,
            "poincare_delta_threshold": poin.delta_threshold,
            "gn_max_ratio": gn.max_ratio,
            "y_bounds_min_margin": yb.min_margin,
            "sign_search_max": sign.max_value,
            "sign_search_tol": sign.tol,
        },
    }))
    if violations:
        print(f"{len(violations)} violation(s); see {out_dir/'violations.csv'}",
              file=sys.stderr)
        return 3
    return 0


def _sweep_one(args):
    doc, out_sub = args
    from .config import config_from_dict
    cfg = config_from_dict(doc)
    out_dir = Path(out_sub)
    out_dir.mkdir(parents=True, exist_ok=True)
    code = cmd_evolve(cfg, out_dir)
    row = {"status": code}
    manifest = json.loads((out_dir / "manifest.json").read_text())
    derived = manifest.get("derived", {})
    diag = out_dir / "diagnostics.csv"
    E0 = Ef = float("nan")
    if diag.exists():
        lines = diag.read_text().splitlines()
        if len(lines) > 1:
            header = lines[0].split(",")
            e_idx = header.index("E")
            E0 = float(lines[1].split(",")[e_idx])
            Ef = float(lines[-1].split(",")[e_idx])
    row.update({
        "final_E_ratio": Ef / E0 if E0 > 0 else 0.0,
        "max_abs_gamma_dot": derived.get("max_abs_gamma_dot", float("nan")),
        "worst_slack": derived.get("worst_slack", float("nan")),
    })
    return row


def cmd_sweep(cfg, out_dir):
    points = sweep_points(cfg)
    jobs = []
    for i, pt in enumerate(points):
        doc = pt.as_dict()
        doc["custom_samples"] = pt.custom_samples
        jobs.append((doc, str(out_dir / f"run_{i:03d}")))
    workers = int(os.environ.get(THREADS_ENV, "1") or "1")
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(j) for j in jobs]
    header = ["run", "eps", "nu", "lambda", "eps0", "n_cells", "T",
              "kind", "amplitude", "width", "center", "seed", "status",
              "final_E_ratio", "max_abs_gamma_dot", "worst_slack"]
    rows = []
    for i, (pt, res) in enumerate(zip(points, results)):
        d = pt.as_dict()
        rows.append([i, d["eps"], d["nu"], d["lambda"], d["eps0"],
                     d["n_cells"], d["T"], d["kind"], d["amplitude"],
                     d["width"], d["center"], d["seed"], res["status"],
                     res["final_E_ratio"], res["max_abs_gamma_dot"],
                     res["worst_slack"]])
    write_csv(out_dir / "sweep.csv", header, rows)
    write_manifest(out_dir / "manifest.json", _manifest(cfg, {
        "status": "ok", "runs": len(points),
    }))
    return 0


_COMMANDS = {
    "profile": cmd_profile,
    "evolve": cmd_evolve,
    "verify-lemmas": cmd_verify_lemmas,
    "sweep": cmd_sweep,
}


def run(cfg, out_dir):
    """Execute a validated config; returns the process exit status."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return _COMMANDS[cfg.command](cfg, out_dir)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="shocklab", description=__doc__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default="out")
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if cfg.command and cfg.command != args.command and "command" in \
                json.loads(open(args.config).read()):
            raise ConfigError(
                f"config command {cfg.command!r} conflicts with CLI "
                f"{args.command!r}", field="command")
        cfg.command = args.command
        if args.seed is not None:
            cfg.seed = args.seed
        cfg = cfg.resolved()
        if cfg.command == "sweep":
            for pt in sweep_points(cfg):
                validate_scalar_config(pt.resolved())
        else:
            validate_scalar_config(cfg)
    except ConfigError as exc:
        loc = f" (field: {exc.field})" if exc.field else ""
        loc += f" (line: {exc.line})" if exc.line else ""
        print(f"config error: {exc}{loc}", file=sys.stderr)
        return 2
    try:
        return run(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ShockLabError as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
