"""Command-line driver: configuration ingestion and pipeline orchestration.

Subcommands: gen, barrier, solve, audit, mass, pipeline, experiment.
Exit codes: 0 success, 2 configuration error, 3 energy-condition violation,
4 solver failure, 5 audit failure (artifacts are still written).
The output directory comes from --out, overridden by $JANGLAB_OUT.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import jang_solver
from .barrier import (BarrierProfile, barrier_csv, find_r0,
                      default_r0_candidates)
from .capillary import select_capillary_config
from .errors import (ConfigFailure, DecViolation, GenerationFailure,
                     InvalidArgument, JanglabError, NoAdmissibleR0)
from .geometry import (constraint_fields, dataset_from_json, make_dataset,
                       validate_dataset)
from .grids import build_grid
from .mass import experiment_csv, fit_alpha, positivity_experiment
from .pipeline import (SCHEDULE_FACTORS, default_grid, full_pipeline,
                       run_pipeline_on)
from .report import emit_report, write_artifact

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEC = 3
EXIT_SOLVER = 4
EXIT_AUDIT = 5

def _solver_error_types():
    from .errors import (ContinuationFailure, ExhaustionNonconvergence,
                         NewtonDivergence, SingularJacobian,
                         NumericalDegeneracy)
    return (ContinuationFailure, ExhaustionNonconvergence, NewtonDivergence,
            NoAdmissibleR0, SingularJacobian, GenerationFailure,
            NumericalDegeneracy, ConfigFailure)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="janglab",
        description="Radial laboratory for capillary-regularized Jang "
                    "solves and positivity audits")
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--out", default="janglab-out",
                   help="output directory (overridden by $JANGLAB_OUT)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--grid-n", type=int, help="override grid interval count")
    p.add_argument("--tol", type=float, help="override solver tolerance scale")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel datasets for the experiment subcommand")
    p.add_argument("command",
                   choices=["gen", "barrier", "solve", "audit", "mass",
                            "pipeline", "experiment"])
    return p


def load_config(args) -> dict:
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise InvalidArgument("config root must be a JSON object")
    if args.seed is not None:
        cfg.setdefault("dataset", {})["seed"] = args.seed
    if args.grid_n is not None:
        cfg.setdefault("grid", {})["n_intervals"] = args.grid_n
    if args.tol is not None:
        cfg["tol"] = args.tol
    return cfg


def resolve_out(args) -> str:
    return os.environ.get("JANGLAB_OUT") or args.out


def _grid_from_config(cfg):
    g = cfg.get("grid", {})
    policy = g.get("policy", "uniform")
    return build_grid(float(g.get("r_max", 512.0)),
                      int(g.get("n_intervals", 2048)),
                      policy, g.get("stretch"))


def _dataset_from_config(cfg, grid):
    ds = cfg.get("dataset", {})
    if "samples" in ds:
        return dataset_from_json(ds)[0]
    family = ds.get("family", "perturbed-dec")
    n = int(ds.get("n", 4))
    return make_dataset(family, n, ds.get("params", {}), grid=grid,
                        seed=int(ds.get("seed", 0)))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = resolve_out(args)
    try:
        cfg = load_config(args)
    except (OSError, json.JSONDecodeError, InvalidArgument) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        grid = _grid_from_config(cfg)
        if args.command == "experiment":
            exp = cfg.get("experiment", {})
            report = positivity_experiment(
                int(exp.get("n", 4)), int(exp.get("count", 20)),
                int(exp.get("seed", cfg.get("dataset", {}).get("seed", 1))),
                grid=grid, jobs=args.jobs,
                stability_count=int(exp.get("stability_count", 10)))
            write_artifact(out, "experiment.csv", experiment_csv(report))
            write_artifact(out, "experiment.json", report)
            return EXIT_OK if report["passed"] else EXIT_AUDIT
        data = _dataset_from_config(cfg, grid)
    except (InvalidArgument, KeyError, ValueError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DecViolation as exc:
        print(f"energy-condition violation: {exc}", file=sys.stderr)
        return EXIT_DEC
    except _solver_error_types() as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    seed = int(cfg.get("dataset", {}).get("seed", 0))
    try:
        if args.command == "gen":
            validation = validate_dataset(data, grid)
            write_artifact(out, "dataset.json", data.spec_dict(grid))
            write_artifact(out, "profiles.csv", data.profiles_csv(grid))
            write_artifact(out, "validation.json", validation)
            return EXIT_OK

        if args.command == "barrier":
            r0 = find_r0(data, grid, cfg.get("r0_candidates")
                         or default_r0_candidates(grid))
            bp = BarrierProfile(r0=r0, n=data.n)
            samples = np.geomspace(1.5 * r0, 64.0 * r0, 200)
            write_artifact(out, "barrier.csv", barrier_csv(bp, samples))
            write_artifact(out, "barrier.json", {"r0": r0, "n": data.n})
            return EXIT_OK

        if args.command == "mass":
            alpha, fit = fit_alpha(data, grid)
            write_artifact(out, "mass.json", {
                "alpha": alpha,
                "fit": {"exponent": fit.exponent,
                        "amplitude": fit.amplitude,
                        "fit_window": list(fit.fit_window),
                        "rms_residual": fit.rms_residual,
                        "n_points": fit.n_points}})
            return EXIT_OK

        if args.command == "solve":
            r0 = find_r0(data, grid, cfg.get("r0_candidates")
                         or default_r0_candidates(grid))
            config = select_capillary_config(data, r0, grid)
            factors = cfg.get("schedule_factors", list(SCHEDULE_FACTORS))
            schedule = [f * r0 for f in factors if f * r0 <= grid.r_max]
            limit = jang_solver.exhaustion_solve(data, config, schedule, grid)
            lines = ["r,u"]
            for ri, ui in zip(grid.nodes, limit.u):
                lines.append(f"{float(ri)!r},{float(ui)!r}")
            write_artifact(out, "solution.csv", "\n".join(lines) + "\n")
            write_artifact(out, "trace.json", {"trace": limit.trace,
                                               "schedule": schedule})
            return EXIT_OK

        # audit and pipeline both run the full chain; audit emits only the
        # audit report, pipeline emits everything
        results = run_pipeline_on(
            data, grid, seed=seed,
            stability_count=int(cfg.get("stability_count", 10)),
            schedule_factors=cfg.get("schedule_factors", SCHEDULE_FACTORS),
            r0_candidates=cfg.get("r0_candidates"))
        results["config_echo"] = cfg
        if args.command == "audit":
            write_artifact(out, "audits.json",
                           {k: v for k, v in results.items()
                            if k != "arrays"})
        else:
            emit_report(results, out)
        return EXIT_OK if results["audits_passed"] else EXIT_AUDIT

    except DecViolation as exc:
        print(f"energy-condition violation: {exc}", file=sys.stderr)
        emit_report({"error": str(exc), "config_echo": cfg}, out)
        return EXIT_DEC
    except _solver_error_types() as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        emit_report({"error": str(exc), "config_echo": cfg}, out)
        return EXIT_SOLVER
    except JanglabError as exc:
        print(f"audit failure: {exc}", file=sys.stderr)
        emit_report({"error": str(exc), "config_echo": cfg}, out)
        return EXIT_AUDIT


if __name__ == "__main__":
    sys.exit(main())
