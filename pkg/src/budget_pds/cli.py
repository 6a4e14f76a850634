"""Command-line entry point ``budget-pds``.

Exit codes: 0 ok, 2 config or input error, 3 runtime failure, 4 generation
failure. Error messages start with a machine-readable code.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from .config import (
    REGIMES,
    ConfigError,
    GenerationFailed,
    GeneratorSpec,
    config_from_instance,
    generate_instance,
    initial_profile,
    instance_from_config,
    load_config,
    sim_config_from_config,
)
from .equilibrium_solver import jacobian_definiteness, solve_equilibrium
from .errors import BudgetPDSError, DimensionMismatch, InstanceError
from .plotting import trajectory_svg
from .reporting import analyze_instance, dumps, read_trajectory_csv, trajectory_csv
from .pds_integrator import simulate

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_GENERATION = 0, 2, 3, 4


class _Fail(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


def _instance(path):
    try:
        cfg = load_config(path)
        return cfg, instance_from_config(cfg)
    except (ConfigError, InstanceError, DimensionMismatch) as exc:
        raise _Fail(EXIT_CONFIG, str(exc)) from None


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def cmd_simulate(args) -> int:
    cfg, inst = _instance(args.config)
    try:
        sim = sim_config_from_config(cfg)
        z0 = initial_profile(inst, cfg)
    except ConfigError as exc:
        raise _Fail(EXIT_CONFIG, str(exc)) from None
    except ValueError as exc:
        raise _Fail(EXIT_CONFIG, f"ConfigInvalid: {exc}") from None
    traj = simulate(inst, z0, sim)
    out = Path(args.out_dir)
    _write(out / "trajectory.csv", trajectory_csv(inst, traj))
    summary = {
        "terminated_by": traj.terminated_by,
        "final_time": float(traj.times[-1]),
        "final_profile": traj.final.reshape(inst.n, inst.m).tolist(),
        "residual": float(traj.residuals[-1]),
        "potential": float(traj.potentials[-1]),
        "step": traj.step,
        "scheme": traj.scheme,
        "samples": len(traj),
        "costs": inst.costs.tolist(),
        "budgets": inst.budgets.tolist(),
    }
    _write(out / "summary.json", dumps(summary))
    print(f"{traj.terminated_by}: t={traj.times[-1]:.6g} residual={traj.residuals[-1]:.3e} -> {out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    _, inst = _instance(args.config)
    text = dumps(analyze_instance(inst))
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_generate(args) -> int:
    try:
        spec = GeneratorSpec(n=args.n, m=args.m, seed=args.seed, regime=args.regime,
                             budget_scale=args.budget_scale, density=args.density)
    except ValueError as exc:
        raise _Fail(EXIT_CONFIG, f"ConfigInvalid: {exc}") from None
    try:
        inst = generate_instance(spec)
    except GenerationFailed as exc:
        raise _Fail(EXIT_GENERATION, str(exc)) from None
    cfg = config_from_instance(inst, generator={"n": spec.n, "m": spec.m, "seed": spec.seed,
                                                "regime": spec.regime, "budget_scale": spec.budget_scale,
                                                "density": spec.density, "prng": "numpy PCG64"})
    _write(Path(args.out), dumps(cfg))
    return EXIT_OK


def cmd_plot(args) -> int:
    try:
        header, rows = read_trajectory_csv(Path(args.traj).read_text())
    except (OSError, ValueError) as exc:
        raise _Fail(EXIT_CONFIG, f"MalformedTrajectory: {exc}") from None
    eq = costs = budgets = None
    if args.eq:
        try:
            doc = json.loads(Path(args.eq).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise _Fail(EXIT_CONFIG, f"MalformedEquilibrium: {exc}") from None
        # accepts an analyze report, its equilibrium section or a simulate summary
        section = doc.get("equilibrium", doc)
        eq = section.get("point", section.get("final_profile"))
        inst_doc = doc.get("instance", doc)
        if "agents" in inst_doc:
            costs = [a["costs"] for a in inst_doc["agents"]]
            budgets = [a["budget"] for a in inst_doc["agents"]]
        else:
            costs, budgets = doc.get("costs"), doc.get("budgets")
        if eq is None or np.size(eq) != rows.shape[1] - 3:
            raise _Fail(EXIT_CONFIG, "MalformedEquilibrium: no profile matching the trajectory")
    _write(Path(args.out), trajectory_svg(header, rows, equilibrium=eq, costs=costs, budgets=budgets))
    return EXIT_OK


def cmd_check(args) -> int:
    failed = 0
    if args.config:
        _, inst = _instance(args.config)
        method = "trajectory-limit" if jacobian_definiteness(inst) == "indefinite" else "potential-qp"
        rep = solve_equilibrium(inst, method)
        ok = rep.certified and rep.nash_certified is not False
        failed += not ok
        print(f"[{'PASS' if ok else 'FAIL'}] config {args.config}: {method} equilibrium, "
              f"min VI margin {np.min(rep.vi_certificate):.2e}, "
              f"Nash residuals {'n/a' if rep.nash_residuals is None else f'{np.max(rep.nash_residuals):.2e}'}")
    if not args.skip_suite:
        for res in acceptance.run_all():
            print(res.line(), flush=True)
            failed += not res.passed
    print(f"{'all checks passed' if failed == 0 else f'{failed} check(s) failed'}")
    return EXIT_OK if failed == 0 else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="budget-pds", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="integrate the dynamics; writes trajectory.csv and summary.json")
    s.add_argument("--config", required=True)
    s.add_argument("--out-dir", default=".")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("analyze", help="structural and equilibrium report as JSON")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="output path (default: stdout)")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("generate", help="seeded random instance satisfying a regime")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--regime", choices=REGIMES, default="a1")
    s.add_argument("--budget-scale", type=float, default=1.0)
    s.add_argument("--density", type=float, default=0.6)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("plot", help="render a trajectory CSV as SVG")
    s.add_argument("--traj", required=True)
    s.add_argument("--eq", help="analyze report or simulate summary holding the equilibrium")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_plot)

    s = sub.add_parser("check", help="run the acceptance suite (and certify a config's equilibrium)")
    s.add_argument("--config")
    s.add_argument("--skip-suite", action="store_true", help="only certify the config")
    s.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.status
    except BudgetPDSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
