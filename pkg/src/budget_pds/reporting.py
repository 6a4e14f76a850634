"""Serialisation of trajectories and analysis results.

Agent and topic labels in every file are 1-based (``z_1_1`` is agent 1,
topic 1); the Python API is 0-based.
"""

from __future__ import annotations

import io
import json

import numpy as np

from .core_model import ProblemInstance
from .equilibrium_solver import (
    EquilibriumReport,
    jacobian_definiteness,
    solve_equilibrium,
)
from .errors import SingularJacobian, ZeroInfluenceSum
from .equilibrium_solver import unconstrained_equilibrium
from .pds_integrator import Trajectory
from .structure_analysis import (
    check_necessary_conditions,
    classify,
    partition_agents,
    sufficient_exhaust,
    sufficient_not_exhaust,
)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def trajectory_header(inst: ProblemInstance) -> list[str]:
    cols = [f"z_{i + 1}_{j + 1}" for i in range(inst.n) for j in range(inst.m)]
    return ["t", *cols, "potential", "residual"]


def trajectory_csv(inst: ProblemInstance, traj: Trajectory) -> str:
    buf = io.StringIO()
    buf.write(",".join(trajectory_header(inst)) + "\n")
    for t, z, w, r in traj.samples():
        buf.write(",".join([_fmt(t), *map(_fmt, z), _fmt(w), _fmt(r)]) + "\n")
    return buf.getvalue()


def read_trajectory_csv(text: str) -> tuple[list[str], np.ndarray]:
    """Parse a trajectory CSV into (header, rows). Raises ValueError if malformed."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise ValueError("trajectory CSV has no data rows")
    header = lines[0].split(",")
    if header[0] != "t" or header[-2:] != ["potential", "residual"] or len(header) < 4:
        raise ValueError("unexpected trajectory CSV header")
    try:
        rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    except ValueError as exc:
        raise ValueError(f"non-numeric CSV entry: {exc}") from None
    if rows.ndim != 2 or rows.shape[1] != len(header):
        raise ValueError("ragged trajectory CSV")
    return header, rows


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _labels(idx) -> list[int]:
    return [int(i) + 1 for i in idx]


def equilibrium_dict(inst: ProblemInstance, rep: EquilibriumReport) -> dict:
    return {
        "method": rep.method,
        "point": rep.point.reshape(inst.n, inst.m).tolist(),
        "potential": rep.potential_value,
        "vi_certificate": rep.vi_certificate.tolist(),
        "vi_certified": rep.certified,
        "nash_residuals": None if rep.nash_residuals is None else rep.nash_residuals.tolist(),
        "nash_certified": rep.nash_certified,
        "uniqueness": rep.uniqueness,
        "iterations": rep.iterations,
        "notes": list(rep.notes),
    }


def analyze_instance(inst: ProblemInstance) -> dict:
    """Full structural and equilibrium analysis, keys in a fixed order."""
    rel = classify(inst)
    definiteness = jacobian_definiteness(inst)
    try:
        q_star = unconstrained_equilibrium(inst)
    except SingularJacobian:
        q_star = None
    method = "trajectory-limit" if definiteness == "indefinite" else "potential-qp"
    rep = solve_equilibrium(inst, method)
    Z = rep.point.reshape(inst.n, inst.m)
    part = partition_agents(inst, Z)

    lemmas: dict = {"applicable": rel.a1}
    if rel.a1:
        lemmas["necessary"] = [
            {"agent": v.agent + 1, "holds": v.holds, "value": v.value, "condition": v.detail}
            for v in check_necessary_conditions(inst, Z, part)
        ]
        not_exhaust = []
        for i in range(inst.n):
            v = sufficient_not_exhaust(inst, i)
            not_exhaust.append({
                "agent": i + 1,
                "fired": v.holds,
                "c_upsilon": v.value,
                "budget": float(inst.budgets[i]),
                "consistent": (not v.holds) or i in part.non_exhausting,
            })
        exhaust = []
        for i in range(inst.n):
            for j in range(inst.m):
                try:
                    v = sufficient_exhaust(inst, i, j, q_star)
                except (ZeroInfluenceSum, TypeError, ValueError):
                    exhaust.append({"agent": i + 1, "topic": j + 1, "fired": None, "threshold": None})
                    continue
                exhaust.append({
                    "agent": i + 1,
                    "topic": j + 1,
                    "fired": v.holds,
                    "threshold": v.value,
                    "q_star": float(q_star.reshape(inst.n, inst.m)[i, j]),
                    "consistent": (not v.holds) or i in part.exhausting,
                })
        lemmas["not_exhaust"] = not_exhaust
        lemmas["exhaust"] = exhaust

    return {
        "instance": inst.to_dict(),
        "relations": {
            "A1": rel.a1,
            "A2": rel.a2,
            "A3": rel.a3,
            "gerschgorin_pd": rel.gerschgorin_pd,
            "enemies": [_labels(sorted(e)) for e in rel.enemies],
            "friends": [_labels(sorted(f)) for f in rel.friends],
        },
        "definiteness": definiteness,
        "q_star": None if q_star is None else q_star.reshape(inst.n, inst.m).tolist(),
        "equilibrium": equilibrium_dict(inst, rep),
        "partition": {
            "exhausting": _labels(part.exhausting),
            "non_exhausting": _labels(part.non_exhausting),
            "lambda_star": {str(i + 1): v for i, v in part.lambda_star.items()},
            "support": [_labels(s) for s in part.support],
        },
        "lemmas": lemmas,
    }
