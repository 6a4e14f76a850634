"""JSON run configurations and seeded instance generation."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from .core_model import ProblemInstance, build_instance
from .errors import BudgetPDSError, InstanceError
from .pds_integrator import SCHEMES, SimConfig
from .structure_analysis import classify

_num = {"type": "number"}
_vec = {"type": "array", "items": _num, "minItems": 1}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["n", "m", "adjacency", "agents"],
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "m": {"type": "integer", "minimum": 1},
        "adjacency": {"type": "array", "items": _vec, "minItems": 1},
        "agents": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["preferences", "weights", "costs", "budget"],
                "properties": {
                    "preferences": _vec,
                    "weights": _vec,
                    "costs": _vec,
                    "budget": _num,
                },
            },
        },
        "simulation": {
            "type": "object",
            "properties": {
                "step": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "t_end": {"type": "number", "exclusiveMinimum": 0},
                "stop_residual": {"type": "number", "exclusiveMinimum": 0},
                "record_every": {"type": "integer", "minimum": 1},
                "scheme": {"enum": list(SCHEMES)},
                "initial": {
                    "oneOf": [
                        {"enum": ["zeros", "random"]},
                        {"type": "array", "items": _vec},
                    ]
                },
                "seed": {"type": "integer", "minimum": 0},
            },
        },
    },
}


class ConfigError(BudgetPDSError, ValueError):
    code = "ConfigInvalid"


class GenerationFailed(BudgetPDSError, RuntimeError):
    code = "GenerationFailed"


def validate_config(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    n, m = cfg["n"], cfg["m"]
    if len(cfg["adjacency"]) != n or any(len(row) != n for row in cfg["adjacency"]):
        raise ConfigError(f"adjacency must be {n}x{n}")
    if len(cfg["agents"]) != n:
        raise ConfigError(f"expected {n} agents, got {len(cfg['agents'])}")
    for i, ag in enumerate(cfg["agents"]):
        for key in ("preferences", "weights", "costs"):
            if len(ag[key]) != m:
                raise ConfigError(f"agents/{i}/{key} must have length {m}")


def load_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    validate_config(cfg)
    return cfg


def instance_from_config(cfg: dict) -> ProblemInstance:
    agents = cfg["agents"]
    return build_instance(
        cfg["adjacency"],
        [a["preferences"] for a in agents],
        [a["weights"] for a in agents],
        [a["costs"] for a in agents],
        [a["budget"] for a in agents],
    )


def sim_config_from_config(cfg: dict) -> SimConfig:
    sim = cfg.get("simulation", {})
    keys = ("step", "t_end", "stop_residual", "record_every", "scheme")
    return SimConfig(**{k: sim[k] for k in keys if k in sim})


def random_feasible_profile(inst: ProblemInstance, rng: np.random.Generator) -> np.ndarray:
    """A random point of K: random direction per agent, scaled to a random
    fraction of the budget."""
    U = rng.random((inst.n, inst.m))
    frac = rng.random(inst.n)
    spend = np.sum(inst.costs * U, axis=1)
    return (U * (frac * inst.budgets / spend)[:, None]).ravel()


def initial_profile(inst: ProblemInstance, cfg: dict) -> np.ndarray:
    sim = cfg.get("simulation", {})
    init = sim.get("initial", "zeros")
    if isinstance(init, list):
        z0 = np.array(init, dtype=float)
        if z0.shape != (inst.n, inst.m):
            raise ConfigError(f"simulation/initial must be {inst.n}x{inst.m}")
        return z0.ravel()
    if init == "random":
        return random_feasible_profile(inst, np.random.default_rng(sim.get("seed", 0)))
    return np.zeros(inst.dim)


def config_from_instance(inst: ProblemInstance, simulation: dict | None = None, **extra) -> dict:
    cfg = inst.to_dict()
    cfg["simulation"] = simulation or {
        "step": None,
        "t_end": 200.0,
        "stop_residual": 1e-8,
        "scheme": "projected-euler",
        "initial": "zeros",
        "seed": 0,
    }
    cfg.update(extra)
    return cfg


# ---------------------------------------------------------------------------
# generator

REGIMES = ("a1", "a2", "a3", "signed")
MAX_ATTEMPTS = 10_000


@dataclass(frozen=True)
class GeneratorSpec:
    n: int
    m: int
    seed: int = 0
    regime: str = "a1"
    budget_scale: float = 1.0
    density: float = 0.6

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}")
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")
        if not 0 < self.density <= 1:
            raise ValueError("density must lie in (0, 1]")
        if not self.budget_scale > 0:
            raise ValueError("budget_scale must be positive")


def _draw(spec: GeneratorSpec, rng: np.random.Generator):
    n, m = spec.n, spec.m
    upper = np.triu(rng.random((n, n)) < spec.density, k=1)
    mag = rng.uniform(0.2, 2.0, size=(n, n))
    neg_prob = {"a1": 0.0, "a2": 0.4, "a3": 0.3, "signed": 0.5}[spec.regime]
    sign = np.where(rng.random((n, n)) < neg_prob, -1.0, 1.0)
    A = np.triu(upper * mag * sign, k=1)
    A = A + A.T
    neg_mass = np.sum(np.abs(np.minimum(A, 0.0)), axis=1)
    if spec.regime == "a2":
        # min_j w_i^j > 2 * (enemy mass), with margin
        base = 2.0 * neg_mass * rng.uniform(1.2, 2.0, size=n)
        W = base[:, None] + rng.uniform(0.5, 3.0, size=(n, m))
    else:
        W = rng.uniform(0.5, 3.0, size=(n, m))
    P = rng.uniform(0.0, 10.0, size=(n, m))
    C = rng.uniform(0.5, 2.0, size=(n, m))
    B = spec.budget_scale * (0.5 + rng.uniform(0.3, 1.5, size=n) * np.sum(C * P, axis=1))
    return A, P, W, C, B


def _regime_ok(spec: GeneratorSpec, inst: ProblemInstance) -> bool:
    rel = classify(inst)
    if spec.regime == "a1":
        return rel.a1
    if spec.regime == "a2":
        return rel.a2
    if spec.regime == "a3":
        return rel.a3
    return spec.n == 1 or bool(np.any(inst.influence < 0))


def generate_instance(spec: GeneratorSpec) -> ProblemInstance:
    """Rejection-sample an instance satisfying the standing assumptions and
    the requested regime. Uses numpy's PCG64 generator seeded with ``spec.seed``."""
    rng = np.random.default_rng(spec.seed)
    for _ in range(MAX_ATTEMPTS):
        A, P, W, C, B = _draw(spec, rng)
        try:
            inst = build_instance(A, P, W, C, B)
        except InstanceError:
            continue
        if _regime_ok(spec, inst):
            return inst
    raise GenerationFailed(f"no {spec.regime} instance found in {MAX_ATTEMPTS} attempts for {spec}")
