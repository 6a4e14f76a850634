"""Fixed-step integration of the projected opinion dynamics
``dz/dt = P_{T_K(z)}(-f(z))``.

Two explicit schemes are provided and cross-checked in the tests:

* ``projected-euler``: ``z+ = P_K(z - step * f(z))`` (default). Always
  feasible, and for ``step <= 2 / ||J||`` it is projected gradient descent
  on ``V = -W``, so ``V`` never increases.
* ``tangent-euler``: ``z+ = P_K(z + step * P_T(-f(z)))``, where the outer
  projection only removes roundoff and overshoot past a face.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core_model import ProblemInstance, growth_constant, potential, vector_field
from .errors import InfeasibleStart, StepTooLarge
from .feasible_set import (
    TAU_ACT,
    _cone_project,
    project_profile,
    require_feasible,
)

SCHEMES = ("projected-euler", "tangent-euler")


def max_step(inst: ProblemInstance) -> float:
    """Default step bound 1 / (2 ||J||)."""
    return 0.5 / inst.jacobian_norm


def lyapunov_slack(inst: ProblemInstance) -> float:
    """kappa = ||J|| * alpha, per-step slack scale for the V-monotonicity test."""
    return inst.jacobian_norm * growth_constant(inst)


@dataclass(frozen=True)
class SimConfig:
    step: float | None = None  # None -> max_step(inst)
    t_end: float = 200.0
    stop_residual: float = 1e-8
    record_every: int = 1
    scheme: str = "projected-euler"
    stall_window: float = 10.0  # simulated time between stall checks
    stall_rtol: float = 1e-3

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.step is not None and not self.step > 0:
            raise ValueError("step must be positive")
        if not self.t_end > 0 or not self.stop_residual > 0:
            raise ValueError("t_end and stop_residual must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray  # (K,)
    states: np.ndarray  # (K, n*m)
    potentials: np.ndarray  # (K,) W(z)
    residuals: np.ndarray  # (K,) r(z)
    terminated_by: str  # "residual" | "horizon" | "stall"
    step: float
    scheme: str

    def __len__(self) -> int:
        return self.times.size

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def lyapunov(self) -> np.ndarray:
        """V(z) = -W(z) along the samples."""
        return -self.potentials

    def samples(self):
        yield from zip(self.times, self.states, self.potentials, self.residuals)


def _residual_from_field(inst: ProblemInstance, Z: np.ndarray, F: np.ndarray) -> float:
    U = _cone_project(-F, Z, inst.costs, inst.budgets, TAU_ACT)
    return float(np.linalg.norm(U))


def residual(inst: ProblemInstance, z) -> float:
    """r(z) = ||P_{T_K(z)}(-f(z))||; zero exactly on the equilibrium set."""
    Z = inst.blocks(z)
    require_feasible(inst, Z)
    return _residual_from_field(inst, Z, vector_field(inst, Z))


def pds_velocity(inst: ProblemInstance, z) -> np.ndarray:
    """The PDS right-hand side P_{T_K(z)}(-f(z)), flat."""
    Z = inst.blocks(z)
    require_feasible(inst, Z)
    return _cone_project(-vector_field(inst, Z), Z, inst.costs, inst.budgets, TAU_ACT).ravel()


def better_response_margins(inst: ProblemInstance, z) -> np.ndarray:
    """Per-agent -f_i' P_{T_Ki}(-f_i); nonnegative at every feasible z."""
    Z = inst.blocks(z)
    F = vector_field(inst, Z)
    U = _cone_project(-F, Z, inst.costs, inst.budgets, TAU_ACT)
    return np.sum(-F * U, axis=1)


def _advance(inst, Z, F, delta, scheme):
    if scheme == "projected-euler":
        return project_profile(inst, Z - delta * F)
    U = _cone_project(-F, Z, inst.costs, inst.budgets, TAU_ACT)
    return project_profile(inst, Z + delta * U)


def step(inst: ProblemInstance, z, delta: float, scheme: str = "projected-euler") -> np.ndarray:
    """One explicit step from a feasible ``z``; returns the input layout.

    Raises StepTooLarge when ``delta * ||J|| > 2``, beyond which the explicit
    scheme can amplify errors and the descent property of V is lost.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if delta * inst.jacobian_norm > 2.0:
        raise StepTooLarge(f"step {delta:g} exceeds 2/||J|| = {2.0 / inst.jacobian_norm:g}")
    Z = inst.blocks(z)
    require_feasible(inst, Z)
    out = _advance(inst, Z, vector_field(inst, Z), delta, scheme)
    return out if np.ndim(z) == 2 else out.ravel()


def simulate(inst: ProblemInstance, z0, cfg: SimConfig = SimConfig()) -> Trajectory:
    """Integrate from a feasible ``z0`` until ``t_end``, ``r(z) <= stop_residual``
    or a stall (residual changing by less than ``stall_rtol``, relatively,
    over ``stall_window`` units of simulated time).

    The first and last states are always recorded.
    """
    Z = np.array(inst.blocks(z0), dtype=float)
    require_feasible(inst, Z, exc=InfeasibleStart)
    delta = max_step(inst) if cfg.step is None else float(cfg.step)
    if delta > max_step(inst) * (1 + 1e-12):
        raise StepTooLarge(f"step {delta:g} exceeds 1/(2||J||) = {max_step(inst):g}")

    n_max = int(math.ceil(cfg.t_end / delta))
    window = max(1, int(math.ceil(cfg.stall_window / delta)))
    times, states, pots, res = [], [], [], []

    def record(k, Z, r):
        times.append(k * delta)
        states.append(Z.ravel().copy())
        pots.append(potential(inst, Z))
        res.append(r)

    r_window = math.inf
    k = 0
    while True:
        F = vector_field(inst, Z)
        r = _residual_from_field(inst, Z, F)
        recorded = k % cfg.record_every == 0
        if recorded:
            record(k, Z, r)
        if r <= cfg.stop_residual:
            reason = "residual"
            break
        if k >= n_max:
            reason = "horizon"
            break
        if k % window == 0:
            # a growing residual means escape from a saddle, not a stall
            if k > 0 and abs(r - r_window) <= cfg.stall_rtol * r_window:
                reason = "stall"
                break
            r_window = r
        Z = _advance(inst, Z, F, delta, cfg.scheme)
        k += 1
    if not recorded:
        record(k, Z, r)

    return Trajectory(
        times=np.array(times),
        states=np.array(states),
        potentials=np.array(pots),
        residuals=np.array(res),
        terminated_by=reason,
        step=delta,
        scheme=cfg.scheme,
    )


def state_at(inst: ProblemInstance, z0, t: float, delta: float, scheme: str = "projected-euler") -> np.ndarray:
    """State after ``round(t / delta)`` fixed steps (no early stopping)."""
    Z = np.array(inst.blocks(z0), dtype=float)
    require_feasible(inst, Z, exc=InfeasibleStart)
    for _ in range(int(round(t / delta))):
        Z = _advance(inst, Z, vector_field(inst, Z), delta, scheme)
    return Z.ravel()


def refinement_gap(inst: ProblemInstance, z0, t: float, delta: float, scheme: str = "projected-euler") -> float:
    """||z_delta(t) - z_{delta/2}(t)||, the step-halving self-convergence diagnostic."""
    return float(np.linalg.norm(state_at(inst, z0, t, delta, scheme) - state_at(inst, z0, t, delta / 2, scheme)))
