"""Equilibrium computation and certification.

Three independent routes to a point of the equilibrium set:

* ``potential-qp``: projected gradient ascent on W over K (needs J PSD, in
  which case equilibria are exactly the maximisers of W);
* ``best-response``: Gauss-Seidel sweeps of exact best responses (needs no
  antagonistic links, so every best response is a weighted projection);
* ``trajectory-limit``: integrate the PDS until the residual vanishes.

Whatever the route, the returned point is certified by ``verify_vi``, which
is exact for an affine field over a polytope: the per-agent linear form
``<f_i(z), x - z_i>`` attains its minimum over K_i at a vertex.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core_model import ProblemInstance, potential, vector_field
from .errors import (
    AssumptionViolated,
    NoConvergence,
    NonpositiveDTilde,
    NotPSD,
    SingularJacobian,
)
from .feasible_set import (
    agent_polytopes,
    project_profile,
    project_weighted,
    require_feasible,
)
from .pds_integrator import SimConfig, simulate

METHODS = ("potential-qp", "best-response", "trajectory-limit")
VI_TOL = 1e-7
NASH_TOL = 1e-7
MAX_ITER = 1_000_000


@dataclass(frozen=True, eq=False)
class NeighborPreference:
    """Agent i's utility rewritten as -1/2 ||z_i - p_tilde||^2_{D_tilde} - delta."""

    d_tilde: np.ndarray  # (m,) w_i + sum_k a_ik
    p_tilde: np.ndarray  # (m,)
    delta: float


@dataclass(frozen=True, eq=False)
class EquilibriumReport:
    point: np.ndarray  # flat (n*m,)
    vi_certificate: np.ndarray  # (n,) worst vertex margin per agent
    nash_residuals: np.ndarray | None  # (n,), None when a best response is undefined
    method: str
    potential_value: float
    iterations: int
    uniqueness: str  # "unique" | "unknown"
    notes: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return bool(np.all(self.vi_certificate >= -VI_TOL))

    @property
    def nash_certified(self) -> bool | None:
        if self.nash_residuals is None:
            return None
        return bool(np.all(self.nash_residuals <= NASH_TOL))


def neighbor_preference(inst: ProblemInstance, i: int, z) -> NeighborPreference:
    """D_tilde_i, p_tilde_i(z_-i) and Delta_i(z_-i); only z_-i is read."""
    Z = inst.blocks(z)
    a = inst.influence[i].copy()
    a[i] = 0.0
    w = inst.weights[i]
    d_tilde = w + a.sum()
    pull = w * inst.preferences[i] + a @ Z
    with np.errstate(divide="ignore", invalid="ignore"):
        p_tilde = pull / d_tilde
    delta = 0.5 * (
        np.sum(w * inst.preferences[i] ** 2)
        + np.sum(a * np.sum(Z**2, axis=1))
        - np.sum(d_tilde * p_tilde**2)
    )
    return NeighborPreference(d_tilde=d_tilde, p_tilde=p_tilde, delta=float(delta))


def unconstrained_equilibrium(inst: ProblemInstance) -> np.ndarray:
    """q* solving J q = D p."""
    J = inst.matrices.jacobian
    Dp = inst.matrices.drift
    try:
        q = np.linalg.solve(J, Dp)
    except np.linalg.LinAlgError as exc:
        raise SingularJacobian("J is singular") from exc
    if np.linalg.cond(J) > 1e14 or np.linalg.norm(J @ q - Dp) > 1e-9 * max(np.linalg.norm(Dp), 1e-300):
        raise SingularJacobian(f"J is numerically singular (cond {np.linalg.cond(J):.2e})")
    return q


def best_response(inst: ProblemInstance, i: int, z) -> np.ndarray:
    """argmax over K_i of U_i(., z_-i), i.e. the D_tilde-weighted projection of p_tilde."""
    npref = neighbor_preference(inst, i, z)
    if np.any(npref.d_tilde <= 0):
        raise NonpositiveDTilde(
            f"agent {i}: w_i + sum_k a_ik has a nonpositive entry, utility is not strictly concave"
        )
    poly = agent_polytopes(inst)[i]
    return project_weighted(poly, npref.d_tilde, npref.p_tilde)


def verify_vi(inst: ProblemInstance, z) -> np.ndarray:
    """Per-agent min over the vertices x of K_i of <f_i(z), x - z_i>."""
    Z = inst.blocks(z)
    require_feasible(inst, Z)
    F = vector_field(inst, Z)
    # origin vertex, then (B_i / c_i^j) e_j
    at_origin = -np.sum(F * Z, axis=1)
    at_axes = F * (inst.budgets[:, None] / inst.costs) + at_origin[:, None]
    return np.minimum(at_origin, at_axes.min(axis=1))


def verify_nash(inst: ProblemInstance, z) -> np.ndarray:
    """Per-agent ||z_i - BR_i(z_-i)||."""
    Z = inst.blocks(z)
    require_feasible(inst, Z)
    return np.array([np.linalg.norm(Z[i] - best_response(inst, i, Z)) for i in range(inst.n)])


def jacobian_min_eig(inst: ProblemInstance) -> float:
    return float(np.linalg.eigvalsh(inst.matrices.jacobian)[0])


def jacobian_definiteness(inst: ProblemInstance) -> str:
    """'positive-definite', 'positive-semidefinite' or 'indefinite'.

    Eigenvalues within 1e-10 * ||J|| of zero count as zero.
    """
    lam = jacobian_min_eig(inst)
    tol = 1e-10 * inst.jacobian_norm
    if lam > tol:
        return "positive-definite"
    if lam >= -tol:
        return "positive-semidefinite"
    return "indefinite"


def _has_antagonism(inst: ProblemInstance) -> bool:
    return bool(np.any(inst.influence < 0))


def _stop_level(tol, Z):
    """Absolute change tolerance, floored at a few ulps of the iterate so that
    large-budget instances still terminate."""
    return max(tol, 64 * np.finfo(float).eps * float(np.max(np.abs(Z))))


def _potential_qp(inst, z0, tol, max_iter):
    if jacobian_definiteness(inst) == "indefinite":
        raise NotPSD("potential-qp needs a positive semidefinite Jacobian")
    step = 1.0 / inst.jacobian_norm
    Z = inst.blocks(project_profile(inst, z0)).copy()
    for it in range(1, max_iter + 1):
        Znew = project_profile(inst, Z - step * vector_field(inst, Z))
        change = np.max(np.abs(Znew - Z))
        Z = Znew
        if change <= _stop_level(tol, Z):
            return Z, it
    raise NoConvergence(f"potential-qp did not converge in {max_iter} steps")


def _best_response_sweeps(inst, z0, tol, max_iter):
    if _has_antagonism(inst):
        raise AssumptionViolated("best-response iteration needs nonnegative influence weights")
    Z = inst.blocks(project_profile(inst, z0)).copy()
    for sweep in range(1, max_iter + 1):
        moved = 0.0
        for i in range(inst.n):
            zi = best_response(inst, i, Z)
            moved = max(moved, float(np.max(np.abs(zi - Z[i]))))
            Z[i] = zi
        if moved <= _stop_level(tol, Z):
            return Z, sweep
    raise NoConvergence(f"best-response did not converge in {max_iter} sweeps")


def _trajectory_limit(inst, z0, cfg):
    cfg = cfg or SimConfig(stop_residual=1e-10, t_end=1e4, record_every=10_000_000)
    traj = simulate(inst, z0, cfg)
    return inst.blocks(traj.final).copy(), len(traj.times), traj.terminated_by


def solve_equilibrium(
    inst: ProblemInstance,
    method: str = "potential-qp",
    *,
    z0=None,
    tol: float = 1e-12,
    max_iter: int = MAX_ITER,
    sim_config: SimConfig | None = None,
) -> EquilibriumReport:
    """Compute an equilibrium and certify it.

    ``tol`` bounds the per-iteration change (max-norm), floored at
    ``64 eps ||z||_inf``.
    ``z0`` defaults to the all-zero profile (always feasible).
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    z0 = np.zeros(inst.dim) if z0 is None else np.asarray(z0, dtype=float).ravel()
    notes = []
    if method == "potential-qp":
        Z, iters = _potential_qp(inst, z0, tol, max_iter)
    elif method == "best-response":
        Z, iters = _best_response_sweeps(inst, z0, tol, max_iter)
    else:
        require_feasible(inst, z0)
        Z, iters, reason = _trajectory_limit(inst, z0, sim_config)
        if reason != "residual":
            notes.append(f"trajectory terminated by {reason}")

    definiteness = jacobian_definiteness(inst)
    uniqueness = "unique" if definiteness == "positive-definite" else "unknown"
    try:
        nash = verify_nash(inst, Z)
    except NonpositiveDTilde:
        nash = None
        notes.append("best responses undefined (nonpositive D_tilde)")
    return EquilibriumReport(
        point=Z.ravel().copy(),
        vi_certificate=verify_vi(inst, Z),
        nash_residuals=nash,
        method=method,
        potential_value=potential(inst, Z),
        iterations=iters,
        uniqueness=uniqueness,
        notes=notes,
    )
