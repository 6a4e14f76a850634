"""Projections onto the budget polytopes K_i = {z >= 0, c'z <= B} and their
tangent cones.

All three projections reduce to one scalar problem: find a multiplier
``theta >= 0`` such that ``sum_j c_j u_j(theta) = b`` where
``u_j(theta) = x_j - theta * s_j``, clipped at zero for the coordinates that
carry a sign constraint. The left side is piecewise linear and
non-increasing in ``theta``, so sorting the breakpoints ``x_j / s_j`` gives
the root exactly. The batched solver below handles one row per agent so a
whole profile is projected with a handful of numpy calls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_model import TAU_FEAS, ProblemInstance
from .errors import InfeasiblePoint, NonpositiveWeight

TAU_ACT = 1e-8


@dataclass(frozen=True, eq=False)
class AgentPolytope:
    """K = {z in R^m : c'z <= B, z >= 0}."""

    cost: np.ndarray
    budget: float

    def __post_init__(self):
        c = np.array(self.cost, dtype=float).ravel()
        if np.any(c <= 0) or not self.budget > 0:
            raise ValueError("AgentPolytope needs c > 0 and B > 0")
        c.setflags(write=False)
        object.__setattr__(self, "cost", c)
        object.__setattr__(self, "budget", float(self.budget))

    @property
    def m(self) -> int:
        return self.cost.size

    def vertices(self) -> np.ndarray:
        """The m+1 vertices: the origin and (B / c_j) e_j."""
        return np.vstack([np.zeros(self.m), np.diag(self.budget / self.cost)])

    def contains(self, z, tol: float = TAU_FEAS) -> bool:
        z = np.asarray(z, dtype=float)
        return bool(np.all(z >= -tol) and self.cost @ z <= self.budget + tol)


@dataclass(frozen=True)
class ActiveSet:
    nonneg_active: frozenset
    budget_active: bool


def agent_polytopes(inst: ProblemInstance) -> list[AgentPolytope]:
    return [AgentPolytope(inst.costs[i], inst.budgets[i]) for i in range(inst.n)]


# ---------------------------------------------------------------------------
# batched multiplier solver


def _solve_multiplier(X, C, S, clipped, b):
    """Row-wise root ``theta >= 0`` of ``g(theta) = b``.

    ``g(theta) = sum_j C_j u_j`` with ``u_j = X_j - theta S_j`` on free
    coordinates and ``max(0, X_j - theta S_j)`` on clipped ones. Rows with
    ``g(0) <= b`` get ``theta = 0``. Free coordinates must exist on any row
    whose clipped part alone cannot bring ``g`` down to ``b``; callers
    guarantee this (``b >= 0`` whenever a row is fully clipped).
    """
    U0 = np.where(clipped, np.maximum(X, 0.0), X)
    g0 = np.einsum("ij,ij->i", C, U0)
    theta = np.zeros(X.shape[0])
    rows = np.flatnonzero(g0 > b)
    if rows.size == 0:
        return theta
    X, C, S, clipped, b = X[rows], C[rows], S[rows], clipped[rows], b[rows]
    # breakpoint where a clipped coordinate leaves the active set; free
    # coordinates never leave
    T = np.where(clipped, np.maximum(X / S, 0.0), np.inf)
    dead = clipped & (X <= 0)  # zero for every theta >= 0
    order = np.argsort(T, axis=1, kind="stable")
    r = np.arange(rows.size)[:, None]
    T = T[r, order]
    CX = np.where(dead, 0.0, C * X)[r, order]
    CS = np.where(dead, 0.0, C * S)[r, order]
    # suffix sums: active set on (T[k-1], T[k]) is {k, k+1, ...}
    S1 = np.cumsum(CX[:, ::-1], axis=1)[:, ::-1]
    S2 = np.cumsum(CS[:, ::-1], axis=1)[:, ::-1]
    # T = inf only on free coordinates, where S2 > 0, so g_at = -inf there
    g_at = S1 - T * S2
    k = np.argmax(g_at <= b[:, None], axis=1)
    idx = r[:, 0]
    theta[rows] = (S1[idx, k] - b) / S2[idx, k]
    return theta


def _apply(X, S, clipped, theta):
    U = X - theta[:, None] * S
    return np.where(clipped, np.maximum(U, 0.0), U)


# ---------------------------------------------------------------------------
# per-agent projections


def project_euclidean(poly: AgentPolytope, x) -> np.ndarray:
    """argmin_{y in K} ||y - x||."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    c = poly.cost[None, :]
    clipped = np.ones_like(x, dtype=bool)
    theta = _solve_multiplier(x, c, c, clipped, np.array([poly.budget]))
    return _apply(x, c, clipped, theta)[0]


def project_weighted(poly: AgentPolytope, weights, x, *, return_multiplier: bool = False):
    """argmin_{y in K} 1/2 ||y - x||^2_diag(weights).

    With ``return_multiplier=True`` also returns the budget multiplier in the
    sign convention ``diag(w)(y - x) - lam * c - mu = 0``, so ``lam <= 0``.
    """
    w = np.asarray(weights, dtype=float).reshape(1, -1)
    if np.any(w <= 0):
        raise NonpositiveWeight(f"weights must be strictly positive, got {w.ravel().tolist()}")
    x = np.asarray(x, dtype=float).reshape(1, -1)
    c = poly.cost[None, :]
    s = c / w
    clipped = np.ones_like(x, dtype=bool)
    theta = _solve_multiplier(x, c, s, clipped, np.array([poly.budget]))
    y = _apply(x, s, clipped, theta)[0]
    if return_multiplier:
        return y, -float(theta[0])
    return y


def active_set(poly: AgentPolytope, z, tol: float = TAU_ACT) -> ActiveSet:
    z = np.asarray(z, dtype=float)
    if not poly.contains(z):
        raise InfeasiblePoint(f"point {z.tolist()} is outside the polytope")
    return ActiveSet(
        nonneg_active=frozenset(int(j) for j in np.flatnonzero(z <= tol)),
        budget_active=bool(poly.cost @ z >= poly.budget - tol),
    )


def _cone_project(V, Z, C, B, tol):
    """Row-wise projection of V onto the tangent cones of K_i at rows of Z."""
    clipped = Z <= tol
    budget_active = np.sum(C * Z, axis=1) >= B - tol
    b = np.where(budget_active, 0.0, np.inf)
    theta = _solve_multiplier(V, C, C, clipped, b)
    return _apply(V, C, clipped, theta)


def project_tangent_cone(poly: AgentPolytope, z, v, tol: float = TAU_ACT) -> np.ndarray:
    """Projection of ``v`` onto T_K(z) = {u : u_j >= 0 on zero coordinates,
    c'u <= 0 if the budget binds}."""
    z = np.asarray(z, dtype=float)
    if not poly.contains(z):
        raise InfeasiblePoint(f"point {z.tolist()} is outside the polytope")
    v = np.asarray(v, dtype=float).reshape(1, -1)
    return _cone_project(v, z[None, :], poly.cost[None, :], np.array([poly.budget]), tol)[0]


# ---------------------------------------------------------------------------
# whole-profile versions (K = product of the K_i)


def feasibility_violation(inst: ProblemInstance, z) -> float:
    """Largest constraint violation of a profile (0 when feasible)."""
    Z = inst.blocks(z)
    neg = float(np.max(-Z, initial=0.0))
    over = float(np.max(np.sum(inst.costs * Z, axis=1) - inst.budgets, initial=0.0))
    return max(neg, over, 0.0)


def is_feasible(inst: ProblemInstance, z, tol: float = TAU_FEAS) -> bool:
    return feasibility_violation(inst, z) <= tol


def require_feasible(inst: ProblemInstance, z, tol: float = TAU_FEAS, exc=InfeasiblePoint):
    viol = feasibility_violation(inst, z)
    if viol > tol:
        raise exc(f"profile violates the constraints by {viol:.3e} (tolerance {tol:g})")


def project_profile(inst: ProblemInstance, z) -> np.ndarray:
    """Euclidean projection onto K, agent by agent; returns the input layout."""
    X = inst.blocks(z)
    clipped = np.ones(X.shape, dtype=bool)
    theta = _solve_multiplier(X, inst.costs, inst.costs, clipped, inst.budgets)
    Y = _apply(X, inst.costs, clipped, theta)
    return Y if np.ndim(z) == 2 else Y.ravel()


def project_profile_tangent(inst: ProblemInstance, z, v, tol: float = TAU_ACT) -> np.ndarray:
    """Projection of ``v`` onto T_K(z) = product of the agent cones."""
    Z = inst.blocks(z)
    require_feasible(inst, Z)
    U = _cone_project(inst.blocks(v), Z, inst.costs, inst.budgets, tol)
    return U if np.ndim(v) == 2 else U.ravel()
