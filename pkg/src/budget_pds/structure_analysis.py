"""Structural tests: relation classes, definiteness, budget-exhaustion
partition and the exhaustion conditions for networks without antagonism."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_model import ProblemInstance
from .equilibrium_solver import jacobian_definiteness, neighbor_preference
from .errors import AssumptionViolated, ZeroInfluenceSum
from .feasible_set import TAU_ACT, require_feasible


@dataclass(frozen=True)
class RelationProfile:
    enemies: tuple  # per agent, frozenset of k with a_ik < 0
    friends: tuple  # per agent, frozenset of k with a_ik > 0
    a1: bool  # no antagonistic relations
    a2: bool  # very weak antagonistic relations
    a3: bool  # weak antagonistic relations
    jacobian_definiteness: str
    gerschgorin_pd: bool

    @property
    def class_flags(self) -> dict:
        return {"A1": self.a1, "A2": self.a2, "A3": self.a3}


@dataclass(frozen=True, eq=False)
class AgentPartition:
    exhausting: tuple  # V_E, agent indices
    non_exhausting: tuple  # V_DE
    lambda_star: dict  # i in V_E -> support-averaged multiplier
    support: tuple  # per agent, tuple of topic indices


@dataclass(frozen=True)
class Verdict:
    agent: int
    holds: bool  # for necessary conditions: passed; for sufficient ones: fired
    value: float | None = None  # lambda*, c'upsilon or the threshold
    detail: str = ""


def _neighbour_sets(inst: ProblemInstance):
    A = inst.influence
    idx = range(inst.n)
    enemies = tuple(frozenset(k for k in idx if k != i and A[i, k] < 0) for i in idx)
    friends = tuple(frozenset(k for k in idx if k != i and A[i, k] > 0) for i in idx)
    return enemies, friends


def gerschgorin_discs(inst: ProblemInstance) -> tuple[np.ndarray, np.ndarray]:
    """Centres w_i^j + sum_k a_ik and radii sum_k |a_ik|, both (n, m)."""
    A = inst.influence
    centres = inst.weights + A.sum(axis=1)[:, None]
    radii = np.broadcast_to(np.abs(A).sum(axis=1)[:, None], centres.shape)
    return centres, radii


def classify(inst: ProblemInstance) -> RelationProfile:
    A = inst.influence
    enemies, friends = _neighbour_sets(inst)
    a1 = all(not e for e in enemies)
    neg_mass = np.array([sum(abs(A[i, k]) for k in enemies[i]) for i in range(inst.n)])
    a2 = bool(np.all(inst.weights.min(axis=1) > 2 * neg_mass))
    a3 = bool(np.all(inst.weights.min(axis=1) + A.sum(axis=1) >= 0))
    centres, radii = gerschgorin_discs(inst)
    return RelationProfile(
        enemies=enemies,
        friends=friends,
        a1=a1,
        a2=a2,
        a3=a3,
        jacobian_definiteness=jacobian_definiteness(inst),
        gerschgorin_pd=bool(np.all(centres - radii > 0)),
    )


def _require_a1(inst: ProblemInstance):
    if np.any(inst.influence < 0):
        raise AssumptionViolated("condition is stated for networks without antagonistic relations")


def partition_agents(inst: ProblemInstance, z_star, tol: float = TAU_ACT) -> AgentPartition:
    """Split agents by whether the budget binds at ``z_star``.

    For exhausting agents, lambda* is the mean over the support of
    ``w_tilde^s (z^s - p_tilde^s) / c^s``.
    """
    Z = inst.blocks(z_star)
    require_feasible(inst, Z)
    spend = np.sum(inst.costs * Z, axis=1)
    exhausting, non_exhausting, lam = [], [], {}
    support = tuple(tuple(int(j) for j in np.flatnonzero(Z[i] > tol)) for i in range(inst.n))
    for i in range(inst.n):
        if spend[i] >= inst.budgets[i] - tol:
            exhausting.append(i)
            lam[i] = float(np.mean(support_ratios(inst, i, Z, support[i])))
        else:
            non_exhausting.append(i)
    return AgentPartition(tuple(exhausting), tuple(non_exhausting), lam, support)


def gap_ratios(w_tilde, z, p_tilde, costs, support) -> np.ndarray:
    """w_tilde^s (z^s - p_tilde^s) / c^s over the support indices."""
    s = list(support)
    w_tilde, z, p_tilde, costs = (np.asarray(v, dtype=float) for v in (w_tilde, z, p_tilde, costs))
    return w_tilde[s] * (z[s] - p_tilde[s]) / costs[s]


def support_ratios(inst: ProblemInstance, i: int, z_star, support) -> np.ndarray:
    npref = neighbor_preference(inst, i, z_star)
    Z = inst.blocks(z_star)
    return gap_ratios(npref.d_tilde, Z[i], npref.p_tilde, inst.costs[i], support)


def ratios_agree(ratios, rtol: float) -> bool:
    """All ratios within ``rtol`` of each other, relative to the largest magnitude."""
    ratios = np.asarray(ratios, dtype=float)
    if ratios.size <= 1:
        return True
    scale = max(np.max(np.abs(ratios)), 1e-300)
    return bool(np.ptp(ratios) <= rtol * scale)


def check_necessary_conditions(
    inst: ProblemInstance,
    z_star,
    partition: AgentPartition | None = None,
    *,
    atol: float = 1e-6,
    rtol: float = 1e-6,
    lam_tol: float = 1e-8,
) -> list[Verdict]:
    """At a certified equilibrium: non-exhausting agents sit at p_tilde; for
    exhausting agents the weighted gaps per unit cost agree on the support
    and share a nonpositive value."""
    _require_a1(inst)
    Z = inst.blocks(z_star)
    partition = partition or partition_agents(inst, Z)
    out = []
    for i in range(inst.n):
        npref = neighbor_preference(inst, i, Z)
        if i in partition.non_exhausting:
            gap = float(np.linalg.norm(Z[i] - npref.p_tilde))
            out.append(Verdict(i, gap <= atol, gap, "z_i = p_tilde_i"))
        else:
            r = support_ratios(inst, i, Z, partition.support[i])
            lam = float(np.mean(r)) if r.size else 0.0
            ok = ratios_agree(r, rtol) and lam <= lam_tol
            out.append(Verdict(i, ok, lam, "common ratio lambda* <= 0 on the support"))
    return out


def upsilon(inst: ProblemInstance, i: int) -> np.ndarray:
    """Upper bound on p_tilde_i using z_k^l <= gamma_k B_k, gamma_k = 1/min_l c_k^l."""
    _require_a1(inst)
    a = inst.influence[i].copy()
    a[i] = 0.0
    gamma = 1.0 / inst.costs.min(axis=1)
    w_tilde = inst.weights[i] + a.sum()
    return (inst.weights[i] * inst.preferences[i] + a @ (gamma * inst.budgets)) / w_tilde


def sufficient_not_exhaust(inst: ProblemInstance, i: int) -> Verdict:
    """Fires when c_i' upsilon_i < B_i; then i cannot exhaust its budget."""
    spend = float(inst.costs[i] @ upsilon(inst, i))
    return Verdict(i, bool(spend < inst.budgets[i]), spend, "c_i' upsilon_i < B_i")


def exhaust_threshold(inst: ProblemInstance, i: int, j: int, q_star) -> float:
    """Neighbour-weighted mean of q*_k^j plus B_i / c_i^j."""
    _require_a1(inst)
    Q = inst.blocks(q_star)
    a = inst.influence[i].copy()
    a[i] = 0.0
    total = a.sum()
    if total == 0:
        raise ZeroInfluenceSum(f"agent {i} has no neighbours; the threshold is undefined")
    return float(a @ Q[:, j] / total + inst.budgets[i] / inst.costs[i, j])


def sufficient_exhaust(inst: ProblemInstance, i: int, j: int, q_star) -> Verdict:
    """Fires when q*_i^j exceeds the threshold; then i must exhaust its budget."""
    t = exhaust_threshold(inst, i, j, q_star)
    q = float(inst.blocks(q_star)[i, j])
    return Verdict(i, bool(q > t), t, f"topic {j}: q*={q:.6g} vs threshold")


def sufficient_exhaust_any(inst: ProblemInstance, i: int, q_star) -> Verdict:
    """Aggregate over topics: fires if any topic satisfies the condition."""
    Q = inst.blocks(q_star)
    verdicts = [sufficient_exhaust(inst, i, j, Q) for j in range(inst.m)]
    # report the topic closest to (or furthest past) its threshold
    j = int(np.argmax([Q[i, j] - v.value for j, v in enumerate(verdicts)]))
    return Verdict(i, any(v.holds for v in verdicts), verdicts[j].value, verdicts[j].detail)
