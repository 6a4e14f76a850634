"""Problem data and closed-form model quantities.

Opinions are stacked agent-major: ``z = [z_1; ...; z_n]`` with each
``z_i`` in R^m. Every function accepts either the flat ``(n*m,)`` vector or
the ``(n, m)`` block view and returns arrays in the same layout as the
input unless stated otherwise. Agent indices are 0-based in the Python API.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    AsymmetricInfluence,
    DimensionMismatch,
    DisconnectedGraph,
    InstanceError,
    NonpositiveParameter,
    NonzeroSelfLoop,
)

TAU_FEAS = 1e-9


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Validated model data for ``n`` agents and ``m`` topics.

    Use :func:`build_instance` to construct one; the constructor itself does
    no checking.
    """

    influence: np.ndarray  # (n, n), symmetric, zero diagonal
    preferences: np.ndarray  # (n, m), >= 0
    weights: np.ndarray  # (n, m), > 0, diagonal of D_i
    costs: np.ndarray  # (n, m), > 0
    budgets: np.ndarray  # (n,), > 0

    @property
    def n(self) -> int:
        return self.influence.shape[0]

    @property
    def m(self) -> int:
        return self.preferences.shape[1]

    @property
    def dim(self) -> int:
        return self.n * self.m

    @cached_property
    def matrices(self) -> "SystemMatrices":
        return system_matrices(self)

    @cached_property
    def jacobian_norm(self) -> float:
        """Spectral norm of J."""
        return float(np.max(np.abs(np.linalg.eigvalsh(self.matrices.jacobian))))

    @cached_property
    def influence_sums(self) -> np.ndarray:
        """Row sums ``sum_{k != i} a_ik`` (signed)."""
        return self.influence.sum(axis=1)

    def blocks(self, z) -> np.ndarray:
        """Return ``z`` as an ``(n, m)`` array (view when possible)."""
        if isinstance(z, OpinionProfile):
            z = z.z
        z = np.asarray(z, dtype=float)
        if z.shape == (self.n, self.m):
            return z
        if z.shape == (self.dim,):
            return z.reshape(self.n, self.m)
        raise DimensionMismatch(
            f"expected shape ({self.dim},) or ({self.n}, {self.m}), got {z.shape}"
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "adjacency": self.influence.tolist(),
            "agents": [
                {
                    "preferences": self.preferences[i].tolist(),
                    "weights": self.weights[i].tolist(),
                    "costs": self.costs[i].tolist(),
                    "budget": float(self.budgets[i]),
                }
                for i in range(self.n)
            ],
        }


@dataclass(frozen=True, eq=False)
class OpinionProfile:
    z: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "z", _frozen(np.ravel(self.z)))


@dataclass(frozen=True, eq=False)
class SystemMatrices:
    laplacian: np.ndarray  # (n, n)
    jacobian: np.ndarray  # (nm, nm), J = D + L kron I_m
    drift: np.ndarray  # (nm,), D p


def _connected(adj: np.ndarray) -> bool:
    n = adj.shape[0]
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, k in zip(*np.nonzero(adj)):
        ri, rk = find(int(i)), find(int(k))
        if ri != rk:
            parent[ri] = rk
    return len({find(i) for i in range(n)}) == 1


def build_instance(
    influence,
    preferences,
    weights,
    costs,
    budgets,
    *,
    require_connected: bool = True,
) -> ProblemInstance:
    """Validate raw data against the standing assumptions and freeze it.

    ``weights`` and ``costs`` may be scalars or per-agent rows; they are
    broadcast to ``(n, m)``. All violations are collected; the first one is
    raised with the full list attached as ``err.violations``.
    Self-loops are rejected rather than silently zeroed so that malformed
    input is surfaced.
    """
    A = np.array(influence, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"influence must be square, got shape {A.shape}")
    n = A.shape[0]
    P = np.array(preferences, dtype=float)
    if P.ndim == 1 and n == 1:
        P = P[None, :]
    if P.ndim != 2 or P.shape[0] != n:
        raise DimensionMismatch(f"preferences must have shape (n, m), got {P.shape}")
    m = P.shape[1]
    try:
        Wt = np.broadcast_to(np.asarray(weights, dtype=float), (n, m)).copy()
        C = np.broadcast_to(np.asarray(costs, dtype=float), (n, m)).copy()
        B = np.broadcast_to(np.array(budgets, dtype=float), (n,)).copy()
    except ValueError as exc:
        raise DimensionMismatch(str(exc)) from exc

    for name, arr in (("influence", A), ("preferences", P), ("weights", Wt), ("costs", C), ("budgets", B)):
        if not np.all(np.isfinite(arr)):
            raise DimensionMismatch(f"{name} contains non-finite entries")

    violations: list[InstanceError] = []
    if not np.array_equal(A, A.T):
        i, k = np.argwhere(A != A.T)[0]
        violations.append(AsymmetricInfluence(f"a[{i},{k}]={A[i, k]} != a[{k},{i}]={A[k, i]}"))
    if np.any(np.diag(A) != 0):
        i = int(np.flatnonzero(np.diag(A))[0])
        violations.append(NonzeroSelfLoop(f"a[{i},{i}]={A[i, i]} (self-loops must be zero)"))
    if require_connected and n > 1:
        off = A.copy()
        np.fill_diagonal(off, 0.0)
        if not _connected((off != 0) | (off.T != 0)):
            violations.append(DisconnectedGraph("influence graph is not connected"))
    bad = []
    if np.any(P < 0):
        bad.append("preferences must be >= 0")
    if np.any(Wt <= 0):
        bad.append("weights must be > 0")
    if np.any(C <= 0):
        bad.append("costs must be > 0")
    if np.any(B <= 0):
        bad.append("budgets must be > 0")
    if bad:
        violations.append(NonpositiveParameter("; ".join(bad)))
    if violations:
        err = violations[0]
        err.violations = violations
        raise err

    return ProblemInstance(
        influence=_frozen(A),
        preferences=_frozen(P),
        weights=_frozen(Wt),
        costs=_frozen(C),
        budgets=_frozen(B),
    )


def system_matrices(inst: ProblemInstance) -> SystemMatrices:
    A = inst.influence
    L = np.diag(A.sum(axis=1)) - A
    J = np.diag(inst.weights.ravel()) + np.kron(L, np.eye(inst.m))
    drift = (inst.weights * inst.preferences).ravel()
    return SystemMatrices(laplacian=_frozen(L), jacobian=_frozen(J), drift=_frozen(drift))


def vector_field(inst: ProblemInstance, z) -> np.ndarray:
    """f(z) = D(z - p) + (L kron I_m) z; the PDS moves along -f."""
    Z = inst.blocks(z)
    F = inst.weights * (Z - inst.preferences) + inst.matrices.laplacian @ Z
    return F if np.ndim(Z) == np.ndim(z) else F.ravel()


def agent_field(inst: ProblemInstance, i: int, z) -> np.ndarray:
    """Per-agent slice f_i(z_i, z_-i) computed from its own definition."""
    Z = inst.blocks(z)
    social = sum(inst.influence[i, k] * (Z[k] - Z[i]) for k in range(inst.n) if k != i)
    return inst.weights[i] * (Z[i] - inst.preferences[i]) - social


def utility(inst: ProblemInstance, i: int, z) -> float:
    if not 0 <= i < inst.n:
        raise DimensionMismatch(f"agent index {i} out of range for n={inst.n}")
    Z = inst.blocks(z)
    own = 0.5 * np.sum(inst.weights[i] * (Z[i] - inst.preferences[i]) ** 2)
    diffs = Z - Z[i]
    social = 0.5 * np.sum(inst.influence[i] * np.sum(diffs**2, axis=1))
    return float(-own - social)


def potential(inst: ProblemInstance, z) -> float:
    """W(z) = -1/2 z'Jz + z'Dp - 1/2 p'Dp."""
    Z = inst.blocks(z)
    JZ = inst.weights * Z + inst.matrices.laplacian @ Z
    Dp = inst.weights * inst.preferences
    return float(-0.5 * np.sum(Z * JZ) + np.sum(Z * Dp) - 0.5 * np.sum(inst.preferences * Dp))


def potential_from_utilities(inst: ProblemInstance, z) -> float:
    """sum_k U_k(z) + 1/2 z'(L kron I)z, the other closed form of W."""
    Z = inst.blocks(z)
    total = sum(utility(inst, k, Z) for k in range(inst.n))
    return float(total + 0.5 * np.sum(Z * (inst.matrices.laplacian @ Z)))


def growth_constant(inst: ProblemInstance) -> float:
    """alpha = max(||J||, ||Dp||) so that ||f(z)|| <= alpha (1 + ||z||)."""
    return max(inst.jacobian_norm, float(np.linalg.norm(inst.matrices.drift)))
