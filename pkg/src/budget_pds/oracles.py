"""Brute-force reference solvers used to cross-check the fast paths.

These are deliberately naive: every candidate active set is tried, the
equality-constrained least-squares problem is solved through its KKT linear
system, and the best primal-feasible candidate wins. Exponential in m, so
only meant for m <= 4 or so.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np


def _eq_constrained_lsq(w: np.ndarray, x: np.ndarray, E: np.ndarray, e: np.ndarray) -> np.ndarray | None:
    """argmin 1/2 sum w (y - x)^2 subject to E y = e, or None if singular."""
    m = x.size
    k = E.shape[0]
    K = np.zeros((m + k, m + k))
    K[:m, :m] = np.diag(w)
    K[:m, m:] = E.T
    K[m:, :m] = E
    rhs = np.concatenate([w * x, e])
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        return None
    return sol[:m]


def _subsets(items):
    for r in range(len(items) + 1):
        yield from combinations(items, r)


def enumerate_projection(cost, budget, x, weights=None, tol: float = 1e-10) -> np.ndarray:
    """Weighted projection onto {y >= 0, c'y <= B} by active-set enumeration."""
    c = np.asarray(cost, dtype=float)
    x = np.asarray(x, dtype=float)
    m = x.size
    w = np.ones(m) if weights is None else np.asarray(weights, dtype=float)
    best, best_val = None, np.inf
    for zeros in _subsets(range(m)):
        for budget_on in (False, True):
            rows = [np.eye(m)[j] for j in zeros]
            vals = [0.0] * len(zeros)
            if budget_on:
                rows.append(c)
                vals.append(budget)
            E = np.array(rows).reshape(len(rows), m)
            y = _eq_constrained_lsq(w, x, E, np.array(vals))
            if y is None or np.any(y < -tol) or c @ y > budget + tol * max(1.0, budget):
                continue
            val = 0.5 * np.sum(w * (y - x) ** 2)
            if val < best_val - 1e-15:
                best, best_val = y, val
    return np.maximum(best, 0.0)


def enumerate_cone_projection(cost, zero_set, budget_active: bool, v, tol: float = 1e-10) -> np.ndarray:
    """Projection onto {u : u_j >= 0 for j in zero_set, c'u <= 0 if budget_active}."""
    c = np.asarray(cost, dtype=float)
    v = np.asarray(v, dtype=float)
    m = v.size
    zero_set = sorted(zero_set)
    best, best_val = None, np.inf
    for fixed in _subsets(zero_set):
        for budget_on in ((False, True) if budget_active else (False,)):
            rows = [np.eye(m)[j] for j in fixed]
            if budget_on:
                rows.append(c)
            E = np.array(rows).reshape(len(rows), m)
            u = _eq_constrained_lsq(np.ones(m), v, E, np.zeros(len(rows)))
            if u is None:
                continue
            if np.any(u[zero_set] < -tol) or (budget_active and c @ u > tol):
                continue
            val = 0.5 * np.sum((u - v) ** 2)
            if val < best_val - 1e-15:
                best, best_val = u, val
    return best


def best_response_fixed_point(inst, z0=None, sweeps: int = 100_000, tol: float = 1e-13):
    """Jacobi-free reference: repeated exact per-agent maximisation of U_i by
    enumeration, for small instances. Independent of the fast projection."""
    from .equilibrium_solver import neighbor_preference

    Z = np.zeros((inst.n, inst.m)) if z0 is None else np.array(inst.blocks(z0), dtype=float)
    for _ in range(sweeps):
        moved = 0.0
        for i in range(inst.n):
            npref = neighbor_preference(inst, i, Z)
            zi = enumerate_projection(inst.costs[i], inst.budgets[i], npref.p_tilde, npref.d_tilde)
            moved = max(moved, float(np.max(np.abs(zi - Z[i]))))
            Z[i] = zi
        if moved <= tol:
            return Z.ravel()
    raise RuntimeError("best-response oracle did not converge")


def central_difference_gradient(fun, z, h: float = 1e-6) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    g = np.empty_like(z)
    for k in range(z.size):
        e = np.zeros_like(z)
        e[k] = h
        g[k] = (fun(z + e) - fun(z - e)) / (2 * h)
    return g
