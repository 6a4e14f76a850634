"""Build runnable configs for the published four-agent example.

The source omits preferences and weights. We keep its influence weights,
costs, budgets and unconstrained equilibrium q*, and reconstruct

    w_2 = w_tilde_2 - sum_k a_2k           (published w_tilde_2)
    w_i = PLACEHOLDER_WEIGHT               (i = 1, 3, 4; not published)
    p   = q* + D^{-1} (L kron I) q*        (so that J q* = D p exactly)

Agent 2's data (and hence c_2'upsilon_2) depend only on published values.

    python scripts/build_four_agent_fixture.py
"""

import json
from pathlib import Path

import numpy as np

from budget_pds.config import config_from_instance
from budget_pds.core_model import build_instance
from budget_pds.four_agent import example_fixture, example_influence

PLACEHOLDER_WEIGHT = 5.0
OUT = Path(__file__).resolve().parents[1] / "src" / "budget_pds" / "fixtures"


def reconstruct():
    fx = example_fixture()
    A = example_influence(fx)
    Q = np.array(fx["q_star"])
    L = np.diag(A.sum(axis=1)) - A
    W = np.full(Q.shape, PLACEHOLDER_WEIGHT)
    W[1] = np.array(fx["run1"]["agent2_w_tilde"]) - A[1].sum()
    P = Q + (L @ Q) / W
    return fx, A, P, W


def main():
    fx, A, P, W = reconstruct()
    for run in ("run1", "run2"):
        inst = build_instance(A, P, W, np.array(fx["costs"]), fx[run]["budgets"])
        cfg = config_from_instance(
            inst,
            simulation={
                "step": None,
                "t_end": 50.0,
                "stop_residual": 1e-8,
                "scheme": "projected-euler",
                "initial": "zeros",
                "seed": 0,
            },
            metadata={
                "source": f"published four-agent example, {run}",
                "reconstructed": "preferences for all agents; weights of agents 1, 3, 4 are placeholders "
                f"({PLACEHOLDER_WEIGHT}); agent 2 weights derived from the published w_tilde_2",
            },
        )
        path = OUT / f"four_agent_{run}.json"
        path.write_text(json.dumps(cfg, indent=2) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
