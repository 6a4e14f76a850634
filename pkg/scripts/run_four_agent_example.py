"""Simulate both budget settings of the published four-agent example and
print the quantities discussed alongside it.

Preferences and most weights are reconstructed (see build_example_fixture.py),
so trajectories are illustrative; the printed checks only use quantities
that depend on published data.

    python scripts/run_four_agent_example.py --out-dir four_agent_runs
"""

import argparse
from pathlib import Path

import numpy as np

from budget_pds.config import initial_profile, instance_from_config, sim_config_from_config
from budget_pds.equilibrium_solver import neighbor_preference, solve_equilibrium
from budget_pds.four_agent import example_fixture, example_run_config
from budget_pds.pds_integrator import simulate
from budget_pds.plotting import trajectory_svg
from budget_pds.reporting import read_trajectory_csv, trajectory_csv
from budget_pds.structure_analysis import partition_agents, sufficient_exhaust, sufficient_not_exhaust


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="four_agent_runs")
    args = ap.parse_args(argv)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fx = example_fixture()
    q = np.array(fx["q_star"])

    for run in ("run1", "run2"):
        cfg = example_run_config(run)
        inst = instance_from_config(cfg)
        traj = simulate(inst, initial_profile(inst, cfg), sim_config_from_config(cfg))
        rep = solve_equilibrium(inst, "potential-qp")
        part = partition_agents(inst, rep.point)
        z = inst.blocks(rep.point)
        csv_text = trajectory_csv(inst, traj)
        (out / f"{run}.csv").write_text(csv_text)
        header, rows = read_trajectory_csv(csv_text)
        (out / f"{run}.svg").write_text(trajectory_svg(header, rows, equilibrium=rep.point,
                                                       costs=inst.costs, budgets=inst.budgets))

        print(f"== {run}: budgets {inst.budgets.tolist()}")
        print(f"   simulation ended by {traj.terminated_by} at t={traj.times[-1]:.4g}, "
              f"residual {traj.residuals[-1]:.2e}, distance to equilibrium "
              f"{np.linalg.norm(traj.final - rep.point):.2e}")
        print(f"   exhausting agents {[i + 1 for i in part.exhausting]}, "
              f"non-exhausting {[i + 1 for i in part.non_exhausting]}")
        print(f"   agent 2: z* {np.round(z[1], 2).tolist()}, "
              f"p_tilde {np.round(neighbor_preference(inst, 1, z).p_tilde, 2).tolist()}")
        v8 = sufficient_exhaust(inst, 0, 2, q)
        print(f"   agent 1, topic 3 exhaustion threshold {v8.value:.2f} vs q* {q[0, 2]:.2f} "
              f"-> {'fires' if v8.holds else 'inconclusive'}")
        v7 = sufficient_not_exhaust(inst, 1)
        print(f"   agent 2 c'upsilon {v7.value:.2f} vs budget {inst.budgets[1]:.2f} "
              f"-> {'fires' if v7.holds else 'inconclusive'}")
    print(f"wrote CSV and SVG files to {out}/")


if __name__ == "__main__":
    main()
