import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from budget_pds import SimConfig, build_instance, residual, simulate, step
from budget_pds.config import REGIMES, GeneratorSpec, generate_instance, random_feasible_profile
from budget_pds.equilibrium_solver import jacobian_definiteness, solve_equilibrium
from budget_pds.errors import InfeasiblePoint, InfeasibleStart, StepTooLarge
from budget_pds.feasible_set import is_feasible
from budget_pds.pds_integrator import (
    better_response_margins,
    lyapunov_slack,
    max_step,
    pds_velocity,
    refinement_gap,
)


def _instance(seed, regime=None):
    regime = regime or REGIMES[seed % 4]
    return generate_instance(GeneratorSpec(n=2 + seed % 4, m=1 + seed % 3, seed=seed, regime=regime))


# --- examples -------------------------------------------------------------------


def test_tiny_projected_euler_step(tiny):
    np.testing.assert_allclose(step(tiny, [0.0, 0.0], 0.1), [0.4, 0.0], atol=1e-15)


def test_equilibrium_is_fixed_point(tiny):
    for scheme in ("projected-euler", "tangent-euler"):
        np.testing.assert_allclose(step(tiny, [2.0, 1.0], 0.1, scheme), [2.0, 1.0], atol=1e-15)


def test_schemes_coincide_in_interior(tiny):
    z = np.array([0.5, 0.5])
    np.testing.assert_array_equal(step(tiny, z, 0.01, "projected-euler"), step(tiny, z, 0.01, "tangent-euler"))


def test_tiny_residuals(tiny):
    assert residual(tiny, [2.0, 1.0]) == pytest.approx(0.0, abs=1e-15)
    assert residual(tiny, [0.0, 0.0]) == pytest.approx(4.0, abs=1e-15)
    with pytest.raises(InfeasiblePoint):
        residual(tiny, [3.0, 0.0])


def test_interior_unconstrained_equilibrium_has_zero_residual():
    inst = build_instance([[0, 1], [1, 0]], [[4], [0]], 1.0, 1.0, [100, 100])
    assert residual(inst, [8 / 3, 4 / 3]) <= 1e-14


def test_tiny_simulation_converges(tiny):
    tr = simulate(tiny, [0.0, 0.0], SimConfig(step=1e-3, t_end=100.0, stop_residual=1e-8))
    assert tr.terminated_by == "residual"
    np.testing.assert_allclose(tr.final, [2.0, 1.0], atol=1e-6)
    assert np.all(np.diff(tr.times) > 0)


def test_start_at_equilibrium(tiny):
    tr = simulate(tiny, [2.0, 1.0], SimConfig(step=1e-3))
    assert tr.terminated_by == "residual" and len(tr) == 1
    np.testing.assert_array_equal(tr.final, [2.0, 1.0])


def test_single_agent_reaches_feasible_preference():
    inst = build_instance([[0.0]], [[1.0, 2.0]], [[1.0, 3.0]], [[1.0, 1.0]], 10.0)
    tr = simulate(inst, [0.0, 0.0], SimConfig(stop_residual=1e-12, t_end=1e3))
    np.testing.assert_allclose(tr.final, [1.0, 2.0], atol=1e-10)


def test_infeasible_start(tiny):
    with pytest.raises(InfeasibleStart):
        simulate(tiny, [5.0, 0.0])


def test_step_limits(tiny):
    with pytest.raises(StepTooLarge):
        simulate(tiny, [0.0, 0.0], SimConfig(step=2 * max_step(tiny)))
    with pytest.raises(StepTooLarge):
        step(tiny, [0.0, 0.0], 2.5 / tiny.jacobian_norm)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(scheme="rk4")
    with pytest.raises(ValueError):
        SimConfig(step=-1.0)
    with pytest.raises(ValueError):
        SimConfig(record_every=0)


def test_record_every_keeps_last_sample(tiny):
    tr = simulate(tiny, [0.0, 0.0], SimConfig(step=1e-2, stop_residual=1e-8, record_every=7))
    assert tr.times[0] == 0.0
    assert tr.residuals[-1] <= 1e-8


def test_horizon_termination(tiny):
    tr = simulate(tiny, [0.0, 0.0], SimConfig(step=1e-2, t_end=0.5))
    assert tr.terminated_by == "horizon"
    assert tr.times[-1] == pytest.approx(0.5)


def test_stall_when_residual_changes_too_little():
    # the residual halves every step; a 60% tolerance classifies that as stagnation
    inst = build_instance([[0.0]], [[5.0]], [[1.0]], 1.0, 10.0)
    tr = simulate(inst, [0.0], SimConfig(t_end=1e3, stall_window=0.5, stall_rtol=0.6, stop_residual=1e-12))
    assert tr.terminated_by == "stall"
    assert tr.times[-1] == pytest.approx(0.5)


def test_saddle_escape_is_not_a_stall():
    # signed instance whose residual grows for a while before converging
    inst = generate_instance(GeneratorSpec(n=7, m=4, seed=26, regime="a3"))
    assert jacobian_definiteness(inst) == "indefinite"
    z0 = random_feasible_profile(inst, np.random.default_rng(1026))
    tr = simulate(inst, z0, SimConfig(t_end=100.0, stop_residual=1e-10, record_every=100))
    assert tr.terminated_by == "residual"
    # the residual grows several-fold over more than one stall window before decaying
    assert tr.residuals[5] > 3 * tr.residuals[1]


# --- properties -------------------------------------------------------------------


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.sampled_from(["projected-euler", "tangent-euler"]))
def test_feasibility_lyapunov_and_better_response(seed, scheme):
    inst = _instance(seed % 60)
    z0 = random_feasible_profile(inst, np.random.default_rng(seed))
    tr = simulate(inst, z0, SimConfig(t_end=5.0, scheme=scheme))
    kappa = lyapunov_slack(inst)
    assert np.all(np.diff(tr.lyapunov) <= kappa * tr.step**2)
    for z in tr.states[::25]:
        assert is_feasible(inst, z)
        assert np.all(better_response_margins(inst, z) >= -1e-10)


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_schemes_agree_at_terminal_point(seed):
    inst = _instance(seed % 40, regime="a1")
    z0 = random_feasible_profile(inst, np.random.default_rng(seed))
    delta = max_step(inst) / 4
    ends = [simulate(inst, z0, SimConfig(step=delta, t_end=200.0, stop_residual=1e-9, scheme=s,
                                         record_every=10**9)).final
            for s in ("projected-euler", "tangent-euler")]
    assert np.linalg.norm(ends[0] - ends[1]) <= 10 * delta


def test_refinement_is_first_order():
    # budgets never bind here, so the scheme is plain explicit Euler
    inst = build_instance([[0, 1], [1, 0]], [[4], [0]], 1.0, 1.0, [100, 100])
    z0 = [0.3, 0.2]
    g1 = refinement_gap(inst, z0, 1.0, 0.02)
    g2 = refinement_gap(inst, z0, 1.0, 0.01)
    assert g2 < g1
    assert 1.5 < g1 / g2 < 2.5


def test_velocity_matches_residual():
    inst = _instance(3)
    z = random_feasible_profile(inst, np.random.default_rng(3))
    assert np.linalg.norm(pds_velocity(inst, z)) == pytest.approx(residual(inst, z), rel=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_monotone_attraction_when_psd(seed):
    inst = _instance(seed, regime="a1")
    z_star = solve_equilibrium(inst, "potential-qp").point
    z0 = random_feasible_profile(inst, np.random.default_rng(seed))
    tr = simulate(inst, z0, SimConfig(t_end=30.0, stop_residual=1e-10))
    dist = np.linalg.norm(tr.states - z_star, axis=1)
    assert np.all(np.diff(dist) <= 1e-8)
