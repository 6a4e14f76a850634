import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from budget_pds import (
    best_response,
    build_instance,
    potential,
    simulate,
    solve_equilibrium,
    unconstrained_equilibrium,
    utility,
    verify_nash,
    verify_vi,
)
from budget_pds.config import REGIMES, GeneratorSpec, generate_instance, instance_from_config, random_feasible_profile
from budget_pds.equilibrium_solver import jacobian_definiteness, neighbor_preference
from budget_pds.errors import AssumptionViolated, NonpositiveDTilde, NotPSD, SingularJacobian
from budget_pds.oracles import best_response_fixed_point
from budget_pds.four_agent import example_run_config
from budget_pds.pds_integrator import SimConfig
from budget_pds.structure_analysis import classify, partition_agents


def _instance(seed, regime):
    return generate_instance(GeneratorSpec(n=2 + seed % 4, m=1 + seed % 3, seed=seed, regime=regime))


# --- examples -------------------------------------------------------------------


def test_tiny_unconstrained_equilibrium(tiny):
    np.testing.assert_allclose(unconstrained_equilibrium(tiny), [8 / 3, 4 / 3], atol=1e-14)


def test_decoupled_unconstrained_equilibrium_is_preference():
    inst = build_instance([[0.0]], [[1.0, 7.0]], [[2.0, 3.0]], 1.0, 1.0)
    np.testing.assert_allclose(unconstrained_equilibrium(inst), [1.0, 7.0], atol=1e-15)


def test_singular_jacobian():
    # J = [[0.5, 0.5], [0.5, 0.5]] for w = 1 and a12 = -0.5
    inst = build_instance([[0, -0.5], [-0.5, 0]], [[1], [1]], 1.0, 1.0, [10, 10])
    with pytest.raises(SingularJacobian):
        unconstrained_equilibrium(inst)


def test_tiny_best_responses(tiny):
    np.testing.assert_allclose(best_response(tiny, 1, [2.0, 0.0]), [1.0], atol=1e-15)
    np.testing.assert_allclose(best_response(tiny, 0, [0.0, 1.0]), [2.0], atol=1e-15)
    npref = neighbor_preference(tiny, 0, [0.0, 1.0])
    assert npref.p_tilde[0] == pytest.approx(2.5) and npref.d_tilde[0] == pytest.approx(2.0)


def test_isolated_agent_best_response_is_preference():
    inst = build_instance([[0.0]], [[1.0, 2.0]], 1.0, 1.0, 10.0)
    np.testing.assert_allclose(best_response(inst, 0, [0.0, 0.0]), [1.0, 2.0], atol=1e-15)


@pytest.mark.parametrize("method", ["potential-qp", "best-response", "trajectory-limit"])
def test_tiny_all_methods(tiny, method):
    rep = solve_equilibrium(tiny, method)
    np.testing.assert_allclose(rep.point, [2.0, 1.0], atol=1e-9)
    assert rep.potential_value == pytest.approx(-3.0, abs=1e-9)
    assert rep.certified and rep.nash_certified
    assert rep.uniqueness == "unique"


def test_decoupled_feasible_preference_is_equilibrium():
    inst = build_instance([[0.0]], [[1.0, 2.0]], [[1.0, 4.0]], 1.0, 10.0)
    for method in ("potential-qp", "best-response", "trajectory-limit"):
        np.testing.assert_allclose(solve_equilibrium(inst, method).point, [1.0, 2.0], atol=1e-9)


def test_tiny_vi_margins(tiny):
    np.testing.assert_allclose(verify_vi(tiny, [2.0, 1.0]), [0.0, 0.0], atol=1e-15)
    assert verify_vi(tiny, [0.0, 0.0])[0] == pytest.approx(-8.0)
    interior = build_instance([[0, 1], [1, 0]], [[4], [0]], 1.0, 1.0, [100, 100])
    np.testing.assert_allclose(verify_vi(interior, [8 / 3, 4 / 3]), 0.0, atol=1e-13)


def test_tiny_nash_residuals(tiny):
    np.testing.assert_allclose(verify_nash(tiny, [2.0, 1.0]), [0.0, 0.0], atol=1e-15)
    assert verify_nash(tiny, [0.0, 0.0])[0] == pytest.approx(2.0)


def test_method_preconditions():
    signed = build_instance([[0, -3.0], [-3.0, 0]], [[1], [1]], 1.0, 1.0, [10, 10])
    assert jacobian_definiteness(signed) == "indefinite"
    with pytest.raises(NotPSD):
        solve_equilibrium(signed, "potential-qp")
    with pytest.raises(AssumptionViolated):
        solve_equilibrium(signed, "best-response")
    with pytest.raises(NonpositiveDTilde):
        best_response(signed, 0, [0.0, 0.0])
    rep = solve_equilibrium(signed, "trajectory-limit")
    assert rep.certified and rep.nash_residuals is None and rep.uniqueness == "unknown"
    with pytest.raises(ValueError):
        solve_equilibrium(signed, "newton")


def test_published_run2_agent2_sits_at_its_neighbour_preference():
    inst = instance_from_config(example_run_config("run2"))
    rep = solve_equilibrium(inst, "potential-qp")
    assert rep.certified
    z = inst.blocks(rep.point)
    assert 1 in partition_agents(inst, z).non_exhausting
    np.testing.assert_allclose(z[1], neighbor_preference(inst, 1, z).p_tilde, atol=1e-8)


# --- properties -------------------------------------------------------------------


@given(st.integers(0, 10_000))
def test_neighbor_preference_identity(seed):
    inst = _instance(seed % 40, REGIMES[seed % 4])
    rng = np.random.default_rng(seed)
    z = rng.uniform(0, 10, inst.dim)
    i = int(rng.integers(inst.n))
    npref = neighbor_preference(inst, i, z)
    zi = inst.blocks(z)[i]
    rewritten = -0.5 * np.sum(npref.d_tilde * (zi - npref.p_tilde) ** 2) - npref.delta
    u = utility(inst, i, z)
    assert abs(u - rewritten) <= 1e-9 * max(1.0, abs(u))
    if classify(inst).a1:
        assert np.all(npref.p_tilde >= 0) and np.all(npref.d_tilde > 0)


@settings(max_examples=20)
@given(st.integers(0, 10_000))
def test_nash_implies_vi(seed):
    inst = _instance(seed % 40, REGIMES[seed % 4])
    if np.any(inst.weights.min(axis=1) + inst.influence.sum(axis=1) <= 0):
        return  # best responses undefined
    # best-response iterations may diverge with enemies; test the implication at the
    # best-response profile of a random point, then at a certified equilibrium
    method = "trajectory-limit" if jacobian_definiteness(inst) == "indefinite" else "potential-qp"
    z = solve_equilibrium(inst, method).point
    if np.all(verify_nash(inst, z) <= 1e-7):
        assert np.all(verify_vi(inst, z) >= -1e-7)


@settings(max_examples=20)
@given(st.integers(0, 10_000))
def test_solver_existence_and_certificate(seed):
    inst = _instance(seed % 60, REGIMES[seed % 4])
    method = "trajectory-limit" if jacobian_definiteness(inst) == "indefinite" else "potential-qp"
    rep = solve_equilibrium(inst, method)
    assert rep.certified
    if classify(inst).a3:
        assert rep.nash_certified


@pytest.mark.parametrize("seed", range(6))
def test_best_response_matches_enumeration_oracle(seed):
    inst = _instance(seed, "a1")
    fast = solve_equilibrium(inst, "best-response").point
    np.testing.assert_allclose(fast, best_response_fixed_point(inst), atol=1e-8)


@pytest.mark.parametrize("seed", range(4))
def test_equilibrium_maximises_potential(seed):
    inst = _instance(seed, "a1")
    rep = solve_equilibrium(inst, "potential-qp")
    rng = np.random.default_rng(seed)
    for _ in range(250):
        z = random_feasible_profile(inst, rng)
        assert rep.potential_value >= potential(inst, z) - 1e-9


@pytest.mark.parametrize("seed", range(4))
def test_best_response_order_independent_at_fixed_point(seed):
    inst = _instance(seed, "a1")
    Z = inst.blocks(solve_equilibrium(inst, "best-response").point)
    for i in reversed(range(inst.n)):
        np.testing.assert_allclose(best_response(inst, i, Z), Z[i], atol=1e-9)


@pytest.mark.parametrize("z0", [[1.0, 3.0], [4.0, 0.5], [0.0, 0.0], [2.5, 2.5]])
def test_limit_on_equilibrium_continuum_is_projection(z0):
    """J = [[.5, .5], [.5, .5]] is PSD with kernel (1, -1); with p1 = p2 = 2 and
    roomy budgets the equilibria are the segment z1 + z2 = 4, z >= 0."""
    inst = build_instance([[0, -0.5], [-0.5, 0]], [[2], [2]], 1.0, 1.0, [50, 50])
    assert jacobian_definiteness(inst) == "positive-semidefinite"
    z0 = np.array(z0)
    expected = z0 + (4.0 - z0.sum()) / 2.0 * np.ones(2)
    tr = simulate(inst, z0, SimConfig(stop_residual=1e-12, t_end=1e3, record_every=10**9))
    np.testing.assert_allclose(tr.final, expected, atol=1e-4)
    qp = solve_equilibrium(inst, "potential-qp", z0=z0)
    assert qp.certified and qp.uniqueness == "unknown"
    assert qp.point.sum() == pytest.approx(4.0, abs=1e-9)
