import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from hypothesis.extra.numpy import arrays

from budget_pds import AgentPolytope, active_set, project_euclidean, project_profile, project_tangent_cone, project_weighted
from budget_pds.config import GeneratorSpec, generate_instance, random_feasible_profile
from budget_pds.errors import InfeasiblePoint, NonpositiveWeight
from budget_pds.feasible_set import is_feasible, project_profile_tangent
from budget_pds.oracles import enumerate_cone_projection, enumerate_projection

finite = st.floats(-20, 20, allow_nan=False)
positive = st.floats(0.2, 5.0)


@st.composite
def polytope_and_point(draw, with_weights=False):
    m = draw(st.integers(1, 4))
    c = draw(arrays(float, m, elements=positive))
    B = draw(st.floats(0.5, 10.0))
    x = draw(arrays(float, m, elements=finite))
    out = [AgentPolytope(c, B), x]
    if with_weights:
        out.append(draw(arrays(float, m, elements=positive)))
    return out


@st.composite
def feasible_point(draw):
    """A point of a polytope with exact zeros and, sometimes, exactly on the budget face."""
    poly, x = draw(polytope_and_point())
    z = np.abs(x) / 20.0
    z[draw(arrays(bool, poly.m))] = 0.0
    spend = poly.cost @ z
    if spend > 0 and (draw(st.booleans()) or spend > poly.budget):
        z = z * (poly.budget / spend)
    v = draw(arrays(float, poly.m, elements=st.floats(-5, 5)))
    return poly, z, v


def _kkt_euclidean(poly, x, y):
    """Projection KKT residual: y - x = -lam c + mu, lam >= 0, mu >= 0, complementarity."""
    g = x - y  # = lam c - mu
    free = y > 1e-12
    lam = float(np.mean(g[free] / poly.cost[free])) if np.any(free) else max(0.0, float(np.max(g / poly.cost)))
    mu = lam * poly.cost - g
    res = np.abs(mu[free]).max(initial=0.0)
    res = max(res, -mu.min(initial=0.0), -lam)
    if lam > 1e-12:
        res = max(res, abs(poly.cost @ y - poly.budget))
    return res


# --- examples -------------------------------------------------------------------


def test_euclidean_examples():
    poly = AgentPolytope([1.0, 1.0], 4.0)
    np.testing.assert_allclose(project_euclidean(poly, [3, 3]), [2, 2], atol=1e-14)
    np.testing.assert_allclose(project_euclidean(poly, [-1, 2]), [0, 2], atol=0)
    np.testing.assert_allclose(project_euclidean(poly, [1, 1]), [1, 1], atol=0)


def test_weighted_examples():
    poly = AgentPolytope([1.0], 2.0)
    y, lam = project_weighted(poly, [2.0], [2.5], return_multiplier=True)
    assert y[0] == pytest.approx(2.0, abs=1e-14)
    assert lam == pytest.approx(2.0 * (2.0 - 2.5), abs=1e-14)
    poly2 = AgentPolytope([1.0, 1.0], 2.0)
    for second in (-1.0, -3.5):
        x = [2.5, second]
        np.testing.assert_allclose(project_weighted(poly2, [2, 2], x), enumerate_projection([1, 1], 2.0, x, [2, 2]), atol=1e-12)
        np.testing.assert_allclose(project_weighted(poly2, [2, 2], x), [2.0, 0.0], atol=1e-14)


def test_weighted_rejects_nonpositive_weights():
    with pytest.raises(NonpositiveWeight):
        project_weighted(AgentPolytope([1.0], 1.0), [0.0], [1.0])


def test_tangent_cone_examples():
    poly = AgentPolytope([1.0, 1.0], 4.0)
    np.testing.assert_allclose(project_tangent_cone(poly, [1, 1], [-1, 3]), [-1, 3], atol=0)
    np.testing.assert_allclose(project_tangent_cone(poly, [0, 0], [-1, 2]), [0, 2], atol=0)
    np.testing.assert_allclose(project_tangent_cone(poly, [2, 2], [1, 1]), [0, 0], atol=1e-15)
    with pytest.raises(InfeasiblePoint):
        project_tangent_cone(poly, [3, 3], [1, 1])


def test_active_set_examples():
    poly = AgentPolytope([1.0, 1.0], 4.0)
    assert active_set(poly, [0, 2]) == active_set(poly, [0.0, 2.0])
    a = active_set(poly, [0, 2])
    assert a.nonneg_active == frozenset({0}) and not a.budget_active
    assert active_set(poly, [2, 2]).budget_active
    v = active_set(poly, [0, 4])
    assert v.nonneg_active == frozenset({0}) and v.budget_active
    with pytest.raises(InfeasiblePoint):
        active_set(poly, [-1, 0])


def test_vertices():
    poly = AgentPolytope([1.0, 2.0], 4.0)
    np.testing.assert_array_equal(poly.vertices(), [[0, 0], [4, 0], [0, 2]])


# --- properties -------------------------------------------------------------------


@given(polytope_and_point(with_weights=True))
def test_idempotent(data):
    poly, x, w = data
    y = project_euclidean(poly, x)
    np.testing.assert_allclose(project_euclidean(poly, y), y, atol=1e-12)
    yw = project_weighted(poly, w, x)
    np.testing.assert_allclose(project_weighted(poly, w, yw), yw, atol=1e-12)
    assert poly.contains(y) and poly.contains(yw)


@given(polytope_and_point(), arrays(float, 4, elements=finite))
def test_nonexpansive(data, other):
    poly, x = data
    x2 = other[: poly.m]
    d = np.linalg.norm(project_euclidean(poly, x) - project_euclidean(poly, x2))
    assert d <= np.linalg.norm(x - x2) + 1e-12


@given(polytope_and_point(with_weights=True), st.integers(0, 2**32 - 1))
def test_variational_inequality(data, seed):
    poly, x, w = data
    rng = np.random.default_rng(seed)
    y = project_euclidean(poly, x)
    yw = project_weighted(poly, w, x)
    for vert in poly.vertices():
        # vertices span K, so checking them covers every point of K
        assert (x - y) @ (vert - y) <= 1e-9
        assert (w * (x - yw)) @ (vert - yw) <= 1e-9
    u = rng.random(poly.m)
    u *= rng.random() * poly.budget / (poly.cost @ u)
    assert (x - y) @ (u - y) <= 1e-9


@given(polytope_and_point())
def test_kkt_residual(data):
    poly, x = data
    y = project_euclidean(poly, x)
    assert _kkt_euclidean(poly, x, y) <= 1e-10 * max(1.0, np.max(np.abs(x)))


@given(polytope_and_point(with_weights=True))
def test_matches_enumeration_oracle(data):
    poly, x, w = data
    np.testing.assert_allclose(project_euclidean(poly, x), enumerate_projection(poly.cost, poly.budget, x), atol=1e-8)
    np.testing.assert_allclose(project_weighted(poly, w, x), enumerate_projection(poly.cost, poly.budget, x, w), atol=1e-8)


@given(polytope_and_point())
def test_unit_weights_reduce_to_euclidean(data):
    poly, x = data
    np.testing.assert_allclose(project_weighted(poly, np.ones(poly.m), x), project_euclidean(poly, x), atol=1e-14)


@given(polytope_and_point(with_weights=True))
def test_weighted_multiplier_sign(data):
    poly, x, w = data
    y, lam = project_weighted(poly, w, x, return_multiplier=True)
    assert lam <= 0
    mu = w * (y - x) - lam * poly.cost
    assert np.all(mu >= -1e-9 * max(1.0, np.max(np.abs(x))))
    assert np.all(np.abs(mu * y) <= 1e-8 * max(1.0, np.max(np.abs(x))) ** 2)


@given(feasible_point())
def test_tangent_cone_matches_oracle(data):
    poly, z, v = data
    a = active_set(poly, z)
    u = project_tangent_cone(poly, z, v)
    np.testing.assert_allclose(u, enumerate_cone_projection(poly.cost, a.nonneg_active, a.budget_active, v), atol=1e-10)


@given(feasible_point())
def test_tangent_cone_is_discrete_limit(data):
    poly, z, v = data
    delta = 1e-6
    limit = (project_euclidean(poly, z + delta * v) - z) / delta
    assert np.max(np.abs(project_tangent_cone(poly, z, v) - limit)) <= 1e-4


@given(feasible_point())
def test_tangent_cone_moreau(data):
    """v = P_T(v) + P_N(v) with the two parts orthogonal."""
    poly, z, v = data
    u = project_tangent_cone(poly, z, v)
    assert abs(u @ (v - u)) <= 1e-9 * max(1.0, v @ v)


@given(st.integers(0, 500))
def test_profile_projection_is_per_agent(seed):
    inst = generate_instance(GeneratorSpec(n=2 + seed % 4, m=1 + seed % 4, seed=seed))
    rng = np.random.default_rng(seed)
    X = rng.normal(0, 20, (inst.n, inst.m))
    Y = project_profile(inst, X)
    for i in range(inst.n):
        np.testing.assert_allclose(Y[i], project_euclidean(AgentPolytope(inst.costs[i], inst.budgets[i]), X[i]), atol=1e-13)
    assert is_feasible(inst, Y)
    assert project_profile(inst, X.ravel()).shape == (inst.dim,)
    Z = random_feasible_profile(inst, rng)
    V = rng.normal(size=inst.dim)
    T = project_profile_tangent(inst, Z, V).reshape(inst.n, inst.m)
    for i in range(inst.n):
        poly = AgentPolytope(inst.costs[i], inst.budgets[i])
        np.testing.assert_allclose(T[i], project_tangent_cone(poly, inst.blocks(Z)[i], inst.blocks(V)[i]), atol=1e-13)


def test_clipped_negative_coordinates_do_not_shift_multiplier():
    # a large negative entry must drop out of the budget sum
    poly = AgentPolytope([1.0, 1.0, 1.0], 1.0)
    x = np.array([-50.0, 3.0, 1.0])
    np.testing.assert_allclose(project_euclidean(poly, x), [0.0, 1.0, 0.0], atol=1e-14)
