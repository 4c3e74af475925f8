import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from swarmsim.dynamics import AS_WRITTEN, SQUARED, AgentState, DynamicsParams, step, velocities, velocity
from swarmsim.errors import CoincidenceWarning, IntegrationDiverged


def test_one_step_example_is_exact():
    (a,) = step([AgentState(1, (1.0, 0.0), (0.0, 0.0))], DynamicsParams())
    assert a.position.tolist() == [0.95, 0.0]
    assert a.distance_traveled == pytest.approx(0.05, abs=1e-15)


def test_single_agent_matches_linear_recurrence():
    params = DynamicsParams()
    goal = np.array([3.0, -2.0])
    p0 = np.array([-7.0, 11.0])
    agents = [AgentState(1, p0, goal)]
    lam = 1 - params.k_c * params.dt
    for t in range(1, 1001):
        agents = step(agents, params)
        expected = goal + lam**t * (p0 - goal)
        assert np.max(np.abs(agents[0].position - expected)) < 1e-9


@pytest.mark.parametrize("kw", [{"k_c": 0}, {"k_r": -1}, {"r_s": 0}, {"dt": 0}, {"repulsion_exponent_mode": "cubed"}])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        DynamicsParams(**kw)


def test_repulsion_pushes_agents_apart():
    p = np.array([[0.0, 0.0], [0.01, 0.0]])
    v, _ = velocities(p, p, DynamicsParams())
    assert v[0, 0] < 0 < v[1, 0]


def test_repulsion_modes_differ():
    p = np.array([[0.0, 0.0], [0.05, 0.0]])
    w_lin = math.exp(-0.05 / 0.0575**2)
    w_sq = math.exp(-0.05**2 / 0.0575**2)
    v_lin, _ = velocities(p, p, DynamicsParams(repulsion_exponent_mode=AS_WRITTEN))
    v_sq, _ = velocities(p, p, DynamicsParams(repulsion_exponent_mode=SQUARED))
    assert v_lin[1, 0] == pytest.approx(2.5 * w_lin * 0.05, rel=1e-12)
    assert v_sq[1, 0] == pytest.approx(2.5 * w_sq * 0.05, rel=1e-12)


@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=2, max_size=8, unique=True))
def test_repulsion_cancels_in_the_sum(pts):
    # pairwise forces are equal and opposite, so only attraction moves the mean
    p = np.array(pts)
    g = p[::-1].copy()
    params = DynamicsParams()
    v, _ = velocities(p, g, params)
    np.testing.assert_allclose(v.sum(axis=0), -params.k_c * (p - g).sum(axis=0), atol=1e-9)


def test_velocity_matches_vectorized():
    agents = [AgentState(i, (0.03 * i, 0.02 * i * i), (1.0, 1.0)) for i in range(1, 5)]
    v_all, _ = velocities(np.array([a.position for a in agents]), np.array([a.current_goal for a in agents]), DynamicsParams())
    for k, a in enumerate(agents):
        np.testing.assert_allclose(velocity(a, agents, DynamicsParams()), v_all[k], rtol=1e-12)


def test_coincident_agents_warn_and_stay_finite():
    agents = [AgentState(1, (0, 0), (1, 0)), AgentState(2, (0, 0), (-1, 0))]
    with pytest.warns(CoincidenceWarning):
        out = step(agents, DynamicsParams(), tick=4)
    assert all(np.all(np.isfinite(a.position)) for a in out)
    with pytest.warns(CoincidenceWarning):
        velocity(agents[0], agents, DynamicsParams())


def test_divergence_is_reported():
    params = DynamicsParams(k_c=1e308, dt=10.0)
    with pytest.raises(IntegrationDiverged) as exc:
        step([AgentState(1, (1e10, 0), (-1e10, 0))], params, tick=17)
    assert exc.value.tick == 17


def test_update_is_synchronous():
    params = DynamicsParams()
    agents = [AgentState(1, (0.0, 0.0), (1.0, 0.0)), AgentState(2, (0.02, 0.0), (1.0, 0.0))]
    forward = step(agents, params)
    backward = step(agents[::-1], params)[::-1]
    for a, b in zip(forward, backward):
        assert a.position.tolist() == b.position.tolist()


def test_distance_accumulates_per_step():
    params = DynamicsParams()
    agents = [AgentState(1, (2.0, 1.0), (0.0, 0.0))]
    total = 0.0
    for _ in range(50):
        before = agents[0].position
        agents = step(agents, params)
        total += math.hypot(*(agents[0].position - before))
    assert agents[0].distance_traveled == total


def test_no_warnings_for_separated_agents():
    agents = [AgentState(1, (0, 0), (0, 0)), AgentState(2, (1, 0), (1, 0))]
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        step(agents, DynamicsParams())
