import numpy as np
import pytest

from te_mdp.dfa import to_dfa
from te_mdp.mdp import validate
from te_mdp.product import build_product, value_iteration_reach
from te_mdp.scenarios import (
    ACTIONS, GridSpec, LONG_ROUTE, MARS_DENSE, MARS_SPARSE, MovingObstacle, ROAMING_REGION, ScenarioError,
    agent_kernel, build, build_moving_obstacle, build_static_uncertain, level_vectors, mars_grid,
    moving_obstacle_grid, obstacle_law,
)

N, S, E, W, STAY = range(5)


def test_moving_obstacle_grid_size():
    spec = moving_obstacle_grid()
    mdp = build(spec)
    assert spec.n_cells == 35
    assert mdp.n_states == 105 and mdp.n_actions == 5
    assert validate(mdp) == []
    assert mdp.states.n_expensive == 3
    assert ROAMING_REGION == set(spec.moving_obstacle.cells)
    assert not LONG_ROUTE & ROAMING_REGION


def test_slip_row_for_north_move():
    spec = GridSpec(5, 5, agent_start=12, slip=0.1)
    P = agent_kernel(spec)
    row = P[12, N]
    assert row[7] == pytest.approx(0.8) and row[8] == pytest.approx(0.1) and row[6] == pytest.approx(0.1)
    assert row.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.count_nonzero(row) == 3
    # east move slips to north-east and south-east
    row = P[12, E]
    assert row[13] == pytest.approx(0.8) and row[8] == pytest.approx(0.1) and row[18] == pytest.approx(0.1)


def test_edges_and_stay():
    spec = GridSpec(3, 3, agent_start=0, slip=0.1)
    P = agent_kernel(spec)
    assert P[0, N, 0] == 1.0  # off-grid move: stay in place
    assert P[0, STAY, 0] == 1.0
    # moving east along the top row: the off-grid diagonal is dropped, the rest renormalized
    assert P[0, E, 1] == pytest.approx(0.8 / 0.9) and P[0, E, 4] == pytest.approx(0.1 / 0.9)


def test_zero_slip_is_deterministic_and_reaches():
    spec = moving_obstacle_grid(slip=0.0)
    mdp = build(spec)
    assert set(np.unique(mdp.transition)) <= {0.0, 0.5, 0.25, 1.0}
    A = agent_kernel(spec)
    assert set(np.unique(A)) == {0.0, 1.0}
    # with a static world the agent reaches the goal surely
    static = GridSpec(5, 7, spec.static_obstacles, spec.goal_cells, 34, 0.0, uncertain_cells=((0, 0.0),))
    pm = build_product(build(static), to_dfa("!crash U goal"))
    h, _ = value_iteration_reach(pm, 25)
    assert h[25, pm.initial] == 1.0


def test_crash_and_goal_labels():
    mdp = build(moving_obstacle_grid())
    spec = moving_obstacle_grid()
    for x in range(mdp.n_states):
        e, f = mdp.states.decompose(x)
        ob = spec.moving_obstacle.cells[e]
        assert ("crash" in mdp.labeling[x]) == (f in spec.static_obstacles or f == ob)
        assert ("goal" in mdp.labeling[x]) == (f == 30)


def test_factorized_kernel():
    for spec in (moving_obstacle_grid(), mars_grid()):
        mdp = build(spec)
        nf = mdp.states.n_free
        ne = mdp.states.n_expensive
        P = mdp.transition.reshape(ne, nf, 5, ne, nf)
        A = agent_kernel(spec)
        env = P.sum(axis=4)[:, :, 0, :]  # (e, f, e'): independent of the action
        for u in range(5):
            assert np.allclose(P.sum(axis=4)[:, :, u, :], env, atol=1e-15)
        assert np.allclose(P, env[:, :, None, :, None] * A[None, :, :, None, :], atol=1e-15)


def test_obstacle_law_default():
    B = obstacle_law(moving_obstacle_grid())
    assert np.allclose(B, [[0.5, 0.5, 0.0], [0.25, 0.5, 0.25], [0.0, 0.5, 0.5]])


def test_custom_law_and_errors():
    spec = moving_obstacle_grid()
    law = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    mdp = build(GridSpec(5, 7, spec.static_obstacles, spec.goal_cells, 34, 0.1, MovingObstacle((22, 27, 32), 27, law=law)))
    assert validate(mdp) == []
    with pytest.raises(ScenarioError):
        GridSpec(5, 7, agent_start=34, moving_obstacle=MovingObstacle((22, 27), 27, law=((0.5, 0.6), (0, 1))))
    with pytest.raises(ScenarioError):
        GridSpec(5, 7, static_obstacles={34}, agent_start=34)
    with pytest.raises(ScenarioError):
        GridSpec(5, 7, agent_start=27, moving_obstacle=MovingObstacle((22, 27, 32), 27))
    with pytest.raises(ScenarioError):
        GridSpec(5, 7, agent_start=40)
    with pytest.raises(ScenarioError):
        GridSpec(5, 7, slip=0.5)
    with pytest.raises(ScenarioError):
        build_moving_obstacle(GridSpec(3, 3))
    with pytest.raises(ScenarioError):
        build_static_uncertain(GridSpec(3, 3))


def test_levels_and_cap():
    with pytest.raises(ScenarioError):
        GridSpec(5, 5, uncertain_cells=((3, 0.3),))
    cells = tuple((c, 0.4) for c in range(1, 6))
    with pytest.raises(ScenarioError):
        GridSpec(5, 5, uncertain_cells=cells)
    spec = GridSpec(5, 5, uncertain_cells=cells, max_uncertain=5)
    assert len(level_vectors(spec)) == 3 ** 5


def one_cell(level, start, d=2):
    return GridSpec(7, 1, agent_start=start, slip=0.0, uncertain_cells=((6, level),), scout_range=d)


def env_step(spec, mdp, u=STAY):
    x0 = mdp.initial
    row = mdp.transition[x0, u]
    out = {}
    for y in np.nonzero(row)[0]:
        e, _ = mdp.states.decompose(int(y))
        out[mdp.states.expensive_states[e]] = out.get(mdp.states.expensive_states[e], 0.0) + row[y]
    return out


def test_scouting_within_range():
    spec = one_cell(0.4, start=4)
    mdp = build(spec)
    assert validate(mdp) == []
    assert env_step(spec, mdp) == pytest.approx({"o=(1)": 0.4, "o=(0)": 0.6})


def test_no_scouting_out_of_range():
    spec = one_cell(0.4, start=3)
    mdp = build(spec)
    assert env_step(spec, mdp) == {"o=(0.4)": 1.0}


@pytest.mark.parametrize("level", [0.0, 1.0])
def test_resolved_levels_absorb(level):
    spec = one_cell(level, start=5)
    mdp = build(spec)
    assert env_step(spec, mdp) == {f"o=({level:g})": 1.0}


def test_mars_map():
    spec = mars_grid()
    mdp = build(spec)
    assert validate(mdp) == []
    assert mdp.n_states == 35 * 27
    assert len(spec.uncertain_cells) <= 3
    assert not MARS_DENSE & MARS_SPARSE
    dense_cells = {c for c, _ in spec.uncertain_cells if c in MARS_DENSE}
    sparse_cells = {c for c, _ in spec.uncertain_cells if c in MARS_SPARSE}
    assert len(dense_cells) > len(sparse_cells) >= 1


def test_rock_labels():
    spec = mars_grid()
    mdp = build(spec)
    for x in range(mdp.n_states):
        e, f = mdp.states.decompose(x)
        name = mdp.states.expensive_states[e]
        levels = [float(v) for v in name[3:-1].split(",")]
        rock = any(o == 1.0 and c == f for (c, _), o in zip(spec.uncertain_cells, levels))
        assert ("crash" in mdp.labeling[x]) == (rock or f in spec.static_obstacles)


def test_build_rejects_mixed_spec():
    with pytest.raises(ScenarioError):
        build(GridSpec(5, 7, agent_start=34, moving_obstacle=MovingObstacle((22, 27, 32), 27), uncertain_cells=((0, 0.2),)))
