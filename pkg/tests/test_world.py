import json
import math

import numpy as np
import pytest

from conftest import FixedUniforms
from swarm_feasibility.agent import AgentPhase, AgentState, DmmdParams, Phase
from swarm_feasibility.config import MotionParams, RunConfig
from swarm_feasibility.errors import ConfigError, InvalidStateError
from swarm_feasibility.geometry import ArenaSpec, TorusPoint, torus_distance
from swarm_feasibility.world import (
    Task,
    init_world,
    move_agent,
    neighborhoods,
    neighbors_of,
    opinion_fraction,
    phase_snapshot,
    world_step,
)

ARENA = ArenaSpec(20.0)


def place(world, positions, tasks=()):
    """Pin agents (and optionally tasks) to given coordinates."""
    for a, p in zip(world.agents, positions):
        a.position = TorusPoint(*p)
    if tasks is not None:
        world.tasks = [Task(TorusPoint(*t)) for t in tasks]
        world._task_xy = np.array(tasks, dtype=float).reshape(-1, 2)
    return world


def test_init_world_paper_scale():
    w = init_world(RunConfig(n=20, m=40), seed=7)
    assert (w.n, w.m, w.step) == (20, 40, 0)
    assert len({a.id for a in w.agents}) == 20
    assert len({t.position for t in w.tasks}) == 40
    for a in w.agents:
        assert 0 <= a.position.x < 20 and 0 <= a.position.y < 20
        assert 0 <= a.heading < 2 * math.pi
        assert a.phase.tag is Phase.EXPLORING and a.phase.remaining_steps >= 1
        assert a.straight_steps_remaining >= 1
        assert a.counters.n_obs == a.counters.m_obs == 0


def test_init_world_degenerate():
    w = init_world(RunConfig(n=1, m=0), seed=3)
    assert (w.n, w.m) == (1, 0)
    for _ in range(50):
        world_step(w)
    assert w.agents[0].counters.n_obs == 0


def test_init_world_deterministic():
    a = init_world(RunConfig(n=20, m=40), seed=11)
    b = init_world(RunConfig(n=20, m=40), seed=11)
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())
    c = init_world(RunConfig(n=20, m=40), seed=12)
    assert json.dumps(a.to_dict()) != json.dumps(c.to_dict())


def test_config_errors_list_fields():
    with pytest.raises(ConfigError) as exc:
        RunConfig(n=0, m=-1, horizon=0)
    text = str(exc.value)
    assert "n must" in text and "m must" in text and "horizon must" in text


def test_initial_opinions_are_fair_coins():
    ones = sum(opinion_fraction(init_world(RunConfig(n=20), seed=s)) * 20 for s in range(200))
    # 4000 coin flips: mean 2000, sd ~31.6
    assert abs(ones - 2000) < 5 * math.sqrt(4000 * 0.25)


def _agent(**kw):
    base = dict(id=1, position=TorusPoint(5.0, 5.0), heading=0.0, straight_steps_remaining=3,
                opinion=1, phase=AgentPhase(Phase.EXPLORING, 4))
    base.update(kw)
    return AgentState(**base)


def test_move_agent_straight_segment():
    a = move_agent(_agent(), MotionParams(1.0, 5.0), ARENA, FixedUniforms())
    assert a.position == pytest.approx((6.0, 5.0))
    assert a.straight_steps_remaining == 2


def test_move_agent_resamples_heading_when_segment_ends():
    # heading u=0.25 -> pi/2; segment length u=1-e^-1 with mean 5 -> 5
    a = move_agent(_agent(straight_steps_remaining=0), MotionParams(1.0, 5.0), ARENA,
                   FixedUniforms(0.25, 1 - math.exp(-1)))
    assert a.heading == pytest.approx(math.pi / 2)
    assert a.position == pytest.approx((5.0, 6.0))
    assert a.straight_steps_remaining == 4


def test_move_agent_zero_speed():
    a = move_agent(_agent(heading=2.0), MotionParams(0.0, 5.0), ARENA, FixedUniforms())
    assert a.position == (5.0, 5.0)


def test_neighbors_basic():
    w = place(init_world(RunConfig(n=2, m=1), seed=1), [(5, 5), (6.5, 5)], [(5, 6)])
    hood = neighbors_of(w, 0)
    assert (hood.robots_in_range, hood.tasks_in_range) == (1, 1)


def test_neighbors_wrap_boundary():
    w = place(init_world(RunConfig(n=1, m=1), seed=1), [(1, 1)], [(19, 1)])
    assert neighbors_of(w, 0).tasks_in_range == 1


def test_neighbors_closed_ball():
    w = place(init_world(RunConfig(n=2, m=1), seed=1), [(5, 5), (7, 5)], [(5, 7.000001)])
    hood = neighbors_of(w, 0)
    assert (hood.robots_in_range, hood.tasks_in_range) == (1, 0)


def test_lone_agent_neighborhood():
    w = init_world(RunConfig(n=1, m=0), seed=1)
    assert tuple(neighbors_of(w, 0)) == (0, 0, [])


def test_neighbors_report_only_disseminators():
    w = place(init_world(RunConfig(n=3, m=0), seed=1), [(5, 5), (6, 5), (5, 6)], ())
    w.agents[1].phase = AgentPhase(Phase.DISSEMINATING, 3)
    w.agents[1].opinion = 0
    hood = neighbors_of(w, 0)
    assert hood.robots_in_range == 2
    assert hood.disseminators == [(w.agents[1].id, 0)]


@pytest.mark.parametrize("seed", range(6))
def test_vectorized_neighborhoods_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    cfg = RunConfig(n=int(rng.integers(1, 6)), m=int(rng.integers(0, 6)), observation_range=4.0,
                    dmmd=DmmdParams(3.0, 3.0))
    w = init_world(cfg, seed=seed)
    for _ in range(100):
        snap = phase_snapshot(w)
        fast = neighborhoods(w, snap)
        for i in range(w.n):
            assert fast[i] == neighbors_of(w, i, snap)
        world_step(w)


def test_step_moves_everyone_one_unit_and_conserves_counts():
    w = init_world(RunConfig(n=20, m=30), seed=5)
    for _ in range(200):
        before = [a.position for a in w.agents]
        step = w.step
        world_step(w)
        assert w.step == step + 1
        assert (w.n, w.m) == (20, 30)
        for p, a in zip(before, w.agents):
            assert torus_distance(p, a.position, ARENA) == pytest.approx(1.0, abs=1e-9)


def test_delivery_within_range_only():
    cfg = RunConfig(n=3, m=0, motion=MotionParams(0.0, 5.0))
    w = place(init_world(cfg, seed=2), [(5, 5), (6.5, 5), (12, 12)], ())
    sender = w.agents[0]
    sender.phase = AgentPhase(Phase.DISSEMINATING, 5)
    sender.opinion = 1
    for a in w.agents[1:]:
        a.phase = AgentPhase(Phase.EXPLORING, 5)
    world_step(w)
    assert w.agents[1].buffer.entries == {sender.id: 1}
    assert w.agents[2].buffer.entries == {}


def test_dissemination_end_forwards_majority():
    cfg = RunConfig(n=3, m=0, motion=MotionParams(0.0, 5.0))
    w = place(init_world(cfg, seed=2), [(5, 5), (6, 5), (5, 6)], ())
    me, a, b = w.agents
    me.phase = AgentPhase(Phase.DISSEMINATING, 1)
    me.opinion = 0
    for other in (a, b):
        other.phase = AgentPhase(Phase.DISSEMINATING, 5)
        other.opinion = 1
    world_step(w)
    assert me.phase.tag is Phase.EXPLORING
    assert me.opinion == 1


def test_world_step_determinism():
    def final(seed):
        w = init_world(RunConfig(n=20, m=40), seed=seed)
        for _ in range(300):
            world_step(w)
        return json.dumps(w.to_dict())

    assert final(4) == final(4)


def test_opinion_fraction():
    w = init_world(RunConfig(n=20), seed=1)
    for k, a in enumerate(w.agents):
        a.opinion = int(k < 19)
    assert opinion_fraction(w) == 0.95
    for a in w.agents:
        a.opinion = 0
    assert opinion_fraction(w) == 0.0
    for k, a in enumerate(w.agents):
        a.opinion = k % 2
    assert opinion_fraction(w) == 0.5
    w.agents = []
    with pytest.raises(InvalidStateError):
        opinion_fraction(w)
