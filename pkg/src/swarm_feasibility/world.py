"""Arena, tasks and agents advanced in synchronous time steps.

One step is:

1. every robot moves (collision-free, periodic boundaries);
2. the set of disseminating robots and their opinions is snapshotted;
3. each robot counts other robots and tasks within the observation range
   and hears every snapshotted disseminator within the same range;
4. every robot's protocol state machine ticks;
5. the step counter advances.

Each robot draws from its own random stream, so the per-robot work in
steps 3-4 does not depend on iteration order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Optional

import numpy as np

from swarm_feasibility.agent import (
    AgentPhase,
    AgentState,
    DmmdParams,
    Phase,
    agent_tick,
    exponential_steps,
    sample_exploration_duration,
)
from swarm_feasibility.config import MotionParams, RunConfig
from swarm_feasibility.errors import InvalidStateError
from swarm_feasibility.geometry import (
    ArenaSpec,
    TorusPoint,
    pairwise_distances,
    step_along,
    torus_distance,
)

TWO_PI = 2.0 * math.pi
_ID_BOUND = 2**31


class Task(NamedTuple):
    position: TorusPoint


class Neighborhood(NamedTuple):
    robots_in_range: int
    tasks_in_range: int
    disseminators: list


@dataclass
class WorldState:
    arena: ArenaSpec
    agents: list[AgentState]
    tasks: list[Task]
    observation_range: float
    dmmd: DmmdParams
    motion: MotionParams
    rng_streams: list[np.random.Generator]
    world_rng: np.random.Generator
    step: int = 0
    _task_xy: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self._task_xy is None:
            self._task_xy = np.array([t.position for t in self.tasks], dtype=float).reshape(-1, 2)

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def m(self) -> int:
        return len(self.tasks)

    def positions(self) -> np.ndarray:
        return np.array([a.position for a in self.agents], dtype=float).reshape(-1, 2)

    def to_dict(self) -> dict:
        """Full state, including random-stream positions, as plain data."""
        return {
            "step": self.step,
            "side_length": self.arena.side_length,
            "observation_range": self.observation_range,
            "agents": [a.to_dict() for a in self.agents],
            "tasks": [list(t.position) for t in self.tasks],
            "rng_streams": [g.bit_generator.state for g in self.rng_streams],
            "world_rng": self.world_rng.bit_generator.state,
        }

    def dump_rows(self) -> Iterator[dict]:
        for a in self.agents:
            yield {
                "step": self.step,
                "id": a.id,
                "x": a.position.x,
                "y": a.position.y,
                "phase": a.phase.tag.value,
                "opinion": a.opinion,
                "n_obs": a.counters.n_obs,
                "m_obs": a.counters.m_obs,
            }


def _uniform_point(rng: np.random.Generator, side: float) -> TorusPoint:
    x, y = rng.random(2) * side
    # rng.random() < 1, but the product can still round up to `side`
    return TorusPoint(float(x) % side, float(y) % side)


def init_world(config: RunConfig, seed: Optional[int] = None) -> WorldState:
    """Place robots and tasks uniformly at random and start every robot exploring."""
    if seed is None:
        seed = config.seed
    side = config.arena.side_length
    children = np.random.SeedSequence(seed).spawn(config.n + 1)
    world_rng = np.random.Generator(np.random.PCG64(children[-1]))
    streams = [np.random.Generator(np.random.PCG64(c)) for c in children[:-1]]

    tasks: list[Task] = []
    seen: set[TorusPoint] = set()
    while len(tasks) < config.m:
        p = _uniform_point(world_rng, side)
        if p in seen:
            continue
        seen.add(p)
        tasks.append(Task(p))

    ids: list[int] = []
    used: set[int] = set()
    while len(ids) < config.n:
        i = int(world_rng.integers(0, _ID_BOUND))
        if i not in used:
            used.add(i)
            ids.append(i)

    agents = []
    for k in range(config.n):
        pos = _uniform_point(world_rng, side)
        rng = streams[k]
        agents.append(
            AgentState(
                id=ids[k],
                position=pos,
                heading=float(rng.random() * TWO_PI),
                straight_steps_remaining=exponential_steps(config.motion.mean_straight_steps, rng.random()),
                opinion=int(rng.random() < 0.5),
                phase=AgentPhase(Phase.EXPLORING, sample_exploration_duration(config.dmmd, rng)),
            )
        )

    return WorldState(
        arena=config.arena,
        agents=agents,
        tasks=tasks,
        observation_range=config.observation_range,
        dmmd=config.dmmd,
        motion=config.motion,
        rng_streams=streams,
        world_rng=world_rng,
    )


def move_agent(state: AgentState, motion: MotionParams, arena: ArenaSpec, rng) -> AgentState:
    if state.straight_steps_remaining <= 0:
        state.heading = float(rng.random() * TWO_PI)
        state.straight_steps_remaining = exponential_steps(motion.mean_straight_steps, rng.random())
    state.position = step_along(state.position, state.heading, motion.speed, arena)
    state.straight_steps_remaining -= 1
    return state


def phase_snapshot(world: WorldState) -> list[Optional[tuple[int, int]]]:
    """``(id, opinion)`` for each disseminating agent, ``None`` for explorers."""
    return [(a.id, a.opinion) if a.disseminating else None for a in world.agents]


def neighbors_of(world: WorldState, agent_index: int, snapshot=None) -> Neighborhood:
    """Reference neighborhood query by direct scan over all robots and tasks."""
    if snapshot is None:
        snapshot = phase_snapshot(world)
    me = world.agents[agent_index]
    d = world.observation_range
    robots = 0
    heard = []
    for j, other in enumerate(world.agents):
        if j == agent_index:
            continue
        if torus_distance(me.position, other.position, world.arena) <= d:
            robots += 1
            if snapshot[j] is not None:
                heard.append(snapshot[j])
    tasks = sum(1 for t in world.tasks if torus_distance(me.position, t.position, world.arena) <= d)
    return Neighborhood(robots, tasks, heard)


def neighborhoods(world: WorldState, snapshot=None) -> list[Neighborhood]:
    """Vectorized :func:`neighbors_of` for every agent at once."""
    if snapshot is None:
        snapshot = phase_snapshot(world)
    side = world.arena.side_length
    d = world.observation_range
    xy = world.positions()
    near = pairwise_distances(xy, xy, side) <= d
    np.fill_diagonal(near, False)
    robot_counts = near.sum(axis=1)
    if world.m:
        task_counts = (pairwise_distances(xy, world._task_xy, side) <= d).sum(axis=1)
    else:
        task_counts = np.zeros(world.n, dtype=int)
    senders = [j for j, s in enumerate(snapshot) if s is not None]
    out = []
    for i in range(world.n):
        row = near[i]
        heard = [snapshot[j] for j in senders if row[j]]
        out.append(Neighborhood(int(robot_counts[i]), int(task_counts[i]), heard))
    return out


def world_step(world: WorldState) -> WorldState:
    """Advance the whole world by one synchronous step, in place."""
    for agent, rng in zip(world.agents, world.rng_streams):
        move_agent(agent, world.motion, world.arena, rng)
    snapshot = phase_snapshot(world)
    hoods = neighborhoods(world, snapshot)
    params = world.dmmd
    for agent, rng, hood in zip(world.agents, world.rng_streams, hoods):
        agent_tick(agent, hood.robots_in_range, hood.tasks_in_range, hood.disseminators, params, rng)
    world.step += 1
    return world


def opinion_count(world: WorldState) -> int:
    return sum(a.opinion for a in world.agents)


def opinion_fraction(world: WorldState) -> float:
    """Share of agents currently holding the feasible opinion."""
    if not world.agents:
        raise InvalidStateError("opinion fraction of an empty swarm is undefined")
    return opinion_count(world) / len(world.agents)
