"""Distributed feasibility assessment in a homogeneous robot swarm.

Robots random-walk on a periodic square arena, count the robots and tasks
they see, and settle on a shared opinion (feasible / infeasible) through a
quality-modulated majority protocol.
"""

from swarm_feasibility.geometry import ArenaSpec, TorusPoint, step_along, torus_distance, wrap
from swarm_feasibility.agent import (
    AgentPhase,
    AgentState,
    DmmdParams,
    ObservationCounters,
    Phase,
    agent_tick,
    decide_majority,
    quality,
)
from swarm_feasibility.world import MotionParams, Task, WorldState, init_world, world_step
from swarm_feasibility.experiment import (
    Outcome,
    RunConfig,
    RunResult,
    SweepSummary,
    check_consensus,
    quartiles,
    run,
    sweep,
)

__all__ = [
    "AgentPhase",
    "AgentState",
    "ArenaSpec",
    "DmmdParams",
    "MotionParams",
    "ObservationCounters",
    "Outcome",
    "Phase",
    "RunConfig",
    "RunResult",
    "SweepSummary",
    "Task",
    "TorusPoint",
    "WorldState",
    "agent_tick",
    "check_consensus",
    "decide_majority",
    "init_world",
    "quality",
    "quartiles",
    "run",
    "step_along",
    "sweep",
    "torus_distance",
    "world_step",
    "wrap",
]
