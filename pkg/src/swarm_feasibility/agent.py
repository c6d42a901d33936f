"""Per-robot protocol state machine.

Each robot alternates between two phases:

* exploring -- it counts every robot and task inside its observation range
  on every step (repeat sightings count again);
* disseminating -- it broadcasts ``(id, opinion)`` to robots in range for a
  duration whose mean grows with the estimated quality of its opinion.

Opinions heard in either phase are kept per sender (latest wins). When
dissemination ends the robot adopts the majority of its own vote and the
buffered votes, clears its memory and starts exploring again.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional

from swarm_feasibility.errors import ContractViolation, InvalidInputError
from swarm_feasibility.geometry import TorusPoint

INFEASIBLE = 0
FEASIBLE = 1
OPINIONS = (INFEASIBLE, FEASIBLE)

Broadcast = tuple[int, int]


def check_opinion(op: int) -> int:
    if op not in OPINIONS:
        raise InvalidInputError(f"opinion must be 0 or 1, got {op!r}")
    return int(op)


class Phase(str, Enum):
    EXPLORING = "Exploring"
    DISSEMINATING = "Disseminating"


@dataclass
class AgentPhase:
    tag: Phase
    remaining_steps: int

    def __post_init__(self) -> None:
        if self.remaining_steps < 1:
            raise InvalidInputError("a phase must last at least one step")


@dataclass(frozen=True)
class DmmdParams:
    mean_exploration_steps: float = 10.0
    dissemination_gain_steps: float = 10.0
    quality_fallback: float = 0.5

    def __post_init__(self) -> None:
        problems = []
        if not self.mean_exploration_steps > 0:
            problems.append("mean_exploration_steps must be > 0")
        if not self.dissemination_gain_steps > 0:
            problems.append("dissemination_gain_steps must be > 0")
        if not 0.0 <= self.quality_fallback <= 1.0:
            problems.append("quality_fallback must lie in [0, 1]")
        if problems:
            raise InvalidInputError("; ".join(problems))


@dataclass(frozen=True)
class ObservationCounters:
    n_obs: int = 0
    m_obs: int = 0

    def __post_init__(self) -> None:
        if self.n_obs < 0 or self.m_obs < 0:
            raise InvalidInputError("observation counters cannot be negative")

    def add(self, robots_in_range: int, tasks_in_range: int) -> "ObservationCounters":
        if robots_in_range < 0 or tasks_in_range < 0:
            raise InvalidInputError("sighting counts cannot be negative")
        return ObservationCounters(self.n_obs + robots_in_range, self.m_obs + tasks_in_range)


class OpinionBuffer:
    """Latest opinion heard from each sender, never holding the owner's own."""

    __slots__ = ("owner_id", "entries")

    def __init__(self, owner_id: int, entries: Optional[Mapping[int, int]] = None):
        self.owner_id = owner_id
        self.entries: dict[int, int] = {}
        for sender, op in (entries or {}).items():
            self.receive(sender, op)

    def receive(self, sender_id: int, op: int) -> None:
        if sender_id == self.owner_id:
            return
        self.entries[sender_id] = check_opinion(op)

    def clear(self) -> None:
        self.entries.clear()

    def values(self):
        return self.entries.values()

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, OpinionBuffer):
            return NotImplemented
        return self.owner_id == other.owner_id and self.entries == other.entries

    def __repr__(self) -> str:
        return f"OpinionBuffer(owner_id={self.owner_id!r}, entries={self.entries!r})"


@dataclass
class AgentState:
    id: int
    position: TorusPoint
    heading: float
    straight_steps_remaining: int
    opinion: int
    phase: AgentPhase
    counters: ObservationCounters = field(default_factory=ObservationCounters)
    buffer: OpinionBuffer = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        check_opinion(self.opinion)
        if self.buffer is None:
            self.buffer = OpinionBuffer(self.id)

    @property
    def disseminating(self) -> bool:
        return self.phase.tag is Phase.DISSEMINATING

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "x": self.position.x,
            "y": self.position.y,
            "heading": self.heading,
            "straight_steps_remaining": self.straight_steps_remaining,
            "opinion": self.opinion,
            "phase": self.phase.tag.value,
            "remaining_steps": self.phase.remaining_steps,
            "n_obs": self.counters.n_obs,
            "m_obs": self.counters.m_obs,
            "buffer": sorted(self.buffer.entries.items()),
        }


def quality(opinion: int, counters: ObservationCounters, params: DmmdParams) -> float:
    """Estimated support for ``opinion`` from robot and task sightings.

    Feasible is supported by robot sightings, infeasible by task sightings.
    With no sightings at all the configured fallback is returned.
    """
    total = counters.n_obs + counters.m_obs
    if total == 0:
        return params.quality_fallback
    if check_opinion(opinion) == FEASIBLE:
        return counters.n_obs / total
    return counters.m_obs / total


def exponential_steps(mean: float, u: float) -> int:
    """Inverse-transform exponential draw, rounded half up and clamped to >= 1."""
    if mean <= 0:
        return 1
    x = -mean * math.log1p(-u)
    return max(1, int(math.floor(x + 0.5)))


def sample_exploration_duration(params: DmmdParams, rng) -> int:
    return exponential_steps(params.mean_exploration_steps, rng.random())


def sample_dissemination_duration(rho: float, params: DmmdParams, rng) -> int:
    if not 0.0 <= rho <= 1.0:
        raise InvalidInputError(f"quality must lie in [0, 1], got {rho!r}")
    return exponential_steps(params.dissemination_gain_steps * rho, rng.random())


def record_observation(state: AgentState, robots_in_range: int, tasks_in_range: int) -> ObservationCounters:
    if state.phase.tag is not Phase.EXPLORING:
        raise ContractViolation(f"agent {state.id} cannot record observations while disseminating")
    state.counters = state.counters.add(robots_in_range, tasks_in_range)
    return state.counters


def receive_opinion(buffer: OpinionBuffer, sender_id: int, op: int) -> OpinionBuffer:
    buffer.receive(sender_id, op)
    return buffer


def decide_majority(own: int, buffer) -> int:
    """Majority of the own vote plus buffered votes; a tie keeps ``own``."""
    votes = buffer.values() if hasattr(buffer, "values") else buffer
    ones = 0
    total = 1
    for v in votes:
        ones += v
        total += 1
    ones += own
    zeros = total - ones
    if ones > zeros:
        return FEASIBLE
    if zeros > ones:
        return INFEASIBLE
    return own


def agent_tick(
    state: AgentState,
    robots_in_range: int,
    tasks_in_range: int,
    received: Iterable[Broadcast],
    params: DmmdParams,
    rng,
) -> Optional[Broadcast]:
    """Advance one robot by one step, in place.

    Returns the ``(id, opinion)`` broadcast emitted this step, or ``None``
    while exploring.
    """
    buffer = state.buffer
    for sender_id, op in received:
        buffer.receive(sender_id, op)

    phase = state.phase
    if phase.tag is Phase.EXPLORING:
        record_observation(state, robots_in_range, tasks_in_range)
        phase.remaining_steps -= 1
        if phase.remaining_steps == 0:
            rho = quality(state.opinion, state.counters, params)
            state.phase = AgentPhase(Phase.DISSEMINATING, sample_dissemination_duration(rho, params, rng))
        return None

    emitted = (state.id, state.opinion)
    phase.remaining_steps -= 1
    if phase.remaining_steps == 0:
        state.opinion = decide_majority(state.opinion, buffer)
        buffer.clear()
        state.counters = ObservationCounters()
        state.phase = AgentPhase(Phase.EXPLORING, sample_exploration_duration(params, rng))
    return emitted
