"""Run configuration: everything needed to reproduce one simulation from a seed."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from swarm_feasibility.agent import DmmdParams
from swarm_feasibility.errors import ConfigError, InvalidInputError
from swarm_feasibility.geometry import ArenaSpec


@dataclass(frozen=True)
class MotionParams:
    """Random-walk motion: straight segments of exponential length, then a new heading."""

    speed: float = 1.0
    mean_straight_steps: float = 5.0

    def __post_init__(self) -> None:
        problems = []
        if not (math.isfinite(self.speed) and self.speed >= 0):
            problems.append("speed must be >= 0")
        if not self.mean_straight_steps > 0:
            problems.append("mean_straight_steps must be > 0")
        if problems:
            raise InvalidInputError("; ".join(problems))


@dataclass(frozen=True)
class RunConfig:
    n: int = 20
    m: int = 2
    arena: ArenaSpec = field(default_factory=ArenaSpec)
    observation_range: float = 2.0
    dmmd: DmmdParams = field(default_factory=DmmdParams)
    motion: MotionParams = field(default_factory=MotionParams)
    horizon: int = 2000
    consensus_threshold: float = 0.9
    # consecutive steps a consensus must hold before it counts as a decision
    stability_window: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        problems = []
        if not (isinstance(self.n, int) and self.n >= 1):
            problems.append(f"n must be an integer >= 1 (got {self.n!r})")
        if not (isinstance(self.m, int) and self.m >= 0):
            problems.append(f"m must be an integer >= 0 (got {self.m!r})")
        if not (math.isfinite(self.observation_range) and self.observation_range > 0):
            problems.append(f"observation_range must be > 0 (got {self.observation_range!r})")
        if not (isinstance(self.horizon, int) and self.horizon >= 1):
            problems.append(f"horizon must be an integer >= 1 (got {self.horizon!r})")
        if not 0.5 < self.consensus_threshold <= 1.0:
            problems.append(f"consensus_threshold must lie in (0.5, 1] (got {self.consensus_threshold!r})")
        if not (isinstance(self.stability_window, int) and self.stability_window >= 1):
            problems.append(f"stability_window must be an integer >= 1 (got {self.stability_window!r})")
        if not (isinstance(self.seed, int) and self.seed >= 0):
            problems.append(f"seed must be a non-negative integer (got {self.seed!r})")
        if problems:
            raise ConfigError(problems)

    @property
    def feasible(self) -> bool:
        """Ground truth: one robot per task, so feasible iff n >= m."""
        return self.n >= self.m

    def to_dict(self) -> dict:
        return asdict(self)
