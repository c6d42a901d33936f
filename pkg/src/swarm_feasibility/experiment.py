"""Seeded runs to a consensus event, decision classification, and task-count sweeps."""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from swarm_feasibility.config import RunConfig
from swarm_feasibility.errors import InvalidInputError
from swarm_feasibility.world import init_world, opinion_count, world_step


class Outcome(str, Enum):
    FEASIBLE = "DecidedFeasible"
    INFEASIBLE = "DecidedInfeasible"
    NONE = "NoDecision"


def check_consensus(fraction: float, threshold: float) -> Optional[Outcome]:
    """Strictly more than ``threshold`` of the swarm agreeing is a decision."""
    if not 0.5 < threshold <= 1.0:
        raise InvalidInputError(f"threshold must lie in (0.5, 1], got {threshold!r}")
    if fraction > threshold:
        return Outcome.FEASIBLE
    if fraction < 1.0 - threshold:
        return Outcome.INFEASIBLE
    return None


def _decision_from_count(ones: int, n: int, threshold: float) -> Optional[Outcome]:
    # exact integer form of check_consensus(ones / n, threshold), immune to k/n rounding
    if ones > threshold * n:
        return Outcome.FEASIBLE
    if n - ones > threshold * n:
        return Outcome.INFEASIBLE
    return None


@dataclass
class RunResult:
    n: int
    m: int
    seed: int
    fraction_series: list[float]
    outcome: Outcome
    decision_step: Optional[int]
    ground_truth_feasible: bool
    correct: Optional[bool]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "seed": self.seed,
            "outcome": self.outcome.value,
            "decision_step": self.decision_step,
            "ground_truth_feasible": self.ground_truth_feasible,
            "correct": self.correct,
            "fraction_series": list(self.fraction_series),
        }


def is_correct(outcome: Outcome, feasible: bool) -> Optional[bool]:
    if outcome is Outcome.NONE:
        return None
    return (outcome is Outcome.FEASIBLE) == feasible


def run(config: RunConfig, dump=None) -> RunResult:
    """Simulate until the swarm reaches a decision or the horizon runs out.

    ``fraction_series[t]`` is the feasible share after step ``t``; index 0
    is the initial assignment. Consensus is checked from step 1 on.
    ``dump``, if given, is called with each per-agent record of every step.
    """
    world = init_world(config, config.seed)
    n = config.n
    threshold = config.consensus_threshold
    series = [opinion_count(world) / n]
    if dump is not None:
        for row in world.dump_rows():
            dump(row)

    outcome = Outcome.NONE
    decision_step = None
    streak_outcome = None
    streak = 0
    for _ in range(config.horizon):
        world_step(world)
        ones = opinion_count(world)
        series.append(ones / n)
        if dump is not None:
            for row in world.dump_rows():
                dump(row)
        decided = _decision_from_count(ones, n, threshold)
        if decided is not None and decided is streak_outcome:
            streak += 1
        else:
            streak_outcome = decided
            streak = 1 if decided is not None else 0
        if decided is not None and streak >= config.stability_window:
            outcome = decided
            decision_step = world.step
            break

    return RunResult(
        n=n,
        m=config.m,
        seed=config.seed,
        fraction_series=series,
        outcome=outcome,
        decision_step=decision_step,
        ground_truth_feasible=config.feasible,
        correct=is_correct(outcome, config.feasible),
    )


def derive_seed(master_seed: int, m: int, replicate: int) -> int:
    """Stable 63-bit seed for one (task count, replicate) cell of a sweep."""
    digest = hashlib.blake2b(f"{master_seed}:{m}:{replicate}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


def quartiles(values: Sequence[float]) -> tuple[float, float, float]:
    """Lower quartile, median and upper quartile with linear interpolation.

    The ``p``-quantile sits at position ``(len - 1) * p`` of the sorted data.
    """
    xs = sorted(float(v) for v in values)
    if not xs:
        raise InvalidInputError("quartiles of an empty list are undefined")

    def at(p: float) -> float:
        pos = (len(xs) - 1) * p
        lo = math.floor(pos)
        hi = min(lo + 1, len(xs) - 1)
        return xs[lo] + (pos - lo) * (xs[hi] - xs[lo])

    return at(0.25), at(0.5), at(0.75)


def pad_series(series: Sequence[float], length: int) -> list[float]:
    """Carry the final value forward so ``series`` spans ``length`` entries."""
    series = list(series)
    if len(series) >= length:
        return series[:length]
    return series + [series[-1]] * (length - len(series))


@dataclass
class SweepSummary:
    m: int
    n: int
    replicates: int
    ratio: float
    pct_feasible: float
    pct_infeasible: float
    pct_no_decision: float
    pct_correct: float
    median_decision_step: Optional[float]
    band_q1: np.ndarray = field(repr=False)
    band_median: np.ndarray = field(repr=False)
    band_q3: np.ndarray = field(repr=False)
    results: list[RunResult] = field(default_factory=list, repr=False)

    @property
    def pct_decided(self) -> float:
        return self.pct_feasible + self.pct_infeasible


def summarize(results: Sequence[RunResult], horizon: int) -> SweepSummary:
    if not results:
        raise InvalidInputError("cannot summarize an empty set of runs")
    total = len(results)
    n, m = results[0].n, results[0].m

    def pct(k: int) -> float:
        return 100.0 * k / total

    feas = sum(r.outcome is Outcome.FEASIBLE for r in results)
    infeas = sum(r.outcome is Outcome.INFEASIBLE for r in results)
    steps = [r.decision_step for r in results if r.decision_step is not None]
    # bands: quantiles at each step across runs, same convention as quartiles()
    grid = np.array([pad_series(r.fraction_series, horizon + 1) for r in results])
    q1, med, q3 = np.quantile(grid, [0.25, 0.5, 0.75], axis=0, method="linear")

    return SweepSummary(
        m=m,
        n=n,
        replicates=total,
        ratio=n / m if m else math.inf,
        pct_feasible=pct(feas),
        pct_infeasible=pct(infeas),
        pct_no_decision=pct(total - feas - infeas),
        pct_correct=pct(sum(bool(r.correct) for r in results)),
        median_decision_step=quartiles(steps)[1] if steps else None,
        band_q1=q1,
        band_median=med,
        band_q3=q3,
        results=list(results),
    )


def sweep(
    task_counts: Sequence[int],
    replicates: int,
    base: RunConfig,
    master_seed: int,
    parallelism: int = 1,
) -> list[SweepSummary]:
    """Run ``replicates`` seeded runs per task count and aggregate each count.

    Results are collected in (m, replicate) order, so the summaries do not
    depend on how many worker processes were used.
    """
    if replicates < 1:
        raise InvalidInputError("replicates must be >= 1")
    configs = [
        replace(base, m=int(m), seed=derive_seed(master_seed, int(m), r))
        for m in task_counts
        for r in range(replicates)
    ]
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(run, configs, chunksize=max(1, replicates // parallelism)))
    else:
        results = [run(c) for c in configs]

    return [
        summarize(results[i * replicates:(i + 1) * replicates], base.horizon)
        for i in range(len(task_counts))
    ]
