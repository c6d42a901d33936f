"""Command-line entry point: ``swarm-feasibility run`` and ``swarm-feasibility sweep``.

Configuration is a flat JSON object whose keys match the long flag names
(with underscores). Precedence is built-in defaults < config file < flags.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional, Sequence

from swarm_feasibility.agent import DmmdParams
from swarm_feasibility.config import MotionParams, RunConfig
from swarm_feasibility.errors import ConfigError, SwarmError
from swarm_feasibility.experiment import run, sweep
from swarm_feasibility.geometry import ArenaSpec

log = logging.getLogger("swarm_feasibility")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_INTERNAL = 4

# ratios 10, 5, 4, 2, 1, 0.5, 0.4, 0.2, 0.1 for n = 20
DEFAULT_TASK_COUNTS = (2, 4, 5, 10, 20, 40, 50, 100, 200)


@dataclass
class CliConfig:
    n: int = 20
    m: int = 2
    side_length: float = 20.0
    observation_range: float = 2.0
    speed: float = 1.0
    mean_straight_steps: float = 5.0
    mean_exploration_steps: float = 10.0
    dissemination_gain_steps: float = 10.0
    quality_fallback: float = 0.5
    horizon: int = 2000
    consensus_threshold: float = 0.9
    stability_window: int = 1
    seed: int = 0
    task_counts: list = field(default_factory=lambda: list(DEFAULT_TASK_COUNTS))
    replicates: int = 100
    out: str = "."
    emit_state_dump: bool = False
    parallelism: int = 1
    figures: bool = True

    def run_config(self, **changes) -> RunConfig:
        """Build (and thereby validate) the simulator's view of this config."""
        values = {**asdict(self), **changes}
        try:
            return RunConfig(
                n=values["n"],
                m=values["m"],
                arena=ArenaSpec(values["side_length"]),
                observation_range=values["observation_range"],
                dmmd=DmmdParams(
                    values["mean_exploration_steps"],
                    values["dissemination_gain_steps"],
                    values["quality_fallback"],
                ),
                motion=MotionParams(values["speed"], values["mean_straight_steps"]),
                horizon=values["horizon"],
                consensus_threshold=values["consensus_threshold"],
                stability_window=values["stability_window"],
                seed=values["seed"],
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return {k: _jsonable(v) for k, v in asdict(self).items()}


_FIELD_TYPES = {f.name: f.type for f in fields(CliConfig)}


def _coerce(key: str, value: Any) -> Any:
    kind = _FIELD_TYPES[key]
    if kind == "bool":
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("1", "true", "yes", "on", "0", "false", "no", "off"):
            return value.lower() in ("1", "true", "yes", "on")
        raise ConfigError(f"{key}: expected a boolean, got {value!r}")
    if kind == "int":
        if isinstance(value, bool):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        if isinstance(value, float) and value.is_integer():
            return int(value)
        if isinstance(value, int):
            return value
        if isinstance(value, str):
            try:
                return int(value)
            except ValueError:
                pass
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    if kind == "float":
        if isinstance(value, bool):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        try:
            out = float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: expected a number, got {value!r}") from None
        if not math.isfinite(out):
            raise ConfigError(f"{key}: must be finite, got {value!r}")
        return out
    if kind == "list":
        if isinstance(value, str):
            value = [v for v in value.split(",") if v.strip()]
        if not isinstance(value, (list, tuple)) or not value:
            raise ConfigError(f"{key}: expected a non-empty list of task counts")
        out = [_coerce("m", v) for v in value]
        if any(v < 0 for v in out):
            raise ConfigError(f"{key}: task counts must be >= 0")
        return out
    return str(value)


def parse_config(text: str = "", overrides: Optional[dict] = None) -> CliConfig:
    """Merge JSON ``text`` and flag ``overrides`` over the defaults and validate."""
    raw: dict = {}
    if text.strip():
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    merged = dict(raw)
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})

    unknown = sorted(set(merged) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError([f"unknown config key {k!r}" for k in unknown])

    cfg = CliConfig(**{k: _coerce(k, v) for k, v in merged.items()})
    problems = []
    if cfg.replicates < 1:
        problems.append(f"replicates must be >= 1 (got {cfg.replicates})")
    if cfg.parallelism < 1:
        problems.append(f"parallelism must be >= 1 (got {cfg.parallelism})")
    if problems:
        raise ConfigError(problems)
    cfg.run_config()
    return cfg


def _jsonable(v):
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return float(fmt(v))
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def fmt(v) -> str:
    """Six significant digits for floats; everything else via ``str``."""
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".6g")
    return str(v)


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_run(cfg: CliConfig) -> int:
    rc = cfg.run_config()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    dump_rows = [] if cfg.emit_state_dump else None
    result = run(rc, dump=dump_rows.append if dump_rows is not None else None)

    _write_csv(out / "run_series.csv", ["step", "fraction_feasible"], enumerate(result.fraction_series))
    _write_json(
        out / "run_result.json",
        {
            "outcome": result.outcome.value,
            "decision_step": result.decision_step,
            "ground_truth_feasible": result.ground_truth_feasible,
            "correct": result.correct,
            "n": result.n,
            "m": result.m,
            "seed": result.seed,
            "config": cfg.to_dict(),
        },
    )
    if dump_rows is not None:
        header = ["step", "id", "x", "y", "phase", "opinion", "n_obs", "m_obs"]
        _write_csv(out / "state_dump.csv", header, ([r[h] for h in header] for r in dump_rows))
    if cfg.figures:
        from swarm_feasibility.figures import plot_run_series

        plot_run_series(
            result.fraction_series,
            out / "run_series.png",
            threshold=rc.consensus_threshold,
            title=f"n={rc.n}, m={rc.m}, seed={rc.seed}",
        )
    log.info("run n=%d m=%d seed=%d: %s at step %s", rc.n, rc.m, rc.seed, result.outcome.value, result.decision_step)
    return EXIT_OK


def cmd_sweep(cfg: CliConfig) -> int:
    base = cfg.run_config()
    for m in cfg.task_counts:
        cfg.run_config(m=m)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    summaries = sweep(cfg.task_counts, cfg.replicates, base, cfg.seed, parallelism=cfg.parallelism)

    for s in summaries:
        total = s.pct_feasible + s.pct_infeasible + s.pct_no_decision
        if abs(total - 100.0) > 0.01:
            raise AssertionError(f"outcome percentages for m={s.m} sum to {total}")

    _write_csv(
        out / "sweep_summary.csv",
        ["m", "ratio", "pct_feasible", "pct_infeasible", "pct_no_decision", "pct_correct", "median_decision_step"],
        (
            [s.m, s.ratio, s.pct_feasible, s.pct_infeasible, s.pct_no_decision, s.pct_correct, s.median_decision_step]
            for s in summaries
        ),
    )
    for s in summaries:
        _write_csv(
            out / f"bands_m{s.m}.csv",
            ["step", "q1", "median", "q3"],
            (
                [t, float(a), float(b), float(c)]
                for t, (a, b, c) in enumerate(zip(s.band_q1, s.band_median, s.band_q3))
            ),
        )
    _write_json(out / "sweep_meta.json", {"master_seed": cfg.seed, "config": cfg.to_dict()})
    if cfg.figures:
        from swarm_feasibility.figures import plot_bands, plot_decisions

        plot_bands(summaries, out / "fig_bands.png")
        plot_decisions(summaries, out / "fig_decisions.png")
    for s in summaries:
        log.info(
            "m=%d ratio=%s feasible=%.1f%% infeasible=%.1f%% none=%.1f%%",
            s.m, fmt(s.ratio), s.pct_feasible, s.pct_infeasible, s.pct_no_decision,
        )
    return EXIT_OK


_FLAG_HELP = {
    "n": "number of robots",
    "m": "number of tasks (run only)",
    "side_length": "arena side length",
    "observation_range": "observation and communication range d",
    "speed": "robot speed in units per step",
    "mean_straight_steps": "mean length of a straight walk segment",
    "mean_exploration_steps": "mean exploration phase length",
    "dissemination_gain_steps": "dissemination length per unit quality",
    "quality_fallback": "quality used when nothing was observed",
    "horizon": "maximum number of steps per run",
    "consensus_threshold": "share of robots that must agree, strictly exceeded",
    "stability_window": "consecutive steps a consensus must hold",
    "seed": "run seed (run) or master seed (sweep)",
    "replicates": "runs per task count",
    "out": "output directory",
    "parallelism": "worker processes for sweeps",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swarm-feasibility", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("run", "simulate one seeded run"), ("sweep", "replicate runs over task counts")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
        for key, text in _FLAG_HELP.items():
            p.add_argument("--" + key.replace("_", "-"), dest=key, default=None, help=text)
        p.add_argument("--tasks", dest="task_counts", default=None, help="comma-separated task counts (sweep)")
        p.add_argument("--state-dump", dest="emit_state_dump", action="store_const", const=True, default=None,
                       help="write state_dump.csv with every agent at every step (run)")
        p.add_argument("--no-figures", dest="figures", action="store_const", const=False, default=None,
                       help="skip PNG rendering")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    overrides = {k: v for k, v in vars(args).items() if k in _FIELD_TYPES}
    try:
        text = args.config.read_text() if args.config else ""
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(text, overrides)
        return cmd_run(cfg) if args.command == "run" else cmd_sweep(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SwarmError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
