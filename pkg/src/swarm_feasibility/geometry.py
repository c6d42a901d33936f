"""Periodic geometry on a square arena.

Positions live in ``[0, L) x [0, L)``. Anything leaving one edge re-enters
on the opposite edge, and distances take the shorter way around each axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from swarm_feasibility.errors import InvalidInputError


@dataclass(frozen=True)
class ArenaSpec:
    side_length: float = 20.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.side_length) and self.side_length > 0):
            raise InvalidInputError(f"side_length must be a positive finite number, got {self.side_length!r}")

    @property
    def max_distance(self) -> float:
        """Largest possible torus distance (half the diagonal)."""
        return self.side_length * math.sqrt(2.0) / 2.0


class TorusPoint(NamedTuple):
    x: float
    y: float


def _wrap_coord(v: float, side: float) -> float:
    r = v % side
    # a tiny negative v can round up to exactly `side`
    if r >= side:
        r = 0.0
    return r


def wrap(p, arena: ArenaSpec) -> TorusPoint:
    """Map a raw 2-D point onto the torus with mathematical modulo."""
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise InvalidInputError(f"cannot wrap non-finite point ({x}, {y})")
    side = arena.side_length
    return TorusPoint(_wrap_coord(x, side), _wrap_coord(y, side))


def axis_offset(a: float, b: float, side: float) -> float:
    """Absolute per-axis separation, taking the shorter way around."""
    d = abs(a - b)
    return min(d, side - d)


def torus_distance(a: TorusPoint, b: TorusPoint, arena: ArenaSpec) -> float:
    side = arena.side_length
    dx = axis_offset(a[0], b[0], side)
    dy = axis_offset(a[1], b[1], side)
    return math.sqrt(dx * dx + dy * dy)


def displacement(a: TorusPoint, b: TorusPoint, arena: ArenaSpec) -> tuple[float, float]:
    """Shortest signed vector from ``a`` to ``b``; each component lies in [-L/2, L/2]."""
    side = arena.side_length
    half = side / 2.0
    dx = (b[0] - a[0] + half) % side - half
    dy = (b[1] - a[1] + half) % side - half
    return dx, dy


def step_along(p: TorusPoint, heading: float, speed: float, arena: ArenaSpec) -> TorusPoint:
    if speed == 0:
        return TorusPoint(p[0], p[1])
    return wrap((p[0] + speed * math.cos(heading), p[1] + speed * math.sin(heading)), arena)


def pairwise_distances(a: np.ndarray, b: np.ndarray, side: float) -> np.ndarray:
    """Torus distance matrix between point sets ``a`` (k, 2) and ``b`` (j, 2).

    Uses the same arithmetic as :func:`torus_distance`, so range tests on the
    two paths agree bit for bit.
    """
    diff = np.abs(a[:, None, :] - b[None, :, :])
    diff = np.minimum(diff, side - diff)
    return np.sqrt(diff[..., 0] * diff[..., 0] + diff[..., 1] * diff[..., 1])
