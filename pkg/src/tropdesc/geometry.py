"""Plane data for the enumeration oracle: standard directions, tropical lines,
point/line configurations and their random general-position sampling."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .errors import NonGeneralConfig
from .invariant import Invariant

Point = tuple[Fraction, Fraction]
Vec = tuple[int, int]

# -e1, -e2, e1+e2
DIRECTIONS: tuple[Vec, ...] = ((-1, 0), (0, -1), (1, 1))
DIRECTION_NAMES = ("-e1", "-e2", "e1+e2")


def add(p, q):
    return (p[0] + q[0], p[1] + q[1])


def sub(p, q):
    return (p[0] - q[0], p[1] - q[1])


def scale(t, v):
    return (t * v[0], t * v[1])


def dot(p, q):
    return p[0] * q[0] + p[1] * q[1]


def cross(p, q):
    return p[0] * q[1] - p[1] * q[0]


def normal(v: Vec) -> Vec:
    """Integer functional vanishing along ``v``."""
    return (-v[1], v[0])


def end_sum(counts: tuple[int, int, int]) -> Vec:
    """Direction of a bounded edge leading into a subtree with these directed ends."""
    a, b, c = counts
    return (c - a, c - b)


@dataclass(frozen=True)
class TropicalLine:
    """One vertex (the root) with rays in the three standard directions."""

    root: Point

    def functional(self, ray: int) -> Vec:
        """Linear form whose level set through the root contains the given ray."""
        return normal(DIRECTIONS[ray])

    def ray_parameter(self, ray: int, p: Point) -> Fraction | None:
        """``t`` with ``p = root + t * direction`` if ``p`` lies on the ray's line."""
        v = DIRECTIONS[ray]
        diff = sub(p, self.root)
        if cross(diff, v) != 0:
            return None
        return Fraction(dot(diff, v), dot(v, v))

    def locate(self, p: Point) -> int | None:
        """Index of the open ray containing ``p``; raises at the root."""
        if p == self.root:
            raise NonGeneralConfig(f"curve meets the root {self.root} of a line")
        for k in range(3):
            t = self.ray_parameter(k, p)
            if t is not None and t > 0:
                return k
        return None


@dataclass
class Configuration:
    points: dict[int, Point]
    lines: dict[int, TropicalLine]
    seed: int | None = None
    general: bool = False
    attempts: int = 1
    meta: dict = field(default_factory=dict)

    def anchors(self) -> list[Point]:
        return list(self.points.values()) + [ln.root for ln in self.lines.values()]


def check_general_position(config: Configuration) -> bool:
    """Reject the obvious degeneracies for curves with standard-direction ends.

    No two special points (marked points and line roots) may share a line of
    slope 0, infinity or 1, and no marked point may lie on a constraint line.
    Deeper degeneracies are detected while solving and surface as
    :class:`NonGeneralConfig`.
    """
    special = config.anchors()
    for i, p in enumerate(special):
        for q in special[i + 1:]:
            if p[0] == q[0] or p[1] == q[1] or p[0] - p[1] == q[0] - q[1]:
                return False
    for p in config.points.values():
        for line in config.lines.values():
            for k in range(3):
                if line.ray_parameter(k, p) is not None:
                    return False
    return True


def _default_sampler(rng: random.Random, radius: int) -> Fraction:
    return Fraction(rng.randint(-radius, radius), rng.randint(1, 97))


def random_general_config(
    seed: int,
    inv: Invariant,
    attempt: int = 0,
    max_retries: int = 50,
    sampler: Callable[[random.Random, int], Fraction] | None = None,
) -> Configuration:
    """Deterministic general-position configuration for ``inv``'s conditions.

    Marked ends are indexed by position in the canonical insertion tuple.
    ``attempt`` selects an independent redraw for the same seed.
    """
    sampler = sampler or _default_sampler
    radius = 100 * (inv.degree + 1)
    rng = random.Random(f"tropdesc:{seed}:{attempt}")
    for tries in range(1, max_retries + 1):
        points: dict[int, Point] = {}
        lines: dict[int, TropicalLine] = {}
        for idx, ins in enumerate(inv.insertions):
            if ins.codim == 2:
                points[idx] = (sampler(rng, radius), sampler(rng, radius))
            elif ins.codim == 1:
                lines[idx] = TropicalLine((sampler(rng, radius), sampler(rng, radius)))
        config = Configuration(points, lines, seed=seed, attempts=tries)
        if check_general_position(config):
            config.general = True
            return config
    raise NonGeneralConfig(
        f"no general configuration found for seed {seed} after {max_retries} draws"
    )
