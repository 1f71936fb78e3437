"""Configuration-aware enumeration of the curves meeting given points and lines.

Every bounded edge of a curve with a nonsingular evaluation map cuts off a
subtree that is either *rigid* (its top vertex is pinned by the conditions
inside it) or *floppy* (its top vertex moves on a one-dimensional set and is
pinned only once the vertex above is known).  Rigid subtrees are realized
bottom-up and memoized by their marks and directed ends; floppy subtrees are
realized top-down from their attachment point.  At each vertex exactly two
linear conditions fix its position:

* a point end at the vertex (two conditions),
* a line end (one condition, on the chosen ray),
* a rigid subtree below (the vertex lies on the ray back from its top vertex),
* for a floppy subtree, the edge from the known parent vertex.

Positions are kept as normalized homogeneous integer triples, so the search
runs on integer arithmetic.  Each candidate is re-solved exactly from its full
linear system by the caller.
"""

from __future__ import annotations

import functools
import itertools
import math
from fractions import Fraction
from typing import Iterator

from .curves import Ends, Node, Profile, Split, vertex_splits
from .errors import NonGeneralConfig
from .geometry import DIRECTIONS, Configuration, Point, Vec, end_sum, normal
from .invariant import Invariant

Realization = tuple[Node, tuple[tuple[int, int], ...], "Hom"]


@functools.lru_cache(maxsize=200_000)
def _splits(insertions, marks, ends, has_parent, target, must) -> tuple[Split, ...]:
    # independent of the configuration, so shared between seeds
    return tuple(vertex_splits(Profile(insertions), marks, ends, has_parent, target, must))


class CurveSearch:
    def __init__(self, inv: Invariant, config: Configuration):
        self.inv = inv
        self.config = config
        self.profile = Profile(inv.insertions)
        self._rigid: dict[tuple, list[Realization]] = {}
        self._floppy: dict[tuple, list[Realization]] = {}
        self._points = {m: to_hom(p) for m, p in config.points.items()}
        self._roots = {m: to_hom(line.root) for m, line in config.lines.items()}

    def splits(self, marks, ends, has_parent, target, must) -> tuple[Split, ...]:
        return _splits(self.inv.insertions, marks, ends, has_parent, target, must)

    def curves(self) -> list[tuple[Node, tuple[tuple[int, int], ...]]]:
        """Root nodes and ray choices of all curves meeting the configuration."""
        d = self.inv.degree
        marks = tuple(range(len(self.inv.insertions)))
        must = self.profile.root_mark()
        found = {}
        for split in self.splits(marks, (d, d, d), False, 2, must):
            for node, rays, _ in self._realize(split, parent=None):
                found[(node.code, rays)] = (node, rays)
        return [found[k] for k in sorted(found)]

    def rigid(self, marks: tuple[int, ...], ends: Ends) -> list[Realization]:
        key = (marks, ends)
        if key not in self._rigid:
            out = []
            for split in self.splits(marks, ends, True, 2, None):
                out.extend(self._realize(split, parent=None))
            self._rigid[key] = out
        return self._rigid[key]

    def floppy(self, marks: tuple[int, ...], ends: Ends, parent: "Hom") -> list[Realization]:
        key = (marks, ends, parent)
        if key not in self._floppy:
            out = []
            w = end_sum(ends)
            for split in self.splits(marks, ends, True, 1, None):
                out.extend(self._realize(split, parent=(parent, w)))
            self._floppy[key] = out
        return self._floppy[key]

    def _realize(
        self, split: Split, parent: tuple["Hom", Vec] | None
    ) -> Iterator[Realization]:
        rigid_blocks = [b for b in split.blocks if b[2] == 2]
        floppy_blocks = [b for b in split.blocks if b[2] == 1]
        rigid_options = [self.rigid(b[0], b[1]) for b in rigid_blocks]
        if any(not opts for opts in rigid_options):
            return
        line_marks = [m for m in split.marks if self.profile.codim[m] == 1]
        point_marks = [m for m in split.marks if self.profile.codim[m] == 2]
        for combo in itertools.product(*rigid_options):
            for rays in itertools.product(range(3), repeat=len(line_marks)):
                pos = self._place(split, combo, rigid_blocks, line_marks, rays, point_marks, parent)
                if pos is None:
                    continue
                floppy_options = [self.floppy(b[0], b[1], pos) for b in floppy_blocks]
                if any(not opts for opts in floppy_options):
                    continue
                own_rays = tuple(zip(line_marks, rays))
                for below in itertools.product(*floppy_options):
                    children = [r[0] for r in combo] + [r[0] for r in below]
                    all_rays = own_rays
                    for r in list(combo) + list(below):
                        all_rays += r[1]
                    node = Node.make(split.marks, split.leaves, children)
                    yield node, tuple(sorted(all_rays)), pos

    def _place(self, split, combo, rigid_blocks, line_marks, rays, point_marks, parent):
        """Position of the vertex, or ``None`` if some edge or ray check fails."""
        rows: list[tuple[Vec, int, int]] = []  # functional, value as numerator/denominator
        for m in point_marks:
            x, y, w = self._points[m]
            rows.append(((1, 0), x, w))
            rows.append(((0, 1), y, w))
        for m, ray in zip(line_marks, rays):
            f = normal(DIRECTIONS[ray])
            x, y, w = self._roots[m]
            rows.append((f, f[0] * x + f[1] * y, w))
        for real, block in zip(combo, rigid_blocks):
            f = normal(end_sum(block[1]))
            x, y, w = real[2]
            rows.append((f, f[0] * x + f[1] * y, w))
        if parent is not None:
            f = normal(parent[1])
            x, y, w = parent[0]
            rows.append((f, f[0] * x + f[1] * y, w))
        if len(rows) != 2:
            raise AssertionError(f"vertex carries {len(rows)} conditions")
        (f1, n1, w1), (f2, n2, w2) = rows
        det = f1[0] * f2[1] - f1[1] * f2[0]
        if det == 0:
            # parallel conditions: generically inconsistent, otherwise degenerate
            if f1[0] * n2 * w1 == f2[0] * n1 * w2 and f1[1] * n2 * w1 == f2[1] * n1 * w2:
                raise NonGeneralConfig("parallel conditions agree at a vertex")
            return None
        c1, c2 = n1 * w2, n2 * w1
        pos = _hom(c1 * f2[1] - f1[1] * c2, f1[0] * c2 - c1 * f2[0], w1 * w2 * det)
        # the edge length has the sign of the projection onto its direction
        for real, block in zip(combo, rigid_blocks):
            t = _projection(real[2], pos, end_sum(block[1]))
            if t == 0:
                raise NonGeneralConfig("zero-length edge")
            if t < 0:
                return None
        if parent is not None:
            t = _projection(pos, parent[0], parent[1])
            if t == 0:
                raise NonGeneralConfig("zero-length edge")
            if t < 0:
                return None
        for m, ray in zip(line_marks, rays):
            root = self._roots[m]
            if pos == root:
                raise NonGeneralConfig("vertex at the root of a line")
            dx, dy = _difference(pos, root)
            v = DIRECTIONS[ray]
            if dx * v[1] - dy * v[0] != 0 or dx * v[0] + dy * v[1] < 0:
                return None
        return pos


Hom = tuple[int, int, int]


def _hom(x: int, y: int, w: int) -> Hom:
    """Normalized homogeneous coordinates ``(x/w, y/w)`` with ``w > 0``."""
    if w < 0:
        x, y, w = -x, -y, -w
    g = math.gcd(math.gcd(x, y), w)
    return (x // g, y // g, w // g)


def to_hom(p: Point) -> Hom:
    x, y = Fraction(p[0]), Fraction(p[1])
    w = x.denominator * y.denominator // math.gcd(x.denominator, y.denominator)
    return _hom(x.numerator * (w // x.denominator), y.numerator * (w // y.denominator), w)


def from_hom(h: Hom) -> Point:
    return (Fraction(h[0], h[2]), Fraction(h[1], h[2]))


def _difference(a: Hom, b: Hom) -> tuple[int, int]:
    """``a - b`` scaled by the positive factor ``wa * wb``."""
    return (a[0] * b[2] - b[0] * a[2], a[1] * b[2] - b[1] * a[2])


def _projection(a: Hom, b: Hom, v: Vec) -> int:
    """An integer with the sign of ``(a - b) . v``."""
    dx, dy = _difference(a, b)
    return dx * v[0] + dy * v[1]
