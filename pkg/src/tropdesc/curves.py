"""Combinatorial types of marked rational tropical plane curves.

A type is an abstract tree rooted at the vertex carrying a distinguished
marked end.  Vertices hold marked ends (contracted, labelled by insertion
index) and directed ends (counted per standard direction; ends of equal
direction are interchangeable).  The bounded edge into a subtree points along
the sum of the directed ends it contains, so balancing holds by construction.

Cell coordinates are the position of the root vertex plus one length per
bounded edge; a marked end sits at ``root + sum(length * direction)`` along
its path.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

from .errors import DegreeTooLarge, NonGeneralConfig, ShapeViolation
from .geometry import DIRECTIONS, Configuration, Point, Vec, add, end_sum, scale
from .invariant import Insertion
from .linalg import det_int, solve

DEFAULT_MAX_DEGREE = 2
HARD_MAX_DEGREE = 3

Ends = tuple[int, int, int]


@dataclass(frozen=True)
class Node:
    marks: tuple[int, ...]
    ends: Ends
    children: tuple["Node", ...] = ()

    @staticmethod
    def make(marks, ends, children=()) -> "Node":
        return Node(tuple(sorted(marks)), tuple(ends), tuple(sorted(children, key=lambda c: c.code)))

    @cached_property
    def code(self) -> str:
        inner = ",".join(c.code for c in self.children)
        marks = ".".join(map(str, self.marks))
        return f"[{marks}|{self.ends[0]}.{self.ends[1]}.{self.ends[2]}|{inner}]"

    @cached_property
    def total_ends(self) -> Ends:
        a, b, c = self.ends
        for ch in self.children:
            x, y, z = ch.total_ends
            a, b, c = a + x, b + y, c + z
        return (a, b, c)

    @cached_property
    def all_marks(self) -> frozenset[int]:
        out = set(self.marks)
        for ch in self.children:
            out |= ch.all_marks
        return frozenset(out)


@dataclass(frozen=True)
class Edge:
    parent: int
    child: int
    direction: Vec


@dataclass(frozen=True)
class CombinatorialType:
    degree: int
    insertions: tuple[Insertion, ...]
    root: Node
    rays: tuple[tuple[int, int], ...] = ()

    @cached_property
    def code(self) -> str:
        rays = ";".join(f"{m}:{r}" for m, r in self.rays)
        return f"{self.root.code}/{rays}"

    @cached_property
    def _layout(self):
        nodes: list[Node] = []
        parents: list[int] = []
        edges: list[Edge] = []
        paths: list[tuple[int, ...]] = []
        stack = [(self.root, -1, ())]
        while stack:
            node, parent, path = stack.pop()
            idx = len(nodes)
            nodes.append(node)
            parents.append(parent)
            if parent >= 0:
                edges.append(Edge(parent, idx, end_sum(node.total_ends)))
                path = path + (len(edges) - 1,)
            paths.append(path)
            for ch in reversed(node.children):
                stack.append((ch, idx, path))
        return nodes, parents, edges, paths

    @property
    def nodes(self) -> list[Node]:
        return self._layout[0]

    @property
    def edges(self) -> list[Edge]:
        return self._layout[2]

    @property
    def paths(self) -> list[tuple[int, ...]]:
        return self._layout[3]

    @cached_property
    def mark_vertex(self) -> dict[int, int]:
        return {m: i for i, node in enumerate(self.nodes) for m in node.marks}

    @cached_property
    def ray_of(self) -> dict[int, int]:
        return dict(self.rays)

    def valence(self, vertex: int) -> int:
        node = self.nodes[vertex]
        has_parent = 1 if vertex else 0
        return len(node.marks) + sum(node.ends) + len(node.children) + has_parent

    @cached_property
    def automorphisms(self) -> int:
        """Order of the group permuting equal-direction ends while fixing marks."""
        order = 1
        for node in self.nodes:
            for k in node.ends:
                order *= math.factorial(k)
            codes: dict[str, int] = {}
            for ch in node.children:
                codes[ch.code] = codes.get(ch.code, 0) + 1
            for k in codes.values():
                order *= math.factorial(k)
        return order

    @property
    def labelled_count(self) -> int:
        """Number of distinct labellings of the directed ends."""
        return math.factorial(self.degree) ** 3 // self.automorphisms

    @cached_property
    def facet_weight(self) -> int:
        """Weight of the psi-product cone: multinomial in the psi powers per vertex."""
        weight = 1
        for node in self.nodes:
            powers = [self.insertions[m].psi for m in node.marks]
            w = math.factorial(sum(powers))
            for p in powers:
                w //= math.factorial(p)
            weight *= w
        return weight

    @property
    def constrained_marks(self) -> list[int]:
        return [i for i, ins in enumerate(self.insertions) if ins.codim > 0]

    def validate(self) -> None:
        """Assert the structural invariants of a combinatorial type."""
        nodes, parents, edges, _ = self._layout
        assert len(edges) == len(nodes) - 1
        assert self.root.total_ends == (self.degree,) * 3
        assert sorted(self.mark_vertex) == list(range(len(self.insertions)))
        for i, node in enumerate(nodes):
            outward = [0, 0]
            for k, count in enumerate(node.ends):
                outward[0] += count * DIRECTIONS[k][0]
                outward[1] += count * DIRECTIONS[k][1]
            for e in edges:
                if e.parent == i:
                    outward[0] += e.direction[0]
                    outward[1] += e.direction[1]
                elif e.child == i:
                    outward[0] -= e.direction[0]
                    outward[1] -= e.direction[1]
            assert outward == [0, 0], f"unbalanced vertex {i}"
            psi = sum(self.insertions[m].psi for m in node.marks)
            assert self.valence(i) == 3 + psi, f"vertex {i} has wrong valence"
        for e in edges:
            assert e.direction != (0, 0), "contracted bounded edge"
        for m, ins in enumerate(self.insertions):
            assert (ins.codim == 1) == (m in self.ray_of)


# -- enumeration of vertex neighbourhoods -------------------------------------


class Profile:
    """Per-mark data needed while splitting marks and ends among subtrees."""

    def __init__(self, insertions: Sequence[Insertion]):
        self.insertions = tuple(insertions)
        self.psi = [i.psi for i in insertions]
        self.codim = [i.codim for i in insertions]
        self.constrained = frozenset(i for i, c in enumerate(self.codim) if c > 0)

    def base(self, marks) -> int:
        return 2 + sum(self.codim[m] + self.psi[m] - 1 for m in marks)

    def excess(self, marks, ends: Ends) -> int:
        """Constraint rows minus bounded edges of a hanging subtree."""
        return self.base(marks) - sum(ends)

    def root_mark(self) -> int:
        for i, c in enumerate(self.codim):
            if c == 2:
                return i
        for i, c in enumerate(self.codim):
            if c == 1:
                return i
        return 0


@dataclass(frozen=True)
class Split:
    """Marks at a vertex, the subtrees below it, and its directed ends."""

    marks: tuple[int, ...]
    blocks: tuple[tuple[tuple[int, ...], Ends, int], ...]
    leaves: Ends
    end_blocks: tuple[Ends, ...] = ()


def _set_partitions(items: list[int]) -> Iterator[list[list[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def _vectors(size: int, bound: Ends) -> Iterator[Ends]:
    for a in range(min(size, bound[0]) + 1):
        for b in range(min(size - a, bound[1]) + 1):
            c = size - a - b
            if c <= bound[2]:
                yield (a, b, c)


def _minus(u: Ends, v: Ends) -> Ends:
    return (u[0] - v[0], u[1] - v[1], u[2] - v[2])


def _contracted(v: Ends) -> bool:
    return v[0] == v[1] == v[2]


def _pruned_distributions(profile: Profile, blocks, ends: Ends, block_total: int):
    """Hand each block a directed-end vector so its excess is 1 or 2."""
    if not blocks:
        if block_total == 0:
            yield (), ends
        return
    marks = blocks[0]
    base = profile.base(marks)
    for excess in (2, 1):
        size = base - excess
        if size < 1 or size > block_total:
            continue
        for vec in _vectors(size, ends):
            if _contracted(vec):
                continue
            for tail, left in _pruned_distributions(
                profile, blocks[1:], _minus(ends, vec), block_total - size
            ):
                yield ((tuple(marks), vec, excess),) + tail, left


def _free_distributions(blocks, ends: Ends):
    if not blocks:
        yield (), ends
        return
    for size in range(0, sum(ends) + 1):
        for vec in _vectors(size, ends):
            if _contracted(vec):
                continue
            for tail, left in _free_distributions(blocks[1:], _minus(ends, vec)):
                yield ((tuple(blocks[0]), vec, 0),) + tail, left


def _end_multisets(ends: Ends, slots: int, floor: Ends | None = None):
    """Split ``ends`` into exactly ``slots`` nonempty non-contracted parts (as a multiset)."""
    total = sum(ends)
    if slots == 0:
        if total == 0:
            yield ()
        return
    if total < slots:
        return
    for size in range(1, total - slots + 2):
        for vec in _vectors(size, ends):
            if _contracted(vec):
                continue
            key = (size, vec)
            if floor is not None and key < floor:
                continue
            for tail in _end_multisets(_minus(ends, vec), slots - 1, key):
                yield (vec,) + tail


def vertex_splits(
    profile: Profile,
    marks: tuple[int, ...],
    ends: Ends,
    has_parent: bool,
    target: int,
    must: int | None,
    prune: bool = True,
) -> Iterator[Split]:
    """Enumerate neighbourhoods of the top vertex of a (sub)tree.

    With ``prune`` every subtree below must contain a constrained mark and have
    excess 1 (floppy) or 2 (rigid), and the top vertex must carry exactly
    ``target`` constraint rows counting one per rigid subtree; types violating
    this have a singular evaluation system.
    """
    pool = [m for m in marks if m != must]
    fixed = (must,) if must is not None else ()
    for r in range(len(pool) + 1):
        for extra in itertools.combinations(pool, r):
            here = tuple(sorted(fixed + extra))
            nchild = 3 + sum(profile.psi[m] for m in here) - len(here) - int(has_parent)
            if nchild < 0:
                continue
            rows = sum(profile.codim[m] for m in here)
            if prune and rows > target:
                continue
            remaining = [m for m in marks if m not in here]
            for part in _set_partitions(remaining):
                if len(part) > nchild:
                    continue
                if prune:
                    if any(not (set(b) & profile.constrained) for b in part):
                        continue
                    leaves = nchild - len(part)
                    block_total = sum(ends) - leaves
                    if block_total < 0:
                        continue
                    for blocks, left in _pruned_distributions(profile, part, ends, block_total):
                        if sum(1 for b in blocks if b[2] == 2) != target - rows:
                            continue
                        yield Split(here, blocks, left)
                else:
                    for blocks, left in _free_distributions(part, ends):
                        slots = nchild - len(blocks)
                        if slots < 0:
                            continue
                        for parts in _end_multisets(left, slots):
                            leaves = [0, 0, 0]
                            groups = []
                            for vec in parts:
                                if sum(vec) == 1:
                                    leaves[vec.index(1)] += 1
                                else:
                                    groups.append(vec)
                            yield Split(here, blocks, tuple(leaves), tuple(groups))


# -- exhaustive generation -----------------------------------------------------


def check_degree(d: int, max_degree: int = DEFAULT_MAX_DEGREE) -> None:
    if d > max_degree or d > HARD_MAX_DEGREE:
        raise DegreeTooLarge(f"degree {d} exceeds the configured maximum {max_degree}")
    if d == HARD_MAX_DEGREE:
        warnings.warn("degree 3 enumeration can take a very long time", RuntimeWarning, stacklevel=3)


class _Generator:
    def __init__(self, profile: Profile, prune: bool):
        self.profile = profile
        self.prune = prune
        self.memo: dict[tuple, list[Node]] = {}

    def subtrees(self, marks: tuple[int, ...], ends: Ends) -> list[Node]:
        key = (marks, ends)
        if key in self.memo:
            return self.memo[key]
        target = self.profile.excess(marks, ends) if self.prune else 0
        out: dict[str, Node] = {}
        for split in vertex_splits(self.profile, marks, ends, True, target, None, self.prune):
            for node in self._assemble(split):
                out.setdefault(node.code, node)
        result = [out[k] for k in sorted(out)]
        self.memo[key] = result
        return result

    def _assemble(self, split: Split) -> Iterator[Node]:
        options = [self.subtrees(b[0], b[1]) for b in split.blocks]
        options += [self.subtrees((), vec) for vec in split.end_blocks]
        for combo in itertools.product(*options):
            yield Node.make(split.marks, split.leaves, combo)

    def roots(self, n_marks: int, d: int) -> list[Node]:
        marks = tuple(range(n_marks))
        must = self.profile.root_mark() if n_marks else None
        out: dict[str, Node] = {}
        for split in vertex_splits(self.profile, marks, (d, d, d), False, 2, must, self.prune):
            for node in self._assemble(split):
                out.setdefault(node.code, node)
        return [out[k] for k in sorted(out)]


def with_rays(d: int, insertions: tuple[Insertion, ...], root: Node) -> list[CombinatorialType]:
    line_marks = [i for i, ins in enumerate(insertions) if ins.codim == 1]
    out = []
    for choice in itertools.product(range(3), repeat=len(line_marks)):
        out.append(CombinatorialType(d, insertions, root, tuple(zip(line_marks, choice))))
    return out


def generate_types(
    d: int,
    insertions: Sequence[Insertion],
    prune: bool = True,
    max_degree: int = DEFAULT_MAX_DEGREE,
) -> list[CombinatorialType]:
    """All combinatorial types of degree ``d`` for the given marked ends.

    Marked end ``i`` sits at a vertex whose valence is 3 plus the psi powers
    of the marks there; all other vertices are trivalent; there are ``d``
    directed ends of each standard direction and no contracted bounded edge.
    With ``prune`` (the default) only types whose evaluation system can be
    nonsingular are listed.  Each line-constrained end multiplies the list by
    its three ray choices.  Order is by canonical code.
    """
    check_degree(d, max_degree)
    insertions = tuple(insertions)
    if not insertions:
        return []
    gen = _Generator(Profile(insertions), prune)
    types = []
    for root in gen.roots(len(insertions), d):
        types.extend(with_rays(d, insertions, root))
    types.sort(key=lambda t: t.code)
    return types


# -- cells ----------------------------------------------------------------------


@dataclass(frozen=True)
class LinearSystem:
    matrix: list[list[int]]
    rhs: list[Fraction]
    row_labels: list[str]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.matrix), (len(self.matrix[0]) if self.matrix else 0)


def _position_row(ctype: CombinatorialType, mark: int, functional: Vec) -> list[int]:
    row = [functional[0], functional[1]] + [0] * len(ctype.edges)
    for e in ctype.paths[ctype.mark_vertex[mark]]:
        direction = ctype.edges[e].direction
        row[2 + e] = functional[0] * direction[0] + functional[1] * direction[1]
    return row


def evaluation_rows(ctype: CombinatorialType, config: Configuration | None, as_points: frozenset[int] = frozenset()):
    """Rows of the evaluation map: two per point, one per line (or two if in ``as_points``)."""
    matrix, rhs, labels = [], [], []
    for m, ins in enumerate(ctype.insertions):
        if ins.codim == 2 or (ins.codim == 1 and m in as_points):
            for axis, functional in (("x", (1, 0)), ("y", (0, 1))):
                matrix.append(_position_row(ctype, m, functional))
                if config is not None and ins.codim == 2:
                    rhs.append(Fraction(config.points[m][axis == "y"]))
                labels.append(f"P{m}.{axis}")
        elif ins.codim == 1:
            ray = ctype.ray_of[m]
            functional = (-DIRECTIONS[ray][1], DIRECTIONS[ray][0])
            matrix.append(_position_row(ctype, m, functional))
            if config is not None:
                root = config.lines[m].root
                rhs.append(Fraction(functional[0] * root[0] + functional[1] * root[1]))
            labels.append(f"G{m}.ray{ray}")
    return matrix, rhs, labels


def position_system(ctype: CombinatorialType, config: Configuration) -> LinearSystem:
    """Linear system for the anchor position and bounded-edge lengths."""
    matrix, rhs, labels = evaluation_rows(ctype, config)
    ncols = 2 + len(ctype.edges)
    if len(matrix) != ncols:
        raise ValueError(
            f"evaluation system is {len(matrix)}x{ncols}, not square; "
            "the invariant is not zero-dimensional"
        )
    return LinearSystem(matrix, rhs, labels)


@dataclass(frozen=True)
class ParameterizedCurve:
    ctype: CombinatorialType
    anchor: Point
    lengths: tuple[Fraction, ...]

    @cached_property
    def vertex_positions(self) -> list[Point]:
        pos: list[Point | None] = [None] * len(self.ctype.nodes)
        pos[0] = self.anchor
        # edges are listed in preorder, so parents are placed first
        for length, e in zip(self.lengths, self.ctype.edges):
            pos[e.child] = add(pos[e.parent], scale(length, e.direction))
        return pos

    def mark_position(self, mark: int) -> Point:
        return self.vertex_positions[self.ctype.mark_vertex[mark]]


def solve_cell(ctype: CombinatorialType, config: Configuration) -> ParameterizedCurve | None:
    """The unique curve of this type meeting the configuration, if it exists."""
    system = position_system(ctype, config)
    sol = solve(system.matrix, system.rhs)
    if sol is None:
        return None
    lengths = tuple(sol[2:])
    if any(length < 0 for length in lengths):
        return None
    if any(length == 0 for length in lengths):
        raise NonGeneralConfig(f"zero edge length in type {ctype.code}")
    curve = ParameterizedCurve(ctype, (sol[0], sol[1]), lengths)
    for m, ray in ctype.rays:
        line = config.lines[m]
        where = curve.mark_position(m)
        if where == line.root:
            raise NonGeneralConfig(f"marked end {m} lands on the root of its line")
        t = line.ray_parameter(ray, where)
        if t is None or t < 0:
            return None
    return curve


def multiplicity(ctype: CombinatorialType, config: Configuration | None = None) -> int:
    """Facet weight times the absolute determinant of the evaluation map."""
    matrix, _, _ = evaluation_rows(ctype, None)
    return ctype.facet_weight * abs(det_int(matrix))


# -- determinant identity for curves with a growing edge along the line ---------


def _growing_edge_vertex(ctype: CombinatorialType) -> tuple[int, int, int]:
    lines = [m for m, ins in enumerate(ctype.insertions) if ins.codim == 1 and ins.psi == 1]
    points = [m for m, ins in enumerate(ctype.insertions) if ins.codim == 2]
    if len(lines) != 1 or len(points) < 2:
        raise ShapeViolation("need one psi-line end and at least two point ends")
    mark = lines[0]
    v = ctype.mark_vertex[mark]
    node = ctype.nodes[v]
    ray = ctype.ray_of[mark]
    if ctype.valence(v) != 4 or node.marks != (mark,) or node.ends[ray] == 0:
        raise ShapeViolation(
            f"marked end {mark} is not at a 4-valent vertex with a directed end along its ray"
        )
    return mark, v, ray


def qualifies_for_det_identity(ctype: CombinatorialType) -> bool:
    try:
        _growing_edge_vertex(ctype)
    except ShapeViolation:
        return False
    return True


def resolve_line_vertex(ctype: CombinatorialType) -> tuple[CombinatorialType, int]:
    """Pull the psi-line end off its vertex along with a directed end on its ray.

    The new trivalent vertex is joined to the old one by a bounded edge running
    along the ray; the result is a type of the one-dimensional product without
    psi at the line end.  Returns the new type and the index of that edge.
    """
    mark, v, ray = _growing_edge_vertex(ctype)
    spur_ends = [0, 0, 0]
    spur_ends[ray] = 1
    spur = Node.make((mark,), tuple(spur_ends))
    counter = iter(range(len(ctype.nodes)))

    # same preorder as CombinatorialType._layout
    def rebuild(node: Node) -> Node:
        here = next(counter)
        children = [rebuild(ch) for ch in node.children]
        if here != v:
            return Node.make(node.marks, node.ends, children)
        ends = list(node.ends)
        ends[ray] -= 1
        marks = tuple(m for m in node.marks if m != mark)
        return Node.make(marks, tuple(ends), children + [spur])

    insertions = list(ctype.insertions)
    insertions[mark] = Insertion(0, 1)
    new_type = CombinatorialType(ctype.degree, tuple(insertions), rebuild(ctype.root), ctype.rays)
    spur_vertex = new_type.mark_vertex[mark]
    edge = next(i for i, e in enumerate(new_type.edges) if e.child == spur_vertex)
    return new_type, edge


def det_identity_values(ctype: CombinatorialType) -> tuple[int, int]:
    """``(|det(ft x ev)|, |det(ev with the line end replaced by a point)|)``.

    ``ft`` is the length coordinate of the 4-marked curve obtained by keeping
    the line end, the directed end beside it and the first two point ends.
    """
    resolved, _ = resolve_line_vertex(ctype)
    mark, _, _ = _growing_edge_vertex(ctype)
    spur = resolved.mark_vertex[mark]
    p2, p3 = [m for m, ins in enumerate(ctype.insertions) if ins.codim == 2][:2]
    v2, v3 = resolved.mark_vertex[p2], resolved.mark_vertex[p3]
    ft_row = [0, 0]
    for i, e in enumerate(resolved.edges):
        below = set(_subtree_vertices(resolved, e.child))
        side_one = spur in below
        side_pts = (v2 in below, v3 in below)
        separates = (side_one and not any(side_pts)) or (not side_one and all(side_pts))
        ft_row.append(1 if separates else 0)
    ev, _, _ = evaluation_rows(resolved, None)
    ev_point, _, _ = evaluation_rows(resolved, None, as_points=frozenset({mark}))
    return abs(det_int(ev + [ft_row])), abs(det_int(ev_point))


def _subtree_vertices(ctype: CombinatorialType, vertex: int) -> list[int]:
    out = [vertex]
    children: dict[int, list[int]] = {}
    for e in ctype.edges:
        children.setdefault(e.parent, []).append(e.child)
    stack = [vertex]
    while stack:
        u = stack.pop()
        for c in children.get(u, []):
            out.append(c)
            stack.append(c)
    return out


def verify_det_identity(ctype: CombinatorialType, config: Configuration | None = None) -> bool:
    """Check that the weight with a forgetful coordinate equals the all-point weight."""
    with_ft, all_points = det_identity_values(ctype)
    return with_ft == all_points
