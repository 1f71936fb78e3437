"""Rewrite engine: reduces descendants to base values through the topological
recursion relation and the string, dilaton and divisor equations."""

from __future__ import annotations

import itertools
import threading
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, NamedTuple, Protocol

from .errors import BaseUnavailable, ShapeViolation, UnsupportedShape
from .invariant import (
    DILATON,
    DIVISOR,
    LINE_PSI,
    POINT,
    STRING,
    Insertion,
    Invariant,
    Shape,
    canonicalize,
    classify,
    dimension_balance,
    format_invariant,
    require_well_posed,
)

RULES = ("string", "dilaton", "divisor", "trr", "base", "convention-zero", "product")


@dataclass(frozen=True)
class Term:
    coefficient: Fraction
    factors: tuple[Invariant, ...]

    def __str__(self) -> str:
        body = " * ".join(format_invariant(f) for f in self.factors)
        return body if self.coefficient == 1 else f"{self.coefficient} * {body}"


class LinearCombination:
    """Rational combination of products of invariants, merged by factor multiset."""

    def __init__(self, terms: Iterable[tuple[Fraction | int, Iterable[Invariant]]] = ()):
        merged: dict[tuple[Invariant, ...], Fraction] = {}
        order: list[tuple[Invariant, ...]] = []
        for coeff, factors in terms:
            key = tuple(sorted((canonicalize(f) for f in factors), key=_factor_key))
            if not key:
                raise ValueError("a term needs at least one factor")
            if key not in merged:
                merged[key] = Fraction(0)
                order.append(key)
            merged[key] += Fraction(coeff)
        self.terms = tuple(Term(merged[k], k) for k in order if merged[k] != 0)

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinearCombination):
            return NotImplemented
        return dict((t.factors, t.coefficient) for t in self) == dict(
            (t.factors, t.coefficient) for t in other
        )

    def __repr__(self) -> str:
        return f"LinearCombination({' + '.join(map(str, self.terms)) or '0'})"

    def coefficient(self, *factors: Invariant) -> Fraction:
        key = tuple(sorted((canonicalize(f) for f in factors), key=_factor_key))
        for t in self.terms:
            if t.factors == key:
                return t.coefficient
        return Fraction(0)


def _factor_key(inv: Invariant):
    return (inv.degree, inv.insertions)


# --- derivation traces -------------------------------------------------------


@dataclass(frozen=True)
class DerivationNode:
    invariant: str
    rule: str
    value: Fraction
    children: tuple[tuple[Fraction, "DerivationNode"], ...] = ()

    def recompute(self) -> Fraction:
        """Value implied by the children under this node's rule."""
        if self.rule == "product":
            out = Fraction(1)
            for coeff, child in self.children:
                out *= coeff * child.value
            return out
        if self.rule in ("base", "convention-zero"):
            return self.value
        return sum((c * child.value for c, child in self.children), Fraction(0))

    def walk(self):
        yield self
        for _, child in self.children:
            yield from child.walk()

    def to_dict(self, coefficient: Fraction = Fraction(1)) -> dict:
        return {
            "invariant": self.invariant,
            "rule": self.rule,
            "coefficient": _rational(coefficient),
            "value": _rational(self.value),
            "children": [child.to_dict(c) for c, child in self.children],
        }

    def render(self, indent: int = 0, coefficient: Fraction = Fraction(1)) -> list[str]:
        prefix = "  " * indent
        coeff = "" if coefficient == 1 else f"{_rational(coefficient)} * "
        lines = [f"{prefix}{coeff}{self.invariant} = {_rational(self.value)}  [{self.rule}]"]
        for c, child in self.children:
            lines.extend(child.render(indent + 1, c))
        return lines


def _rational(value: Fraction) -> str:
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


# --- base values and caching -------------------------------------------------


class BaseProvider(Protocol):
    """Supplies values of pure point invariants; raises ``BaseUnavailable``."""

    name: str

    def __call__(self, inv: Invariant) -> Fraction: ...


class ValueCache:
    """Get-or-compute map keyed by canonical invariant.

    Racing workers may compute the same key; results are identical so the
    first stored value wins.
    """

    def __init__(self):
        self._data: dict[Invariant, tuple[Fraction, DerivationNode]] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._data)

    def __contains__(self, inv: Invariant) -> bool:
        return inv in self._data

    def get(self, inv: Invariant):
        with self._lock:
            return self._data.get(inv)

    def get_or_compute(self, inv: Invariant, compute: Callable[[], tuple[Fraction, DerivationNode]]):
        found = self.get(inv)
        if found is not None:
            return found
        result = compute()
        with self._lock:
            return self._data.setdefault(inv, result)


# --- rewrite rules -----------------------------------------------------------


def _require(inv: Invariant, shape: Shape, present: Insertion | None = None) -> None:
    if present is not None and present not in inv.insertions:
        raise ShapeViolation(f"{format_invariant(inv)} has no {present}")
    if present is None and classify(inv) is not shape:
        raise ShapeViolation(f"{format_invariant(inv)} is not of shape {shape.value}")


def apply_string(inv: Invariant) -> LinearCombination:
    _require(inv, Shape.STRING_HEAD, STRING)
    rest = inv.remove(STRING)
    counts = Counter(rest.insertions)
    return LinearCombination(
        (k, [rest.replace(ins, Insertion(ins.psi - 1, ins.codim))])
        for ins, k in counts.items()
        if ins.psi >= 1
    )


def dilaton_coefficient(rest: Invariant) -> int:
    """Number of ends left after forgetting the dilaton end, minus two.

    The directed ends of the curve count alongside the marked ones, so the
    coefficient is ``n + 3d - 2`` rather than the classical ``n - 2``.
    """
    return len(rest.insertions) + 3 * rest.degree - 2


def apply_dilaton(inv: Invariant) -> LinearCombination:
    _require(inv, Shape.DILATON_HEAD, DILATON)
    rest = inv.remove(DILATON)
    return LinearCombination([(dilaton_coefficient(rest), [rest])])


def apply_divisor(inv: Invariant) -> LinearCombination:
    _require(inv, Shape.DIVISOR_HEAD, DIVISOR)
    if inv.l:
        raise ShapeViolation(f"{format_invariant(inv)}: divisor rule needs no free insertions")
    rest = inv.remove(DIVISOR)
    terms: list[tuple[int, list[Invariant]]] = [(inv.degree, [rest])]
    for ins, k in Counter(rest.insertions).items():
        if ins.codim == 1 and ins.psi >= 1:
            terms.append((k, [rest.replace(ins, Insertion(ins.psi - 1, 2))]))
    return LinearCombination(terms)


class SplitIndex(NamedTuple):
    epsilon: int
    zeta: int
    d1: int
    d2: int
    subset: tuple[int, ...]


def splitting_terms(points: tuple[Insertion, ...], d: int, roles: tuple[int, int] = (0, 1)) -> list[SplitIndex]:
    """Raw index set of the recursion sum before any dimension pruning.

    ``points`` are the point insertions, ``roles`` the positions of the two
    that always go to the second factor.  ``subset`` lists the positions of
    the remaining points placed with the line factor.
    """
    a, b = roles
    if a == b or not (0 <= a < len(points) and 0 <= b < len(points)):
        raise ShapeViolation(f"invalid roles {roles} for {len(points)} points")
    free = [k for k in range(len(points)) if k not in roles]
    subsets = [c for size in range(len(free) + 1) for c in itertools.combinations(free, size)]
    return [
        SplitIndex(eps, 2 - eps, d1, d - d1, subset)
        for eps in range(3)
        for d1 in range(d + 1)
        for subset in subsets
    ]


def trr_roles(inv: Invariant) -> list[tuple[int, int]]:
    """All admissible role assignments for a recursion head, as point positions."""
    n = inv.n
    return list(itertools.combinations(range(n), 2))


def apply_trr(inv: Invariant, roles: tuple[int, int] = (0, 1)) -> LinearCombination:
    """Split a head ``<tau_1(1) prod tau_r(2)>_d`` into products of smaller invariants.

    Products with a dimension-invalid factor vanish and are dropped.  Unstable
    factors are kept so that derivation traces show them as conventional zeros.
    """
    _require(inv, Shape.TRR_HEAD)
    points = tuple(ins for ins in inv.insertions if ins.codim == 2)
    terms: list[tuple[int, list[Invariant]]] = []
    for s in splitting_terms(points, inv.degree, roles):
        chosen = set(s.subset)
        left = Invariant.of(
            s.d1, [(0, s.epsilon), DIVISOR] + [points[k] for k in sorted(chosen)]
        )
        right = Invariant.of(
            s.d2, [(0, s.zeta)] + [p for k, p in enumerate(points) if k not in chosen]
        )
        if dimension_balance(left) or dimension_balance(right):
            continue
        terms.append((1, [left, right]))
    terms.append((3, [inv.replace(LINE_PSI, POINT)]))
    return LinearCombination(terms)


def translation_invariant(inv: Invariant) -> bool:
    """No point and at most one line: the conditions cannot fix a translate,
    so a zero-dimensional count vanishes."""
    return inv.n == 0 and inv.m <= 1


def degree_zero_value(inv: Invariant) -> Fraction:
    if (
        len(inv.insertions) == 3
        and all(ins.psi == 0 for ins in inv.insertions)
        and sum(ins.codim for ins in inv.insertions) == 2
    ):
        return Fraction(1)
    return Fraction(0)


def base_value(inv: Invariant, base: BaseProvider | None) -> Fraction:
    shape = classify(inv)
    if shape is Shape.UNSTABLE:
        return Fraction(0)
    if shape is Shape.DEGREE_ZERO:
        return degree_zero_value(inv)
    if shape is Shape.PURE_TAU_POINT:
        if base is None:
            raise BaseUnavailable(format_invariant(inv))
        return Fraction(base(inv))
    raise ShapeViolation(f"{format_invariant(inv)} is not a base case ({shape.value})")


# --- the reducer -------------------------------------------------------------

_RULE_OF = {
    Shape.STRING_HEAD: ("string", apply_string),
    Shape.DILATON_HEAD: ("dilaton", apply_dilaton),
    Shape.DIVISOR_HEAD: ("divisor", apply_divisor),
}


@dataclass
class Reducer:
    base: BaseProvider | None
    cache: ValueCache = field(default_factory=ValueCache)
    choose_roles: Callable[[Invariant], tuple[int, int]] | None = None

    def reduce(self, inv: Invariant) -> tuple[Fraction, DerivationNode]:
        inv = canonicalize(inv)
        require_well_posed(inv)
        return self._reduce(inv, ())

    def _reduce(self, inv: Invariant, path: tuple[Invariant, ...]):
        if inv in path:
            raise RuntimeError(f"{format_invariant(inv)} recurs in its own derivation")
        return self.cache.get_or_compute(inv, lambda: self._compute(inv, path + (inv,)))

    def _compute(self, inv: Invariant, path) -> tuple[Fraction, DerivationNode]:
        text = format_invariant(inv)
        if dimension_balance(inv):
            return Fraction(0), DerivationNode(text, "convention-zero", Fraction(0))
        try:
            shape = classify(inv)
        except UnsupportedShape:
            if translation_invariant(inv):
                return Fraction(0), DerivationNode(text, "convention-zero", Fraction(0))
            raise
        if shape in (Shape.UNSTABLE, Shape.DEGREE_ZERO, Shape.PURE_TAU_POINT):
            value = base_value(inv, self.base)
            rule = "base" if value or shape is Shape.PURE_TAU_POINT else "convention-zero"
            return value, DerivationNode(text, rule, value)
        if shape is Shape.TRR_HEAD:
            roles = self.choose_roles(inv) if self.choose_roles else (0, 1)
            rule, combo = "trr", apply_trr(inv, roles)
        else:
            rule, fn = _RULE_OF[shape]
            combo = fn(inv)
        children = []
        total = Fraction(0)
        for term in combo:
            child = self._term_node(term, path)
            children.append((term.coefficient, child))
            total += term.coefficient * child.value
        return total, DerivationNode(text, rule, total, tuple(children))

    def _term_node(self, term: Term, path) -> DerivationNode:
        nodes = [self._reduce(f, path)[1] for f in term.factors]
        if len(nodes) == 1:
            return nodes[0]
        value = Fraction(1)
        for node in nodes:
            value *= node.value
        label = " * ".join(node.invariant for node in nodes)
        return DerivationNode(label, "product", value, tuple((Fraction(1), n) for n in nodes))


def reduce(
    inv: Invariant, base: BaseProvider | None, cache: ValueCache | None = None
) -> tuple[Fraction, DerivationNode]:
    """Exact value of ``inv`` with its derivation trace."""
    return Reducer(base, cache if cache is not None else ValueCache()).reduce(inv)


def reducible(inv: Invariant, cache: ValueCache | None = None) -> bool:
    """Whether every step of the derivation of ``inv`` has a rule or base case."""
    try:
        Reducer(lambda _: Fraction(0), cache if cache is not None else ValueCache()).reduce(inv)
    except UnsupportedShape:
        return False
    return True
