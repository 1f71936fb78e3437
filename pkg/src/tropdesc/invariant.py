"""Descendant brackets <tau_a(b) ...>_d: data model, canonical form, grammar.

An insertion ``tau_a(b)`` is a marked end carrying ``a`` psi-classes and an
incidence condition of codimension ``b`` (0 = free, 1 = tropical line,
2 = point).  Labels of marked ends are erased; an invariant is a degree plus
a multiset of insertions, stored sorted so that equal multisets compare equal.
"""

from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import DimensionError, InvariantSyntaxError, UnsupportedShape


class Insertion(NamedTuple):
    psi: int
    codim: int

    def __str__(self) -> str:
        return f"tau_{self.psi}({self.codim})"


STRING = Insertion(0, 0)
DILATON = Insertion(1, 0)
DIVISOR = Insertion(0, 1)
LINE_PSI = Insertion(1, 1)
POINT = Insertion(0, 2)


def _sort_key(ins: Insertion) -> tuple[int, int]:
    return (ins.codim, ins.psi)


@dataclass(frozen=True)
class Invariant:
    degree: int
    insertions: tuple[Insertion, ...]

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be non-negative")
        for ins in self.insertions:
            if ins.psi < 0 or ins.codim not in (0, 1, 2):
                raise ValueError(f"invalid insertion {ins!r}")

    @classmethod
    def of(cls, degree: int, insertions: Iterable[tuple[int, int]]) -> "Invariant":
        """Build a canonical invariant from ``(psi, codim)`` pairs."""
        ins = tuple(Insertion(int(a), int(b)) for a, b in insertions)
        return cls(degree, tuple(sorted(ins, key=_sort_key, reverse=True)))

    @property
    def l(self) -> int:
        return sum(1 for i in self.insertions if i.codim == 0)

    @property
    def m(self) -> int:
        return sum(1 for i in self.insertions if i.codim == 1)

    @property
    def n(self) -> int:
        return sum(1 for i in self.insertions if i.codim == 2)

    def count(self, ins: Insertion) -> int:
        return self.insertions.count(ins)

    def remove(self, ins: Insertion) -> "Invariant":
        """Drop one copy of ``ins``; the result stays canonical."""
        items = list(self.insertions)
        items.remove(ins)
        return Invariant(self.degree, tuple(items))

    def replace(self, old: Insertion, new: Insertion) -> "Invariant":
        items = list(self.insertions)
        items.remove(old)
        items.append(new)
        return Invariant.of(self.degree, items)

    def __str__(self) -> str:
        return format_invariant(self)


def canonicalize(inv: Invariant) -> Invariant:
    return Invariant.of(inv.degree, inv.insertions)


def dimension_balance(inv: Invariant) -> int:
    """Moduli dimension minus codimension of all conditions; 0 means well-posed."""
    dim = len(inv.insertions) + 3 * inv.degree - 1
    codim = sum(i.codim + i.psi for i in inv.insertions)
    return dim - codim


def require_well_posed(inv: Invariant) -> None:
    bal = dimension_balance(inv)
    if bal != 0:
        raise DimensionError(
            f"{format_invariant(inv)} is not zero-dimensional "
            f"(dimension balance {bal:+d}: "
            f"{'too few' if bal > 0 else 'too many'} conditions)"
        )


class Shape(enum.Enum):
    PURE_TAU_POINT = "PureTauPoint"
    TRR_HEAD = "TrrHead"
    STRING_HEAD = "StringHead"
    DILATON_HEAD = "DilatonHead"
    DIVISOR_HEAD = "DivisorHead"
    DEGREE_ZERO = "DegreeZero"
    UNSTABLE = "Unstable"
    DIMENSION_INVALID = "DimensionInvalid"


def check_supported(inv: Invariant) -> None:
    """Reject psi-powers at lines that no rule or oracle here can handle."""
    lines_with_psi = [i for i in inv.insertions if i.codim == 1 and i.psi >= 1]
    if any(i.psi >= 2 for i in lines_with_psi):
        raise UnsupportedShape(
            f"{format_invariant(inv)}: psi-power >= 2 at a line-constrained end"
        )
    if len(lines_with_psi) > 1:
        raise UnsupportedShape(
            f"{format_invariant(inv)}: more than one line-constrained end carries psi"
        )


def classify(inv: Invariant) -> Shape:
    """Pick the rule that applies to a canonical invariant.

    Degree-0 invariants with exactly three insertions are base cases and take
    precedence over the string and dilaton heads (the string equation does not
    apply when its result would be unstable).
    """
    if dimension_balance(inv) != 0:
        return Shape.DIMENSION_INVALID
    size = len(inv.insertions)
    if inv.degree == 0 and size < 3:
        return Shape.UNSTABLE
    if inv.degree == 0 and size == 3:
        return Shape.DEGREE_ZERO
    check_supported(inv)
    if STRING in inv.insertions:
        return Shape.STRING_HEAD
    if DILATON in inv.insertions:
        return Shape.DILATON_HEAD
    if DIVISOR in inv.insertions and inv.l == 0:
        return Shape.DIVISOR_HEAD
    if (
        inv.l == 0
        and inv.m == 1
        and LINE_PSI in inv.insertions
        and inv.n >= 2
    ):
        return Shape.TRR_HEAD
    if inv.degree == 0:
        return Shape.DEGREE_ZERO
    if inv.l == 0 and inv.m == 0:
        return Shape.PURE_TAU_POINT
    raise UnsupportedShape(f"{format_invariant(inv)}: no recursion rule applies")


_INS = re.compile(r"tau_(\d+)\((\d+)\)(?:\^(\d+))?")
_DIGITS = re.compile(r"\d+")


def parse_invariant(text: str) -> Invariant:
    """Parse ``<tau_1(1) tau_1(2)^2>_2`` into a canonical invariant."""
    pos = 0
    n = len(text)

    def skip_ws(p: int) -> int:
        while p < n and text[p].isspace():
            p += 1
        return p

    pos = skip_ws(pos)
    if pos >= n or text[pos] != "<":
        raise InvariantSyntaxError("expected '<'", pos, text)
    pos += 1
    items: list[Insertion] = []
    while True:
        pos = skip_ws(pos)
        if pos >= n:
            raise InvariantSyntaxError("unterminated invariant, expected '>'", pos, text)
        if text[pos] == ">":
            pos += 1
            break
        match = _INS.match(text, pos)
        if match is None:
            raise InvariantSyntaxError("expected insertion 'tau_A(B)'", pos, text)
        end = match.end()
        if end < n and text[end] == "^":
            raise InvariantSyntaxError("malformed exponent", end, text)
        if end < n and not (text[end].isspace() or text[end] == ">"):
            raise InvariantSyntaxError("unexpected character after insertion", end, text)
        psi, codim = int(match.group(1)), int(match.group(2))
        if codim not in (0, 1, 2):
            raise InvariantSyntaxError(
                f"codimension must be 0, 1 or 2, got {codim}", match.start(2), text
            )
        reps = int(match.group(3)) if match.group(3) is not None else 1
        items.extend([Insertion(psi, codim)] * reps)
        pos = end
    pos = skip_ws(pos)
    if pos >= n or text[pos] != "_":
        raise InvariantSyntaxError("expected '_' before degree", pos, text)
    pos = skip_ws(pos + 1)
    if pos < n and text[pos] == "-":
        raise InvariantSyntaxError("negative degree", pos, text)
    match = _DIGITS.match(text, pos)
    if match is None:
        raise InvariantSyntaxError("expected non-negative integer degree", pos, text)
    degree = int(match.group())
    rest = skip_ws(match.end())
    if rest != n:
        raise InvariantSyntaxError("trailing characters", rest, text)
    return Invariant.of(degree, items)


def format_invariant(inv: Invariant) -> str:
    canon = canonicalize(inv)
    parts = []
    counts = Counter(canon.insertions)
    seen = set()
    for ins in canon.insertions:
        if ins in seen:
            continue
        seen.add(ins)
        k = counts[ins]
        parts.append(str(ins) if k == 1 else f"{ins}^{k}")
    return "<" + " ".join(parts) + f">_{canon.degree}"
