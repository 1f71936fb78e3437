"""The family of small invariants on which the two engines are compared."""

from __future__ import annotations

from typing import Iterator

from .errors import UnsupportedShape
from .invariant import Insertion, Invariant, check_supported
from .recursion import ValueCache, reducible


def sweep_invariants(
    max_degree: int = 2,
    max_insertions: int = 7,
    max_lines: int = 1,
    min_degree: int = 0,
    reducible_only: bool = True,
) -> Iterator[Invariant]:
    """Dimension-valid invariants in a fixed order.

    At most ``max_lines`` line insertions appear, each with psi power at most
    one.  With ``reducible_only`` (the default) only invariants whose whole
    derivation stays within the rewrite rules are kept; otherwise every
    invariant the enumeration oracle accepts is produced.
    """
    shapes = ValueCache()
    for d in range(min_degree, max_degree + 1):
        for k in range(1, max_insertions + 1):
            total = k + 3 * d - 1
            candidates = [Insertion(a, 0) for a in range(total + 1)]
            candidates += [Insertion(0, 1), Insertion(1, 1)]
            candidates += [Insertion(a, 2) for a in range(total - 1)]
            for combo in _multisets(candidates, k, total, max_lines):
                inv = Invariant.of(d, combo)
                if reducible_only:
                    if not reducible(inv, shapes):
                        continue
                else:
                    try:
                        check_supported(inv)
                    except UnsupportedShape:
                        continue
                yield inv


def _multisets(items: list[Insertion], size: int, weight: int, lines: int, start: int = 0):
    """Multisets of ``size`` items from ``items[start:]`` with total ``psi + codim``
    equal to ``weight`` and at most ``lines`` line insertions."""
    if size == 0:
        if weight == 0:
            yield ()
        return
    for idx in range(start, len(items)):
        ins = items[idx]
        w = ins.psi + ins.codim
        if w > weight:
            continue
        if ins.codim == 1 and lines == 0:
            continue
        for rest in _multisets(items, size - 1, weight - w, lines - (ins.codim == 1), idx):
            yield (ins,) + rest


def family_invariants(spec: str, max_degree: int = 2) -> Iterator[Invariant]:
    """Invariants selected by a family name.

    ``all``
        the full comparison sweep;
    ``points``
        pure point invariants ``<tau_a(2)...>_d``;
    ``trr``
        recursion heads ``<tau_1(1) tau_a(2)...>_d``.
    """
    if spec == "all":
        yield from sweep_invariants(max_degree)
    elif spec == "points":
        for inv in sweep_invariants(max_degree, max_lines=0):
            if inv.l == 0 and inv.m == 0:
                yield inv
    elif spec == "trr":
        for inv in sweep_invariants(max_degree):
            if inv.l == 0 and inv.m == 1 and inv.insertions[-1] == Insertion(1, 1):
                yield inv
    else:
        raise ValueError(f"unknown family {spec!r} (expected all, points or trr)")
