"""Direct evaluation of descendants by counting curves with multiplicity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .curves import (
    DEFAULT_MAX_DEGREE,
    CombinatorialType,
    ParameterizedCurve,
    check_degree,
    generate_types,
    multiplicity,
    solve_cell,
)
from .errors import NonGeneralConfig
from .geometry import Configuration, random_general_config
from .invariant import Invariant, canonicalize, check_supported, require_well_posed
from .search import CurveSearch


@dataclass(frozen=True)
class SolvedCurve:
    ctype: CombinatorialType
    curve: ParameterizedCurve
    multiplicity: int

    @property
    def contribution(self) -> Fraction:
        """Share of this curve in the normalized count: labelled copies over ``(d!)^3``."""
        d = self.ctype.degree
        return Fraction(self.ctype.labelled_count * self.multiplicity, math.factorial(d) ** 3)

    def as_dict(self) -> dict:
        return {
            "type": self.ctype.code,
            "vertices": [[str(x), str(y)] for x, y in self.curve.vertex_positions],
            "lengths": [str(v) for v in self.curve.lengths],
            "multiplicity": self.multiplicity,
            "labelled_count": self.ctype.labelled_count,
        }


def _check_input(inv: Invariant, max_degree: int) -> Invariant:
    inv = canonicalize(inv)
    require_well_posed(inv)
    check_supported(inv)
    check_degree(inv.degree, max_degree)
    return inv


def solved_curves(
    inv: Invariant,
    config: Configuration,
    method: str = "search",
    max_degree: int = DEFAULT_MAX_DEGREE,
) -> list[SolvedCurve]:
    """All curves of ``inv``'s conditions through ``config`` with their multiplicities.

    ``method="search"`` walks the configuration geometrically; ``"exhaustive"``
    solves the cell of every generated type.  Both confirm each curve against
    the full linear system.
    """
    inv = _check_input(inv, max_degree)
    if not inv.insertions:
        return []
    if method == "exhaustive":
        candidates = generate_types(inv.degree, inv.insertions, max_degree=max_degree)
    elif method == "search":
        found = CurveSearch(inv, config).curves()
        candidates = [CombinatorialType(inv.degree, inv.insertions, node, rays) for node, rays in found]
    else:
        raise ValueError(f"unknown method {method!r}")
    out = []
    for ctype in candidates:
        curve = solve_cell(ctype, config)
        if curve is None:
            if method == "search":
                raise AssertionError(f"search produced an unsolvable type {ctype.code}")
            continue
        mult = multiplicity(ctype, config)
        if mult:
            out.append(SolvedCurve(ctype, curve, mult))
    return out


def evaluate_direct(
    inv: Invariant,
    config: Configuration,
    method: str = "search",
    max_degree: int = DEFAULT_MAX_DEGREE,
) -> Fraction:
    """Weighted count of curves through ``config``, normalized by ``(d!)^3``."""
    return sum(
        (c.contribution for c in solved_curves(inv, config, method, max_degree)), Fraction(0)
    )


def evaluate_seeded(
    inv: Invariant,
    seed: int,
    method: str = "search",
    max_degree: int = DEFAULT_MAX_DEGREE,
    max_attempts: int = 20,
) -> tuple[Fraction, Configuration]:
    """Evaluate on the configuration drawn from ``seed``, redrawing on degeneracy."""
    inv = _check_input(inv, max_degree)
    last = None
    for attempt in range(max_attempts):
        config = random_general_config(seed, inv, attempt=attempt)
        try:
            return evaluate_direct(inv, config, method, max_degree), config
        except NonGeneralConfig as exc:
            last = exc
    raise NonGeneralConfig(f"seed {seed}: every redraw was degenerate ({last})")


class OracleProvider:
    """Base values computed by curve enumeration on a fixed seed."""

    name = "oracle"

    def __init__(self, seed: int = 0, max_degree: int = DEFAULT_MAX_DEGREE):
        self.seed = seed
        self.max_degree = max_degree

    def __call__(self, inv: Invariant) -> Fraction:
        value, _ = evaluate_seeded(inv, self.seed, max_degree=self.max_degree)
        return value
