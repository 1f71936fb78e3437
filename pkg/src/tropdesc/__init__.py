"""Exact planar tropical descendant invariants.

Two independent engines: a rewrite engine built on the topological recursion
relation with string, dilaton and divisor reductions, and a brute-force oracle
that counts tropical curves through a general configuration.
"""

from .errors import (
    BaseUnavailable,
    DegreeTooLarge,
    DimensionError,
    InvariantSyntaxError,
    NonGeneralConfig,
    TropDescError,
    UnsupportedShape,
)
from .invariant import (
    Insertion,
    Invariant,
    Shape,
    canonicalize,
    classify,
    dimension_balance,
    format_invariant,
    parse_invariant,
)
from .oracle import OracleProvider, evaluate_direct, evaluate_seeded
from .recursion import LinearCombination, Reducer, ValueCache, reduce

__all__ = [
    "BaseUnavailable",
    "DegreeTooLarge",
    "DimensionError",
    "Insertion",
    "Invariant",
    "InvariantSyntaxError",
    "LinearCombination",
    "NonGeneralConfig",
    "OracleProvider",
    "Reducer",
    "Shape",
    "TropDescError",
    "UnsupportedShape",
    "ValueCache",
    "canonicalize",
    "classify",
    "dimension_balance",
    "evaluate_direct",
    "evaluate_seeded",
    "format_invariant",
    "parse_invariant",
    "reduce",
]
