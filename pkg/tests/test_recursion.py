from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tropdesc.cache import CacheEntry, TableProvider, ValueTable
from tropdesc.errors import BaseUnavailable, DimensionError, ShapeViolation, UnsupportedShape
from tropdesc.invariant import Insertion, Invariant, Shape, classify, parse_invariant
from tropdesc.recursion import (
    LinearCombination,
    Reducer,
    ValueCache,
    apply_dilaton,
    apply_divisor,
    apply_string,
    apply_trr,
    base_value,
    reduce,
    splitting_terms,
    trr_roles,
)
from tropdesc.sweep import sweep_invariants


def inv(text: str) -> Invariant:
    return parse_invariant(text)


def table(**values) -> TableProvider:
    """Provider from ``name=value`` pairs keyed through ``KNOWN``."""
    return TableProvider(ValueTable(CacheEntry(KNOWN[k], Fraction(v), "table") for k, v in values.items()))


KNOWN = {
    "line_two_points": inv("<tau_0(2)^2>_1"),
    "conic_five_points": inv("<tau_0(2)^5>_2"),
    "paper_base": inv("<tau_0(2) tau_1(2)^2>_2"),
}


def synthetic(i: Invariant) -> Fraction:
    """Arbitrary but deterministic base values, for structural properties."""
    return Fraction(len(i.insertions) + 2 * i.degree + 1, i.degree + 3)


# -- linear combinations -----------------------------------------------------------


def test_combination_merges_equal_factors():
    a, b = inv("<tau_0(2)^2>_1"), inv("<tau_0(0) tau_0(1)>_0")
    combo = LinearCombination([(1, [a, b]), (2, [b, a]), (1, [a])])
    assert len(combo) == 2
    assert combo.coefficient(a, b) == 3
    assert combo.coefficient(a) == 1


def test_combination_drops_cancelled_terms():
    a = inv("<tau_0(2)^2>_1")
    assert len(LinearCombination([(1, [a]), (-1, [a])])) == 0


# -- string, dilaton, divisor ----------------------------------------------------------


def test_string_with_nothing_to_lower():
    assert len(apply_string(inv("<tau_0(0) tau_0(2)^3>_1"))) == 0


def test_string_lowers_single_psi():
    combo = apply_string(inv("<tau_0(0) tau_1(2) tau_0(2)^2>_1"))
    assert combo == LinearCombination([(1, [inv("<tau_0(2)^3>_1")])])


def test_string_merges_equal_lowerings():
    combo = apply_string(inv("<tau_0(0) tau_1(2)^2 tau_0(2)>_2"))
    assert combo == LinearCombination([(2, [inv("<tau_1(2) tau_0(2)^2>_2")])])


def test_string_requires_free_end():
    with pytest.raises(ShapeViolation):
        apply_string(inv("<tau_0(2)^2>_1"))


def test_dilaton_counts_directed_ends():
    # three ends of the line plus two marked points, minus two
    combo = apply_dilaton(inv("<tau_1(0) tau_0(2)^2>_1"))
    assert combo == LinearCombination([(3, [inv("<tau_0(2)^2>_1")])])


@pytest.mark.parametrize("d", [0, 1, 2])
def test_dilaton_coefficient(d):
    rest = Invariant.of(d, [(0, 2)] * 3)
    combo = apply_dilaton(Invariant.of(d, [(1, 0)] + [(0, 2)] * 3))
    assert combo.coefficient(rest) == 3 + 3 * d - 2


def test_double_dilaton_reduces_twice():
    value, trace = reduce(inv("<tau_1(0)^2 tau_0(2)^2>_1"), table(line_two_points=1))
    assert value == 4 * 3
    assert [n.rule for n in trace.walk()] == ["dilaton", "dilaton", "base"]


def test_divisor_degree_term():
    combo = apply_divisor(inv("<tau_0(1) tau_0(2)^2>_1"))
    assert combo == LinearCombination([(1, [inv("<tau_0(2)^2>_1")])])


def test_divisor_line_psi_becomes_point():
    combo = apply_divisor(inv("<tau_0(1) tau_1(1) tau_0(2)^4>_2"))
    assert combo == LinearCombination(
        [(2, [inv("<tau_1(1) tau_0(2)^4>_2")]), (1, [inv("<tau_0(2)^5>_2")])]
    )


def test_divisor_without_psi():
    combo = apply_divisor(inv("<tau_0(1)^2 tau_0(2)^2>_1"))
    assert combo == LinearCombination([(1, [inv("<tau_0(1) tau_0(2)^2>_1")])])


def test_divisor_point_psi_contributes_nothing():
    combo = apply_divisor(inv("<tau_0(1) tau_1(2) tau_0(2)>_1"))
    assert combo == LinearCombination([(1, [inv("<tau_1(2) tau_0(2)>_1")])])


# -- splitting -----------------------------------------------------------------------


def test_splitting_count_two_points():
    terms = splitting_terms((Insertion(1, 2),) * 2, 2)
    assert len(terms) == 9
    assert all(t.subset == () for t in terms)


def test_splitting_count_four_points():
    assert len(splitting_terms((Insertion(0, 2),) * 4, 2)) == 36


def test_splitting_degree_zero():
    terms = splitting_terms((Insertion(0, 2),) * 3, 0)
    assert {(t.d1, t.d2) for t in terms} == {(0, 0)}


def test_splitting_order():
    terms = splitting_terms((Insertion(0, 2),) * 3, 1)
    keys = [(t.epsilon, t.d1) for t in terms]
    assert keys == sorted(keys)
    assert [t.subset for t in terms[:2]] == [(), (2,)]


def test_splitting_rejects_bad_roles():
    with pytest.raises(ShapeViolation):
        splitting_terms((Insertion(0, 2),) * 2, 1, roles=(0, 0))


def test_trr_paper_example():
    combo = apply_trr(inv("<tau_1(1) tau_1(2)^2>_2"))
    base = inv("<tau_0(2) tau_1(2)^2>_2")
    assert combo == LinearCombination([(1, [inv("<tau_0(0) tau_0(1)>_0"), base]), (3, [base])])


def test_trr_two_points_never_split():
    combo = apply_trr(inv("<tau_1(1) tau_1(2)^2>_2"))
    for term in combo:
        for factor in term.factors:
            if Insertion(0, 1) in factor.insertions:
                assert factor.n == 0


def test_trr_surviving_terms_four_points():
    combo = apply_trr(inv("<tau_1(1) tau_0(2)^4>_2"))
    stable = [t for t in combo if all(classify(f) is not Shape.UNSTABLE for f in t.factors)]
    expected = LinearCombination(
        [
            # (1,1,1,1, both free points with the line)
            (1, [inv("<tau_0(1)^2 tau_0(2)^2>_1"), inv("<tau_0(1) tau_0(2)^2>_1")]),
            # (2,0,1,1, one free point with the line), two choices
            (2, [inv("<tau_0(2)^2 tau_0(1)>_1"), inv("<tau_0(0) tau_0(2)^3>_1")]),
            (3, [inv("<tau_0(2)^5>_2")]),
        ]
    )
    assert LinearCombination((t.coefficient, t.factors) for t in stable) == expected


def test_trr_rejects_other_shapes():
    with pytest.raises(ShapeViolation):
        apply_trr(inv("<tau_0(2)^5>_2"))


# -- base values -----------------------------------------------------------------------


def test_base_unstable_is_zero():
    assert base_value(inv("<tau_0(0) tau_0(1)>_0"), None) == 0


def test_base_two_lines_meet_once():
    assert base_value(inv("<tau_0(0) tau_0(1)^2>_0"), None) == 1


def test_base_degree_zero_other_is_zero():
    assert base_value(inv("<tau_1(0) tau_0(0) tau_0(1)>_0"), None) == 0


def test_base_delegates_pure_points():
    assert base_value(inv("<tau_0(2) tau_1(2)^2>_2"), table(paper_base=1)) == 1


def test_base_unavailable():
    with pytest.raises(BaseUnavailable):
        base_value(inv("<tau_0(2)^5>_2"), table(paper_base=1))


# -- reduce --------------------------------------------------------------------------------


def test_reduce_paper_value():
    value, trace = reduce(inv("<tau_1(1) tau_1(2)^2>_2"), table(paper_base=1))
    assert value == 3
    assert trace.rule == "trr"


def test_reduce_unstable_factor():
    value, trace = reduce(inv("<tau_0(0) tau_0(1)>_0"), None)
    assert value == 0
    assert trace.rule == "convention-zero"


def test_reduce_four_point_head():
    base = table(line_two_points=1, conic_five_points=1)
    assert reduce(inv("<tau_1(1) tau_0(2)^4>_2"), base)[0] == 4


def test_reduce_reports_missing_base():
    with pytest.raises(BaseUnavailable) as exc:
        reduce(inv("<tau_1(1) tau_0(2)^4>_2"), table(line_two_points=1))
    assert "tau_0(2)^5" in str(exc.value.invariant)


def test_reduce_rejects_dimension_invalid():
    with pytest.raises(DimensionError):
        reduce(inv("<tau_0(2)>_1"), None)


def test_reduce_propagates_unsupported():
    with pytest.raises(UnsupportedShape):
        reduce(inv("<tau_2(0) tau_0(2)>_1"), synthetic)


def test_translation_invariant_vanishes():
    value, trace = reduce(inv("<tau_3(0)>_1"), None)
    assert value == 0 and trace.rule == "convention-zero"


SWEEP = list(sweep_invariants(max_degree=2, max_insertions=5))


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SWEEP))
def test_trace_arithmetic(i):
    _, trace = reduce(i, synthetic)
    for node in trace.walk():
        assert node.recompute() == node.value
        if not node.children:
            assert node.rule in ("base", "convention-zero", "string", "dilaton", "divisor")
            if node.rule not in ("base", "convention-zero"):
                assert node.value == 0


def _measure(text: str):
    i = parse_invariant(text)
    return (i.degree, len(i.insertions), sum(x.psi for x in i.insertions))


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SWEEP))
def test_termination_measure_decreases(i):
    _, trace = reduce(i, synthetic)

    def check(node, path):
        if node.rule == "product":
            for _, child in node.children:
                check(child, path)
            return
        assert node.invariant not in path
        for _, child in node.children:
            factors = [c for _, c in child.children] if child.rule == "product" else [child]
            for f in factors:
                assert _measure(f.invariant) < _measure(node.invariant)
            check(child, path | {node.invariant})

    check(trace, frozenset())


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(SWEEP))
def test_memo_consistency(i):
    cold = reduce(i, synthetic, ValueCache())
    warm_cache = ValueCache()
    for other in SWEEP[:50]:
        reduce(other, synthetic, warm_cache)
    reduce(i, synthetic, warm_cache)
    warm = reduce(i, synthetic, warm_cache)
    assert cold == warm


def test_trace_json_shape():
    _, trace = reduce(inv("<tau_1(1) tau_1(2)^2>_2"), table(paper_base=1))
    data = trace.to_dict()
    assert set(data) == {"invariant", "rule", "coefficient", "children", "value"}
    assert data["value"] == "3"
    assert [c["coefficient"] for c in data["children"]] == ["1", "3"]


def test_trr_roles_enumerates_pairs():
    assert trr_roles(inv("<tau_1(1) tau_0(2)^4>_2")) == [
        (0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)
    ]
