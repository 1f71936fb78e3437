import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tropdesc.errors import DimensionError, InvariantSyntaxError, UnsupportedShape
from tropdesc.invariant import (
    Insertion,
    Invariant,
    Shape,
    canonicalize,
    check_supported,
    classify,
    dimension_balance,
    format_invariant,
    parse_invariant,
    require_well_posed,
)

insertions = st.builds(Insertion, st.integers(0, 4), st.integers(0, 2))
invariants = st.builds(
    lambda d, ins: Invariant(d, tuple(ins)),
    st.integers(0, 4),
    st.lists(insertions, max_size=8),
)


def inv(text: str) -> Invariant:
    return parse_invariant(text)


# -- canonical form ------------------------------------------------------------


def test_canonical_order_points_before_lines():
    raw = Invariant(2, (Insertion(1, 2), Insertion(1, 1), Insertion(1, 2)))
    assert canonicalize(raw).insertions == (Insertion(1, 2), Insertion(1, 2), Insertion(1, 1))


def test_canonical_form_already_canonical():
    two_points = inv("<tau_0(2) tau_0(2)>_1")
    assert canonicalize(two_points) == two_points


@settings(max_examples=1000)
@given(invariants)
def test_canonicalize_idempotent(i):
    once = canonicalize(i)
    assert canonicalize(once) == once


@given(invariants, st.randoms())
def test_equal_multisets_compare_equal(i, rnd):
    shuffled = list(i.insertions)
    rnd.shuffle(shuffled)
    assert canonicalize(Invariant(i.degree, tuple(shuffled))) == canonicalize(i)


# -- dimension ---------------------------------------------------------------------


@pytest.mark.parametrize(
    "text, balance",
    [
        ("<tau_1(1) tau_1(2)^2>_2", 0),
        ("<tau_0(2)^2>_1", 0),
        ("<tau_0(2)>_1", 1),
        ("<tau_0(2)^5>_2", 0),
    ],
)
def test_dimension_balance(text, balance):
    assert dimension_balance(inv(text)) == balance


@given(invariants, st.randoms())
def test_balance_ignores_order(i, rnd):
    shuffled = list(i.insertions)
    rnd.shuffle(shuffled)
    assert dimension_balance(Invariant(i.degree, tuple(shuffled))) == dimension_balance(i)


def test_require_well_posed_rejects_nonzero_balance():
    with pytest.raises(DimensionError):
        require_well_posed(inv("<tau_0(2)>_1"))
    require_well_posed(inv("<tau_0(2)^2>_1"))


# -- classification ------------------------------------------------------------------


@pytest.mark.parametrize(
    "text, shape",
    [
        ("<tau_1(1) tau_1(2)^2>_2", Shape.TRR_HEAD),
        ("<tau_0(0) tau_0(1)>_0", Shape.UNSTABLE),
        ("<tau_0(2)^5>_2", Shape.PURE_TAU_POINT),
        ("<tau_0(0) tau_0(2)^3>_1", Shape.STRING_HEAD),
        ("<tau_1(0) tau_0(2)^2>_1", Shape.DILATON_HEAD),
        ("<tau_0(1) tau_0(2)^2>_1", Shape.DIVISOR_HEAD),
        ("<tau_0(0) tau_0(1)^2>_0", Shape.DEGREE_ZERO),
        ("<tau_0(0)^2 tau_0(2)>_0", Shape.DEGREE_ZERO),
        ("<tau_0(2)>_1", Shape.DIMENSION_INVALID),
    ],
)
def test_classify_examples(text, shape):
    assert classify(inv(text)) is shape


@pytest.mark.parametrize(
    "text",
    ["<tau_2(1) tau_0(2)^3>_2", "<tau_1(1)^2 tau_0(2)^3>_2", "<tau_2(1)>_1"],
)
def test_unsupported_line_psi(text):
    with pytest.raises(UnsupportedShape):
        check_supported(inv(text))


def test_psi_free_second_line_is_supported():
    i = inv("<tau_0(1) tau_1(1) tau_0(2)^4>_2")
    check_supported(i)
    assert classify(i) is Shape.DIVISOR_HEAD


def expected_shape(i: Invariant) -> Shape | None:
    """Reference precedence, written independently of the implementation."""
    ins = i.insertions
    lines = [x for x in ins if x.codim == 1]
    if dimension_balance(i) != 0:
        return Shape.DIMENSION_INVALID
    if i.degree == 0 and len(ins) < 3:
        return Shape.UNSTABLE
    if i.degree == 0 and len(ins) == 3:
        return Shape.DEGREE_ZERO
    if any(x.psi >= 2 for x in lines) or sum(1 for x in lines if x.psi) > 1:
        return None
    free = [x for x in ins if x.codim == 0]
    if Insertion(0, 0) in ins:
        return Shape.STRING_HEAD
    if Insertion(1, 0) in ins:
        return Shape.DILATON_HEAD
    if Insertion(0, 1) in ins and not free:
        return Shape.DIVISOR_HEAD
    points = [x for x in ins if x.codim == 2]
    if not free and lines == [Insertion(1, 1)] and len(points) >= 2:
        return Shape.TRR_HEAD
    if i.degree == 0:
        return Shape.DEGREE_ZERO
    if not free and not lines:
        return Shape.PURE_TAU_POINT
    return None


def balanced_invariants():
    """Random invariants brought to zero balance by one extra point insertion."""

    def fix(d, ins):
        i = Invariant.of(d, ins)
        bal = dimension_balance(i)
        # tau_a(2) lowers the balance by a + 1
        return Invariant.of(d, ins + [(bal - 1, 2)]) if bal >= 1 else i

    return st.builds(fix, st.integers(0, 3), st.lists(insertions, max_size=7))


@settings(max_examples=1000)
@given(st.one_of(invariants, balanced_invariants()))
def test_classify_precedence(i):
    i = canonicalize(i)
    want = expected_shape(i)
    if want is None:
        with pytest.raises(UnsupportedShape):
            classify(i)
    else:
        assert classify(i) is want


@given(invariants)
def test_classify_deterministic(i):
    i = canonicalize(i)
    try:
        first = classify(i)
    except UnsupportedShape:
        with pytest.raises(UnsupportedShape):
            classify(i)
        return
    assert classify(i) is first


# -- grammar -----------------------------------------------------------------------


def test_parse_repeated_insertion():
    assert inv("<tau_1(1) tau_1(2)^2>_2") == Invariant.of(2, [(1, 1), (1, 2), (1, 2)])


def test_parse_power():
    assert inv("<tau_0(2)^5>_2") == Invariant.of(2, [(0, 2)] * 5)


def test_parse_zero_exponent_contributes_nothing():
    assert inv("<tau_0(2)^2 tau_3(0)^0>_1") == inv("<tau_0(2)^2>_1")


def test_parse_tolerates_whitespace():
    assert inv("  < tau_0(2)   tau_0(2) > _ 1 ") == inv("<tau_0(2)^2>_1")


@pytest.mark.parametrize(
    "text, position",
    [
        ("<tau_1(1)>_x", 11),
        ("tau_1(1)>_1", 0),
        ("<tau_1(1)", 9),
        ("<tau_1(3)>_1", 7),
        ("<tau_1(1)^>_1", 9),
        ("<tau_1(1)^x>_1", 9),
        ("<tau_1(1)>_-1", 11),
        ("<tau_1(1)>1", 10),
        ("<tau_1(1)>_1 extra", 13),
        ("<tau_a(1)>_1", 1),
        ("<tau_0(0)tau_0(1)>_0", 9),
    ],
)
def test_parse_errors_report_position(text, position):
    with pytest.raises(InvariantSyntaxError) as exc:
        parse_invariant(text)
    assert exc.value.position == position


def test_format_canonical_print_order():
    assert format_invariant(Invariant(2, (Insertion(1, 1), Insertion(1, 2), Insertion(1, 2)))) == (
        "<tau_1(2)^2 tau_1(1)>_2"
    )


def test_format_empty():
    assert format_invariant(Invariant(0, ())) == "<>_0"
    assert parse_invariant("<>_0") == Invariant(0, ())


@settings(max_examples=1000)
@given(invariants)
def test_parse_format_round_trip(i):
    assert parse_invariant(format_invariant(i)) == canonicalize(i)
