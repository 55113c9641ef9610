import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pml.myk import (
    ADMISSIBLE,
    NOT_ADMISSIBLE,
    UNDECIDED,
    BoxAlgebraError,
    BoxSpec,
    ParallelepipedSpec,
    TranslationSpec,
    admissible_translation,
    box_from_json,
    box_measure,
    delta_from_json,
    example_witness,
    exact,
    format_number,
    invariance_check,
    translate_box,
    translation_from_json,
)
from pml.series import SeriesDescriptor as S

UNIT = ParallelepipedSpec.unit()


def truncation_oracle(a, b, overrides, n):
    """Direct product over the first n coordinates of normalised interval lengths."""
    out = F(1)
    for i in range(1, n + 1):
        lo, hi = overrides.get(i, (a(i), b(i)))
        out *= (F(hi) - F(lo)) / (F(b(i)) - F(a(i)))
    return out


# -- box_measure -------------------------------------------------------------------

def test_quarter_box():
    assert box_measure(UNIT, BoxSpec({1: (0, F(1, 2)), 2: (0, F(1, 2))})) == F(1, 4)


def test_mass_above_one():
    assert box_measure(UNIT, BoxSpec({1: (0, 2)})) == 2


def test_no_overrides_is_one():
    assert box_measure(UNIT, BoxSpec()) == 1
    for n in range(6):
        assert truncation_oracle(UNIT.a, UNIT.b, {}, n) == 1


def test_unbounded_override_is_infinite():
    assert box_measure(UNIT, box_from_json({"overrides": {"2": [None, 0]}})) == math.inf


def test_nonunit_widths():
    delta = ParallelepipedSpec(a_prefix=(0, -1), b_prefix=(3, 1), a_tail=0, b_tail=F(1, 2))
    box = BoxSpec({1: (0, 1), 2: (0, 1), 5: (0, F(1, 8))})
    assert box_measure(delta, box) == F(1, 3) * F(1, 2) * F(1, 4)


@st.composite
def rational(draw, lo=-4, hi=4):
    num = draw(st.integers(lo * 12, hi * 12))
    return F(num, draw(st.sampled_from([1, 2, 3, 4, 6, 12])))


@st.composite
def boxes(draw, max_index=8, max_overrides=5):
    idx = draw(st.lists(st.integers(1, max_index), max_size=max_overrides, unique=True))
    out = {}
    for i in idx:
        u = draw(rational())
        out[i] = (u, u + draw(rational(0, 3)).__abs__() + F(1, 24))
    return out


@settings(max_examples=100, deadline=None)
@given(boxes())
def test_matches_truncation_oracle(overrides):
    assert box_measure(UNIT, BoxSpec(overrides)) == truncation_oracle(UNIT.a, UNIT.b, overrides, 8)


@settings(max_examples=100, deadline=None)
@given(boxes(), st.integers(1, 8), st.fractions(0, 1))
def test_finite_additivity(overrides, i, frac):
    if i not in overrides or not 0 < frac < 1:
        return
    u, v = overrides[i]
    cut = u + (v - u) * frac
    left = BoxSpec({**overrides, i: (u, cut)})
    right = BoxSpec({**overrides, i: (cut, v)})
    assert box_measure(UNIT, left) + box_measure(UNIT, right) == box_measure(UNIT, BoxSpec(overrides))


@settings(max_examples=100, deadline=None)
@given(boxes(), st.integers(1, 8), st.fractions(0, 1))
def test_monotone_under_shrinking(overrides, i, frac):
    if i not in overrides:
        return
    u, v = overrides[i]
    shrunk = BoxSpec({**overrides, i: (u, u + (v - u) * frac)}) if frac > 0 else None
    if shrunk is not None:
        assert box_measure(UNIT, shrunk) <= box_measure(UNIT, BoxSpec(overrides))


def test_empty_interval_rejected():
    with pytest.raises(ValueError):
        BoxSpec({1: (1, 1)})
    with pytest.raises(ValueError):
        BoxSpec({0: (0, 1)})
    with pytest.raises(ValueError):
        ParallelepipedSpec(a_prefix=(1,), b_prefix=(1,))


# -- admissibility ---------------------------------------------------------------------

def test_zero_tail_admissible():
    g = TranslationSpec(prefix=(5, -3, 100))
    assert admissible_translation(UNIT, g).status == ADMISSIBLE


def test_constant_half_not_admissible():
    g = TranslationSpec(tail=S.constant(0.5))
    assert admissible_translation(UNIT, g).status == NOT_ADMISSIBLE
    # oracle: partial sums of ln(1 - 1/2) are -k ln 2, unbounded
    assert math.fsum(math.log(0.5) for _ in range(1000)) < -600


def test_example_witness_admissible():
    g = example_witness(UNIT)
    assert admissible_translation(UNIT, g).status == ADMISSIBLE
    t = g.relative_tail(UNIT)
    for i in range(1, 30):
        assert t.term(i) == pytest.approx(1 - math.exp(-(2.0 ** -i)), rel=1e-15)
    # the log series is exactly -sum 2^-i
    assert math.fsum(math.log1p(-t.term(i)) for i in range(1, 60)) == pytest.approx(-1.0, rel=1e-12)


def test_witness_on_wide_constant_tail():
    delta = ParallelepipedSpec(a_prefix=(0, 0), b_prefix=(5, 7), a_tail=-3, b_tail=3)
    g = example_witness(delta)
    assert admissible_translation(delta, g).status == ADMISSIBLE
    assert g.relative_tail(delta).term(2) == pytest.approx(1 - math.exp(-7 / 4))


@pytest.mark.parametrize("p, status", [(0.5, NOT_ADMISSIBLE), (1.0, NOT_ADMISSIBLE),
                                       (1.5, ADMISSIBLE), (2.0, ADMISSIBLE)])
def test_power_law_tails(p, status):
    assert admissible_translation(UNIT, TranslationSpec(tail=S.power_law(0.5, p))).status == status


def test_tail_at_width_is_not_admissible():
    g = TranslationSpec(tail=S.constant(1.0))
    assert admissible_translation(UNIT, g).status == NOT_ADMISSIBLE


def test_absolute_tail_scale():
    delta = ParallelepipedSpec(b_tail=4)
    g = TranslationSpec(tail=S.constant(2.0), tail_scale="absolute")
    assert admissible_translation(delta, g).status == NOT_ADMISSIBLE
    g = TranslationSpec(tail=S.geometric(8.0, 0.5), tail_scale="absolute")
    assert admissible_translation(delta, g).status == ADMISSIBLE


def test_opaque_tail_undecided():
    g = TranslationSpec(tail=S.opaque([0.1, 0.2]))
    assert admissible_translation(UNIT, g).status == UNDECIDED


@settings(max_examples=80, deadline=None)
@given(st.lists(rational(-3, 3), max_size=6), st.sampled_from(
    [S.zero(), S.geometric(0.5, 0.5), S.power_law(0.3, 0.5), S.power_law(0.3, 2.0), S.constant(0.5)]))
def test_prefix_does_not_change_verdict(prefix, tail):
    bare = admissible_translation(UNIT, TranslationSpec(tail=tail)).status
    assert admissible_translation(UNIT, TranslationSpec(prefix=tuple(prefix), tail=tail)).status == bare


# -- translation and invariance --------------------------------------------------------

def test_translate_box_shift():
    moved = translate_box(BoxSpec({1: (0, F(1, 2))}), TranslationSpec(prefix=(F(1, 4),)), 1)
    assert moved.overrides == {1: (F(1, 4), F(3, 4))}


def test_translate_box_identity():
    assert translate_box(BoxSpec(), TranslationSpec(), 0) == BoxSpec()


def test_translate_box_nonzero_tail_rejected():
    with pytest.raises(BoxAlgebraError, match="not in box algebra"):
        translate_box(BoxSpec({1: (0, F(1, 2))}), TranslationSpec(tail=S.geometric(1, 0.5)), 1)


@pytest.mark.parametrize("box, g, value", [
    ({1: (0, F(1, 2))}, (F(1, 4),), F(1, 2)),
    ({1: (0, 2)}, (-5,), F(2)),
    ({1: (0, F(1, 3)), 3: (F(1, 2), 1)}, (F(7, 3), 0, F(-1, 9)), F(1, 6)),
])
def test_invariance_examples(box, g, value):
    rep = invariance_check(UNIT, BoxSpec(box), TranslationSpec(prefix=g))
    assert rep.measure == rep.translated_measure == value
    assert rep.difference == 0


@settings(max_examples=100, deadline=None)
@given(boxes(), st.lists(rational(-5, 5), max_size=8))
def test_invariance_random(overrides, g):
    delta = ParallelepipedSpec(a_prefix=(-1, 0, F(1, 3)), b_prefix=(1, 3, F(1, 2)))
    rep = invariance_check(delta, BoxSpec(overrides), TranslationSpec(prefix=tuple(g)))
    assert rep.difference == 0


def test_invariance_needs_zero_tail():
    with pytest.raises(BoxAlgebraError):
        invariance_check(UNIT, BoxSpec(), TranslationSpec(tail=S.constant(0.5)))


# -- parsing / formatting -------------------------------------------------------------

def test_exact_parsing():
    assert exact("1/3") == F(1, 3)
    assert exact(0.25) == F(1, 4)
    assert exact("-inf") == -math.inf
    with pytest.raises(ValueError):
        exact(math.nan)


def test_format_number():
    assert format_number(F(1, 4), True) == "1/4"
    assert format_number(F(1, 4), False) == "0.25"
    assert format_number(F(1, 3), False) == "0.333333333333333"
    assert format_number(F(3), True) == "3"
    assert format_number(math.inf, True) == "inf"


def test_json_constructors():
    d = delta_from_json({"a": ["0", "-1/2"], "b": [1, "1/2"]})
    assert d.width(2) == 1
    g = translation_from_json({"prefix": ["1/4"], "tail": {"kind": "zero-tail"}})
    assert g.value(1) == F(1, 4) and g.value(9) == 0
    with pytest.raises(ValueError):
        translation_from_json({"witness": True})
