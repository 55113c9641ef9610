import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pml.series import SeriesDescriptor as S
from pml.series import series_from_json


@pytest.mark.parametrize("desc, summable", [
    (S.zero(), True),
    (S.constant(0.0), True),
    (S.constant(0.5), False),
    (S.geometric(3.0, 0.5), True),
    (S.geometric(1.0, 0.0), True),
    (S.power_law(1.0, 0.5), False),
    (S.power_law(1.0, 1.0), False),
    (S.power_law(2.0, 1.5), True),
    (S.power_law(0.0, 0.5), True),
    (S.one_minus_exp(S.geometric(1.0, 0.5)), True),
    (S.one_minus_exp(S.power_law(1.0, 1.0)), False),
    (S.with_prefix([5.0, 7.0], S.power_law(1.0, 2.0)), True),
    (S.with_prefix([0.0], S.constant(1.0)), False),
    (S.opaque([1.0, 2.0]), None),
])
def test_summability_catalogue(desc, summable):
    assert desc.summable() is summable


def test_terms_use_absolute_indexing():
    d = S.with_prefix([10.0, 20.0], S.geometric(1.0, 0.5))
    assert d.terms(4) == [10.0, 20.0, 0.125, 0.0625]


def test_opaque_has_no_tail_terms():
    d = S.opaque([1.0])
    assert d.term(1) == 1.0
    with pytest.raises(LookupError):
        d.term(2)


@pytest.mark.parametrize("desc", [
    S.geometric(2.0, 0.3),
    S.power_law(1.5, 2.0),
    S.power_law(1.0, 1.2),
    S.with_prefix([0.5, 0.25, 4.0], S.geometric(1.0, 0.5)),
    S.with_prefix([1.0], S.power_law(1.0, 3.0)),
])
@pytest.mark.parametrize("m", [0, 1, 3, 10])
def test_tail_sum_against_brute_force(desc, m):
    # brute force to N terms plus a bound on the remainder
    n = 200_000 if desc.kind in ("power-law", "explicit-prefix") else 400
    partial = math.fsum(desc.term(i) for i in range(m + 1, n + 1))
    rest = desc.tail_sum(n)
    assert desc.tail_sum(m) == pytest.approx(partial + rest, rel=1e-12)


@pytest.mark.parametrize("p, m, expected", [
    (2.0, 0, math.pi ** 2 / 6),
    (2.0, 1, math.pi ** 2 / 6 - 1),
    (4.0, 0, math.pi ** 4 / 90),
    (4.0, 2, math.pi ** 4 / 90 - 1 - 1 / 16),
])
def test_power_law_tail_closed_forms(p, m, expected):
    assert S.power_law(1.0, p).tail_sum(m) == pytest.approx(expected, rel=1e-14)


def test_tail_sum_divergent_and_unsupported():
    assert S.power_law(1.0, 1.0).tail_sum(5) == math.inf
    assert S.constant(0.1).tail_sum(0) == math.inf
    with pytest.raises(NotImplementedError):
        S.one_minus_exp(S.geometric(1.0, 0.5)).tail_sum(0)
    with pytest.raises(NotImplementedError):
        S.opaque([1.0]).tail_sum(0)


def test_limsup_and_positivity():
    assert S.constant(0.5).limsup() == 0.5
    assert S.power_law(3.0, 0.1).limsup() == 0.0
    assert S.one_minus_exp(S.constant(math.log(2))).limsup() == pytest.approx(0.5)
    assert S.opaque().limsup() is None
    assert S.geometric(1.0, 0.5).is_positive() is True
    assert S.zero().is_positive() is False
    assert S.with_prefix([1.0, 0.0], S.geometric(1.0, 0.5)).is_positive() is False
    assert S.opaque([1.0]).is_positive() is None


@pytest.mark.parametrize("kwargs", [
    {"kind": "geometric", "c": 1.0, "q": 1.0},
    {"kind": "power-law", "c": 1.0, "p": 0.0},
    {"kind": "constant", "c": -1.0},
    {"kind": "mystery"},
    {"kind": "explicit-prefix", "prefix": (1.0,)},
    {"kind": "explicit-prefix", "prefix": (-1.0,), "tail": S.zero()},
])
def test_invalid_descriptors(kwargs):
    with pytest.raises(ValueError):
        S(**kwargs)


@settings(max_examples=80, deadline=None)
@given(st.floats(0.0, 10.0), st.floats(0.0, 0.99), st.floats(0.1, 4.0),
       st.lists(st.floats(0.0, 5.0), max_size=5))
def test_scaling_and_squaring_preserve_terms(c, q, p, prefix):
    for d in (S.geometric(c, q), S.power_law(c, p), S.with_prefix(prefix, S.power_law(c, p))):
        for i in (1, 2, 7):
            assert d.scaled(2.5).term(i) == pytest.approx(2.5 * d.term(i), rel=1e-12, abs=1e-300)
            assert d.squared().term(i) == pytest.approx(d.term(i) ** 2, rel=1e-12, abs=1e-300)
        # squaring never turns a summable series into a divergent one
        if d.summable():
            assert d.squared().summable()


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.0, 3.0), max_size=6), st.sampled_from(
    [S.zero(), S.geometric(1.0, 0.5), S.power_law(1.0, 0.5), S.power_law(1.0, 2.0), S.constant(2.0)]))
def test_prefix_never_changes_summability(prefix, tail):
    assert S.with_prefix(prefix, tail).summable() == tail.summable()


@pytest.mark.parametrize("desc", [
    S.zero(), S.constant(0.5), S.geometric(2.0, 0.25), S.power_law(1.0, 1.5),
    S.one_minus_exp(S.geometric(1.0, 0.5)), S.with_prefix([1.0, 2.0], S.power_law(1.0, 2.0)),
    S.opaque([0.5]),
])
def test_json_roundtrip(desc):
    assert series_from_json(desc.to_json()) == desc


@pytest.mark.parametrize("spec", [
    {"kind": "opaque", "terms": [0.1]},
    {"kind": "geometric", "q": 0.5, "ratio": 0.5},
    {"kind": "zero-tail", "c": 0},
])
def test_json_unknown_keys_rejected(spec):
    with pytest.raises(ValueError, match="unexpected keys"):
        series_from_json(spec)
