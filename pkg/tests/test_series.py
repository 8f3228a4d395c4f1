import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsorelay.series import GeneralizedPowerSeries, from_terms, series_integer_power


def brute_power(terms, t):
    """Expand the t-fold product of a finite series by enumerating index tuples."""
    acc = {}
    for combo in itertools.product(terms, repeat=t):
        e = round(sum(x[0] for x in combo), 9)
        acc[e] = acc.get(e, 0.0) + math.prod(x[1] for x in combo)
    return acc


def test_binomial_square():
    s = from_terms([(0.0, 1.0), (1.0, 1.0)])
    sq = series_integer_power(s, 2)
    assert sq.terms == ((0.0, 1.0), (1.0, 2.0), (2.0, 1.0))


def test_zero_power_is_one_and_negative_power_rejected():
    s = from_terms([(0.5, 3.0)])
    assert series_integer_power(s, 0).terms == ((0.0, 1.0),)
    with pytest.raises(ValueError):
        series_integer_power(s, -1)


def test_equal_exponents_merge_in_constructor():
    s = GeneralizedPowerSeries(((0.3, 1.0), (0.1, 2.0), (0.3 + 1e-15, 0.5)))
    assert s.exponents == [0.1, 0.3]
    assert s.coefficients == [2.0, 1.5]
    with pytest.raises(ValueError):
        GeneralizedPowerSeries(((-0.5, 1.0),))


def test_fractional_exponents_against_brute_force():
    terms = [(0.5, 1.3), (0.7, -0.4), (1.2, 0.25)]
    got = series_integer_power(from_terms(terms), 3)
    want = brute_power(terms, 3)
    assert len(got) == len(want)
    for e, c in got.terms:
        assert c == pytest.approx(want[round(e, 9)], rel=1e-13)


def test_truncated_series_keeps_only_exact_terms():
    # 1 + x with unknown terms from x^2 on: the square is exact below x^2.
    s = GeneralizedPowerSeries(((0.0, 1.0), (1.0, 1.0)), horizon=2.0)
    sq = series_integer_power(s, 2)
    assert sq.horizon == 2.0
    assert sq.terms == ((0.0, 1.0), (1.0, 2.0))
    # With a leading power x^0.5, the missing tail enters only at 0.5 + 2.
    s = GeneralizedPowerSeries(((0.5, 1.0), (1.5, 1.0)), horizon=2.0)
    cube = series_integer_power(s, 3)
    assert cube.horizon == pytest.approx(3.0)
    assert cube.exponents == [1.5, 2.5]


def test_n_max_limits_term_count():
    s = from_terms([(0.0, 1.0), (0.3, 1.0), (0.7, 1.0)])
    r = series_integer_power(s, 4, n_max=5)
    assert len(r) == 5
    assert r.horizon == pytest.approx(series_integer_power(s, 4).exponents[5])


def test_evaluation_and_substitution():
    s = from_terms([(0.0, 2.0), (0.5, 1.0)])
    assert s(4.0) == pytest.approx(4.0)
    assert s(0.0) == 2.0
    assert s.map_exponents(2.0)(2.0) == pytest.approx(4.0)


term = st.tuples(st.floats(0.0, 3.0), st.floats(-2.0, 2.0))


@settings(max_examples=40, deadline=None)
@given(terms=st.lists(term, min_size=1, max_size=5), x=st.floats(0.01, 1.5),
       t=st.integers(0, 4))
def test_power_evaluates_to_power_of_value(terms, x, t):
    s = from_terms(terms)
    got = series_integer_power(s, t)(x)
    scale = sum(abs(c) * x ** e for e, c in terms) ** t
    assert got == pytest.approx(s(x) ** t, abs=1e-11 * max(1.0, scale))


@settings(max_examples=30, deadline=None)
@given(a=st.lists(term, min_size=1, max_size=4), b=st.lists(term, min_size=1, max_size=4),
       c=st.lists(term, min_size=1, max_size=4), x=st.floats(0.05, 1.2))
def test_product_is_associative(a, b, c, x):
    sa, sb, sc = from_terms(a), from_terms(b), from_terms(c)
    left = (sa * sb) * sc
    right = sa * (sb * sc)
    scale = max(1.0, sum(abs(k) for _, k in left.terms))
    assert left(x) == pytest.approx(right(x), abs=1e-12 * scale)
