import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pointdist.coef import PI, Coef, as_coef, as_fraction, parse_coef

fractions = st.fractions(min_value=-100, max_value=100, max_denominator=50)
coefs = st.dictionaries(st.integers(-3, 3), fractions, max_size=4).map(Coef)


@given(coefs)
def test_str_parse_round_trip(c):
    assert parse_coef(str(c)) == c


@given(coefs, coefs, coefs)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a - a == Coef()


@given(coefs, coefs)
def test_float_is_a_homomorphism(a, b):
    assert float(a * b) == pytest.approx(float(a) * float(b), rel=1e-12, abs=1e-9)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("3/4", Coef({0: Fraction(3, 4)})),
        ("-1/(2*pi)", Coef({-1: Fraction(-1, 2)})),
        ("0.25*pi**-1", Coef({-1: Fraction(1, 4)})),
        ("2*pi^-2 - 3/4", Coef({-2: 2, 0: Fraction(-3, 4)})),
        ("pi", PI),
    ],
)
def test_parse_examples(text, expected):
    assert parse_coef(text) == expected


def test_floats_convert_through_their_repr():
    assert as_fraction(0.49) == Fraction(49, 100)
    assert as_coef(0.1) == Coef({0: Fraction(1, 10)})


def test_pi_power_value():
    assert float(Coef.pi_power(-1, 3)) == pytest.approx(3 / math.pi)


def test_zero_is_falsy_and_equal_to_zero():
    assert not Coef()
    assert Coef() == 0
    assert Coef({2: 0}) == Coef()


@pytest.mark.parametrize("bad", ["pi^x", "foo", ""])
def test_parse_errors(bad):
    with pytest.raises(ValueError):
        parse_coef(bad)


def test_division_by_non_monomial_rejected():
    with pytest.raises(ZeroDivisionError):
        parse_coef("1/0")
    with pytest.raises(ZeroDivisionError):
        Coef({0: 1}) / (PI + 1)


@pytest.mark.parametrize("bad", [True, float("nan"), float("inf"), object()])
def test_as_fraction_rejects(bad):
    with pytest.raises((TypeError, ValueError)):
        as_fraction(bad)
