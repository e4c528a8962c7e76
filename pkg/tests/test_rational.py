from fractions import Fraction

import pytest

from algebra import I, ONE, ZERO, GaussianRational, format_fraction
from algebra.rational import i_power
from errors import AlgebraError


def test_arithmetic_is_exact():
    a = GaussianRational(Fraction(1, 3), Fraction(1, 2))
    b = GaussianRational(2, -1)
    assert a + b == GaussianRational(Fraction(7, 3), Fraction(-1, 2))
    assert a * b == GaussianRational(Fraction(2, 3) + Fraction(1, 2), Fraction(-1, 3) + 1)
    assert (a / b) * b == a


def test_i_squared_is_minus_one():
    assert I * I == -ONE
    assert [i_power(k) for k in range(5)] == [ONE, I, -ONE, -I, ONE]


def test_powers_and_conjugate():
    z = GaussianRational(1, 1)
    assert z ** 2 == GaussianRational(0, 2)
    assert z ** -1 == GaussianRational(Fraction(1, 2), Fraction(-1, 2))
    assert z.conjugate() == GaussianRational(1, -1)
    assert not ZERO
    assert GaussianRational(3) == 3


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        ONE / ZERO


def test_floats_are_rejected():
    with pytest.raises(AlgebraError):
        GaussianRational(0.5)


def test_json_format():
    assert format_fraction(Fraction(3)) == "3/1"
    assert GaussianRational(Fraction(-2, 3), 1).to_json() == {"re": "-2/3", "im": "1/1"}
    assert GaussianRational.parse("-2/3", "1/1") == GaussianRational(Fraction(-2, 3), 1)
