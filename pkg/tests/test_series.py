import pytest

from algebra import EpsilonSeries, I, OperatorPoly, SymmetryKind, bch_conjugate, bch_terms
from errors import AlgebraError

x, p = OperatorPoly.x, OperatorPoly.p


def test_product_truncates():
    a = EpsilonSeries([OperatorPoly.one(), x()], order=2)
    square = a * a
    assert square.order == 2
    assert square[0] == OperatorPoly.one()
    assert square[1] == x().scale(2)
    assert square[2] == x(2)
    assert (a ** 3)[2] == x(2).scale(3)


def test_addition_takes_common_order():
    a = EpsilonSeries([x(), p(), x(2)])
    b = EpsilonSeries([p()], order=1)
    assert (a + b).order == 1
    with pytest.raises(AlgebraError):
        (a + b)[2]


def test_translation_by_momentum():
    # e^{-A} x e^{A} with A = -i t p gives x + t
    generator = EpsilonSeries([OperatorPoly.zero(), p().scale(-I)], order=2)
    shifted = bch_conjugate(x(), generator, depth=2)
    assert shifted[0] == x()
    assert shifted[1] == OperatorPoly.one()
    assert shifted[2].is_zero()


def test_bch_term_weights():
    generator = EpsilonSeries([OperatorPoly.zero(), p()], order=3)
    terms = bch_terms(x(3), generator, depth=3)
    # [x^3, p] = 3i x^2, [[x^3, p], p]/2 = -3 x, [[[x^3, p], p], p]/6 = -i
    assert terms[1][1] == OperatorPoly.monomial(3 * I, 2, 0)
    assert terms[2][2] == x().scale(-3)
    assert terms[3][3] == OperatorPoly.scalar(-I)


def test_generator_must_start_at_first_order():
    with pytest.raises(AlgebraError):
        bch_terms(x(), EpsilonSeries([p()]), depth=1)
    with pytest.raises(AlgebraError):
        bch_terms(x(), EpsilonSeries([OperatorPoly.zero(), p()]), depth=0)


def test_symmetry_kinds():
    assert SymmetryKind.PARITY.sign(1, 0) == -1
    assert SymmetryKind.PARITY.sign(1, 1) == 1
    assert SymmetryKind.TIME_REVERSAL.sign(0, 3) == -1
    assert SymmetryKind.PT.sign(3, 0) == -1
    assert not SymmetryKind.PARITY.antilinear
    assert SymmetryKind.PT.antilinear
