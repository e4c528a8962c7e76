"""
Closed forms of the cubic oscillator as printed in the literature, rebuilt as
normal-ordered polynomials so that the solver output can be compared exactly.
"""
from fractions import Fraction
from typing import Dict

from algebra import EpsilonSeries, I, OperatorPoly, anticommutator
from services.classical import ClassicalHamiltonian, ClassicalKey
from services.hermitian_map import DimKey, DimensionfulOperator

x, p = OperatorPoly.x, OperatorPoly.p


def _m(mass) -> Fraction:
    return Fraction(mass)


def q1(mass=1) -> OperatorPoly:
    """-(1/M^4) [ (4/3) p^3 + M^2 {x^2, p} ]."""
    M = _m(mass)
    return (p(3).scale(Fraction(4, 3)) + anticommutator(x(2), p()).scale(M ** 2)).scale(-1 / M ** 4)


def q3(mass=1, uncorrected: bool = False) -> OperatorPoly:
    """(128/15M^10) p^5 + (40/3M^8) x p^3 x + (8/M^6) x^2 p x^2 - (32/M^8) p; ``uncorrected`` uses -8/M^8 for the last term."""
    M = _m(mass)
    last = Fraction(-8) if uncorrected else Fraction(-32)
    return (
        p(5).scale(Fraction(128, 15) / M ** 10)
        + (x() * p(3) * x()).scale(Fraction(40, 3) / M ** 8)
        + (x(2) * p() * x(2)).scale(8 / M ** 6)
        + p().scale(last / M ** 8)
    )


def q3_anticommutator_form(mass=1) -> OperatorPoly:
    """(4/M^10) [ (32/15) p^5 + (5/3) M^2 {x^2, p^3} + M^4 {x^4, p} + 2 M^2 p ]."""
    M = _m(mass)
    return (
        p(5).scale(Fraction(32, 15))
        + anticommutator(x(2), p(3)).scale(Fraction(5, 3) * M ** 2)
        + anticommutator(x(4), p()).scale(M ** 4)
        + p().scale(2 * M ** 2)
    ).scale(4 / M ** 10)


def commutator_identities(mass=1) -> Dict[str, OperatorPoly]:
    M = _m(mass)
    h1q1 = (anticommutator(x(2), p(2)) + x(4).scale(M ** 2) + OperatorPoly.scalar(Fraction(2, 3))).scale(6 / M ** 4)
    h1q3 = (
        anticommutator(x(2), p(4)).scale(16)
        + anticommutator(x(4), p(2)).scale(15 * M ** 2)
        + p(2).scale(64)
        + x(6).scale(6 * M ** 4)
        + x(2).scale(76 * M ** 2)
    ).scale(-4 / M ** 10)
    triple = (
        p(6).scale(8)
        - anticommutator(x(2), p(4)).scale(8 * M ** 2)
        + anticommutator(x(4), p(2)).scale(9 * M ** 4)
        - p(2).scale(68 * M ** 2)
        + x(6).scale(10 * M ** 6)
        + x(2).scale(28 * M ** 4)
    ).scale(-48 / M ** 12)
    return {"[H1,Q1]": h1q1, "[H1,Q3]": h1q3, "[[[H1,Q1],Q1],Q1]": triple}


def h2(mass=1) -> OperatorPoly:
    M = _m(mass)
    return (anticommutator(x(2), p(2)) + x(4).scale(M ** 2) + OperatorPoly.scalar(Fraction(2, 3))).scale(Fraction(3, 2) / M ** 4)


def h4(mass=1) -> OperatorPoly:
    M = _m(mass)
    return (
        p(6)
        - anticommutator(x(2), p(4)).scale(9 * M ** 2)
        - anticommutator(x(4), p(2)).scale(Fraction(51, 8) * M ** 4)
        - p(2).scale(Fraction(81, 2) * M ** 2)
        - x(6).scale(Fraction(7, 4) * M ** 6)
        - x(2).scale(Fraction(69, 2) * M ** 4)
    ).scale(2 / M ** 12)


def position_observable(mass=1) -> EpsilonSeries:
    M = _m(mass)
    first = (p(2) + x(2).scale(M ** 2 / 2)).scale(2 * I / M ** 4)
    second = (anticommutator(x(), p(2)) - x(3).scale(M ** 2)).scale(1 / M ** 6)
    return EpsilonSeries([x(), first, second])


def momentum_observable(mass=1) -> EpsilonSeries:
    M = _m(mass)
    first = anticommutator(x(), p()).scale(-I / M ** 2)
    second = (p(3).scale(2) - anticommutator(x(2), p()).scale(M ** 2 / 2)).scale(1 / M ** 6)
    return EpsilonSeries([p(), first, second])


def hbar_identities() -> Dict[str, OperatorPoly]:
    """The three ordering identities, each as (left side - right side) with hbar = 1; all must vanish."""
    return {
        "p x^2 p - {x^2,p^2}/2 = 1": p() * x(2) * p() - anticommutator(x(2), p(2)).scale(Fraction(1, 2)) - OperatorPoly.one(),
        "x^2 p^2 x^2 - {x^4,p^2}/2 = 4x^2": x(2) * p(2) * x(2) - anticommutator(x(4), p(2)).scale(Fraction(1, 2)) - x(2).scale(4),
        "p^2 x^2 p^2 - {x^2,p^4}/2 = 4p^2": p(2) * x(2) * p(2) - anticommutator(x(2), p(4)).scale(Fraction(1, 2)) - p(2).scale(4),
    }


def unscaled_h2() -> DimensionfulOperator:
    """(3/2 mu^4) ((1/m){x^2,p^2} + mu^2 x^4 + 2 hbar^2/3m) eps^2, normal-ordered with [x, p] = i hbar."""
    F = Fraction
    return DimensionfulOperator({
        DimKey(F(-1), -4, 2, 0, 2, 2): 3,
        DimKey(F(-1), -4, 2, 1, 1, 1): -6 * I,
        DimKey(F(-1), -4, 2, 2, 0, 0): -2,
        DimKey(F(0), -2, 2, 0, 4, 0): F(3, 2),
    })


def unscaled_hamiltonian() -> DimensionfulOperator:
    """p^2/2m + mu^2 x^2/2 + i eps x^3."""
    F = Fraction
    return DimensionfulOperator({
        DimKey(F(-1), 0, 0, 0, 0, 2): F(1, 2),
        DimKey(F(0), 2, 0, 0, 2, 0): F(1, 2),
        DimKey(F(0), 0, 1, 0, 3, 0): I,
    })


def classical_hamiltonian() -> ClassicalHamiltonian:
    """
    p^2/2m + mu^2 x^2/2 + (3/2mu^4)(2x^2p^2/m + mu^2 x^4) eps^2
      + (2/mu^12)(p^6/m^3 - 18mu^2 x^2p^4/m^2 - 51mu^4 x^4p^2/4m - 7mu^6 x^6/4) eps^4
    """
    F = Fraction
    K = ClassicalKey
    return ClassicalHamiltonian({
        K(F(-1), 0, 0, 0, 2): F(1, 2),
        K(F(0), 2, 0, 2, 0): F(1, 2),
        K(F(-1), -4, 2, 2, 2): F(3),
        K(F(0), -2, 2, 4, 0): F(3, 2),
        K(F(-3), -12, 4, 0, 6): F(2),
        K(F(-2), -10, 4, 2, 4): F(-36),
        K(F(-1), -8, 4, 4, 2): F(-51, 2),
        K(F(0), -6, 4, 6, 0): F(-7, 2),
    }, truncation=4)


def energy_coefficient(n: int) -> Fraction:
    """(30 n^2 + 30 n + 11) / 8."""
    return Fraction(30 * n * n + 30 * n + 11, 8)
