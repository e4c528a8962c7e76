from fractions import Fraction

import pytest

from algebra import I, OperatorPoly, SymmetryKind, is_hermitian, symmetry_transform
from errors import DimensionalError, HermitianMapError
from services import goldens
from services.hermitian_map import (
    DimensionfulOperator,
    DimKey,
    QuantityKind,
    canonical_residual,
    hermitian_equivalent,
    infer_mass_powers,
    level_shift,
    manifest_hamiltonian,
    observable_pair,
    perturbative_energy,
    pseudo_observable,
    symmetry_of,
    unscale,
)
from services.metric_solver import ModelParams, hamiltonian_series, solve_metric

OTHER_MASS = Fraction(3, 2)


def test_odd_orders_vanish(metric5):
    expansion = hermitian_equivalent(metric5)
    assert expansion.series.order == 6
    for k in (1, 3, 5):
        assert expansion.h(k).is_zero()
    for k in (0, 2, 4, 6):
        assert is_hermitian(expansion.h(k))


def test_second_and_fourth_order(metric3, metric3_other):
    for sol, mass in ((metric3, 1), (metric3_other, OTHER_MASS)):
        expansion = hermitian_equivalent(sol)
        assert expansion.h(2) == goldens.h2(mass)
        assert expansion.h(4) == goldens.h4(mass)


def test_normal_ordered_h2(metric3):
    x, p = OperatorPoly.x, OperatorPoly.p
    expected = (x(2) * p(2)).scale(3) + (x() * p()).scale(-6 * I) + OperatorPoly.scalar(-2) + x(4).scale(Fraction(3, 2))
    assert hermitian_equivalent(metric3).h(2) == expected


def test_commutator_identities(metric3, metric3_other):
    for sol, mass in ((metric3, 1), (metric3_other, OTHER_MASS)):
        identities = hermitian_equivalent(sol).identities
        for name, expected in goldens.commutator_identities(mass).items():
            assert identities[name] == expected, name


def test_order_beyond_solution(metric3):
    with pytest.raises(HermitianMapError):
        hermitian_equivalent(metric3, order=5)
    with pytest.raises(HermitianMapError):
        pseudo_observable(OperatorPoly.x(), metric3, order=5)


def test_observables_through_second_order(metric3_other):
    pair = observable_pair(metric3_other, order=2)
    assert pair.X == goldens.position_observable(OTHER_MASS)
    assert pair.P == goldens.momentum_observable(OTHER_MASS)
    assert all(c.is_zero() for c in canonical_residual(pair))
    assert symmetry_of(pair.X, SymmetryKind.PT) == -pair.X
    assert symmetry_of(pair.P, SymmetryKind.PT) == pair.P
    # X is not parity-odd beyond zeroth order
    assert symmetry_transform(pair.X[1], SymmetryKind.PARITY) != -pair.X[1]


def test_canonical_pair_through_fourth_order(metric3):
    pair = observable_pair(metric3, order=4)
    assert all(c.is_zero() for c in canonical_residual(pair))


def test_manifest_round_trip(metric3):
    expansion = hermitian_equivalent(metric3)
    pair = observable_pair(metric3, order=4)
    assert manifest_hamiltonian(expansion, pair) == hamiltonian_series(Fraction(1), 4)


@pytest.mark.parametrize("n", range(6))
def test_level_shift_from_matrix_elements(n):
    params = ModelParams(epsilon=0.05)
    assert perturbative_energy(n, params, numeric=True) == pytest.approx(perturbative_energy(n, params), rel=1e-12)
    assert level_shift(n, OTHER_MASS) == goldens.energy_coefficient(n) / OTHER_MASS ** 4


def test_negative_level():
    with pytest.raises(HermitianMapError):
        perturbative_energy(-1, ModelParams())


def test_unscaled_second_order(metric3):
    h_dim = unscale(hermitian_equivalent(metric3).series, ModelParams(), mass=Fraction(1))
    assert h_dim.restrict(2) == goldens.unscaled_h2()
    assert h_dim.restrict(0) == goldens.unscaled_hamiltonian().restrict(0)
    assert h_dim.coefficient(m=-1, mu=-4, eps=2, x=2, p=2) == 3


def test_unscale_is_independent_of_length_scale(metric3):
    reference = unscale(hermitian_equivalent(metric3).series, ModelParams(), mass=Fraction(1))
    params = ModelParams(ell=2.0, m=1.0, mu=1.0)
    rescaled = hermitian_equivalent(solve_metric(3, params.mass_fraction()))
    assert unscale(rescaled.series, params) == reference


def test_inferred_mass_powers(metric3, metric3_other):
    first = hermitian_equivalent(metric3).series
    second = hermitian_equivalent(metric3_other).series
    powers = infer_mass_powers(first, second, Fraction(1), OTHER_MASS)
    assert powers[(2, 2, 2)] == -4
    assert powers[(2, 4, 0)] == -2
    assert powers[(0, 0, 2)] == 0
    inferred = unscale(first, ModelParams(), mass_powers=powers, mass=Fraction(1))
    assert inferred == unscale(first, ModelParams(), mass=Fraction(1))


def test_inference_needs_distinct_masses(metric3):
    series = hermitian_equivalent(metric3).series
    with pytest.raises(HermitianMapError):
        infer_mass_powers(series, series, Fraction(1), Fraction(1))


def test_dimensional_mismatch():
    # x p^2 is not an energy at zeroth order in eps
    with pytest.raises(DimensionalError):
        unscale(OperatorPoly.monomial(1, 1, 2), ModelParams(), QuantityKind.ENERGY, mass=Fraction(1))


def test_unscaled_position_observable(metric3):
    pair = observable_pair(metric3, order=2)
    x_dim = unscale(pair.X, ModelParams(), QuantityKind.POSITION, mass=Fraction(1))
    assert x_dim.coefficient(x=1) == 1
    # (2i / m mu^4) p^2 eps
    assert x_dim.coefficient(m=-1, mu=-4, eps=1, x=0, p=2) == 2 * I


def test_dimensionful_json():
    op = DimensionfulOperator({DimKey(Fraction(-1), 0, 2, 0, 2, 2): 3, DimKey(Fraction(1, 2), -3, 1, 0, 0, 2): 2 * I})
    payload = op.to_json()
    assert payload["terms"][0] == {"m": "1/2", "mu": -3, "eps": 1, "hbar": 0, "x": 0, "p": 2, "coef": "0/1", "coef_im": "2/1"}
    assert payload["terms"][1] == {"m": -1, "mu": 0, "eps": 2, "hbar": 0, "x": 2, "p": 2, "coef": "3/1", "coef_im": "0/1"}
    assert DimensionfulOperator.from_json(payload) == op


def test_evaluate_at_physical_constants():
    h_dim = goldens.unscaled_hamiltonian()
    values = h_dim.evaluate(ModelParams(m=2.0, mu=3.0, epsilon=0.5))
    assert values[(0, 2)] == pytest.approx(0.25)
    assert values[(2, 0)] == pytest.approx(4.5)
    assert values[(3, 0)] == pytest.approx(0.5j)
