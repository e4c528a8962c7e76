import math

import numpy as np
import pytest

from errors import DensityError
from services.density import (
    GaussianState,
    cauchy_apply,
    default_grid,
    differential_form,
    physical_wavefunction,
    probability_density,
    q1_operator,
    q3_operator,
)
from services.hermitian_map import QuantityKind, unscale
from services.metric_solver import ModelParams, solve_metric


def test_ground_state_action_of_q1():
    # Q1 e^{-x^2/2} = -2i (x + x^3/3) e^{-x^2/2}
    image = GaussianState.ground().apply(q1_operator(ModelParams()))
    np.testing.assert_allclose(image.poly.coef, [0, -2j, 0, -2j / 3], atol=1e-15)


def test_derivative_of_gaussian():
    d = GaussianState.first().derivative()
    # d/dx x e^{-x^2/2} = (1 - x^2) e^{-x^2/2}
    np.testing.assert_allclose(d.poly.coef, [1, 0, -1])
    assert GaussianState.ground().norm_squared() == pytest.approx(math.sqrt(math.pi))


@pytest.mark.parametrize("params", [ModelParams(), ModelParams(m=4.0, mu=1.5, hbar=0.5)])
def test_printed_operators_match_solver(params):
    sol = solve_metric(3, params.mass_fraction())
    q_dim = unscale(sol.series(), params, QuantityKind.DIMENSIONLESS)
    for eps_order, printed in ((1, q1_operator(params)), (3, q3_operator(params))):
        derived = differential_form(q_dim, params, eps_order)
        assert set(derived) == set(printed)
        for key, value in printed.items():
            assert derived[key] == pytest.approx(value, rel=1e-12)


def test_free_densities_are_analytic():
    grid = default_grid()
    free = ModelParams(epsilon=0.0)
    ground = probability_density(GaussianState.ground(), free, grid=grid)
    np.testing.assert_allclose(ground.rho, np.exp(-grid ** 2) / math.sqrt(math.pi), rtol=0, atol=1e-12)
    first = probability_density(GaussianState.first(), free, grid=grid)
    np.testing.assert_allclose(first.rho, 2 * grid ** 2 * np.exp(-grid ** 2) / math.sqrt(math.pi), rtol=0, atol=1e-12)


@pytest.mark.parametrize("eps", [0.1, 0.2])
@pytest.mark.parametrize("state", [GaussianState.ground(), GaussianState.first()])
def test_density_is_normalized(eps, state):
    curve = probability_density(state, ModelParams(epsilon=eps))
    assert np.all(curve.rho >= 0)
    for name, value in curve.normalization_checks().items():
        assert value == pytest.approx(1.0, abs=1e-6), name


@pytest.mark.parametrize("state", [GaussianState.ground(), GaussianState.first()])
def test_density_is_symmetric(state):
    grid = np.linspace(-3, 3, 61)
    curve = probability_density(state, ModelParams(epsilon=0.2), grid=grid)
    np.testing.assert_allclose(curve.rho, curve.rho[::-1], rtol=1e-12, atol=1e-15)


def test_coupling_deforms_the_ground_density():
    grid = default_grid()
    free = probability_density(GaussianState.ground(), ModelParams(epsilon=0.0), grid=grid)
    coupled = probability_density(GaussianState.ground(), ModelParams(epsilon=0.2), grid=grid)
    assert np.max(np.abs(free.rho - coupled.rho)) > 1e-3


@pytest.mark.parametrize("eps", [0.1, 0.2])
def test_contour_oracle_agrees(eps):
    params = ModelParams(epsilon=eps)
    grid = default_grid()
    for state in (GaussianState.ground(), GaussianState.first()):
        for op in (q1_operator(params), q3_operator(params)):
            exact = state.apply(op)(grid)
            oracle = cauchy_apply(op, state, grid)
            assert np.max(np.abs(exact - oracle)) < 1e-8


def test_wavefunction_orders():
    params = ModelParams(epsilon=0.1)
    state = GaussianState.ground()
    assert physical_wavefunction(state, params, order=0) is state
    first = physical_wavefunction(state, params, order=1)
    # -eps/2 Q1 psi
    np.testing.assert_allclose(first.poly.coef, [1, 0.1j, 0, 0.1j / 3], atol=1e-15)
    with pytest.raises(DensityError):
        physical_wavefunction(state, params, order=4)


def test_norm_quadratures_agree():
    psi = physical_wavefunction(GaussianState.first(), ModelParams(epsilon=0.2))
    assert psi.norm_squared_quad() == pytest.approx(psi.norm_squared(), rel=1e-9)
    assert psi.norm_squared_hermite() == pytest.approx(psi.norm_squared(), rel=1e-12)


def test_invalid_inputs():
    with pytest.raises(DensityError):
        GaussianState([1.0], alpha=0.0)
    with pytest.raises(DensityError):
        GaussianState.named("second")
    with pytest.raises(DensityError):
        probability_density(GaussianState.ground(), ModelParams(), grid=[0.0])
    with pytest.raises(DensityError):
        probability_density(GaussianState.ground(), ModelParams(), grid=[1.0, 0.0, 2.0])
    with pytest.raises(DensityError):
        GaussianState.ground() + GaussianState([1.0], alpha=1.0)
