import math
from fractions import Fraction

import numpy as np
import pytest

from errors import ClassicalError
from services import goldens
from services.classical import (
    ClassicalHamiltonian,
    PhaseSpaceFunction,
    classical_hamiltonian,
    classical_limit,
    e_star,
    implicit_orbit,
    integrate_orbit,
    kinetic_correction,
    level_set_momentum,
    mass_profile,
    mass_profile_factor,
    turning_point,
)
from services.hermitian_map import DimensionfulOperator, DimKey
from services.metric_solver import ModelParams

F = Fraction


@pytest.fixture(scope="module")
def weak():
    return ModelParams(epsilon=0.1)


@pytest.fixture(scope="module")
def compiled(weak):
    return classical_hamiltonian(weak).compile(weak)


def test_classical_limit_matches_closed_form(weak):
    h_c = classical_hamiltonian(weak)
    assert h_c.terms == goldens.classical_hamiltonian().terms
    assert h_c.is_even_in_p()


def test_limit_drops_hbar_terms():
    h_c = classical_limit(goldens.unscaled_h2())
    assert set(h_c.terms) == {(F(-1), -4, 2, 2, 2), (F(0), -2, 2, 4, 0)}
    assert h_c.coefficient(m=-1, mu=-4, eps=2, x=2, p=2) == 3


def test_limit_rejects_negative_hbar():
    op = DimensionfulOperator({DimKey(F(0), 0, 0, -1, 2, 0): 1})
    with pytest.raises(ClassicalError):
        classical_limit(op)


def test_limit_rejects_imaginary_survivor():
    op = DimensionfulOperator({DimKey(F(0), 0, 1, 0, 3, 0): goldens.I})
    with pytest.raises(ClassicalError):
        classical_limit(op)


def test_harmonic_limit():
    h_c = classical_hamiltonian(ModelParams(epsilon=0.0), eps_order=0)
    assert h_c.terms == {(F(-1), 0, 0, 0, 2): F(1, 2), (F(0), 2, 0, 2, 0): F(1, 2)}


def test_mass_profile_matches_kinetic_term(weak):
    # 1/(2 M(x)) = (1 + 6 eps^2 x^2 / mu^4) / 2m, so the eps^2 x^2 p^2 coefficient is 3 / (m mu^4)
    h_c = classical_hamiltonian(weak)
    assert h_c.coefficient(m=-1, mu=-4, eps=2, x=2, p=2) == kinetic_correction()
    assert kinetic_correction(pre_erratum=True) == F(3, 2)
    for pre_erratum in (False, True):
        factor = mass_profile_factor(pre_erratum)
        assert kinetic_correction(pre_erratum) == factor / 2
        assert e_star(weak, pre_erratum) == pytest.approx(1 / (2 * float(factor) * 0.01))
    assert mass_profile(weak, 0.0) == 1.0
    assert mass_profile(weak, 1.0) == pytest.approx(1 / 1.06)
    assert mass_profile(ModelParams(epsilon=0.0), 5.0) == 1.0


@pytest.mark.parametrize(
    "params, expected",
    [
        (ModelParams(epsilon=0.1), 25 / 3),
        (ModelParams(mu=2.0, epsilon=1.0), 16 / 3),
    ],
)
def test_energy_bound(params, expected):
    assert e_star(params) == pytest.approx(expected, rel=1e-15)


def test_energy_bound_without_coupling():
    assert e_star(ModelParams(epsilon=0.0)) == math.inf
    assert e_star(ModelParams(epsilon=0.1), pre_erratum=True) == pytest.approx(50 / 3)


def test_implicit_orbit(weak):
    assert implicit_orbit(ModelParams(epsilon=0.0), 0.5, 0.0) == pytest.approx((1.0, -1.0))
    assert turning_point(weak, 1.0) == pytest.approx(1.3713, abs=1e-4)
    assert implicit_orbit(weak, 1.0, 1.5) == ()
    with pytest.raises(ClassicalError):
        implicit_orbit(weak, 0.0, 0.0)


def test_level_set_momentum(compiled):
    p = level_set_momentum(compiled, 1.0, 0.3)
    assert compiled(0.3, p) == pytest.approx(1.0, abs=1e-12)
    free = ModelParams(epsilon=0.0)
    assert level_set_momentum(classical_hamiltonian(free, eps_order=0).compile(free), 1.0, 3.0) is None


def test_level_set_ignores_open_branches(compiled):
    # past the well the eps^4 terms bend H_c back down through E
    assert level_set_momentum(compiled, 1.0, 5.0) is None
    assert level_set_momentum(compiled, 1.0, 8.0) is None
    assert level_set_momentum(compiled, 1.0, -5.0) is None
    inner = level_set_momentum(compiled, 1.0, 1.0)
    assert inner is not None
    assert compiled.gradient(1.0, inner)[1] > 0


def test_polynomial_parity(compiled):
    x, p = np.linspace(-1, 1, 7), np.linspace(-2, 2, 7)
    np.testing.assert_allclose(compiled(-x, -p), compiled(x, p), rtol=0, atol=1e-15)


def test_circle_closes():
    trace = integrate_orbit(ModelParams(epsilon=0.0), 0.5, steps=8000, stop_at_period=True)
    assert trace.closed
    assert trace.closure < 1e-6
    assert trace.period == pytest.approx(2 * math.pi, abs=1e-6)


@pytest.mark.parametrize("energy", [1.0, 5.0])
def test_orbits_close_and_conserve_energy(weak, compiled, energy):
    trace = integrate_orbit(weak, energy, steps=20000, h_c=compiled, stop_at_period=True)
    assert trace.closed
    assert trace.closure < 1e-6
    assert trace.max_drift < 1e-6
    assert not trace.drift_exceeded


def test_orbit_near_the_energy_bound_escapes(weak, compiled):
    # through eps^4 the level set at E = 8 is open
    assert e_star(weak) > 8.0
    with pytest.raises(ClassicalError, match="escapes to infinity"):
        integrate_orbit(weak, 8.0, steps=20000, h_c=compiled)


def test_runaway_flow_is_reported():
    runaway = PhaseSpaceFunction({(0, 2): 0.5, (4, 0): -1.0})
    with pytest.raises(ClassicalError, match="escapes to infinity"):
        integrate_orbit(ModelParams(), 1.0, dt=1e-2, steps=5000, h_c=runaway)


def test_coarse_step_sets_drift_flag(weak, compiled):
    trace = integrate_orbit(weak, 5.0, dt=0.2, steps=50, h_c=compiled, drift_bound=1e-12)
    assert trace.drift_exceeded
    assert trace.max_drift > 1e-12


def test_integrated_orbit_lies_on_second_order_level_set(weak):
    h2 = classical_hamiltonian(weak, eps_order=2).compile(weak)
    trace = integrate_orbit(weak, 1.0, h_c=h2, steps=8000, stop_at_period=True)
    for _, x, p, _ in trace.rows()[::500]:
        exact = level_set_momentum(h2, 1.0, x)
        assert abs(abs(p) - exact) < 1e-8
        if abs(x) <= 1.0:
            # the order-eps^2 ellipse drops O(eps^4) terms
            approx = implicit_orbit(weak, 1.0, x)
            assert abs(abs(p) - approx[0]) < 5e-3


def test_halving_the_step_reduces_drift(weak, compiled):
    coarse = integrate_orbit(weak, 5.0, dt=4e-2, steps=300, h_c=compiled)
    fine = integrate_orbit(weak, 5.0, dt=2e-2, steps=600, h_c=compiled)
    assert fine.max_drift < coarse.max_drift / 8


def test_start_outside_orbit(weak, compiled):
    with pytest.raises(ClassicalError, match="start point outside orbit"):
        integrate_orbit(weak, 1.0, x0=5.0, h_c=compiled)


def test_phase_space_gradient():
    h = PhaseSpaceFunction({(0, 2): 0.5, (2, 0): 0.5, (2, 2): 3.0})
    assert h.gradient(1.0, 2.0) == pytest.approx((1.0 + 24.0, 2.0 + 12.0))
    np.testing.assert_allclose(h.momentum_polynomial(1.0), [3.5, 0.0, 0.5])


def test_truncation_keeps_lower_orders():
    full = goldens.classical_hamiltonian()
    assert isinstance(full.truncate(2), ClassicalHamiltonian)
    assert all(key.eps <= 2 for key in full.truncate(2).terms)
    assert full.truncate(2).truncation == 2
