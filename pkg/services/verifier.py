"""
The verification suite: closed forms from the literature plus the structural
properties every computed object must satisfy.
"""
import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Sequence, Tuple

import numpy as np

from algebra import SymmetryKind, symmetry_transform
from errors import ClassicalError, PTCubicError, VerificationError
from services import goldens
from services.classical import (
    classical_hamiltonian,
    e_star,
    integrate_orbit,
    kinetic_correction,
)
from services.density import (
    GaussianState,
    cauchy_apply,
    default_grid,
    probability_density,
    q1_operator,
    q3_operator,
)
from services.hermitian_map import (
    canonical_residual,
    hermitian_equivalent,
    infer_mass_powers,
    level_shift,
    manifest_hamiltonian,
    observable_pair,
    symmetry_of,
    unscale,
)
from services.metric_solver import (
    ModelParams,
    hamiltonian_series,
    rhs_for_order,
    series_rhs,
    solve_metric,
    verify_metric,
)
from services.spectral_oracle import expectation_values, spectrum_report

logger = logging.getLogger(__name__)

UNIT = Fraction(1)
OTHER_MASS = Fraction(3, 2)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0


@dataclass
class VerificationSummary:
    results: List[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> List[CheckResult]:
        return [r for r in self.results if not r.passed]

    def lines(self) -> List[str]:
        return [f"{'PASS' if r.passed else 'FAIL'} {r.name} ({r.seconds:.2f}s){': ' + r.detail if r.detail else ''}" for r in self.results]

    def raise_for_failures(self) -> None:
        if self.failures:
            names = ", ".join(r.name for r in self.failures)
            raise VerificationError(f"{len(self.failures)} check(s) failed: {names}", failures=self.failures)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise AssertionError(message)


def check_metric_goldens() -> None:
    for mass in (UNIT, OTHER_MASS):
        sol = solve_metric(3, mass)
        _require(sol.q(1) == goldens.q1(mass), f"Q1 differs at M = {mass}")
        _require(sol.q(3) == goldens.q3(mass), f"Q3 differs at M = {mass}")
        _require(goldens.q3(mass) == goldens.q3_anticommutator_form(mass), f"Q3 forms disagree at M = {mass}")


def check_metric_properties() -> None:
    report = verify_metric(solve_metric(5, UNIT))
    report.raise_for_failures()


def check_general_rhs() -> None:
    sol = solve_metric(5, UNIT)
    for i in range(3):
        _require(series_rhs(2 * i + 1, sol, UNIT) == rhs_for_order(i, sol, UNIT), f"generic right side differs at order {2 * i + 1}")


def check_uncorrected_q3_rejected() -> None:
    sol = solve_metric(3, UNIT).with_term(3, goldens.q3(UNIT, uncorrected=True))
    report = verify_metric(sol)
    _require(any(c.order == 3 and c.name == "residual" for c in report.failures), "uncorrected Q3 was not rejected")


def check_commutator_identities() -> None:
    for mass in (UNIT, OTHER_MASS):
        expansion = hermitian_equivalent(solve_metric(3, mass))
        for name, expected in goldens.commutator_identities(mass).items():
            _require(expansion.identities[name] == expected, f"{name} differs at M = {mass}")


def check_hermitian_series() -> None:
    expansion = hermitian_equivalent(solve_metric(5, UNIT))
    for k in (1, 3, 5):
        _require(expansion.h(k).is_zero(), f"h{k} does not vanish")
    for mass in (UNIT, OTHER_MASS):
        expansion = hermitian_equivalent(solve_metric(3, mass))
        _require(expansion.h(2) == goldens.h2(mass), f"h2 differs at M = {mass}")
        _require(expansion.h(4) == goldens.h4(mass), f"h4 differs at M = {mass}")


def check_ordering_identities() -> None:
    for name, residual in goldens.hbar_identities().items():
        _require(residual.is_zero(), f"{name} fails")


def check_energy_formula() -> None:
    for mass in (UNIT, OTHER_MASS):
        h2 = hermitian_equivalent(solve_metric(1, mass)).h(2)
        diagonal = expectation_values(h2, mass, 6)
        for n in range(6):
            expected = float(level_shift(n, mass))
            _require(abs(diagonal[n].real - expected) <= 1e-12 * expected, f"<{n}|h2|{n}> = {diagonal[n]} at M = {mass}")


def check_spectrum() -> None:
    report = spectrum_report(ModelParams(epsilon=0.05), N=80, levels=5)
    _require(report.max_imag < 1e-8, f"max |Im| = {report.max_imag:.3e}")
    _require(all(e.real > 0 for e in report.lowest), "non-positive eigenvalue")
    _require(report.deviations[0] < 2e-4, f"level 0 deviates by {report.deviations[0]:.3e}")
    _require(all(np.diff(report.deviations) >= 0), "deviation from the eps^2 formula does not grow with n")
    _require(report.hermitian_gap[0] < 1e-5, f"H and h ground levels differ by {report.hermitian_gap[0]:.3e}")
    report = spectrum_report(ModelParams(epsilon=0.1), N=80, levels=1, include_hermitian=False)
    _require(abs(report.lowest[0].real - 0.51375) < 5e-3, f"E0 = {report.lowest[0]}")


def check_observables() -> None:
    for mass in (UNIT, OTHER_MASS):
        pair = observable_pair(solve_metric(1, mass), order=2)
        _require(pair.X == goldens.position_observable(mass), f"X differs at M = {mass}")
        _require(pair.P == goldens.momentum_observable(mass), f"P differs at M = {mass}")
        _require(all(c.is_zero() for c in canonical_residual(pair)), "[X, P] != i")
        _require(symmetry_of(pair.X, SymmetryKind.PT) == -pair.X, "PT(X) != -X")
        _require(symmetry_of(pair.P, SymmetryKind.PT) == pair.P, "PT(P) != P")
        _require(symmetry_transform(pair.X[1], SymmetryKind.PARITY) != -pair.X[1], "Parity(X) = -X at eps^1")


def check_round_trip() -> None:
    sol = solve_metric(3, UNIT)
    expansion = hermitian_equivalent(sol)
    pair = observable_pair(sol, order=4)
    _require(manifest_hamiltonian(expansion, pair) == hamiltonian_series(UNIT, 4), "h(X, P) != H through eps^4")


def check_unscaling() -> None:
    params = ModelParams()
    expansion = hermitian_equivalent(solve_metric(3, UNIT))
    h_dim = unscale(expansion.series, params, mass=UNIT)
    _require(h_dim.restrict(2) == goldens.unscaled_h2(), "unscaled h2 differs")
    _require(h_dim.restrict(0) == goldens.unscaled_hamiltonian().restrict(0), "unscaled h0 differs")

    doubled = ModelParams(ell=2.0)
    mass = doubled.mass_fraction()
    _require(unscale(hermitian_equivalent(solve_metric(3, mass)).series, doubled) == h_dim, "result depends on ell")

    other = hermitian_equivalent(solve_metric(3, OTHER_MASS)).series
    powers = infer_mass_powers(expansion.series, other, UNIT, OTHER_MASS)
    _require(unscale(expansion.series, params, mass_powers=powers, mass=UNIT) == h_dim, "inferred M powers differ")


def check_classical() -> None:
    params = ModelParams()
    h_c = classical_hamiltonian(params)
    _require(h_c.terms == goldens.classical_hamiltonian().terms, "classical Hamiltonian differs")
    _require(h_c.coefficient(m=-1, mu=-4, eps=2, x=2, p=2) == kinetic_correction(), "x^2 p^2 coefficient differs from the mass profile")
    _require(math.isclose(e_star(params), 25 / 3, rel_tol=1e-15), f"E* = {e_star(params)}")


def check_orbits() -> None:
    circle = integrate_orbit(ModelParams(epsilon=0.0), 0.5, steps=8000, stop_at_period=True)
    _require(circle.closed and circle.closure < 1e-6, f"circle closure {circle.closure}")
    _require(abs(circle.period - 2 * math.pi) < 1e-6, f"circle period {circle.period}")
    params = ModelParams(epsilon=0.1)
    compiled = classical_hamiltonian(params).compile(params)
    for energy in (1.0, 5.0):
        trace = integrate_orbit(params, energy, steps=20000, h_c=compiled, stop_at_period=True)
        _require(trace.closed, f"E = {energy} did not close")
        _require(trace.max_drift < 1e-6, f"E = {energy} drift {trace.max_drift:.3e}")
        _require(trace.closure < 1e-6, f"E = {energy} closure {trace.closure:.3e}")
    try:
        integrate_orbit(params, 8.0, steps=20000, h_c=compiled)
    except ClassicalError:
        pass
    else:
        raise VerificationError("E = 8 orbit stayed bounded through eps^4")


def check_density() -> None:
    grid = default_grid()
    free = ModelParams(epsilon=0.0)
    ground = probability_density(GaussianState.ground(), free, grid=grid)
    _require(np.max(np.abs(ground.rho - np.exp(-grid ** 2) / math.sqrt(math.pi))) < 1e-12, "ground density")
    first = probability_density(GaussianState.first(), free, grid=grid)
    _require(np.max(np.abs(first.rho - 2 * grid ** 2 * np.exp(-grid ** 2) / math.sqrt(math.pi))) < 1e-12, "first density")

    for eps in (0.1, 0.2):
        params = ModelParams(epsilon=eps)
        for state in (GaussianState.ground(), GaussianState.first()):
            curve = probability_density(state, params, grid=grid)
            _require(np.all(curve.rho >= 0), "negative density")
            for name, value in curve.normalization_checks().items():
                _require(abs(value - 1) < 1e-6, f"{name} integral {value} at eps = {eps}")
            for label, op in (("Q1", q1_operator(params)), ("Q3", q3_operator(params))):
                exact = state.apply(op)(grid)
                oracle = cauchy_apply(op, state, grid)
                _require(np.max(np.abs(exact - oracle)) < 1e-8, f"{label} action differs from the contour oracle")


CHECKS: Sequence[Tuple[str, Callable[[], None]]] = (
    ("metric goldens", check_metric_goldens),
    ("metric residual/hermiticity/parity/oracle", check_metric_properties),
    ("generic right-hand side", check_general_rhs),
    ("uncorrected Q3 rejected", check_uncorrected_q3_rejected),
    ("commutator identities", check_commutator_identities),
    ("hermitian series", check_hermitian_series),
    ("ordering identities", check_ordering_identities),
    ("energy formula", check_energy_formula),
    ("spectrum", check_spectrum),
    ("observables", check_observables),
    ("manifest round trip", check_round_trip),
    ("unscaling", check_unscaling),
    ("classical limit", check_classical),
    ("orbits", check_orbits),
    ("density", check_density),
)


def run_verification(checks: Sequence[Tuple[str, Callable[[], None]]] = CHECKS) -> VerificationSummary:
    summary = VerificationSummary()
    for name, check in checks:
        started = time.perf_counter()
        try:
            check()
            result = CheckResult(name, True)
        except (AssertionError, PTCubicError) as e:
            result = CheckResult(name, False, str(e))
        except Exception as e:
            logger.exception(f"Check '{name}' crashed")
            result = CheckResult(name, False, f"{type(e).__name__}: {e}")
        result = CheckResult(result.name, result.passed, result.detail, time.perf_counter() - started)
        if result.passed:
            logger.info(f"PASS {name} ({result.seconds:.2f}s)")
        else:
            logger.error(f"FAIL {name}: {result.detail}")
        summary.results.append(result)
    return summary
