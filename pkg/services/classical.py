"""
Classical limit of the unscaled Hermitian Hamiltonian and phase-space orbits.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, NamedTuple, Optional, Tuple

import numpy as np

from config import settings
from errors import ClassicalError
from services.hermitian_map import DimensionfulOperator, hermitian_equivalent, unscale
from services.metric_solver import ModelParams, solve_metric

logger = logging.getLogger(__name__)


class ClassicalKey(NamedTuple):
    m: Fraction
    mu: int
    eps: int
    x: int
    p: int


@dataclass(frozen=True)
class ClassicalHamiltonian:
    terms: Mapping[ClassicalKey, Fraction]
    truncation: int

    def truncate(self, order: int) -> "ClassicalHamiltonian":
        return ClassicalHamiltonian({k: c for k, c in self.terms.items() if k.eps <= order}, min(order, self.truncation))

    def coefficient(self, m=0, mu=0, eps=0, x=0, p=0) -> Fraction:
        return self.terms.get(ClassicalKey(Fraction(m), mu, eps, x, p), Fraction(0))

    def is_even_in_p(self) -> bool:
        return all(k.p % 2 == 0 for k in self.terms)

    def numeric(self, params: ModelParams) -> Dict[Tuple[int, int], float]:
        out: Dict[Tuple[int, int], float] = {}
        for k, c in self.terms.items():
            value = float(c) * params.m ** float(k.m) * params.mu ** k.mu * params.epsilon ** k.eps
            out[(k.x, k.p)] = out.get((k.x, k.p), 0.0) + value
        return {key: v for key, v in out.items() if v != 0.0}

    def compile(self, params: ModelParams) -> "PhaseSpaceFunction":
        return PhaseSpaceFunction(self.numeric(params))


class PhaseSpaceFunction:
    """H_c(x, p) with numeric coefficients and its partial derivatives."""

    def __init__(self, coefficients: Mapping[Tuple[int, int], float]):
        self.coefficients = dict(coefficients)
        keys = sorted(self.coefficients)
        self._j = np.array([k[0] for k in keys], dtype=float)
        self._k = np.array([k[1] for k in keys], dtype=float)
        self._c = np.array([self.coefficients[k] for k in keys], dtype=float)

    def __call__(self, x, p):
        x, p = np.asarray(x, dtype=float)[..., None], np.asarray(p, dtype=float)[..., None]
        return np.sum(self._c * x ** self._j * p ** self._k, axis=-1)

    def gradient(self, x: float, p: float) -> Tuple[float, float]:
        dx = np.sum(self._c * self._j * _safe_power(x, self._j - 1) * p ** self._k)
        dp = np.sum(self._c * self._k * x ** self._j * _safe_power(p, self._k - 1))
        return float(dx), float(dp)

    def momentum_polynomial(self, x: float) -> np.ndarray:
        """Coefficients (highest power first) of H_c(x, .) as a polynomial in p."""
        degree = int(self._k.max()) if len(self._k) else 0
        coeffs = np.zeros(degree + 1)
        for (j, k), c in self.coefficients.items():
            coeffs[degree - k] += c * x ** j
        return coeffs

    def position_polynomial(self, p: float) -> np.ndarray:
        """Coefficients (highest power first) of H_c(., p) as a polynomial in x."""
        degree = int(self._j.max()) if len(self._j) else 0
        coeffs = np.zeros(degree + 1)
        for (j, k), c in self.coefficients.items():
            coeffs[degree - j] += c * p ** k
        return coeffs


def _safe_power(base: float, exponent: np.ndarray) -> np.ndarray:
    return np.where(exponent >= 0, float(base) ** np.maximum(exponent, 0), 0.0)


def classical_limit(h_dim: DimensionfulOperator, imag_tolerance: Fraction = Fraction(0)) -> ClassicalHamiltonian:
    """hbar -> 0: keep hbar^0 terms, read x, p as commuting variables."""
    terms: Dict[ClassicalKey, Fraction] = {}
    for key, c in h_dim.terms.items():
        if key.hbar < 0:
            raise ClassicalError(f"term {key} carries hbar^{key.hbar}; the limit hbar -> 0 does not exist")
        if key.hbar > 0:
            continue
        if abs(c.im) > imag_tolerance:
            raise ClassicalError(f"hbar^0 term {key} has imaginary coefficient {c!r}")
        terms[ClassicalKey(key.m, key.mu, key.eps, key.x, key.p)] = c.re
    truncation = max((k.eps for k in h_dim.terms), default=0)
    return ClassicalHamiltonian(terms, truncation)


def classical_hamiltonian(params: ModelParams, eps_order: int = 4) -> ClassicalHamiltonian:
    """H_c from the solved metric, through eps^eps_order (even, at most 4)."""
    if eps_order not in (0, 2, 4):
        raise ClassicalError(f"eps_order must be 0, 2 or 4, got {eps_order}")
    mass = params.mass_fraction()
    expansion = hermitian_equivalent(solve_metric(3, mass))
    return classical_limit(unscale(expansion.series, params, mass=mass)).truncate(eps_order)


# M(x) = m / (1 + MASS_PROFILE_FACTOR eps^2 x^2 / mu^4)
MASS_PROFILE_FACTOR = Fraction(6)
PRE_ERRATUM_MASS_PROFILE_FACTOR = Fraction(3)


def mass_profile_factor(pre_erratum: bool = False) -> Fraction:
    return PRE_ERRATUM_MASS_PROFILE_FACTOR if pre_erratum else MASS_PROFILE_FACTOR


def kinetic_correction(pre_erratum: bool = False) -> Fraction:
    """Coefficient of eps^2 x^2 p^2 / (m mu^4) in p^2 / 2M(x) expanded to first order."""
    return mass_profile_factor(pre_erratum) / 2


def mass_profile(params: ModelParams, x_c: float, pre_erratum: bool = False) -> float:
    """M(x) = m / (1 + 6 eps^2 x^2 / mu^4)."""
    factor = float(mass_profile_factor(pre_erratum))
    return params.m / (1.0 + factor * params.epsilon ** 2 * x_c ** 2 / params.mu ** 4)


def e_star(params: ModelParams, pre_erratum: bool = False) -> float:
    """E* = mu^6 / (12 eps^2); inf for eps = 0."""
    if params.epsilon == 0:
        return math.inf
    divisor = 2 * float(mass_profile_factor(pre_erratum))
    return params.mu ** 6 / (divisor * params.epsilon ** 2)


def _ellipse_coefficients(params: ModelParams, E: float, pre_erratum: bool) -> Tuple[float, float]:
    """x^2 and x^4 coefficients of E - p^2 / 2m on the order-eps^2 level set."""
    eps2 = params.epsilon ** 2
    factor = float(mass_profile_factor(pre_erratum))
    quadratic = params.mu ** 2 / 2 + factor * eps2 * E / params.mu ** 4
    # the uncorrected ellipse drops the x^4 term
    quartic = 0.0 if pre_erratum else factor * eps2 / (4 * params.mu ** 2)
    return quadratic, quartic


def _implicit_p_squared(params: ModelParams, E: float, x_c: float, pre_erratum: bool) -> float:
    quadratic, quartic = _ellipse_coefficients(params, E, pre_erratum)
    return 2 * params.m * (E - quadratic * x_c ** 2 + quartic * x_c ** 4)


def implicit_orbit(params: ModelParams, E: float, x_c: float, pre_erratum: bool = False) -> Tuple[float, ...]:
    """(+p, -p) on the order-eps^2 level set through x_c; () outside the turning points."""
    if E <= 0:
        raise ClassicalError(f"energy must be positive, got {E}")
    if abs(x_c) > turning_point(params, E, pre_erratum):
        return ()
    p2 = _implicit_p_squared(params, E, x_c, pre_erratum)
    if p2 < 0:
        return ()
    p = math.sqrt(p2)
    return (p, -p)


def turning_point(params: ModelParams, E: float, pre_erratum: bool = False) -> float:
    """Smallest positive x with p = 0 on the order-eps^2 level set."""
    quadratic, quartic = _ellipse_coefficients(params, E, pre_erratum)
    roots = np.roots([quartic, 0.0, -quadratic, 0.0, E]) if quartic else np.roots([-quadratic, 0.0, E])
    real = sorted(r.real for r in roots if abs(r.imag) < 1e-12 and r.real > 0)
    if not real:
        return math.inf
    return real[0]


def _inside_well(h_c: PhaseSpaceFunction, E: float, x: float) -> bool:
    """H_c(s, 0) < E for every s between 0 and x."""
    potential = h_c.position_polynomial(0.0)
    potential[-1] -= E
    if np.polyval(potential, 0.0) >= 0:
        return False
    potential = np.trim_zeros(potential, "f")
    edges = [abs(r.real) for r in np.roots(potential) if abs(r.imag) < 1e-9 and r.real * x > 0]
    return not edges or abs(x) < min(edges)


def level_set_momentum(h_c: PhaseSpaceFunction, E: float, x: float) -> Optional[float]:
    """
    Momentum p > 0 with H_c(x, p) = E on the branch around the origin, or None.

    That branch starts inside the potential well at p = 0 and meets the level
    set where H_c(x, .) first rises through E. Roots on the open branches that
    the eps^4 terms create at large |x| or |p| are rejected.
    """
    if not _inside_well(h_c, E, x):
        return None
    coeffs = h_c.momentum_polynomial(x)
    coeffs[-1] -= E
    coeffs = np.trim_zeros(coeffs, "f")
    if len(coeffs) < 2:
        return None
    candidates = [r.real for r in np.roots(coeffs) if abs(r.imag) < 1e-9 and r.real > 0]
    if not candidates:
        return None
    # polish on the real polynomial
    p = min(candidates)
    for _ in range(3):
        value = np.polyval(coeffs, p)
        slope = np.polyval(np.polyder(coeffs), p)
        if slope == 0:
            break
        p -= value / slope
    if slope <= 0:
        return None
    return float(p)


@dataclass
class OrbitTrace:
    samples: np.ndarray  # columns t, x, p, H
    energy: float
    step: float
    max_drift: float
    drift_exceeded: bool
    period: Optional[float] = None
    closure: Optional[float] = None

    @property
    def closed(self) -> bool:
        return self.closure is not None

    def rows(self) -> List[Tuple[float, float, float, float]]:
        return [tuple(float(v) for v in row) for row in self.samples]


def _rk4_step(h_c: PhaseSpaceFunction, state: np.ndarray, dt: float) -> np.ndarray:
    def vector_field(s):
        dx, dp = h_c.gradient(s[0], s[1])
        return np.array([dp, -dx])

    k_1 = dt * vector_field(state)
    k_2 = dt * vector_field(state + (1 / 2) * k_1)
    k_3 = dt * vector_field(state + (1 / 2) * k_2)
    k_4 = dt * vector_field(state + k_3)
    return state + (1 / 6) * (k_1 + 2 * k_2 + 2 * k_3 + k_4)


def _refine_crossing(h_c: PhaseSpaceFunction, state: np.ndarray, x0: float, dt: float) -> Tuple[float, np.ndarray]:
    """Partial step tau in [0, dt] with x(tau) = x0, by Newton on the RK4 map."""
    tau = (x0 - state[0]) / max(h_c.gradient(*state)[1], 1e-300)
    tau = min(max(tau, 0.0), dt)
    for _ in range(20):
        moved = _rk4_step(h_c, state, tau)
        velocity = h_c.gradient(*moved)[1]
        if velocity == 0:
            break
        delta = (moved[0] - x0) / velocity
        tau -= delta
        if abs(delta) < 1e-16:
            break
    return tau, _rk4_step(h_c, state, tau)


def integrate_orbit(
    params: ModelParams,
    E: float,
    x0: float = 0.0,
    dt: float = 1e-3,
    steps: int = 20000,
    h_c: Optional[PhaseSpaceFunction] = None,
    eps_order: int = 4,
    drift_bound: Optional[float] = None,
    stop_at_period: bool = False,
) -> OrbitTrace:
    """Fixed-step RK4 from (x0, p0 > 0) on the shell H_c = E; records period and closure distance."""
    drift_bound = settings.drift_bound if drift_bound is None else drift_bound
    if h_c is None:
        h_c = classical_hamiltonian(params, eps_order).compile(params)
    p0 = level_set_momentum(h_c, E, x0)
    if p0 is None:
        raise ClassicalError(f"start point outside orbit: no real momentum at x0 = {x0} for E = {E}")

    state = np.array([x0, p0])
    start = state.copy()
    rows = [(0.0, x0, p0, float(h_c(x0, p0)))]
    period = closure = None
    left_start = False
    for n in range(1, steps + 1):
        previous = state
        with np.errstate(over="ignore", invalid="ignore"):
            state = _rk4_step(h_c, state, dt)
            energy = float(h_c(state[0], state[1]))
        if not (np.all(np.isfinite(state)) and math.isfinite(energy)):
            raise ClassicalError(
                f"orbit at E = {E} escapes to infinity near t = {n * dt:.6g}; the level set is not closed"
            )
        rows.append((n * dt, state[0], state[1], energy))
        if period is None:
            # upward crossing of x = x0 after leaving the start neighbourhood
            if previous[0] > x0 and state[0] <= x0 or previous[0] < x0 and state[0] >= x0:
                if left_start and np.sign(state[1]) == np.sign(start[1]):
                    tau, hit = _refine_crossing(h_c, previous, x0, dt)
                    period = (n - 1) * dt + tau
                    closure = float(np.hypot(hit[0] - start[0], hit[1] - start[1]))
                    if stop_at_period:
                        break
                left_start = True

    samples = np.array(rows)
    drift = float(np.max(np.abs(samples[:, 3] - E)) / abs(E))
    exceeded = not drift <= drift_bound
    if exceeded:
        logger.warning(f"Orbit E = {E}: relative energy drift {drift:.3e} above {drift_bound:.1e}")
    return OrbitTrace(
        samples=samples,
        energy=E,
        step=dt,
        max_drift=drift,
        drift_exceeded=exceeded,
        period=period,
        closure=closure,
    )
