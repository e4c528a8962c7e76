"""
Perturbative metric operator eta_+ = e^{-Q} for H = H0 + eps H1.

Q = Q1 eps + Q3 eps^3 + Q5 eps^5 + ..., each Q_{2i+1} found from

    [H0, Q_{2i+1}] = R_{2i+1}(Q1, ..., Q_{2i-1})

with the anticommutator ansatz Q_{2i+1} = sum_{j,k} c_ijk {x^2j, p^2k+1}.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Tuple, Union

import sympy
from pydantic import BaseModel, ConfigDict, field_validator

from algebra import (
    EpsilonSeries,
    GaussianRational,
    I,
    OperatorPoly,
    SymmetryKind,
    adjoint,
    anticommutator,
    apply_to_polynomial,
    bch_conjugate,
    commutator,
    format_fraction,
    nested_commutator,
    symmetry_transform,
)
from errors import MetricSolverError, VerificationError

logger = logging.getLogger(__name__)

MAX_SUPPORTED_ORDER = 7
ORACLE_DEGREE = 12


class ModelParams(BaseModel):
    """Physical constants of H = p^2/2m + mu^2 x^2/2 + i eps x^3 plus the length scale ell."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    m: float = 1.0
    mu: float = 1.0
    epsilon: float = 0.1
    hbar: float = 1.0
    ell: float = 1.0

    @field_validator("m", "hbar", "ell")
    @classmethod
    def _positive(cls, value: float, info) -> float:
        if not value > 0:
            raise ValueError(f"{info.field_name} must be positive")
        return value

    @field_validator("mu")
    @classmethod
    def _nonzero_mu(cls, value: float) -> float:
        if value == 0:
            raise ValueError("mu must be nonzero")
        return value

    @property
    def scaled_mass(self) -> float:
        """Dimensionless M = ell^2 sqrt(m) mu / hbar."""
        return self.ell ** 2 * math.sqrt(self.m) * self.mu / self.hbar

    @property
    def scaled_coupling(self) -> float:
        """Dimensionless eps = ell^5 m epsilon / hbar^2."""
        return self.ell ** 5 * self.m * self.epsilon / self.hbar ** 2

    def mass_fraction(self, max_denominator: int = 10 ** 6) -> Fraction:
        exact = Fraction(self.scaled_mass).limit_denominator(max_denominator)
        if float(exact) != self.scaled_mass:
            logger.info(f"Using rational M = {exact} for M = {self.scaled_mass!r}")
        return exact


def unperturbed_hamiltonian(mass: Fraction) -> OperatorPoly:
    """H0 = p^2/2 + M^2 x^2/2."""
    return OperatorPoly({(0, 2): Fraction(1, 2), (2, 0): Fraction(mass) ** 2 / 2})


def cubic_perturbation() -> OperatorPoly:
    """H1 = i x^3."""
    return OperatorPoly.monomial(I, 3, 0)


def hamiltonian_series(mass: Fraction, order: int, perturbation: Optional[OperatorPoly] = None) -> EpsilonSeries:
    h1 = cubic_perturbation() if perturbation is None else perturbation
    return EpsilonSeries([unperturbed_hamiltonian(mass), h1], order)


def ansatz_element(j: int, k: int) -> OperatorPoly:
    """{x^2j, p^2k+1}."""
    return anticommutator(OperatorPoly.x(2 * j), OperatorPoly.p(2 * k + 1))


@dataclass(frozen=True)
class AnsatzFit:
    operator: OperatorPoly
    coefficients: Dict[Tuple[int, int], GaussianRational]
    k_max: int


@dataclass(frozen=True)
class MetricSolution:
    mass: Fraction
    max_order: int
    q_terms: Mapping[int, OperatorPoly]
    ansatz_coeffs: Mapping[Tuple[int, int, int], GaussianRational] = field(default_factory=dict)
    widened: Tuple[int, ...] = ()
    perturbation: OperatorPoly = field(default_factory=cubic_perturbation)

    def q(self, order: int) -> OperatorPoly:
        if order not in self.q_terms:
            raise MetricSolverError("not available in this solution", order=order)
        return self.q_terms[order]

    def series(self, order: Optional[int] = None) -> EpsilonSeries:
        """Q as an eps-series truncated at ``order`` (default: max_order)."""
        order = self.max_order if order is None else order
        return EpsilonSeries.from_orders({k: q for k, q in self.q_terms.items() if k <= order}, order)

    def with_term(self, order: int, poly: OperatorPoly) -> "MetricSolution":
        terms = dict(self.q_terms)
        terms[order] = poly
        return replace(self, q_terms=terms)

    def truncated(self, max_order: int) -> "MetricSolution":
        return replace(
            self,
            max_order=max_order,
            q_terms={k: q for k, q in self.q_terms.items() if k <= max_order},
            ansatz_coeffs={key: c for key, c in self.ansatz_coeffs.items() if 2 * key[0] + 1 <= max_order},
        )

    def to_json(self) -> dict:
        payload = {
            "M": format_fraction(self.mass),
            "orders": {str(k): self.q_terms[k].to_json() for k in sorted(self.q_terms)},
        }
        if self.ansatz_coeffs:
            payload["ansatz"] = [
                {"i": i, "j": j, "k": k, **c.to_json()}
                for (i, j, k), c in sorted(self.ansatz_coeffs.items())
            ]
        return payload

    @classmethod
    def from_json(cls, payload: Mapping) -> "MetricSolution":
        orders = {int(k): OperatorPoly.from_json(v) for k, v in payload["orders"].items()}
        coeffs = {
            (int(t["i"]), int(t["j"]), int(t["k"])): GaussianRational.parse(t["re"], t["im"])
            for t in payload.get("ansatz", [])
        }
        return cls(
            mass=Fraction(payload["M"]),
            max_order=max(orders, default=1),
            q_terms=orders,
            ansatz_coeffs=coeffs,
        )


def _lower_terms(previous: Union[MetricSolution, Mapping[int, OperatorPoly]]) -> Mapping[int, OperatorPoly]:
    return previous.q_terms if isinstance(previous, MetricSolution) else previous


def series_rhs(
    order: int,
    previous: Union[MetricSolution, Mapping[int, OperatorPoly]],
    mass: Fraction = Fraction(1),
    perturbation: Optional[OperatorPoly] = None,
) -> OperatorPoly:
    """
    Right-hand side of [H0, Q_order] = R from the eps^order coefficient of

        -(e^{-Q} H0 e^{Q} - H0) - eps (H1 + e^{-Q} H1 e^{Q})

    evaluated with Q_order (and everything above it) set to zero.
    """
    lower = {k: q for k, q in _lower_terms(previous).items() if k < order}
    h1 = cubic_perturbation() if perturbation is None else perturbation
    q_series = EpsilonSeries.from_orders(lower, order)
    eps_h1 = EpsilonSeries.from_orders({1: h1}, order)
    conj_h0 = bch_conjugate(unperturbed_hamiltonian(mass), q_series, depth=order)
    conj_h1 = bch_conjugate(eps_h1, q_series, depth=order)
    return -conj_h0[order] - eps_h1[order] - conj_h1[order]


def rhs_for_order(
    i: int,
    previous: Union[MetricSolution, Mapping[int, OperatorPoly]],
    mass: Fraction = Fraction(1),
    perturbation: Optional[OperatorPoly] = None,
) -> OperatorPoly:
    """R_{2i+1}: -2H1; -(1/6)[[H1,Q1],Q1]; -(1/6)([[H1,Q1],Q3]+[[H1,Q3],Q1]) + (1/360)[[[[H1,Q1],Q1],Q1],Q1]."""
    order = 2 * i + 1
    lower = _lower_terms(previous)
    required = list(range(1, order, 2))
    missing = [k for k in required if k not in lower]
    if missing:
        raise MetricSolverError(f"requires Q{missing[0]} which has not been solved", order=order)
    h1 = cubic_perturbation() if perturbation is None else perturbation

    if i == 0:
        return h1.scale(-2)
    if i == 1:
        q1 = lower[1]
        return nested_commutator(h1, q1, q1).scale(Fraction(-1, 6))
    if i == 2:
        q1, q3 = lower[1], lower[3]
        mixed = nested_commutator(h1, q1, q3) + nested_commutator(h1, q3, q1)
        quartic = nested_commutator(h1, q1, q1, q1, q1)
        return mixed.scale(Fraction(-1, 6)) + quartic.scale(Fraction(1, 360))
    return series_rhs(order, lower, mass, perturbation)


def _to_sympy(value: Fraction) -> sympy.Rational:
    return sympy.Rational(value.numerator, value.denominator)


def _from_sympy(value) -> Fraction:
    if not value.is_Rational:
        raise MetricSolverError(f"ansatz solution {value} is not rational")
    return Fraction(int(value.p), int(value.q))


def solve_ansatz(rhs: OperatorPoly, i: int, mass: Fraction, k_max: Optional[int] = None) -> AnsatzFit:
    """Match [H0, sum c_jk {x^2j, p^2k+1}] = rhs monomial by monomial and solve for c_jk exactly."""
    order = 2 * i + 1
    j_max = i + 1
    k_max = i + 1 if k_max is None else k_max
    h0 = unperturbed_hamiltonian(mass)
    basis = [(j, k) for j in range(j_max + 1) for k in range(k_max + 1)]
    images = [commutator(h0, ansatz_element(j, k)) for j, k in basis]

    keys = sorted(set(rhs.terms).union(*(img.terms for img in images)))
    n = len(basis)
    # complex unknowns c = a + i b, split into a real system in (a, b)
    rows: List[List[sympy.Rational]] = []
    target: List[sympy.Rational] = []
    for key in keys:
        re_row = [sympy.Integer(0)] * (2 * n)
        im_row = [sympy.Integer(0)] * (2 * n)
        for col, img in enumerate(images):
            g = img.coefficient(*key)
            re_row[col], re_row[n + col] = _to_sympy(g.re), _to_sympy(-g.im)
            im_row[col], im_row[n + col] = _to_sympy(g.im), _to_sympy(g.re)
        r = rhs.coefficient(*key)
        rows += [re_row, im_row]
        target += [_to_sympy(r.re), _to_sympy(r.im)]

    try:
        solution, params = sympy.Matrix(rows).gauss_jordan_solve(sympy.Matrix(target))
    except ValueError as e:
        raise MetricSolverError(f"no solution in ansatz space (j, k <= {j_max}, {k_max}): {e}", order=order)

    if params.shape[0]:
        free = [str(s) for s in params]
        raise MetricSolverError(
            f"underdetermined ansatz system, {len(free)} free parameter(s)",
            order=order,
            free_parameters=free,
        )

    coefficients = {}
    operator = OperatorPoly.zero()
    for col, (j, k) in enumerate(basis):
        c = GaussianRational(_from_sympy(solution[col]), _from_sympy(solution[n + col]))
        if c:
            coefficients[(j, k)] = c
            operator = operator + ansatz_element(j, k).scale(c)
    return AnsatzFit(operator=operator, coefficients=coefficients, k_max=k_max)


def solve_commutator_equation(rhs: OperatorPoly, i: int, mass: Fraction) -> OperatorPoly:
    return solve_ansatz(rhs, i, mass).operator


def _fit_with_widening(rhs: OperatorPoly, i: int, mass: Fraction) -> Tuple[AnsatzFit, bool]:
    try:
        return solve_ansatz(rhs, i, mass), False
    except MetricSolverError as e:
        if e.free_parameters:
            raise
        logger.warning(f"Ansatz for Q{2 * i + 1} inconsistent with k <= {i + 1}; widening k by one")
        return solve_ansatz(rhs, i, mass, k_max=i + 2), True


def solve_metric(max_order: int, mass: Union[Fraction, int, str] = 1, perturbation: Optional[OperatorPoly] = None) -> MetricSolution:
    if max_order < 1 or max_order % 2 == 0 or max_order > MAX_SUPPORTED_ORDER:
        raise MetricSolverError(f"max_order must be odd and in 1..{MAX_SUPPORTED_ORDER}, got {max_order}")
    mass = Fraction(mass)
    if mass == 0:
        raise MetricSolverError("M must be nonzero")
    if perturbation is None:
        return _solve_metric_cached(max_order, mass)
    return _solve_metric(max_order, mass, perturbation)


@lru_cache(maxsize=32)
def _solve_metric_cached(max_order: int, mass: Fraction) -> MetricSolution:
    return _solve_metric(max_order, mass, cubic_perturbation())


def _solve_metric(max_order: int, mass: Fraction, perturbation: OperatorPoly) -> MetricSolution:
    q_terms: Dict[int, OperatorPoly] = {}
    coeffs: Dict[Tuple[int, int, int], GaussianRational] = {}
    widened = []
    for i in range((max_order + 1) // 2):
        order = 2 * i + 1
        logger.info(f"Solving for Q{order} at M = {mass}")
        rhs = rhs_for_order(i, q_terms, mass, perturbation)
        try:
            fit, was_widened = _fit_with_widening(rhs, i, mass)
        except MetricSolverError as e:
            if e.order is None:
                raise MetricSolverError(str(e), order=order, free_parameters=e.free_parameters)
            raise
        if was_widened:
            widened.append(order)
        q_terms[order] = fit.operator
        coeffs.update({(i, j, k): c for (j, k), c in fit.coefficients.items()})
    return MetricSolution(
        mass=mass,
        max_order=max_order,
        q_terms=q_terms,
        ansatz_coeffs=coeffs,
        widened=tuple(widened),
        perturbation=perturbation,
    )


@dataclass(frozen=True)
class MetricCheck:
    order: int
    name: str
    passed: bool
    monomial: Optional[Tuple[int, int]] = None
    detail: str = ""


@dataclass
class MetricReport:
    checks: List[MetricCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[MetricCheck]:
        return [c for c in self.checks if not c.passed]

    def raise_for_failures(self) -> None:
        if self.failures:
            first = self.failures[0]
            raise VerificationError(
                f"Q{first.order} failed {first.name} at monomial {first.monomial}: {first.detail}",
                failures=self.failures,
            )


def _first_monomial(poly: OperatorPoly) -> Optional[Tuple[int, int]]:
    return next((key for key, _ in poly.items()), None)


def _check(order: int, name: str, difference: OperatorPoly) -> MetricCheck:
    monomial = _first_monomial(difference)
    detail = "" if monomial is None else f"coefficient {difference.coefficient(*monomial)!r}"
    return MetricCheck(order, name, difference.is_zero(), monomial, detail)


def verify_metric(sol: MetricSolution, oracle_degree: int = ORACLE_DEGREE) -> MetricReport:
    """Residual, Hermiticity, parity-oddness, time-reversal oddness and the x^n oracle, order by order."""
    report = MetricReport()
    h0 = unperturbed_hamiltonian(sol.mass)
    for order in sorted(sol.q_terms):
        q = sol.q_terms[order]
        lower = {k: v for k, v in sol.q_terms.items() if k < order}
        rhs = rhs_for_order((order - 1) // 2, lower, sol.mass, sol.perturbation)

        report.checks.append(_check(order, "residual", commutator(h0, q) - rhs))
        report.checks.append(_check(order, "hermitian", adjoint(q) - q))
        report.checks.append(_check(order, "parity_odd", symmetry_transform(q, SymmetryKind.PARITY) + q))
        # odd in p as a Weyl symbol; normal ordering leaves i x terms with no p
        report.checks.append(_check(order, "time_odd", symmetry_transform(q, SymmetryKind.TIME_REVERSAL) + q))

        bad_n = None
        for n in range(oracle_degree + 1):
            f = {n: 1}
            lhs = _poly_sub(apply_to_polynomial(h0, apply_to_polynomial(q, f)), apply_to_polynomial(q, apply_to_polynomial(h0, f)))
            if _poly_sub(lhs, apply_to_polynomial(rhs, f)):
                bad_n = n
                break
        report.checks.append(MetricCheck(
            order, "oracle", bad_n is None, None,
            "" if bad_n is None else f"residual nonzero on x^{bad_n}",
        ))
    for check in report.failures:
        logger.warning(f"Q{check.order} {check.name} failed: monomial={check.monomial} {check.detail}")
    return report


def _poly_sub(a: Mapping[int, GaussianRational], b: Mapping[int, GaussianRational]) -> Dict[int, GaussianRational]:
    out = dict(a)
    for n, c in b.items():
        out[n] = out.get(n, GaussianRational()) - c
    return {n: c for n, c in out.items() if c}
