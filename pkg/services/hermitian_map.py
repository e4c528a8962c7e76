"""
Equivalent Hermitian Hamiltonian h = rho H rho^{-1} (rho = e^{-Q/2}), the physical
observables X = rho^{-1} x rho, P = rho^{-1} p rho, and the dimensionful forms.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, Mapping, NamedTuple, Optional, Tuple, Union

from algebra import (
    I,
    EpsilonSeries,
    GaussianRational,
    OperatorPoly,
    SymmetryKind,
    as_series,
    bch_terms,
    commutator,
    format_fraction,
    is_anti_hermitian,
    is_hermitian,
    nested_commutator,
    symmetry_transform,
)
from errors import DimensionalError, HermitianMapError
from services.metric_solver import MetricSolution, ModelParams, hamiltonian_series

logger = logging.getLogger(__name__)

IDENTITY_NAMES = ("[H1,Q1]", "[H1,Q3]", "[[[H1,Q1],Q1],Q1]")


@dataclass(frozen=True)
class HermitianExpansion:
    series: EpsilonSeries
    identities: Dict[str, OperatorPoly]
    mass: Fraction

    def h(self, order: int) -> OperatorPoly:
        return self.series[order]


@dataclass(frozen=True)
class ObservablePair:
    X: EpsilonSeries
    P: EpsilonSeries


def cubic_identities(sol: MetricSolution) -> Dict[str, OperatorPoly]:
    """The nested commutators that h2 and h4 are assembled from."""
    h1 = sol.perturbation
    out = {}
    if 1 in sol.q_terms:
        q1 = sol.q_terms[1]
        out["[H1,Q1]"] = commutator(h1, q1)
        out["[[[H1,Q1],Q1],Q1]"] = nested_commutator(h1, q1, q1, q1)
    if 3 in sol.q_terms:
        out["[H1,Q3]"] = commutator(h1, sol.q_terms[3])
    return out


def _check_hermiticity_bookkeeping(terms) -> None:
    for depth, term in enumerate(terms):
        for k, coeff in enumerate(term):
            ok = is_hermitian(coeff) if k % 2 == 0 else is_anti_hermitian(coeff)
            if not ok:
                kind = "Hermitian" if k % 2 == 0 else "anti-Hermitian"
                raise HermitianMapError(f"BCH depth {depth} contribution at eps^{k} is not {kind}")


def hermitian_equivalent(sol: MetricSolution, order: Optional[int] = None) -> HermitianExpansion:
    """h through eps^(max_order + 1); odd orders must vanish identically."""
    limit = sol.max_order + 1
    order = limit if order is None else order
    if order > limit:
        raise HermitianMapError(f"h through eps^{order} needs Q through order {order - 1}, have {sol.max_order}")

    h_series = hamiltonian_series(sol.mass, order, sol.perturbation)
    generator = sol.series(order).scale(Fraction(1, 2))
    terms = bch_terms(h_series, generator, depth=max(order, 1))
    _check_hermiticity_bookkeeping(terms)

    series = terms[0]
    for term in terms[1:]:
        series = series + term

    for k in range(1, order + 1, 2):
        if series[k]:
            raise HermitianMapError(f"h at odd order eps^{k} does not vanish: {series[k]!r}")

    identities = cubic_identities(sol)
    if order >= 2 and "[H1,Q1]" in identities:
        if series[2] != identities["[H1,Q1]"].scale(Fraction(1, 4)):
            raise HermitianMapError("h2 differs from [H1,Q1]/4")
    if order >= 4 and "[H1,Q3]" in identities:
        expected = identities["[H1,Q3]"].scale(Fraction(1, 4)) - identities["[[[H1,Q1],Q1],Q1]"].scale(Fraction(1, 192))
        if series[4] != expected:
            raise HermitianMapError("h4 differs from [H1,Q3]/4 - [[[H1,Q1],Q1],Q1]/192")

    logger.info(f"Hermitian equivalent through eps^{order} at M = {sol.mass}")
    return HermitianExpansion(series=series, identities=identities, mass=sol.mass)


def pseudo_observable(o: OperatorPoly, sol: MetricSolution, order: int) -> EpsilonSeries:
    """O = rho^{-1} o rho = o - [o,Q]/2 + [[o,Q],Q]/8 - ..., truncated at eps^order."""
    if order > sol.max_order + 1:
        raise HermitianMapError(f"observable through eps^{order} needs Q through order {order - 1}, have {sol.max_order}")
    if order < 1:
        return as_series(o, 0)
    generator = sol.series(order).scale(Fraction(-1, 2))
    terms = bch_terms(o, generator, depth=order)
    result = terms[0]
    for term in terms[1:]:
        result = result + term
    return result


def observable_pair(sol: MetricSolution, order: int = 2) -> ObservablePair:
    return ObservablePair(
        X=pseudo_observable(OperatorPoly.x(), sol, order),
        P=pseudo_observable(OperatorPoly.p(), sol, order),
    )


def canonical_residual(pair: ObservablePair) -> EpsilonSeries:
    """[X, P] - i through the common truncation order."""
    bracket = pair.X.commutator(pair.P)
    return bracket - EpsilonSeries.constant(OperatorPoly.scalar(I), bracket.order)


def symmetry_of(series: EpsilonSeries, kind: SymmetryKind) -> EpsilonSeries:
    return series.map(lambda c: symmetry_transform(c, kind))


def manifest_hamiltonian(expansion: HermitianExpansion, pair: ObservablePair) -> EpsilonSeries:
    """h(X, P): every normal-ordered monomial x^a p^b of h becomes X^a P^b."""
    order = min(expansion.series.order, pair.X.order, pair.P.order)
    x_powers = [EpsilonSeries.constant(OperatorPoly.one(), order)]
    p_powers = [EpsilonSeries.constant(OperatorPoly.one(), order)]
    result = EpsilonSeries.constant(OperatorPoly.zero(), order)
    X, P = pair.X.truncate(order), pair.P.truncate(order)
    for k in range(order + 1):
        for (a, b), c in expansion.series[k].items():
            while len(x_powers) <= a:
                x_powers.append(x_powers[-1] * X)
            while len(p_powers) <= b:
                p_powers.append(p_powers[-1] * P)
            term = (x_powers[a] * p_powers[b]).scale(c)
            # shift by eps^k
            shifted = [OperatorPoly.zero()] * k + list(term.coeffs[: order + 1 - k])
            result = result + EpsilonSeries(shifted, order)
    return result


def level_shift(n: int, mass: Fraction = Fraction(1)) -> Fraction:
    """<n|h2|n> = (30 n^2 + 30 n + 11) / (8 M^4)."""
    return Fraction(30 * n * n + 30 * n + 11, 8) / Fraction(mass) ** 4


def perturbative_energy(n: int, params: ModelParams, numeric: bool = False) -> float:
    """E_n = M(n + 1/2) + <n|h2|n> eps^2."""
    if n < 0:
        raise HermitianMapError(f"level index must be nonnegative, got {n}")
    mass = params.scaled_mass
    eps = params.scaled_coupling
    if numeric:
        from services.metric_solver import solve_metric
        from services.spectral_oracle import expectation_values

        exact_mass = params.mass_fraction()
        h2 = hermitian_equivalent(solve_metric(1, exact_mass)).h(2)
        shift = float(expectation_values(h2, exact_mass, n + 1)[n].real)
    else:
        shift = float(Fraction(30 * n * n + 30 * n + 11, 8)) / mass ** 4
    return mass * (n + 0.5) + shift * eps ** 2


class QuantityKind(str, Enum):
    ENERGY = "energy"
    POSITION = "position"
    MOMENTUM = "momentum"
    DIMENSIONLESS = "dimensionless"


# (doubled M-weight, ell, m, hbar) of the prefactor turning the dimensionless quantity into the physical one
_PREFACTORS: Dict[QuantityKind, Tuple[int, int, int, int]] = {
    QuantityKind.ENERGY: (2, -2, -1, 2),
    QuantityKind.POSITION: (-1, 1, 0, 0),
    QuantityKind.MOMENTUM: (1, -1, 0, 1),
    QuantityKind.DIMENSIONLESS: (0, 0, 0, 0),
}


class DimKey(NamedTuple):
    m: Fraction
    mu: int
    eps: int
    hbar: int
    x: int
    p: int


def _exponent_json(value: Fraction) -> Union[int, str]:
    value = Fraction(value)
    return int(value) if value.denominator == 1 else format_fraction(value)


@dataclass(frozen=True)
class DimensionfulOperator:
    """sum coef * m^a mu^b eps^c hbar^d x^j p^k, normal-ordered with [x, p] = i hbar."""
    terms: Mapping[DimKey, GaussianRational] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "terms", {
            DimKey(Fraction(k[0]), *k[1:]): GaussianRational.of(c) for k, c in self.terms.items()
        })

    def coefficient(self, **exponents) -> GaussianRational:
        key = DimKey(**{"m": Fraction(0), "mu": 0, "eps": 0, "hbar": 0, "x": 0, "p": 0, **exponents})
        return self.terms.get(key, GaussianRational())

    def eps_orders(self):
        return sorted({key.eps for key in self.terms})

    def restrict(self, eps: int) -> "DimensionfulOperator":
        return DimensionfulOperator({k: c for k, c in self.terms.items() if k.eps == eps})

    def evaluate(self, params: ModelParams, include_eps: bool = True) -> Dict[Tuple[int, int], complex]:
        """Numeric coefficient of each x^j p^k at the given physical constants."""
        out: Dict[Tuple[int, int], complex] = {}
        for key, c in self.terms.items():
            value = complex(c) * params.m ** float(key.m) * params.mu ** key.mu * params.hbar ** key.hbar
            if include_eps:
                value *= params.epsilon ** key.eps
            out[(key.x, key.p)] = out.get((key.x, key.p), 0j) + value
        return out

    def to_json(self) -> dict:
        rows = []
        for key in sorted(self.terms, key=lambda k: (k.eps, k.x, k.p, k.hbar, k.m, k.mu)):
            c = self.terms[key]
            rows.append({
                "m": _exponent_json(key.m),
                "mu": key.mu,
                "eps": key.eps,
                "hbar": key.hbar,
                "x": key.x,
                "p": key.p,
                "coef": format_fraction(c.re),
                "coef_im": format_fraction(c.im),
            })
        return {"terms": rows}

    @classmethod
    def from_json(cls, payload: Mapping) -> "DimensionfulOperator":
        terms = {}
        for t in payload["terms"]:
            key = DimKey(Fraction(t["m"]), int(t["mu"]), int(t["eps"]), int(t["hbar"]), int(t["x"]), int(t["p"]))
            terms[key] = GaussianRational.parse(t["coef"], t.get("coef_im", "0/1"))
        return cls(terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DimensionfulOperator):
            return NotImplemented
        return {k: v for k, v in self.terms.items() if v} == {k: v for k, v in other.terms.items() if v}

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.terms.items())))


MassPowers = Mapping[Tuple[int, int, int], int]


def _canonical_mass_power(kind: QuantityKind, n: int, j: int, k: int) -> int:
    w2 = _PREFACTORS[kind][0]
    doubled = w2 - 5 * n - k + j
    if doubled % 2:
        raise DimensionalError(f"eps^{n} x^{j} p^{k} has no integral power of M for a {kind.value} quantity")
    return doubled // 2


def unscale(
    a: Union[OperatorPoly, EpsilonSeries],
    params: ModelParams,
    kind: QuantityKind = QuantityKind.ENERGY,
    mass_powers: Optional[MassPowers] = None,
    mass: Optional[Fraction] = None,
    eps_order: int = 0,
) -> DimensionfulOperator:
    """
    Undo x -> x/ell, p -> ell p/hbar, M -> ell^2 sqrt(m) mu/hbar, eps -> ell^5 m epsilon/hbar^2.

    ``a`` is taken to be computed at M = ``mass`` (default: the rational M of ``params``).
    An OperatorPoly is read as the eps^eps_order coefficient. Every term must leave
    ell with exponent zero.
    """
    mass = params.mass_fraction() if mass is None else Fraction(mass)
    series = {eps_order: a} if isinstance(a, OperatorPoly) else dict(enumerate(a.coeffs))
    _, ell0, m0, hbar0 = _PREFACTORS[kind]

    terms: Dict[DimKey, GaussianRational] = {}
    for n, poly in series.items():
        for (j, k), c in poly.items():
            if mass_powers is not None:
                if (n, j, k) not in mass_powers:
                    raise DimensionalError(f"no M power known for eps^{n} x^{j} p^{k}")
                power = mass_powers[(n, j, k)]
            else:
                power = _canonical_mass_power(kind, n, j, k)
            ell = 2 * power + 5 * n - j + k + ell0
            if ell != 0:
                raise DimensionalError(f"eps^{n} x^{j} p^{k} leaves ell^{ell} in a {kind.value} quantity")
            key = DimKey(
                m=Fraction(power, 2) + n + m0,
                mu=power,
                eps=n,
                hbar=-power - 2 * n - k + hbar0,
                x=j,
                p=k,
            )
            terms[key] = terms.get(key, GaussianRational()) + c / mass ** power
    return DimensionfulOperator({k: c for k, c in terms.items() if c})


def infer_mass_powers(
    first: Union[OperatorPoly, EpsilonSeries],
    second: Union[OperatorPoly, EpsilonSeries],
    first_mass: Fraction,
    second_mass: Fraction,
) -> Dict[Tuple[int, int, int], int]:
    """Recover the integer power of M in each coefficient from the same object computed at two values of M."""
    ratio = Fraction(second_mass) / Fraction(first_mass)
    if ratio == 1 or ratio <= 0:
        raise HermitianMapError("need two distinct positive values of M")

    def by_key(obj):
        series = {0: obj} if isinstance(obj, OperatorPoly) else dict(enumerate(obj.coeffs))
        return {(n, j, k): c for n, poly in series.items() for (j, k), c in poly.items()}

    a, b = by_key(first), by_key(second)
    if set(a) != set(b):
        diff = sorted(set(a) ^ set(b))
        raise HermitianMapError(f"monomial sets differ between the two values of M, e.g. {diff[0]}")

    powers = {}
    for key, c1 in a.items():
        c2 = b[key]
        scale = abs(complex(c2)) / abs(complex(c1))
        guess = round(math.log(scale) / math.log(float(ratio)))
        if c1 * ratio ** guess != c2:
            raise HermitianMapError(f"coefficient of eps^{key[0]} x^{key[1]} p^{key[2]} is not a pure power of M")
        powers[key] = guess
    return powers
