"""
Physical wavefunction Psi = e^{-Q/2} psi and the conserved density rho = |Psi|^2 / N
for states of the form poly(x) exp(-alpha x^2).
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.integrate
import scipy.special
from numpy.polynomial import Polynomial
from numpy.polynomial.hermite import hermgauss

from errors import DensityError
from services.hermitian_map import DimensionfulOperator
from services.metric_solver import ModelParams

logger = logging.getLogger(__name__)

# sum c * x^j d^k/dx^k
DifferentialOperator = Dict[Tuple[int, int], complex]

DEFAULT_GRID = (-4.0, 4.0, 400)


class GaussianState:
    """psi(x) = poly(x) exp(-alpha x^2)."""

    __slots__ = ("poly", "alpha")

    def __init__(self, poly, alpha: float = 0.5):
        if not alpha > 0:
            raise DensityError(f"Gaussian width alpha must be positive, got {alpha}")
        coef = poly.coef if isinstance(poly, Polynomial) else poly
        self.poly = Polynomial(np.asarray(coef, dtype=complex))
        self.alpha = float(alpha)

    @classmethod
    def ground(cls) -> "GaussianState":
        return cls([1.0])

    @classmethod
    def first(cls) -> "GaussianState":
        return cls([0.0, 1.0])

    @classmethod
    def named(cls, name: str) -> "GaussianState":
        if name == "ground":
            return cls.ground()
        if name == "first":
            return cls.first()
        raise DensityError(f"unknown state {name!r}, expected 'ground' or 'first'")

    def __call__(self, x):
        x = np.asarray(x)
        return self.poly(x) * np.exp(-self.alpha * x * x)

    def _same_width(self, other: "GaussianState") -> None:
        if other.alpha != self.alpha:
            raise DensityError("states with different Gaussian widths cannot be added")

    def __add__(self, other: "GaussianState") -> "GaussianState":
        self._same_width(other)
        return GaussianState(self.poly + other.poly, self.alpha)

    def __sub__(self, other: "GaussianState") -> "GaussianState":
        self._same_width(other)
        return GaussianState(self.poly - other.poly, self.alpha)

    def __mul__(self, factor: complex) -> "GaussianState":
        return GaussianState(self.poly * complex(factor), self.alpha)

    __rmul__ = __mul__

    def derivative(self, k: int = 1) -> "GaussianState":
        """d^k/dx^k, using d/dx (P e^{-a x^2}) = (P' - 2 a x P) e^{-a x^2}."""
        poly = self.poly
        two_ax = Polynomial([0.0, 2 * self.alpha])
        for _ in range(k):
            poly = poly.deriv() - two_ax * poly
        return GaussianState(poly, self.alpha)

    def times_power(self, j: int) -> "GaussianState":
        if j == 0:
            return self
        return GaussianState(self.poly * Polynomial([0.0] * j + [1.0]), self.alpha)

    def apply(self, op: DifferentialOperator) -> "GaussianState":
        result = GaussianState([0.0], self.alpha)
        derivatives = {}
        for (j, k), c in op.items():
            if k not in derivatives:
                derivatives[k] = self.derivative(k)
            result = result + derivatives[k].times_power(j) * c
        return result

    def conjugate_poly(self) -> Polynomial:
        return Polynomial(np.conj(self.poly.coef))

    def density_poly(self) -> Polynomial:
        """|poly(x)|^2 for real x."""
        return Polynomial((self.poly * self.conjugate_poly()).coef.real)

    def norm_squared(self) -> float:
        """int |psi|^2 dx from Gaussian moments int x^n e^{-b x^2} = Gamma((n+1)/2) / b^((n+1)/2)."""
        beta = 2 * self.alpha
        total = 0.0
        for n, r in enumerate(self.density_poly().coef):
            if n % 2 == 0 and r != 0.0:
                total += r * scipy.special.gamma((n + 1) / 2) / beta ** ((n + 1) / 2)
        return float(total)

    def norm_squared_quad(self) -> float:
        value, _ = scipy.integrate.quad(lambda x: abs(self(x)) ** 2, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-12, limit=200)
        return float(value)

    def norm_squared_hermite(self) -> float:
        beta = 2 * self.alpha
        density = self.density_poly()
        nodes, weights = hermgauss(density.degree() // 2 + 2)
        return float(np.sum(weights * density(nodes / math.sqrt(beta))) / math.sqrt(beta))

    def __repr__(self) -> str:
        return f"GaussianState(poly={self.poly.coef!r}, alpha={self.alpha})"


def _scale(op: DifferentialOperator, factor: complex) -> DifferentialOperator:
    return {key: c * factor for key, c in op.items()}


def q1_operator(params: ModelParams) -> DifferentialOperator:
    """(2i/mu^4) [ -(2 hbar^2 / 3m) d^3 + mu^2 (x^2 d + x) ]."""
    m, mu, hbar = params.m, params.mu, params.hbar
    return _scale({
        (0, 3): -2 * hbar ** 2 / (3 * m),
        (2, 1): mu ** 2,
        (1, 0): mu ** 2,
    }, 2j / mu ** 4)


def q3_operator(params: ModelParams) -> DifferentialOperator:
    """(4i/mu^10) [ -(32 hbar^4/15 m^2) d^5 + (10 hbar^2 mu^2/3m)(x^2 d^3 + 3x d^2) - 2 mu^4 (x^4 d + 2x^3) + (8 hbar^2 mu^2/m) d ]."""
    m, mu, hbar = params.m, params.mu, params.hbar
    return _scale({
        (0, 5): -32 * hbar ** 4 / (15 * m ** 2),
        (2, 3): 10 * hbar ** 2 * mu ** 2 / (3 * m),
        (1, 2): 10 * hbar ** 2 * mu ** 2 / m,
        (4, 1): -2 * mu ** 4,
        (3, 0): -4 * mu ** 4,
        (0, 1): 8 * hbar ** 2 * mu ** 2 / m,
    }, 4j / mu ** 10)


def differential_form(op: DimensionfulOperator, params: ModelParams, eps_order: int) -> DifferentialOperator:
    """The eps^eps_order part of ``op`` in position representation, p -> -i hbar d/dx."""
    out: DifferentialOperator = {}
    for key, c in op.restrict(eps_order).terms.items():
        value = complex(c) * params.m ** float(key.m) * params.mu ** key.mu * params.hbar ** key.hbar
        value *= (-1j * params.hbar) ** key.p
        out[(key.x, key.p)] = out.get((key.x, key.p), 0j) + value
    return out


def physical_wavefunction(
    state: GaussianState,
    params: ModelParams,
    order: int = 3,
    operators: Optional[Tuple[DifferentialOperator, DifferentialOperator]] = None,
) -> GaussianState:
    """Psi = (1 + eps L1 + eps^2 L2 + eps^3 L3) psi with L1 = -Q1/2, L2 = Q1^2/8, L3 = -Q3/2 - Q1^3/48."""
    if order not in (0, 1, 2, 3):
        raise DensityError(f"order must be 0..3, got {order}")
    q1, q3 = operators if operators is not None else (q1_operator(params), q3_operator(params))
    eps = params.epsilon

    result = state
    if order == 0 or eps == 0:
        return result
    q1_psi = state.apply(q1)
    result = result + q1_psi * (-0.5 * eps)
    if order >= 2:
        q1q1_psi = q1_psi.apply(q1)
        result = result + q1q1_psi * (eps ** 2 / 8)
    if order >= 3:
        third = state.apply(q3) * -0.5 + q1q1_psi.apply(q1) * (-1 / 48)
        result = result + third * eps ** 3
    return result


@dataclass
class DensityCurve:
    grid: np.ndarray
    psi_re: np.ndarray
    psi_im: np.ndarray
    rho: np.ndarray
    norm: float
    wavefunction: GaussianState

    def rows(self) -> List[Tuple[float, float, float, float]]:
        return list(zip(self.grid.tolist(), self.psi_re.tolist(), self.psi_im.tolist(), self.rho.tolist()))

    def density(self, x) -> np.ndarray:
        return np.abs(self.wavefunction(x)) ** 2 / self.norm

    def normalization_checks(self) -> Dict[str, float]:
        """Integral of rho by adaptive quadrature and by Gauss-Hermite, both over the whole line."""
        return {
            "quad": self.wavefunction.norm_squared_quad() / self.norm,
            "hermite": self.wavefunction.norm_squared_hermite() / self.norm,
        }


def default_grid() -> np.ndarray:
    return np.linspace(*DEFAULT_GRID)


def _validate_grid(grid: Sequence[float]) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise DensityError("grid needs at least two points")
    if not np.all(np.isfinite(grid)):
        raise DensityError("grid has non-finite points")
    if not np.all(np.diff(grid) > 0):
        raise DensityError("grid must be strictly increasing")
    return grid


def probability_density(
    state: GaussianState,
    params: ModelParams,
    order: int = 3,
    grid: Optional[Sequence[float]] = None,
) -> DensityCurve:
    grid = default_grid() if grid is None else _validate_grid(grid)
    psi = physical_wavefunction(state, params, order)
    norm = psi.norm_squared()
    if not norm > 0:
        raise DensityError("physical wavefunction has zero norm")
    values = psi(grid)
    rho = np.abs(values) ** 2 / norm
    logger.info(f"Density at eps = {params.epsilon}, order {order}: N = {norm:.12g}")
    return DensityCurve(
        grid=grid,
        psi_re=values.real,
        psi_im=values.imag,
        rho=rho,
        norm=norm,
        wavefunction=psi,
    )


def cauchy_apply(
    op: DifferentialOperator,
    f: Callable[[np.ndarray], np.ndarray],
    grid: Sequence[float],
    radius: float = 0.5,
    samples: int = 64,
) -> np.ndarray:
    """
    Apply ``op`` to an entire function sampled on circles around each grid point.

    f^(k)(x) = k! / r^k * (k-th FFT coefficient of f(x + r e^{i theta})).
    """
    grid = np.asarray(grid, dtype=float)
    theta = 2 * np.pi * np.arange(samples) / samples
    z = grid[:, None] + radius * np.exp(1j * theta)[None, :]
    coefficients = np.fft.fft(f(z), axis=1) / samples
    out = np.zeros(grid.shape, dtype=complex)
    for (j, k), c in op.items():
        if k >= samples // 2:
            raise DensityError(f"derivative order {k} needs more than {samples} samples")
        derivative = math.factorial(k) * coefficients[:, k] / radius ** k
        out += c * grid ** j * derivative
    return out
