"""
Truncated harmonic-oscillator basis matrices of operator polynomials and their dense spectra.

    x = (a + a^dag) / sqrt(2M),   p = i sqrt(M/2) (a^dag - a)

Matrices are built at size N + pad and cut back to N x N so that ladder
truncation never reaches the kept block.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Union

import numpy as np
import scipy.linalg

from algebra import EpsilonSeries, OperatorPoly
from config import settings
from errors import SpectralError
from services.metric_solver import ModelParams, hamiltonian_series, solve_metric

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatrixRep:
    dim: int
    entries: np.ndarray
    basis_M: float
    pad: int


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    levels: int
    max_imag: float
    formula: List[float]
    deviations: List[float]
    basis: int
    pad: int
    hermitian_eigenvalues: List[complex] = field(default_factory=list)
    hermitian_gap: List[float] = field(default_factory=list)

    @property
    def lowest(self) -> np.ndarray:
        return self.eigenvalues[: self.levels]

    def is_real(self, tolerance: Optional[float] = None) -> bool:
        tolerance = settings.imag_tolerance if tolerance is None else tolerance
        return self.max_imag < tolerance

    def to_json(self) -> dict:
        payload = {
            "eigs": [[float(e.real), float(e.imag)] for e in self.lowest],
            "formula": self.formula,
            "dev": self.deviations,
            "max_imag": self.max_imag,
            "basis": self.basis,
            "pad": self.pad,
        }
        if self.hermitian_gap:
            payload["h_eigs"] = [[float(e.real), float(e.imag)] for e in self.hermitian_eigenvalues]
            payload["h_gap"] = self.hermitian_gap
        return payload


@lru_cache(maxsize=16)
def _ladder_blocks(size: int, mass: float):
    lower = np.diag(np.sqrt(np.arange(1, size, dtype=float)), 1)
    raise_ = lower.T
    x = (lower + raise_) / np.sqrt(2 * mass)
    p = 1j * np.sqrt(mass / 2) * (raise_ - lower)
    return x.astype(complex), p


def _power(base: np.ndarray, k: int, cache: dict) -> np.ndarray:
    if k not in cache:
        cache[k] = np.linalg.matrix_power(base, k)
    return cache[k]


def _flatten(a: Union[OperatorPoly, EpsilonSeries], epsilon: Optional[float]) -> dict:
    if isinstance(a, OperatorPoly):
        return {key: complex(c) for key, c in a.items()}
    if epsilon is None:
        raise SpectralError("an eps-series needs a value of epsilon to become a matrix")
    out = {}
    for k, poly in enumerate(a.coeffs):
        for key, c in poly.items():
            out[key] = out.get(key, 0j) + complex(c) * epsilon ** k
    return out


def matrix_of(
    a: Union[OperatorPoly, EpsilonSeries],
    N: int,
    M: Union[float, Fraction] = 1.0,
    pad: Optional[int] = None,
    epsilon: Optional[float] = None,
) -> MatrixRep:
    pad = settings.default_pad if pad is None else pad
    if N < 2:
        raise SpectralError(f"basis size must be at least 2, got {N}")
    terms = _flatten(a, epsilon)
    degree = max((j + k for j, k in terms), default=0)
    if pad < degree:
        raise SpectralError(f"pad {pad} is smaller than the polynomial degree {degree}")

    mass = float(M)
    size = N + pad
    x, p = _ladder_blocks(size, mass)
    x_cache, p_cache = {0: np.eye(size, dtype=complex)}, {0: np.eye(size, dtype=complex)}
    full = np.zeros((size, size), dtype=complex)
    for (j, k), c in terms.items():
        full += c * (_power(x, j, x_cache) @ _power(p, k, p_cache))
    return MatrixRep(dim=N, entries=full[:N, :N].copy(), basis_M=mass, pad=pad)


def eigenvalues(rep: Union[MatrixRep, np.ndarray]) -> np.ndarray:
    """All eigenvalues, sorted by real part then imaginary part."""
    entries = rep.entries if isinstance(rep, MatrixRep) else np.asarray(rep)
    if not np.all(np.isfinite(entries)):
        raise SpectralError("matrix has non-finite entries")
    try:
        values = scipy.linalg.eigvals(entries, check_finite=False)
    except np.linalg.LinAlgError as e:
        raise SpectralError(f"eigenvalue iteration did not converge: {e}")
    order = np.lexsort((values.imag, values.real))
    return values[order]


def expectation_values(a: OperatorPoly, M: Union[float, Fraction], levels: int, pad: Optional[int] = None) -> np.ndarray:
    """<n|a|n> for n < levels in the oscillator basis of frequency M."""
    degree = a.degree()
    pad = max(degree, settings.default_pad) if pad is None else pad
    rep = matrix_of(a, max(levels, 2), M, pad=pad)
    return np.diag(rep.entries)[:levels]


def spectrum_report(
    params: ModelParams,
    N: Optional[int] = None,
    levels: int = 5,
    pad: Optional[int] = None,
    include_hermitian: bool = True,
) -> SpectrumReport:
    """Lowest eigenvalues of H = H0 + eps H1 against M(n + 1/2) + (30n^2+30n+11) eps^2 / (8 M^4)."""
    from services.hermitian_map import hermitian_equivalent, perturbative_energy

    N = settings.default_basis if N is None else N
    pad = settings.default_pad if pad is None else pad
    if levels > N:
        raise SpectralError(f"cannot report {levels} levels from a basis of {N}")
    if levels > N // 10:
        logger.warning(f"{levels} levels from N = {N}: upper levels may not be converged")

    mass = params.mass_fraction()
    eps = params.scaled_coupling
    h_series = hamiltonian_series(mass, 1)
    values = eigenvalues(matrix_of(h_series, N, mass, pad=pad, epsilon=eps))
    lowest = values[:levels]
    formula = [perturbative_energy(n, params) for n in range(levels)]
    deviations = [float(abs(e.real - f)) for e, f in zip(lowest, formula)]
    report = SpectrumReport(
        eigenvalues=values,
        levels=levels,
        max_imag=float(np.max(np.abs(lowest.imag))) if levels else 0.0,
        formula=formula,
        deviations=deviations,
        basis=N,
        pad=pad,
    )

    if include_hermitian:
        expansion = hermitian_equivalent(solve_metric(3, mass))
        h_all = eigenvalues(matrix_of(expansion.series, N, mass, pad=pad, epsilon=eps))
        # h through eps^4 carries -x^6 and is unbounded below, so its lowest matrix
        # eigenvalues are edge states; pair each level of H with its nearest h eigenvalue
        h_values = [h_all[int(np.argmin(np.abs(h_all - e)))] for e in lowest]
        report.hermitian_eigenvalues = h_values
        report.hermitian_gap = [float(abs(a - b)) for a, b in zip(lowest, h_values)]

    logger.info(f"Spectrum at eps = {eps}, N = {N}: max |Im| = {report.max_imag:.3e}")
    return report
