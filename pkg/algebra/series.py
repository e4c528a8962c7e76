"""
Truncated power series in the perturbation parameter with operator coefficients.
"""
from typing import Callable, Iterator, Optional, Sequence, Tuple, Union

from algebra.polynomial import OperatorPoly, commutator, multiply
from algebra.rational import GaussianRational, Scalar
from errors import AlgebraError


class EpsilonSeries:
    """sum_{k=0}^{order} coeffs[k] eps^k; products drop everything beyond ``order``."""

    __slots__ = ("order", "_coeffs")

    def __init__(self, coeffs: Sequence[OperatorPoly], order: Optional[int] = None):
        if order is None:
            order = len(coeffs) - 1
        if order < 0:
            raise AlgebraError("Series order must be nonnegative")
        padded = list(coeffs[: order + 1])
        padded += [OperatorPoly.zero()] * (order + 1 - len(padded))
        self.order = order
        self._coeffs: Tuple[OperatorPoly, ...] = tuple(padded)

    @classmethod
    def constant(cls, poly: OperatorPoly, order: int) -> "EpsilonSeries":
        return cls([poly], order)

    @classmethod
    def from_orders(cls, by_order: dict, order: int) -> "EpsilonSeries":
        coeffs = [by_order.get(k, OperatorPoly.zero()) for k in range(order + 1)]
        return cls(coeffs, order)

    @property
    def coeffs(self) -> Tuple[OperatorPoly, ...]:
        return self._coeffs

    def __getitem__(self, k: int) -> OperatorPoly:
        if k > self.order:
            raise AlgebraError(f"Order {k} is beyond the series truncation {self.order}")
        return self._coeffs[k]

    def __iter__(self) -> Iterator[OperatorPoly]:
        return iter(self._coeffs)

    def nonzero_orders(self) -> list:
        return [k for k, c in enumerate(self._coeffs) if c]

    def truncate(self, order: int) -> "EpsilonSeries":
        return EpsilonSeries(self._coeffs, min(order, self.order))

    def map(self, fn: Callable[[OperatorPoly], OperatorPoly]) -> "EpsilonSeries":
        return EpsilonSeries([fn(c) for c in self._coeffs], self.order)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EpsilonSeries):
            return NotImplemented
        return self.order == other.order and self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash((self.order, self._coeffs))

    def __neg__(self) -> "EpsilonSeries":
        return self.map(lambda c: -c)

    def __add__(self, other: "EpsilonSeries") -> "EpsilonSeries":
        order = min(self.order, other.order)
        return EpsilonSeries([self._coeffs[k] + other._coeffs[k] for k in range(order + 1)], order)

    def __sub__(self, other: "EpsilonSeries") -> "EpsilonSeries":
        return self + (-other)

    def __mul__(self, other: Union["EpsilonSeries", GaussianRational, int]) -> "EpsilonSeries":
        if isinstance(other, EpsilonSeries):
            return self._product(other, multiply)
        return self.scale(other)

    def __rmul__(self, other: Union[GaussianRational, int]) -> "EpsilonSeries":
        return self.scale(other)

    def scale(self, factor: Scalar) -> "EpsilonSeries":
        return self.map(lambda c: c.scale(factor))

    def __pow__(self, exponent: int) -> "EpsilonSeries":
        result = EpsilonSeries.constant(OperatorPoly.one(), self.order)
        for _ in range(exponent):
            result = result * self
        return result

    def commutator(self, other: "EpsilonSeries") -> "EpsilonSeries":
        return self._product(other, commutator)

    def _product(self, other: "EpsilonSeries", op) -> "EpsilonSeries":
        order = min(self.order, other.order)
        out = [OperatorPoly.zero() for _ in range(order + 1)]
        for a, ca in enumerate(self._coeffs[: order + 1]):
            if not ca:
                continue
            for b, cb in enumerate(other._coeffs[: order + 1 - a]):
                if cb:
                    out[a + b] = out[a + b] + op(ca, cb)
        return EpsilonSeries(out, order)

    def __repr__(self) -> str:
        parts = [f"({c!r}) eps^{k}" for k, c in enumerate(self._coeffs) if c]
        return " + ".join(parts) if parts else "0"


def as_series(value: Union[OperatorPoly, EpsilonSeries], order: int) -> EpsilonSeries:
    if isinstance(value, EpsilonSeries):
        return value.truncate(order)
    return EpsilonSeries.constant(value, order)


def bch_terms(b: Union[OperatorPoly, EpsilonSeries], a: EpsilonSeries, depth: int) -> list:
    """The nested commutators [..[b, a], ..., a]/n! for n = 0..depth, each truncated at a's order."""
    if depth < 1:
        raise AlgebraError(f"BCH depth must be at least 1, got {depth}")
    if a[0]:
        raise AlgebraError("BCH generator must have a vanishing eps^0 part")
    term = as_series(b, a.order)
    terms = [term]
    for n in range(1, depth + 1):
        term = term.commutator(a).scale(GaussianRational(1) / n)
        terms.append(term)
    return terms


def bch_conjugate(b: Union[OperatorPoly, EpsilonSeries], a: EpsilonSeries, depth: int) -> EpsilonSeries:
    """e^{-A} B e^{A} = B + [B, A] + [[B, A], A]/2! + ..., truncated at the order of A."""
    terms = bch_terms(b, a, depth)
    result = terms[0]
    for term in terms[1:]:
        result = result + term
    return result
