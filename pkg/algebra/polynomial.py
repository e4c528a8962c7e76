"""
Normal-ordered polynomials in the Weyl algebra generated by x, p with [x, p] = i.

Every monomial is stored as x^j p^k (all x factors left of all p factors).
Products are re-ordered with

    p^b x^c = sum_k  k! C(b, k) C(c, k) (-i)^k  x^(c-k) p^(b-k)
"""
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Dict, Iterable, Iterator, Mapping, Tuple, Union

from algebra.rational import ONE, ZERO, GaussianRational, Scalar, i_power
from algebra.symmetry import SymmetryKind
from errors import AlgebraError

Key = Tuple[int, int]


@lru_cache(maxsize=None)
def reorder(pexp: int, xexp: int) -> Tuple[Tuple[GaussianRational, int, int], ...]:
    """Normal-ordered expansion of p^pexp x^xexp as (coeff, xexp', pexp') triples."""
    out = []
    for k in range(min(pexp, xexp) + 1):
        coeff = i_power(3 * k) * (factorial(k) * comb(pexp, k) * comb(xexp, k))
        out.append((coeff, xexp - k, pexp - k))
    return tuple(out)


class OperatorPoly:
    __slots__ = ("_terms",)

    def __init__(self, terms: Union[Mapping[Key, Scalar], Iterable[Tuple[Key, Scalar]]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: Dict[Key, GaussianRational] = {}
        for (xexp, pexp), coeff in items:
            if xexp < 0 or pexp < 0:
                raise AlgebraError(f"Negative exponent in monomial x^{xexp} p^{pexp}")
            acc[(xexp, pexp)] = acc.get((xexp, pexp), ZERO) + GaussianRational.of(coeff)
        self._terms = {key: acc[key] for key in sorted(acc) if acc[key]}

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls) -> "OperatorPoly":
        return cls()

    @classmethod
    def scalar(cls, value: Scalar) -> "OperatorPoly":
        return cls({(0, 0): value})

    @classmethod
    def one(cls) -> "OperatorPoly":
        return cls.scalar(ONE)

    @classmethod
    def monomial(cls, coeff: Scalar, xexp: int, pexp: int) -> "OperatorPoly":
        return cls({(xexp, pexp): coeff})

    @classmethod
    def x(cls, power: int = 1) -> "OperatorPoly":
        return cls.monomial(ONE, power, 0)

    @classmethod
    def p(cls, power: int = 1) -> "OperatorPoly":
        return cls.monomial(ONE, 0, power)

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> Dict[Key, GaussianRational]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[Key, GaussianRational]]:
        return iter(self._terms.items())

    def coefficient(self, xexp: int, pexp: int) -> GaussianRational:
        return self._terms.get((xexp, pexp), ZERO)

    def degree(self) -> int:
        return max((j + k for j, k in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, OperatorPoly):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self == OperatorPoly.scalar(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(self._terms.items()))

    # -- arithmetic -------------------------------------------------------
    def __neg__(self) -> "OperatorPoly":
        return OperatorPoly({k: -c for k, c in self._terms.items()})

    def __add__(self, other) -> "OperatorPoly":
        other = _coerce(other)
        return OperatorPoly(list(self._terms.items()) + list(other._terms.items()))

    __radd__ = __add__

    def __sub__(self, other) -> "OperatorPoly":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "OperatorPoly":
        return _coerce(other) - self

    def __mul__(self, other) -> "OperatorPoly":
        if isinstance(other, OperatorPoly):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other) -> "OperatorPoly":
        if isinstance(other, OperatorPoly):
            return multiply(other, self)
        return self.scale(other)

    def __truediv__(self, other: Scalar) -> "OperatorPoly":
        return self.scale(ONE / GaussianRational.of(other))

    def __pow__(self, exponent: int) -> "OperatorPoly":
        if exponent < 0:
            raise AlgebraError("Operator polynomials have no inverse powers")
        result = OperatorPoly.one()
        for _ in range(exponent):
            result = multiply(result, self)
        return result

    def scale(self, factor: Scalar) -> "OperatorPoly":
        factor = GaussianRational.of(factor)
        return OperatorPoly({k: c * factor for k, c in self._terms.items()})

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        return {"terms": [{"x": j, "p": k, **c.to_json()} for (j, k), c in self._terms.items()]}

    @classmethod
    def from_json(cls, payload: Mapping) -> "OperatorPoly":
        return cls(
            ((int(t["x"]), int(t["p"])), GaussianRational.parse(t["re"], t["im"]))
            for t in payload["terms"]
        )

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (j, k), c in self._terms.items():
            factors = [f"x^{j}" if j > 1 else "x"] if j else []
            factors += [f"p^{k}" if k > 1 else "p"] if k else []
            parts.append(" ".join([repr(c)] + factors))
        return " + ".join(parts)


def _coerce(value) -> OperatorPoly:
    if isinstance(value, OperatorPoly):
        return value
    return OperatorPoly.scalar(value)


def multiply(a: OperatorPoly, b: OperatorPoly) -> OperatorPoly:
    """Normal-ordered product a·b."""
    acc: Dict[Key, GaussianRational] = {}
    for (j1, k1), c1 in a.items():
        for (j2, k2), c2 in b.items():
            base = c1 * c2
            for coeff, xx, pp in reorder(k1, j2):
                key = (j1 + xx, pp + k2)
                acc[key] = acc.get(key, ZERO) + base * coeff
    return OperatorPoly(acc)


def commutator(a: OperatorPoly, b: OperatorPoly, anti: bool = False) -> OperatorPoly:
    """[a, b] = ab - ba, or {a, b} = ab + ba when ``anti`` is set."""
    if anti:
        return multiply(a, b) + multiply(b, a)
    return multiply(a, b) - multiply(b, a)


def anticommutator(a: OperatorPoly, b: OperatorPoly) -> OperatorPoly:
    return commutator(a, b, anti=True)


def nested_commutator(b: OperatorPoly, *others: OperatorPoly) -> OperatorPoly:
    """[[[b, a1], a2], ...]."""
    for a in others:
        b = commutator(b, a)
    return b


def adjoint(a: OperatorPoly) -> OperatorPoly:
    acc: Dict[Key, GaussianRational] = {}
    for (j, k), c in a.items():
        conj = c.conjugate()
        for coeff, xx, pp in reorder(k, j):
            key = (xx, pp)
            acc[key] = acc.get(key, ZERO) + conj * coeff
    return OperatorPoly(acc)


def is_hermitian(a: OperatorPoly) -> bool:
    return adjoint(a) == a


def is_anti_hermitian(a: OperatorPoly) -> bool:
    return adjoint(a) == -a


def symmetry_transform(a: OperatorPoly, kind: SymmetryKind) -> OperatorPoly:
    out = {}
    for (j, k), c in a.items():
        coeff = c.conjugate() if kind.antilinear else c
        out[(j, k)] = coeff * kind.sign(j, k)
    return OperatorPoly(out)


PositionPoly = Dict[int, GaussianRational]


def apply_to_polynomial(a: OperatorPoly, f: Mapping[int, Scalar]) -> PositionPoly:
    """Position representation with p = -i d/dx, acting on sum_n f[n] x^n."""
    acc: Dict[int, GaussianRational] = {}
    for (j, k), c in a.items():
        factor = c * i_power(3 * k)
        for n, fn in f.items():
            if n < k:
                continue
            value = GaussianRational.of(fn) * factor * (factorial(n) // factorial(n - k))
            power = n - k + j
            acc[power] = acc.get(power, ZERO) + value
    return {n: acc[n] for n in sorted(acc) if acc[n]}
