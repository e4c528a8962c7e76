from enum import Enum


class SymmetryKind(str, Enum):
    """Discrete symmetries acting on normal-ordered monomials c x^j p^k."""
    PARITY = "parity"
    TIME_REVERSAL = "time_reversal"
    PT = "pt"

    def sign(self, xexp: int, pexp: int) -> int:
        if self is SymmetryKind.PARITY:
            flips = xexp + pexp
        elif self is SymmetryKind.TIME_REVERSAL:
            flips = pexp
        else:
            flips = xexp
        return -1 if flips % 2 else 1

    @property
    def antilinear(self) -> bool:
        return self is not SymmetryKind.PARITY
