"""Exact dyadic rationals: integers divided by powers of two.

Values are kept reduced (odd numerator unless the exponent is zero), so
equality is structural and hashing is safe.  Addition, subtraction,
multiplication and scaling by powers of two are closed; comparison is
exact integer arithmetic.  No floats anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import total_ordering


@total_ordering
@dataclass(frozen=True)
class DyadicRational:
    """``numerator / 2**exponent`` in reduced form."""

    numerator: int
    exponent: int = 0

    def __post_init__(self):
        if self.exponent < 0:
            object.__setattr__(self, "numerator", self.numerator << -self.exponent)
            object.__setattr__(self, "exponent", 0)
        num, exp = self.numerator, self.exponent
        while exp > 0 and num % 2 == 0:
            num //= 2
            exp -= 1
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "exponent", exp)

    @classmethod
    def from_int(cls, n: int) -> DyadicRational:
        return cls(n, 0)

    def __add__(self, other: DyadicRational | int) -> DyadicRational:
        other = _coerce(other)
        e = max(self.exponent, other.exponent)
        num = (self.numerator << (e - self.exponent)) + \
              (other.numerator << (e - other.exponent))
        return DyadicRational(num, e)

    def __radd__(self, other):
        return self + other

    def __neg__(self) -> DyadicRational:
        return DyadicRational(-self.numerator, self.exponent)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other: DyadicRational | int) -> DyadicRational:
        other = _coerce(other)
        return DyadicRational(self.numerator * other.numerator,
                              self.exponent + other.exponent)

    def __rmul__(self, other):
        return self * other

    def scale_pow2(self, k: int) -> DyadicRational:
        """Multiply by ``2**k`` (k may be negative)."""
        if k >= 0:
            return DyadicRational(self.numerator << k, self.exponent)
        return DyadicRational(self.numerator, self.exponent - k)

    def __lt__(self, other) -> bool:
        other = _coerce(other)
        e = max(self.exponent, other.exponent)
        return (self.numerator << (e - self.exponent)) < \
               (other.numerator << (e - other.exponent))

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = DyadicRational(other)
        if not isinstance(other, DyadicRational):
            return NotImplemented
        return (self.numerator, self.exponent) == (other.numerator, other.exponent)

    def __hash__(self):
        return hash((self.numerator, self.exponent))

    def compare(self, other) -> int:
        other = _coerce(other)
        if self < other:
            return -1
        if other < self:
            return 1
        return 0

    @property
    def is_integer(self) -> bool:
        return self.exponent == 0

    def decimal_str(self) -> str:
        """Exact decimal representation (denominators 2^k divide 10^k)."""
        if self.exponent == 0:
            return str(self.numerator)
        scaled = self.numerator * 5 ** self.exponent
        text = str(abs(scaled)).rjust(self.exponent + 1, "0")
        head, tail = text[:-self.exponent], text[-self.exponent:]
        sign = "-" if scaled < 0 else ""
        return f"{sign}{head}.{tail}"

    def __repr__(self):
        if self.exponent == 0:
            return f"Dyadic({self.numerator})"
        return f"Dyadic({self.numerator}/2^{self.exponent})"

    def __str__(self):
        return self.decimal_str()


def _coerce(x) -> DyadicRational:
    if isinstance(x, DyadicRational):
        return x
    if isinstance(x, int):
        return DyadicRational(x)
    raise TypeError(f"cannot mix DyadicRational with {type(x).__name__}")
