"""Dyadic rationals (mantissa * 2**exponent) with exact directed rounding.

Dyadics are the endpoint type for all intervals in this package: addition,
subtraction and multiplication are exact, and rounding to a given number of
mantissa bits is an exact integer shift, so outward rounding never loses
soundness to the platform's floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

MIN_BITS = 16


def check_bits(bits: int) -> int:
    if not isinstance(bits, int) or bits < MIN_BITS:
        raise ValueError(f"precision must be an int >= {MIN_BITS} bits, got {bits!r}")
    return bits


@dataclass(frozen=True, slots=True)
class Dyadic:
    """Exact value m * 2**e with integer m, e."""

    m: int
    e: int

    def __post_init__(self) -> None:
        # canonical form: odd mantissa (or zero with e == 0)
        m, e = self.m, self.e
        if m == 0:
            if e != 0:
                object.__setattr__(self, "e", 0)
            return
        if m % 2 == 0:
            shift = (m & -m).bit_length() - 1
            object.__setattr__(self, "m", m >> shift)
            object.__setattr__(self, "e", e + shift)

    # -- construction -------------------------------------------------------

    @staticmethod
    def from_int(n: int) -> "Dyadic":
        return Dyadic(n, 0)

    @staticmethod
    def from_fraction_down(r: Fraction, bits: int) -> "Dyadic":
        """Largest dyadic with <= bits mantissa bits that is <= r."""
        return _from_fraction(r, bits, up=False)

    @staticmethod
    def from_fraction_up(r: Fraction, bits: int) -> "Dyadic":
        """Smallest dyadic with <= bits mantissa bits that is >= r."""
        return _from_fraction(r, bits, up=True)

    # -- exact arithmetic ----------------------------------------------------

    def __add__(self, other: "Dyadic") -> "Dyadic":
        e = min(self.e, other.e)
        return Dyadic((self.m << (self.e - e)) + (other.m << (other.e - e)), e)

    def __sub__(self, other: "Dyadic") -> "Dyadic":
        e = min(self.e, other.e)
        return Dyadic((self.m << (self.e - e)) - (other.m << (other.e - e)), e)

    def __mul__(self, other: "Dyadic") -> "Dyadic":
        return Dyadic(self.m * other.m, self.e + other.e)

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.m, self.e)

    def __abs__(self) -> "Dyadic":
        return Dyadic(abs(self.m), self.e)

    # -- comparisons (exact) -------------------------------------------------

    def _cmp(self, other: "Dyadic") -> int:
        d = self - other
        return (d.m > 0) - (d.m < 0)

    def __lt__(self, other: "Dyadic") -> bool:
        return self._cmp(other) < 0

    def __le__(self, other: "Dyadic") -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other: "Dyadic") -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other: "Dyadic") -> bool:
        return self._cmp(other) >= 0

    # -- rounding ------------------------------------------------------------

    def round_down(self, bits: int) -> "Dyadic":
        """Round towards -inf to at most `bits` mantissa bits. Exact when it fits."""
        excess = abs(self.m).bit_length() - bits
        if excess <= 0:
            return self
        return Dyadic(self.m >> excess, self.e + excess)

    def round_up(self, bits: int) -> "Dyadic":
        """Round towards +inf to at most `bits` mantissa bits. Exact when it fits."""
        excess = abs(self.m).bit_length() - bits
        if excess <= 0:
            return self
        return Dyadic(-((-self.m) >> excess), self.e + excess)

    # -- conversions ---------------------------------------------------------

    def as_fraction(self) -> Fraction:
        if self.e >= 0:
            return Fraction(self.m << self.e)
        return Fraction(self.m, 1 << -self.e)

    def __float__(self) -> float:
        # best-effort (display only); saturates on extreme exponents
        if self.m == 0:
            return 0.0
        mag = abs(self.m).bit_length() + self.e
        if mag > 1024:
            return math.inf if self.m > 0 else -math.inf
        if mag < -1100:
            return 0.0
        m, e = self.m, self.e
        excess = abs(m).bit_length() - 64
        if excess > 0:
            m >>= excess
            e += excess
        try:
            return math.ldexp(m, e)
        except OverflowError:
            return math.inf if self.m > 0 else -math.inf

    def is_zero(self) -> bool:
        return self.m == 0

    def sign(self) -> int:
        return (self.m > 0) - (self.m < 0)

    def floor(self) -> int:
        """Exact floor as a Python int."""
        if self.e >= 0:
            return self.m << self.e
        return self.m >> -self.e

    def ceil(self) -> int:
        return -((-self).floor())

    def log2_lower(self) -> int:
        """An integer k with 2**k <= self. Requires self > 0."""
        if self.m <= 0:
            raise ValueError("log2_lower requires a positive dyadic")
        return self.m.bit_length() - 1 + self.e

    def to_decimal(self, sig_digits: int = 24, round_up: bool = False) -> str:
        """Decimal string with outward directed rounding, exponent notation."""
        if self.m == 0:
            return "0"
        # decimal magnitude from the binary one; one digit of slack is fine
        mag10 = int(math.floor((abs(self.m).bit_length() + self.e) * 0.30103))
        scale = sig_digits - 1 - mag10
        num = abs(self.m) * (10**scale if scale > 0 else 1)
        den = 1 if scale >= 0 else 10**-scale
        if self.e >= 0:
            num <<= self.e
        else:
            den <<= -self.e
        neg = self.m < 0
        outward = round_up != neg  # away from zero exactly when rounding "up"
        q = -((-num) // den) if outward else num // den
        return f"{'-' if neg else ''}{q}e{-scale}"

    def to_wire(self) -> str:
        """Serialize as 'm*2^e' with decimal m and e."""
        return f"{self.m}*2^{self.e}"

    @staticmethod
    def from_wire(s: str) -> "Dyadic":
        m_str, _, e_str = s.partition("*2^")
        if not _:
            raise ValueError(f"not a dyadic wire string: {s!r}")
        return Dyadic(int(m_str), int(e_str))

    def __repr__(self) -> str:
        return f"Dyadic({self.m}, {self.e})"

    def __str__(self) -> str:
        return self.to_wire()


ZERO = Dyadic(0, 0)
ONE = Dyadic(1, 0)


def _from_fraction(r: Fraction, bits: int, up: bool) -> Dyadic:
    check_bits(bits)
    p, q = r.numerator, r.denominator
    if p == 0:
        return ZERO
    # scale so the quotient carries `bits` significant bits
    shift = bits - (abs(p).bit_length() - q.bit_length()) + 1
    if shift < 0:
        shift = 0
    num = p << shift
    if up:
        m = -((-num) // q)
    else:
        m = num // q
    d = Dyadic(m, -shift)
    return d.round_up(bits) if up else d.round_down(bits)


def dyadic_min(*xs: Dyadic) -> Dyadic:
    out = xs[0]
    for x in xs[1:]:
        if x < out:
            out = x
    return out


def dyadic_max(*xs: Dyadic) -> Dyadic:
    out = xs[0]
    for x in xs[1:]:
        if x > out:
            out = x
    return out
