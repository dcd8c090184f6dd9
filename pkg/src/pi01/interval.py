"""Certified interval arithmetic over dyadic endpoints.

Every operation returns an interval that contains the exact real result for
any reals drawn from its operands (containment soundness), with endpoints
rounded outward to the requested number of bits. Nothing here consults the
platform's floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Union

from .dyadic import Dyadic, ZERO, check_bits, dyadic_max, dyadic_min
from .errors import DomainError

Rational = Union[int, Fraction]


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed interval [lo, hi] with dyadic endpoints, lo <= hi."""

    lo: Dyadic
    hi: Dyadic

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints out of order: {self.lo} > {self.hi}")

    # -- construction -------------------------------------------------------

    @staticmethod
    def point(x: Union[int, Dyadic]) -> "Interval":
        d = Dyadic.from_int(x) if isinstance(x, int) else x
        return Interval(d, d)

    @staticmethod
    def from_endpoints(lo: Rational, hi: Rational, bits: int) -> "Interval":
        lo_f, hi_f = Fraction(lo), Fraction(hi)
        return Interval(Dyadic.from_fraction_down(lo_f, bits), Dyadic.from_fraction_up(hi_f, bits))

    # -- queries -------------------------------------------------------------

    def width(self) -> Dyadic:
        return self.hi - self.lo

    def contains(self, x: Rational) -> bool:
        xf = Fraction(x)
        return self.lo.as_fraction() <= xf <= self.hi.as_fraction()

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersect(self, other: "Interval") -> Optional["Interval"]:
        lo = dyadic_max(self.lo, other.lo)
        hi = dyadic_min(self.hi, other.hi)
        if lo > hi:
            return None
        return Interval(lo, hi)

    def strictly_below(self, other: "Interval") -> bool:
        return self.hi < other.lo

    def strictly_above(self, other: "Interval") -> bool:
        return self.lo > other.hi

    def is_point(self) -> bool:
        return self.lo == self.hi

    def sign_definite(self) -> int:
        """1 if every point > 0, -1 if every point < 0, else 0."""
        if self.lo.sign() > 0:
            return 1
        if self.hi.sign() < 0:
            return -1
        return 0

    def __float__(self) -> float:
        return (float(self.lo) + float(self.hi)) / 2.0

    def __repr__(self) -> str:
        return f"Interval[{self.lo}, {self.hi}]"

    # -- arithmetic ----------------------------------------------------------

    def round_out(self, bits: int) -> "Interval":
        check_bits(bits)
        return Interval(self.lo.round_down(bits), self.hi.round_up(bits))

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "Interval") -> "Interval":
        return Interval(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other: "Interval") -> "Interval":
        products = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Interval(dyadic_min(*products), dyadic_max(*products))

    def square(self) -> "Interval":
        if self.lo.sign() >= 0:
            return Interval(self.lo * self.lo, self.hi * self.hi)
        if self.hi.sign() <= 0:
            return Interval(self.hi * self.hi, self.lo * self.lo)
        return Interval(ZERO, dyadic_max(self.lo * self.lo, self.hi * self.hi))

    def abs(self) -> "Interval":
        if self.lo.sign() >= 0:
            return self
        if self.hi.sign() <= 0:
            return -self
        return Interval(ZERO, dyadic_max(-self.lo, self.hi))

    def scale_pow2(self, k: int) -> "Interval":
        """Exact multiplication by 2**k."""
        return Interval(Dyadic(self.lo.m, self.lo.e + k), Dyadic(self.hi.m, self.hi.e + k))


def iv_add(a: Interval, b: Interval, bits: int) -> Interval:
    return (a + b).round_out(bits)


def iv_sub(a: Interval, b: Interval, bits: int) -> Interval:
    return (a - b).round_out(bits)


def iv_mul(a: Interval, b: Interval, bits: int) -> Interval:
    return (a * b).round_out(bits)


def iv_neg(a: Interval, bits: int) -> Interval:
    return (-a).round_out(bits)


def iv_square(a: Interval, bits: int) -> Interval:
    return a.square().round_out(bits)


def iv_div(a: Interval, b: Interval, bits: int) -> Interval:
    check_bits(bits)
    if b.lo.sign() <= 0 <= b.hi.sign():
        raise DomainError("division by an interval containing zero")
    quotients_lo = []
    quotients_hi = []
    for num in (a.lo, a.hi):
        for den in (b.lo, b.hi):
            quotients_lo.append(_div_point(num, den, bits, up=False))
            quotients_hi.append(_div_point(num, den, bits, up=True))
    return Interval(dyadic_min(*quotients_lo), dyadic_max(*quotients_hi))


def _div_point(num: Dyadic, den: Dyadic, bits: int, up: bool) -> Dyadic:
    if num.is_zero():
        return ZERO
    shift = bits - (abs(num.m).bit_length() - abs(den.m).bit_length()) + 1
    if shift < 0:
        shift = 0
    n = num.m << shift
    d = den.m
    if up:
        q = -((-n) // d)  # ceiling, any sign combination
        return Dyadic(q, num.e - den.e - shift).round_up(bits)
    q = n // d  # Python floor division floors for any sign combination
    return Dyadic(q, num.e - den.e - shift).round_down(bits)


def iv_arith(op: str, a: Interval, b: Optional[Interval], bits: int) -> Interval:
    """Dispatch form kept for symmetry with the operation table; the named
    functions above are what internal callers use."""
    check_bits(bits)
    unary = {"neg": iv_neg, "square": iv_square}
    binary = {"add": iv_add, "sub": iv_sub, "mul": iv_mul, "div": iv_div}
    if op in unary:
        return unary[op](a, bits)
    if op in binary:
        if b is None:
            raise DomainError(f"operation {op!r} needs two operands")
        return binary[op](a, b, bits)
    raise DomainError(f"unknown interval operation {op!r}")


def iv_from_rational(r: Rational, bits: int) -> Interval:
    """Enclosure of an exact rational; exact (width 0) when r is dyadic."""
    check_bits(bits)
    rf = Fraction(r)
    return Interval(Dyadic.from_fraction_down(rf, bits), Dyadic.from_fraction_up(rf, bits))


def iv_sqrt(x: Interval, bits: int) -> Interval:
    """Enclosure of sqrt over x; requires lo(x) >= 0."""
    check_bits(bits)
    if x.lo.sign() < 0:
        raise DomainError("sqrt of an interval with a negative lower endpoint")
    return Interval(_sqrt_point(x.lo, bits, up=False), _sqrt_point(x.hi, bits, up=True))


def _sqrt_point(d: Dyadic, bits: int, up: bool) -> Dyadic:
    if d.is_zero():
        return ZERO
    # scale mantissa so the integer sqrt has ~bits+2 significant bits and the
    # exponent is even
    m, e = d.m, d.e
    target = 2 * (bits + 2)
    shift = target - m.bit_length()
    if shift < 0:
        shift = 0
    if (e - shift) % 2:
        shift += 1
    m <<= shift
    e -= shift
    r = math.isqrt(m)
    if up and r * r != m:
        r += 1
    out = Dyadic(r, e // 2)
    return out.round_up(bits) if up else out.round_down(bits)


def iv_pow_int(x: Interval, k: int, bits: int) -> Interval:
    """x**k for integer k >= 0 by repeated interval squaring."""
    if k < 0:
        raise DomainError("negative exponent: divide explicitly instead")
    out = Interval.point(1)
    base = x
    while k:
        if k & 1:
            out = iv_mul(out, base, bits)
        k >>= 1
        if k:
            base = iv_square(base, bits)
    return out


def iv_max(a: Interval, b: Interval) -> Interval:
    """Enclosure of max(s, t) over s in a, t in b."""
    return Interval(dyadic_max(a.lo, b.lo), dyadic_max(a.hi, b.hi))


@dataclass(frozen=True, slots=True)
class PrecisionPolicy:
    """Escalation schedule for certified comparisons.

    Evaluation starts at initial_bits and multiplies by growth (rational > 1)
    until max_bits; the sequence is finite by construction.
    """

    initial_bits: int = 96
    max_bits: int = 4096
    growth: Fraction = Fraction(2)

    def __post_init__(self) -> None:
        check_bits(self.initial_bits)
        if self.initial_bits > self.max_bits:
            raise ValueError("initial_bits must be <= max_bits")
        if Fraction(self.growth) <= 1:
            raise ValueError("growth must be > 1")

    def bit_schedule(self) -> Iterator[int]:
        bits = Fraction(self.initial_bits)
        g = Fraction(self.growth)
        while True:
            b = min(int(math.ceil(bits)), self.max_bits)
            yield b
            if b >= self.max_bits:
                return
            bits = bits * g


DEFAULT_POLICY = PrecisionPolicy()
