"""Certified enclosures of harmonic numbers H_m = sum_{k<=m} 1/k.

Two routes are provided and cross-validated in the tests:

  harmonic_direct      exact O(m) fixed-point summation; the oracle route.
  harmonic_asymptotic  Euler-Maclaurin through the 1/(12 m^2) term with the
                       enveloping remainder in [0, 1/(120 m^4)], usable when m
                       is only known through an enclosure of ln m and a lower
                       bound (the regime that matters here: m = delta(n) is of
                       order e^(n^2/2) and cannot be summed or even written
                       down).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .constants import gamma_enclosure
from .dyadic import Dyadic, check_bits
from .errors import CapacityError, DomainError
from .interval import Interval, iv_from_rational

HARMONIC_DIRECT_CAP = 10**9
_CHUNK = 1 << 16


def harmonic_direct(m: int, bits: int, cap: int = HARMONIC_DIRECT_CAP) -> Interval:
    """Enclosure of H_m by direct summation.

    Sums floor(2**s / k), giving H_m in [S, S + m] * 2**-s exactly; s is
    chosen so the slack m * 2**-s stays below the requested precision.
    """
    check_bits(bits)
    if m < 1:
        raise DomainError("harmonic numbers need m >= 1")
    if m > cap:
        raise CapacityError(f"harmonic_direct capped at m <= {cap}, got {m}")
    scale = bits + m.bit_length() + 1
    q = 1 << scale
    fd = q.__floordiv__
    total = 0
    k = 1
    while k <= m:
        hi = min(k + _CHUNK, m + 1)
        total += sum(map(fd, range(k, hi)))
        k = hi
    return Interval(Dyadic(total, -scale), Dyadic(total + m, -scale)).round_out(bits)


def harmonic_asymptotic(
    ln_m: Interval,
    m_lower: Optional[int] = None,
    bits: int = 96,
    *,
    m_exact: Optional[int] = None,
    m_lower_log2: Optional[int] = None,
) -> Interval:
    """Enclosure of H_m from an enclosure of ln m and a lower bound on m.

    H_m = ln m + gamma + 1/(2m) - 1/(12 m^2) + R with R in [0, 1/(120 m^4)].
    When m itself is known pass m_exact for tight correction terms; when m is
    astronomically large pass m_lower_log2 = k certifying m >= 2**k, and the
    corrections collapse to dyadic pads with no giant integers materialized.
    """
    check_bits(bits)
    if m_exact is not None:
        if m_exact < 10:
            raise DomainError("Euler-Maclaurin route validated for m >= 10 only")
        correction = iv_from_rational(
            Fraction(1, 2 * m_exact) - Fraction(1, 12 * m_exact * m_exact), bits + 8
        )
        rem_hi = Dyadic.from_fraction_up(Fraction(1, 120 * m_exact**4), 32)
        correction = Interval(correction.lo, correction.hi + rem_hi)
    elif m_lower_log2 is not None:
        k = m_lower_log2
        if k < 4:  # 2**4 = 16 >= 10
            raise DomainError("m_lower_log2 must certify m >= 16")
        # 1/(2m) in (0, 2^-(k+1)]; -1/(12 m^2) in [-2^-(2k+3), 0);
        # R in [0, 2^-(4k+6)]. The pads only need to dominate these, so clamp
        # their exponents to the working scale: without the clamp, exact
        # dyadic alignment against 2^-(2k+3) would materialize mantissas of
        # ~2k bits (k is of order n^2 here).
        floor_exp = bits + 64
        lo_pad = -Dyadic(1, -min(2 * k + 3, floor_exp))
        hi_pad = Dyadic(1, -min(k, floor_exp))  # >= 2^-(k+1) + 2^-(4k+6)
        correction = Interval(lo_pad, hi_pad)
    else:
        if m_lower is None:
            raise DomainError("harmonic_asymptotic needs m_exact, m_lower, or m_lower_log2")
        if m_lower < 10:
            raise DomainError("Euler-Maclaurin remainder bound validated for m >= 10 only")
        lo_pad = Dyadic.from_fraction_down(-Fraction(1, 12 * m_lower * m_lower), 32)
        hi_pad = Dyadic.from_fraction_up(
            Fraction(1, 2 * m_lower) + Fraction(1, 120 * m_lower**4), 32
        )
        correction = Interval(lo_pad, hi_pad)
    out = ln_m + gamma_enclosure(min(bits + 8, 1024)) + correction
    return out.round_out(bits)
