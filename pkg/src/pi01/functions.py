"""Certified elementary functions: natural log and exp over dyadic intervals.

Both are built from scratch on integer fixed-point series with explicit tail
bounds (atanh series for ln after reduction to [1,2), Taylor series for exp
after reduction by multiples of ln 2). No platform transcendental routines
are consulted, so the enclosures are sound by construction.
"""

from __future__ import annotations

from typing import Dict, Tuple

from .dyadic import Dyadic, check_bits
from .errors import CapacityError, DomainError
from .interval import Interval, iv_div, iv_mul

_LN2_CACHE: Dict[int, Tuple[int, int]] = {}

# exp() range reduction computes k ~ x/ln2; cap |x| so k stays a sane integer
EXP_MAGNITUDE_CAP_LOG2 = 62


def _ln2_fixed(scale: int) -> Tuple[int, int]:
    """Integer enclosure [lo, hi] of ln2 * 2**scale.

    ln 2 = 2*atanh(1/3) = sum_{k>=0} 2 / ((2k+1) * 3**(2k+1)); all terms are
    positive, and once a floored term reaches zero the remaining tail is below
    9/8 of one unit in the last place.
    """
    cached = _LN2_CACHE.get(scale)
    if cached is not None:
        return cached
    total = 0
    err = 0
    two_q = 2 << scale
    k = 0
    p3 = 3  # 3**(2k+1)
    while True:
        t = two_q // ((2 * k + 1) * p3)
        if t == 0:
            err += 2  # tail < (9/8) ulp
            break
        total += t
        err += 1  # floor loss
        k += 1
        p3 *= 9
    result = (total, total + err)
    _LN2_CACHE[scale] = result
    return result


def ln2_interval(bits: int) -> Interval:
    check_bits(bits)
    scale = bits + 8
    lo, hi = _ln2_fixed(scale)
    return Interval(Dyadic(lo, -scale), Dyadic(hi, -scale)).round_out(bits)


def ln_fixed(m: int, e: int, scale: int) -> Tuple[int, int]:
    """Integer enclosure [lo, hi] of ln(m * 2**e) * 2**scale for m > 0.

    Argument reduction to [1, 2) by exponent extraction, then the atanh
    series at z = (u-1)/(u+1) < 1/3 with a one-ulp-per-term error budget and
    a geometric tail bound.
    """
    bl = m.bit_length()
    t = bl - 1 + e  # value = u * 2**t with u = m / 2**(bl-1) in [1, 2)
    num = m - (1 << (bl - 1))
    den = m + (1 << (bl - 1))
    acc_lo = 0
    acc_hi = 0
    if num:
        # z = (u-1)/(u+1) in (0, 1/3); ln u = 2*atanh(z)
        zq, zr = divmod(num << scale, den)
        z_lo, z_hi = zq, zq + (1 if zr else 0)
        z2_lo = (z_lo * z_lo) >> scale
        z2_hi = ((z_hi * z_hi) >> scale) + 1
        p_lo, p_hi = z_lo, z_hi
        k = 0
        while True:
            acc_lo += p_lo // (2 * k + 1)
            acc_hi += p_hi // (2 * k + 1) + 1
            k += 1
            p_lo = (p_lo * z2_lo) >> scale
            p_hi = ((p_hi * z2_hi) >> scale) + 1
            if p_hi // (2 * k + 1) == 0:
                acc_hi += 2  # tail < (9/8) ulp since z**2 < 1/9
                break
        acc_lo *= 2
        acc_hi *= 2
    if t:
        l2_lo, l2_hi = _ln2_fixed(scale)
        if t > 0:
            acc_lo += t * l2_lo
            acc_hi += t * l2_hi
        else:
            acc_lo += t * l2_hi
            acc_hi += t * l2_lo
    return acc_lo, acc_hi


def _ln_enclosure(d: Dyadic, bits: int) -> Interval:
    """Enclosure of ln(d) for a single positive dyadic point."""
    if d.sign() <= 0:
        raise DomainError("ln of a nonpositive value")
    scale = bits + 10
    lo, hi = ln_fixed(d.m, d.e, scale)
    return Interval(Dyadic(lo, -scale), Dyadic(hi, -scale))


def iv_ln(x: Interval, bits: int) -> Interval:
    """Enclosure of ln over x; requires lo(x) > 0. Monotone in each endpoint."""
    check_bits(bits)
    if x.lo.sign() <= 0:
        raise DomainError("ln requires a strictly positive interval")
    lo_enc = _ln_enclosure(x.lo, bits)
    hi_enc = lo_enc if x.is_point() else _ln_enclosure(x.hi, bits)
    return Interval(lo_enc.lo, hi_enc.hi).round_out(bits)


def iv_ln_int(n: int, bits: int) -> Interval:
    """Enclosure of ln(n) for a positive integer."""
    if n <= 0:
        raise DomainError("ln requires a positive integer")
    return _ln_enclosure(Dyadic.from_int(n), bits).round_out(bits)


def _exp_enclosure(d: Dyadic, bits: int) -> Interval:
    """Enclosure of exp(d) for a single dyadic point."""
    if not d.is_zero():
        magnitude = abs(d.m).bit_length() + d.e  # |d| < 2**magnitude
        if magnitude > EXP_MAGNITUDE_CAP_LOG2:
            raise CapacityError(
                f"exp argument magnitude near 2**{magnitude} exceeds the "
                f"2**{EXP_MAGNITUDE_CAP_LOG2} reduction cap; roughly "
                f"{magnitude} working bits would be required"
            )
    work = bits + 12
    scale = work + 8
    l2_lo, l2_hi = _ln2_fixed(scale)
    # k = nearest integer to d / ln2 (any nearby integer keeps |r| small)
    if d.e + scale >= 0:
        di = d.m << (d.e + scale)
    else:
        di = d.m >> -(d.e + scale)
    k = (2 * di + l2_lo) // (2 * l2_lo)
    ln2_iv = Interval(Dyadic(l2_lo, -scale), Dyadic(l2_hi, -scale))
    r = Interval.point(d) - ln2_iv * Interval.point(k)
    # |r| <= ~0.5 + slack; Taylor sum exp(r) = sum r^j / j!
    one = Interval.point(1)
    acc = one
    term = one
    j = 0
    rho = max(abs(r.lo), abs(r.hi))  # dyadic bound on |r|
    if rho > Dyadic(7, -3):  # 0.875; cannot happen with a sane k
        raise CapacityError("exp range reduction failed to shrink the argument")
    while True:
        j += 1
        term = iv_mul(term, r, work)
        term = _iv_div_pos_int(term, j, work)
        acc = (acc + term).round_out(work)
        bound = max(abs(term.lo), abs(term.hi))
        # tail <= bound * rho/(j+1) * 1/(1 - rho/(j+2)) <= bound once j >= 2
        if j >= 2 and bound.is_zero():
            break
        if j >= 2 and bound.log2_lower() < -(work + 2):
            tail = Dyadic(2, bound.log2_lower())  # 2 * 2**floor(log2 bound) >= bound
            acc = Interval(acc.lo - tail, acc.hi + tail)
            break
    return acc.scale_pow2(k).round_out(bits)


def _iv_div_pos_int(a: Interval, n: int, bits: int) -> Interval:
    return iv_div(a, Interval.point(n), bits)


def iv_exp(x: Interval, bits: int) -> Interval:
    """Enclosure of exp over x. Monotone in each endpoint."""
    check_bits(bits)
    lo_enc = _exp_enclosure(x.lo, bits)
    hi_enc = lo_enc if x.is_point() else _exp_enclosure(x.hi, bits)
    return Interval(lo_enc.lo, hi_enc.hi)
