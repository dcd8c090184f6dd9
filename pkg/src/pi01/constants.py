"""Validated enclosures of the Euler-Mascheroni constant and of pi.

Both constants ship as embedded dyadic enclosures with a checksum. They were
produced by the generator functions in this module (run via
tools/gen_constants.py) using two independent published methods each side
could be recomputed from:

  gamma: (a) the Euler-Maclaurin expansion of H_N - ln N with Bernoulli-number
         correction terms and the enveloping remainder bound, at N = 1024;
         (b) Sweeney's exponential-integral method
         gamma = sum_{k>=1} (-1)^{k+1} n^k/(k*k!) - ln n - E1(n) with
         0 < E1(n) < e^-n / n, evaluated as an alternating series in exact
         fixed point.
  pi:    Machin's formula 16*atan(1/5) - 4*atan(1/239), with alternating
         series tails bounded by the first omitted term.

The embedded enclosures were cross-checked for mutual overlap before being
frozen. Requests beyond the validated caps raise CapacityError rather than
silently recomputing or degrading.
"""

from __future__ import annotations

import hashlib
import math
from fractions import Fraction
from functools import lru_cache
from typing import List

from .dyadic import Dyadic, check_bits
from .errors import CapacityError
from .interval import Interval, iv_from_rational
from .functions import iv_ln_int, ln2_interval

GAMMA_BITS_CAP = 1024
PI_BITS_CAP = 256


# -- generator: Bernoulli numbers -------------------------------------------


@lru_cache(maxsize=None)
def _bernoulli_upto(n: int) -> tuple:
    """Exact B_0..B_n (second kind, B_1 = -1/2) by the defining recurrence."""
    bs: List[Fraction] = [Fraction(1)]
    for m in range(1, n + 1):
        acc = Fraction(0)
        for j in range(m):
            acc += math.comb(m + 1, j) * bs[j]
        bs.append(-acc / (m + 1))
    return tuple(bs)


def bernoulli(n: int) -> Fraction:
    return _bernoulli_upto(n)[n]


# -- generator: gamma, method A (Euler-Maclaurin at N = 1024) ----------------


def gamma_euler_maclaurin(bits: int) -> Interval:
    """Enclosure of gamma from H_N - ln N with Bernoulli corrections.

    gamma = H_N - ln N - 1/(2N) + sum_{k=1}^{K} B_{2k}/(2k N^{2k}) + R with
    |R| <= |B_{2K+2}| / ((2K+2) N^{2K+2}); the Bernoulli asymptotic series for
    the digamma function envelopes its limit at real positive argument, so the
    first omitted term bounds the remainder.
    """
    check_bits(bits)
    wb = bits + 16
    n = 1024
    target = Fraction(1, 1 << wb)
    s = sum(Fraction(1, k) for k in range(1, n + 1)) - Fraction(1, 2 * n)
    k = 0
    while True:
        k += 1
        if 2 * k + 2 > 600:
            raise CapacityError("Euler-Maclaurin gamma: Bernoulli order cap hit")
        bern = _bernoulli_upto(2 * k + 2)
        s += bern[2 * k] / (2 * k * Fraction(n) ** (2 * k))
        rem = abs(bern[2 * k + 2]) / ((2 * k + 2) * Fraction(n) ** (2 * k + 2))
        if rem < target:
            break
    ln_n = ln2_interval(wb) * Interval.point(10)  # ln 1024 = 10 ln 2
    base = iv_from_rational(s, wb) - ln_n
    pad = Dyadic.from_fraction_up(rem, 32)
    return Interval(base.lo - pad, base.hi + pad).round_out(bits)


# -- generator: gamma, method B (Sweeney / exponential integral) -------------


def gamma_exponential_integral(bits: int) -> Interval:
    """Enclosure of gamma from Sweeney's method.

    gamma = sum_{k>=1} (-1)^{k+1} n^k/(k*k!) - ln n - E1(n), with
    0 < E1(n) < e^-n/n. n is chosen so the E1 band is below target precision;
    the alternating series is summed in exact integer fixed point (floor per
    term, one-ulp error tracking), with terms decreasing once k >= n.
    """
    check_bits(bits)
    guard = 16
    scale = bits + guard
    # e^-n/n < 2^-(bits+8) once n > (bits+9)*ln2
    n = int((bits + 10) * math.log(2)) + 2
    acc = 0
    err = 0
    num = 1  # n^k
    fact = 1  # k!
    k = 0
    sign = 1
    while True:
        k += 1
        num *= n
        fact *= k
        t = (num << scale) // (k * fact)
        if t == 0 and k > n:
            err += 1  # alternating tail below the first omitted term < 1 ulp
            break
        acc += sign * t
        err += 1
        sign = -sign
    # acc*2^-scale is within err ulps of the infinite sum
    series = Interval(Dyadic(acc - err, -scale), Dyadic(acc + err, -scale))
    ln_n = iv_ln_int(n, scale)
    # E1(n) in (0, e^-n/n) c (0, 2^-(bits+8))
    e1_hi = Dyadic(1, -(bits + 8))
    out = series - ln_n
    return Interval(out.lo - e1_hi, out.hi).round_out(bits)


# -- generator: pi (Machin) ---------------------------------------------------


def _atan_inv_fixed(q: int, scale: int) -> tuple:
    """Integer enclosure [lo, hi] of atan(1/q) * 2**scale for integer q >= 2."""
    acc_lo = 0
    acc_hi = 0
    k = 0
    qq = q * q
    denom_pow = q  # q^(2k+1)
    one = 1 << scale
    while True:
        t = one // ((2 * k + 1) * denom_pow)
        if t == 0:
            acc_hi += 1  # alternating tail bounded by first omitted term
            break
        if k % 2 == 0:
            acc_lo += t
            acc_hi += t + 1
        else:
            acc_lo -= t + 1
            acc_hi -= t
        k += 1
        denom_pow *= qq
    return acc_lo, acc_hi


def pi_machin(bits: int) -> Interval:
    """Enclosure of pi via 16*atan(1/5) - 4*atan(1/239)."""
    check_bits(bits)
    scale = bits + 12
    a5_lo, a5_hi = _atan_inv_fixed(5, scale)
    a239_lo, a239_hi = _atan_inv_fixed(239, scale)
    lo = 16 * a5_lo - 4 * a239_hi
    hi = 16 * a5_hi - 4 * a239_lo
    return Interval(Dyadic(lo, -scale), Dyadic(hi, -scale)).round_out(bits)


# -- embedded validated enclosures -------------------------------------------

# Generated by tools/gen_constants.py: gamma is the intersection of the two
# methods above at cap+64 bits (they agreed to one ulp at 2^-1056); pi is the
# Machin enclosure. Scales carry 32 guard bits past the serving caps.
_GAMMA_STORED = {
    "scale": 1056,
    "lo": 445670132523909671951026161101411842159257879247337856279143036924018704380915932201815083341368662444459876568668536126047787732971898914358795427473832174089191824600025413228532303638189290271717587942756012205363796387339002939992029467781445236150448645922516179550199025198058305647971726446092024940872481105678,
    "hi": 445670132523909671951026161101411842159257879247337856279143036924018704380915932201815083341368662444459876568668536126047787732971898914358795427473832174089191824600025413228532303638189290271717587942756012205363796387339002939992029467781445236150448645922516179550199025198058305647971726446092024940872481105679,
    "sha256": "b0145c7b647b37f7dbb6ae2b8cf0716b9d6ed7b0ffee302d656c874dcd48a9f8",
}

_PI_STORED = {
    "scale": 288,
    "lo": 1562387025964485694457739818426781157218896339048433338926897017367117390658661113143782,
    "hi": 1562387025964485694457739818426781157218896339048433338926897017367117390658661113143783,
    "sha256": "248204439323dc213e1d2da6f7d299109ce0bdbe2513d055bedaa24d19aac33e",
}


def _stored_checksum(entry: dict) -> str:
    payload = f"{entry['lo']}*2^-{entry['scale']}|{entry['hi']}*2^-{entry['scale']}"
    return hashlib.sha256(payload.encode()).hexdigest()


def _verified_interval(entry: dict, name: str) -> Interval:
    if _stored_checksum(entry) != entry["sha256"]:
        raise CapacityError(f"embedded {name} enclosure failed its checksum")
    s = entry["scale"]
    return Interval(Dyadic(entry["lo"], -s), Dyadic(entry["hi"], -s))


def gamma_enclosure(bits: int) -> Interval:
    """Enclosure of the Euler-Mascheroni constant, width <= 2**(8-bits).

    Serves outward roundings of the embedded validated value; requests beyond
    the validated cap fail loudly.
    """
    check_bits(bits)
    if bits > GAMMA_BITS_CAP:
        raise CapacityError(
            f"gamma is validated to {GAMMA_BITS_CAP} bits; {bits} requested"
        )
    return _verified_interval(_GAMMA_STORED, "gamma").round_out(bits)


def pi_enclosure(bits: int) -> Interval:
    """Enclosure of pi, validated to PI_BITS_CAP bits."""
    check_bits(bits)
    if bits > PI_BITS_CAP:
        raise CapacityError(f"pi is validated to {PI_BITS_CAP} bits; {bits} requested")
    return _verified_interval(_PI_STORED, "pi").round_out(bits)
