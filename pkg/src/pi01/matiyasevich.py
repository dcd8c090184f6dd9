"""The psi(n) gap criterion, the explog decision procedure, and the
counterexample system of the second reformulation.

explog(a, b) asks for an integer x > b+1 with
(1+1/x)^(xb) <= a+1 < 4 (1+1/x)^(xb). L_b(x) = (1+1/x)^(xb) is nondecreasing
in x with supremum e^b and step ratio L_b(x+1)/L_b(x) < 4 on x >= b+2, which
turns the unbounded search into a two-sided test: explog(a, b) holds iff
L_b(b+2) <= a+1 and a+1 < 4 e^b. Witnesses come from the first x with
4 L_b(x) > a+1, located by bisection on that monotone predicate (equivalent
to the ascending scan, which is infeasible when the margin b + ln4 - ln(a+1)
is tiny). Rational comparisons are exact for small exponents and decided by
certified interval logs otherwise, with an exact fallback on straddle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from .dyadic import Dyadic
from .errors import CapacityError, DomainError
from .functions import iv_ln, iv_ln_int
from .interval import DEFAULT_POLICY, Interval, PrecisionPolicy, iv_from_rational, iv_mul, iv_sqrt
from .sieve import ChebyshevTable
from .verdict import Outcome, Verdict, certified_strict_less

PSI_GAP_MIN_N = 600
_EXACT_POW_BIT_CAP = 400_000  # affordable exact rational L_b(x) comparisons


class ExplogRefutation(Enum):
    MIN_TOO_LARGE = "min_too_large"  # L_b(b+2) > a+1
    LIMIT_TOO_SMALL = "limit_too_small"  # a+1 >= 4 e^b


@dataclass(frozen=True)
class ExplogResult:
    holds: bool
    witness_x: Optional[int] = None
    refutation: Optional[ExplogRefutation] = None


@dataclass(frozen=True)
class MatSystem:
    k: int
    l: int
    m: int
    n: int


# -- exact / certified comparison helpers --------------------------------------


def _exact_pow_cost(x: int, b: int) -> int:
    return x * b * (x + 1).bit_length()


def _lb_le_exact(x: int, b: int, t: int, factor: int = 1) -> bool:
    """Exact test of factor * L_b(x) <= t, i.e. factor*(x+1)^(xb) <= t*x^(xb)."""
    e = x * b
    return factor * (x + 1) ** e <= t * x**e


def _cmp_ln_certified(
    ln_lhs_parts, ln_rhs_parts, policy: PrecisionPolicy
) -> Optional[bool]:
    """Certified comparison lhs < rhs of two log-space values, each given as a
    callable bits -> Interval. Returns True/False, or None if undecidable at
    max precision."""
    for bits in policy.bit_schedule():
        lhs = ln_lhs_parts(bits)
        rhs = ln_rhs_parts(bits)
        if lhs.hi < rhs.lo:
            return True
        if lhs.lo > rhs.hi:
            return False
    return None


def _ln_lb(x: int, b: int, bits: int) -> Interval:
    """Enclosure of ln L_b(x) = x*b*ln((x+1)/x)."""
    ratio = iv_from_rational(Fraction(x + 1, x), bits + 8)
    return iv_mul(Interval.point(x * b), iv_ln(ratio, bits + 8), bits)


def _ln_int_plus(t: int, bits: int) -> Interval:
    return iv_ln_int(t, bits)


def _ln4(bits: int) -> Interval:
    return iv_ln_int(4, bits)


def _decide_min_condition(a: int, b: int, policy: PrecisionPolicy) -> bool:
    """L_b(b+2) <= a+1, exactly or by certified logs with exact fallback."""
    x = b + 2
    t = a + 1
    if _exact_pow_cost(x, b) <= _EXACT_POW_BIT_CAP:
        return _lb_le_exact(x, b, t)
    # L <= t <=> not (t < L); no equality is possible for b >= 1
    res = _cmp_ln_certified(
        lambda bits: _ln_int_plus(t, bits), lambda bits: _ln_lb(x, b, bits), policy
    )
    if res is None:
        return _lb_le_exact(x, b, t)  # exact fallback on persistent straddle
    return not res  # t < L is False  ->  L <= t


def _decide_limit_condition(a: int, b: int, policy: PrecisionPolicy) -> bool:
    """a+1 < 4 e^b by certified logs: ln(a+1) < b + ln 4. Exact at b = 0."""
    t = a + 1
    if b == 0:
        return t < 4
    res = _cmp_ln_certified(
        lambda bits: _ln_int_plus(t, bits),
        lambda bits: (Interval.point(b) + _ln4(bits)).round_out(bits),
        policy,
    )
    if res is None:
        raise CapacityError(
            f"could not separate {t} from 4*e^{b} at max precision"
        )
    return res


def _four_lb_gt(x: int, b: int, t: int, policy: PrecisionPolicy) -> bool:
    """4 L_b(x) > t, certified with exact fallback."""
    if _exact_pow_cost(x, b) <= _EXACT_POW_BIT_CAP:
        return not _lb_le_exact(x, b, t, factor=4)
    res = _cmp_ln_certified(
        lambda bits: _ln_int_plus(t, bits),
        lambda bits: (_ln4(bits) + _ln_lb(x, b, bits)).round_out(bits),
        policy,
    )
    if res is None:
        return not _lb_le_exact(x, b, t, factor=4)
    return res


def explog_holds(
    a: int, b: int, policy: PrecisionPolicy = DEFAULT_POLICY
) -> ExplogResult:
    """Exact decision of explog(a, b), with a witness when it holds."""
    if a < 0 or b < 0:
        raise DomainError("explog is defined over nonnegative integers")
    if b == 0:
        # L_b(x) = 1 for every x; condition is 1 <= a+1 < 4
        if a + 1 < 4:
            return ExplogResult(True, witness_x=2)
        return ExplogResult(False, refutation=ExplogRefutation.LIMIT_TOO_SMALL)
    if not _decide_limit_condition(a, b, policy):
        return ExplogResult(False, refutation=ExplogRefutation.LIMIT_TOO_SMALL)
    if not _decide_min_condition(a, b, policy):
        return ExplogResult(False, refutation=ExplogRefutation.MIN_TOO_LARGE)
    witness = _find_witness(a, b, policy)
    return ExplogResult(True, witness_x=witness)


def _find_witness(a: int, b: int, policy: PrecisionPolicy) -> int:
    """First x >= b+2 with 4 L_b(x) > a+1 (it satisfies both inequalities:
    L is nondecreasing with step ratio < 4 on this range)."""
    t = a + 1
    lo = b + 2
    if _four_lb_gt(lo, b, t, policy):
        return lo
    hi = lo * 2
    while not _four_lb_gt(hi, b, t, policy):
        hi *= 2
        if hi > 1 << 80:
            raise CapacityError("explog witness bracket exploded; inputs inconsistent")
    # smallest x in (lo, hi] with the predicate true
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _four_lb_gt(mid, b, t, policy):
            hi = mid
        else:
            lo = mid
    return hi


def explog_find_b(a: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> int:
    """Least b with explog(a, b); terminates for every a.

    Equivalent to the ascending search from b = 0: any holding b satisfies
    |b - ln(a+1)| < 2, so scanning starts at the first integer that bound
    allows rather than literally at zero.
    """
    if a < 0:
        raise DomainError("explog is defined over nonnegative integers")
    ln_t = iv_ln_int(a + 1, 96)
    start = max(0, ln_t.lo.floor() - 2)
    limit = ln_t.hi.ceil() + 3
    for b in range(start, limit + 1):
        if explog_holds(a, b, policy).holds:
            return b
    raise CapacityError(f"no b found for a={a} in the bound-implied window")


# -- bounded-quantifier common-multiple predicates ------------------------------


def common_multiple_check(m: int, n: int) -> Tuple[bool, bool]:
    """(is_common, is_least) for m against 1..n.

    is_common is the bounded formula 'for all y < n: (y+1) | m' evaluated
    literally (vacuously true at m = 0 since every y+1 divides 0). is_least
    additionally requires m > 0 and m = lcm(1..n); the equivalence of that
    equality with the paper-style bounded formula (the least counterexample y
    is lcm(1..n) itself) is property-tested against brute force, not assumed.
    """
    if n < 1:
        raise DomainError("need n >= 1")
    is_common = all(m % (y + 1) == 0 for y in range(n))
    if not is_common:
        return False, False
    is_least = m > 0 and m == math.lcm(*range(1, n + 1))
    return is_common, is_least


# -- the gap criterion ----------------------------------------------------------


def _gap_sides(n: int, table: ChebyshevTable, bits: int) -> Tuple[Interval, Interval]:
    lhs = (table.psi(n, bits) - Interval.point(n)).abs().round_out(bits)
    ln_n = iv_ln_int(n, bits + 8)
    rhs = iv_mul(iv_sqrt(Interval.point(n), bits + 8), ln_n.square(), bits)
    return lhs, rhs


def psi_gap_check(
    n: int,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    table: Optional[ChebyshevTable] = None,
) -> Verdict:
    """Certified verdict on |psi(n) - n| < sqrt(n) * ln(n)^2 for n >= 600."""
    if n < PSI_GAP_MIN_N:
        raise DomainError(f"the gap criterion applies for n >= {PSI_GAP_MIN_N}")
    if table is None or table.N < n:
        raise DomainError("a sieve table covering n is required")
    verdict = None
    for bits in policy.bit_schedule():
        lhs, rhs = _gap_sides(n, table, bits)
        verdict = certified_strict_less(lhs, rhs, bits)
        if not verdict.is_undecided:
            return verdict
    return verdict


@dataclass
class GapSweepReport:
    n_lo: int
    n_hi: int
    holds: int
    fails: int
    undecided: int
    first_non_holds: Optional[int]


def psi_gap_sweep(
    n_lo: int,
    n_hi: int,
    table: ChebyshevTable,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    block: int = 4096,
) -> GapSweepReport:
    """Certified sweep of the gap criterion over [n_lo, n_hi].

    Blocks are certified in bulk: the right side is monotone increasing, so
    its certified value at the block start bounds it below throughout, and
    the int64 fixed-point psi prefix bounds the left side above at every n.
    Blocks that fail the bulk test fall back to per-n certified checks.
    """
    if n_lo < PSI_GAP_MIN_N:
        raise DomainError(f"the gap criterion applies for n >= {PSI_GAP_MIN_N}")
    if n_hi > table.N:
        raise DomainError("sieve table too small for the requested sweep")
    pos, cum_lo, cum_hi = table.psi_fixed32()
    cum_lo0 = np.concatenate(([0], cum_lo))
    cum_hi0 = np.concatenate(([0], cum_hi))
    holds = fails = undecided = 0
    first_bad: Optional[int] = None
    n = n_lo
    while n <= n_hi:
        top = min(n + block - 1, n_hi)
        ns = np.arange(n, top + 1, dtype=np.int64)
        idx = np.searchsorted(pos, ns, side="right")
        scaled_n = ns << 32
        dev_hi = np.maximum(cum_hi0[idx] - scaled_n, scaled_n - cum_lo0[idx])
        block_max = int(dev_hi.max())
        lhs_pad = block_max + 1  # psi enclosure plus one ulp headroom
        ln_n = iv_ln_int(n, policy.initial_bits + 8)
        rhs_lo = iv_mul(
            iv_sqrt(Interval.point(n), policy.initial_bits + 8),
            ln_n.square(),
            policy.initial_bits,
        ).lo
        rhs_floor = Dyadic(rhs_lo.m, rhs_lo.e + 32).floor()
        if lhs_pad < rhs_floor:
            holds += len(ns)
        else:
            for nn in range(n, top + 1):
                v = psi_gap_check(nn, policy, table)
                if v.is_holds:
                    holds += 1
                else:
                    if v.is_fails:
                        fails += 1
                    else:
                        undecided += 1
                    if first_bad is None:
                        first_bad = nn
        n = top + 1
    return GapSweepReport(n_lo, n_hi, holds, fails, undecided, first_bad)


# -- the counterexample system ----------------------------------------------------


@dataclass
class MatConditionsReport:
    m1_range: bool
    m2_negation: Verdict
    m3_common: bool
    m4_bounded_least: bool
    m4_explog: ExplogResult
    m5_explog: ExplogResult
    m6_gap: bool
    gap_condition: str

    def conjunction(self) -> Optional[bool]:
        """Three-valued: False on any certified failure, True when everything
        is certified, None while the negation check is undecided."""
        bools = [
            self.m1_range,
            self.m3_common,
            self.m4_bounded_least,
            self.m4_explog.holds,
            self.m5_explog.holds,
            self.m6_gap,
        ]
        if not all(bools):
            return False
        if self.m2_negation.outcome is Outcome.HOLDS:
            return True
        if self.m2_negation.outcome is Outcome.FAILS:
            return False
        return None


def mat_conditions_check(
    sys: MatSystem,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    table: Optional[ChebyshevTable] = None,
    gap_condition: str = "printed",
) -> MatConditionsReport:
    """Evaluate every condition of the counterexample system.

    gap_condition selects the final inequality: "printed" uses
    (l-n)^2 > 4 n^2 k^4 as displayed; "derived" uses (l-n)^2 > 4 n k^4, the
    form the converse derivation |l-n| > 2 sqrt(n) k^2 actually produces. The
    discrepancy is documented, not silently repaired.
    """
    if sys.m == 0:
        raise DomainError("m = 0 is outside the system's domain")
    if gap_condition not in ("printed", "derived"):
        raise DomainError("gap_condition must be 'printed' or 'derived'")
    if table is None or table.N < sys.n:
        raise DomainError("a sieve table covering n is required")
    k, l, m, n = sys.k, sys.l, sys.m, sys.n
    m1 = n >= PSI_GAP_MIN_N
    # negation regime: |psi(n) - n| >= sqrt(n) ln^2 n, certified as rhs < lhs
    if m1:
        neg = None
        for bits in policy.bit_schedule():
            lhs, rhs = _gap_sides(n, table, bits)
            neg = certified_strict_less(rhs, lhs, bits)
            if not neg.is_undecided:
                break
    else:
        neg = Verdict(Outcome.UNDECIDED, Interval.point(0), policy.initial_bits)
    lcm_n = table.lcm_upto(n)
    # m divisible by every 1..n <=> lcm(1..n) | m
    m3 = m % lcm_n == 0
    # least-common bounded formula <=> m > 0 and m <= lcm(1..n); with m3 it
    # pins m = lcm(1..n)
    m4_bounded = m > 0 and m <= lcm_n
    m4 = explog_holds(m - 1, l, policy)
    m5 = explog_holds(n - 1, k, policy)
    if gap_condition == "printed":
        m6 = (l - n) ** 2 > 4 * n * n * k**4
    else:
        m6 = (l - n) ** 2 > 4 * n * k**4
    return MatConditionsReport(m1, neg, m3, m4_bounded, m4, m5, m6, gap_condition)


@dataclass
class MatScanReport:
    n_lo: int
    n_hi: int
    checked: int
    counterexample: Optional[MatSystem]
    s2_certified: int  # systems whose |l - psi(n)| < 2 was certified
    s2_failures: List[int]


def counterexample_scan(
    n_lo: int,
    n_hi: int,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    table: Optional[ChebyshevTable] = None,
    gap_condition: str = "printed",
) -> MatScanReport:
    """Construct and check the candidate system at every n in the range.

    m = lcm(1..n) (maintained incrementally), k from explog over n-1, l from
    explog over m-1; every constructed system also gets the certified
    |l - psi(n)| < 2 side condition checked and tallied.
    """
    if n_lo < PSI_GAP_MIN_N:
        raise DomainError(f"searches start at n >= {PSI_GAP_MIN_N}")
    if table is None or table.N < n_hi:
        raise DomainError("a sieve table covering the range is required")
    running_lcm = table.lcm_upto(n_lo)
    s2_ok = 0
    s2_bad: List[int] = []
    found: Optional[MatSystem] = None
    checked = 0
    two = Interval.point(2)
    for n in range(n_lo, n_hi + 1):
        if n != n_lo:
            kexp = int(table.pp_exp[n])
            if kexp:
                running_lcm *= table.eta(n)
        m = running_lcm
        k = explog_find_b(n - 1, policy)
        l = explog_find_b(m - 1, policy)
        sys_ = MatSystem(k=k, l=l, m=m, n=n)
        checked += 1
        lhs = (Interval.point(l) - table.psi(n, policy.initial_bits)).abs()
        if certified_strict_less(lhs, two, policy.initial_bits).is_holds:
            s2_ok += 1
        else:
            s2_bad.append(n)
        report = mat_conditions_check(sys_, policy, table, gap_condition)
        if report.conjunction() is True:
            found = sys_
            break
    return MatScanReport(n_lo, n_hi, checked, found, s2_ok, s2_bad)


def counterexample_search(
    n_lo: int,
    n_hi: int,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    table: Optional[ChebyshevTable] = None,
) -> Optional[MatSystem]:
    """First full-pass system in the range, or None. A returned system is a
    machine-verifiable counterexample certificate (re-run
    mat_conditions_check to confirm)."""
    return counterexample_scan(n_lo, n_hi, policy, table).counterexample
