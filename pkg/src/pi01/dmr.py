"""Certified verification of the harmonic-sum criterion over ranges of n.

The check compares (H_{delta(n)} - n^2/2)^2 against one of three right-hand
bounds: the classic 36 n^3, the gamma-based tightening
(gamma^2+8*gamma+16) n^3 + (2*gamma+8) n^(3/2) + 1, or its gamma-free
rational weakening 25 n^3 + 10 n^(3/2) + 1. H_{delta(n)} is never summed
directly in the main path: delta(n) ~ e^(n^2/2), so the harmonic value is
enclosed through ln delta(n) = psi_1(n) and the Euler-Maclaurin route. A
direct-summation oracle covers small n for cross-validation.
"""

from __future__ import annotations

import hashlib
import json
import multiprocessing
import os
import sys
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .dyadic import Dyadic
from .errors import CapacityError, CheckpointMismatch, DomainError
from .constants import gamma_enclosure
from .functions import ln2_interval
from .harmonic import harmonic_asymptotic, harmonic_direct
from .interval import DEFAULT_POLICY, Interval, PrecisionPolicy, iv_sqrt
from .sieve import ChebyshevTable, build_table
from .verdict import Outcome, Verdict, certified_strict_less

DIRECT_DELTA_MAX = 3  # below the Euler-Maclaurin validity floor, sum directly
EXACT_DELTA_CAP = 12
ORACLE_CAP = 8


class BoundVariant(Enum):
    CLASSIC36 = "classic36"
    IMPROVED_GAMMA = "improved_gamma"
    RATIONAL25 = "rational25"


def dmr_rhs(n: int, variant: BoundVariant, bits: int = 96) -> Interval:
    """Enclosure of the right-hand bound for the given variant."""
    if n < 1:
        raise DomainError("the criterion ranges over n >= 1")
    n3 = Interval.point(n**3)
    if variant is BoundVariant.CLASSIC36:
        return Interval.point(36 * n**3)
    n32 = iv_sqrt(n3, bits + 8)  # n^(3/2)
    one = Interval.point(1)
    if variant is BoundVariant.RATIONAL25:
        out = Interval.point(25 * n**3) + Interval.point(10) * n32 + one
        return out.round_out(bits)
    g = gamma_enclosure(min(bits + 8, 1024))
    cubic_coeff = g.square() + Interval.point(8) * g + Interval.point(16)
    linear_coeff = Interval.point(2) * g + Interval.point(8)
    out = cubic_coeff * n3 + linear_coeff * n32 + one
    return out.round_out(bits)


def _delta_log2_lower(psi1_iv: Interval, bits: int) -> int:
    """Certified k with delta(n) >= 2**k, from the lower end of psi_1(n)."""
    ln2_hi = ln2_interval(bits).hi
    # log2 delta = psi_1 / ln 2 >= floor(lo(psi_1) / hi(ln 2))
    lo = psi1_iv.lo
    if lo.sign() <= 0:
        return 0
    shift = lo.e - ln2_hi.e
    if shift >= 0:
        q = (lo.m << shift) // ln2_hi.m
    else:
        q = lo.m // (ln2_hi.m << -shift)
    return max(0, q)


def dmr_lhs(n: int, table: ChebyshevTable, bits: int = 96) -> Interval:
    """Enclosure of (H_{delta(n)} - n^2/2)^2."""
    if n < 1:
        raise DomainError("the criterion ranges over n >= 1")
    wb = bits + 16
    if n <= DIRECT_DELTA_MAX:
        h = harmonic_direct(table.delta_exact(n), wb)
    elif n <= EXACT_DELTA_CAP:
        h = harmonic_asymptotic(table.psi1(n, wb), bits=wb, m_exact=table.delta_exact(n))
    else:
        psi1 = table.psi1(n, wb)
        k = _delta_log2_lower(psi1, wb)
        if k < 4:
            raise CapacityError(f"could not certify delta({n}) >= 16")
        h = harmonic_asymptotic(psi1, bits=wb, m_lower_log2=k)
    half_sq = Interval.point(Dyadic(n * n, -1))
    return (h - half_sq).square().round_out(bits)


def _verdict_at(n: int, variant: BoundVariant, bits: int, table: ChebyshevTable) -> Tuple[Verdict, Interval, Interval]:
    lhs = dmr_lhs(n, table, bits)
    rhs = dmr_rhs(n, variant, bits)
    return certified_strict_less(lhs, rhs, bits), lhs, rhs


def check_dmr(
    n: int,
    variant: BoundVariant = BoundVariant.CLASSIC36,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    table: Optional[ChebyshevTable] = None,
) -> Verdict:
    """Certified three-valued check of the criterion at n, escalating
    precision per policy until decided. A Fails verdict carries a
    counterexample certificate record."""
    table = _ensure_table(table, n)
    verdict = None
    for bits in policy.bit_schedule():
        try:
            verdict, lhs, rhs = _verdict_at(n, variant, bits, table)
        except CapacityError:
            break  # precision exhaustion propagates as Undecided, not failure
        if not verdict.is_undecided:
            if verdict.is_fails:
                cert = {
                    "n": n,
                    "variant": variant.value,
                    "lhs_lo": lhs.lo.to_wire(),
                    "lhs_hi": lhs.hi.to_wire(),
                    "rhs_lo": rhs.lo.to_wire(),
                    "rhs_hi": rhs.hi.to_wire(),
                    "bits": bits,
                }
                return Verdict(verdict.outcome, verdict.gap, bits, cert)
            return verdict
    if verdict is None:
        verdict = Verdict(Outcome.UNDECIDED, Interval.point(0), policy.initial_bits)
    return verdict


def dmr_oracle(
    n: int,
    variant: BoundVariant = BoundVariant.CLASSIC36,
    bits: int = 96,
    table: Optional[ChebyshevTable] = None,
    oracle_cap: int = ORACLE_CAP,
) -> Verdict:
    """Independent direct-summation verdict: H_{delta(n)} summed term by term
    over the exact delta(n). Test apparatus; capped because delta(9) is
    already beyond direct summation budgets."""
    if n > oracle_cap:
        raise CapacityError(
            f"dmr_oracle capped at n <= {oracle_cap}: delta({n}) is too large to sum"
        )
    table = _ensure_table(table, n)
    m = table.delta_exact(n)
    h = _oracle_harmonic(table, n, m, bits)
    half_sq = Interval.point(Dyadic(n * n, -1))
    lhs = (h - half_sq).square().round_out(bits)
    rhs = dmr_rhs(n, variant, bits)
    return certified_strict_less(lhs, rhs, bits)


_ORACLE_H_CACHE: Dict[Tuple[int, int], Interval] = {}


def _oracle_harmonic(table: ChebyshevTable, n: int, m: int, bits: int) -> Interval:
    # keyed on the exact delta value, so repeated per-variant oracle calls
    # reuse the O(delta) summation
    key = (m, bits)
    h = _ORACLE_H_CACHE.get(key)
    if h is None:
        h = harmonic_direct(m, bits + 16, cap=10**9)
        if len(_ORACLE_H_CACHE) > 64:
            _ORACLE_H_CACHE.clear()
        _ORACLE_H_CACHE[key] = h
    return h


def _ensure_table(table: Optional[ChebyshevTable], n_needed: int) -> ChebyshevTable:
    if table is not None:
        if table.N < n_needed:
            raise DomainError(f"table covers up to {table.N}, need {n_needed}")
        return table
    return build_table(max(n_needed, 16))


# -- range scans with checkpoint/resume ----------------------------------------


@dataclass
class ScanReport:
    n_lo: int
    n_hi: int
    variant: BoundVariant
    holds: int = 0
    fails: int = 0
    undecided: int = 0
    max_undecided_width: Optional[str] = None
    records: List[dict] = field(default_factory=list)
    wall_time: float = 0.0

    def to_canonical_json(self) -> str:
        """Deterministic serialization; excludes wall time by design so that
        resumed and parallel runs of the same scan are byte-identical."""
        payload = {
            "n_lo": self.n_lo,
            "n_hi": self.n_hi,
            "variant": self.variant.value,
            "holds": self.holds,
            "fails": self.fails,
            "undecided": self.undecided,
            "max_undecided_width": self.max_undecided_width,
            "records": sorted(self.records, key=lambda r: r["n"]),
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _scan_config_hash(n_lo: int, n_hi: int, variant: BoundVariant, policy: PrecisionPolicy) -> str:
    payload = json.dumps(
        {
            "kind": "dmr_scan",
            "n_lo": n_lo,
            "n_hi": n_hi,
            "variant": variant.value,
            "initial_bits": policy.initial_bits,
            "max_bits": policy.max_bits,
            "growth": str(Fraction(policy.growth)),
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()


def _record_for(n: int, variant: BoundVariant, policy: PrecisionPolicy, table: ChebyshevTable) -> dict:
    verdict = None
    lhs = rhs = None
    for bits in policy.bit_schedule():
        verdict, lhs, rhs = _verdict_at(n, variant, bits, table)
        if not verdict.is_undecided:
            break
    return {
        "n": n,
        "variant": variant.value,
        "verdict": verdict.outcome.value,
        "lhs_lo": lhs.lo.to_wire(),
        "lhs_hi": lhs.hi.to_wire(),
        "rhs_lo": rhs.lo.to_wire(),
        "rhs_hi": rhs.hi.to_wire(),
        "bits": verdict.bits,
    }


_WORKER_STATE: dict = {}


def _worker_records(args: Tuple[int, int]) -> List[dict]:
    lo, hi = args
    table = _WORKER_STATE["table"]
    variant = _WORKER_STATE["variant"]
    policy = _WORKER_STATE["policy"]
    return [_record_for(n, variant, policy, table) for n in range(lo, hi)]


def _read_checkpoint(path: str, config_hash: str) -> Dict[int, dict]:
    """Replay a checkpoint, validating its header; returns records by n.

    A corrupted trailing partial line is tolerated with a warning (that n is
    recomputed); corruption anywhere else refuses the resume.
    """
    done: Dict[int, dict] = {}
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        return done
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise CheckpointMismatch(f"unreadable checkpoint header in {path}") from exc
    if header.get("config_hash") != config_hash:
        raise CheckpointMismatch(
            "checkpoint was written with different scan parameters; refusing to resume"
        )
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError:
            if i == len(lines):
                print(
                    f"warning: ignoring corrupted trailing checkpoint line {i}",
                    file=sys.stderr,
                )
                continue
            raise CheckpointMismatch(f"corrupted checkpoint line {i} in {path}")
        done[rec["n"]] = rec
    return done


def scan_dmr(
    n_lo: int,
    n_hi: int,
    variant: BoundVariant = BoundVariant.CLASSIC36,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    table: Optional[ChebyshevTable] = None,
    checkpoint_path: Optional[str] = None,
    workers: int = 1,
) -> ScanReport:
    """Verdict per n over [n_lo, n_hi], resumable through a JSONL checkpoint.

    Records are a pure function of (n, variant, policy), so worker count and
    resume points never change the result set; the canonical report is
    deterministic for fixed parameters.
    """
    if not 1 <= n_lo <= n_hi:
        raise DomainError(f"invalid scan range [{n_lo}, {n_hi}]")
    table = _ensure_table(table, n_hi)
    t0 = time.perf_counter()
    config_hash = _scan_config_hash(n_lo, n_hi, variant, policy)

    done: Dict[int, dict] = {}
    ck = None
    if checkpoint_path:
        if os.path.exists(checkpoint_path):
            done = _read_checkpoint(checkpoint_path, config_hash)
            ck = open(checkpoint_path, "a", encoding="utf-8")
        else:
            ck = open(checkpoint_path, "w", encoding="utf-8")
            header = {
                "config_hash": config_hash,
                "kind": "dmr_scan",
                "n_lo": n_lo,
                "n_hi": n_hi,
                "variant": variant.value,
            }
            ck.write(json.dumps(header, sort_keys=True) + "\n")
            ck.flush()

    todo = [n for n in range(n_lo, n_hi + 1) if n not in done]
    records = list(done.values())
    try:
        if workers > 1 and len(todo) > 1:
            # prebuild the shared prefix before forking so children inherit it
            table.psi1(n_hi, policy.initial_bits + 16)
            _WORKER_STATE.update(table=table, variant=variant, policy=policy)
            chunks = _contiguous_chunks(todo, max(1, len(todo) // (workers * 8)))
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(workers) as pool:
                for recs in pool.imap_unordered(_worker_records, chunks):
                    records.extend(recs)
                    if ck:
                        for rec in recs:
                            ck.write(json.dumps(rec, sort_keys=True) + "\n")
                        ck.flush()
        else:
            for n in todo:
                rec = _record_for(n, variant, policy, table)
                records.append(rec)
                if ck:
                    ck.write(json.dumps(rec, sort_keys=True) + "\n")
    finally:
        if ck:
            ck.close()

    report = ScanReport(n_lo=n_lo, n_hi=n_hi, variant=variant)
    max_w: Optional[Dyadic] = None
    for rec in records:
        v = rec["verdict"]
        if v == "holds":
            report.holds += 1
        elif v == "fails":
            report.fails += 1
        else:
            report.undecided += 1
            w = Dyadic.from_wire(rec["lhs_hi"]) - Dyadic.from_wire(rec["lhs_lo"])
            if max_w is None or w > max_w:
                max_w = w
    report.max_undecided_width = max_w.to_wire() if max_w is not None else None
    report.records = sorted(records, key=lambda r: r["n"])
    report.wall_time = time.perf_counter() - t0
    return report


def _contiguous_chunks(ns: List[int], size: int) -> List[Tuple[int, int]]:
    """Split a sorted list of integers into (lo, hi) half-open runs of ~size."""
    out = []
    i = 0
    while i < len(ns):
        j = i
        while j + 1 < len(ns) and ns[j + 1] == ns[j] + 1 and (j - i) < size:
            j += 1
        out.append((ns[i], ns[j] + 1))
        i = j + 1
    return out
