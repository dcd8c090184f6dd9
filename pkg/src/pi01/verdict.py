"""Three-valued certified verdicts for strict inequality checks.

A comparison of two enclosures either certifies LHS < RHS (Holds), certifies
LHS > RHS (Fails), or remains Undecided; an equality straddle is always
Undecided, never silently resolved, so every Holds/Fails is a sound
certificate for the strict inequality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .interval import Interval


class Outcome(Enum):
    HOLDS = "holds"
    FAILS = "fails"
    UNDECIDED = "undecided"


@dataclass(frozen=True, slots=True)
class Verdict:
    outcome: Outcome
    gap: Interval  # enclosure of RHS - LHS
    bits: int
    certificate: Optional[dict] = field(default=None)

    @property
    def is_holds(self) -> bool:
        return self.outcome is Outcome.HOLDS

    @property
    def is_fails(self) -> bool:
        return self.outcome is Outcome.FAILS

    @property
    def is_undecided(self) -> bool:
        return self.outcome is Outcome.UNDECIDED


def certified_strict_less(lhs: Interval, rhs: Interval, bits: int) -> Verdict:
    """Certified three-valued verdict on LHS < RHS."""
    gap = rhs - lhs
    if lhs.hi < rhs.lo:
        outcome = Outcome.HOLDS
    elif lhs.lo > rhs.hi:
        outcome = Outcome.FAILS
    else:
        outcome = Outcome.UNDECIDED
    return Verdict(outcome, gap, bits)
