#!/usr/bin/env python3
"""Regenerate the embedded gamma and pi enclosures in pi01/constants.py.

Runs both independent gamma methods at cap + 64 bits, intersects them (a
disagreement would make the intersection empty and abort), and prints the
dict literals to paste into constants.py, checksums included.
"""

import hashlib
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from pi01.constants import (  # noqa: E402
    GAMMA_BITS_CAP,
    PI_BITS_CAP,
    gamma_euler_maclaurin,
    gamma_exponential_integral,
    pi_machin,
)


def checksum(lo: int, hi: int, scale: int) -> str:
    payload = f"{lo}*2^-{scale}|{hi}*2^-{scale}"
    return hashlib.sha256(payload.encode()).hexdigest()


def to_fixed(iv, scale):
    lo = iv.lo
    hi = iv.hi
    lo_i = (lo.m << (lo.e + scale)) if lo.e + scale >= 0 else (lo.m >> -(lo.e + scale))
    neg = -hi.m
    hi_i = (neg << (hi.e + scale)) if hi.e + scale >= 0 else (neg >> -(hi.e + scale))
    return lo_i, -hi_i


def main() -> None:
    gbits = GAMMA_BITS_CAP + 64
    gscale = GAMMA_BITS_CAP + 32
    a = gamma_euler_maclaurin(gbits)
    b = gamma_exponential_integral(gbits)
    meet = a.intersect(b)
    if meet is None:
        raise SystemExit("gamma methods disagree; refusing to emit")
    lo, hi = to_fixed(meet, gscale)
    print("_GAMMA_STORED = {")
    print(f'    "scale": {gscale},')
    print(f'    "lo": {lo},')
    print(f'    "hi": {hi},')
    print(f'    "sha256": "{checksum(lo, hi, gscale)}",')
    print("}")
    width_bits = (hi - lo).bit_length()
    print(f"# gamma width: {width_bits} ulps at 2^-{gscale}", file=sys.stderr)

    pbits = PI_BITS_CAP + 64
    pscale = PI_BITS_CAP + 32
    p = pi_machin(pbits)
    lo, hi = to_fixed(p, pscale)
    print("_PI_STORED = {")
    print(f'    "scale": {pscale},')
    print(f'    "lo": {lo},')
    print(f'    "hi": {hi},')
    print(f'    "sha256": "{checksum(lo, hi, pscale)}",')
    print("}")


if __name__ == "__main__":
    main()
