"""Sieve-backed tables for eta, Lambda, psi, psi_1, delta, lcm and prime counts.

A ChebyshevTable stores, for every j <= N, the prime-power exponent k of j
(0 when j is not a prime power), one byte per entry. That single byte fully
determines eta: eta(j) = 1 when k = 0, else the integer k-th root of j.
Certified prefix structures over the prime-power positions provide psi and
psi_1 enclosures at any requested precision; prime arrays provide pi(x) and
pi(x; q, a) exactly.
"""

from __future__ import annotations

import hashlib
import math
import struct
from typing import Dict, List, Optional, Tuple

import numpy as np

from .dyadic import Dyadic, check_bits
from .errors import CapacityError, DomainError, RangeError
from .functions import ln_fixed
from .interval import Interval

CACHE_MAGIC = b"P01SIEVE"
CACHE_VERSION = 1
DEFAULT_SIZE_CAP = 10**8
DELTA_EXACT_CAP = 12
_BASE_SCALE = 32  # int64-safe fixed point for the bulk psi prefix


def _integer_root(n: int, k: int) -> int:
    """Exact k-th root of n when n is a perfect k-th power."""
    if k == 1:
        return n
    r = round(n ** (1.0 / k))
    while r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


class ChebyshevTable:
    """Immutable sieve tables up to a limit N. Build via build_table()."""

    def __init__(self, n_limit: int, pp_exp: np.ndarray):
        self.N = n_limit
        self.pp_exp = pp_exp  # uint8, index 0..N
        pp_pos = np.nonzero(pp_exp)[0].astype(np.int64)
        self.pp_pos = pp_pos
        self.primes = np.nonzero(pp_exp == 1)[0].astype(np.int64)
        # the prime behind each prime-power position; only higher powers need
        # a root extraction
        roots = pp_pos.copy()
        higher = np.nonzero(pp_exp[pp_pos] > 1)[0]
        for i in higher:
            j = int(pp_pos[i])
            roots[i] = _integer_root(j, int(pp_exp[j]))
        self.pp_prime = roots
        self._build_base_prefix()
        self._hi_prefix: Dict[int, Tuple[int, List[int], List[int], List[int], List[int]]] = {}
        self._lcm_cache: Dict[int, int] = {}

    # -- construction helpers -------------------------------------------------

    def _build_base_prefix(self) -> None:
        """Cumulative enclosures of psi over prime-power positions at 2**-32.

        Values stay below 2**63 up to the size cap: psi(10**8) < 1.1e8 nats,
        and 1.1e8 * 2**32 < 2**59.
        """
        lo = np.empty(len(self.pp_pos), dtype=np.int64)
        hi = np.empty(len(self.pp_pos), dtype=np.int64)
        cache: Dict[int, Tuple[int, int]] = {}
        for i, p in enumerate(self.pp_prime):
            pi = int(p)
            enc = cache.get(pi)
            if enc is None:
                enc = ln_fixed(pi, 0, _BASE_SCALE)
                cache[pi] = enc
            lo[i], hi[i] = enc
        np.cumsum(lo, out=lo)
        np.cumsum(hi, out=hi)
        self._psi32_lo = lo
        self._psi32_hi = hi

    # -- scalar queries --------------------------------------------------------

    def _check_range(self, j: int, hi: Optional[int] = None) -> None:
        top = self.N if hi is None else hi
        if not 1 <= j <= top:
            raise RangeError(f"index {j} outside table range 1..{top}")

    def eta(self, j: int) -> int:
        """1 unless j is a prime power p**k, in which case p."""
        self._check_range(j)
        k = int(self.pp_exp[j])
        return 1 if k == 0 else _integer_root(j, k)

    def is_prime(self, j: int) -> bool:
        self._check_range(j)
        return int(self.pp_exp[j]) == 1

    def lambda_log_arg(self, j: int) -> int:
        """The prime p with Lambda(j) = ln p, or 1 when Lambda(j) = 0."""
        return self.eta(j)

    # -- high-precision prefix structures ---------------------------------------

    def _prefix(self, bits: int):
        """Cumulative [lo,hi] fixed-point sums of ln eta(j) and j*ln eta(j).

        Scale bits+48 keeps round-off far below the psi_1 width contract even
        with one-ulp-per-term budgets across every prime power <= N.
        """
        check_bits(bits)
        entry = self._hi_prefix.get(bits)
        if entry is not None:
            return entry
        scale = bits + 48
        ln_cache: Dict[int, Tuple[int, int]] = {}
        n_pp = len(self.pp_pos)
        psi_lo = [0] * (n_pp + 1)
        psi_hi = [0] * (n_pp + 1)
        w_lo = [0] * (n_pp + 1)
        w_hi = [0] * (n_pp + 1)
        al = ah = bl = bh = 0
        pos = self.pp_pos
        for i in range(n_pp):
            p = int(self.pp_prime[i])
            enc = ln_cache.get(p)
            if enc is None:
                enc = ln_fixed(p, 0, scale)
                ln_cache[p] = enc
            j = int(pos[i])
            al += enc[0]
            ah += enc[1]
            bl += j * enc[0]
            bh += j * enc[1]
            psi_lo[i + 1] = al
            psi_hi[i + 1] = ah
            w_lo[i + 1] = bl
            w_hi[i + 1] = bh
        entry = (scale, psi_lo, psi_hi, w_lo, w_hi)
        self._hi_prefix[bits] = entry
        return entry

    def psi(self, n: int, bits: int = 96) -> Interval:
        """Enclosure of psi(n) = sum_{j<=n} ln eta(j), in nats."""
        self._check_range(n)
        scale, psi_lo, psi_hi, _, _ = self._prefix(bits)
        idx = int(np.searchsorted(self.pp_pos, n, side="right"))
        return Interval(
            Dyadic(psi_lo[idx], -scale), Dyadic(psi_hi[idx], -scale)
        ).round_out(bits)

    def psi1(self, n: int, bits: int = 96) -> Interval:
        """Enclosure of psi_1(n) = sum_{j<n} (n-j) ln eta(j) = log delta(n)."""
        self._check_range(n, self.N + 1)
        scale, psi_lo, psi_hi, w_lo, w_hi = self._prefix(bits)
        idx = int(np.searchsorted(self.pp_pos, n - 1, side="right"))
        lo = n * psi_lo[idx] - w_hi[idx]
        hi = n * psi_hi[idx] - w_lo[idx]
        return Interval(Dyadic(lo, -scale), Dyadic(hi, -scale)).round_out(bits)

    def delta_log(self, n: int, bits: int = 96) -> Interval:
        """Enclosure of ln delta(n); alias contract: identical to psi1(n)."""
        return self.psi1(n, bits)

    def lcm_upto(self, n: int) -> int:
        """Exact lcm(1..n) as the product of pp_prime over prime powers <= n."""
        self._check_range(n)
        cached = self._lcm_cache.get(n)
        if cached is not None:
            return cached
        idx = int(np.searchsorted(self.pp_pos, n, side="right"))
        out = _balanced_product([int(p) for p in self.pp_prime[:idx]])
        if len(self._lcm_cache) > 32:
            self._lcm_cache.clear()
        self._lcm_cache[n] = out
        return out

    def delta_exact(self, n: int, cap: int = DELTA_EXACT_CAP) -> int:
        """Exact delta(n) = prod_{m<n} lcm(1..m); grows like e^(n^2/2)."""
        if n < 1:
            raise RangeError("delta is defined for n >= 1")
        if n > cap:
            raise CapacityError(
                f"delta_exact capped at n <= {cap} (delta grows like e^(n^2/2)); "
                f"use delta_log for certified ln delta(n)"
            )
        if n - 1 > self.N:
            raise RangeError(f"delta({n}) needs a sieve up to {n - 1}")
        out = 1
        running_lcm = 1
        for m in range(1, n):
            k = int(self.pp_exp[m]) if m <= self.N else 0
            if k:
                running_lcm *= _integer_root(m, k)
            out *= running_lcm
        return out

    # -- prime counting ----------------------------------------------------------

    def prime_pi(self, x: int) -> int:
        """Exact number of primes <= x."""
        if x < 0 or x > self.N:
            raise RangeError(f"prime_pi needs 0 <= x <= {self.N}")
        return int(np.searchsorted(self.primes, x, side="right"))

    def prime_pi_progression(self, x: int, q: int, a: int) -> int:
        """Exact number of primes p <= x with p = a (mod q); needs gcd(a,q)=1."""
        if x < 0 or x > self.N:
            raise RangeError(f"prime_pi_progression needs 0 <= x <= {self.N}")
        if q < 1:
            raise DomainError("modulus must be >= 1")
        if math.gcd(a, q) != 1:
            raise DomainError(f"residue {a} not coprime to modulus {q}")
        upto = int(np.searchsorted(self.primes, x, side="right"))
        ps = self.primes[:upto]
        return int(np.count_nonzero(ps % q == a % q))

    def primes_upto(self, x: int) -> np.ndarray:
        if x < 0 or x > self.N:
            raise RangeError(f"primes_upto needs 0 <= x <= {self.N}")
        upto = int(np.searchsorted(self.primes, x, side="right"))
        return self.primes[:upto]

    # -- bulk fixed-point access (numpy fast paths) --------------------------------

    def psi_fixed32(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(positions, cum_lo, cum_hi) of psi at scale 2**-32 over prime powers."""
        return self.pp_pos, self._psi32_lo, self._psi32_hi

    # -- binary cache ---------------------------------------------------------------

    def save(self, path: str) -> None:
        body = bytearray()
        body += CACHE_MAGIC
        body += struct.pack("<I", CACHE_VERSION)
        body += struct.pack("<Q", self.N)
        body += self.pp_exp.tobytes()
        digest = hashlib.sha256(bytes(body)).digest()[:8]
        with open(path, "wb") as fh:
            fh.write(bytes(body))
            fh.write(digest)

    @staticmethod
    def load(path: str) -> "ChebyshevTable":
        with open(path, "rb") as fh:
            blob = fh.read()
        if len(blob) < len(CACHE_MAGIC) + 4 + 8 + 8:
            raise DomainError("sieve cache too short")
        body, digest = blob[:-8], blob[-8:]
        if hashlib.sha256(body).digest()[:8] != digest:
            raise DomainError("sieve cache checksum mismatch")
        if body[: len(CACHE_MAGIC)] != CACHE_MAGIC:
            raise DomainError("sieve cache magic mismatch")
        off = len(CACHE_MAGIC)
        (version,) = struct.unpack_from("<I", body, off)
        off += 4
        if version != CACHE_VERSION:
            raise DomainError(f"unsupported sieve cache version {version}")
        (n_limit,) = struct.unpack_from("<Q", body, off)
        off += 8
        pp_exp = np.frombuffer(body[off:], dtype=np.uint8).copy()
        if len(pp_exp) != n_limit + 1:
            raise DomainError("sieve cache payload length mismatch")
        return ChebyshevTable(int(n_limit), pp_exp)


def _balanced_product(xs: List[int]) -> int:
    if not xs:
        return 1
    while len(xs) > 1:
        xs = [xs[i] * xs[i + 1] for i in range(0, len(xs) - 1, 2)] + (
            [xs[-1]] if len(xs) % 2 else []
        )
    return xs[0]


def build_table(n_limit: int, size_cap: int = DEFAULT_SIZE_CAP) -> ChebyshevTable:
    """Sieve of Eratosthenes with prime-power exponent marking, up to n_limit."""
    if n_limit < 1:
        raise DomainError("sieve limit must be >= 1")
    if n_limit > size_cap:
        raise CapacityError(
            f"sieve of {n_limit} entries exceeds the size cap {size_cap}"
        )
    is_prime = np.ones(n_limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(n_limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    pp_exp = np.zeros(n_limit + 1, dtype=np.uint8)
    pp_exp[is_prime] = 1
    for p in range(2, math.isqrt(n_limit) + 1):
        if is_prime[p]:
            val = p * p
            k = 2
            while val <= n_limit:
                pp_exp[val] = k
                val *= p
                k += 1
    return ChebyshevTable(n_limit, pp_exp)
