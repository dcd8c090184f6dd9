"""Diophantine relation primitives, sum-of-squares combining, Pell sequences,
and the digit-encoded prime-extraction identities.

Relation helpers return nonnegative witnesses (the convention used for every
unknown in the systems this package checks): divisibility via the quotient,
gcd via extended Euclid shifted into the a = b*x - c*y form with x, y >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import CapacityError, DomainError

Monomial = Tuple[Tuple[str, int], ...]  # sorted ((var, exp), ...), exps >= 1

THETA1_MAX_TERMS = 6  # 2^K decimal digits; 64 at the cap


# -- polynomials -----------------------------------------------------------------


@dataclass(frozen=True)
class Polynomial:
    """Multivariate integer polynomial in canonical form: monomials sorted in
    graded lexicographic order (total degree descending, ties by the variable
    sequence), no zero coefficients."""

    terms: Tuple[Tuple[int, Monomial], ...]

    @staticmethod
    def from_terms(terms: Iterable[Tuple[int, Monomial]]) -> "Polynomial":
        acc: Dict[Monomial, int] = {}
        for coef, mono in terms:
            mono = tuple(sorted((v, e) for v, e in mono if e != 0))
            for v, e in mono:
                if e < 0:
                    raise DomainError("negative exponents are not polynomials")
            acc[mono] = acc.get(mono, 0) + coef
        cleaned = [(c, m) for m, c in acc.items() if c != 0]
        cleaned.sort(key=lambda t: _mono_key(t[1]))
        return Polynomial(tuple(cleaned))

    @staticmethod
    def constant(c: int) -> "Polynomial":
        return Polynomial.from_terms([(c, ())])

    @staticmethod
    def variable(name: str) -> "Polynomial":
        _check_var(name)
        return Polynomial.from_terms([(1, ((name, 1),))])

    def variables(self) -> Tuple[str, ...]:
        seen = set()
        for _, mono in self.terms:
            for v, _e in mono:
                seen.add(v)
        return tuple(sorted(seen))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial.from_terms(list(self.terms) + list(other.terms))

    def __neg__(self) -> "Polynomial":
        return Polynomial.from_terms([(-c, m) for c, m in self.terms])

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        out: List[Tuple[int, Monomial]] = []
        for c1, m1 in self.terms:
            for c2, m2 in other.terms:
                out.append((c1 * c2, _mono_mul(m1, m2)))
        return Polynomial.from_terms(out)

    def square(self) -> "Polynomial":
        return self * self

    def is_zero(self) -> bool:
        return not self.terms

    def to_sexpr(self) -> str:
        """Serialize as (+ (* c (^ v e) ...) ...)."""
        if not self.terms:
            return "(+ (* 0))"
        parts = []
        for coef, mono in self.terms:
            atoms = [str(coef)] + [f"(^ {v} {e})" for v, e in mono]
            parts.append("(* " + " ".join(atoms) + ")")
        return "(+ " + " ".join(parts) + ")"

    @staticmethod
    def from_sexpr(text: str) -> "Polynomial":
        tokens = _tokenize(text)
        tree, rest = _parse_node(tokens, 0)
        if rest != len(tokens):
            raise DomainError("trailing tokens after polynomial expression")
        return _tree_to_poly(tree)


def _mono_key(mono: Monomial):
    deg = sum(e for _, e in mono)
    return (-deg, mono)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    acc: Dict[str, int] = {}
    for v, e in a:
        acc[v] = acc.get(v, 0) + e
    for v, e in b:
        acc[v] = acc.get(v, 0) + e
    return tuple(sorted(acc.items()))


def _check_var(name: str) -> None:
    if not name.isidentifier() or not name.isascii():
        raise DomainError(f"variable names must be ASCII identifiers, got {name!r}")


def _tokenize(text: str) -> List[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _parse_node(tokens: List[str], i: int):
    if i >= len(tokens):
        raise DomainError("unexpected end of polynomial expression")
    tok = tokens[i]
    if tok == "(":
        out = []
        i += 1
        while i < len(tokens) and tokens[i] != ")":
            node, i = _parse_node(tokens, i)
            out.append(node)
        if i >= len(tokens):
            raise DomainError("unbalanced parentheses in polynomial expression")
        return out, i + 1
    if tok == ")":
        raise DomainError("unbalanced parentheses in polynomial expression")
    return tok, i + 1


def _tree_to_poly(tree) -> Polynomial:
    if not isinstance(tree, list) or not tree or tree[0] != "+":
        raise DomainError("polynomial must be a (+ ...) form")
    terms: List[Tuple[int, Monomial]] = []
    for node in tree[1:]:
        if not isinstance(node, list) or not node or node[0] != "*":
            raise DomainError("each term must be a (* c (^ v e) ...) form")
        if len(node) < 2:
            raise DomainError("term missing its coefficient")
        try:
            coef = int(node[1])
        except (TypeError, ValueError):
            raise DomainError(f"coefficient must be an integer, got {node[1]!r}")
        mono: List[Tuple[str, int]] = []
        for factor in node[2:]:
            if not (isinstance(factor, list) and len(factor) == 3 and factor[0] == "^"):
                raise DomainError("monomial factors must be (^ var exp) forms")
            var = factor[1]
            if not isinstance(var, str):
                raise DomainError("variable must be a symbol")
            _check_var(var)
            try:
                exp = int(factor[2])
            except (TypeError, ValueError):
                raise DomainError("exponent must be an integer")
            if exp < 0:
                raise DomainError("exponents must be nonnegative")
            mono.append((var, exp))
        terms.append((coef, tuple(mono)))
    return Polynomial.from_terms(terms)


@dataclass(frozen=True)
class DiophSystem:
    """A finite list of polynomial equations P_i = 0 over a variable universe."""

    equations: Tuple[Polynomial, ...]
    universe: Tuple[str, ...]

    @staticmethod
    def of(equations: Sequence[Polynomial]) -> "DiophSystem":
        universe = sorted({v for p in equations for v in p.variables()})
        return DiophSystem(tuple(equations), tuple(universe))

    def __post_init__(self) -> None:
        for p in self.equations:
            for v in p.variables():
                if v not in self.universe:
                    raise DomainError(f"equation variable {v!r} outside universe")


def poly_eval(p: Polynomial, assignment: Dict[str, int]) -> int:
    """Exact value of p at an integer assignment covering all variables."""
    total = 0
    for coef, mono in p.terms:
        val = coef
        for v, e in mono:
            if v not in assignment:
                raise DomainError(f"assignment missing variable {v!r}")
            val *= assignment[v] ** e
        total += val
    return total


def combine_sum_of_squares(system: DiophSystem) -> Polynomial:
    """Single polynomial sum of P_i^2 whose integer zero set is the
    intersection of the system's zero sets."""
    if not system.equations:
        raise DomainError("cannot combine an empty system")
    out = Polynomial.constant(0)
    for p in system.equations:
        out = out + p.square()
    return out


# -- divisibility / gcd / lcm relations -------------------------------------------


def rel_divides(a: int, b: int) -> Optional[int]:
    """Witness x with a*x = b when a | b, else None. Nonnegative inputs."""
    if a < 0 or b < 0:
        raise DomainError("the relation toolkit works over nonnegative integers")
    if a == 0:
        return 0 if b == 0 else None
    if b % a:
        return None
    return b // a


def rel_gcd(a: int, b: int, c: int) -> Optional[Tuple[int, int]]:
    """Witnesses (x, y), both nonnegative, with a = b*x - c*y when
    a = gcd(b, c); None when the relation fails. Requires b*c > 0."""
    if b * c <= 0:
        raise DomainError("gcd relation requires b*c > 0")
    if a != math.gcd(b, c):
        return None
    g, u, v = _ext_gcd(b, c)
    # g = u*b + v*c  ->  a = b*u - c*(-v); shifting (x, y) by multiples of
    # (c/g, b/g) preserves b*x - c*y, so push both into the nonnegatives
    x, y = u, -v
    step_x, step_y = c // g, b // g
    t = 0
    if x < 0:
        t = max(t, (-x + step_x - 1) // step_x)
    if y < 0:
        t = max(t, (-y + step_y - 1) // step_y)
    x += t * step_x
    y += t * step_y
    assert x >= 0 and y >= 0 and a == b * x - c * y
    return x, y


def _ext_gcd(a: int, b: int) -> Tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def rel_lcm(a: int, b: int, c: int) -> bool:
    """a = lcm(b, c) through the identity b*c = a*gcd(b, c)."""
    if b < 0 or c < 0 or a < 0:
        raise DomainError("the relation toolkit works over nonnegative integers")
    return b * c == a * math.gcd(b, c)


# -- Pell sequences ----------------------------------------------------------------


@dataclass(frozen=True)
class PellPair:
    """n-th solution (chi, psi) of x^2 - (a^2-1) y^2 = 1, ordered by y."""

    a: int
    n: int
    chi: int
    psi: int

    def __post_init__(self) -> None:
        if self.chi**2 - (self.a**2 - 1) * self.psi**2 != 1:
            raise DomainError("Pell identity violated")


def pell_seq(a: int, n: int) -> PellPair:
    """n-th Pell solution by the recurrence chi_{i+1} = 2a chi_i - chi_{i-1}
    (same for psi) from (1, 0) and (a, 1)."""
    if a < 2:
        raise DomainError("need a >= 2 (a^2 - 1 must be positive)")
    if n < 0:
        raise DomainError("Pell index must be >= 0")
    chi_prev, psi_prev = 1, 0
    if n == 0:
        return PellPair(a, 0, 1, 0)
    chi, psi = a, 1
    for _ in range(n - 1):
        chi, chi_prev = 2 * a * chi - chi_prev, chi
        psi, psi_prev = 2 * a * psi - psi_prev, psi
    return PellPair(a, n, chi, psi)


# -- digit-encoded primes -------------------------------------------------------------


def _first_primes(count: int) -> List[int]:
    out: List[int] = []
    candidate = 2
    while len(out) < count:
        if all(candidate % p for p in out):
            out.append(candidate)
        candidate += 1
    return out


def theta1_partial(terms: int) -> Fraction:
    """Exact partial sum sum_{k<=terms} p_k * 10^(-2^k) of the prime-encoding
    constant; terms is capped because the k-th summand needs 2^k digits."""
    if terms < 1:
        raise DomainError("need at least one term")
    if terms > THETA1_MAX_TERMS:
        raise CapacityError(
            f"theta1_partial capped at {THETA1_MAX_TERMS} terms (2^K decimal digits)"
        )
    primes = _first_primes(terms)
    return sum(
        (Fraction(p, 10 ** (2**k)) for k, p in enumerate(primes, start=1)),
        Fraction(0),
    )


def prime_from_theta1(n: int, terms: int) -> int:
    """Recover the n-th prime from floors of the truncated constant:
    p_n = floor(theta * 10^(2^n)) - 10^(2^(n-1)) * floor(theta * 10^(2^(n-1))).

    Requires n < terms so the truncation carries enough primes for the floor
    identities to hold exactly."""
    if n < 1:
        raise DomainError("prime index must be >= 1")
    if n >= terms:
        raise DomainError(
            f"extraction of p_{n} needs at least {n + 1} terms in the truncation"
        )
    theta = theta1_partial(terms)
    hi = math.floor(theta * 10 ** (2**n))
    lo = math.floor(theta * 10 ** (2 ** (n - 1)))
    return hi - 10 ** (2 ** (n - 1)) * lo
