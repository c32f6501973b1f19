"""Exact p-adic integer arithmetic at fixed finite precision.

A PAdic holds a residue mod p^N; all ring operations are exact mod p^N.
On top of the ring structure this module provides valuations, Teichmueller
representatives, the {torsion} x {principal} decomposition of the unit
group, and the closed-form valuation of a^j - 1 for a the standard
topological generator of the principal units (1+p, or 5 when p = 2).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import AtPrecision, NotAUnit, PrimeMismatch, ZeroWeight


def int_valuation(n: int, p: int) -> int:
    """nu_p(n) for a nonzero integer n."""
    if n == 0:
        raise ValueError("valuation of 0 is undefined; handle separately")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class PAdic:
    """An element of Z_p known to precision N: a residue in [0, p^N)."""

    prime: int
    precision: int
    residue: int

    def __post_init__(self):
        if self.prime < 2:
            raise ValueError("prime must be >= 2")
        if self.precision < 1:
            raise ValueError("precision must be >= 1")
        object.__setattr__(self, "residue", self.residue % self.modulus)

    @property
    def modulus(self) -> int:
        return self.prime ** self.precision

    def _check(self, other: "PAdic"):
        if self.prime != other.prime or self.precision != other.precision:
            raise PrimeMismatch(
                f"cannot combine Z_{self.prime} at N={self.precision} "
                f"with Z_{other.prime} at N={other.precision}"
            )

    def __add__(self, other):
        other = self._coerce(other)
        self._check(other)
        return PAdic(self.prime, self.precision, self.residue + other.residue)

    def __sub__(self, other):
        other = self._coerce(other)
        self._check(other)
        return PAdic(self.prime, self.precision, self.residue - other.residue)

    def __mul__(self, other):
        other = self._coerce(other)
        self._check(other)
        return PAdic(self.prime, self.precision, self.residue * other.residue)

    def __neg__(self):
        return PAdic(self.prime, self.precision, -self.residue)

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        return (-self) + other

    def _coerce(self, other):
        if isinstance(other, PAdic):
            return other
        if isinstance(other, int):
            return PAdic(self.prime, self.precision, other)
        return NotImplemented

    def is_unit(self) -> bool:
        return self.residue % self.prime != 0

    def is_zero(self) -> bool:
        return self.residue == 0

    def __repr__(self):
        return f"PAdic({self.residue} mod {self.prime}^{self.precision})"


def valuation(x: PAdic):
    """Largest k < N with p^k | x, or AtPrecision when x = 0 mod p^N."""
    if x.residue == 0:
        return AtPrecision
    return int_valuation(x.residue, x.prime)


def unit_pow(x: PAdic, j: int) -> PAdic:
    """x^j exact mod p^N; negative j uses the modular inverse."""
    if j < 0 and not x.is_unit():
        raise NotAUnit(f"{x!r} is not invertible")
    return PAdic(x.prime, x.precision, pow(x.residue, j, x.modulus))


def teichmuller(p: int, a: int, precision: int) -> PAdic:
    """The unique (p-1)-st root of unity congruent to a mod p.

    Computed by iterating x -> x^p, which converges p-adically to the
    Teichmueller representative.
    """
    if a % p == 0:
        raise NotAUnit(f"{a} is not a unit mod {p}")
    q = p ** precision
    x = a % q
    for _ in range(precision + 1):
        y = pow(x, p, q)
        if y == x:
            break
        x = y
    return PAdic(p, precision, x)


def topological_generator(p: int) -> int:
    """Generator of the principal units: 1+p for odd p, 5 for p = 2."""
    return 5 if p == 2 else 1 + p


def smallest_primitive_root(p: int) -> int:
    """Smallest primitive root mod an odd prime p."""
    if p == 2:
        raise ValueError("no primitive root is needed at p = 2")
    for c in range(2, p):
        seen = {pow(c, k, p) for k in range(1, p)}
        if len(seen) == p - 1:
            return c
    raise ValueError(f"{p} is not prime")


@dataclass(frozen=True)
class UnitDecomposition:
    """u = torsion_part * principal_part with torsion in mu_{p-1} (odd p)
    or {1, -1} (p = 2), and principal in 1+pZ_p resp. 1+4Z_2."""

    torsion_part: PAdic
    principal_part: PAdic


def unit_decomposition(x: PAdic) -> UnitDecomposition:
    if not x.is_unit():
        raise NotAUnit(f"{x!r} is not a unit")
    p, n, q = x.prime, x.precision, x.modulus
    if p == 2:
        sign = 1 if x.residue % 4 == 1 else -1
        torsion = PAdic(2, n, sign)
    else:
        torsion = teichmuller(p, x.residue % p, n)
    principal = PAdic(p, n, x.residue * pow(torsion.residue, -1, q))
    return UnitDecomposition(torsion, principal)


def generator_weight_valuation(p: int, j: int) -> int:
    """nu_p(a^j - 1) for a the standard topological generator.

    Closed form: nu_p(j) + 1 for odd p, nu_2(j) + 2 for p = 2.
    """
    if j == 0:
        raise ZeroWeight("j = 0: a^0 - 1 = 0")
    if p == 2:
        return int_valuation(j, 2) + 2
    return int_valuation(j, p) + 1


def generator_weight_valuation_bigint(p: int, j: int) -> int:
    """Same valuation, by exact modular exponentiation. Test oracle."""
    if j == 0:
        raise ZeroWeight("j = 0: a^0 - 1 = 0")
    a = topological_generator(p)
    # a^{-j} - 1 = -a^{-j} (a^j - 1), so |j| suffices.
    guess = generator_weight_valuation(p, j)
    prec = guess + 4
    while True:
        r = (pow(a, abs(j), p ** prec) - 1) % (p ** prec)
        if r != 0:
            return int_valuation(r, p)
        prec *= 2


def default_precision(max_exponent: int) -> int:
    """Working precision: largest torsion exponent in play plus headroom."""
    return max(max_exponent, 1) + 4
