"""Continuous cohomology of the height-one groups: Z_p, finite cyclic
groups, and the full unit group Z_p^x.

Coefficients are restricted to the families that actually occur:
twisted p-adic Z_p(j), twisted finite Z/p^k(j), trivial prime-to-p
cyclic groups, trivial 2-power cyclic groups at p = 2, and finite sums.
The unit-group cohomology is assembled from the split decomposition
Z_p^x = F x N (F = mu_{p-1} or {+-1}, N = principal units), summing
H^i(F, H^nu(N, M)); the assembly is a plain direct sum exactly for
these families, each of which has a collapsing, extension-free
Lyndon-Hochschild-Serre spectral sequence.  Anything else raises
Unsupported rather than silently assuming collapse.

Matrix entries built from p-adic residues are exact: an entry is the
literal integer 0 precisely when the p-adic value it stands for is 0,
so valuations read off the matrices are true valuations.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import Unsupported
from .fgmod import FgZpModule, ModuleMap, cokernel, direct_sum, homology_at, kernel
from .padic import (
    PAdic,
    generator_weight_valuation,
    smallest_primitive_root,
    teichmuller,
    topological_generator,
    unit_pow,
)

# ---------------------------------------------------------------------------
# coefficient descriptors


@dataclass(frozen=True)
class TwistedZp:
    """Z_p with a unit a acting by a^j."""

    j: int


@dataclass(frozen=True)
class TwistedFinite:
    """Z/p^k with a unit a acting by a^j."""

    k: int
    j: int


@dataclass(frozen=True)
class TrivialCyclic:
    """Z/m with trivial action, gcd(m, p) = 1."""

    m: int


@dataclass(frozen=True)
class TrivialZ2tor:
    """Z/2^k with trivial action, only at p = 2."""

    k: int


@dataclass(frozen=True)
class Sum:
    parts: tuple

    def __init__(self, *parts):
        flat = []
        for part in parts:
            if isinstance(part, Sum):
                flat.extend(part.parts)
            else:
                flat.append(part)
        object.__setattr__(self, "parts", tuple(flat))


Coefficient = (TwistedZp, TwistedFinite, TrivialCyclic, TrivialZ2tor, Sum)


@dataclass(frozen=True)
class CohomologyRequest:
    """CLI plumbing: which group, which coefficient, which degree."""

    group: str  # "procyclic" | "cyclic" | "units"
    prime: int
    coefficient: object
    degree: int
    cyclic_order: int = 0

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be >= 0")


def units_coefficient(p):
    """(pi_0 E)^x = Z_p^x with trivial action, as a sum of family pieces."""
    tors = TrivialZ2tor(1) if p == 2 else TrivialCyclic(p - 1)
    return Sum(tors, TwistedZp(0))


def pic_coefficient(p):
    """Pic(E) = Z/2 with trivial action."""
    return TrivialZ2tor(1) if p == 2 else TrivialCyclic(2)


def validate_coefficient(p, coeff):
    if isinstance(coeff, Sum):
        for part in coeff.parts:
            validate_coefficient(p, part)
        return
    if isinstance(coeff, TwistedZp):
        return
    if isinstance(coeff, TwistedFinite):
        if coeff.k < 1:
            raise ValueError("torsion level must be >= 1")
        return
    if isinstance(coeff, TrivialCyclic):
        if coeff.m < 1:
            raise ValueError("cyclic order must be >= 1")
        if coeff.m % p == 0:
            raise ValueError(
                f"TrivialCyclic({coeff.m}) is not prime to {p}; "
                "use a twisted/2-torsion coefficient for the p-part"
            )
        return
    if isinstance(coeff, TrivialZ2tor):
        if p != 2:
            raise Unsupported("TrivialZ2tor only makes sense at p = 2")
        if coeff.k < 1:
            raise ValueError("torsion level must be >= 1")
        return
    raise Unsupported(f"coefficient family {type(coeff).__name__} not implemented")


def required_precision(p, coeff, floor=8):
    """Working precision with enough headroom for every torsion order."""
    need = floor
    for part in coeff.parts if isinstance(coeff, Sum) else (coeff,):
        if isinstance(part, TwistedZp) and part.j != 0:
            need = max(need, generator_weight_valuation(p, part.j) + 4)
        elif isinstance(part, TwistedFinite):
            need = max(need, part.k + 4)
            if part.j != 0:
                need = max(need, generator_weight_valuation(p, part.j) + 4)
        elif isinstance(part, TrivialZ2tor):
            need = max(need, part.k + 4)
    return need


# ---------------------------------------------------------------------------
# H^nu(N, M) for N the principal units (procyclic), with the residual
# action of F = mu_{p-1} (odd p) or {+-1} (p = 2) on each piece


def _f_generator_residue(p, precision):
    """Residue of the chosen generator of F: -1 at p = 2, else the
    Teichmueller lift of the smallest primitive root."""
    q = p ** precision
    if p == 2:
        return q - 1
    return teichmuller(p, smallest_primitive_root(p), precision).residue


def _principal_power_minus_one(p, j, precision):
    """Exact integer standing for a0^j - 1 mod p^N (0 iff the true value
    is 0, which happens exactly when j = 0)."""
    if j == 0:
        return 0
    a0 = PAdic(p, precision, topological_generator(p))
    return (unit_pow(a0, j).residue - 1) % (p ** precision)


def _n_level_pieces(p, coeff, nu, precision):
    """H^nu(N, coeff) as a list of (module, F-action unit residue)."""
    validate_coefficient(p, coeff)
    if isinstance(coeff, Sum):
        out = []
        for part in coeff.parts:
            out.extend(_n_level_pieces(p, part, nu, precision))
        return out
    if nu >= 2:
        return []
    q = p ** precision
    if isinstance(coeff, TwistedZp):
        g1 = _principal_power_minus_one(p, coeff.j, precision)
        zp = FgZpModule.free(p)
        mult = ModuleMap(zp, zp, [[g1]])
        mod = kernel(mult, precision) if nu == 0 else cokernel(mult, precision)
        unit = pow(_f_generator_residue(p, precision), coeff.j, q) if coeff.j else 1
        return [(mod, unit)] if not mod.is_zero() else []
    if isinstance(coeff, TwistedFinite):
        g1 = _principal_power_minus_one(p, coeff.j, precision)
        mk = FgZpModule(p, 0, (coeff.k,))
        mult = ModuleMap(mk, mk, [[g1]])
        mod = kernel(mult, precision) if nu == 0 else cokernel(mult, precision)
        unit = pow(_f_generator_residue(p, precision), coeff.j, q) if coeff.j else 1
        return [(mod, unit)] if not mod.is_zero() else []
    if isinstance(coeff, TrivialCyclic):
        # continuous maps from a pro-p group to a prime-to-p group vanish
        if nu >= 1 or coeff.m == 1:
            return []
        return [(FgZpModule(p, 0, (), (coeff.m,)), 1)]
    if isinstance(coeff, TrivialZ2tor):
        return [(FgZpModule(2, 0, (coeff.k,)), 1)]
    raise Unsupported(type(coeff).__name__)


# ---------------------------------------------------------------------------
# the three public cohomology operations


def cohomology_procyclic(p, coeff, s, precision=None):
    """H^s of the procyclic group of principal units acting on coeff
    through the standard topological generator.

    s = 0 is the kernel of (g - 1), s = 1 the cokernel, s >= 2 zero.
    """
    if precision is None:
        precision = required_precision(p, coeff)
    if s < 0:
        raise ValueError("degree must be >= 0")
    if s >= 2:
        return FgZpModule.zero(p)
    pieces = _n_level_pieces(p, coeff, s, precision)
    return direct_sum([mod for mod, _ in pieces], p)


def _scalar_map(module, scalar_p_block, scalar_coprime):
    """Multiplication by scalars: one for the p-part, one for the
    prime-to-p part (always a plain integer there)."""
    n = module.free_rank + len(module.torsion)
    mat = [[scalar_p_block if i == j else 0 for j in range(n)] for i in range(n)]
    blocks = {}
    from .fgmod import _factors_by_prime  # local import to reuse the helper

    for ell, qs in _factors_by_prime(module.coprime).items():
        blocks[ell] = [
            [scalar_coprime if i == j else 0 for j in range(len(qs))]
            for i in range(len(qs))
        ]
    return ModuleMap(module, module, mat, blocks)


def cohomology_finite_cyclic(p, m, module, action_unit=1, s=0, precision=12):
    """H^s(C_m, module) where a chosen generator acts by the unit
    `action_unit` on the p-part (prime-to-p parts always carry the
    trivial action here).

    Uses the 2-periodic resolution: H^0 = ker(g-1), odd degrees are
    ker(norm)/im(g-1), positive even degrees ker(g-1)/im(norm).  The
    norm of a torsion unit is exactly 0 unless the unit is 1, in which
    case it is m.
    """
    if s < 0:
        raise ValueError("degree must be >= 0")
    q = p ** precision
    c = action_unit % q
    if pow(c, m, q) != 1:
        raise ValueError("action unit must have order dividing m")
    g1 = _scalar_map(module, (c - 1) % q if c != 1 else 0, 0)
    norm_p = m if c == 1 else 0
    norm = _scalar_map(module, norm_p, m)
    if s == 0:
        return kernel(g1, precision)
    if s % 2 == 1:
        return homology_at(g1, norm, precision)
    return homology_at(norm, g1, precision)


def cohomology_units(p, coeff, s, precision=None):
    """H^s(Z_p^x, coeff), assembled as sum_{i+nu=s} H^i(F, H^nu(N, coeff)).

    Summands are ordered with the H^1(N)-level pieces first (nu = 1,
    then nu = 0), and within a level in coefficient order; downstream
    tables that address individual summands rely on this order.
    """
    if precision is None:
        precision = required_precision(p, coeff)
    if s < 0:
        raise ValueError("degree must be >= 0")
    f_order = 2 if p == 2 else p - 1
    out = []
    for nu in (1, 0):
        i = s - nu
        if i < 0:
            continue
        for mod, unit in _n_level_pieces(p, coeff, nu, precision):
            out.append(cohomology_finite_cyclic(p, f_order, mod, unit, i, precision))
    return direct_sum([m for m in out if not m.is_zero()], p)


def units_summands(p, coeff, s, precision=None):
    """Like cohomology_units but keeps the individual summands (used by
    the spectral-sequence tables to address classes by index)."""
    if precision is None:
        precision = required_precision(p, coeff)
    f_order = 2 if p == 2 else p - 1
    out = []
    for nu in (1, 0):
        i = s - nu
        if i < 0:
            continue
        for mod, unit in _n_level_pieces(p, coeff, nu, precision):
            h = cohomology_finite_cyclic(p, f_order, mod, unit, i, precision)
            if not h.is_zero():
                out.append(h)
    return out


# ---------------------------------------------------------------------------
# compact string syntax used by the CLI: "Zp(2)", "Z/8(3)", "Z/3",
# "mu", "units", "pic", and "+"-separated sums


def parse_coefficient(text, p):
    parts = [chunk.strip() for chunk in text.split("+")]
    parsed = [_parse_single(chunk, p) for chunk in parts if chunk]
    if not parsed:
        raise ValueError("empty coefficient")
    coeff = parsed[0] if len(parsed) == 1 else Sum(*parsed)
    validate_coefficient(p, coeff)
    return coeff


def _parse_single(text, p):
    if text == "mu":
        return TrivialZ2tor(1) if p == 2 else TrivialCyclic(p - 1)
    if text == "units":
        return units_coefficient(p)
    if text == "pic":
        return pic_coefficient(p)
    if text.startswith("Zp(") and text.endswith(")"):
        return TwistedZp(int(text[3:-1]))
    if text == "Zp":
        return TwistedZp(0)
    if text.startswith("Z/"):
        body = text[2:]
        twist = 0
        if "(" in body:
            body, rest = body.split("(", 1)
            if not rest.endswith(")"):
                raise ValueError(f"cannot parse coefficient {text!r}")
            twist = int(rest[:-1])
        order = int(body)
        if order < 2:
            raise ValueError("cyclic order must be >= 2")
        k = 0
        m = order
        while m % p == 0:
            m //= p
            k += 1
        if m != 1 and k != 0:
            raise ValueError(
                f"Z/{order} mixes p-torsion and prime-to-p torsion; split it"
            )
        if k:
            if twist == 0 and p == 2:
                return TrivialZ2tor(k)
            return TwistedFinite(k, twist)
        if twist != 0:
            raise ValueError("prime-to-p coefficients only carry the trivial action")
        return TrivialCyclic(order)
    raise ValueError(f"cannot parse coefficient {text!r}")
