"""Finitely generated Z_p-modules and exact p-local linear algebra.

Everything here reduces to a Smith normal form over the localisation
Z_(p): matrices keep exact integer entries, pivots are chosen with
minimal p-valuation, and row/column transforms stay invertible over
Z_(p) (their determinants are units mod p).  Because the inputs are
exact integers the diagonal valuations are exact; the declared working
precision only bounds which torsion exponents are representable, and
a result whose exponents exceed it raises PrecisionExhausted (callers
retry at doubled precision, bounded).

Modules may carry finite cyclic summands of order prime to p (needed
for mu_{p-1} and the t = 0 Picard row at odd primes).  Maps decompose
prime-by-prime, so each prime's block goes through the same SNF code.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NotAComplex, PrecisionExhausted, PrimeMismatch
from .padic import int_valuation

DEFAULT_RETRIES = 3


# ---------------------------------------------------------------------------
# small exact integer matrices (lists of rows)


def identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def zeros(nr, nc):
    return [[0] * nc for _ in range(nr)]


def matmul(a, b):
    nr, nk = len(a), len(b)
    nc = len(b[0]) if b else 0
    out = [[0] * nc for _ in range(nr)]
    for i in range(nr):
        ai = a[i]
        oi = out[i]
        for k in range(nk):
            aik = ai[k]
            if aik:
                bk = b[k]
                for j in range(nc):
                    oi[j] += aik * bk[j]
    return out


def hstack(a, b):
    if not a:
        return [row[:] for row in b]
    if not b:
        return [row[:] for row in a]
    return [ra + rb for ra, rb in zip(a, b)]


def ncols(mat):
    return len(mat[0]) if mat else 0


def smith_normal_form(mat, p, precision=None):
    """P-local Smith form: U*mat*V = D with D diagonal.

    Returns (diag, U, V) where diag lists the diagonal entries as exact
    integers in divisibility (valuation) order, and U, V are integer
    matrices invertible over Z_(p).  U*mat*V = D holds exactly over Z
    up to the unit normalisation absorbed into U.
    """
    a = [row[:] for row in mat]
    nr = len(a)
    nc = ncols(a)
    u = identity(nr)
    v = identity(nc)

    def swap_rows(i, j):
        if i != j:
            a[i], a[j] = a[j], a[i]
            u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        if i != j:
            for row in a:
                row[i], row[j] = row[j], row[i]
            for row in v:
                row[i], row[j] = row[j], row[i]

    for k in range(min(nr, nc)):
        best = None
        pv = None
        for i in range(k, nr):
            for j in range(k, nc):
                e = a[i][j]
                if e:
                    val = int_valuation(e, p)
                    if best is None or val < pv:
                        best, pv = (i, j), val
                        if val == 0:
                            break
            if pv == 0:
                break
        if best is None:
            break
        swap_rows(k, best[0])
        swap_cols(k, best[1])
        piv = a[k][k]
        unit = piv // (p ** pv)
        # pivot valuation is minimal in the block, so one elimination
        # pass is exact and leaves the pivot untouched
        for i in range(k + 1, nr):
            e = a[i][k]
            if e:
                t = e // (p ** pv)
                for j in range(k, nc):
                    a[i][j] = unit * a[i][j] - t * a[k][j]
                for j in range(nr):
                    u[i][j] = unit * u[i][j] - t * u[k][j]
        for jj in range(k + 1, nc):
            e = a[k][jj]
            if e:
                t = e // (p ** pv)
                for i in range(k, nr):
                    a[i][jj] = unit * a[i][jj] - t * a[i][k]
                for i in range(nc):
                    v[i][jj] = unit * v[i][jj] - t * v[i][k]

    # divisibility order: ascending valuation, zeros last
    m = min(nr, nc)

    def sort_key(i):
        d = a[i][i]
        return (1, 0) if d == 0 else (0, int_valuation(d, p))

    for pos in range(m):
        chosen = min(range(pos, m), key=sort_key)
        swap_rows(pos, chosen)
        swap_cols(pos, chosen)
    diag = [a[i][i] for i in range(m)]
    return diag, u, v


def nullspace(mat, p, width=None):
    """Columns spanning {x : mat @ x = 0} over Z_(p).

    `width` must be given when mat has no rows (unconstrained system).
    """
    if not mat:
        if width is None:
            raise ValueError("nullspace of an empty system needs its width")
        return identity(width)
    nc = ncols(mat)
    if nc == 0:
        return []
    diag, _, v = smith_normal_form(mat, p)
    zero_cols = [j for j in range(nc) if j >= len(diag) or diag[j] == 0]
    return [[row[j] for j in zero_cols] for row in v]


def in_column_span(mat, vec, p):
    """Is vec in the Z_(p)-span of mat's columns?"""
    if all(e == 0 for e in vec):
        return True
    if not mat or ncols(mat) == 0:
        return False
    diag, u, _ = smith_normal_form(mat, p)
    w = [sum(u[i][k] * vec[k] for k in range(len(vec))) for i in range(len(u))]
    for i, e in enumerate(w):
        if e == 0:
            continue
        if i >= len(diag) or diag[i] == 0:
            return False
        if int_valuation(e, p) < int_valuation(diag[i], p):
            return False
    return True


# ---------------------------------------------------------------------------
# canonical modules


def _prime_power_factors(m):
    out = []
    q = 2
    while q * q <= m:
        if m % q == 0:
            e = 0
            while m % q == 0:
                m //= q
                e += 1
            out.append(q ** e)
        q += 1
    if m > 1:
        out.append(m)
    return out


def _prime_of(q):
    for ell in range(2, q + 1):
        if q % ell == 0:
            return ell
    raise ValueError(f"no prime divisor of {q}")


@dataclass(frozen=True)
class FgZpModule:
    """Z_p^free + sum Z/p^k (torsion, exponents descending) + prime-to-p
    cyclic factors (prime powers, descending).  Canonical form, so
    equality is isomorphism."""

    prime: int
    free_rank: int = 0
    torsion: tuple = ()
    coprime: tuple = ()

    def __post_init__(self):
        if self.prime < 2:
            raise ValueError("prime must be >= 2")
        if self.free_rank < 0:
            raise ValueError("free rank must be >= 0")
        tors = tuple(sorted((int(k) for k in self.torsion), reverse=True))
        if tors and tors[-1] <= 0:
            raise ValueError("torsion exponents must be positive")
        cop = []
        for m in self.coprime:
            m = int(m)
            if m <= 1:
                raise ValueError("coprime orders must be > 1")
            for q in _prime_power_factors(m):
                if q % self.prime == 0:
                    raise ValueError(f"coprime factor {q} not prime to {self.prime}")
                cop.append(q)
        object.__setattr__(self, "torsion", tors)
        object.__setattr__(self, "coprime", tuple(sorted(cop, reverse=True)))

    @classmethod
    def zero(cls, p):
        return cls(p)

    @classmethod
    def free(cls, p, rank=1):
        return cls(p, free_rank=rank)

    @classmethod
    def cyclic(cls, p, order):
        """Z/order split into its p-part and prime-to-p part; order 0 = Z_p."""
        if order == 0:
            return cls.free(p)
        v = 0
        m = order
        while m % p == 0:
            m //= p
            v += 1
        return cls(p, 0, (v,) if v else (), (m,) if m > 1 else ())

    def is_zero(self):
        return self.free_rank == 0 and not self.torsion and not self.coprime

    def is_finite(self):
        return self.free_rank == 0

    def torsion_order(self):
        o = 1
        for k in self.torsion:
            o *= self.prime ** k
        for q in self.coprime:
            o *= q
        return o

    def summand_orders(self):
        """Cyclic summand orders in generator order; free summands are 0."""
        return (
            [0] * self.free_rank
            + [self.prime ** k for k in self.torsion]
            + list(self.coprime)
        )

    def direct_sum(self, other):
        if self.prime != other.prime:
            raise PrimeMismatch("direct sum of modules over different primes")
        return FgZpModule(
            self.prime,
            self.free_rank + other.free_rank,
            self.torsion + other.torsion,
            self.coprime + other.coprime,
        )

    def to_json(self):
        d = {"p": self.prime, "free": self.free_rank, "torsion": list(self.torsion)}
        if self.coprime:
            d["coprime"] = list(self.coprime)
        return d

    @classmethod
    def from_json(cls, d):
        return cls(d["p"], d.get("free", 0), tuple(d.get("torsion", ())),
                   tuple(d.get("coprime", ())))

    def __str__(self):
        if self.is_zero():
            return "0"
        parts = [f"Z_{self.prime}"] * self.free_rank
        parts += [f"Z/{self.prime ** k}" for k in self.torsion]
        parts += [f"Z/{q}" for q in self.coprime]
        return " + ".join(parts)

    def invariant_factor_string(self, sep=" x "):
        """Group-theory style print, cyclic factors merged across primes."""
        if self.is_zero():
            return "0"
        buckets = {}
        for q in [self.prime ** k for k in self.torsion] + list(self.coprime):
            buckets.setdefault(_prime_of(q), []).append(q)
        for qs in buckets.values():
            qs.sort(reverse=True)
        depth = max((len(qs) for qs in buckets.values()), default=0)
        factors = []
        for i in range(depth):
            f = 1
            for qs in buckets.values():
                if i < len(qs):
                    f *= qs[i]
            factors.append(f)
        factors.sort()
        parts = [f"Z_{self.prime}"] * self.free_rank + [f"Z/{f}" for f in factors]
        return sep.join(parts)


def direct_sum(modules, p=None):
    mods = list(modules)
    if not mods:
        if p is None:
            raise ValueError("empty sum needs an explicit prime")
        return FgZpModule.zero(p)
    out = mods[0]
    for m in mods[1:]:
        out = out.direct_sum(m)
    return out


# ---------------------------------------------------------------------------
# presentations and canonicalisation, one prime at a time


def _relation_matrix(orders):
    """Diagonal relation columns for generators of the given orders
    (order 0 = free, contributes no relation)."""
    g = len(orders)
    cols = [i for i, q in enumerate(orders) if q != 0]
    mat = zeros(g, len(cols))
    for j, i in enumerate(cols):
        mat[i][j] = orders[i]
    return mat


def canonical_invariants(rel, g, p, precision):
    """Canonical form of Z^g / column-span(rel) over Z_(p).

    Returns (free_rank, exponents); an exponent at or above the working
    precision raises PrecisionExhausted.
    """
    if g == 0:
        return 0, []
    if not rel or ncols(rel) == 0:
        return g, []
    diag, _, _ = smith_normal_form(rel, p)
    exps = []
    nonzero = 0
    for d in diag:
        if d == 0:
            continue
        nonzero += 1
        v = int_valuation(d, p)
        if v > 0:
            if v >= precision:
                raise PrecisionExhausted(
                    f"torsion exponent {v} not resolvable at precision {precision}"
                )
            exps.append(v)
    return g - nonzero, sorted(exps, reverse=True)


def subquotient_invariants(gens, rels, g, p, precision):
    """Canonical form of span(gens)/span(rels) inside Z_(p)^g.

    Assumes span(rels) <= span(gens); both are g-row matrices whose
    columns are the spanning vectors.
    """
    a = ncols(gens)
    if a == 0 or g == 0:
        return 0, []
    stacked = hstack(gens, rels)
    null = nullspace(stacked, p, width=ncols(stacked))
    lattice = [row[:] for row in null[:a]] if null else zeros(a, 0)
    return canonical_invariants(lattice, a, p, precision)


# ---------------------------------------------------------------------------
# maps


def _p_orders(mod):
    return [0] * mod.free_rank + [mod.prime ** k for k in mod.torsion]


def _factors_by_prime(coprime):
    by = {}
    for q in coprime:
        by.setdefault(_prime_of(q), []).append(q)
    return {ell: tuple(qs) for ell, qs in by.items()}


@dataclass(frozen=True, eq=False)
class ModuleMap:
    """A map of canonical modules.

    `matrix` acts on the p-local generators (free first, then p-torsion
    in descending order); entries into a torsion coordinate are stored
    reduced mod its order.  `coprime_blocks` maps a prime ell to the
    matrix on that prime's cyclic factors.  Blocks across different
    primes vanish, as they must.
    """

    domain: FgZpModule
    codomain: FgZpModule
    matrix: tuple = None
    coprime_blocks: dict = field(default_factory=dict)

    def __post_init__(self):
        p = self.domain.prime
        if p != self.codomain.prime:
            raise PrimeMismatch("map between modules over different primes")
        nd = self.domain.free_rank + len(self.domain.torsion)
        nc = self.codomain.free_rank + len(self.codomain.torsion)
        mat = self.matrix
        if mat is None:
            mat = zeros(nc, nd)
        mat = [list(int(x) for x in row) for row in mat]
        if len(mat) != nc or any(len(r) != nd for r in mat):
            raise ValueError(
                f"matrix shape {len(mat)}x{ncols(mat)}, expected {nc}x{nd}"
            )
        cod_orders = _p_orders(self.codomain)
        for i, row in enumerate(mat):
            if cod_orders[i]:
                mat[i] = [x % cod_orders[i] for x in row]
        object.__setattr__(self, "matrix", tuple(tuple(r) for r in mat))

        blocks = {}
        dom_by = _factors_by_prime(self.domain.coprime)
        cod_by = _factors_by_prime(self.codomain.coprime)
        for ell in sorted(set(dom_by) | set(cod_by) | set(self.coprime_blocks)):
            nr_l = len(cod_by.get(ell, ()))
            nc_l = len(dom_by.get(ell, ()))
            blk = self.coprime_blocks.get(ell)
            if blk is None:
                blk = zeros(nr_l, nc_l)
            blk = [list(int(x) for x in row) for row in blk]
            if len(blk) != nr_l or any(len(r) != nc_l for r in blk):
                raise ValueError(f"coprime block at {ell} has wrong shape")
            cods = cod_by.get(ell, ())
            for i, row in enumerate(blk):
                blk[i] = [x % cods[i] for x in row]
            if nr_l and nc_l:
                blocks[ell] = tuple(tuple(r) for r in blk)
        object.__setattr__(self, "coprime_blocks", blocks)
        self._check_well_defined()

    def _check_well_defined(self):
        dom_orders = _p_orders(self.domain)
        cod_orders = _p_orders(self.codomain)
        for j, q in enumerate(dom_orders):
            if q == 0:
                continue
            for i in range(len(cod_orders)):
                e = q * self.matrix[i][j]
                qi = cod_orders[i]
                if qi == 0:
                    if e != 0:
                        raise ValueError("torsion generator maps to a free coordinate")
                elif e % qi != 0:
                    raise ValueError(
                        f"matrix does not respect torsion at entry ({i},{j})"
                    )
        dom_by = _factors_by_prime(self.domain.coprime)
        cod_by = _factors_by_prime(self.codomain.coprime)
        for ell, blk in self.coprime_blocks.items():
            dom_f = dom_by.get(ell, ())
            cod_f = cod_by.get(ell, ())
            for j, q in enumerate(dom_f):
                for i, row in enumerate(blk):
                    if (q * row[j]) % cod_f[i] != 0:
                        raise ValueError("coprime block does not respect torsion")

    @classmethod
    def zero(cls, domain, codomain):
        return cls(domain, codomain)

    def is_zero(self):
        return all(all(e == 0 for e in row) for row in self.matrix) and all(
            all(e == 0 for e in row)
            for blk in self.coprime_blocks.values()
            for row in blk
        )

    def compose(self, first):
        """self o first."""
        if first.codomain != self.domain:
            raise ValueError("maps not composable")
        nd = first.domain.free_rank + len(first.domain.torsion)
        nc = self.codomain.free_rank + len(self.codomain.torsion)
        if len(first.matrix) and ncols(first.matrix):
            mat = matmul([list(r) for r in self.matrix],
                         [list(r) for r in first.matrix])
        else:
            mat = zeros(nc, nd)
        blocks = {}
        for ell in set(self.coprime_blocks) & set(first.coprime_blocks):
            blocks[ell] = matmul(
                [list(r) for r in self.coprime_blocks[ell]],
                [list(r) for r in first.coprime_blocks[ell]],
            )
        return ModuleMap(first.domain, self.codomain, mat, blocks)

    def to_json(self):
        d = {
            "domain": self.domain.to_json(),
            "codomain": self.codomain.to_json(),
            "matrix": [list(r) for r in self.matrix],
        }
        if self.coprime_blocks:
            d["coprime_blocks"] = {
                str(ell): [list(r) for r in blk]
                for ell, blk in sorted(self.coprime_blocks.items())
            }
        return d


# ---------------------------------------------------------------------------
# kernels, cokernels and homology, with the precision retry policy


def _with_retries(fn, precision, retries=DEFAULT_RETRIES):
    n = precision
    for _ in range(retries + 1):
        try:
            return fn(n)
        except PrecisionExhausted:
            n *= 2
    raise PrecisionExhausted(
        f"still unresolved after {retries} retries (final precision {n // 2})"
    )


def _block_data(f):
    """Yield (prime ell, matrix rows, dom_orders, cod_orders) per block."""
    p = f.domain.prime
    yield p, [list(r) for r in f.matrix], _p_orders(f.domain), _p_orders(f.codomain)
    dom_by = _factors_by_prime(f.domain.coprime)
    cod_by = _factors_by_prime(f.codomain.coprime)
    for ell in sorted(set(dom_by) | set(cod_by)):
        blk = f.coprime_blocks.get(ell)
        dom_f = list(dom_by.get(ell, ()))
        cod_f = list(cod_by.get(ell, ()))
        if blk is None:
            blk = zeros(len(cod_f), len(dom_f))
        else:
            blk = [list(r) for r in blk]
        yield ell, blk, dom_f, cod_f


def _assemble(p, per_block):
    free = 0
    torsion = []
    coprime = []
    for ell, (fr, exps) in per_block.items():
        if ell == p:
            free += fr
            torsion.extend(exps)
        else:
            if fr:
                raise ValueError("free summand at a prime other than p")
            coprime.extend(ell ** e for e in exps)
    return FgZpModule(p, free, tuple(torsion), tuple(coprime))


def cokernel(f: ModuleMap, precision=12, retries=DEFAULT_RETRIES) -> FgZpModule:
    """Canonical form of codomain / image(f)."""
    p = f.domain.prime

    def run(n):
        per = {}
        for ell, mat, _, cod_orders in _block_data(f):
            g = len(cod_orders)
            rel = hstack(mat, _relation_matrix(cod_orders))
            per[ell] = canonical_invariants(rel, g, ell, n)
        return _assemble(p, per)

    return _with_retries(run, precision, retries)


def _kernel_lattice(mat, dom_orders, cod_orders, ell):
    """Column generators of {x : mat x = 0 in the codomain}, including
    the domain relations (so the result spans a submodule-with-zero)."""
    g = len(dom_orders)
    dom_rel = _relation_matrix(dom_orders)
    if not cod_orders:
        return hstack(identity(g), dom_rel)
    stacked = hstack(mat, _relation_matrix(cod_orders))
    width = ncols(stacked)
    if width == 0:
        return dom_rel
    null = nullspace(stacked, ell, width=width)
    if null and ncols(null):
        lat = [row[:] for row in null[:g]]
    else:
        lat = zeros(g, 0)
    return hstack(lat, dom_rel)


def kernel(f: ModuleMap, precision=12, retries=DEFAULT_RETRIES) -> FgZpModule:
    """Canonical form of ker(f)."""
    p = f.domain.prime

    def run(n):
        per = {}
        for ell, mat, dom_orders, cod_orders in _block_data(f):
            g = len(dom_orders)
            gens = _kernel_lattice(mat, dom_orders, cod_orders, ell)
            rels = _relation_matrix(dom_orders)
            per[ell] = subquotient_invariants(gens, rels, g, ell, n)
        return _assemble(p, per)

    return _with_retries(run, precision, retries)


def _composite_is_zero(f, g):
    comp = g.compose(f)
    for ell, mat, _, cod_orders in _block_data(comp):
        rel = _relation_matrix(cod_orders)
        for j in range(ncols(mat)):
            col = [mat[i][j] for i in range(len(mat))]
            if not in_column_span(rel, col, ell):
                return False
    return True


def homology_at(f: ModuleMap, g: ModuleMap, precision=12,
                retries=DEFAULT_RETRIES) -> FgZpModule:
    """ker(g)/im(f) for composable maps A --f--> B --g--> C with gf = 0."""
    if f.codomain != g.domain:
        raise ValueError("homology_at requires f.codomain == g.domain")
    if not _composite_is_zero(f, g):
        raise NotAComplex("g o f != 0")
    p = f.domain.prime

    def run(n):
        per = {}
        f_blocks = {ell: (mat, do, co) for ell, mat, do, co in _block_data(f)}
        for ell, gmat, b_orders, c_orders in _block_data(g):
            if ell in f_blocks:
                fmat = f_blocks[ell][0]
            else:
                fmat = zeros(len(b_orders), 0)
            gens = _kernel_lattice(gmat, b_orders, c_orders, ell)
            rels = hstack(fmat, _relation_matrix(b_orders))
            per[ell] = subquotient_invariants(gens, rels, len(b_orders), ell, n)
        return _assemble(p, per)

    return _with_retries(run, precision, retries)
