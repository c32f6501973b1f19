"""Filtered cochain complexes, their spectral sequences, and decalage.

A FilteredComplex is a finite cochain complex of finite Z_p-modules
with a decreasing filtration F^0 = C >= F^1 >= ... >= F^L = 0 preserved
by the differential.  The page E_r is computed exactly by the classical
cycle/boundary formula

    Z_r^{s,n} = F^s C^n  intersect  d^{-1}(F^{s+r} C^{n+1}),
    E_r^s     = Z_r^s / (Z_{r-1}^{s+1} + d Z_{r-1}^{s-r+1}),

and Deligne's decalage re-filters by Dec(F)^s C^n = {x in F^{s+n} C^n :
dx in F^{s+n+1}}.  The reindexing theorem

    E_r^{s,t}(Dec F)  =  E_{r+1}^{2s-t, s}(F),      r >= 1,

is what `decalage_check` verifies cell by cell.

Pages are keyed by (s, t) in the convention used by the rest of the
package: s is the filtration degree and the cochain degree is n = s - t,
so the page-r differential has bidegree (s, t) -> (s + r, t + r - 1).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import NotAComplex
from .fgmod import (
    FgZpModule,
    _relation_matrix,
    hstack,
    identity,
    in_column_span,
    matmul,
    ncols,
    nullspace,
    subquotient_invariants,
    zeros,
)


@dataclass
class FilteredComplex:
    """prime, per-degree generator orders, differentials, filtration.

    orders: dict n -> list of generator orders (p-powers; 0 = free).
    d: dict n -> integer matrix C^n -> C^{n+1} (columns = domain gens).
    filt: dict n -> list of generator matrices [F^1, ..., F^{L-1}]
          (F^0 = everything and F^L = 0 are implicit).
    levels: the number L of filtration steps.
    offset: filtration index of the top step (F^offset = everything);
            decalage produces nonzero offsets.
    """

    prime: int
    orders: dict
    d: dict = field(default_factory=dict)
    filt: dict = field(default_factory=dict)
    levels: int = 1
    offset: int = 0

    def degrees(self):
        return sorted(self.orders)

    def rank(self, n):
        return len(self.orders.get(n, []))

    def relations(self, n):
        return _relation_matrix(self.orders.get(n, []))

    def diff(self, n):
        mat = self.d.get(n)
        if mat is None:
            return zeros(self.rank(n + 1), self.rank(n))
        return mat

    def filtration(self, n, i):
        """Generator matrix of F^i C^n (absolute index)."""
        g = self.rank(n)
        i = i - self.offset
        if i <= 0:
            return identity(g)
        if i >= self.levels:
            return zeros(g, 0)
        steps = self.filt.get(n, [])
        if i - 1 < len(steps):
            return steps[i - 1]
        return zeros(g, 0)

    def filtration_range(self):
        return (self.offset, self.offset + self.levels)

    def validate(self):
        p = self.prime
        for n in self.degrees():
            dmat = self.diff(n)
            if len(dmat) != self.rank(n + 1) or \
                    any(len(r) != self.rank(n) for r in dmat):
                raise ValueError(f"differential at degree {n} has wrong shape")
            dd = matmul(self.diff(n + 1), dmat)
            rel = self.relations(n + 2)
            for jcol in range(ncols(dd)):
                col = [dd[i][jcol] for i in range(len(dd))]
                if not in_column_span(rel, col, p):
                    raise NotAComplex(f"d o d != 0 out of degree {n}")
        lo, hi = self.filtration_range()
        for n in self.degrees():
            for i in range(lo, hi + 1):
                cur = self.filtration(n, i)
                nxt = self.filtration(n, i + 1)
                for jcol in range(ncols(nxt)):
                    col = [nxt[k][jcol] for k in range(len(nxt))]
                    if not _in_submodule(self, n, cur, col):
                        raise ValueError(
                            f"filtration not decreasing at degree {n}, step {i}"
                        )
                img = matmul(self.diff(n), cur)
                tgt = self.filtration(n + 1, i)
                for jcol in range(ncols(img)):
                    col = [img[k][jcol] for k in range(len(img))]
                    if not _in_submodule(self, n + 1, tgt, col):
                        raise ValueError(
                            f"differential does not preserve F^{i} at degree {n}"
                        )
        return self


def _in_submodule(fc, n, gens, vec):
    span = hstack(gens, fc.relations(n))
    return in_column_span(span, vec, fc.prime)


def _preimage_gens(fc, n, sub_gens, target_gens):
    """Generators of {x in span(sub_gens) : d x in span(target_gens)},
    as a submodule of C^n (domain relations included)."""
    p = fc.prime
    g = fc.rank(n)
    if g == 0:
        return zeros(0, 0)
    a = ncols(sub_gens)
    if a == 0:
        return fc.relations(n)
    if fc.rank(n + 1) == 0:
        sol = identity(a)
    else:
        dsub = matmul(fc.diff(n), sub_gens)
        stacked = hstack(dsub, hstack(target_gens, fc.relations(n + 1)))
        if ncols(stacked) == 0:
            sol = identity(a)
        else:
            null = nullspace(stacked, p, width=ncols(stacked))
            if null and ncols(null):
                sol = [row[:] for row in null[:a]]
            else:
                sol = zeros(a, 0)
    return hstack(matmul(sub_gens, sol), fc.relations(n))


def cycles(fc, n, s, r):
    """Z_r^{s,n} = F^s C^n intersect d^{-1} F^{s+r} C^{n+1}."""
    return _preimage_gens(fc, n, fc.filtration(n, s),
                          fc.filtration(n + 1, s + r))


def ss_of_filtration(fc: FilteredComplex, r, precision=24):
    """E_r of the filtered complex as {(s, t): module}, t = s - n."""
    if r < 1:
        raise ValueError("pages are defined for r >= 1")
    p = fc.prime
    lo, hi = fc.filtration_range()
    out = {}
    for n in fc.degrees():
        g = fc.rank(n)
        if g == 0:
            continue
        for s in range(lo, hi):
            z_r = cycles(fc, n, s, r)
            z_below = cycles(fc, n, s + 1, r - 1)
            if fc.rank(n - 1):
                z_prev = cycles(fc, n - 1, s - r + 1, r - 1)
                bdry = matmul(fc.diff(n - 1), z_prev)
            else:
                bdry = zeros(g, 0)
            rels = hstack(hstack(z_below, bdry), fc.relations(n))
            free, exps = subquotient_invariants(z_r, rels, g, p, precision)
            mod = FgZpModule(p, free, tuple(exps))
            if not mod.is_zero():
                out[(s, s - n)] = mod
    return out


def decalage(fc: FilteredComplex) -> FilteredComplex:
    """Deligne's Dec: Dec(F)^s C^n = {x in F^{s+n} : dx in F^{s+n+1}}."""
    degs = fc.degrees()
    lo, hi = fc.filtration_range()
    new_lo = min((lo - n for n in degs), default=0)
    new_hi = max((hi - n for n in degs), default=new_lo + 1)
    filt = {}
    for n in degs:
        steps = []
        for s in range(new_lo + 1, new_hi):
            steps.append(
                _preimage_gens(fc, n, fc.filtration(n, s + n),
                               fc.filtration(n + 1, s + n + 1))
            )
        filt[n] = steps
    return FilteredComplex(fc.prime, dict(fc.orders), dict(fc.d), filt,
                           levels=new_hi - new_lo, offset=new_lo)


def naive_decalage(fc: FilteredComplex) -> FilteredComplex:
    """The degreewise shift S(F)^s C^n = F^{s+n} without the dx
    condition.  Not a negative control: although the filtration is
    genuinely coarser than Dec(F), its pages agree with Dec's from E_1
    on (the inclusion induces page isomorphisms), and the randomized
    corpus confirms this."""
    degs = fc.degrees()
    lo, hi = fc.filtration_range()
    new_lo = min((lo - n for n in degs), default=0)
    new_hi = max((hi - n for n in degs), default=new_lo + 1)
    filt = {}
    for n in degs:
        filt[n] = [fc.filtration(n, s + n) for s in range(new_lo + 1, new_hi)]
    return FilteredComplex(fc.prime, dict(fc.orders), dict(fc.d), filt,
                           levels=new_hi - new_lo, offset=new_lo)


def corrupted_decalage(fc: FilteredComplex) -> FilteredComplex:
    """Deliberately broken decalage: the filtration indices are shifted
    by one, moving every cell off its reindexed position.  Negative
    control for decalage_check."""
    dec = decalage(fc)
    return FilteredComplex(dec.prime, dec.orders, dec.d, dec.filt,
                           levels=dec.levels, offset=dec.offset + 1)


def decalage_check(fc: FilteredComplex, r, precision=24, dec=None):
    """Verify E_r^{s,t}(Dec fc) = E_{r+1}^{2s-t, s}(fc) at every
    in-support bidegree.  Mismatches are reported, not raised."""
    if r < 1:
        raise ValueError("the reindexing theorem needs r >= 1")
    if dec is None:
        dec = decalage(fc)
    lhs = ss_of_filtration(dec, r, precision)
    rhs = ss_of_filtration(fc, r + 1, precision)
    zero = FgZpModule.zero(fc.prime)
    keys = set(lhs)
    for (a, b) in rhs:
        # (a, b) = (2s - t, s) pulls back to (s, t) = (b, 2b - a)
        keys.add((b, 2 * b - a))
    mismatches = []
    for (s, t) in sorted(keys):
        left = lhs.get((s, t), zero)
        right = rhs.get((2 * s - t, s), zero)
        if left != right:
            mismatches.append({
                "dec_bidegree": (s, t),
                "orig_bidegree": (2 * s - t, s),
                "dec_value": str(left),
                "orig_value": str(right),
            })
    return {"r": r, "passed": not mismatches, "cells": len(keys),
            "mismatches": mismatches}


# ---------------------------------------------------------------------------
# randomized corpus


def random_filtered_complex(seed, prime=None, max_width=5, max_levels=5):
    """A random filtered complex built from elementary two-term pieces
    (so d^2 = 0 holds by construction), shuffled by integer changes of
    basis, with a random d-stable filtration on top.

    Per degree the total order divides p^4; support width <= max_width.
    """
    rng = random.Random(seed)
    p = prime if prime is not None else rng.choice([2, 3, 5])
    width = rng.randint(2, max_width)
    n0 = rng.randint(-2, 1)
    degs = list(range(n0, n0 + width))
    budget = {n: 4 for n in degs}  # exponent budget: total order <= p^4
    orders = {n: [] for n in degs}
    arrows = []  # (n, dom_index, cod_index, exponent of p)
    for n in degs:
        for _ in range(rng.randint(0, 2)):
            if budget[n] <= 0:
                break
            a = rng.randint(1, min(2, budget[n]))
            use_pair = (n + 1 in budget) and budget[n + 1] > 0 \
                and rng.random() < 0.7
            if use_pair:
                b = rng.randint(1, min(2, budget[n + 1]))
                c = rng.randint(max(b - a, 0), b)
                i = len(orders[n])
                jj = len(orders[n + 1])
                orders[n].append(p ** a)
                orders[n + 1].append(p ** b)
                budget[n] -= a
                budget[n + 1] -= b
                if c < b:  # c = b would be the zero map
                    arrows.append((n, i, jj, c))
            else:
                orders[n].append(p ** a)
                budget[n] -= a
    d = {}
    for n in degs:
        d[n] = zeros(len(orders.get(n + 1, [])), len(orders[n]))
    for (n, i, jj, c) in arrows:
        d[n][jj][i] = p ** c
    # integer changes of basis: x_i += lambda * x_j on each degree,
    # conjugating the differential (preserves d^2 = 0)
    for n in degs:
        g = len(orders[n])
        if g < 2:
            continue
        for _ in range(rng.randint(0, 4)):
            i, jj = rng.sample(range(g), 2)
            lam = rng.randint(1, p ** 2)
            # new basis e_i' = e_i - lam e_j: vectors transform by
            # S with S e_i = e_i + lam e_j
            if n in d or True:
                dm = d.get(n)
                if dm is not None and ncols(dm):
                    for row in dm:
                        row[jj] += lam * row[i]
                dprev = d.get(n - 1)
                if dprev is not None and len(dprev):
                    for col in range(ncols(dprev)):
                        dprev[i][col] -= lam * dprev[jj][col]
    fc = FilteredComplex(p, orders, d)
    # random d-stable filtration, built top-down and closed under d
    levels = rng.randint(1, max_levels)
    steps = {n: [zeros(len(orders[n]), 0) for _ in range(levels - 1)]
             for n in degs}
    for i in reversed(range(levels - 1)):
        for n in degs:
            g = len(orders[n])
            new_cols = []
            if i + 1 < levels - 1:
                prev = steps[n][i + 1]
                for jcol in range(ncols(prev)):
                    new_cols.append([prev[k][jcol] for k in range(g)])
            for _ in range(rng.randint(0, 2)):
                vec = [rng.randrange(p ** 4) * (p ** rng.randint(0, 2))
                       for _ in range(g)]
                new_cols.append(vec)
            steps[n][i] = [[col[k] for col in new_cols] for k in range(g)] \
                if new_cols else zeros(g, 0)
        # close under d (a few passes cover the support width)
        for _ in range(width + 1):
            for n in degs:
                img = matmul(fc.diff(n), steps[n][i])
                if n + 1 in steps and ncols(img):
                    tgt = steps[n + 1][i]
                    add = []
                    for jcol in range(ncols(img)):
                        col = [img[k][jcol] for k in range(len(img))]
                        if any(col) and not _in_submodule(
                                fc, n + 1, tgt, col):
                            add.append(col)
                    if add:
                        steps[n + 1][i] = hstack(
                            tgt, [[c[k] for c in add]
                                  for k in range(len(img))])
    fc.filt = steps
    fc.levels = levels
    return fc.validate()
