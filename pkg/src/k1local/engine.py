"""Generic bigraded spectral-sequence machinery in Adams grading.

Bidegrees are (s, t) with s the filtration and t the internal degree;
chart coordinates are (stem, filtration) = (t - s, s), and the page-r
differential moves (s, t) -> (s + r, t + r - 1).

The engine executes and verifies: differentials are installed by the
caller for each page (from closed-form rules or shipped tables), page
turning takes homology at every bidegree, and collapse claims must be
certified by a horizontal vanishing line.  Cells whose value would
depend on data outside the computed window are flagged truncated and
stay flagged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NotAComplex, TruncatedError
from .fgmod import FgZpModule, ModuleMap, direct_sum, homology_at


@dataclass(frozen=True)
class Window:
    t_min: int
    t_max: int
    s_max: int

    def __contains__(self, bidegree):
        s, t = bidegree
        return 0 <= s <= self.s_max and self.t_min <= t <= self.t_max

    def bidegrees(self):
        for s in range(self.s_max + 1):
            for t in range(self.t_min, self.t_max + 1):
                yield (s, t)


@dataclass(frozen=True)
class Differential:
    source: tuple
    target: tuple
    map: ModuleMap


@dataclass
class Page:
    """One page of a spectral sequence.  `entries` holds the nonzero
    cells; `diffs` the installed differentials keyed by source; cells in
    `truncated` have no trustworthy value."""

    prime: int
    r: int
    window: Window
    entries: dict = field(default_factory=dict)
    diffs: dict = field(default_factory=dict)
    truncated: set = field(default_factory=set)
    flags: dict = field(default_factory=dict)

    def entry(self, bidegree):
        if bidegree in self.truncated:
            raise TruncatedError(f"cell {bidegree} is truncated")
        return self.entries.get(bidegree, FgZpModule.zero(self.prime))

    def entry_or_zero(self, bidegree):
        return self.entries.get(bidegree, FgZpModule.zero(self.prime))

    def stem_cells(self, stem):
        """Cells on a stem, bottom filtration first."""
        out = []
        for s in range(self.window.s_max + 1):
            bid = (s, s + stem)
            if bid in self.entries or bid in self.truncated:
                out.append((bid, self.entries.get(bid)))
        return out

    def install(self, differentials):
        """Return a copy of this page with the differentials installed.

        Validates bidegree shifts, endpoint groups, and d o d = 0.
        """
        diffs = {}
        for d in differentials:
            s, t = d.source
            if d.target != (s + self.r, t + self.r - 1):
                raise ValueError(
                    f"d_{self.r} from {d.source} must land in "
                    f"{(s + self.r, t + self.r - 1)}, got {d.target}"
                )
            if d.map.domain != self.entry_or_zero(d.source):
                raise ValueError(f"domain mismatch at {d.source}")
            if d.map.codomain != self.entry_or_zero(d.target):
                raise ValueError(f"codomain mismatch at {d.target}")
            if d.source in diffs:
                raise ValueError(f"two differentials installed at {d.source}")
            diffs[d.source] = d
        for d in diffs.values():
            nxt = diffs.get(d.target)
            if nxt is not None and not nxt.map.compose(d.map).is_zero():
                raise NotAComplex(
                    f"d o d != 0 at {d.source} -> {d.target} -> {nxt.target}"
                )
        return Page(self.prime, self.r, self.window, dict(self.entries),
                    diffs, set(self.truncated), dict(self.flags))

    def to_json(self):
        cells = [
            {"s": s, "t": t, "group": mod.to_json()}
            for (s, t), mod in sorted(self.entries.items())
        ]
        diffs = [
            {
                "from": list(d.source),
                "to": list(d.target),
                "rank_data": [list(r) for r in d.map.matrix],
                "coprime_blocks": {
                    str(ell): [list(r) for r in blk]
                    for ell, blk in sorted(d.map.coprime_blocks.items())
                },
            }
            for _, d in sorted(self.diffs.items())
        ]
        out = {
            "r": self.r,
            "window": {"t_min": self.window.t_min, "t_max": self.window.t_max,
                       "s_max": self.window.s_max},
            "cells": cells,
            "diffs": diffs,
        }
        if self.truncated:
            out["truncated"] = sorted(list(b) for b in self.truncated)
        if self.flags:
            out["flags"] = {k: self.flags[k] for k in sorted(self.flags)}
        return out


def turn_page(page: Page, precision=24) -> Page:
    """Compute the next page: homology at every cell.

    The new page has no differentials (the caller installs them).
    Truncation is sticky and spreads along installed arrows.
    """
    r = page.r
    new_entries = {}
    new_trunc = set(page.truncated)
    zero = FgZpModule.zero(page.prime)
    cells = set(page.entries) | set(page.truncated)
    for bid in cells:
        s, t = bid
        into = page.diffs.get((s - r, t - r + 1))
        out = page.diffs.get(bid)
        if bid in page.truncated \
                or (into and into.source in page.truncated) \
                or (out and out.target in page.truncated):
            new_trunc.add(bid)
            continue
        mod = page.entries.get(bid, zero)
        f = into.map if into else ModuleMap.zero(zero, mod)
        g = out.map if out else ModuleMap.zero(mod, zero)
        if f.codomain != mod or g.domain != mod:
            raise ValueError(f"differential endpoints disagree at {bid}")
        h = homology_at(f, g, precision)
        if not h.is_zero():
            new_entries[bid] = h
    return Page(page.prime, r + 1, page.window, new_entries, {}, new_trunc,
                dict(page.flags))


def vanishing_line_holds(page: Page, line: int, window=None) -> bool:
    """All cells of the window strictly above filtration `line` vanish
    (a truncated cell is not known to vanish)."""
    if window is None:
        window = page.window
    return all(s <= line for (s, t) in page.entries if (s, t) in window) \
        and all(s <= line for (s, t) in page.truncated if (s, t) in window)


def run_to_collapse(page: Page, installer, r_max=12, vanishing_line=None,
                    certify_window=None, precision=24) -> Page:
    """Turn pages until the installer supplies no differentials and the
    vanishing-line certificate holds; flags NoCollapse at r_max.

    `installer(page)` returns the list of Differentials for that page.
    With vanishing_line=None the first differential-free page is
    returned, flagged `no_certificate` (stem-level extraction must then
    justify its own termination).  The certificate is checked on
    `certify_window` (pages are often built on a padded window whose
    edges are truncated).
    """
    current = page
    while current.r <= r_max:
        arrows = installer(current)
        if not arrows:
            if vanishing_line is None:
                current.flags["no_certificate"] = True
                return current
            if vanishing_line_holds(current, vanishing_line, certify_window):
                current.flags["collapsed_at"] = current.r
                current.flags["vanishing_line"] = vanishing_line
                return current
        current = turn_page(current.install(arrows), precision)
    current.flags["NoCollapse"] = True
    return current


# ---------------------------------------------------------------------------
# abutment assembly along a stem


@dataclass(frozen=True)
class ClassSelector:
    """Addresses one summand of one cell: part is "free", "torsion" or
    "coprime", index counts within that part (canonical order)."""

    s: int
    part: str
    index: int = 0


@dataclass(frozen=True)
class ExtensionRecord:
    stem: int
    lower: ClassSelector
    upper: ClassSelector
    nontrivial: bool = True
    cite: str = ""


def _summands(mod):
    """(part, index, order) for each summand; order 0 means free."""
    out = [("free", i, 0) for i in range(mod.free_rank)]
    out += [("torsion", i, mod.prime ** k) for i, k in enumerate(mod.torsion)]
    out += [("coprime", i, q) for i, q in enumerate(mod.coprime)]
    return out


def assemble_stem(einf: Page, stem: int, extensions=(), s_range=None):
    """Iterated extension of the E_infinity cells on a stem.

    Unlisted pairs are split; a nontrivial record joins the lower
    filtration class Z/a with the upper class Z/b into Z/ab (or absorbs
    a torsion class into a free summand).  Returns a canonical module.
    """
    p = einf.prime
    smax = einf.window.s_max if s_range is None else s_range[1]
    smin = 0 if s_range is None else s_range[0]
    items = {}
    for s in range(smin, smax + 1):
        bid = (s, s + stem)
        if bid in einf.truncated:
            raise TruncatedError(f"stem {stem} touches truncated cell {bid}")
        mod = einf.entries.get(bid)
        if mod is None:
            continue
        for part, idx, order in _summands(mod):
            items[(s, part, idx)] = order
    # union-find over summands joined by extension records
    parent = {k: k for k in items}

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    for rec in extensions:
        if rec.stem != stem or not rec.nontrivial:
            continue
        if not (smin <= rec.lower.s <= smax and smin <= rec.upper.s <= smax):
            continue
        lo = (rec.lower.s, rec.lower.part, rec.lower.index)
        up = (rec.upper.s, rec.upper.part, rec.upper.index)
        if lo not in items or up not in items:
            raise ValueError(
                f"extension record references missing class {lo} or {up}"
            )
        a, b = find(lo), find(up)
        if a != b:
            parent[a] = b
    groups = {}
    for k in items:
        groups.setdefault(find(k), []).append(k)
    factors = []
    for members in groups.values():
        orders = [items[k] for k in members]
        if 0 in orders:
            # free summand absorbs joined torsion classes
            factors.append(0)
        else:
            prod = 1
            for o in orders:
                prod *= o
            factors.append(prod)
    return direct_sum([FgZpModule.cyclic(p, f) for f in factors], p)
