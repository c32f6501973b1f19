"""The four height-one computations: the descent (Adams) spectral
sequence and the Picard spectral sequence, at odd primes and at p = 2,
with extraction of the Picard group, its algebraic and exotic parts,
and the relative Brauer bound.

Starting pages are built cell by cell from `cohomology_units`.  At
p = 2 the page-3 differentials come from two sources: monomial classes
u^{2a} eta^b (and their zeta-multiples) obey the Leibniz rule generated
by d3(eta) = 0 and d3(u^2) = eta^3, so d3(u^{2a} eta^b) =
a u^{2(a-1)} eta^{b+3}; the filtration-one torsion row is not in the
ring model and its arrows ship as cited data (data/p2_ass_d3.json),
cross-checked against the rule and against d o d = 0.

The Picard spectral sequence imports differentials from the Adams one
row-shifted by one, within the comparison range r <= t - 1; at the
bidegree (t, t) the comparison acquires the quadratic correction
d_t(x) = d_t^{ASS}(x) + x^2, which is what makes the exotic class at
p = 2 survive.  Differentials the literature establishes by other
comparisons (the KO/KU span) ship in data/transported.json, and
unresolved arrows on the (-1)-stem are tracked as unknowns, never
guessed.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from .cohomology import (
    TwistedZp,
    cohomology_units,
    pic_coefficient,
    units_coefficient,
)
from .engine import (
    ClassSelector,
    Differential,
    ExtensionRecord,
    Page,
    Window,
    assemble_stem,
    run_to_collapse,
)
from .errors import DataFileError, InconsistentTable, Unsupported
from .fgmod import FgZpModule, ModuleMap, _factors_by_prime, direct_sum, zeros

DEFAULT_WINDOW = Window(-32, 32, 24)
PAD_T = 12
PAD_S = 8


# ---------------------------------------------------------------------------
# the mod-2 ring model Z_2[eta, u^{+-2}]/2eta and its zeta-multiples


@dataclass(frozen=True)
class RingClass:
    """u^{2a} eta^b, optionally times the filtration-shifting class
    zeta in bidegree (1, 0).  Bidegree: (s, t) = (b + zeta, 4a + 2b)."""

    a: int
    b: int
    zeta: bool = False

    def __post_init__(self):
        if self.b < 0:
            raise ValueError("eta exponent must be >= 0")

    @property
    def bidegree(self):
        return (self.b + (1 if self.zeta else 0), 4 * self.a + 2 * self.b)

    def square(self):
        if self.zeta:
            raise Unsupported("squaring is defined on ring monomials only")
        return RingClass(2 * self.a, 2 * self.b)

    def leibniz_d3(self):
        """d3 by the Leibniz rule; None when it vanishes (a even)."""
        if self.b == 0 or self.a % 2 == 0:
            return None
        return RingClass(self.a - 1, self.b + 3, self.zeta)

    def __str__(self):
        parts = (["zeta"] if self.zeta else []) + \
            ([f"u^{2 * self.a}"] if self.a else []) + \
            ([f"eta^{self.b}"] if self.b else [])
        return "*".join(parts) if parts else "1"


def ring_class_at(s, t):
    """The ring-model generator of the p=2 starting-page cell (s, t),
    or None (the s=1 torsion row and the zero cells are not in the
    ring model)."""
    if t % 2 != 0 or s < 0:
        return None
    if (s, t) == (0, 0):
        return RingClass(0, 0)
    if (s, t) == (1, 0):
        return RingClass(0, 0, zeta=True)
    if s >= 1 and (t - 2 * s) % 4 == 0:
        return RingClass((t - 2 * s) // 4, s)
    if s >= 2 and (t - 2 * (s - 1)) % 4 == 0:
        return RingClass((t - 2 * s + 2) // 4, s - 1, zeta=True)
    return None


def nonlinear_differential(x: RingClass, ass_d3):
    """d_t(x) = d_t^{ASS}(x) + x^2 on the Picard diagonal cell (t, t),
    which sits over the Adams cell (t, t - 1).

    Values live in the mod-2 cell group: equal nonzero summands cancel.
    Returns the surviving RingClass or None for zero.
    """
    s, t = x.bidegree
    if s != t + 1:
        raise ValueError(
            f"the quadratic rule applies over Adams bidegrees (t, t-1); "
            f"got {x.bidegree}")
    sq = x.square()
    if ass_d3 is None:
        return sq
    if ass_d3 == sq:
        return None
    return ass_d3  # plus sq in a bigger group; not needed at height one


# ---------------------------------------------------------------------------
# shipped data


def data_dir():
    env = os.environ.get("KLOCAL_DATA_DIR")
    if env:
        return Path(env)
    return Path(__file__).parent / "data"


def _load_json(name):
    path = data_dir() / name
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as exc:
        raise DataFileError(f"missing data file {path}") from exc
    except json.JSONDecodeError as exc:
        raise DataFileError(f"unparsable data file {path}: {exc}") from exc


def load_p2_d3_table():
    raw = _load_json("p2_ass_d3.json")
    for key in ("prime", "page", "coverage", "arrows", "permanent"):
        if key not in raw:
            raise DataFileError(f"p2_ass_d3.json lacks '{key}'")
    if raw["prime"] != 2 or raw["page"] != 3:
        raise DataFileError("p2_ass_d3.json must describe page 3 at p = 2")
    for rec in raw["arrows"]:
        s, t = rec["source"]
        if not rec.get("cite"):
            raise DataFileError("every arrow needs a citation")
        if rec["kind"] != "onto_order_2":
            raise DataFileError(f"unknown arrow kind {rec['kind']!r}")
        if s != 1 or t % 8 != 4:
            raise DataFileError(f"table arrow at unexpected source {rec['source']}")
        if list(rec["target"]) != [s + 3, t + 2]:
            raise DataFileError(f"arrow at {rec['source']} has wrong target")
    for rec in raw["permanent"]:
        s, t = rec["source"]
        if s != 1 or t % 8 != 0 or t == 0:
            raise DataFileError(f"unexpected permanent class {rec['source']}")
    return raw


def load_transported():
    raw = _load_json("transported.json")
    for rec in raw["arrows"]:
        if rec.get("status") not in ("established", "undetermined"):
            raise DataFileError("transported arrow needs a status")
        if not rec.get("cite"):
            raise DataFileError("transported arrow needs a citation")
        r = rec["page"]
        s, t = rec["source"]
        if list(rec["target"]) != [s + r, t + r - 1]:
            raise DataFileError(
                f"transported arrow at {rec['source']} (page {r}) has wrong target"
            )
    return raw


def load_extensions():
    raw = _load_json("extensions.json")
    for rec in raw["records"]:
        for key in ("ss", "prime", "stem", "lower", "upper", "kind", "cite"):
            if key not in rec:
                raise DataFileError(f"extension record lacks '{key}'")
        if rec["kind"] not in ("nontrivial", "trivial"):
            raise DataFileError(f"unknown extension kind {rec['kind']!r}")
    return raw


def _resolve_selector(page, stem, sel):
    """Translate a JSON selector into a ClassSelector; the index
    "two-primary" picks the 2-power coprime summand of the cell."""
    s = sel["s"]
    part = sel["part"]
    index = sel["index"]
    if index == "two-primary":
        cell = page.entry_or_zero((s, s + stem))
        index = next(
            (i for i, q in enumerate(cell.coprime) if q % 2 == 0), None)
        if index is None:
            raise DataFileError(
                f"no 2-primary coprime summand at filtration {s}, stem {stem}")
    return ClassSelector(s, part, index)


def extension_records(page, kind, prime, stem):
    """The shipped extension records for one stem of one spectral
    sequence, with selectors resolved against the page."""
    raw = load_extensions()
    out = []
    for rec in raw["records"]:
        if rec["ss"] != kind or rec["stem"] != stem:
            continue
        if rec["prime"] == "odd":
            if prime == 2:
                continue
        elif rec["prime"] != prime:
            continue
        out.append(ExtensionRecord(
            stem=stem,
            lower=_resolve_selector(page, stem, rec["lower"]),
            upper=_resolve_selector(page, stem, rec["upper"]),
            nontrivial=(rec["kind"] == "nontrivial"),
            cite=rec["cite"],
        ))
    return out


# ---------------------------------------------------------------------------
# starting pages


def _padded(window):
    return Window(window.t_min - PAD_T, window.t_max + PAD_T,
                  window.s_max + PAD_S)


def ass_e2(p, window=DEFAULT_WINDOW, padded=True):
    """Starting page of the descent spectral sequence: cell (s, t) is
    H^s(Z_p^x, Z_p(t/2)) for even t, zero for odd t."""
    win = _padded(window) if padded else window
    entries = {}
    for t in range(win.t_min, win.t_max + 1):
        if t % 2 != 0:
            continue
        coeff = TwistedZp(t // 2)
        for s in range(win.s_max + 1):
            mod = cohomology_units(p, coeff, s)
            if not mod.is_zero():
                entries[(s, t)] = mod
    return Page(p, 2, win, entries)


def picard_row_coefficient(p, t):
    """Coefficient of the Picard spectral sequence row t."""
    if t < 0:
        return None
    if t == 0:
        return pic_coefficient(p)
    if t == 1:
        return units_coefficient(p)
    if t % 2 == 0:
        return None  # pi_{t-1} E = 0 for t - 1 odd
    return TwistedZp((t - 1) // 2)


def picard_e2(p, window=DEFAULT_WINDOW, padded=True):
    """Starting page of the Picard spectral sequence."""
    win = _padded(window) if padded else window
    entries = {}
    for t in range(max(win.t_min, 0), win.t_max + 1):
        coeff = picard_row_coefficient(p, t)
        if coeff is None:
            continue
        for s in range(win.s_max + 1):
            mod = cohomology_units(p, coeff, s)
            if not mod.is_zero():
                entries[(s, t)] = mod
    return Page(p, 2, win, entries)


# ---------------------------------------------------------------------------
# p=2 page-3 differentials: Leibniz rule + shipped torsion-row table


def _rank_one_map(dom, cod, col=0, row=0, entry=1):
    nd = dom.free_rank + len(dom.torsion)
    nc = cod.free_rank + len(cod.torsion)
    mat = zeros(nc, nd)
    mat[row][col] = entry
    return ModuleMap(dom, cod, mat)


def p2_d3_differentials(page: Page, table=None):
    """The page-3 arrows at p = 2 on a starting page.

    Ring-model arrows are generated by the Leibniz rule; the torsion-row
    arrows come from the shipped table.  Raises InconsistentTable when
    the table disagrees with the rule or misses in-window cells.
    """
    if page.prime != 2:
        raise ValueError("the d3 table is a p = 2 phenomenon")
    if table is None:
        table = load_p2_d3_table()
    cov = table["coverage"]
    win = page.window
    diffs = []
    truncate = set()
    table_sources = {tuple(rec["source"]) for rec in table["arrows"]}
    permanent = {tuple(rec["source"]) for rec in table["permanent"]}
    def would_differentiate(s, t):
        cls = ring_class_at(s, t)
        if cls is not None:
            return cls.leibniz_d3() is not None
        return s == 1 and t % 8 == 4

    for bid, mod in page.entries.items():
        s, t = bid
        # unknown incoming arrow from outside the window: no trusted value
        if s >= 3 and (s - 3, t - 2) not in win \
                and would_differentiate(s - 3, t - 2):
            truncate.add(bid)
        cls = ring_class_at(s, t)
        if cls is not None:
            if bid in table_sources:
                raise InconsistentTable(
                    f"table lists an arrow at ring-model cell {bid}")
            tgt_cls = cls.leibniz_d3()
            if tgt_cls is None:
                continue
            target = (s + 3, t + 2)
            if tgt_cls.bidegree != target:
                raise InconsistentTable(
                    f"Leibniz target {tgt_cls.bidegree} is not d3-shaped at {bid}")
            if target not in win:
                truncate.add(bid)
                continue
            cod = page.entry_or_zero(target)
            if cod.is_zero():
                raise InconsistentTable(
                    f"Leibniz rule hits an empty cell at {target}")
            diffs.append(Differential(bid, target, _rank_one_map(mod, cod)))
            continue
        if s == 1 and t % 4 == 0 and t != 0:
            if not (cov["t_min"] <= t <= cov["t_max"]):
                truncate.add(bid)
                continue
            if t % 8 == 4:
                if bid not in table_sources:
                    raise InconsistentTable(f"table misses the arrow at {bid}")
                if mod != FgZpModule(2, 0, (3,)):
                    raise InconsistentTable(
                        f"torsion-row source at {bid} is {mod}, expected Z/8")
                target = (s + 3, t + 2)
                if target not in win:
                    truncate.add(bid)
                    continue
                cod = page.entry_or_zero(target)
                diffs.append(Differential(bid, target, _rank_one_map(mod, cod)))
            else:
                if bid not in permanent:
                    raise InconsistentTable(
                        f"table neither differentiates nor keeps {bid}")
    return diffs, truncate


# ---------------------------------------------------------------------------
# runs


@dataclass
class SSRun:
    prime: int
    kind: str                 # "ass" | "picard"
    window: Window            # the user window
    pages: dict               # r -> Page (padded window, arrows installed)
    final: Page               # padded window
    notes: dict

    def page_in_window(self, r):
        return restrict_page(self.pages[r] if r in self.pages else self.final,
                             self.window)

    def final_in_window(self):
        return restrict_page(self.final, self.window)


def restrict_page(page: Page, window: Window) -> Page:
    entries = {b: m for b, m in page.entries.items() if b in window}
    trunc = {b for b in page.truncated if b in window}
    diffs = {b: d for b, d in page.diffs.items() if b in window}
    return Page(page.prime, page.r, window, entries, diffs, trunc,
                dict(page.flags))


def ass_run(p, window=DEFAULT_WINDOW):
    """Run the descent spectral sequence to its collapse page.

    Odd primes collapse immediately at E_2 (there are no possible
    differentials); p = 2 collapses at E_4 with the horizontal
    vanishing line s <= 3, certified cell by cell.
    """
    e2 = ass_e2(p, window)
    pages = {}

    if p != 2:
        def installer(page):
            return []
        final = run_to_collapse(e2, installer, r_max=4, vanishing_line=1,
                                certify_window=window)
        pages[2] = final
        return SSRun(p, "ass", window, pages, final,
                     {"collapsed_at": 2, "vanishing_line": 1})

    table = load_p2_d3_table()

    def installer(page):
        if page.r == 3:
            diffs, truncate = p2_d3_differentials(page, table)
            page.truncated.update(truncate)
            return diffs
        return []

    final = run_to_collapse(e2, installer, r_max=6, vanishing_line=3,
                            certify_window=window)
    if "collapsed_at" not in final.flags:
        raise InconsistentTable("p=2 descent SS failed its vanishing line")
    pages[2] = e2
    # rebuild page 3 with its arrows for charts/dumps
    p3 = turn_to(e2, 3)
    diffs, truncate = p2_d3_differentials(p3, table)
    p3.truncated.update(truncate)
    pages[3] = p3.install(diffs)
    pages[4] = final
    return SSRun(p, "ass", window, pages, final,
                 {"collapsed_at": 4, "vanishing_line": 3})


def turn_to(page, r):
    from .engine import turn_page
    cur = page
    while cur.r < r:
        cur = turn_page(cur)
    return cur


def import_differentials(ass_page: Page, pic_page: Page, r):
    """Copy the Adams d_r to the Picard page, one row up.

    Applies only to rows t with r <= t - 1; an arrow is copied when the
    source and target cells agree (same canonical groups) on both
    sides, and cells where survival differs are flagged instead.
    """
    if r < 2:
        raise ValueError("comparison applies to pages r >= 2")
    diffs = []
    flagged = set()
    for (s, t1), d in sorted(ass_page.diffs.items()):
        t = t1 + 1
        if r > t - 1:
            continue  # outside the comparison range
        src, tgt = (s, t), (s + r, t + r - 1)
        src_ok = pic_page.entry_or_zero(src) == ass_page.entry_or_zero((s, t1))
        tgt_ok = pic_page.entry_or_zero(tgt) == ass_page.entry_or_zero(d.target)
        if src_ok and tgt_ok:
            diffs.append(Differential(
                src, tgt,
                ModuleMap(pic_page.entry_or_zero(src),
                          pic_page.entry_or_zero(tgt),
                          [list(row) for row in d.map.matrix],
                          {k: [list(rw) for rw in v]
                           for k, v in d.map.coprime_blocks.items()}),
            ))
        else:
            flagged.add(src)
    return diffs, flagged


def _transported_diffs(p, page, r, status="established"):
    raw = load_transported()
    out = []
    for rec in raw["arrows"]:
        if rec["status"] != status or rec["page"] != r:
            continue
        if rec["prime"] == "odd":
            if p == 2:
                continue
        elif rec["prime"] != p:
            continue
        src = tuple(rec["source"])
        tgt = tuple(rec["target"])
        if status != "established":
            out.append(rec)
            continue
        dom = page.entry_or_zero(src)
        cod = page.entry_or_zero(tgt)
        if dom.is_zero() or cod.is_zero():
            raise DataFileError(f"transported arrow at {src} has empty endpoint")
        if rec["kind"] == "kill_order_2":
            # Z/2 -> the order-2 element of the cyclic 2-part
            cod2 = _factors_by_prime(cod.coprime).get(2, ())
            if len(cod2) != 1 or dom.coprime != (2,):
                raise DataFileError("kill_order_2 endpoints have wrong shape")
            blk = [[cod2[0] // 2]]
            out.append(Differential(src, tgt, ModuleMap(dom, cod, None, {2: blk})))
        elif rec["kind"] == "iso_onto_summand":
            out.append(Differential(
                src, tgt,
                _rank_one_map(dom, cod,
                              col=dom.free_rank + rec["source_summand"],
                              row=cod.free_rank + rec["target_summand"])))
        else:
            raise DataFileError(f"unknown transported kind {rec['kind']!r}")
    return out


def picard_run(p, window=DEFAULT_WINDOW):
    """Run the Picard spectral sequence.

    Page 2 installs the transported d2; page 3 installs the imported
    Adams d3 (rows t >= 4), the transported d3, and evaluates the
    quadratic rule on the diagonal cell (3, 3) at p = 2 (it vanishes:
    d3(x) = d3^ASS(x) + x^2 = 2x^2 = 0).  Classes in the 0-stem are
    permanent cycles, and the undetermined (-1)-stem arrows are
    reported, never installed.
    """
    e2 = picard_e2(p, window)
    ass = ass_run(p, window)
    notes = {"import_flagged": set(), "unknowns": []}

    def installer(page):
        diffs = list(_transported_diffs(p, page, page.r))
        if page.r == 3 and p == 2:
            ass_p3 = ass.pages.get(3)
            if ass_p3 is not None:
                imported, flagged = import_differentials(ass_p3, page, 3)
                diffs.extend(imported)
                notes["import_flagged"] |= flagged
                # an Adams cell without a trusted value gives a Picard
                # cell without one either
                for (s, t1) in ass_p3.truncated:
                    if (s, t1 + 1) in page.entries:
                        page.truncated.add((s, t1 + 1))
            x = ring_class_at(3, 2)
            ass_d3 = x.leibniz_d3()
            if nonlinear_differential(x, ass_d3) is not None:
                raise InconsistentTable(
                    "quadratic rule at (3,3) should vanish at height one")
            notes["nonlinear_d3_at_(3,3)"] = "0 (= d3_ass(x) + x^2 = 2x^2)"
        return diffs

    final = run_to_collapse(e2, installer, r_max=5, vanishing_line=None)
    pages = {2: e2.install(_transported_diffs(p, e2, 2))}
    if p == 2:
        p3 = turn_to(pages[2], 3)
        diffs3 = list(_transported_diffs(p, p3, 3))
        imported, _ = import_differentials(ass.pages[3], p3, 3)
        diffs3.extend(imported)
        pages[3] = p3.install(diffs3)
        pages[4] = final
    else:
        pages[3] = final
    unknowns = _transported_diffs(p, final, 2, status="undetermined") \
        + _transported_diffs(p, final, 3, status="undetermined") \
        + _transported_diffs(p, final, 5, status="undetermined")
    notes["unknowns"] = [rec for rec in unknowns
                         if not final.entry_or_zero(tuple(rec["source"])).is_zero()]
    return SSRun(p, "picard", window, pages, final, notes)


# ---------------------------------------------------------------------------
# extraction


def extract_pic(p, window=None):
    """Pic, its algebraic part (filtrations 0-1), and the exotic part
    kappa (filtrations >= 2) from the Picard spectral sequence."""
    if window is None:
        window = Window(-6, 22, 18)
    run = picard_run(p, window)
    final = run.final_in_window()
    records = extension_records(final, "picard", p, 0)
    smax = final.window.s_max
    pic = assemble_stem(final, 0, records)
    pic_alg = assemble_stem(final, 0, records, s_range=(0, 1))
    kappa = assemble_stem(final, 0, records, s_range=(2, smax))
    return {"pic": pic, "pic_alg": pic_alg, "kappa": kappa, "run": run}


def brauer_bound(p, window=None):
    """Upper bound for the relative Brauer group from the (-1)-stem.

    Returns the product of the orders of the surviving-or-undetermined
    cells, the subgroup that certainly survives, and the undetermined
    arrows (exactly the dashed ones at p = 2)."""
    if window is None:
        window = Window(-6, 22, 18)
    run = picard_run(p, window)
    final = run.final_in_window()
    cells = [(bid, mod) for bid, mod in sorted(final.entries.items())
             if bid[1] - bid[0] == -1]
    unknown_sources = {}
    for rec in run.notes["unknowns"]:
        unknown_sources.setdefault(tuple(rec["source"]), []).append(rec)
    upper = 1
    certain_parts = []
    for bid, mod in cells:
        if not mod.is_finite():
            raise Unsupported(f"(-1)-stem cell {bid} is not finite")
        upper *= mod.torsion_order()
        pending = unknown_sources.get(bid, [])
        if not pending:
            certain_parts.append(mod)
            continue
        # each undetermined arrow sits on one Z/2 summand of the cell
        tors = list(mod.torsion)
        for _ in pending:
            if 1 not in tors:
                raise DataFileError(
                    f"undetermined arrow at {bid} has no Z/2 summand left")
            tors.remove(1)
        certain_parts.append(FgZpModule(p, 0, tuple(tors), mod.coprime))
    certain = direct_sum([m for m in certain_parts if not m.is_zero()], p)
    return {
        "upper_order": upper,
        "certain_subquotient": certain,
        "unknown_differentials": run.notes["unknowns"],
        "cells": {bid: mod for bid, mod in cells},
        "run": run,
    }
