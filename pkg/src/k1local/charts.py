"""Chart emission in the usual Adams-graded drawing conventions.

Coordinates are (stem, filtration) = (t - s, s) with the origin at the
lower left.  Squares are free Z_p-summands, circles are p-torsion
summands labelled by the torsion degree (the label is dropped for Z/p
at p = 2, as in the usual charts), crosses are prime-to-p cyclic
summands, and '?' marks a truncated cell.  Page-r arrows run one stem
to the left and r filtrations up; undetermined arrows are dashed.
Output is deterministic: fixed ordering, no timestamps.
"""

from __future__ import annotations

from .engine import Page, Window

SCALE = 30
MARGIN = 46
GLYPH_R = 7


def _cells_in(page: Page, window: Window):
    for bid in sorted(set(page.entries) | set(page.truncated)):
        if bid in window:
            yield bid


def _summand_tokens(mod, p):
    toks = ["free"] * mod.free_rank
    toks += [("tors", k) for k in mod.torsion]
    toks += [("cop", q) for q in mod.coprime]
    return toks


# ---------------------------------------------------------------------------
# ASCII


def ascii_chart(page: Page, window: Window = None, legend=True) -> str:
    """One fixed-width token per bidegree; rows are filtrations, top
    filtration first."""
    win = window or page.window
    p = page.prime
    stems = range(win.t_min - win.s_max, win.t_max + 1)
    grid = {}
    for (s, t) in _cells_in(page, win):
        stem = t - s
        if stem not in stems:
            continue
        if (s, t) in page.truncated:
            grid[(stem, s)] = "?"
            continue
        mod = page.entries[(s, t)]
        tok = ""
        for item in _summand_tokens(mod, p):
            if item == "free":
                tok += "#"
            elif item[0] == "tors":
                tok += str(item[1]) if item[1] < 10 else "*"
            else:
                tok += "x"
        grid[(stem, s)] = tok[:3] + ("+" if len(tok) > 3 else "")
    width = 4
    lines = []
    for s in range(win.s_max, -1, -1):
        row = f"{s:3d} |"
        for stem in stems:
            row += grid.get((stem, s), ".").center(width)
        lines.append(row.rstrip())
    lines.append("    +" + "-" * (width * len(list(stems))))
    axis = "     "
    for stem in stems:
        axis += f"{stem}".center(width)
    lines.append(axis.rstrip())
    if legend:
        lines.append("")
        lines.append(f"# = Z_{p} summand, digit k = Z/{p}^k summand, "
                     f"x = prime-to-{p} cyclic summand, ? = truncated")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# SVG


def _xy(stem, s, win):
    x = MARGIN + (stem - (win.t_min - win.s_max)) * SCALE
    y = MARGIN + (win.s_max - s) * SCALE
    return x, y


def svg_chart(page: Page, window: Window = None, unknowns=(),
              structlines=(), title="") -> str:
    """Deterministic standalone SVG for one page."""
    win = window or page.window
    p = page.prime
    stems = list(range(win.t_min - win.s_max, win.t_max + 1))
    width = 2 * MARGIN + (len(stems) - 1) * SCALE
    height = 2 * MARGIN + win.s_max * SCALE
    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">'
    )
    out.append(f'<rect width="{width}" height="{height}" fill="white"/>')
    if title:
        out.append(
            f'<text x="{MARGIN}" y="{MARGIN - 24}" font-size="13" '
            f'font-family="monospace">{title}</text>'
        )
    # grid
    for i, stem in enumerate(stems):
        x = MARGIN + i * SCALE
        out.append(
            f'<line x1="{x}" y1="{MARGIN - 10}" x2="{x}" '
            f'y2="{height - MARGIN + 10}" stroke="#eee" stroke-width="1"/>'
        )
        if stem % 2 == 0:
            out.append(
                f'<text x="{x}" y="{height - MARGIN + 26}" font-size="10" '
                f'text-anchor="middle" font-family="monospace">{stem}</text>'
            )
    for s in range(win.s_max + 1):
        y = MARGIN + (win.s_max - s) * SCALE
        out.append(
            f'<line x1="{MARGIN - 10}" y1="{y}" x2="{width - MARGIN + 10}" '
            f'y2="{y}" stroke="#eee" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{MARGIN - 22}" y="{y + 3}" font-size="10" '
            f'text-anchor="middle" font-family="monospace">{s}</text>'
        )
    # structure lines first (under the glyphs)
    for rec in structlines:
        stem = rec.stem
        x1, y1 = _xy(stem, rec.lower.s, win)
        x2, y2 = _xy(stem, rec.upper.s, win)
        if (rec.lower.s, rec.lower.s + stem) in win and \
                (rec.upper.s, rec.upper.s + stem) in win:
            out.append(
                f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" '
                f'stroke="#999" stroke-width="1.2"/>'
            )
    # differentials
    def arrow(src, tgt, dashed):
        s1, t1 = src
        s2, t2 = tgt
        if src not in win and tgt not in win:
            return
        x1, y1 = _xy(t1 - s1, s1, win)
        x2, y2 = _xy(t2 - s2, s2, win)
        dash = ' stroke-dasharray="5,4"' if dashed else ""
        out.append(
            f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" '
            f'stroke="#c00" stroke-width="1.3"{dash} '
            f'marker-end="url(#tip)"/>'
        )

    out.append(
        '<defs><marker id="tip" markerWidth="7" markerHeight="7" '
        'refX="6" refY="3" orient="auto"><path d="M0,0 L6,3 L0,6 z" '
        'fill="#c00"/></marker></defs>'
    )
    for src in sorted(page.diffs):
        arrow(src, page.diffs[src].target, dashed=False)
    for rec in unknowns:
        arrow(tuple(rec["source"]), tuple(rec["target"]), dashed=True)
    # glyphs
    for (s, t) in _cells_in(page, win):
        x, y = _xy(t - s, s, win)
        if (s, t) in page.truncated:
            out.append(
                f'<text x="{x}" y="{y + 4}" font-size="13" '
                f'text-anchor="middle" font-family="monospace">?</text>'
            )
            continue
        mod = page.entries[(s, t)]
        toks = _summand_tokens(mod, p)
        n = len(toks)
        for i, item in enumerate(toks):
            dx = (i - (n - 1) / 2) * 11
            cx = x + dx
            if item == "free":
                out.append(
                    f'<rect x="{cx - GLYPH_R + 1:g}" y="{y - GLYPH_R + 1:g}" '
                    f'width="{2 * GLYPH_R - 2}" height="{2 * GLYPH_R - 2}" '
                    f'fill="white" stroke="black" stroke-width="1.2"/>'
                )
            elif item[0] == "tors":
                k = item[1]
                out.append(
                    f'<circle cx="{cx:g}" cy="{y}" r="{GLYPH_R - 1}" '
                    f'fill="white" stroke="black" stroke-width="1.2"/>'
                )
                if k >= 2 or p != 2:
                    out.append(
                        f'<text x="{cx:g}" y="{y + 3.5:g}" font-size="9" '
                        f'text-anchor="middle" font-family="monospace">{k}</text>'
                    )
            else:
                q = item[1]
                out.append(
                    f'<text x="{cx:g}" y="{y + 4:g}" font-size="12" '
                    f'text-anchor="middle" font-family="monospace">x</text>'
                )
                if q > 2:
                    out.append(
                        f'<text x="{cx + 6:g}" y="{y - 5:g}" font-size="8" '
                        f'text-anchor="middle" font-family="monospace">{q}</text>'
                    )
    out.append("</svg>")
    return "\n".join(out) + "\n"
