"""Command-line driver.

Subcommands: cohomology, ass, picard, groups, decalage.  All output is
deterministic for fixed arguments (sorted JSON keys, no timestamps);
exit code 0 on success, 1 when a computation reports a flag (truncated
cells, no collapse certificate, a failed check), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .charts import ascii_chart, svg_chart
from .cohomology import (
    cohomology_finite_cyclic,
    cohomology_procyclic,
    cohomology_units,
    parse_coefficient,
    TrivialCyclic,
    TrivialZ2tor,
    TwistedFinite,
    TwistedZp,
)
from .engine import Window
from .errors import KLocalError, TooLarge
from .fgmod import FgZpModule
from .filtered import (
    corrupted_decalage,
    decalage,
    decalage_check,
    random_filtered_complex,
)
from .heightone import ass_run, brauer_bound, extension_records, extract_pic, picard_run
from .oracle import stabilized_cohomology


def _parse_window(text, s_max):
    try:
        lo, hi = text.split(":")
        return Window(int(lo), int(hi), s_max)
    except ValueError as exc:
        raise SystemExit(2) from exc


def _dump_json(obj, path=None):
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_cohomology(args):
    p = args.prime
    try:
        coeff = parse_coefficient(args.coeff, p)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.group == "units":
        mod = cohomology_units(p, coeff, args.degree)
    elif args.group == "procyclic":
        mod = cohomology_procyclic(p, coeff, args.degree)
    elif args.group == "cyclic":
        if args.order is None:
            print("error: --group cyclic needs -m/--order", file=sys.stderr)
            return 2
        mod, unit = _cyclic_module(p, coeff, args.order, args.action_unit)
        mod = cohomology_finite_cyclic(p, args.order, mod, unit, args.degree)
    else:
        return 2
    print(str(mod))
    result = {"group": args.group, "p": p, "coefficient": args.coeff,
              "degree": args.degree, "value": mod.to_json(),
              "pretty": str(mod)}
    code = 0
    if args.oracle:
        if args.group != "units" or not isinstance(coeff, TwistedFinite):
            print("note: --oracle applies to finite twisted coefficients "
                  "of the unit group; skipped", file=sys.stderr)
        else:
            try:
                got, cert = stabilized_cohomology(
                    p, coeff.k, coeff.j, args.degree)
                agree = got == mod
                print(f"oracle: {got} "
                      f"({'agrees' if agree else 'DISAGREES'}; "
                      f"levels {cert['levels']})")
                result["oracle"] = {"value": got.to_json(),
                                    "agrees": agree,
                                    "levels": cert["levels"]}
                if not agree:
                    code = 1
            except TooLarge as exc:
                print(f"oracle: too large ({exc})")
                result["oracle"] = {"too_large": True}
    if args.json:
        _dump_json(result)
    return code


def _cyclic_module(p, coeff, order, action_unit):
    """Interpret a coefficient descriptor for the finite-cyclic group."""
    q = p ** 12
    if isinstance(coeff, TwistedZp):
        unit = action_unit if action_unit is not None else \
            (-1) ** coeff.j if order == 2 else 1
        return FgZpModule.free(p), unit % q
    if isinstance(coeff, TwistedFinite):
        unit = action_unit if action_unit is not None else \
            (-1) ** coeff.j if order == 2 else 1
        return FgZpModule(p, 0, (coeff.k,)), unit % q
    if isinstance(coeff, TrivialZ2tor):
        return FgZpModule(2, 0, (coeff.k,)), 1
    if isinstance(coeff, TrivialCyclic):
        return FgZpModule(p, 0, (), (coeff.m,)), 1
    raise SystemExit(2)


def _emit_run(run, outdir, kind):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    final_r = run.final.r
    for r in sorted(run.pages):
        page = run.page_in_window(r)
        name = f"e{r}" if r != final_r else f"e{r}_einf"
        _dump_json(page.to_json(), outdir / f"{name}.json")
        unknowns = [rec for rec in run.notes.get("unknowns", [])
                    if rec["page"] == r] if kind == "picard" else []
        structs = []
        if r == final_r:
            stems = sorted({t - s for (s, t) in page.entries})
            for stem in stems:
                try:
                    structs.extend(
                        extension_records(page, kind, run.prime, stem))
                except KLocalError:
                    pass
        svg = svg_chart(page, unknowns=unknowns, structlines=structs,
                        title=f"{kind} p={run.prime} page {r}"
                              + (" (= E_oo)" if r == final_r else ""))
        (outdir / f"{name}.svg").write_text(svg, encoding="utf-8")
        (outdir / f"{name}.txt").write_text(ascii_chart(page),
                                            encoding="utf-8")
        written += [f"{name}.json", f"{name}.svg", f"{name}.txt"]
    for w in written:
        print(outdir / w)
    return 1 if run.final_in_window().truncated or \
        "NoCollapse" in run.final.flags else 0


def cmd_ass(args):
    window = _parse_window(args.window, args.smax)
    run = ass_run(args.prime, window)
    return _emit_run(run, args.out, "ass")


def cmd_picard(args):
    window = _parse_window(args.window, args.smax)
    run = picard_run(args.prime, window)
    return _emit_run(run, args.out, "picard")


def cmd_groups(args):
    p = args.prime
    pic = extract_pic(p)
    br = brauer_bound(p)
    lines = [
        f"Pic      = {pic['pic'].invariant_factor_string()}"
        f"   [0-stem of the Picard spectral sequence]",
        f"Pic_alg  = {pic['pic_alg'].invariant_factor_string()}"
        f"   [filtrations 0-1]",
        f"kappa    = {pic['kappa'].invariant_factor_string()}"
        f"   [exotic part: filtration >= 2]",
        f"Brauer   <= {br['upper_order']}"
        f"   [(-1)-stem bound; "
        f"{len(br['unknown_differentials'])} undetermined differentials]",
        f"certain Brauer subquotient: "
        f"{br['certain_subquotient'].invariant_factor_string()}",
    ]
    for line in lines:
        print(line)
    if args.json:
        _dump_json({
            "p": p,
            "pic": pic["pic"].to_json(),
            "pic_pretty": pic["pic"].invariant_factor_string(),
            "pic_alg": pic["pic_alg"].to_json(),
            "kappa": pic["kappa"].to_json(),
            "brauer_upper_order": br["upper_order"],
            "brauer_certain": br["certain_subquotient"].to_json(),
            "brauer_unknowns": br["unknown_differentials"],
        })
    return 0


def cmd_decalage(args):
    fails = 0
    reports = []
    for i in range(args.count):
        fc = random_filtered_complex(args.seed + i)
        dec = corrupted_decalage(fc) if args.corrupt else None
        for r in (1, 2, 3):
            rep = decalage_check(fc, r, dec=dec)
            reports.append({"seed": args.seed + i, "r": r,
                            "passed": rep["passed"],
                            "cells": rep["cells"],
                            "mismatches": len(rep["mismatches"])})
            if not rep["passed"]:
                fails += 1
    print(f"{args.count} complexes x pages 1..3: "
          f"{'all pass' if fails == 0 else f'{fails} checks fail'}")
    if args.json:
        _dump_json(reports)
    return 1 if fails else 0


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="k1local",
        description="Descent and Picard spectral sequences of the "
                    "K(1)-local category at height one.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("cohomology", help="continuous group cohomology")
    c.add_argument("--group", choices=["units", "procyclic", "cyclic"],
                   required=True)
    c.add_argument("-p", "--prime", type=int, required=True)
    c.add_argument("--coeff", required=True,
                   help='e.g. "Zp(2)", "Z/8(3)", "Z/3", "mu", "units", "pic"')
    c.add_argument("-s", "--degree", type=int, required=True)
    c.add_argument("-m", "--order", type=int,
                   help="order of the finite cyclic group")
    c.add_argument("--action-unit", type=int, default=None,
                   help="generator acts by this unit (cyclic group only)")
    c.add_argument("--oracle", action="store_true",
                   help="compare against the brute-force bar complex")
    c.add_argument("--json", action="store_true")
    c.set_defaults(fn=cmd_cohomology)

    for name, fn in (("ass", cmd_ass), ("picard", cmd_picard)):
        a = sub.add_parser(name, help=f"run the {name} spectral sequence")
        a.add_argument("-p", "--prime", type=int, required=True)
        a.add_argument("--window", default="-32:32",
                       help="internal-degree window t_min:t_max")
        a.add_argument("--smax", type=int, default=24)
        a.add_argument("--out", default=f"out_{name}",
                       help="output directory for page dumps and charts")
        a.set_defaults(fn=fn)

    g = sub.add_parser("groups", help="Pic, Pic_alg, kappa and Brauer bound")
    g.add_argument("-p", "--prime", type=int, required=True)
    g.add_argument("--json", action="store_true")
    g.set_defaults(fn=cmd_groups)

    d = sub.add_parser("decalage", help="property check on random complexes")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--count", type=int, default=50)
    d.add_argument("--corrupt", action="store_true",
                   help="corrupt the filtration (negative control)")
    d.add_argument("--json", action="store_true")
    d.set_defaults(fn=cmd_decalage)

    if argv is None:
        argv = sys.argv[1:]
    argv = list(argv)
    # let "--window -6:12" through (argparse reads "-6:12" as an option)
    merged = []
    skip = False
    for i, tok in enumerate(argv):
        if skip:
            skip = False
            continue
        if tok == "--window" and i + 1 < len(argv) and ":" in argv[i + 1]:
            merged.append(f"--window={argv[i + 1]}")
            skip = True
        else:
            merged.append(tok)
    args = ap.parse_args(merged)
    try:
        return args.fn(args)
    except KLocalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
