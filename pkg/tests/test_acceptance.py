"""Acceptance suite: one test per criterion, one printed line each.

Run with `pytest tests/test_acceptance.py -v` (add -s to see the
per-criterion lines immediately even on success).
"""

import time

import pytest

from k1local.cli import main as cli_main
from k1local.cohomology import TwistedFinite, cohomology_units
from k1local.engine import Window
from k1local.errors import TooLarge
from k1local.fgmod import FgZpModule
from k1local.filtered import decalage_check, random_filtered_complex
from k1local.heightone import (
    ass_e2,
    ass_run,
    turn_to,
    brauer_bound,
    extract_pic,
    load_p2_d3_table,
    p2_d3_differentials,
    picard_run,
    ring_class_at,
)
from k1local.oracle import stabilized_cohomology
from k1local.padic import generator_weight_valuation


def _report(capsys, line):
    with capsys.disabled():
        print(line, flush=True)


def test_criterion_1_oracle_equivalence(capsys):
    """Closed-form unit-group cohomology equals the stabilised
    brute-force bar-complex value on the whole grid, exactly."""
    t0 = time.time()
    checked = 0
    single = 0
    skipped = []
    for p in (2, 3, 5):
        for m in range(1, 5):
            for j in range(-6, 7):
                for s in range(0, 3):
                    try:
                        got, cert = stabilized_cohomology(p, m, j, s)
                    except TooLarge:
                        skipped.append((p, m, j, s))
                        continue
                    want = cohomology_units(p, TwistedFinite(m, j), s)
                    assert got == want, (p, m, j, s, str(got), str(want))
                    assert cert.get("bound_ok", True), (p, m, j, s, cert)
                    checked += 1
                    if cert.get("single_source"):
                        single += 1
    elapsed = time.time() - t0
    # the skips are the documented corner: witnessing these needs the
    # level-6 quotient of order 12500, beyond the oracle's size caps
    assert all(p == 5 and m >= 3 for (p, m, _j, _s) in skipped), skipped
    assert checked >= 450
    assert elapsed < 120, f"criterion 1 took {elapsed:.0f}s"
    _report(capsys,
            f"CRITERION 1 PASS oracle == closed form at {checked} grid points "
            f"({single} single-source certificates, {len(skipped)} size-capped "
            f"skips, all at p=5 m>=3) in {elapsed:.0f}s")


def test_criterion_2_odd_ass(capsys):
    run = ass_run(3, Window(-16, 16, 12))
    fin = run.final_in_window()
    e2 = ass_e2(3, Window(-16, 16, 12), padded=False)
    # E_infinity = E_2, supported exactly on the closed-form bidegrees
    assert {b: m for b, m in fin.entries.items()} == e2.entries
    for (s, t), mod in fin.entries.items():
        if t == 0:
            assert s in (0, 1) and mod == FgZpModule.free(3)
        else:
            assert s == 1 and t % 4 == 0 and t != 0
            assert mod == FgZpModule(
                3, 0, (generator_weight_valuation(3, t // 2),))
    assert fin.entry((1, 4)) == FgZpModule(3, 0, (1,))     # Z/3 at stem 3
    assert fin.entry((1, 8)) == FgZpModule(3, 0, (1,))     # Z/3 at stem 7
    assert fin.entry((1, 12)) == FgZpModule(3, 0, (2,))    # Z/9 at stem 11
    _report(capsys, "CRITERION 2 PASS odd-prime descent SS reproduced "
                    "(support exact, stems 3/7/11 sampled, E_oo = E_2)")


def test_criterion_3_p2_ass(capsys):
    window = Window(-16, 16, 14)
    # d o d = 0 holds for the shipped table: install() enforces it
    page3 = turn_to(ass_e2(2, window), 3)
    diffs, _ = p2_d3_differentials(page3, load_p2_d3_table())
    page3.install(diffs)  # raises NotAComplex if d o d != 0
    # Leibniz cross-validation on every ring-model class in window
    checked = 0
    for (s, t) in page3.entries:
        cls = ring_class_at(s, t)
        if cls is None:
            continue
        d3 = cls.leibniz_d3()
        has_arrow = any(d.source == (s, t) for d in diffs)
        in_reach = (s + 3, t + 2) in page3.window
        assert has_arrow == (d3 is not None and in_reach), (s, t)
        checked += 1
    run = ass_run(2, window)
    assert run.final.flags["collapsed_at"] == 4
    assert run.final.flags["vanishing_line"] == 3
    fin = run.final_in_window()
    assert all(s <= 3 for (s, _t) in fin.entries)
    samples = {
        (0, 0): FgZpModule.free(2), (1, 0): FgZpModule.free(2),
        (1, 4): FgZpModule(2, 0, (2,)), (1, 8): FgZpModule(2, 0, (4,)),
        (1, 2): FgZpModule(2, 0, (1,)), (2, 2): FgZpModule(2, 0, (1,)),
        (3, 6): FgZpModule(2, 0, (1,)), (2, 4): FgZpModule(2, 0, (1,)),
        (3, 4): FgZpModule(2, 0, (1,)), (1, 16): FgZpModule(2, 0, (5,)),
    }
    for bid, want in samples.items():
        assert fin.entry(bid) == want, (bid, str(fin.entry(bid)), str(want))
    dead = [(3, 2), (2, 0), (2, 6), (4, 4), (6, 4), (5, 2)]
    assert all(fin.entry_or_zero(b).is_zero() for b in dead)
    _report(capsys, f"CRITERION 3 PASS p=2 descent SS: d o d = 0, Leibniz "
                    f"cross-validation on {checked} ring classes, E_4 with "
                    f"vanishing line s <= 3, figure cells sampled")


def test_criterion_4_picard_groups(capsys):
    for p in (3, 5, 7):
        res = extract_pic(p)
        assert res["pic"] == FgZpModule(p, 1, (), (2 * (p - 1),)), p
        assert res["pic"] == res["pic_alg"], p
        assert res["kappa"].is_zero(), p
    res = extract_pic(2)
    assert res["pic"] == FgZpModule(2, 1, (2, 1))       # Z_2 x Z/2 x Z/4
    assert res["pic_alg"] == FgZpModule(2, 1, (1, 1))   # filtration <= 1
    assert res["kappa"] == FgZpModule(2, 0, (1,))       # Z/2
    assert res["run"].notes["nonlinear_d3_at_(3,3)"].startswith("0")
    _report(capsys, "CRITERION 4 PASS Pic = Z_p x Z/2(p-1), kappa = 0 at "
                    "p = 3,5,7; Pic = Z_2 x Z/2 x Z/4, kappa = Z/2 at p = 2 "
                    "with d3(x) = 2x^2 = 0")


def test_criterion_5_brauer_bounds(capsys):
    for p in (3, 5, 7):
        bb = brauer_bound(p)
        assert bb["upper_order"] == p - 1, p
        assert bb["certain_subquotient"] == FgZpModule(p, 0, (), (p - 1,)), p
        assert bb["cells"] == {(2, 1): FgZpModule(p, 0, (), (p - 1,))}, p
        assert bb["unknown_differentials"] == [], p
    bb = brauer_bound(2)
    assert bb["upper_order"] == 32
    assert len(bb["unknown_differentials"]) == 3
    _report(capsys, "CRITERION 5 PASS Brauer bound mu_{p-1} at odd primes; "
                    "exactly 32 with exactly 3 unknown differentials at p=2")


def test_criterion_6_decalage_suite(capsys):
    t0 = time.time()
    cells = 0
    for seed in range(50):
        fc = random_filtered_complex(seed)
        for r in (1, 2, 3):
            rep = decalage_check(fc, r)
            assert rep["passed"], (seed, r, rep["mismatches"][:3])
            cells += rep["cells"]
    elapsed = time.time() - t0
    assert elapsed < 60, f"criterion 6 took {elapsed:.0f}s"
    _report(capsys, f"CRITERION 6 PASS decalage reindexing verified on 50 "
                    f"seeded complexes x pages 1-3 ({cells} cells) "
                    f"in {elapsed:.0f}s")


def test_criterion_7_cli_determinism(tmp_path, capsys):
    def run_capture(argv):
        code = cli_main(argv)
        out = capsys.readouterr().out
        return code, out

    # byte-identical stdout for repeated runs
    repeat_cmds = [
        ["cohomology", "--group", "units", "-p", "3", "--coeff", "Zp(2)",
         "-s", "1", "--json"],
        ["groups", "-p", "3", "--json"],
        ["groups", "-p", "2", "--json"],
        ["decalage", "--seed", "3", "--count", "4", "--json"],
    ]
    for cmd in repeat_cmds:
        _, first = run_capture(cmd)
        _, second = run_capture(cmd)
        assert first == second, cmd
    # byte-identical files for the chart-emitting commands
    for cmd_name, prime in (("ass", "2"), ("picard", "2"), ("ass", "3"),
                            ("picard", "5")):
        d1, d2 = tmp_path / f"{cmd_name}{prime}a", tmp_path / f"{cmd_name}{prime}b"
        base = [cmd_name, "-p", prime, "--window", "-6:10", "--smax", "6"]
        assert run_capture(base + ["--out", str(d1)])[0] == 0
        assert run_capture(base + ["--out", str(d2)])[0] == 0
        files1 = sorted(f.name for f in d1.iterdir())
        files2 = sorted(f.name for f in d2.iterdir())
        assert files1 == files2 and files1
        for name in files1:
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes(), \
                (cmd_name, prime, name)
    _report(capsys, "CRITERION 7 PASS repeated CLI runs are byte-identical "
                    "(JSON and SVG/ASCII outputs)")
