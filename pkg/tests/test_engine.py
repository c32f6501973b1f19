import pytest

from k1local.engine import (
    ClassSelector,
    Differential,
    ExtensionRecord,
    Page,
    Window,
    assemble_stem,
    run_to_collapse,
    turn_page,
    vanishing_line_holds,
)
from k1local.errors import NotAComplex, TruncatedError
from k1local.fgmod import FgZpModule, ModuleMap


def _page(prime, entries, r=2, window=None):
    win = window or Window(-8, 8, 8)
    return Page(prime, r, win, dict(entries))


def test_turn_page_identity_without_differentials():
    z8 = FgZpModule(2, 0, (3,))
    page = _page(2, {(1, 4): z8, (0, 0): FgZpModule.free(2)})
    nxt = turn_page(page)
    assert nxt.r == 3
    assert nxt.entries == page.entries
    again = turn_page(nxt)
    assert again.entries == page.entries


def test_turn_page_with_rank_one_differential():
    # Z/8 at (1,4) hitting Z/2 at (4,6): new entries Z/4 and 0
    z8 = FgZpModule(2, 0, (3,))
    z2 = FgZpModule(2, 0, (1,))
    page = Page(2, 3, Window(-8, 8, 8), {(1, 4): z8, (4, 6): z2})
    page = page.install([Differential((1, 4), (4, 6), ModuleMap(z8, z2, [[1]]))])
    nxt = turn_page(page)
    assert nxt.entry((1, 4)) == FgZpModule(2, 0, (2,))
    assert nxt.entry_or_zero((4, 6)).is_zero()


def test_install_validates_shift_and_composability():
    z2 = FgZpModule(2, 0, (1,))
    page = Page(2, 3, Window(-8, 8, 8),
                {(0, 0): z2, (3, 2): z2, (6, 4): z2})
    with pytest.raises(ValueError):
        page.install([Differential((0, 0), (2, 2), ModuleMap(z2, z2, [[1]]))])
    # d o d != 0 rejected
    with pytest.raises(NotAComplex):
        page.install([
            Differential((0, 0), (3, 2), ModuleMap(z2, z2, [[1]])),
            Differential((3, 2), (6, 4), ModuleMap(z2, z2, [[1]])),
        ])
    # composable but composing to zero is fine
    page.install([
        Differential((0, 0), (3, 2), ModuleMap(z2, z2, [[1]])),
        Differential((3, 2), (6, 4), ModuleMap(z2, z2, [[0]])),
    ])


def test_run_to_collapse_certificate_and_no_collapse():
    z2 = FgZpModule(2, 0, (1,))
    page = Page(2, 2, Window(-4, 4, 6), {(0, 0): z2, (1, 2): z2})

    def no_arrows(_page):
        return []

    out = run_to_collapse(page, no_arrows, vanishing_line=1)
    assert out.flags["collapsed_at"] == 2

    tall = Page(2, 2, Window(-4, 4, 6), {(5, 0): z2})
    out = run_to_collapse(tall, no_arrows, r_max=4, vanishing_line=1)
    assert out.flags.get("NoCollapse") is True
    assert not vanishing_line_holds(tall, 1)


def test_truncation_is_sticky():
    z2 = FgZpModule(2, 0, (1,))
    page = Page(2, 3, Window(-4, 8, 8), {(1, 2): z2, (4, 4): z2})
    page.truncated.add((4, 4))
    page = page.install(
        [Differential((1, 2), (4, 4), ModuleMap(z2, z2, [[1]]))])
    nxt = turn_page(page)
    # both the truncated cell and its differential partner lose their value
    assert (4, 4) in nxt.truncated
    assert (1, 2) in nxt.truncated
    with pytest.raises(TruncatedError):
        nxt.entry((1, 2))


def test_assemble_stem_basics():
    zp = FgZpModule.free(5)
    page = _page(5, {(1, 1): zp})
    assert assemble_stem(page, 0) == zp
    # two Z/2 cells with no record: split
    z2 = FgZpModule(2, 0, (1,))
    page = _page(2, {(0, 0): z2, (2, 2): z2})
    assert assemble_stem(page, 0) == FgZpModule(2, 0, (1, 1))
    # a nontrivial record joins them into Z/4
    rec = ExtensionRecord(0, ClassSelector(0, "torsion", 0),
                          ClassSelector(2, "torsion", 0))
    assert assemble_stem(page, 0, [rec]) == FgZpModule(2, 0, (2,))
    # a torsion class joined into a free summand is absorbed
    page = _page(2, {(0, 0): z2, (1, 1): FgZpModule.free(2)})
    rec = ExtensionRecord(0, ClassSelector(0, "torsion", 0),
                          ClassSelector(1, "free", 0))
    assert assemble_stem(page, 0, [rec]) == FgZpModule.free(2)


def test_assemble_stem_total_order_bookkeeping():
    # free ranks add, torsion orders multiply, independent of records
    z4 = FgZpModule(2, 0, (2,))
    z2 = FgZpModule(2, 0, (1,))
    zf = FgZpModule(2, 1, (1,))
    page = _page(2, {(0, 0): z4, (1, 1): z2, (3, 3): zf})
    rec = ExtensionRecord(0, ClassSelector(0, "torsion", 0),
                          ClassSelector(1, "torsion", 0))
    for recs in ([], [rec]):
        total = assemble_stem(page, 0, recs)
        assert total.free_rank == 1
        assert total.torsion_order() == 16


def test_assemble_stem_trunc_and_missing_class():
    z2 = FgZpModule(2, 0, (1,))
    page = _page(2, {(0, 0): z2})
    page.truncated.add((2, 2))
    with pytest.raises(TruncatedError):
        assemble_stem(page, 0)
    clean = _page(2, {(0, 0): z2})
    rec = ExtensionRecord(0, ClassSelector(0, "torsion", 0),
                          ClassSelector(4, "torsion", 0))
    with pytest.raises(ValueError):
        assemble_stem(clean, 0, [rec])


def test_page_json_roundtrip_determinism():
    z2 = FgZpModule(2, 0, (1,))
    z8 = FgZpModule(2, 0, (3,))
    page = Page(2, 3, Window(-4, 6, 6), {(1, 4): z8, (4, 6): z2})
    page = page.install([Differential((1, 4), (4, 6), ModuleMap(z8, z2, [[1]]))])
    import json
    a = json.dumps(page.to_json(), sort_keys=True)
    b = json.dumps(page.to_json(), sort_keys=True)
    assert a == b
    parsed = json.loads(a)
    assert parsed["cells"][0]["group"] == {"p": 2, "free": 0, "torsion": [3]}
    assert parsed["diffs"][0]["from"] == [1, 4]
    assert parsed["diffs"][0]["rank_data"] == [[1]]
