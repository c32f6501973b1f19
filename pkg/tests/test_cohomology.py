import pytest

from k1local.cohomology import (
    Sum,
    TrivialCyclic,
    TrivialZ2tor,
    TwistedFinite,
    TwistedZp,
    cohomology_finite_cyclic,
    cohomology_procyclic,
    cohomology_units,
    parse_coefficient,
    pic_coefficient,
    units_coefficient,
)
from k1local.errors import Unsupported
from k1local.fgmod import FgZpModule
from k1local.padic import generator_weight_valuation


def test_procyclic_examples():
    assert cohomology_procyclic(3, TwistedZp(0), 1) == FgZpModule.free(3)
    # coker of multiplication by 4^2 - 1 = 15 on Z_3
    assert cohomology_procyclic(3, TwistedZp(2), 1) == FgZpModule(3, 0, (1,))
    # 5 - 1 = 4 is injective on Z_2
    assert cohomology_procyclic(2, TwistedZp(1), 0).is_zero()
    assert cohomology_procyclic(2, TwistedZp(0), 2).is_zero()
    # prime-to-p coefficients: invariants in degree 0, nothing above
    assert cohomology_procyclic(3, TrivialCyclic(4), 0) == \
        FgZpModule(3, 0, (), (4,))
    assert cohomology_procyclic(3, TrivialCyclic(4), 1).is_zero()


def test_finite_cyclic_examples():
    z2 = FgZpModule(2, 0, (1,))
    assert cohomology_finite_cyclic(2, 2, z2, 1, 5) == z2
    # C_2 acting by -1 on Z_2: ker(norm)/im(-2) = Z/2
    assert cohomology_finite_cyclic(2, 2, FgZpModule.free(2), -1, 1, 12) == z2
    # order prime to p acts invertibly: no higher cohomology
    for s in (1, 2, 3):
        assert cohomology_finite_cyclic(3, 2, FgZpModule.free(3), 1, s).is_zero()


def test_finite_cyclic_two_periodicity():
    mods = [
        (2, 2, FgZpModule(2, 0, (3,)), 1),
        (2, 2, FgZpModule(2, 0, (2,)), -1),
        (3, 2, FgZpModule(3, 0, (), (8,)), 1),
    ]
    for p, m, mod, unit in mods:
        for s in (1, 2, 3, 4):
            a = cohomology_finite_cyclic(p, m, mod, unit, s)
            b = cohomology_finite_cyclic(p, m, mod, unit, s + 2)
            assert a == b


def test_units_ass_rows_odd():
    # H^s(Z_p^x, Z_p(t/2)): Z_p at t=0, s=0,1; Z/p^{v_p(t)+1} when
    # 2(p-1) | t, s=1; zero otherwise
    for p in (3, 5, 7):
        assert cohomology_units(p, TwistedZp(0), 0) == FgZpModule.free(p)
        assert cohomology_units(p, TwistedZp(0), 1) == FgZpModule.free(p)
        for s in (2, 3):
            assert cohomology_units(p, TwistedZp(0), s).is_zero()
        for tprime in (1, 2, 3):
            j = (p - 1) * tprime
            t = 2 * j
            want = FgZpModule(p, 0, (generator_weight_valuation(p, j),))
            assert cohomology_units(p, TwistedZp(j), 1) == want
            assert cohomology_units(p, TwistedZp(j), 0).is_zero()
            assert cohomology_units(p, TwistedZp(j), 2).is_zero()
        # rows with j not divisible by p-1 vanish entirely
        assert cohomology_units(5, TwistedZp(3), 1).is_zero()
        assert cohomology_units(7, TwistedZp(2), 1).is_zero()


def test_units_ass_rows_p2():
    z2 = FgZpModule(2, 0, (1,))
    # t = 0: Z_2, Z_2, then Z/2 forever
    assert cohomology_units(2, TwistedZp(0), 0) == FgZpModule.free(2)
    assert cohomology_units(2, TwistedZp(0), 1) == FgZpModule.free(2)
    for s in (2, 3, 4, 5):
        assert cohomology_units(2, TwistedZp(0), s) == z2
    # t == 2 mod 4 (j odd): Z/2 for all s >= 1
    for j in (1, 3, -1):
        assert cohomology_units(2, TwistedZp(j), 0).is_zero()
        for s in (1, 2, 3, 4):
            assert cohomology_units(2, TwistedZp(j), s) == z2
    # t == 0 mod 4, t != 0: Z/2^{v_2(t)+1} at s=1, Z/2 above
    for j in (2, 4, 6, -2):
        k = generator_weight_valuation(2, j)
        assert cohomology_units(2, TwistedZp(j), 1) == FgZpModule(2, 0, (k,))
        for s in (2, 3):
            assert cohomology_units(2, TwistedZp(j), s) == z2
    assert cohomology_units(2, TwistedZp(2), 1) == FgZpModule(2, 0, (3,))
    assert cohomology_units(2, TwistedZp(1), 3) == z2


def test_units_picard_rows():
    # t = 0 row: Z/2 in every degree (odd p), Z/2 then (Z/2)^2 at p=2
    for p in (3, 5):
        for s in range(4):
            assert cohomology_units(p, pic_coefficient(p), s) == \
                FgZpModule(p, 0, (), (2,))
    assert cohomology_units(2, pic_coefficient(2), 0) == FgZpModule(2, 0, (1,))
    for s in (1, 2, 3):
        assert cohomology_units(2, pic_coefficient(2), s) == \
            FgZpModule(2, 0, (1, 1))
    # t = 1 row (units): Z_p^x twice, then mu_{p-1}
    for p in (3, 7):
        u = units_coefficient(p)
        zpx = FgZpModule(p, 1, (), (p - 1,))
        assert cohomology_units(p, u, 0) == zpx
        assert cohomology_units(p, u, 1) == zpx
        for s in (2, 3, 4):
            assert cohomology_units(p, u, s) == FgZpModule(p, 0, (), (p - 1,))
    u2 = units_coefficient(2)
    assert cohomology_units(2, u2, 0) == FgZpModule(2, 1, (1,))
    assert cohomology_units(2, u2, 1) == FgZpModule(2, 1, (1, 1))
    for s in (2, 3, 4):
        assert cohomology_units(2, u2, s) == FgZpModule(2, 0, (1, 1, 1))
    # mu summand at odd p in positive degrees
    assert cohomology_units(3, Sum(TrivialCyclic(2), TwistedZp(0)), 2) == \
        FgZpModule(3, 0, (), (2,))


def test_chromatic_vanishing_check():
    for p in (2, 3, 5, 7):
        assert cohomology_units(p, TwistedZp(0), 0) == FgZpModule.free(p)


def test_twisted_finite():
    # H^s(Z_3^x, Z/9(2)): invariants and coinvariants both Z/3
    assert cohomology_units(3, TwistedFinite(2, 2), 0) == FgZpModule(3, 0, (1,))
    assert cohomology_units(3, TwistedFinite(2, 2), 1) == FgZpModule(3, 0, (1,))
    # twist not divisible by p-1 kills everything
    for s in range(3):
        assert cohomology_units(5, TwistedFinite(2, 1), s).is_zero()


def test_unsupported_and_validation():
    with pytest.raises(Unsupported):
        cohomology_units(3, TrivialZ2tor(1), 1)
    with pytest.raises(ValueError):
        cohomology_units(3, TrivialCyclic(6), 0)  # 6 not prime to 3
    with pytest.raises(Unsupported):
        cohomology_units(3, "nonsense", 0)


def test_parse_coefficient():
    assert parse_coefficient("Zp(2)", 3) == TwistedZp(2)
    assert parse_coefficient("Z/8(3)", 2) == TwistedFinite(3, 3)
    assert parse_coefficient("Z/3", 5) == TrivialCyclic(3)
    assert parse_coefficient("mu", 5) == TrivialCyclic(4)
    assert parse_coefficient("mu", 2) == TrivialZ2tor(1)
    assert parse_coefficient("units", 2) == Sum(TrivialZ2tor(1), TwistedZp(0))
    assert parse_coefficient("pic", 3) == TrivialCyclic(2)
    assert parse_coefficient("Zp(1)+Z/2", 5) == Sum(TwistedZp(1), TrivialCyclic(2))
    with pytest.raises(ValueError):
        parse_coefficient("Z/6(1)", 3)
    with pytest.raises(ValueError):
        parse_coefficient("garbage", 3)
