import random
from itertools import product

import pytest

from k1local.errors import NotAComplex, PrecisionExhausted, PrimeMismatch
from k1local.fgmod import (
    FgZpModule,
    ModuleMap,
    cokernel,
    direct_sum,
    homology_at,
    kernel,
    matmul,
    smith_normal_form,
)
from k1local.padic import int_valuation


def test_snf_identity():
    d, u, v = smith_normal_form([[1, 0], [0, 1]], 5)
    assert d == [1, 1]


def test_snf_already_diagonal():
    d, _, _ = smith_normal_form([[2, 0], [0, 8]], 2)
    assert d == [2, 8]


def test_snf_elementary_example():
    # det = 27: reduces to diag(3, 9)
    m = [[3, 3], [3, 12]]
    d, u, v = smith_normal_form(m, 3)
    assert [int_valuation(x, 3) for x in d] == [1, 2]
    # U m V = D exactly, and the transforms are Z_(3)-invertible
    um = matmul(u, m)
    umv = matmul(um, v)
    assert umv[0][1] == umv[1][0] == 0
    assert [umv[0][0], umv[1][1]] == d
    det_u = u[0][0] * u[1][1] - u[0][1] * u[1][0]
    det_v = v[0][0] * v[1][1] - v[0][1] * v[1][0]
    assert det_u % 3 != 0 and det_v % 3 != 0


def test_cokernel_examples():
    z3 = FgZpModule.free(3)
    assert cokernel(ModuleMap(z3, z3, [[0]])) == z3
    # multiplication by 4^2 - 1 = 15 on Z_3: H^1 at t = 4 for p = 3
    assert cokernel(ModuleMap(z3, z3, [[15]])) == FgZpModule(3, 0, (1,))
    z2 = FgZpModule.free(2)
    # multiplication by 5^2 - 1 = 24 on Z_2: H^1 at t = 4 for p = 2
    assert cokernel(ModuleMap(z2, z2, [[24]]), precision=8) == \
        FgZpModule(2, 0, (3,))


def test_kernel_examples():
    z9 = FgZpModule(3, 0, (2,))
    assert kernel(ModuleMap(z9, z9, [[0]])) == z9
    z3 = FgZpModule.free(3)
    assert kernel(ModuleMap(z3, z3, [[15]])).is_zero()
    assert kernel(ModuleMap(z9, z9, [[3]])) == FgZpModule(3, 0, (1,))


def test_homology_examples():
    z4 = FgZpModule(2, 0, (2,))
    zero = FgZpModule.zero(2)
    f = ModuleMap(zero, z4)
    g = ModuleMap(z4, zero)
    assert homology_at(f, g) == z4
    # Z/2 --0--> Z/8 --proj--> Z/2 has homology Z/4
    z2 = FgZpModule(2, 0, (1,))
    z8 = FgZpModule(2, 0, (3,))
    assert homology_at(ModuleMap(z2, z8), ModuleMap(z8, z2, [[1]])) == z4
    # Z_2 --2--> Z_2 --> 0 has homology Z/2
    zf = FgZpModule.free(2)
    assert homology_at(ModuleMap(zf, zf, [[2]]), ModuleMap(zf, zero)) == z2


def test_homology_rejects_noncomplex():
    z2 = FgZpModule(2, 0, (1,))
    with pytest.raises(NotAComplex):
        homology_at(ModuleMap(z2, z2, [[1]]), ModuleMap(z2, z2, [[1]]))


def test_homology_of_exact_pair_vanishes():
    # Z/8 --2--> Z/8 --4--> Z/8 is exact at the middle
    z8 = FgZpModule(2, 0, (3,))
    h = homology_at(ModuleMap(z8, z8, [[2]]), ModuleMap(z8, z8, [[4]]))
    assert h.is_zero()


def test_direct_sum_examples():
    assert direct_sum([], 5).is_zero()
    z2f = FgZpModule.free(2)
    c2 = FgZpModule(2, 0, (1,))
    s = direct_sum([z2f, c2, c2])
    assert s == FgZpModule(2, 1, (1, 1))
    a = FgZpModule(2, 0, (2, 1))
    b = FgZpModule(2, 0, (3,))
    assert a.direct_sum(b) == FgZpModule(2, 0, (3, 2, 1))
    with pytest.raises(PrimeMismatch):
        direct_sum([FgZpModule.free(2), FgZpModule.free(3)])


def test_canonical_form_is_isomorphism_invariant():
    assert FgZpModule(3, 0, (1, 2)) == FgZpModule(3, 0, (2, 1))
    assert FgZpModule.cyclic(3, 18) == FgZpModule(3, 0, (2,), (2,))
    assert FgZpModule.cyclic(7, 12) == FgZpModule(7, 0, (), (4, 3))


def test_precision_exhausted_and_retry():
    z2 = FgZpModule.free(2)
    f = ModuleMap(z2, z2, [[2 ** 20]])
    with pytest.raises(PrecisionExhausted):
        cokernel(f, precision=4, retries=0)
    # the retry ladder resolves it
    assert cokernel(f, precision=4, retries=3) == FgZpModule(2, 0, (20,))


# ---------------------------------------------------------------------------
# brute-force enumeration oracle for small finite modules


def _elements(mod):
    return list(product(*(range(q) for q in mod.summand_orders())))


def _apply(f, x):
    orders = f.codomain.summand_orders()
    out = []
    for i in range(len(orders)):
        val = sum(f.matrix[i][k] * x[k] for k in range(len(x)))
        out.append(val % orders[i])
    return tuple(out)


def _group_from_element_orders(p, elems, order_of):
    """Recover the abelian p-group structure from counts of elements
    killed by p^k (these determine the partition)."""
    import math

    counts = []
    k = 0
    while True:
        c = sum(1 for e in elems if order_of(e, k))
        counts.append(c)
        if c == len(elems):
            break
        k += 1
    # counts[k] = p^{sum_i min(k, lambda_i)}
    logs = [round(math.log(c, p)) if c > 1 else 0 for c in counts]
    parts_ge = [logs[k] - logs[k - 1] for k in range(1, len(logs))]
    npos = parts_ge[0] if parts_ge else 0
    out = [sum(1 for g in parts_ge if g > pos) for pos in range(npos)]
    return FgZpModule(p, 0, tuple(out))


def _random_map(rng, p):
    def rand_module():
        n = rng.randint(0, 3)
        exps = tuple(rng.randint(1, 3) for _ in range(n))
        while sum(exps) > 6:
            exps = exps[:-1]
        return FgZpModule(p, 0, exps)

    dom = rand_module()
    cod = rand_module()
    dorders = dom.summand_orders()
    corders = cod.summand_orders()
    mat = [[0] * len(dorders) for _ in range(len(corders))]
    for i in range(len(corders)):
        for k in range(len(dorders)):
            # any multiple of q_i / gcd(q_i, q_k) respects the torsion
            step = corders[i] // _gcd(corders[i], dorders[k])
            mat[i][k] = step * rng.randint(0, 4)
    return ModuleMap(dom, cod, mat)


def _gcd(a, b):
    import math
    return math.gcd(a, b)


def test_kernel_cokernel_against_enumeration():
    rng = random.Random(77)
    for _ in range(40):
        p = rng.choice([2, 3])
        f = _random_map(rng, p)
        dom_elems = _elements(f.domain)
        cod_elems = _elements(f.codomain)
        image = {_apply(f, x) for x in dom_elems}
        ker_elems = [x for x in dom_elems if not any(_apply(f, x))]

        def killed_in_kernel(x, k):
            orders = f.domain.summand_orders()
            return all((p ** k * xi) % q == 0 for xi, q in zip(x, orders))

        got_ker = kernel(f)
        want_ker = _group_from_element_orders(p, ker_elems, killed_in_kernel)
        assert got_ker == want_ker, (f.domain, f.codomain, f.matrix)

        def killed_in_coker(y, k):
            orders = f.codomain.summand_orders()
            scaled = tuple((p ** k * yi) % q for yi, q in zip(y, orders))
            return scaled in image

        got_cok = cokernel(f)
        want_cok = _group_from_element_orders(p, cod_elems, killed_in_coker)
        assert got_cok == want_cok, (f.domain, f.codomain, f.matrix)


def test_homology_against_enumeration():
    rng = random.Random(78)
    done = 0
    while done < 25:
        p = rng.choice([2, 3])
        f = _random_map(rng, p)
        g = _random_map(rng, p)
        if g.domain != f.codomain:
            continue
        comp = g.compose(f)
        if not comp.is_zero():
            # force a complex: replace g by the zero map
            g = ModuleMap(f.codomain, g.codomain)
        done += 1
        mid = _elements(f.codomain)
        image = {_apply(f, x) for x in _elements(f.domain)}
        ker_g = [y for y in mid if not any(_apply(g, y))]

        def killed(y, k):
            orders = f.codomain.summand_orders()
            scaled = tuple((p ** k * yi) % q for yi, q in zip(y, orders))
            return scaled in image

        got = homology_at(f, g)
        want = _group_from_element_orders(p, ker_g, killed)
        assert got == want
