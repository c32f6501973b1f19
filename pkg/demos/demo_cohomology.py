"""Continuous cohomology of the p-adic unit group, with the brute-force
bar-complex oracle run alongside the closed form.

The unit group Z_p^x acts on Z_p(j) = Z_p through the j-th power of the
standard character; the cohomology of this action is the raw material
for every chart in this package.
"""

from k1local import (
    TwistedFinite,
    TwistedZp,
    cohomology_units,
    stabilized_cohomology,
    units_coefficient,
)

print("H^s(Z_p^x, Z_p(j)) -- the descent-spectral-sequence columns")
print()
for p in (3, 5):
    print(f"p = {p}:")
    for j in (0, 1, p - 1, 2 * (p - 1), (p - 1) * p):
        row = [str(cohomology_units(p, TwistedZp(j), s)) for s in range(3)]
        print(f"  j = {j:3d} (t = {2 * j:3d}):  s=0: {row[0]:6s} "
              f"s=1: {row[1]:6s} s=2: {row[2]}")
    print()

print("p = 2 keeps 2-torsion in every degree:")
for j in (0, 1, 2, 4):
    row = [str(cohomology_units(2, TwistedZp(j), s)) for s in range(4)]
    print(f"  j = {j}:  " + "  ".join(f"s={s}: {v}" for s, v in enumerate(row)))
print()

print("the unit-group coefficient (the t = 1 Picard row):")
for p in (3, 2):
    vals = [str(cohomology_units(p, units_coefficient(p), s)) for s in range(4)]
    print(f"  p = {p}: " + " | ".join(vals))
print()

print("oracle spot-checks (finite coefficients, finite quotient groups,")
print("normalized bar complex, stabilised along inflation):")
for (p, m, j, s) in ((3, 2, 2, 1), (2, 2, 0, 2), (5, 1, 4, 1), (2, 3, 4, 1)):
    got, cert = stabilized_cohomology(p, m, j, s)
    closed = cohomology_units(p, TwistedFinite(m, j), s)
    mark = "==" if got == closed else "!="
    print(f"  H^{s}(Z_{p}^x, Z/{p ** m}({j})): oracle {got} {mark} "
          f"closed {closed}   (levels {cert['levels']})")
