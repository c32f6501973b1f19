"""Deligne's decalage on filtered cochain complexes, checked cell by
cell against the reindexing E_r^{s,t}(Dec F) = E_{r+1}^{2s-t, s}(F).

Every complex here is a randomly generated finite complex of p-groups
with a random differential-stable filtration; the check recomputes both
spectral sequences from scratch and compares canonical forms.
"""

from k1local import decalage_check, random_filtered_complex, ss_of_filtration
from k1local.filtered import corrupted_decalage, decalage, naive_decalage

fc = random_filtered_complex(4)
print(f"a random filtered complex over Z_{fc.prime}:")
for n in fc.degrees():
    print(f"  C^{n}: generator orders {fc.orders[n]}")
print(f"  filtration steps: {fc.levels}")
print()

print("its E_1 and E_2 pages (bidegrees (s, t), t = s - n):")
for r in (1, 2):
    page = ss_of_filtration(fc, r)
    cells = ", ".join(f"({s},{t}): {m}" for (s, t), m in sorted(page.items()))
    print(f"  E_{r}: {cells or 'zero'}")
print()

dec = decalage(fc)
print(f"decalage shifts the filtration range {fc.filtration_range()} "
      f"to {dec.filtration_range()}")
for r in (1, 2, 3):
    rep = decalage_check(fc, r)
    print(f"  E_{r}(Dec) vs E_{r + 1}: "
          f"{'pass' if rep['passed'] else 'FAIL'} over {rep['cells']} cells")
print()

print("30 seeded complexes, pages 1-3:")
fails = 0
for seed in range(30):
    c = random_filtered_complex(seed)
    for r in (1, 2, 3):
        if not decalage_check(c, r)["passed"]:
            fails += 1
print(f"  {'all pass' if fails == 0 else f'{fails} failures'}")
print()

print("negative control (filtration indices shifted by one):")
rep = decalage_check(fc, 1, dec=corrupted_decalage(fc))
print(f"  corrupted decalage: {'pass' if rep['passed'] else 'FAIL'} "
      f"with {len(rep['mismatches'])} mismatching cells -- as it should")
print()
print("aside: the degreewise shift without the dx-condition is NOT a")
print("negative control; its pages agree with Dec's from E_1 on:")
rep = decalage_check(fc, 1, dec=naive_decalage(fc))
print(f"  naive shift: {'pass' if rep['passed'] else 'FAIL'}")
