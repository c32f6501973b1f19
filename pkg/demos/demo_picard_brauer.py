"""Picard and Brauer groups of the K(1)-local category, extracted from
the Picard spectral sequence.

The 0-stem assembles to the Picard group: filtrations 0-1 see the
algebraic part, filtration >= 2 the exotic part.  At p = 2 the
quadratic correction d3(x) = d3_ASS(x) + x^2 = 2x^2 = 0 is exactly what
lets the exotic class survive.  The (-1)-stem bounds the relative
Brauer group; at p = 2 three differentials are undetermined and the
bound keeps them as unknowns.
"""

from k1local import Window, brauer_bound, extract_pic, picard_run
from k1local.charts import ascii_chart

print("Picard groups")
print("-" * 60)
for p in (3, 5, 7, 2):
    res = extract_pic(p)
    print(f"p = {p}:")
    print(f"  Pic      = {res['pic'].invariant_factor_string()}")
    print(f"  Pic_alg  = {res['pic_alg'].invariant_factor_string()}")
    print(f"  kappa    = {res['kappa'].invariant_factor_string()}")
print()

print("the p = 2 Picard 0-stem, cell by cell:")
run = extract_pic(2)["run"]
for (s, t), mod in sorted(run.final_in_window().entries.items()):
    if t - s == 0:
        print(f"  filtration {s}: {mod}")
print("  -> Z/4 joins the filtration-1 and filtration-3 classes;")
print("     the filtration-0 circle feeds the free summand")
print()

print("Brauer bounds from the (-1)-stem")
print("-" * 60)
for p in (3, 5, 7, 2):
    bb = brauer_bound(p)
    unk = len(bb["unknown_differentials"])
    print(f"p = {p}: |Br| <= {bb['upper_order']}"
          f"   certain part {bb['certain_subquotient'].invariant_factor_string()}"
          f"   ({unk} undetermined differentials)")
print()

print("p = 2 Picard E_3 chart (the dashed/unknown arrows are reported,")
print("never installed):")
run2 = picard_run(2, Window(-6, 10, 7))
print(ascii_chart(run2.page_in_window(3)))
