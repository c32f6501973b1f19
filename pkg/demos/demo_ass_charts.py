"""The descent (K(1)-local Adams) spectral sequence at both primes,
drawn as ASCII charts.

At odd primes the starting page is concentrated in filtrations <= 1 and
there is nothing for a differential to do.  At p = 2 the page carries
infinite eta-towers; the page-3 differentials follow the Leibniz rule
d3(u^2) = eta^3 on the ring model Z_2[eta, u^{+-2}]/2eta (plus a shipped
table for the filtration-one torsion row), and everything above
filtration 3 dies at E_4.
"""

from k1local import Window, ass_run
from k1local.charts import ascii_chart
from k1local.engine import assemble_stem
from k1local.heightone import extension_records

window = Window(-8, 14, 8)

print("=" * 72)
print("p = 3: E_2 = E_oo")
print("=" * 72)
run = ass_run(3, window)
print(ascii_chart(run.final_in_window()))

print("=" * 72)
print("p = 2: E_3 page (towers everywhere, d_3 about to act)")
print("=" * 72)
run2 = ass_run(2, window)
print(ascii_chart(run2.page_in_window(3)))

print("=" * 72)
print("p = 2: E_4 = E_oo (vanishing line at s = 3)")
print("=" * 72)
fin = run2.final_in_window()
print(ascii_chart(fin))

print("stems assembled from the E_oo page (p = 2):")
for stem in range(0, 8):
    recs = extension_records(fin, "ass", 2, stem)
    group = assemble_stem(fin, stem, recs)
    print(f"  pi_{stem} of the K(1)-local sphere: {group.invariant_factor_string()}")
print()
print("(the stem-3 answer Z/8 uses the shipped extension line between")
print(" the filtration-1 and filtration-3 classes)")
