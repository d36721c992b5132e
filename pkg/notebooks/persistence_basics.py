"""
Barcodes of a small filtration
==============================

A triangle whose boundary appears at time 0 and whose interior appears
at time 1: one 1-cycle is born and then filled.
"""

from twomapper import FilteredComplex, betti_curve, reduce
from twomapper.persistence import oracle_betti

fc = FilteredComplex()
for edge in [(0, 1), (1, 2), (0, 2)]:
    fc.insert(edge, 0.0)
fc.insert((0, 1, 2), 1.0)

bars = reduce(fc)
print(bars.to_csv())

# Betti numbers from the barcode agree with ranks of boundary matrices.
for t in (0.0, 1.0):
    print(t, [sum(1 for iv in bars if iv.dim == p and iv.birth <= t < iv.death) for p in range(3)], oracle_betti(fc.sublevel(t)))

print(betti_curve(bars, 1, [0.0, 1.0]).samples)
