"""Windowed Fourier coefficients of the bilinear commutator symbol.

Builds a small coefficient table and prints the magnitudes along both index
axes with fitted power-law decay slopes.  At this index range both axes
decay fast; the production-size study (``calderon-lab run decay``) measures
the asymptotic rates on a wider index range.
"""

from calderon_lab.symbols import build_coeff_table, fit_decay

ns = [8, 12, 16, 24, 32, 48, 64]
table = build_coeff_table(ns + [0], ns + [0], resolution=256, oversample=8)

print("n     |C(n,0)|       |C(0,n)|")
for n in ns:
    print(f"{n:4d}  {abs(table[(n, 0)]):.6e}  {abs(table[(0, n)]):.6e}")

for axis in ("n", "n1"):
    fit = fit_decay(table, axis, 0, ns)
    print(f"{axis}-axis decay slope: {fit['slope']:+.2f}  (r^2 = {fit['r2']:.4f})")
