"""Refinement ladder for the exact operator identities.

Runs the five identity checks on successively finer grids and prints the
interior sup-norm residuals together with the observed refinement slope
(expected: about 2, i.e. quadrature-dominated O(dx^2) error).
"""

import numpy as np

from calderon_lab.operators import IDENTITY_TAGS, identity_suite

ns = (512, 1024, 2048)

table = {tag: [] for tag in IDENTITY_TAGS}
for n in ns:
    for tag, res in identity_suite(n).items():
        table[tag].append(res["interior_sup"])

print(f"{'identity':10s}" + "".join(f"  N={n:<10d}" for n in ns) + "  slope")
for tag, errs in table.items():
    if max(errs) < 1e-6:
        slope_txt = "(floor)"
    else:
        slope, _ = np.polyfit(np.log([1.0 / n for n in ns]), np.log(errs), 1)
        slope_txt = f"{slope:5.2f}"
    cells = "".join(f"  {e:12.3e}" for e in errs)
    print(f"{tag:10s}{cells}  {slope_txt}")
