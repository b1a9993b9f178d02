"""Geometric commutator expansion of the Cauchy integral.

At small Lipschitz constant the Cauchy integral on the graph of A expands as
an alternating series of higher commutators.  This prints the relative error
of the partial sums against direct quadrature: each extra term should buy
roughly a factor lip.
"""

import numpy as np

from calderon_lab.gridcore import Domain, GridFunction, lp_norm
from calderon_lab.operators import apply_cauchy, cauchy_series
from calderon_lab.profiles import ProfileSeed, make_profile

lip = 0.3
dom = Domain(32.0, 2048)
unit = 1.0 / np.sqrt(2.0 * np.pi / np.e)  # gaussian amplitude with sup|A'| = 1
A = make_profile(ProfileSeed("gaussian-bump", amplitude=lip * unit))
f = GridFunction.from_callable(dom, lambda x: np.exp(-np.pi * (x - 1.0) ** 2))

direct = apply_cauchy(A, f)
print(f"lip = {lip}")
print("depth  rel L2 error   ratio")
prev = None
for D in range(7):
    part = cauchy_series(A, f, D)
    err = lp_norm(part - direct, 2) / lp_norm(direct, 2)
    ratio = "" if prev is None else f"{err / prev:8.3f}"
    print(f"{D:5d}  {err:12.4e}  {ratio}")
    prev = err
