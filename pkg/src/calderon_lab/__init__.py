"""calderon_lab: a desk-scale numerical laboratory for the Cauchy integral on
Lipschitz curves, Calderon commutators (kernel and multiplier forms),
multilinear symbols, Littlewood-Paley decompositions and dyadic model
operators.

Modules
-------
gridcore     periodic grids, FFT conventions, principal-value quadrature
profiles     analytic Lipschitz test functions with exact derivatives
symbols      exact / Monte-Carlo symbol evaluation, coefficient decay
lp_decomp    Littlewood-Paley families, projections, paraproducts
operators    the singular integral operators and exact-identity checks
dyadic       shifted dyadic intervals, adapted bumps, model sums
experiments  reproducible norm-estimate and growth studies
cli          command-line experiment runner
"""

from .gridcore import Domain, GridFunction, Spectrum, lp_norm
from .profiles import LipschitzProfile, ProfileSeed, make_profile
from .symbols import SymbolSpec, eval_symbol_exact, eval_symbol_mc

__version__ = "0.1.0"

__all__ = [
    "Domain",
    "GridFunction",
    "Spectrum",
    "lp_norm",
    "LipschitzProfile",
    "ProfileSeed",
    "make_profile",
    "SymbolSpec",
    "eval_symbol_exact",
    "eval_symbol_mc",
    "__version__",
]
