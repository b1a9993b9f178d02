"""Discrete dyadic world: shifted intervals, adapted bumps, model operators,
and shifted maximal / square functions.

A dyadic interval is I = [2^-k m, 2^-k (m+1)); its shifted copy I_n sits n
interval lengths to the right.  Adapted bumps are Gaussian-windowed:

    phi(z) = 2^(1/4) exp(-pi z^2)                    (Phi-type, L^2-unit)
    psi(z) = sqrt(4 sqrt(2)/3) (1 - 2 pi z^2) exp(-pi z^2)   (Psi-type,
             exactly mean zero, L^2-unit)

and an L^p-normalised bump on I is |I|^(1/2 - 1/p) times the L^2-normalised
one (so p = 2 is the default unit normalisation used by the model operator).

The model operator over a finite interval family J is

    T_J(f_1..f_l)(x) = sum_{I in J} |I|^(-(l-2)/2)
                         <f_1, B^1_{I_{n_1}}> ... <f_l, B^l_{I_{n_l}}> B^{l+1}_I(x)

with L^2-normalised bumps B^j; the companion scalar form uses the exponent
-(l-1)/2 and absolute values throughout, with the last slot paired against a
set indicator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gridcore import GridFunction, fractional_shift
from .lp_decomp import spectral_bandpass

__all__ = [
    "DyadicInterval",
    "AdaptedBump",
    "ModelOperatorSpec",
    "apply_model",
    "model_form",
    "shifted_maximal",
    "shifted_square",
]

_PSI_NORM = math.sqrt(4.0 * math.sqrt(2.0) / 3.0)


@dataclass(frozen=True)
class DyadicInterval:
    k: int
    m: int

    @property
    def length(self):
        return 2.0**-self.k

    @property
    def left(self):
        return 2.0**-self.k * self.m

    @property
    def right(self):
        return 2.0**-self.k * (self.m + 1)

    @property
    def center(self):
        return 2.0**-self.k * (self.m + 0.5)

    def shifted(self, n):
        """Interval of the same length sitting n lengths away."""
        return DyadicInterval(self.k, self.m + n)

    def contains(self, x):
        return (self.left <= x) & (x < self.right)


@dataclass(frozen=True)
class AdaptedBump:
    """Closed-form bump adapted to ``interval.shifted(shift)``."""

    interval: DyadicInterval
    shift: int = 0
    kind: str = "phi"
    p: float = 2.0

    def __post_init__(self):
        if self.kind not in ("phi", "psi"):
            raise ValueError(f"bump kind must be 'phi' or 'psi', got {self.kind!r}")
        if not 1.0 <= self.p:
            raise ValueError("normalisation exponent p must be >= 1")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        I = self.interval
        h = I.length
        z = (x - I.shifted(self.shift).center) / h
        if self.kind == "phi":
            core = 2.0**0.25 * np.exp(-np.pi * z * z)
        else:
            core = _PSI_NORM * (1.0 - 2.0 * np.pi * z * z) * np.exp(-np.pi * z * z)
        # L^2-unit is h^{-1/2} core(z); L^p normalisation rescales by h^{1/2-1/p}
        return h ** (0.5 - 1.0 / self.p) * h**-0.5 * core


@dataclass(frozen=True)
class ModelOperatorSpec:
    """Arity-l model sum: shifts and bump kinds for slots 1..l plus the output
    slot, over the interval family {(k, m)} given by ``intervals``."""

    shifts: tuple
    kinds: tuple  # length l + 1, last entry is the output bump
    intervals: tuple  # of DyadicInterval

    def __post_init__(self):
        if len(self.kinds) != len(self.shifts) + 1:
            raise ValueError("need one kind per input slot plus the output slot")
        if sum(1 for s in self.kinds if s == "psi") < 2:
            raise ValueError("at least two slots must be of psi type")
        if any(s not in ("phi", "psi") for s in self.kinds):
            raise ValueError("unknown bump kind in spec")

    @property
    def arity(self):
        return len(self.shifts)

    def as_config(self):
        return {
            "shifts": ",".join(str(s) for s in self.shifts),
            "kinds": ",".join(self.kinds),
            "intervals": ";".join(f"{I.k},{I.m}" for I in self.intervals),
        }


def _check_resolution(spec, domain):
    if not spec.intervals:  # empty family: the sum is trivially zero
        return
    finest = max(I.k for I in spec.intervals)
    if 2.0**-finest < 16 * domain.dx:
        raise ValueError(
            "grid too coarse: smallest model interval must span at least 16 cells"
        )


def _pairing(f, bump):
    return np.sum(f.values * bump(f.domain.x)) * f.domain.dx


def apply_model(spec: ModelOperatorSpec, fs):
    """The model operator T_J applied to l grid functions."""
    l = spec.arity
    if len(fs) != l:
        raise ValueError(f"expected {l} inputs, got {len(fs)}")
    domain = fs[0].domain
    for g in fs[1:]:
        if g.domain != domain:
            raise ValueError("domain mismatch")
    _check_resolution(spec, domain)
    out = np.zeros(domain.n, dtype=complex)
    for I in spec.intervals:
        coef = I.length ** (-(l - 2) / 2.0)
        for f, n, kind in zip(fs, spec.shifts, spec.kinds[:-1]):
            coef *= _pairing(f, AdaptedBump(I, n, kind))
        out += coef * AdaptedBump(I, 0, spec.kinds[-1])(domain.x)
    return GridFunction(domain, out)


def model_form(spec: ModelOperatorSpec, fs, indicator):
    """Absolute-value scalar form: the output slot pairs against a set
    indicator and every factor enters with |.|; monotone in the family."""
    l = spec.arity
    if len(fs) != l:
        raise ValueError(f"expected {l} inputs, got {len(fs)}")
    domain = fs[0].domain
    _check_resolution(spec, domain)
    total = 0.0
    for I in spec.intervals:
        coef = I.length ** (-(l - 1) / 2.0)
        for f, n, kind in zip(fs, spec.shifts, spec.kinds[:-1]):
            coef *= abs(_pairing(f, AdaptedBump(I, n, kind)))
        coef *= abs(_pairing(indicator, AdaptedBump(I, 0, spec.kinds[-1])))
        total += coef
    return float(total)


def shifted_maximal(n, f: GridFunction, min_cells=1):
    """Dyadic shifted maximal function

        M^n f(x) = sup over dyadic I containing x of avg_{I_n} |f|

    with I running over the grid-aligned dyadic blocks (>= ``min_cells``
    cells) and I_n the block n lengths to the right.  Scales where the
    shifted block would wrap past a full period ((n+1) * cells > N) are
    excluded: on the torus that block is not "n lengths away" in any
    meaningful sense, and keeping it contaminates large-shift statistics
    with re-aligned copies of the near-diagonal averages.  For n = 0 all
    scales up to the full period contribute, recovering the ordinary
    dyadic maximal average.  Computed by block prefix averaging,
    O(N log N).
    """
    if n < 0 or int(n) != n:
        raise ValueError("shift must be a nonnegative integer")
    v = np.abs(f.values)
    N = f.domain.n
    out = np.zeros(N)
    cells = min_cells
    while cells <= N:
        nb = N // cells
        if (n + 1) * cells <= N:
            avg = v.reshape(nb, cells).mean(axis=1)
            shifted = avg[(np.arange(nb) + n) % nb]
            out = np.maximum(out, np.repeat(shifted, cells))
        cells *= 2
    return GridFunction(f.domain, out.astype(complex))


def shifted_square(n, family, f: GridFunction, k_min, k_max):
    """Shifted discrete square function

        S^n f(x) = ( sum_k |(f * Psi_k)(x + n 2^-k)|^2 )^(1/2)

    over scales k in [k_min, k_max]; each scale's translate is realised by an
    exact spectral phase.
    """
    acc = np.zeros(f.domain.n)
    for k in range(k_min, k_max + 1):
        piece = spectral_bandpass(f, family, k)
        piece = fractional_shift(piece, n * 2.0**-k)
        acc += np.abs(piece.values) ** 2
    return GridFunction(f.domain, np.sqrt(acc).astype(complex))
