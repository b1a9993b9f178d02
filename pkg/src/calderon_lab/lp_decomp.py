"""Littlewood-Paley families, smoothed projections and paraproducts.

Two mother bumps are provided:

* ``"noncompact"`` -- the Gaussian pair Phi(x) = exp(-pi x^2),
  Psi = Phi - (1/2) Phi(./2), so on the Fourier side
  Phi^(xi) = exp(-pi xi^2) and Psi^(xi) = exp(-pi xi^2) - exp(-4 pi xi^2).
  The spatial Phi is positive, which makes the averaged sup bound
  |f * Phi_k| <= sup|f| exact for the sampled-kernel convolution route.

* ``"compact"`` -- Phi^ is identically 1 on [-1/2, 1/2], supported in
  [-1, 1], glued with the standard exp(-1/t) transition;
  Psi^(xi) = Phi^(xi) - Phi^(2 xi) is supported in 1/4 <= |xi| <= 1 and the
  dilates Psi^(xi / 2^k) form an exact partition of unity away from xi = 0.

Scaled versions follow the L^1-normalised convention
Phi_k(x) = 2^k Phi(2^k x), i.e. Phi_k^(xi) = Phi^(xi / 2^k), and
Psi_k = Phi_k - Phi_{k-1}, so partial sums telescope exactly:

    sum_{k=k_min}^{k_max} Psi_k = Phi_{k_max} - Phi_{k_min - 1}.

Convolutions come in two deliberately distinct flavours:

* :func:`spectral_lowpass` / :func:`spectral_bandpass` multiply the discrete
  spectrum by Phi^ or Psi^ -- exact in frequency, used wherever a later
  frequency-side identity must hold to rounding;
* :func:`convolve_scaled` convolves with the *sampled and renormalised*
  spatial kernel -- its discrete weights are exactly nonnegative with unit
  mass (for the noncompact Phi), so sup-norm contractivity holds to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gridcore import GridFunction, Spectrum, forward_transform, inverse_transform

__all__ = [
    "BumpFamily",
    "build_family",
    "telescope_residual",
    "psi_factor",
    "spectral_lowpass",
    "spectral_bandpass",
    "convolve_scaled",
    "paraproduct_apply",
    "whitney_cover",
    "partition_residual",
]


def _smoothstep(t):
    """C^infinity transition: 1 at t<=0, 0 at t>=1, built from exp(-1/t)."""
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        g = np.where(t > 0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        h = np.where(t < 1, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    return h / (g + h)


@dataclass(frozen=True)
class BumpFamily:
    """Mother low-pass Phi and band-pass Psi = Phi - Phi(2 .)-hat pair."""

    name: str

    def phi_hat(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.name == "noncompact":
            return np.exp(-np.pi * xi * xi)
        return _smoothstep(2.0 * np.abs(xi) - 1.0)

    def psi_hat(self, xi):
        xi = np.asarray(xi, dtype=float)
        return self.phi_hat(xi) - self.phi_hat(2.0 * xi)

    def phi(self, x):
        """Spatial mother bump (noncompact family only has a closed form)."""
        if self.name != "noncompact":
            raise ValueError("spatial samples are only provided for the Gaussian family")
        x = np.asarray(x, dtype=float)
        return np.exp(-np.pi * x * x)

    # scaled dilates, L^1 normalisation: phi_k(x) = 2^k phi(2^k x)
    def phi_hat_scale(self, k, xi):
        return self.phi_hat(np.asarray(xi, dtype=float) / 2.0**k)

    def psi_hat_scale(self, k, xi):
        return self.phi_hat_scale(k, xi) - self.phi_hat_scale(k - 1, xi)


def build_family(name):
    if name not in ("noncompact", "compact"):
        raise ValueError(f"unknown bump family {name!r}")
    return BumpFamily(name)


def telescope_residual(family, k_min, k_max, xi):
    """max |sum_k Psi_k^ - (Phi_{k_max}^ - Phi_{k_min-1}^)| over the given xi.

    Zero up to rounding by construction; exposed so the cancellation can be
    asserted rather than assumed.
    """
    xi = np.asarray(xi, dtype=float)
    acc = np.zeros_like(xi)
    for k in range(k_min, k_max + 1):
        acc = acc + family.psi_hat_scale(k, xi)
    target = family.phi_hat_scale(k_max, xi) - family.phi_hat_scale(k_min - 1, xi)
    return float(np.max(np.abs(acc - target)))


def partition_residual(family, n_scales, xi):
    """sup |1 - sum_{|k| <= n_scales} Psi_k^(xi)| over the given frequencies.

    For the Gaussian family this is dominated by 1 - Phi^(xi / 2^K) ~
    pi xi^2 4^{-K}, so it shrinks by about a factor 4 per added scale; for the
    compact family it is exactly zero once the dyadic range covers the
    frequencies.
    """
    xi = np.asarray(xi, dtype=float)
    total = family.phi_hat_scale(n_scales, xi) - family.phi_hat_scale(-n_scales - 1, xi)
    return float(np.max(np.abs(1.0 - total)))


_PSI_FACTOR_SERIES_RADIUS = 0.05


def psi_factor(xi):
    """Psi^(xi) / xi^2 for the Gaussian family, with value 3 pi at xi = 0.

    Near zero the direct quotient loses digits to cancellation, so the Taylor
    series sum_{n>=1} (-1)^{n+1} pi^n (4^n - 1) / n! xi^{2n-2} is used there.
    """
    xi = np.asarray(xi, dtype=float)
    small = np.abs(xi) < _PSI_FACTOR_SERIES_RADIUS
    out = np.empty(xi.shape, dtype=float)
    big = ~small
    xb = xi[big]
    with np.errstate(invalid="ignore"):
        out[big] = (np.exp(-np.pi * xb * xb) - np.exp(-4.0 * np.pi * xb * xb)) / (
            xb * xb
        )
    xs = xi[small]
    acc = np.zeros_like(xs)
    for n in range(1, 12):
        acc += (-1.0) ** (n + 1) * np.pi**n * (4.0**n - 1.0) / math.factorial(n) * xs ** (
            2 * n - 2
        )
    out[small] = acc
    if out.ndim == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# projections


def _scale_guard(domain, k):
    # kernel at scale k has width ~ 2^{-k}: it must be well resolved by dx
    # and must fit inside the period.
    if 2.0**k * domain.dx > 0.25:
        raise ValueError(
            f"scale {k} too fine for grid spacing {domain.dx} (undersampled kernel)"
        )
    if 2.0**-k > domain.length / 8.0:
        raise ValueError(f"scale {k} too coarse for period {domain.length}")


def spectral_lowpass(f: GridFunction, family, k) -> GridFunction:
    """f * Phi_k realised exactly on the discrete spectrum."""
    _scale_guard(f.domain, k)
    s = forward_transform(f)
    m = family.phi_hat_scale(k, f.domain.freq)
    return inverse_transform(Spectrum(f.domain, s.coeffs * m))


def spectral_bandpass(f: GridFunction, family, k) -> GridFunction:
    """f * Psi_k realised exactly on the discrete spectrum."""
    _scale_guard(f.domain, k)
    s = forward_transform(f)
    m = family.psi_hat_scale(k, f.domain.freq)
    return inverse_transform(Spectrum(f.domain, s.coeffs * m))


def _sampled_kernel(domain, family, k):
    """Periodised samples of phi_k on the grid offsets, renormalised to unit
    discrete mass.  Weights are nonnegative for the Gaussian family, which is
    what makes the averaged sup bound exact in floating point."""
    _scale_guard(domain, k)
    offsets = (domain.dx * np.arange(domain.n) + domain.length / 2.0) % domain.length
    offsets -= domain.length / 2.0
    vals = 2.0**k * family.phi(2.0**k * offsets)
    mass = np.sum(vals) * domain.dx
    return vals / mass


def convolve_scaled(f: GridFunction, family, k, kind="phi") -> GridFunction:
    """f * Phi_k (or f * Psi_k) by circular convolution with the sampled,
    mass-renormalised spatial kernel.

    With ``kind="phi"`` the discrete weights are a convex combination, so
    ``sup |result| <= sup |f|`` holds to rounding.  ``kind="psi"`` is the
    difference of two such averages and has exactly zero discrete mean.
    """
    if kind not in ("phi", "psi"):
        raise ValueError(f"kind must be 'phi' or 'psi', got {kind!r}")
    d = f.domain
    kern = _sampled_kernel(d, family, k)
    if kind == "psi":
        kern = kern - _sampled_kernel(d, family, k - 1)
    out = np.fft.ifft(np.fft.fft(f.values) * np.fft.fft(kern)) * d.dx
    if np.all(np.isreal(f.values)):
        out = out.real.astype(complex)
    return GridFunction(d, out)


# ---------------------------------------------------------------------------
# paraproducts


def paraproduct_apply(family, kinds, funcs, k_min, k_max):
    """Model paraproduct  sum_k prod_j (f_j * Phi^{(j)}_k)  on a common grid.

    ``kinds`` is a tuple of "phi"/"psi" selecting the smoothing type in each
    slot; at least two slots must be band-pass ("psi").  Convolutions use the
    sampled-kernel route so each phi-slot is a genuine average.
    """
    kinds = tuple(kinds)
    if len(kinds) != len(funcs):
        raise ValueError("one smoothing kind per input function is required")
    if sum(1 for s in kinds if s == "psi") < 2:
        raise ValueError("a paraproduct needs at least two band-pass slots")
    if any(s not in ("phi", "psi") for s in kinds):
        raise ValueError(f"unknown smoothing kind in {kinds}")
    domain = funcs[0].domain
    for g in funcs[1:]:
        if g.domain != domain:
            raise ValueError("domain mismatch among paraproduct inputs")
    acc = np.zeros(domain.n, dtype=complex)
    for k in range(k_min, k_max + 1):
        term = np.ones(domain.n, dtype=complex)
        for g, s in zip(funcs, kinds):
            term = term * convolve_scaled(g, family, k, kind=s).values
        acc += term
    return GridFunction(domain, acc)


# ---------------------------------------------------------------------------
# Whitney three-branch cover of the frequency square


def whitney_cover(family, a, b, r_min, r_max):
    """Three-branch dyadic cover of the (a, b) frequency plane:

        sum_r [ Phi_{r-1}^(a) Psi_r^(b) + Psi_r^(a) Psi_r^(b)
                + Psi_r^(a) Phi_{r-1}^(b) ]

    (the coarse branch deliberately uses the *previous* scale's low-pass).
    Over the full dyadic range this equals (sum_r Psi_r^(a))(sum_r Psi_r^(b)),
    so with the compact family it is exactly 1 on frequencies whose dyadic
    annuli are covered by [r_min, r_max].
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    acc = np.zeros(np.broadcast(a, b).shape)
    for r in range(r_min, r_max + 1):
        pa = family.phi_hat_scale(r - 1, a)
        pb = family.phi_hat_scale(r - 1, b)
        qa = family.psi_hat_scale(r, a)
        qb = family.psi_hat_scale(r, b)
        acc += pa * qb + qa * qb + qa * pb
    return acc
