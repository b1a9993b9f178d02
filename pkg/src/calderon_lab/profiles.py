"""Analytic Lipschitz test profiles with closed-form derivatives.

Every profile A comes with exact evaluators for A, A', ..., A'''' and a
certified bound ``lip_norm`` >= sup |A'|.  Profiles are never
grid-interpolated: the exact-identity checks in :mod:`calderon_lab.operators`
need the true derivatives on their right-hand sides.

Tags
----
``linear``             A(x) = amplitude * x
``gaussian-bump``      A(x) = amplitude * exp(-pi x^2); sup|A'| = amplitude*sqrt(2 pi / e)
``smoothed-sawtooth``  truncated Fourier series of a triangle wave (period 32)
``random-trig``        random trigonometric polynomial (period 32), seeded
``polynomial-growth``  A(x) = amplitude * x^degree * exp(-pi x^2)  (smooth,
                       compactly concentrated, all derivatives bounded)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

__all__ = ["ProfileSeed", "LipschitzProfile", "make_profile", "sample", "TAGS"]

TAGS = (
    "linear",
    "gaussian-bump",
    "smoothed-sawtooth",
    "random-trig",
    "polynomial-growth",
)

_MAX_ORDER = 4
_TRIG_PERIOD = 32.0


@dataclass(frozen=True)
class ProfileSeed:
    """Deterministic description of a profile; equal seeds give equal profiles."""

    tag: str
    amplitude: float = 1.0
    freq_bound: int = 4
    seed: int = 0
    degree: int = 2  # only used by polynomial-growth

    def as_config(self):
        """Key-value form used by the CLI config layer."""
        return {
            "tag": self.tag,
            "amplitude": repr(self.amplitude),
            "freq_bound": str(self.freq_bound),
            "seed": str(self.seed),
            "degree": str(self.degree),
        }


class LipschitzProfile:
    """A with closed-form derivatives up to order 4 and certified sup|A'|."""

    def __init__(self, tag, evaluators, lip_norm, support_radius):
        self.tag = tag
        self._evaluators = evaluators  # tuple of callables, order 0..4
        self.lip_norm = float(lip_norm)
        self.support_radius = support_radius

    def eval(self, x):
        return self.derivative(0)(x)

    def derivative(self, order):
        if not 0 <= order <= _MAX_ORDER:
            raise ValueError(f"derivative order must be in [0, {_MAX_ORDER}]")
        return self._evaluators[order]

    def __call__(self, x):
        return self.eval(x)


def _gaussian_evaluators(amp):
    # d^k/dx^k exp(-pi x^2), computed via the Hermite-style recursion
    # p_{k+1} = p_k' - 2 pi x p_k  on the polynomial factor.
    polys = [np.poly1d([1.0])]
    for _ in range(_MAX_ORDER):
        p = polys[-1]
        polys.append(p.deriv() + np.poly1d([-2.0 * np.pi, 0.0]) * p)

    def make(k):
        def f(x):
            x = np.asarray(x, dtype=float)
            return amp * polys[k](x) * np.exp(-np.pi * x * x)

        return f

    return tuple(make(k) for k in range(_MAX_ORDER + 1))


def _trig_evaluators(amp, coefs, freqs, phases):
    # A(x) = amp * sum_k coefs[k] sin(freqs[k] x + phases[k])
    def make(order):
        def f(x):
            x = np.asarray(x, dtype=float)[..., None]
            return amp * np.sum(
                coefs * freqs**order * np.sin(freqs * x + phases + order * np.pi / 2),
                axis=-1,
            )

        return f

    return tuple(make(k) for k in range(_MAX_ORDER + 1))


def _poly_gauss_evaluators(amp, degree):
    # A(x) = amp x^degree exp(-pi x^2); polynomial factors by the same recursion.
    polys = [np.poly1d([1.0] + [0.0] * degree)]
    for _ in range(_MAX_ORDER):
        p = polys[-1]
        polys.append(p.deriv() + np.poly1d([-2.0 * np.pi, 0.0]) * p)

    def make(k):
        def f(x):
            x = np.asarray(x, dtype=float)
            return amp * polys[k](x) * np.exp(-np.pi * x * x)

        return f

    return tuple(make(k) for k in range(_MAX_ORDER + 1))


def _certified_max(fn, radius, n_coarse=20001):
    """Upper bound for sup |fn| on [-radius, radius]: dense scan + local polish."""
    xs = np.linspace(-radius, radius, n_coarse)
    vals = np.abs(fn(xs))
    best = float(np.max(vals))
    order = np.argsort(vals)[-8:]
    for i in order:
        lo = xs[max(i - 1, 0)]
        hi = xs[min(i + 1, n_coarse - 1)]
        res = optimize.minimize_scalar(
            lambda t: -abs(float(fn(t))), bounds=(lo, hi), method="bounded"
        )
        best = max(best, -float(res.fun))
    return best + 1e-12


def make_profile(seed: ProfileSeed) -> LipschitzProfile:
    """Build the profile described by ``seed``; raises on unknown tags."""
    amp = float(seed.amplitude)
    if amp < 0:
        raise ValueError("amplitude must be nonnegative")

    if seed.tag == "linear":
        evals = (
            lambda x: amp * np.asarray(x, dtype=float),
            lambda x: np.full_like(np.asarray(x, dtype=float), amp),
            lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        )
        return LipschitzProfile("linear", evals, amp, np.inf)

    if seed.tag == "gaussian-bump":
        evals = _gaussian_evaluators(amp)
        # sup of |2 pi x| exp(-pi x^2) is attained at x = 1/sqrt(2 pi)
        lip = amp * math.sqrt(2.0 * math.pi / math.e)
        return LipschitzProfile("gaussian-bump", evals, lip, np.inf)

    if seed.tag == "smoothed-sawtooth":
        ks = np.arange(1, 2 * seed.freq_bound, 2, dtype=float)  # odd harmonics
        coefs = (-1.0) ** ((ks - 1) / 2) / ks**2
        freqs = 2.0 * np.pi * ks / _TRIG_PERIOD
        phases = np.zeros_like(ks)
        evals = _trig_evaluators(amp, coefs, freqs, phases)
        lip = _certified_max(evals[1], _TRIG_PERIOD / 2)
        return LipschitzProfile("smoothed-sawtooth", evals, lip, np.inf)

    if seed.tag == "random-trig":
        rng = np.random.default_rng(seed.seed)
        ks = np.arange(1, seed.freq_bound + 1, dtype=float)
        coefs = rng.uniform(-1.0, 1.0, size=len(ks)) / ks
        freqs = 2.0 * np.pi * ks / _TRIG_PERIOD
        phases = rng.uniform(0.0, 2.0 * np.pi, size=len(ks))
        evals = _trig_evaluators(amp, coefs, freqs, phases)
        lip = _certified_max(evals[1], _TRIG_PERIOD / 2)
        return LipschitzProfile("random-trig", evals, lip, np.inf)

    if seed.tag == "polynomial-growth":
        if seed.degree < 1:
            raise ValueError("polynomial-growth degree must be >= 1")
        evals = _poly_gauss_evaluators(amp, seed.degree)
        lip = _certified_max(evals[1], 6.0 + seed.degree)
        return LipschitzProfile("polynomial-growth", evals, lip, np.inf)

    raise ValueError(f"unknown profile tag {seed.tag!r}")


def sample(profile, domain, order=0):
    """Pointwise closed-form samples of the order-th derivative on ``domain``."""
    from .gridcore import GridFunction

    return GridFunction(domain, np.asarray(profile.derivative(order)(domain.x), dtype=complex))
