"""Multilinear commutator symbols: exact evaluation, Monte-Carlo oracle,
windowed double Fourier coefficients and decay fitting.

The basic object is the hypercube average

    m_d(xi, xi_1, ..., xi_d) = int_{[0,1]^d} sgn(xi + a_1 xi_1 + ... + a_d xi_d) da

evaluated *exactly* as 1 - 2 Vol{a in [0,1]^d : xi + a . w < 0} via
inclusion-exclusion over the 2^d cube vertices (the volume below a hyperplane
cut of the unit cube is a piecewise polynomial of degree d).  Ties
(argument exactly zero on a positive-measure set) resolve as sgn(0) = 0,
which keeps the odd symmetry m_d(-freqs) = -m_d(freqs) exact.

Variants: plain commutator, Taylor-weighted averages with density
prod_i (1 - a_i)^d / d!^k, powers m_k^d, products of rescaled averages, and
the circular triple product m_2(x1,x2,x3) m_2(x2,x3,x1) m_2(x3,x1,x2).
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SymbolSpec",
    "CoeffTable",
    "eval_symbol_exact",
    "eval_symbol_mc",
    "m1_closed_form",
    "md_vectorized",
    "taylor_k1_closed_form",
    "build_coeff_table",
    "fourier_coeff",
    "fit_decay",
]


# ---------------------------------------------------------------------------
# symbol specification


@dataclass(frozen=True)
class SymbolSpec:
    """Tagged description of a multilinear symbol.

    variant:
      "commutator"  params: d            arity d+1
      "taylor"      params: k, d         arity k+1, density prod (1-a_i)^d / d!^k
      "power"       params: k, d         arity k+1, value m_k ** d
      "product"     params: coeffs (d,k) arity k+1, prod_i m_k(xi, c^i_j xi_j)
      "circular"    arity 3
    """

    variant: str
    d: int = 1
    k: int = 1
    coeffs: tuple = ()  # rows of the (d x k) matrix for "product"

    def __post_init__(self):
        if self.variant not in ("commutator", "taylor", "power", "product", "circular"):
            raise ValueError(f"unknown symbol variant {self.variant!r}")
        if self.variant == "product":
            if not self.coeffs:
                raise ValueError("product symbol needs a coefficient matrix")
            for row in self.coeffs:
                if any(c == 0 for c in row):
                    raise ValueError("product symbol coefficients must be nonzero")

    @property
    def arity(self):
        if self.variant == "commutator":
            return self.d + 1
        if self.variant in ("taylor", "power"):
            return self.k + 1
        if self.variant == "product":
            return len(self.coeffs[0]) + 1
        return 3  # circular

    @staticmethod
    def commutator(d):
        return SymbolSpec("commutator", d=d)

    @staticmethod
    def taylor(k, d):
        return SymbolSpec("taylor", d=d, k=k)

    @staticmethod
    def power(k, d):
        return SymbolSpec("power", d=d, k=k)

    @staticmethod
    def product(coeffs):
        rows = tuple(tuple(float(c) for c in row) for row in coeffs)
        return SymbolSpec("product", coeffs=rows)

    @staticmethod
    def circular():
        return SymbolSpec("circular")


# ---------------------------------------------------------------------------
# exact halfspace-cube volumes and m_d


def _cube_volume_below(c, weights):
    """Vol{a in [0,1]^d : c + sum w_j a_j < 0}; zero weights are dropped
    (their variable integrates out trivially)."""
    w = [float(v) for v in weights if v != 0.0]
    if not w:
        return 1.0 if c < 0 else 0.0
    # flip negative axes a -> 1 - a so all weights are positive
    c = float(c)
    for i, v in enumerate(w):
        if v < 0:
            c += v
            w[i] = -v
    t = -c  # volume of {w . a <= t}, w > 0
    total = sum(w)
    if t <= 0:
        return 0.0
    if t >= total:
        return 1.0
    d = len(w)
    # scale for numerical stability (formula is homogeneous)
    s = max(t, max(w))
    t /= s
    w = [v / s for v in w]
    terms = []
    for signs in itertools.product((0, 1), repeat=d):
        dot = sum(v for v, bit in zip(w, signs) if bit)
        r = t - dot
        if r > 0:
            terms.append((-1.0) ** sum(signs) * r**d)
    vol = math.fsum(terms) / (math.factorial(d) * math.prod(w))
    return min(max(vol, 0.0), 1.0)


def _md_exact(c, weights):
    """Exact m_d at scalar arguments."""
    if all(v == 0.0 for v in weights):
        return float(np.sign(c))
    return 1.0 - 2.0 * _cube_volume_below(c, weights)


def md_vectorized(xi, xis):
    """Exact m_d on arrays: ``xi`` broadcastable, ``xis`` a list of d arrays.

    Handles per-element zero weights by grouping elements over the 2^d
    zero-patterns and applying the reduced-dimension vertex formula to each
    group, so dimension-reduction consistency is exact.
    """
    xi = np.asarray(xi, dtype=float)
    xis = [np.asarray(v, dtype=float) for v in xis]
    xi, *xis = np.broadcast_arrays(xi, *xis)
    d = len(xis)
    out = np.empty(xi.shape, dtype=float)
    nz = np.stack([v != 0.0 for v in xis])  # (d, ...)
    for pattern in itertools.product((False, True), repeat=d):
        mask = np.ones(xi.shape, dtype=bool)
        for j in range(d):
            mask &= nz[j] == pattern[j]
        if not mask.any():
            continue
        active = [j for j in range(d) if pattern[j]]
        c = xi[mask].copy()
        if not active:
            out[mask] = np.sign(c)
            continue
        ws = [xis[j][mask].copy() for j in active]
        # flip negative axes
        for i in range(len(ws)):
            neg = ws[i] < 0
            c[neg] += ws[i][neg]
            ws[i] = np.abs(ws[i])
        t = -c
        de = len(ws)
        scale = np.maximum(np.abs(t), np.max(np.stack(ws), axis=0))
        scale[scale == 0.0] = 1.0
        t = t / scale
        ws = [w / scale for w in ws]
        acc = np.zeros_like(t)
        for signs in itertools.product((0, 1), repeat=de):
            dot = sum(w for w, bit in zip(ws, signs) if bit)
            if isinstance(dot, int):
                dot = np.zeros_like(t)
            r = np.maximum(t - dot, 0.0)
            acc += (-1.0) ** sum(signs) * r**de
        vol = acc / (math.factorial(de) * math.prod(ws))
        total = sum(ws)
        vol = np.where(t <= 0, 0.0, np.where(t >= total, 1.0, np.clip(vol, 0.0, 1.0)))
        out[mask] = 1.0 - 2.0 * vol
    return out


def m1_closed_form(xi, xi1):
    """Closed form of m_1; requires xi1 != 0 everywhere.

    m_1 = sgn(xi) when xi and xi+xi1 lie on the same side (and xi != 0);
    otherwise the sign change at a* = -xi/xi1 gives sgn(xi1) (1 - 2 a*).
    """
    xi = np.asarray(xi, dtype=float)
    xi1 = np.asarray(xi1, dtype=float)
    if np.any(xi1 == 0.0):
        raise ValueError("m1_closed_form requires xi1 != 0 (use sgn(xi) there)")
    same_side = (xi * (xi + xi1) >= 0) & (xi != 0.0)
    astar = -xi / xi1
    ramp = np.sign(xi1) * (1.0 - 2.0 * astar)
    out = np.where(same_side, np.sign(xi), ramp)
    if out.ndim == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# Taylor-weighted averages


def _taylor_inner_1d(c, w, d):
    """int_0^1 sgn(c + a w) (1-a)^d da  (no 1/d! factor)."""

    def seg(a, b, sgn):
        # sgn * int_a^b (1-t)^d dt
        return sgn * ((1 - a) ** (d + 1) - (1 - b) ** (d + 1)) / (d + 1)

    if w == 0.0:
        return np.sign(c) / (d + 1)
    astar = -c / w
    if astar <= 0.0 or astar >= 1.0:
        s = np.sign(c + 0.5 * w)
        return seg(0.0, 1.0, s)
    s_left = np.sign(c + 0.5 * astar * w)
    s_right = np.sign(c + 0.5 * (astar + 1.0) * w)
    return seg(0.0, astar, s_left) + seg(astar, 1.0, s_right)


def taylor_k1_closed_form(xi, xi1, d):
    """Vectorised exact value of the k=1 Taylor-weighted symbol
    (1/d!) int_0^1 sgn(xi + a xi1) (1-a)^d da."""
    xi = np.asarray(xi, dtype=float)
    xi1 = np.asarray(xi1, dtype=float)
    xi, xi1 = np.broadcast_arrays(xi, xi1)

    def seg_int(a, b):
        return ((1 - a) ** (d + 1) - (1 - b) ** (d + 1)) / (d + 1)

    with np.errstate(divide="ignore", invalid="ignore"):
        astar = np.where(xi1 != 0, -xi / xi1, np.inf)
    interior = (astar > 0) & (astar < 1)
    ai = np.clip(np.where(interior, astar, 0.5), 0.0, 1.0)
    s_left = np.sign(xi + 0.5 * ai * xi1)
    s_right = np.sign(xi + 0.5 * (ai + 1.0) * xi1)
    split = s_left * seg_int(0.0, ai) + s_right * seg_int(ai, 1.0)
    whole = np.sign(xi + 0.5 * xi1) * seg_int(0.0, 1.0)
    whole = np.where(xi1 == 0, np.sign(xi) / (d + 1), whole)
    out = np.where(interior, split, whole) / math.factorial(d)
    if out.ndim == 0:
        return float(out)
    return out


_GL_NODES = 32


def _taylor_k2(c, w1, w2, d):
    """Exact k=2 Taylor-weighted average: inner a2-integral in closed form,
    outer a1-integral by Gauss-Legendre on panels split at the kink lines
    (the integrand is piecewise polynomial, so this is exact)."""
    breaks = {0.0, 1.0}
    if w1 != 0.0:
        for target in (0.0, -w2):
            a = (target - c) / w1
            if 0.0 < a < 1.0:
                breaks.add(a)
    pts = sorted(breaks)
    nodes, wts = np.polynomial.legendre.leggauss(_GL_NODES)
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        xs = mid + half * nodes
        vals = np.array(
            [_taylor_inner_1d(c + w1 * t, w2, d) * (1 - t) ** d for t in xs]
        )
        total += half * float(np.dot(wts, vals))
    return total / math.factorial(d) ** 2


def _taylor_quadrature(c, w, d, nodes_per_axis=64):
    """Tensor Gauss-Legendre fallback for k >= 3."""
    k = len(w)
    nodes, wts = np.polynomial.legendre.leggauss(nodes_per_axis)
    a = 0.5 * (nodes + 1.0)  # map to [0,1]
    ww = 0.5 * wts
    grids = np.meshgrid(*([a] * k), indexing="ij")
    arg = c + sum(wj * g for wj, g in zip(w, grids))
    dens = math.prod([(1 - g) ** d for g in grids])
    weight = math.prod(np.meshgrid(*([ww] * k), indexing="ij"))
    return float(np.sum(np.sign(arg) * dens * weight)) / math.factorial(d) ** k


def _taylor_exact(c, w, d):
    k = len(w)
    if k == 1:
        return _taylor_inner_1d(c, w[0], d) / math.factorial(d)
    if k == 2:
        return _taylor_k2(c, w[0], w[1], d)
    return _taylor_quadrature(c, w, d)


# ---------------------------------------------------------------------------
# public evaluators


def eval_symbol_exact(spec: SymbolSpec, freqs):
    """Exact symbol value at a frequency tuple of length ``spec.arity``."""
    freqs = [float(v) for v in freqs]
    if len(freqs) != spec.arity:
        raise ValueError(f"expected {spec.arity} frequencies, got {len(freqs)}")
    if not all(math.isfinite(v) for v in freqs):
        raise ValueError("non-finite frequency input")
    c, w = freqs[0], freqs[1:]
    if spec.variant == "commutator":
        return _md_exact(c, w)
    if spec.variant == "taylor":
        return _taylor_exact(c, w, spec.d)
    if spec.variant == "power":
        return _md_exact(c, w) ** spec.d
    if spec.variant == "product":
        out = 1.0
        for row in spec.coeffs:
            out *= _md_exact(c, [cj * wj for cj, wj in zip(row, w)])
        return out
    # circular
    x1, x2, x3 = freqs
    return (
        _md_exact(x1, (x2, x3))
        * _md_exact(x2, (x3, x1))
        * _md_exact(x3, (x1, x2))
    )


def eval_symbol_mc(spec: SymbolSpec, freqs, samples, seed=0):
    """Monte-Carlo estimate (mean, standard error) of the same integral.

    The estimator averages the raw integrand (with independent alpha blocks
    for each factor of the power/product/circular variants), so it is unbiased
    for the exact value and serves as an independent oracle.
    """
    if samples < 100:
        raise ValueError("need at least 100 samples")
    freqs = [float(v) for v in freqs]
    if len(freqs) != spec.arity:
        raise ValueError(f"expected {spec.arity} frequencies, got {len(freqs)}")
    rng = np.random.default_rng(seed)
    c, w = freqs[0], np.array(freqs[1:])

    if spec.variant == "commutator":
        a = rng.random((samples, len(w)))
        vals = np.sign(c + a @ w)
    elif spec.variant == "taylor":
        a = rng.random((samples, len(w)))
        vals = np.sign(c + a @ w) * np.prod((1 - a) ** spec.d, axis=1)
        vals = vals / math.factorial(spec.d) ** spec.k
    elif spec.variant == "power":
        vals = np.ones(samples)
        for _ in range(spec.d):
            a = rng.random((samples, len(w)))
            vals = vals * np.sign(c + a @ w)
    elif spec.variant == "product":
        vals = np.ones(samples)
        for row in spec.coeffs:
            a = rng.random((samples, len(w)))
            vals = vals * np.sign(c + a @ (np.array(row) * w))
    else:  # circular
        x1, x2, x3 = freqs
        vals = np.ones(samples)
        for base, wa, wb in ((x1, x2, x3), (x2, x3, x1), (x3, x1, x2)):
            a = rng.random((samples, 2))
            vals = vals * np.sign(base + a[:, 0] * wa + a[:, 1] * wb)
    est = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(samples))
    return est, se


# ---------------------------------------------------------------------------
# double Fourier coefficients on the Whitney window (compact LP pair)


@dataclass(frozen=True)
class CoeffTable:
    """Frozen map (n, n1) -> C_{n,n1} plus the quadrature metadata."""

    entries: dict = field(repr=False)
    resolution: int
    oversample: int
    window: str = "compact-scale0"

    def __getitem__(self, key):
        return self.entries[key]

    def abs_along(self, axis, other_index, values):
        if axis == "n":
            return [abs(self.entries[(n, other_index)]) for n in values]
        if axis == "n1":
            return [abs(self.entries[(other_index, n1)]) for n1 in values]
        raise ValueError("axis must be 'n' or 'n1'")

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "n1", "re", "im", "abs"])
            for (n, n1), val in sorted(self.entries.items()):
                writer.writerow([n, n1, val.real, val.imag, abs(val)])


def _compact_window_hats():
    from .lp_decomp import build_family

    fam = build_family("compact")
    return fam.phi_hat, (lambda xi: fam.psi_hat(xi))


def build_coeff_table(ns, n1s, resolution=512, oversample=16, symbol=None, windows=None):
    """Tensor-quadrature table of C_{n,n1} = iint m(xi~, xi1) Phi^(xi~) Psi^(xi1)
    e^{-2 pi i n xi~} e^{-2 pi i n1 xi1} dxi~ dxi1.

    The xi~ axis is internally oversampled (``oversample`` times the base
    resolution): m_1 has gradient kinks along xi~ = 0 and xi~ = -xi1, and the
    trapezoid error at those kinks is what limits accuracy of the large-n
    coefficients.  The xi1 integrand is smooth and compactly supported, so the
    base resolution is spectrally accurate there.
    """
    if resolution < 64:
        raise ValueError("resolution below the 64^2 accuracy floor")
    if windows is None:
        phi_hat, psi_hat = _compact_window_hats()
    else:
        phi_hat, psi_hat = windows
    if symbol is None:
        def symbol(xt, x1):
            safe = np.where(x1 == 0.0, 1.0, x1)
            return np.where(x1 == 0.0, 0.0, m1_closed_form(xt, safe))

    mt = resolution * oversample
    m1g = resolution
    # midpoint grids avoid placing nodes exactly on the kink line xi~ = 0
    xt = -1.0 + 2.0 * (np.arange(mt) + 0.5) / mt
    x1 = -1.0 + 2.0 * (np.arange(m1g) + 0.5) / m1g
    ht, h1 = 2.0 / mt, 2.0 / m1g
    wt = phi_hat(xt)
    w1 = psi_hat(x1)
    core = symbol(xt[:, None], x1[None, :]) * wt[:, None] * w1[None, :]
    ns = np.asarray(list(ns), dtype=int)
    n1s = np.asarray(list(n1s), dtype=int)
    et = np.exp(-2j * np.pi * ns[:, None] * xt[None, :])
    e1 = np.exp(-2j * np.pi * n1s[:, None] * x1[None, :])
    table = (et @ core @ e1.T) * ht * h1
    entries = {
        (int(n), int(n1)): complex(table[i, j])
        for i, n in enumerate(ns)
        for j, n1 in enumerate(n1s)
    }
    return CoeffTable(entries, resolution, oversample)


def fourier_coeff(n, n1, resolution=512, oversample=16):
    """Single coefficient C_{n, n1} with the standard compact window pair."""
    return build_coeff_table([n], [n1], resolution, oversample)[(n, n1)]


def fit_decay(table, axis, other_index, values):
    """Least-squares slope of log|C| against log<n> with <n> = 2 + |n|.

    Exact zeros are excluded from the fit and reported.  Returns a dict with
    slope, intercept, r2, used points and excluded indices.
    """
    values = list(values)
    if len(values) < 6:
        raise ValueError("need at least 6 points along the axis")
    mags = table.abs_along(axis, other_index, values)
    used, excluded = [], []
    for n, m in zip(values, mags):
        (excluded if m == 0.0 else used).append((n, m))
    xs = np.log([2.0 + abs(n) for n, _ in used])
    ys = np.log([m for _, m in used])
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return {
        "slope": float(slope),
        "intercept": float(intercept),
        "r2": r2,
        "points": used,
        "excluded": [n for n, _ in excluded],
    }
