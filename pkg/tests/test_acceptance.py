"""End-to-end acceptance checks.

One test per headline quantitative claim of the package: exact identities,
dual-route agreement, symbol statistics, decay and growth laws, structural
inequalities, and the geometric Cauchy expansion.  Frozen configurations;
deliberately independent oracles wherever two routes exist.
"""

import numpy as np
import pytest

from calderon_lab import experiments, operators as ops, symbols
from calderon_lab.experiments import NormQuery, estimate_norm
from calderon_lab.gridcore import Domain, GridFunction, lp_norm
from calderon_lab.lp_decomp import (
    build_family,
    convolve_scaled,
    partition_residual,
    telescope_residual,
)
from calderon_lab.profiles import ProfileSeed, make_profile, sample


def rel(a, b):
    return lp_norm(a - b, 2) / lp_norm(b, 2)


# 1 -------------------------------------------------------------------------


def test_identity_suite_residuals_and_refinement():
    sups = {}
    for n in (1024, 4096):
        suite = ops.identity_suite(n)
        sups[n] = {tag: r["interior_sup"] for tag, r in suite.items()}
    for tag, v in sups[4096].items():
        assert v <= 1e-3, (tag, v)
    worst = [max(sups[n].values()) for n in (1024, 4096)]
    slope = np.log(worst[0] / worst[1]) / np.log(4096 / 1024)
    assert slope >= 1.8


# 2 -------------------------------------------------------------------------


def test_kernel_and_multiplier_routes_agree_d1():
    dom = Domain(128.0, 4096)
    A = make_profile(ProfileSeed("gaussian-bump", amplitude=0.6))
    f = GridFunction.from_callable(dom, lambda x: np.exp(-np.pi * (x - 0.7) ** 2))
    kern = ops.apply_commutator_kernel(1, A, f, R=dom.length / 2)
    mult = ops.commutator_via_multiplier(1, f, [sample(A, dom, order=1)])
    assert rel(kern, mult) <= 1e-3


def test_kernel_and_multiplier_routes_agree_d2():
    dom = Domain(32.0, 256)
    A = make_profile(ProfileSeed("gaussian-bump", amplitude=0.6))
    f = GridFunction.from_callable(dom, lambda x: np.exp(-np.pi * (x - 0.7) ** 2))
    ap = sample(A, dom, order=1)
    kern = ops.apply_commutator_kernel(2, A, f, R=dom.length / 2)
    mult = ops.commutator_via_multiplier(2, f, [ap, ap])
    assert rel(kern, mult) <= 1e-2


# 3 -------------------------------------------------------------------------


def test_symbol_monte_carlo_agreement():
    rng = np.random.default_rng(42)
    hits = 0
    trials = 1000
    for trial in range(trials):
        d = int(rng.integers(1, 5))
        freqs = rng.uniform(-3.0, 3.0, d + 1)
        spec = symbols.SymbolSpec.commutator(d)
        exact = symbols.eval_symbol_exact(spec, freqs)
        est, se = symbols.eval_symbol_mc(spec, freqs, 10**6, seed=trial)
        if abs(est - exact) <= 4.0 * se + 1e-12:
            hits += 1
    assert hits >= 0.99 * trials, hits


def test_m1_closed_form_large_sample():
    rng = np.random.default_rng(7)
    xi = rng.uniform(-3, 3, 10000)
    xi1 = rng.uniform(-3, 3, 10000)
    xi1[np.abs(xi1) < 1e-6] = 0.5
    closed = symbols.m1_closed_form(xi, xi1)
    exact = symbols.md_vectorized(xi, [xi1])
    assert np.max(np.abs(closed - exact)) <= 1e-13


# 4 -------------------------------------------------------------------------


def test_coefficient_decay_slopes():
    rec = experiments.decay_study()
    assert rec.fit["n_axis"]["slope"] <= -1.9
    assert rec.fit["n1_axis"]["slope"] <= -3.0
    assert rec.fit["passed"]


# 5 -------------------------------------------------------------------------


def test_shifted_maximal_log_growth():
    rec = experiments.shift_growth_study("maximal", trials=5)
    assert rec.fit["log_fit"]["r2"] >= 0.9
    assert rec.fit["power_fit"]["exponent"] <= 0.2
    assert rec.fit["passed"]


def test_shifted_square_log_growth():
    rec = experiments.shift_growth_study("square")
    assert rec.fit["log_fit"]["r2"] >= 0.9
    assert rec.fit["power_fit"]["exponent"] <= 0.2
    assert rec.fit["passed"]


# 6 -------------------------------------------------------------------------


def test_growth_in_d_stays_tame():
    rec = experiments.growth_in_d(6)
    ratios = rec.fit["ratios"]
    assert all(r <= 3.0 for r in ratios), ratios
    assert rec.fit["aic_loglog"] <= rec.fit["aic_semilog"]
    assert rec.fit["verdict"] == "consistent with polynomial growth"


# 7 -------------------------------------------------------------------------


def test_adjoint_identities_machine_accurate():
    dom = Domain(32.0, 2048)
    A = make_profile(ProfileSeed("gaussian-bump", amplitude=0.7))
    g1 = sample(A, dom, order=1)  # mean zero
    f = GridFunction.from_callable(dom, lambda x: np.exp(-np.pi * (x - 0.5) ** 2))
    h = GridFunction.from_callable(dom, lambda x: np.exp(-np.pi * (x + 0.4) ** 2))
    for i in (1, 2, 3):
        direct, via = ops.form_and_adjoints(1, i, f, [g1], h)
        assert abs(direct - via) / abs(direct) <= 1e-8, i
    B = make_profile(ProfileSeed("random-trig", amplitude=0.4, seed=5))
    g2 = sample(B, dom, order=1)
    for i in (1, 2, 3, 4):
        direct, via = ops.form_and_adjoints(2, i, f, [g1, g2], h)
        assert abs(direct - via) / abs(direct) <= 1e-8, i


# 8 -------------------------------------------------------------------------


def test_smoothing_is_a_sup_contraction():
    fam = build_family("noncompact")
    dom = Domain(32.0, 1024)
    rng = np.random.default_rng(11)
    inputs = [
        GridFunction(dom, np.sign(rng.normal(size=1024)).astype(complex)),
        GridFunction(dom, (np.abs(dom.x) <= 1.0).astype(complex)),
        experiments.random_band_limited(dom, rng),
    ]
    for f in inputs:
        sup = np.max(np.abs(f.values))
        for k in range(-2, 4):
            out = convolve_scaled(f, fam, k, kind="phi")
            assert np.max(np.abs(out.values)) <= sup + 1e-12


def test_paraproduct_estimates_do_not_grow_with_arity():
    ests = []
    for d in range(1, 7):
        q = NormQuery(
            "paraproduct",
            exponents=(2.0, 2.0) + (np.inf,) * d + (1.0,),
            params=(("d", d),),
            trials=8,
            n=1024,
        )
        ests.append(estimate_norm(q).estimate)
    assert max(ests) / min(ests) <= 3.0, ests


# 9 -------------------------------------------------------------------------


def test_telescoping_and_moments():
    xi = np.linspace(-8.0, 8.0, 2001)
    for name in ("noncompact", "compact"):
        assert telescope_residual(build_family(name), -6, 6, xi) <= 1e-12
    # band-pass mother bump: exp(-pi x^2) - (1/2) exp(-pi (x/2)^2)
    dom = Domain(64.0, 4096)
    x = dom.x
    psi = np.exp(-np.pi * x**2) - 0.5 * np.exp(-np.pi * (x / 2.0) ** 2)
    assert abs(np.sum(psi) * dom.dx) <= 1e-12
    assert abs(np.sum(x * psi) * dom.dx) <= 1e-12


def test_partition_residual_decays_quadratically_per_scale():
    fam = build_family("noncompact")
    xi = np.concatenate([np.linspace(0.5, 4.0, 400), -np.linspace(0.5, 4.0, 400)])
    resids = [partition_residual(fam, K, xi) for K in range(2, 9)]
    ratios = [np.log2(resids[i] / resids[i + 1]) for i in range(len(resids) - 1)]
    for r in ratios[3:]:  # settled tail
        assert r >= 1.9, ratios
    assert ratios == sorted(ratios)  # monotone approach to the limit rate


# 10 ------------------------------------------------------------------------


def test_cauchy_series_geometric_convergence():
    lip = 0.3
    depth = 6
    dom = Domain(32.0, 4096)
    unit = 1.0 / np.sqrt(2.0 * np.pi / np.e)
    A = make_profile(ProfileSeed("gaussian-bump", amplitude=lip * unit))
    f = GridFunction.from_callable(dom, lambda x: np.exp(-np.pi * (x - 1.0) ** 2))
    R = dom.length / 4
    direct = ops.apply_cauchy(A, f, R=R)
    errs = []
    for D in range(depth + 1):
        part = ops.cauchy_series(A, f, D, R=R)
        errs.append(rel(part, direct))
    bound = 2.0 * lip ** (depth + 1) / (1.0 - lip) + 5e-3
    assert errs[-1] <= bound
    assert all(b < a for a, b in zip(errs, errs[1:])), errs
