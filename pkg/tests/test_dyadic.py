"""Dyadic model operators, shifted maximal and square functions."""

import numpy as np
import pytest

from calderon_lab.dyadic import (
    AdaptedBump,
    DyadicInterval,
    ModelOperatorSpec,
    apply_model,
    model_form,
    shifted_maximal,
    shifted_square,
)
from calderon_lab.gridcore import Domain, GridFunction, fractional_shift, lp_norm
from calderon_lab.lp_decomp import build_family


def test_interval_geometry():
    I = DyadicInterval(2, 5)
    assert I.length == 0.25
    assert I.left == 1.25
    assert I.right == 1.5
    assert I.center == 1.375
    J = I.shifted(3)
    assert J.left == 2.0 and J.length == I.length
    assert I.contains(1.3) and not I.contains(1.5)


def test_bumps_are_l2_unit():
    dom = Domain(64.0, 1 << 16)
    I = DyadicInterval(-1, 0)  # length 2
    for kind in ("phi", "psi"):
        b = AdaptedBump(I, 0, kind)
        g = GridFunction(dom, b(dom.x).astype(complex))
        assert abs(lp_norm(g, 2) - 1.0) < 1e-10, kind


def test_psi_bump_mean_zero():
    dom = Domain(64.0, 1 << 14)
    b = AdaptedBump(DyadicInterval(0, 3), 0, "psi")
    g = GridFunction(dom, b(dom.x).astype(complex))
    assert abs(g.integrate()) < 1e-12


def test_lp_normalisation_scaling():
    I = DyadicInterval(3, 1)  # length 1/8
    x = np.linspace(0.0, 0.5, 100)
    unit = AdaptedBump(I, 0, "phi", p=2.0)(x)
    p4 = AdaptedBump(I, 0, "phi", p=4.0)(x)
    assert np.allclose(p4, I.length ** (0.5 - 0.25) * unit)


def test_bump_validation():
    I = DyadicInterval(0, 0)
    with pytest.raises(ValueError):
        AdaptedBump(I, 0, "haar")
    with pytest.raises(ValueError):
        AdaptedBump(I, 0, "phi", p=0.5)


def test_spec_validation():
    I = DyadicInterval(1, 0)
    with pytest.raises(ValueError):
        ModelOperatorSpec((0, 0), ("psi", "psi"), (I,))  # kinds too short
    with pytest.raises(ValueError):
        ModelOperatorSpec((0, 0), ("phi", "phi", "psi"), (I,))  # one psi only
    with pytest.raises(ValueError):
        ModelOperatorSpec((0, 0), ("psi", "psi", "haar"), (I,))


def test_resolution_guard():
    dom = Domain(32.0, 64)  # dx = 0.5; interval of length 1 has 2 cells
    spec = ModelOperatorSpec((0, 0), ("psi", "psi", "phi"), (DyadicInterval(0, 1),))
    f = GridFunction(dom, np.ones(64, dtype=complex))
    with pytest.raises(ValueError):
        apply_model(spec, (f, f))


def test_singleton_model_is_rank_one():
    dom = Domain(32.0, 2048)
    I = DyadicInterval(1, 2)
    spec = ModelOperatorSpec((0, 1), ("psi", "psi", "phi"), (I,))
    rng = np.random.default_rng(0)
    f1 = GridFunction(dom, rng.normal(size=2048).astype(complex))
    f2 = GridFunction(dom, rng.normal(size=2048).astype(complex))
    out = apply_model(spec, (f1, f2))
    c1 = np.sum(f1.values * AdaptedBump(I, 0, "psi")(dom.x)) * dom.dx
    c2 = np.sum(f2.values * AdaptedBump(I, 1, "psi")(dom.x)) * dom.dx
    direct = c1 * c2 * AdaptedBump(I, 0, "phi")(dom.x)
    assert np.max(np.abs(out.values - direct)) < 1e-14


def test_orthogonal_input_kills_the_term():
    # an input odd about the bump centre pairs to zero against the even phi
    dom = Domain(32.0, 2048)
    I = DyadicInterval(1, 2)
    spec = ModelOperatorSpec((0, 0), ("phi", "psi", "psi"), (I,))
    odd = GridFunction(dom, (dom.x - I.center).astype(complex))
    f2 = GridFunction(dom, np.exp(-np.pi * (dom.x - I.center) ** 2).astype(complex))
    out = apply_model(spec, (odd, f2))
    assert np.max(np.abs(out.values)) < 1e-12


def test_model_translation_covariance():
    # pairing against the n-shifted bump equals pairing the pre-translated
    # input against the unshifted bump
    dom = Domain(32.0, 2048)
    I = DyadicInterval(1, 2)
    n = 3
    rng = np.random.default_rng(4)
    f1 = GridFunction(dom, np.exp(-np.pi * (dom.x - I.center) ** 2).astype(complex))
    f2 = GridFunction(dom, rng.normal(size=2048).astype(complex))
    spec0 = ModelOperatorSpec((0, 0), ("psi", "psi", "phi"), (I,))
    specn = ModelOperatorSpec((n, 0), ("psi", "psi", "phi"), (I,))
    f1t = fractional_shift(f1, -n * I.length)
    a = apply_model(spec0, (f1, f2))
    b = apply_model(specn, (f1t, f2))
    assert np.max(np.abs(a.values - b.values)) < 1e-12


def test_model_scale_invariance():
    # dilating intervals, inputs and grid together rescales the output by
    # the operator's homogeneity (factor 2 for arity 2)
    domA = Domain(32.0, 2048)
    domB = Domain(64.0, 4096)
    IA = DyadicInterval(1, 2)  # [1, 1.5)
    IB = DyadicInterval(0, 2)  # [2, 3) = dilated copy
    g = lambda x: np.exp(-np.pi * (x - 1.2) ** 2)
    h = lambda x: np.exp(-np.pi * (x - 1.7) ** 2) * np.cos(x)
    fA1 = GridFunction(domA, g(domA.x).astype(complex))
    fA2 = GridFunction(domA, h(domA.x).astype(complex))
    fB1 = GridFunction(domB, g(domB.x / 2.0).astype(complex))
    fB2 = GridFunction(domB, h(domB.x / 2.0).astype(complex))
    specA = ModelOperatorSpec((0, 1), ("psi", "psi", "phi"), (IA,))
    specB = ModelOperatorSpec((0, 1), ("psi", "psi", "phi"), (IB,))
    outA = apply_model(specA, (fA1, fA2))
    outB = apply_model(specB, (fB1, fB2))
    # two sqrt(2) factors from the pairings, 1/sqrt(2) from the output bump,
    # sqrt(2) from the L^2 norm of a dilate: ratio 2 exactly
    ratio = lp_norm(outB, 2) / lp_norm(outA, 2)
    assert abs(ratio - 2.0) < 1e-6


def test_model_form_empty_family_and_monotonicity():
    dom = Domain(32.0, 2048)
    rng = np.random.default_rng(5)
    f = GridFunction(dom, rng.normal(size=2048).astype(complex))
    ind = GridFunction(dom, (np.abs(dom.x) <= 4.0).astype(complex))
    empty = ModelOperatorSpec((0, 1), ("psi", "psi", "phi"), ())
    assert model_form(empty, (f, f), ind) == 0.0
    one = ModelOperatorSpec((0, 1), ("psi", "psi", "phi"), (DyadicInterval(1, 0),))
    two = ModelOperatorSpec(
        (0, 1), ("psi", "psi", "phi"), (DyadicInterval(1, 0), DyadicInterval(2, 1))
    )
    assert model_form(two, (f, f), ind) >= model_form(one, (f, f), ind)


def test_model_form_stays_bounded_in_the_shift():
    # broad, bounded inputs: the pairings stay finite as the shift grows
    dom = Domain(32.0, 2048)
    I = DyadicInterval(1, 0)
    f = GridFunction(dom, np.cos(2 * np.pi * dom.x / dom.length).astype(complex))
    ind = GridFunction(dom, np.ones(2048, dtype=complex))
    vals = []
    for n in (0, 1, 2, 4, 8):
        spec = ModelOperatorSpec((n, 0), ("psi", "psi", "phi"), (I,))
        vals.append(model_form(spec, (f, f), ind))
    assert all(np.isfinite(v) for v in vals)
    assert max(vals) <= 10 * (vals[0] + 1e-30)


def test_shifted_maximal_validation():
    dom = Domain(32.0, 256)
    f = GridFunction(dom, np.ones(256, dtype=complex))
    with pytest.raises(ValueError):
        shifted_maximal(-1, f)
    with pytest.raises(ValueError):
        shifted_maximal(1.5, f)


def test_maximal_of_constant_is_one():
    dom = Domain(32.0, 256)
    f = GridFunction(dom, np.ones(256, dtype=complex))
    for n in (0, 1, 7, 127):
        out = shifted_maximal(n, f)
        assert np.allclose(out.values, 1.0), n


def test_zero_shift_dominates_the_function():
    dom = Domain(32.0, 256)
    rng = np.random.default_rng(6)
    f = GridFunction(dom, np.abs(rng.normal(size=256)).astype(complex))
    out = shifted_maximal(0, f)
    assert np.all(out.values.real >= np.abs(f.values) - 1e-15)


def test_maximal_wrap_scales_are_excluded():
    # with n = N - 1 only the single-cell scale survives: a pure index shift
    N = 16
    dom = Domain(16.0, N)
    rng = np.random.default_rng(7)
    v = np.abs(rng.normal(size=N))
    f = GridFunction(dom, v.astype(complex))
    out = shifted_maximal(N - 1, f)
    assert np.allclose(out.values.real, np.roll(v, -(N - 1)))
    # shifts >= N leave no admissible scale at all
    assert np.max(np.abs(shifted_maximal(N, f).values)) == 0.0


def test_shifted_square_zero_shift_matches_plancherel():
    # independent oracle: ||S^0 f||_2^2 = sum_xi |f^|^2 sum_k |psi_k^|^2 / L
    fam = build_family("noncompact")
    dom = Domain(32.0, 2048)
    f = GridFunction.from_callable(dom, lambda x: np.exp(-np.pi * (x - 0.5) ** 2))
    k_min, k_max = -1, 4
    out = shifted_square(0, fam, f, k_min, k_max)
    from calderon_lab.gridcore import forward_transform

    fh = np.abs(forward_transform(f).coeffs) ** 2
    weight = np.zeros(dom.n)
    for k in range(k_min, k_max + 1):
        weight += np.abs(fam.psi_hat_scale(k, dom.freq)) ** 2
    target = np.sqrt(np.sum(fh * weight) / dom.length)
    assert abs(lp_norm(out, 2) - target) < 1e-12
    assert 0.25 < lp_norm(out, 2) / lp_norm(f, 2) < 4.0


def test_shifted_square_translates_preserve_l2():
    fam = build_family("noncompact")
    dom = Domain(32.0, 2048)
    rng = np.random.default_rng(8)
    f = GridFunction(dom, rng.normal(size=2048).astype(complex))
    base = lp_norm(shifted_square(0, fam, f, -1, 4), 2)
    for n in (1, 4, 16):
        assert abs(lp_norm(shifted_square(n, fam, f, -1, 4), 2) - base) < 1e-10
