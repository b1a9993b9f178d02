"""Grid, transform and principal-value plumbing."""

import numpy as np
import pytest

from calderon_lab.gridcore import (
    Domain,
    GridFunction,
    Spectrum,
    antiderivative,
    derivative,
    forward_transform,
    fractional_shift,
    inverse_transform,
    lp_norm,
    pv_convolve,
    pv_pair_sum,
    spectral_multiply,
)


def test_domain_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        Domain(32.0, 1000)


def test_domain_rejects_bad_length():
    with pytest.raises(ValueError):
        Domain(-1.0, 64)
    with pytest.raises(ValueError):
        Domain(np.inf, 64)


def test_domain_geometry():
    dom = Domain(16.0, 64)
    assert dom.dx == 0.25
    assert dom.x[0] == -8.0
    assert dom.freq_index[0] == -32
    assert dom.freq_index[-1] == 31
    r = dom.refine()
    assert r.n == 128 and r.length == 16.0


def test_transform_roundtrip():
    dom = Domain(32.0, 256)
    rng = np.random.default_rng(1)
    f = GridFunction(dom, rng.normal(size=256) + 1j * rng.normal(size=256))
    g = inverse_transform(forward_transform(f))
    assert np.max(np.abs(g.values - f.values)) < 1e-12


def test_single_mode_coefficient():
    # e^{2 pi i k x / L} carries coefficient L at index k, zero elsewhere
    dom = Domain(16.0, 64)
    k = 3
    f = GridFunction.from_callable(dom, lambda x: np.exp(2j * np.pi * k * x / dom.length))
    c = forward_transform(f).coeffs
    pos = k + dom.n // 2
    assert abs(c[pos] - dom.length) < 1e-10
    c[pos] = 0.0
    assert np.max(np.abs(c)) < 1e-10


def test_plancherel():
    dom = Domain(32.0, 512)
    rng = np.random.default_rng(5)
    f = GridFunction(dom, rng.normal(size=512).astype(complex))
    s = forward_transform(f)
    assert np.isclose(lp_norm(f, 2) ** 2, np.sum(np.abs(s.coeffs) ** 2) / dom.length)


def test_derivative_of_sine():
    dom = Domain(32.0, 256)
    w = 2.0 * np.pi * 4 / dom.length
    f = GridFunction.from_callable(dom, lambda x: np.sin(w * x))
    g = derivative(f)
    assert np.max(np.abs(g.values - w * np.cos(w * dom.x))) < 1e-10


def test_fractional_shift_is_exact_translate():
    dom = Domain(32.0, 256)
    w = 2.0 * np.pi * 5 / dom.length
    f = GridFunction.from_callable(dom, lambda x: np.cos(w * x))
    a = 0.37  # not a multiple of dx
    g = fractional_shift(f, a)
    assert np.max(np.abs(g.values - np.cos(w * (dom.x + a)))) < 1e-11


def test_antiderivative_reconstructs():
    dom = Domain(32.0, 512)
    rng = np.random.default_rng(9)
    coeffs = np.zeros(512, dtype=complex)
    band = np.abs(dom.freq_index) <= 10
    coeffs[band] = rng.normal(size=int(band.sum()))
    f = inverse_transform(Spectrum(dom, coeffs))
    G, mean = antiderivative(f)
    back = derivative(G).values + mean
    assert np.max(np.abs(back - f.values)) < 1e-10


def test_lp_norm_variants():
    dom = Domain(8.0, 64)
    f = GridFunction(dom, np.full(64, 2.0, dtype=complex))
    assert lp_norm(f, np.inf) == 2.0
    assert np.isclose(lp_norm(f, 2), 2.0 * np.sqrt(8.0))
    with pytest.raises(ValueError):
        lp_norm(f, 0.5)


def test_pair_is_bilinear_no_conjugation():
    dom = Domain(8.0, 64)
    f = GridFunction(dom, np.full(64, 1j))
    assert np.isclose(f.pair(f), -8.0)  # (i)(i) * L, no conjugate


def test_pv_pair_sum_radius_cap():
    dom = Domain(16.0, 64)
    with pytest.raises(ValueError):
        pv_pair_sum(dom, lambda j: (np.zeros(64), np.zeros(64)), R=10.0)


def test_pv_convolve_odd_kernel_kills_constants():
    dom = Domain(16.0, 128)
    f = GridFunction(dom, np.ones(128, dtype=complex))
    out = pv_convolve(f, lambda y: 1.0 / y)
    assert np.max(np.abs(out.values)) == 0.0


def test_pv_convolve_rejects_nonfinite_kernel():
    dom = Domain(16.0, 128)
    f = GridFunction(dom, np.ones(128, dtype=complex))
    kernel = lambda y: np.inf if abs(abs(y) - dom.dx) < 1e-12 else 1.0 / y
    with pytest.raises(ValueError):
        pv_convolve(f, kernel)


def test_spectral_multiply_identity():
    dom = Domain(32.0, 256)
    rng = np.random.default_rng(2)
    f = GridFunction(dom, rng.normal(size=256).astype(complex))
    g = spectral_multiply(f, lambda xi: np.ones_like(xi))
    assert np.max(np.abs(g.values - f.values)) < 1e-12


def test_grid_function_validation():
    dom = Domain(16.0, 64)
    with pytest.raises(ValueError):
        GridFunction(dom, np.zeros(32))
    bad = np.zeros(64)
    bad[3] = np.nan
    with pytest.raises(ValueError):
        GridFunction(dom, bad)
    other = GridFunction(Domain(16.0, 128), np.zeros(128))
    with pytest.raises(ValueError):
        GridFunction(dom, np.zeros(64)) + other
