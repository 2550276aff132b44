import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as hst

from moclab import spectral as sp
from moclab.errors import DegenerateFit, InsufficientSamples, NonPositiveNorm, StencilOverflow
from moclab.model import make_grid


def test_window_center_and_edges():
    g = make_grid(30, 0.1)
    w = sp.window(g)
    assert w[g.M // 2] == 1.0
    assert w[0] == pytest.approx(np.exp(-1.5**8), rel=1e-12)
    assert w[0] == pytest.approx(7.6e-12, rel=0.05)
    assert np.all((w > 0) & (w <= 1))


def test_window_symmetry():
    g = make_grid(30, 0.1)
    e = sp.window_error(np.ones((g.M + 1, 4)), g)
    np.testing.assert_allclose(e, e[::-1], atol=1e-14)


def test_windowed_endpoints_small():
    g = make_grid(25, 0.05)
    rng = np.random.default_rng(0)
    e = sp.window_error(rng.standard_normal((g.M + 1, 4)), g)
    ends = np.abs(e[[0, -1]]).max()
    assert ends <= 1e-11 * np.abs(e).max()


def test_single_harmonic_single_bin():
    g = make_grid(16, 0.25)
    m = np.arange(g.M + 1)
    err = np.exp(2j * np.pi * 5 * m / g.M)[:, None]
    _, amp = sp.spectrum(err, g, windowed=False)
    nz = np.flatnonzero(np.abs(amp[:, 0]) > 1e-12)
    np.testing.assert_array_equal(nz, [5])
    assert amp[5, 0] == pytest.approx(1.0)


@given(M=hst.integers(8, 600), seed=hst.integers(0, 2**32))
def test_parseval(M, seed):
    g = make_grid(M * 0.5, 0.5)
    rng = np.random.default_rng(seed)
    err = rng.standard_normal((M + 1, 4))
    _, amp = sp.spectrum(err, g, windowed=False)
    lhs = np.sum(err[:-1] ** 2) / M
    assert lhs == pytest.approx(np.sum(np.abs(amp) ** 2), rel=1e-12)


def test_spectrum_grid():
    g = make_grid(50, 0.02)
    k, amp = sp.spectrum(np.zeros((g.M + 1, 4)), g)
    assert len(k) == g.M
    assert k[1] == pytest.approx(2 * np.pi / 50)
    assert amp.shape == (g.M, 4)


def test_averaged_norm_flat_and_single():
    amp = np.full((100, 4), 0.5)
    for m in (0, 3, 20):
        assert sp.averaged_norm(amp, 50, m) == pytest.approx(1.0)
    rng = np.random.default_rng(1)
    a = rng.standard_normal((100, 4))
    assert sp.averaged_norm(a, 30, 0) == pytest.approx(np.linalg.norm(a[30]))


def test_averaged_norm_is_rms_of_bin_norms():
    a = np.zeros((10, 1))
    a[4], a[5], a[6] = 3.0, 0.0, 4.0
    assert sp.averaged_norm(a, 5, 1) == pytest.approx(np.sqrt(25 / 3))


def test_averaged_norm_overflow():
    with pytest.raises(StencilOverflow):
        sp.averaged_norm(np.ones((10, 4)), 2, 3)
    with pytest.raises(StencilOverflow):
        sp.averaged_norm(np.ones((10, 4)), 8, 2)


def test_center_bin_quarter():
    assert sp.center_bin(np.pi / 2, 2500) == 625


@given(r=hst.floats(-0.1, 0.1), c=hst.floats(-5, 5), L=hst.floats(1, 100))
def test_staircase_exact_recovery(r, c, L):
    h = L / 1000
    t = L * np.arange(1, 6)
    lam = sp.staircase_lambda(t, 10 ** (c + r * t), L, h)
    assert lam == pytest.approx(10 ** (h * r), rel=1e-10)


def test_staircase_constant_is_one():
    assert sp.staircase_lambda([1, 2, 3, 4], [2.0] * 4, 1, 0.1) == pytest.approx(1.0, abs=1e-14)


def test_staircase_errors():
    with pytest.raises(InsufficientSamples):
        sp.staircase_lambda([1, 2, 3], [1, 2, 3], 1, 0.1)
    with pytest.raises(NonPositiveNorm):
        sp.staircase_lambda([1, 2, 3, 4], [1, 0, 3, 4], 1, 0.1)


@pytest.mark.parametrize("p", [2.0, 4.0])
def test_loglog_slope_exact(p):
    hs = np.array([0.01, 0.005, 0.0025, 0.00125])
    assert sp.loglog_slope(hs, 3.7 * hs**p) == pytest.approx(p, abs=1e-8)


def test_loglog_slope_degenerate():
    with pytest.raises(DegenerateFit):
        sp.loglog_slope([0.1, 0.05], [1, 2])
    with pytest.raises(DegenerateFit):
        sp.loglog_slope([0.1, 0.1, 0.05], [1, 2, 3])
    with pytest.raises(DegenerateFit):
        sp.loglog_slope([0.1, 0.05, 0.02], [1, -2, 3])


@given(seed=hst.integers(0, 2**32))
def test_loglog_slope_noise_robust(seed):
    rng = np.random.default_rng(seed)
    hs = np.array([0.01, 0.005, 0.0025, 0.001, 0.0005])
    vals = hs**2 * (1 + rng.uniform(-0.2, 0.2, 5))
    assert abs(sp.loglog_slope(hs, vals) - 2) < 0.3


def test_dip_ratio_theory():
    # near box decays twice as fast as the away box
    M = 400
    amps = []
    for t in (1.0, 2.0, 3.0):
        a = np.full((M, 4), np.exp(-0.3 * t))
        q = sp.center_bin(np.pi / 2, M)
        a[q - 5:q + 6] = np.exp(-0.6 * t)
        amps.append(a)
    r = sp.dip_ratio(amps, 5, 5, np.pi / 2, np.pi / 4)
    np.testing.assert_allclose(r, [2.0, 2.0], rtol=1e-12)


def test_dip_ratio_box_overflow():
    with pytest.raises(StencilOverflow):
        sp.dip_ratio([np.ones((40, 4))] * 3, 2, 30)


def test_spectrum_series_metadata():
    from moclab.schemes import ErrorSeries

    g = make_grid(10, 0.5)
    s = ErrorSeries(np.array([0.0, 1.0]), [np.ones((21, 4))] * 2, np.ones(2))
    spec = sp.spectrum_series(s, g)
    assert spec.meta["normalization"] == "1/M"
    assert spec.windowed
    assert spec.norms(0).shape == (20,)
