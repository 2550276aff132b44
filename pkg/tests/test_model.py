import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as hst

from moclab import model as md
from moclab.errors import DegenerateGrid, InvalidOmega, NonIntegerRatio


def test_make_grid_uncentered():
    g = md.make_grid(50, 0.02)
    assert g.M == 2500
    assert g.x[0] == 0.0
    assert g.x[-1] == pytest.approx(50.0, abs=1e-12)
    assert g.x_mid == 25.0


def test_make_grid_centered_gn():
    g = md.make_grid(64, 64 / 2**12, centered=True)
    assert g.M == 4096
    assert g.x[0] == -32.0
    assert g.x[-1] == 32.0
    assert g.x_mid == 0.0


def test_make_grid_rejects_non_integer_ratio():
    with pytest.raises(NonIntegerRatio):
        md.make_grid(1, 0.3)


@pytest.mark.parametrize("L,h", [(1.0, 0.5), (3.0, 1.0), (-1.0, 0.1), (1.0, 0.0), (np.inf, 1.0)])
def test_make_grid_degenerate(L, h):
    with pytest.raises(DegenerateGrid):
        md.make_grid(L, h)


@given(M=hst.integers(4, 10**6), L=hst.floats(1e-3, 1e4))
def test_grid_round_trip(M, L):
    h = L / M
    g = md.make_grid(L, h)
    assert g.M == M
    assert abs(g.M * g.h - L) <= np.spacing(L)


def test_coupling_matrices_entries():
    A, B, P = md.coupling_matrices()
    np.testing.assert_array_equal(P[0], [0, -1, 0, -2])
    np.testing.assert_array_equal(P, np.block([[-A, B], [-B, A]]))
    np.testing.assert_array_equal(A + A.T, np.zeros((2, 2)))
    nz = P[P != 0]
    assert len(nz) == 8
    assert set(np.abs(nz)) == {1.0, 2.0}


def test_j_diag():
    np.testing.assert_array_equal(md.J_DIAG, [1.0, -1.0, -2.0])


def test_coupled_wave_background_is_stationary():
    cw = md.CoupledWave()
    g = md.make_grid(4, 0.5)
    st = md.background_state(cw, g)
    np.testing.assert_array_equal(st.plus[:, 1], 1.0)
    np.testing.assert_array_equal(st.minus[:, 1], -1.0)
    assert np.all(cw.f_plus(st.plus, st.minus) == 0)
    assert np.all(cw.f_minus(st.plus, st.minus) == 0)


def test_linearization_matches_p():
    # first-order response of the cross-product terms to a small perturbation
    cw = md.CoupledWave()
    _, _, P = md.coupling_matrices()
    rng = np.random.default_rng(0)
    s = rng.standard_normal(4)
    eps = 1e-7
    sp = np.array([eps * s[0], 1.0, eps * s[1]])
    sm = np.array([eps * s[2], -1.0, eps * s[3]])
    fp = cw.f_plus(sp, sm)
    fm = cw.f_minus(sp, sm)
    lin = np.array([fp[0], fp[2], fm[0], fm[2]]) / eps
    np.testing.assert_allclose(lin, P @ s, atol=1e-6)


def test_gn_soliton_center_value():
    U, V = md.gn_soliton(np.array([0.0]), 0.7)
    assert U[0] == pytest.approx(np.sqrt(0.3), abs=1e-15)
    assert V[0] == pytest.approx(np.sqrt(0.3), abs=1e-15)
    assert np.sqrt(0.3) == pytest.approx(0.54772, abs=1e-5)


def test_gn_soliton_tail_decay_rate():
    # tails fall off like exp(-kappa |x|) with kappa = sqrt(1 - omega^2)
    om = 0.7
    kappa = np.sqrt(1 - om**2)
    x = np.array([20.0, 32.0])
    U, _ = md.gn_soliton(x, om)
    rate = np.log(abs(U[0]) / abs(U[1])) / 12.0
    assert rate == pytest.approx(kappa, rel=1e-6)
    assert abs(U[1]) < 2e-10


def test_gn_soliton_symmetry():
    g = md.make_grid(64, 64 / 2**12, centered=True)
    U, V = md.gn_soliton(g.x, 0.7)
    np.testing.assert_allclose(np.abs(U), np.abs(U[::-1]), atol=1e-14)
    np.testing.assert_allclose(V, U[::-1], atol=1e-14)
    np.testing.assert_allclose(V, np.conj(U), atol=1e-14)


def test_gn_soliton_is_stationary():
    # residual of the traveling-phase ansatz with 4th-order central differences
    om = 0.7
    gn = md.GrossNeveu(om)
    h = 64 / 2**12
    x = -32 + h * np.arange(4097)
    U, V = md.gn_soliton(x, om)

    def d4(f):
        return (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)

    Uc, Vc = U[2:-2], V[2:-2]
    r1 = -1j * om * Uc + d4(U) - gn.f_plus(Uc, Vc)
    r2 = -1j * om * Vc - d4(V) - gn.f_minus(Uc, Vc)
    assert np.abs(r1).max() <= 1e-6
    assert np.abs(r2).max() <= 1e-6


@pytest.mark.parametrize("om", [0.0, 1.0, -0.5, 1.5])
def test_invalid_omega(om):
    with pytest.raises(InvalidOmega):
        md.GrossNeveu(om)


def test_gn_exact_phase():
    gn = md.GrossNeveu(0.7)
    g = md.make_grid(16, 0.25, centered=True)
    s0 = gn.exact(g, 0.0)
    s1 = gn.exact(g, 2.0)
    np.testing.assert_allclose(s1.plus, s0.plus * np.exp(-1.4j), atol=1e-15)


def test_noise_zero_amplitude_is_identity():
    g = md.make_grid(8, 0.5)
    st = md.CoupledWave().exact(g)
    out = md.add_noise(st, md.NoiseSpec(0.0, 3))
    np.testing.assert_array_equal(out.plus, st.plus)
    np.testing.assert_array_equal(out.minus, st.minus)


@given(seed=hst.integers(0, 2**64 - 1), amp=hst.floats(0.0, 10.0))
def test_noise_deterministic_and_bounded(seed, amp):
    g = md.make_grid(8, 0.5)
    st = md.CoupledWave().exact(g)
    a = md.add_noise(st, md.NoiseSpec(amp, seed))
    b = md.add_noise(st, md.NoiseSpec(amp, seed))
    np.testing.assert_array_equal(a.plus, b.plus)
    np.testing.assert_array_equal(a.minus, b.minus)
    assert np.all(np.abs(a.plus - st.plus) <= amp)


def test_noise_gn_amplitude():
    gn = md.GrossNeveu(0.7)
    g = md.make_grid(64, 64 / 2**12, centered=True)
    st = gn.exact(g)
    out = md.add_noise(st, md.NoiseSpec(1e-12, 5), gn.boundary("nonreflecting"))
    d = np.concatenate([out.plus - st.plus, out.minus - st.minus])
    assert np.abs(d.real).max() <= 1e-12
    assert np.abs(d.imag).max() <= 1e-12
    assert np.abs(d.imag).max() > 0
    assert out.plus[0] == st.plus[0]
    assert out.minus[-1] == st.minus[-1]


def test_noise_periodic_identifies_ends():
    g = md.make_grid(8, 0.5)
    lin = md.LinearCoupledWave()
    out = md.add_noise(lin.exact(g), md.NoiseSpec(1.0, 1), lin.boundary("periodic"))
    np.testing.assert_array_equal(out.plus[-1], out.plus[0])
    np.testing.assert_array_equal(out.minus[-1], out.minus[0])


def test_noise_seeds_differ():
    g = md.make_grid(8, 0.5)
    st = md.LinearCoupledWave().exact(g)
    a = md.add_noise(st, md.NoiseSpec(1.0, 1))
    b = md.add_noise(st, md.NoiseSpec(1.0, 2))
    assert not np.array_equal(a.plus, b.plus)


def test_error_components_layout():
    cw = md.CoupledWave()
    g = md.make_grid(4, 1.0)
    st = cw.exact(g)
    st.plus[:, 0] += 1.0
    st.plus[:, 2] += 2.0
    st.minus[:, 0] += 3.0
    st.minus[:, 2] += 4.0
    st.plus[:, 1] += 9.0
    err = cw.error_components(st, g)
    np.testing.assert_array_equal(err, np.tile([1.0, 2.0, 3.0, 4.0], (5, 1)))


def test_make_model_names():
    assert isinstance(md.make_model("cw"), md.CoupledWave)
    assert isinstance(md.make_model("linear"), md.LinearCoupledWave)
    assert md.make_model("gn", 0.5).omega == 0.5
    with pytest.raises(ValueError):
        md.make_model("kdv")
