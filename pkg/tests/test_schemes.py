import numpy as np
import pytest
import scipy.linalg

from moclab import model as md
from moclab import schemes as sc
from moclab import stability as stab
from moclab import _kernels
from moclab.errors import ConfigError, ErrorBlowup, MissingHistory


class FreeModel:
    """Zero right-hand side: pure advection along the characteristics."""

    name = "free"

    def f_plus(self, sp, sm):
        return np.zeros_like(sp)

    def f_minus(self, sp, sm):
        return np.zeros_like(sm)


def _stack(st):
    return np.column_stack([st.plus, st.minus]).ravel()


def _unstack(v, M):
    s = v.reshape(M + 1, 4)
    return md.FieldState(s[:, :2].copy(), s[:, 2:].copy())


@pytest.mark.parametrize("bc", ["periodic", "nonreflecting"])
@pytest.mark.parametrize("step", ["se", "me", "rk4", "lf"])
def test_background_is_fixed_point(step, bc):
    cw = md.CoupledWave()
    g = md.make_grid(8, 0.5)
    st = md.background_state(cw, g)
    if step == "lf":
        out = sc.step_lf(st, st.copy(), cw, bc, g.h)
    else:
        out = sc.STARTUP_STEPS[step](st, cw, bc, g.h)
    np.testing.assert_array_equal(out.plus, st.plus)
    np.testing.assert_array_equal(out.minus, st.minus)


@pytest.mark.parametrize("step", ["se", "me", "rk4"])
def test_free_advection_one_node(step):
    M = 10
    st = md.FieldState(np.zeros((M + 1, 2)), np.zeros((M + 1, 2)))
    st.plus[4] = [1.0, 2.0]
    st.minus[6] = [3.0, 4.0]
    bc = md.BoundarySpec("nonreflecting", np.zeros(2), np.zeros(2))
    out = sc.STARTUP_STEPS[step](st, FreeModel(), bc, 0.1)
    np.testing.assert_array_equal(np.nonzero(out.plus[:, 0])[0], [5])
    np.testing.assert_array_equal(out.plus[5], [1.0, 2.0])
    np.testing.assert_array_equal(out.minus[5], [3.0, 4.0])
    assert np.count_nonzero(out.minus) == 2


def test_free_advection_lf_two_nodes_periodic():
    M = 10
    z = np.zeros((M + 1, 2))
    old = md.FieldState(z.copy(), z.copy())
    now = md.FieldState(z.copy(), z.copy())
    old.plus[9] = [1.0, -1.0]
    old.minus[1] = [2.0, 0.5]
    out = sc.step_lf(now, old, FreeModel(), md.BoundarySpec("periodic"), 0.1)
    # node 9 + 2 wraps to node 1; node 1 - 2 wraps to node 9
    np.testing.assert_array_equal(out.plus[1], [1.0, -1.0])
    np.testing.assert_array_equal(out.minus[9], [2.0, 0.5])
    assert np.count_nonzero(out.plus) == 2
    assert np.count_nonzero(out.minus) == 2


def test_lf_requires_history():
    cw = md.CoupledWave()
    st = cw.exact(md.make_grid(4, 1.0))
    with pytest.raises(MissingHistory):
        sc.step_lf(st, None, cw, "periodic", 1.0)


def test_scheme_id():
    assert sc.SchemeId("lf").startup == "me"
    with pytest.raises(ConfigError):
        sc.SchemeId("cn")
    with pytest.raises(ConfigError):
        sc.SchemeId("lf", "euler")


@pytest.mark.parametrize("M", [8, 32, 128])
@pytest.mark.parametrize("scheme", ["se", "me"])
def test_linear_stepper_equals_matrix(scheme, M):
    h = 0.05
    lin = md.LinearCoupledWave()
    bc = lin.boundary("nonreflecting")
    N = stab.assemble_amplification_matrix(scheme, M, h).matrix
    step = sc.step_se if scheme == "se" else sc.step_me
    rng = np.random.default_rng(M)
    V = rng.standard_normal((100, 4 * (M + 1)))
    # pinned inflow entries are zero in any admissible error vector
    V[:, [0, 1, 4 * M + 2, 4 * M + 3]] = 0.0
    got = np.array([_stack(step(_unstack(v, M), lin, bc, h)) for v in V])
    want = V @ N.T
    scale = np.abs(want).max()
    assert np.abs(got - want).max() <= 1e-12 * scale


@pytest.mark.parametrize("periodic", [True, False])
@pytest.mark.parametrize("scheme", ["se", "me"])
def test_kernel_matches_numpy_stepper(scheme, periodic):
    M, h, n = 40, 0.05, 7
    mats = stab.assemble_gamma_omega(scheme, h)
    rng = np.random.default_rng(1)
    e = rng.standard_normal((M + 1, 4))
    if periodic:
        e[M] = e[0]
    else:
        e[0, :2] = 0.0
        e[M, 2:] = 0.0
    want = e.copy()
    for _ in range(n):
        want = sc.linear_step(want, mats.Gamma, mats.Omega, periodic)
    got = _kernels.linear_run(np.ascontiguousarray(e.T), mats.Gamma, mats.Omega, n, periodic).T
    np.testing.assert_allclose(got, want, rtol=0, atol=1e-12 * np.abs(want).max())


@pytest.mark.parametrize("periodic", [True, False])
def test_periodic_matrix_matches_stepper(periodic):
    M, h = 16, 0.05
    lin = md.LinearCoupledWave()
    bc = lin.boundary("periodic" if periodic else "nonreflecting")
    N = stab.assemble_amplification_matrix("se", M, h, periodic=periodic).matrix
    rng = np.random.default_rng(2)
    v = rng.standard_normal(4 * (M + 1))
    if periodic:
        v[4 * M:] = v[:4]
    else:
        v[[0, 1, 4 * M + 2, 4 * M + 3]] = 0.0
    got = _stack(sc.step_se(_unstack(v, M), lin, bc, h))
    np.testing.assert_allclose(got, N @ v, atol=1e-13)


@pytest.mark.parametrize("bc", ["periodic", "nonreflecting"])
def test_gn_kernel_matches_numpy_stepper(bc):
    gn = md.GrossNeveu(0.7)
    g = md.make_grid(16, 0.125, centered=True)
    bcs = gn.boundary(bc)
    st = md.add_noise(gn.exact(g), md.NoiseSpec(1e-3, 4), bcs)
    want = st
    for _ in range(9):
        want = sc.step_me(want, gn, bcs, g.h)
    u, v = _kernels.gn_me_run(st.plus, st.minus, g.h, 9, bcs.periodic, 0j, 0j)
    np.testing.assert_allclose(u, want.plus, atol=1e-13)
    np.testing.assert_allclose(v, want.minus, atol=1e-13)


def test_run_fast_paths_match_generic_steppers():
    # the compiled path of run() against explicit numpy stepping
    lin = md.LinearCoupledWave()
    g = md.make_grid(8, 0.1)
    noise = md.NoiseSpec(1.0, 3)
    series = sc.run(lin, "me", "nonreflecting", g, noise, t_final=1.0, sample_every=0.5)
    st = md.add_noise(lin.exact(g), noise, lin.boundary("nonreflecting"))
    for _ in range(10):
        st = sc.step_me(st, lin, "nonreflecting", g.h)
    np.testing.assert_allclose(series.errors[-1], lin.error_components(st, g), atol=1e-12)
    np.testing.assert_allclose(series.times, [0.0, 0.5, 1.0])


@pytest.mark.parametrize("startup", ["se", "me", "rk4"])
@pytest.mark.parametrize("periodic", [True, False])
def test_lf_companion_matches_step_lf(startup, periodic):
    M, h = 8, 0.05
    lin = md.LinearCoupledWave()
    bc = lin.boundary("periodic" if periodic else "nonreflecting")
    C = stab.assemble_amplification_matrix("lf", M, h, periodic, startup).matrix
    rng = np.random.default_rng(5)
    for _ in range(10):
        now, old = rng.standard_normal((2, 4 * (M + 1)))
        for v in (now, old):
            if periodic:
                v[4 * M:] = v[:4]
            else:
                v[[0, 1, 4 * M + 2, 4 * M + 3]] = 0.0
        out = sc.step_lf(_unstack(now, M), _unstack(old, M), lin, bc, h, startup)
        want = C @ np.concatenate([now, old])
        np.testing.assert_allclose(_stack(out), want[:4 * (M + 1)], atol=1e-12)
        np.testing.assert_array_equal(want[4 * (M + 1):], now)


def _fourier_local_error(step, M):
    # one step on a single smooth Fourier mode against the exact linear flow
    L = 2 * np.pi
    h = L / M
    lin = md.LinearCoupledWave()
    x = h * np.arange(M + 1)
    D = np.diag([1.0, 1.0, -1.0, -1.0])
    s0 = np.array([1.0 + 0.5j, -0.3j, 0.7, 0.2 - 0.4j])
    s1 = scipy.linalg.expm(h * (-1j * D + lin.P)) @ s0
    field0 = np.real(np.outer(np.exp(1j * x), s0))
    field1 = np.real(np.outer(np.exp(1j * x), s1))
    st = md.FieldState(field0[:, :2].copy(), field0[:, 2:].copy())
    out = step(st, lin, "periodic", h)
    return np.abs(np.column_stack([out.plus, out.minus]) - field1).max()


@pytest.mark.parametrize("step,order", [(sc.step_se, 2), (sc.step_me, 3)])
def test_local_truncation_order(step, order):
    errs = [_fourier_local_error(step, M) for M in (128, 256, 512)]
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    np.testing.assert_allclose(rates, order, atol=0.1)


def _norm_drift(step, M):
    L = 2 * np.pi
    h = L / M
    x = h * np.arange(M + 1)
    cw = md.CoupledWave()
    plus = np.column_stack([0.3 * np.sin(x), np.ones_like(x), 0.2 * np.cos(2 * x)])
    minus = np.column_stack([0.1 * np.cos(x), -np.ones_like(x), 0.25 * np.sin(x)])
    st = md.FieldState(plus, minus)
    out = step(st, cw, "periodic", h)
    lt, rt = (np.arange(M + 1) - 1) % M, (np.arange(M + 1) + 1) % M
    dp = np.sum(out.plus**2, axis=1) - np.sum(plus[lt] ** 2, axis=1)
    dm = np.sum(out.minus**2, axis=1) - np.sum(minus[rt] ** 2, axis=1)
    return max(np.abs(dp).max(), np.abs(dm).max())


@pytest.mark.parametrize("step,order", [(sc.step_se, 2), (sc.step_me, 3)])
def test_characteristic_norm_drift_order(step, order):
    # SE drifts by exactly h^2 |f|^2; ME does at least one order better
    drifts = [_norm_drift(step, M) for M in (128, 256, 512)]
    rates = np.log2(np.array(drifts[:-1]) / np.array(drifts[1:]))
    assert np.all(rates >= order - 0.15)
    if step is sc.step_se:
        np.testing.assert_allclose(rates, 2, atol=0.05)


def test_zero_noise_run_has_zero_error():
    cw = md.CoupledWave()
    g = md.make_grid(10, 0.1)
    for scheme in ("se", "me", "lf"):
        series = sc.run(cw, scheme, "nonreflecting", g, md.NoiseSpec(0.0), 2.0, 1.0)
        assert all(np.all(e == 0) for e in series.errors)
        assert np.all(series.norms == 0)


def test_run_times_and_shapes():
    lin = md.LinearCoupledWave()
    g = md.make_grid(10, 0.1)
    series = sc.run(lin, "se", "periodic", g, md.NoiseSpec(1.0, 1), 3.0, 0.5)
    assert np.all(np.diff(series.times) > 0)
    assert len(series.errors) == 7
    assert series.errors[0].shape == (g.M + 1, 4)


def test_run_rejects_non_multiple_times():
    lin = md.LinearCoupledWave()
    g = md.make_grid(10, 0.1)
    with pytest.raises(ConfigError):
        sc.run(lin, "se", "periodic", g, None, 1.05, 0.5)
    with pytest.raises(ConfigError):
        sc.run(lin, "se", "periodic", g, None, 1.0, 0.25)


def test_run_blowup_guard():
    # periodic LF grows like exp(1.5 t); from unit noise it crosses 1e10 near t = 16
    lin = md.LinearCoupledWave()
    g = md.make_grid(4, 0.01)
    with pytest.raises(ErrorBlowup):
        sc.run(lin, "lf", "periodic", g, md.NoiseSpec(1.0, 1), 40.0, 1.0)


def _growth_exponent(bc):
    lin = md.LinearCoupledWave()
    g = md.make_grid(50, 0.02)
    series = sc.run(lin, "se", bc, g, md.NoiseSpec(1.0, 9), 200.0, 10.0)
    t = series.times
    sel = t >= 100
    return np.polyfit(t[sel], np.log(series.norms[sel]), 1)[0]


def test_se_growth_insensitive_to_boundary():
    a_per = _growth_exponent("periodic")
    a_nr = _growth_exponent("nonreflecting")
    assert a_per > 0
    assert abs(a_nr - a_per) <= 0.05 * a_per
