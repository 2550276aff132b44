"""Method-of-characteristics time steppers and the simulation loop.

All steppers work at CFL = 1: the right-moving field at node ``m`` is
advanced along the characteristic from node ``m - 1`` and the left-moving
field from node ``m + 1``. Periodic BC identify node M with node 0.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigError, ErrorBlowup, MissingHistory
from .model import BoundarySpec, GrossNeveu, LinearCoupledWave, NoiseSpec, add_noise

SCHEMES = ("se", "me", "lf")
STARTUPS = ("se", "me", "rk4")
BLOWUP = 1e10


@dataclass(frozen=True)
class SchemeId:
    name: str
    startup: str = "me"

    def __post_init__(self):
        if self.name not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.name!r}")
        if self.startup not in STARTUPS:
            raise ConfigError(f"unknown LF startup {self.startup!r}")


@dataclass
class ErrorSeries:
    """Sampled errors ``numeric - exact``.

    ``errors[j]`` has shape ``(M + 1, ncomp)``; ``norms[j]`` is the
    Euclidean norm over all nodes and components.
    """

    times: np.ndarray
    errors: list
    norms: np.ndarray
    meta: dict = field(default_factory=dict)


def _as_bc(model, bc):
    if isinstance(bc, BoundarySpec):
        return bc
    return model.boundary(bc)


def _neighbours(M, periodic):
    m = np.arange(M + 1)
    if periodic:
        return (m - 1) % M, (m + 1) % M
    return np.maximum(m - 1, 0), np.minimum(m + 1, M)


def _pin(state, bc):
    if not bc.periodic:
        state.plus[0] = bc.left
        state.minus[-1] = bc.right
    return state


def _f(model, plus, minus):
    return model.f_plus(plus, minus), model.f_minus(plus, minus)


def step_se(state, model, bc, h):
    """One simple-Euler step."""
    bc = _as_bc(model, bc)
    M = state.plus.shape[0] - 1
    lt, rt = _neighbours(M, bc.periodic)
    fp, fm = _f(model, state.plus, state.minus)
    plus = state.plus[lt] + h * fp[lt]
    minus = state.minus[rt] + h * fm[rt]
    out = type(state)(plus, minus, state.time + h, state.model)
    return _pin(out, bc)


def step_me(state, model, bc, h):
    """One modified-Euler (predictor-corrector) step."""
    bc = _as_bc(model, bc)
    M = state.plus.shape[0] - 1
    lt, rt = _neighbours(M, bc.periodic)
    fp, fm = _f(model, state.plus, state.minus)
    pred = step_se(state, model, bc, h)
    gp, gm = _f(model, pred.plus, pred.minus)
    plus = state.plus[lt] + 0.5 * h * (fp[lt] + gp)
    minus = state.minus[rt] + 0.5 * h * (fm[rt] + gm)
    out = type(state)(plus, minus, state.time + h, state.model)
    return _pin(out, bc)


def step_rk4(state, model, bc, h):
    """Classical four-stage step along each characteristic.

    The crossing field is not known off the grid. Its values at the
    half-step midpoint and at the arrival node are taken from Euler
    advances of the neighbouring grid values.
    """
    bc = _as_bc(model, bc)
    M = state.plus.shape[0] - 1
    lt, rt = _neighbours(M, bc.periodic)
    fp, fm = _f(model, state.plus, state.minus)
    se = step_se(state, model, bc, h)
    half_p = state.plus + 0.5 * h * fp
    half_m = state.minus + 0.5 * h * fm

    def integrate(y0, c0, c_half, c1, f):
        k1 = f(y0, c0)
        k2 = f(y0 + 0.5 * h * k1, c_half)
        k3 = f(y0 + 0.5 * h * k2, c_half)
        k4 = f(y0 + h * k3, c1)
        return y0 + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    plus = integrate(state.plus[lt], state.minus[lt], half_m, se.minus, model.f_plus)
    minus = integrate(state.minus[rt], state.plus[rt], half_p, se.plus,
                      lambda y, c: model.f_minus(c, y))
    out = type(state)(plus, minus, state.time + h, state.model)
    return _pin(out, bc)


STARTUP_STEPS = {"se": step_se, "me": step_me, "rk4": step_rk4}


def step_lf(state_n, state_nm1, model, bc, h, startup="me"):
    """One leapfrog step from levels ``n`` and ``n - 1``.

    Under nonreflecting BC the nodes next to the inflow boundaries
    (``S+`` at node 1, ``S-`` at node M-1) are filled by one step of the
    ``startup`` method from level ``n``.
    """
    if state_nm1 is None:
        raise MissingHistory("leapfrog needs the previous time level")
    bc = _as_bc(model, bc)
    M = state_n.plus.shape[0] - 1
    m = np.arange(M + 1)
    fp, fm = _f(model, state_n.plus, state_n.minus)
    if bc.periodic:
        l1, r1 = (m - 1) % M, (m + 1) % M
        l2, r2 = (m - 2) % M, (m + 2) % M
    else:
        l1, r1 = np.maximum(m - 1, 0), np.minimum(m + 1, M)
        l2, r2 = np.maximum(m - 2, 0), np.minimum(m + 2, M)
    plus = state_nm1.plus[l2] + 2 * h * fp[l1]
    minus = state_nm1.minus[r2] + 2 * h * fm[r1]
    out = type(state_n)(plus, minus, state_n.time + h, state_n.model)
    if not bc.periodic:
        near = STARTUP_STEPS[startup](state_n, model, bc, h)
        out.plus[1] = near.plus[1]
        out.minus[M - 1] = near.minus[M - 1]
    return _pin(out, bc)


def linear_step(e, G, W, periodic=False):
    """One step ``s_m <- G s_{m-1} + W s_{m+1}`` on ``e`` of shape ``(M+1, 4)``."""
    M = e.shape[0] - 1
    new = np.zeros_like(e)
    if periodic:
        lt, rt = _neighbours(M, True)
        return e[lt] @ G.T + e[rt] @ W.T
    new[1:] += e[:-1] @ G.T
    new[:-1] += e[1:] @ W.T
    new[0, :2] = 0.0
    new[M, 2:] = 0.0
    return new


def _fast_path(model, scheme):
    if isinstance(model, LinearCoupledWave) and scheme.name in ("se", "me"):
        return "linear"
    if isinstance(model, GrossNeveu) and scheme.name == "me":
        return "gn"
    return None


def _n_steps(t, h):
    n = int(round(t / h))
    if abs(n * h - t) > 1e-9 * max(1.0, abs(t)):
        raise ConfigError(f"time {t} is not a multiple of h = {h}")
    return n


def run(model, scheme, bc, grid, noise=None, t_final=None, sample_every=None,
        initial=None):
    """Advance ``model`` from its exact state plus noise and sample the error.

    Parameters
    ----------
    model : model instance
    scheme : str or SchemeId
    bc : "periodic", "nonreflecting" or BoundarySpec
    grid : Grid1D
    noise : NoiseSpec, optional
    t_final, sample_every : float
        Both must be multiples of ``h``.
    initial : FieldState, optional
        Overrides exact state plus noise.

    Returns
    -------
    ErrorSeries
        Samples at ``t = 0, sample_every, ..., t_final``.
    """
    if isinstance(scheme, str):
        scheme = SchemeId(scheme)
    bc = _as_bc(model, bc)
    h = grid.h
    noise = noise or NoiseSpec()
    n_final = _n_steps(t_final, h)
    n_every = _n_steps(sample_every, h)
    if n_every <= 0:
        raise ConfigError("sample_every must be positive")
    if initial is None:
        state = add_noise(model.exact(grid, 0.0), noise, bc)
    else:
        state = initial.copy()
    fast = _fast_path(model, scheme)
    if fast == "linear":
        from .stability import assemble_gamma_omega

        mats = assemble_gamma_omega(scheme.name, h)
        G, W = mats.Gamma, mats.Omega
    times, errors, norms = [], [], []
    prev = None

    def record(st):
        err = model.error_components(st, grid)
        nrm = float(np.sqrt(np.sum(np.abs(err) ** 2)))
        if not np.isfinite(nrm) or np.max(np.abs(err)) > BLOWUP:
            raise ErrorBlowup(f"error exceeded {BLOWUP:g} at t = {st.time:g}")
        times.append(st.time)
        errors.append(err)
        norms.append(nrm)

    record(state)
    n = 0
    while n < n_final:
        k = min(n_every, n_final - n)
        if fast == "linear":
            e = np.ascontiguousarray(np.column_stack([state.plus, state.minus]).T)
            e = _kernels.linear_run(e, G, W, k, bc.periodic)
            state = type(state)(e[:2].T.copy(), e[2:].T.copy(), state.time + k * h, state.model)
        elif fast == "gn":
            u, v = _kernels.gn_me_run(state.plus, state.minus, h, k, bc.periodic,
                                      complex(bc.left or 0), complex(bc.right or 0))
            state = type(state)(u, v, state.time + k * h, state.model)
        else:
            for _ in range(k):
                if scheme.name == "se":
                    state = step_se(state, model, bc, h)
                elif scheme.name == "me":
                    state = step_me(state, model, bc, h)
                elif prev is None:
                    prev, state = state, STARTUP_STEPS[scheme.startup](state, model, bc, h)
                else:
                    prev, state = state, step_lf(state, prev, model, bc, h, scheme.startup)
        n += k
        state.time = n * h
        record(state)
    return ErrorSeries(np.array(times), errors, np.array(norms),
                       {"scheme": scheme.name, "startup": scheme.startup, "bc": bc.kind,
                        "L": grid.L, "h": h, "M": grid.M, "model": model.name})
