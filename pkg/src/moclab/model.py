"""Grids, field states and the two physical models.

Two models are supported:

* the coupled-wave system for two real 3-vectors ``S+`` (right-moving) and
  ``S-`` (left-moving), ``S±_t ± S±_x = S± x J S∓`` with ``J = diag(1, -1, -2)``,
  linearized about the constant background ``S+ = (0, 1, 0)``, ``S- = (0, -1, 0)``;
* the Gross-Neveu system for two complex scalars ``u`` (right-moving) and
  ``v`` (left-moving) with its standing soliton.

The linearized coupled-wave model acts on the error vector
``s = (s+_1, s+_3, s-_1, s-_3)``. The second components decouple at first
order and are dropped.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGrid, InvalidOmega, NonIntegerRatio

J_DIAG = np.array([1.0, -1.0, -2.0])

RNG_NAME = "numpy.random.Philox"


@dataclass(frozen=True)
class Grid1D:
    """Uniform lattice with ``h = dx = dt`` and ``M + 1`` nodes."""

    L: float
    h: float
    M: int
    centered: bool = False

    @property
    def x(self):
        x = np.arange(self.M + 1) * self.h
        if self.centered:
            x = x - self.L / 2
        return x

    @property
    def x_mid(self):
        return 0.0 if self.centered else self.L / 2


def make_grid(L, h, centered=False):
    """Build a grid on ``[0, L]`` or, if ``centered``, on ``[-L/2, L/2]``.

    Raises
    ------
    NonIntegerRatio
        If ``L / h`` is not an integer to within one ulp.
    DegenerateGrid
        If the resulting ``M`` is below 4.
    """
    L = float(L)
    h = float(h)
    if not (L > 0 and h > 0 and np.isfinite(L) and np.isfinite(h)):
        raise DegenerateGrid(f"L and h must be positive, got L={L}, h={h}")
    ratio = L / h
    M = int(round(ratio))
    if abs(ratio - M) > np.spacing(max(float(M), 1.0)):
        raise NonIntegerRatio(f"L/h = {ratio!r} is not an integer")
    if M < 4:
        raise DegenerateGrid(f"M = {M} < 4")
    return Grid1D(L=L, h=h, M=M, centered=bool(centered))


@dataclass(frozen=True)
class SchemeMatrices:
    """4x4 blocks of the linearized one-step map and their h-expansion."""

    scheme: str
    h: float
    P: np.ndarray
    A: np.ndarray
    B: np.ndarray
    Gamma: np.ndarray = None
    Omega: np.ndarray = None
    parts: dict = field(default_factory=dict)


def coupling_matrices():
    """Return ``(A, B, P)`` of the linearized coupled-wave system."""
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    B = np.array([[0.0, -2.0], [-1.0, 0.0]])
    P = np.block([[-A, B], [-B, A]])
    return A, B, P


@dataclass(frozen=True)
class BoundarySpec:
    """``kind`` is ``"periodic"`` or ``"nonreflecting"``.

    For nonreflecting BC, ``left`` is the value held by the right-moving
    field at node 0 and ``right`` the value of the left-moving field at
    node M.
    """

    kind: str
    left: object = None
    right: object = None

    @property
    def periodic(self):
        return self.kind == "periodic"


@dataclass(frozen=True)
class NoiseSpec:
    amplitude: float = 0.0
    seed: int = 0


@dataclass
class FieldState:
    """Solution on the grid.

    ``plus`` and ``minus`` have shape ``(M + 1, ncomp)`` for the vector
    models and ``(M + 1,)`` for Gross-Neveu.
    """

    plus: np.ndarray
    minus: np.ndarray
    time: float = 0.0
    model: str = ""

    def copy(self):
        return FieldState(self.plus.copy(), self.minus.copy(), self.time, self.model)


class CoupledWave:
    """Nonlinear coupled-wave model about the constant background."""

    name = "coupled-wave"
    ncomp = 3
    dtype = np.float64

    def f_plus(self, sp, sm):
        return np.cross(sp, J_DIAG * sm)

    def f_minus(self, sp, sm):
        return np.cross(sm, J_DIAG * sp)

    def exact(self, grid, t=0.0):
        n = grid.M + 1
        plus = np.zeros((n, 3))
        minus = np.zeros((n, 3))
        plus[:, 1] = 1.0
        minus[:, 1] = -1.0
        return FieldState(plus, minus, t, self.name)

    def boundary(self, kind):
        if kind == "periodic":
            return BoundarySpec("periodic")
        return BoundarySpec("nonreflecting", np.array([0.0, 1.0, 0.0]), np.array([0.0, -1.0, 0.0]))

    def error_components(self, state, grid):
        """Stack ``(s+_1, s+_3, s-_1, s-_3)`` of ``state - background``."""
        ex = self.exact(grid, state.time)
        dp = state.plus - ex.plus
        dm = state.minus - ex.minus
        return np.column_stack([dp[:, 0], dp[:, 2], dm[:, 0], dm[:, 2]])


class LinearCoupledWave:
    """Linearized coupled-wave model acting directly on the error vector."""

    name = "coupled-wave-linear"
    ncomp = 2
    dtype = np.float64

    def __init__(self):
        _, _, P = coupling_matrices()
        self.P = P

    def f_plus(self, sp, sm):
        P = self.P
        return sp @ P[:2, :2].T + sm @ P[:2, 2:].T

    def f_minus(self, sp, sm):
        P = self.P
        return sp @ P[2:, :2].T + sm @ P[2:, 2:].T

    def exact(self, grid, t=0.0):
        n = grid.M + 1
        return FieldState(np.zeros((n, 2)), np.zeros((n, 2)), t, self.name)

    def boundary(self, kind):
        if kind == "periodic":
            return BoundarySpec("periodic")
        return BoundarySpec("nonreflecting", np.zeros(2), np.zeros(2))

    def error_components(self, state, grid):
        return np.column_stack([state.plus, state.minus])


def gn_soliton(x, omega):
    """Standing Gross-Neveu soliton profiles ``(U(x), V(x))``."""
    beta = np.sqrt(1.0 - omega**2)
    mu = np.sqrt((1.0 - omega) / (1.0 + omega))
    c = np.cosh(beta * x)
    s = np.sinh(beta * x)
    den = c * c - mu * mu * s * s
    amp = np.sqrt(1.0 - omega)
    U = amp * (c + 1j * mu * s) / den
    V = amp * (c - 1j * mu * s) / den
    return U, V


class GrossNeveu:
    """Gross-Neveu model with the standing soliton of frequency ``omega``."""

    name = "gross-neveu"
    ncomp = 1
    dtype = np.complex128

    def __init__(self, omega=0.7):
        omega = float(omega)
        if not 0.0 < omega < 1.0:
            raise InvalidOmega(f"omega must lie in (0, 1), got {omega}")
        self.omega = omega

    def f_plus(self, u, v):
        return 1j * (np.abs(v) ** 2 * u + v * v * np.conj(u)) - 1j * v

    def f_minus(self, u, v):
        return 1j * (np.abs(u) ** 2 * v + u * u * np.conj(v)) - 1j * u

    def exact(self, grid, t=0.0):
        U, V = gn_soliton(grid.x, self.omega)
        ph = np.exp(-1j * self.omega * t)
        return FieldState(U * ph, V * ph, t, self.name)

    def boundary(self, kind):
        if kind == "periodic":
            return BoundarySpec("periodic")
        return BoundarySpec("nonreflecting", 0.0 + 0.0j, 0.0 + 0.0j)

    def error_components(self, state, grid):
        ex = self.exact(grid, state.time)
        return np.column_stack([state.plus - ex.plus, state.minus - ex.minus])

    def err_tot(self, state, grid):
        """Total error norm over all nodes."""
        e = self.error_components(state, grid)
        return float(np.sqrt(np.sum(np.abs(e) ** 2)))


def make_model(name, omega=0.7):
    if name in ("coupled-wave", "cw"):
        return CoupledWave()
    if name in ("coupled-wave-linear", "linear"):
        return LinearCoupledWave()
    if name in ("gross-neveu", "gn"):
        return GrossNeveu(omega)
    raise ValueError(f"unknown model {name!r}")


def background_state(model, grid):
    """Exact solution of ``model`` at ``t = 0`` on ``grid``."""
    return model.exact(grid, 0.0)


def add_noise(state, spec, bc=None):
    """Add uniform white noise in ``[-a, a]`` to every real degree of freedom.

    Inflow entries pinned by a nonreflecting ``bc`` are left untouched. Under
    periodic BC node M is kept equal to node 0.
    """
    out = state.copy()
    a = float(spec.amplitude)
    if a == 0.0:
        return out
    rng = np.random.Generator(np.random.Philox(int(spec.seed) % 2**64))
    for arr in (out.plus, out.minus):
        if np.iscomplexobj(arr):
            re = rng.uniform(-a, a, arr.shape)
            im = rng.uniform(-a, a, arr.shape)
            arr += re + 1j * im
        else:
            arr += rng.uniform(-a, a, arr.shape)
    if bc is not None:
        if bc.periodic:
            out.plus[-1] = out.plus[0]
            out.minus[-1] = out.minus[0]
        else:
            out.plus[0] = state.plus[0]
            out.minus[-1] = state.minus[-1]
    return out
