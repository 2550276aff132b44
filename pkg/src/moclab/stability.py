"""Linear stability machinery for the three schemes.

The linearized error ``s = (s+_1, s+_3, s-_1, s-_3)`` of SE and ME evolves
as ``s_m <- Gamma s_{m-1} + Omega s_{m+1}``. Normal modes
``s_m^n = lambda^n rho^m xi`` satisfy

    (rho^-1 Gamma + rho Omega - lambda I) xi = 0,

and the leapfrog analogue is

    (lambda^-1 (rho^-2 Gamma0 + rho^2 Omega0)
     + 2h (rho^-1 Gamma1 + rho Omega1) - lambda I) xi = 0.

Nonreflecting BC select ``lambda`` through ``det Phi(lambda) = 0``.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import (GridTooLarge, NoConvergence, NotAnEigenpair, RangeError,
                     UnsupportedScheme, ValidityViolation)
from .model import SchemeMatrices, coupling_matrices

DENSE_CAP = 512
GUARD = 10.0

I2 = np.eye(2)
O2 = np.zeros((2, 2))
I4 = np.eye(4)
E_TOP = np.diag([1.0, 1.0, 0.0, 0.0])
E_BOT = np.diag([0.0, 0.0, 1.0, 1.0])


def _blocks():
    A, B, P = coupling_matrices()
    return A, B, P, P[:2, :2], P[:2, 2:], P[2:, :2], P[2:, 2:]


def lf_matrices():
    """``(Gamma0, Gamma1, Omega0, Omega1)`` used by the leapfrog scheme."""
    _, _, _, Ppp, Ppm, Pmp, Pmm = _blocks()
    G0 = np.block([[I2, O2], [O2, O2]])
    W0 = np.block([[O2, O2], [O2, I2]])
    G1 = np.block([[Ppp, Ppm], [O2, O2]])
    W1 = np.block([[O2, O2], [Pmp, Pmm]])
    return G0, G1, W0, W1


def assemble_gamma_omega(scheme, h):
    """Blocks ``Gamma``, ``Omega`` of the SE or ME one-step error map."""
    A, B, P, Ppp, Ppm, Pmp, Pmm = _blocks()
    G0, G1se, W0, W1se = lf_matrices()
    if scheme == "se":
        parts = {"Gamma0": G0, "Gamma1": G1se, "Omega0": W0, "Omega1": W1se}
        G = G0 + h * G1se
        W = W0 + h * W1se
    elif scheme == "me":
        G1 = np.block([[Ppp, 0.5 * Ppm], [0.5 * Pmp, O2]])
        W1 = np.block([[O2, 0.5 * Ppm], [0.5 * Pmp, Pmm]])
        G2 = P @ np.block([[Ppp, Ppm], [O2, O2]])
        W2 = P @ np.block([[O2, O2], [Pmp, Pmm]])
        parts = {"Gamma0": G0, "Gamma1": G1, "Gamma2": G2,
                 "Omega0": W0, "Omega1": W1, "Omega2": W2}
        G = G0 + h * G1 + 0.5 * h * h * G2
        W = W0 + h * W1 + 0.5 * h * h * W2
    else:
        raise UnsupportedScheme(f"no Gamma/Omega form for scheme {scheme!r}")
    return SchemeMatrices(scheme, h, P, A, B, G, W, parts)


@dataclass
class AmplificationMatrix:
    matrix: np.ndarray
    scheme: str
    M: int
    h: float
    meta: dict = field(default_factory=dict)


def _tridiag(G, W, M, periodic):
    n = 4 * (M + 1)
    N = np.zeros((n, n))
    for m in range(M + 1):
        if m > 0:
            N[4 * m:4 * m + 4, 4 * m - 4:4 * m] += G
        elif periodic:
            N[0:4, 4 * (M - 1):4 * M] += G
        if m < M:
            N[4 * m:4 * m + 4, 4 * m + 4:4 * m + 8] += W
        elif periodic:
            N[4 * M:4 * M + 4, 4:8] += W
    if not periodic:
        N[0:2, :] = 0.0
        N[4 * M + 2:4 * M + 4, :] = 0.0
    return N


def _shift2(G0, W0, M, periodic):
    n = 4 * (M + 1)
    C = np.zeros((n, n))
    for m in range(M + 1):
        for src, blk in ((m - 2, G0), (m + 2, W0)):
            if periodic:
                src %= M
            elif not 0 <= src <= M:
                continue
            C[4 * m:4 * m + 4, 4 * src:4 * src + 4] += blk
    return C


def _linear_map_matrix(fn, n):
    cols = [fn(col) for col in np.eye(n)]
    return np.array(cols).T


def assemble_amplification_matrix(scheme, M, h, periodic=False, startup="se"):
    """Dense one-step error map on the stacked vector ``(s_0, ..., s_M)``.

    For LF the map acts on ``(s^n, s^{n-1})`` and has dimension
    ``8(M + 1)``. Under nonreflecting BC the rows of ``s+_1`` and
    ``s-_{M-1}`` are taken from one step of the ``startup`` method.
    """
    if M > DENSE_CAP:
        raise GridTooLarge(f"M = {M} exceeds the dense cap {DENSE_CAP}")
    if scheme in ("se", "me"):
        mats = assemble_gamma_omega(scheme, h)
        N = _tridiag(mats.Gamma, mats.Omega, M, periodic)
        return AmplificationMatrix(N, scheme, M, h, {"periodic": periodic})
    if scheme != "lf":
        raise UnsupportedScheme(scheme)
    G0, G1, W0, W1 = lf_matrices()
    n = 4 * (M + 1)
    C1 = _tridiag(G1, W1, M, periodic)
    C0 = _shift2(G0, W0, M, periodic)
    top_now = 2 * h * C1
    top_old = C0
    if not periodic:
        start = startup_matrix(startup, M, h)
        for r in (0, 1, 4 * M + 2, 4 * M + 3):
            top_now[r] = 0.0
            top_old[r] = 0.0
        for r in (4, 5, 4 * (M - 1) + 2, 4 * (M - 1) + 3):
            top_now[r] = start[r]
            top_old[r] = 0.0
    big = np.zeros((2 * n, 2 * n))
    big[:n, :n] = top_now
    big[:n, n:] = top_old
    big[n:, :n] = np.eye(n)
    return AmplificationMatrix(big, "lf", M, h, {"periodic": periodic, "startup": startup})


def startup_matrix(method, M, h):
    """Matrix of one nonreflecting step of the linearized startup method."""
    if method in ("se", "me"):
        return assemble_amplification_matrix(method, M, h).matrix
    from .model import FieldState, LinearCoupledWave
    from .schemes import step_rk4

    model = LinearCoupledWave()
    bc = model.boundary("nonreflecting")

    def apply(v):
        s = v.reshape(M + 1, 4)
        st = FieldState(s[:, :2].copy(), s[:, 2:].copy())
        out = step_rk4(st, model, bc, h)
        return np.column_stack([out.plus, out.minus]).ravel()

    return _linear_map_matrix(apply, 4 * (M + 1))


def eig_dense(matrix):
    """All eigenvalues, sorted by descending modulus."""
    ev = scipy.linalg.eigvals(np.asarray(matrix))
    if not np.all(np.isfinite(ev)):
        raise NoConvergence("eigenvalue iteration did not converge")
    return ev[np.argsort(-np.abs(ev), kind="stable")]


def poly_roots(coeffs, tol=1e-14, maxiter=500):
    """Roots of a complex polynomial by Durand-Kerner iteration.

    ``coeffs`` are ordered from the highest power down. Accepts the result
    at the iteration cap when every residual is within ``1e-10`` of the
    coefficient scale, which covers slowly converging multiple roots.
    """
    c = np.trim_zeros(np.asarray(coeffs, dtype=complex), "f")
    n = len(c) - 1
    if n < 1:
        raise ValueError("polynomial degree must be at least 1")
    c = c / c[0]
    radius = 1.0 + np.max(np.abs(c[1:]))
    z = 0.5 * radius * (0.4 + 0.9j) ** np.arange(n)
    for _ in range(maxiter):
        pz = np.polyval(c, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        step = pz / np.prod(diff, axis=1)
        z = z - step
        if np.max(np.abs(step) / (1.0 + np.abs(z))) < tol:
            return z
    scale = np.polyval(np.abs(c), np.maximum(np.abs(z), 1.0))
    if np.all(np.abs(np.polyval(c, z)) <= 1e-10 * scale):
        return z
    raise NoConvergence("Durand-Kerner iteration cap reached")


def char_matrix(scheme, rho, lam, h):
    """Matrix whose null vectors are the mode shapes ``xi``."""
    if scheme == "lf":
        G0, G1, W0, W1 = lf_matrices()
        return ((G0 / rho**2 + rho**2 * W0) / lam + 2 * h * (G1 / rho + rho * W1)
                - lam * I4)
    mats = assemble_gamma_omega(scheme, h)
    return mats.Gamma / rho + rho * mats.Omega - lam * I4


def _symbols(scheme, kh, h):
    """Stacked one-step symbols for an array of ``kh``."""
    rho = np.exp(1j * np.asarray(kh, dtype=float))[..., None, None]
    if scheme == "lf":
        G0, G1, W0, W1 = lf_matrices()
        top = np.concatenate([2 * h * (G1 / rho + rho * W1), G0 / rho**2 + rho**2 * W0], axis=-1)
        bot = np.broadcast_to(np.hstack([I4, np.zeros((4, 4))]), top.shape)
        return np.concatenate([top, bot], axis=-2)
    mats = assemble_gamma_omega(scheme, h)
    return mats.Gamma / rho + rho * mats.Omega


def von_neumann_factors(scheme, kh, h):
    """Amplification factors of the Fourier mode ``rho = exp(i kh)``."""
    return np.linalg.eigvals(_symbols(scheme, kh, h))


def von_neumann_curve(scheme, kh, h):
    """``max |lambda|`` over the factors at each entry of ``kh``."""
    return np.abs(np.linalg.eigvals(_symbols(scheme, kh, h))).max(axis=-1)


def _interp_poly(fn, deg):
    """Coefficients (highest first) of a degree-``deg`` polynomial from samples."""
    n = deg + 1
    w = np.exp(2j * np.pi * np.arange(n) / n)
    vals = np.array([fn(x) for x in w])
    low_first = np.fft.fft(vals) / n
    return low_first[::-1]


def rho_polynomial(scheme, lam, h):
    """Characteristic polynomial in ``rho`` (highest power first)."""
    if scheme == "se":
        mats = assemble_gamma_omega("se", h)
        T0 = E_TOP @ mats.Gamma - lam * E_BOT
        T1 = E_BOT @ mats.Omega - lam * E_TOP
        return _interp_poly(lambda r: np.linalg.det(T0 + r * T1), 4)
    if scheme == "me":
        mats = assemble_gamma_omega("me", h)
        return _interp_poly(lambda r: np.linalg.det(mats.Gamma + r * r * mats.Omega
                                                    - lam * r * I4), 8)
    if scheme == "lf":
        G0, G1, W0, W1 = lf_matrices()

        def det(r):
            top = E_TOP / lam + 2 * h * r * (E_TOP @ G1) - lam * r * r * E_TOP
            bot = r * r * (E_BOT @ W0) / lam + 2 * h * r * (E_BOT @ W1) - lam * E_BOT
            return np.linalg.det(top + bot)

        return _interp_poly(det, 8)
    raise UnsupportedScheme(scheme)


def _guard(lam, h):
    if abs(lam * lam - 1) < GUARD * h:
        raise ValidityViolation(f"|lambda^2 - 1| = {abs(lam * lam - 1):.3g} < {GUARD} h")


def rho_perturbative(scheme, lam, h):
    """Asymptotic spatial ratios ``[rho_1(+), rho_1(-), rho_2(+), rho_2(-)]``.

    SE is accurate through ``h^2``; ME through ``h``.
    """
    _guard(lam, h)
    d = lam * lam - 1
    if scheme == "se":
        c1 = -2 * h * h / d
        c2 = -h * h * (lam * lam - 3) / d
    elif scheme == "me":
        c1 = c2 = 0.0
    else:
        raise UnsupportedScheme(scheme)
    return np.array([(1 - 1j * h + c1) / lam, (1 + 1j * h + c1) / lam,
                     lam * (1 + 1j * h + c2), lam * (1 - 1j * h + c2)])


def _match_order(ref, roots):
    out = np.empty_like(ref)
    pool = list(roots)
    for i, r in enumerate(ref):
        j = int(np.argmin([abs(p - r) for p in pool]))
        out[i] = pool.pop(j)
    return out


def rho_numeric(scheme, lam, h):
    """All roots of the exact characteristic polynomial in ``rho``."""
    return poly_roots(rho_polynomial(scheme, lam, h))


def physical_rhos(scheme, lam, h):
    """The four roots continuing ``lambda^-1`` and ``lambda``.

    For SE these are all roots. For ME the other four lie in boundary
    layers, far inside or outside the unit circle, and are dropped.
    Ordering follows :func:`rho_perturbative` when the guard holds.
    """
    roots = rho_numeric(scheme, lam, h)
    if scheme == "me":
        roots = roots[np.argsort(np.abs(np.log(np.abs(roots))))[:4]]
    if abs(lam * lam - 1) >= GUARD * h:
        return _match_order(rho_perturbative(scheme, lam, h), roots)
    return roots


def rho_of_lambda(scheme, lam, h, branch="numeric"):
    """Spatial ratios for a given amplification factor.

    ``branch`` is ``"numeric"``, ``"perturbative"`` or ``"both"``.
    """
    if branch == "perturbative":
        if scheme == "lf":
            return lf_rho_perturbative(lam, h)
        return rho_perturbative(scheme, lam, h)
    if branch == "both":
        return rho_of_lambda(scheme, lam, h), rho_of_lambda(scheme, lam, h, "perturbative")
    return rho_numeric(scheme, lam, h)


def null_vector(K):
    """Right singular vector of the smallest singular value."""
    _, s, vh = np.linalg.svd(K)
    v = vh[-1].conj()
    return v / v[np.argmax(np.abs(v))], s[-1] / max(s[0], 1e-300)


def xi_eigenvector(scheme, rho, lam, h, tol=1e-8):
    """Numeric mode shape for ``(rho, lambda)``, largest component set to 1."""
    K = char_matrix(scheme, rho, lam, h)
    v, rel = null_vector(K)
    if rel > tol:
        raise NotAnEigenpair(f"relative smallest singular value {rel:.3g} > {tol}")
    return v


def xi_perturbative(scheme, lam, h):
    """Leading-order mode shapes matching :func:`rho_perturbative` order."""
    _guard(lam, h)
    g = h / (lam * lam - 1)
    if scheme == "me":
        g = g * (lam * lam + 1) / 2
    elif scheme != "se":
        raise UnsupportedScheme(scheme)
    out = []
    for s in (1, -1):
        out.append(np.array([1, s * 1j, g * s * 2j, g]))
    for s in (1, -1):
        out.append(np.array([-g * (-s) * 2j, -g, 1, -s * 1j]))
    return out


def lf_betas(alpha):
    """The four ``beta`` solving ``(a^2 + b^2)^2 - 2a^2 - 6b^2 = 0``."""
    alpha = complex(alpha)
    root = np.sqrt(9 - 4 * alpha * alpha)
    b2 = np.array([3 - alpha * alpha + root, 3 - alpha * alpha - root])
    b = np.sqrt(b2)
    return np.array([b[0], -b[0], b[1], -b[1]])


def lf_rho_perturbative(lam, h):
    """Eight leapfrog ratios ``rho = +-i + h beta`` for ``lambda = i(1 + h alpha)``."""
    alpha = (lam / 1j - 1) / h
    betas = lf_betas(alpha)
    return np.concatenate([1j + h * betas, -1j + h * betas])


def lf_xi(alpha, beta, sign=1):
    """Leapfrog mode shape for ``rho = sign*i + h beta``; last entry is 1."""
    a, b = alpha, beta
    s = sign
    r = (a + s * 1j * b) / (a - s * 1j * b)
    d = a * a + b * b
    return np.array([s * r * (a - s * 3j * b) / d, -r, -s * (a + s * 3j * b) / d, 1.0])


@dataclass
class ModeSolution:
    lam: complex
    rhos: np.ndarray
    xis: list
    phi: np.ndarray
    detphi: complex
    log_abs_det: float
    alpha: complex = None
    betas: np.ndarray = None


def _scaled_det(top, bottom, logs):
    """``det [top; exp(logs) * bottom]`` without overflow.

    Returns ``(det, log|det|, hadamard)`` where ``hadamard`` is the log of
    the product of column norms.
    """
    shift = np.maximum(logs.real, 0.0)
    cols = np.vstack([top * np.exp(-shift), bottom * np.exp(logs - shift)])
    d = np.linalg.det(cols)
    with np.errstate(divide="ignore"):
        logabs = np.log(abs(d)) + shift.sum()
        had = np.sum(np.log(np.linalg.norm(cols, axis=0))) + shift.sum()
    return d * np.exp(shift.sum()) if shift.sum() < 700 else np.inf, logabs, had


def phi_matrix(scheme, lam, M, h):
    """Boundary-matching matrix for nonreflecting BC and its determinant.

    Rows 1-2 hold the right-moving parts of the four mode shapes at node 0;
    rows 3-4 hold ``rho_j^M`` times the left-moving parts at node M.
    """
    _guard(lam, h)
    rhos = physical_rhos(scheme, lam, h)
    xis = [xi_eigenvector(scheme, r, lam, h, tol=1e-6) for r in rhos]
    X = np.array(xis).T
    logs = M * np.log(rhos.astype(complex))
    det, logabs, had = _scaled_det(X[:2], X[2:], logs)
    with np.errstate(over="ignore"):
        phi = np.vstack([X[:2], X[2:] * np.exp(logs)])
    sol = ModeSolution(lam, rhos, xis, phi, det, logabs)
    sol.log_hadamard = had
    return sol


def normalized_detphi(scheme, lam, M, h):
    """``|det Phi|`` divided by the product of its column norms."""
    sol = phi_matrix(scheme, lam, M, h)
    return float(np.exp(sol.log_abs_det - sol.log_hadamard))


def z_roots(L):
    """Roots of ``2 z^2 + (9 cos 2L - 1) z + 8 = 0``."""
    b = 9 * np.cos(2 * L) - 1
    disc = np.sqrt(complex(b * b - 64))
    return np.array([(-b + disc) / 4, (-b - disc) / 4])


def se_lambda_predictions(L, h):
    """Closed-form SE eigenvalue estimates for nonreflecting BC.

    Returns a dict with ``z`` (both roots), ``lambda_set`` (shape
    ``(4, M)``, the O(1/M) phase dropped), ``valid`` (mask of entries
    with ``|lambda^2 - 1| >= 10 h``) and ``magnitude_2M``, the predicted
    ``|lambda|^{2M}`` near ``lambda^2 = -1`` for the larger ``|z|``.
    """
    M = int(round(L / h))
    z = z_roots(L)
    l = np.arange(M)
    gap = np.abs(2 * np.sin(2 * np.pi * l / M))
    valid = gap >= GUARD * h
    lam = []
    for zz in (z[0], z[0], z[1], z[1]):
        mod = (np.exp(1.5 * L * h) * h * np.sqrt(abs(zz)) / np.maximum(gap, 1e-300)) ** (1.0 / M)
        lam.append(mod * np.exp(2j * np.pi * l / M))
    mags = h * h * np.exp(3 * L * h) * np.abs(z) / 4
    return {"z": z, "lambda_set": np.array(lam), "valid": valid,
            "magnitude_2M": float(mags.max()), "magnitudes_2M": mags}


def rho_hat_power(c_R, c_I, eps, h, M):
    """``(1 + i eps h + (c_R + i c_I) h^2)^M`` exactly and asymptotically."""
    base = 1 + 1j * eps * h + (c_R + 1j * c_I) * h * h
    exact = 1.0 + 0j
    n = int(M)
    while n:
        if n & 1:
            exact *= base
        base *= base
        n >>= 1
    L = M * h
    asym = np.exp((c_R + 0.5) * L * h) * np.exp(1j * (eps * L + c_I * L * h))
    return {"exact": exact, "asymptotic": asym}


def lf_phi(alpha, L, sign=1):
    """Reduced leapfrog boundary matrix for real ``alpha``.

    Columns are the four modes ``rho = sign*i + h beta_j``; rows 3-4 carry
    ``exp(-sign*i*beta_j*L)``. The common factor ``(sign*i)^M`` is omitted.
    """
    betas = lf_betas(alpha)
    cols = []
    for b in betas:
        xi = lf_xi(alpha, b, sign)
        ph = np.exp(-sign * 1j * b * L)
        cols.append(np.concatenate([xi[:2], ph * xi[2:]]))
    return np.array(cols).T, betas


def _row_normalized_det(phi):
    return abs(np.linalg.det(phi)) / np.prod(np.linalg.norm(phi, axis=1))


def lf_periodic_alphas(L, h, half_width=5):
    """``(max|lambda| - 1)/h`` at the discrete wavenumbers nearest ``kh = pi/2``."""
    l0 = int(round(L / (4 * h)))
    out = []
    for l in range(l0 - half_width, l0 + half_width + 1):
        kh = 2 * np.pi * l * h / L
        out.append((np.max(np.abs(von_neumann_factors("lf", kh, h))) - 1) / h)
    return np.array(out)


def lf_alpha_scan(L, h, alpha_range=(np.sqrt(2), 1.5), n_points=20001, threshold=1e-3):
    """Scan ``|det Phi_+(alpha)|`` over the real-``beta`` window.

    Returns a dict with the grid ``alphas``, the normalized determinant
    ``detphi``, the refined local minima below ``threshold``
    (``roots_nonreflecting``) and the periodic reference values.
    """
    lo, hi = float(alpha_range[0]), float(alpha_range[1])
    if lo < np.sqrt(2) - 1e-12 or hi > 1.5 + 1e-12 or lo >= hi:
        raise RangeError(f"alpha range [{lo}, {hi}] outside [sqrt 2, 3/2]")
    lo = max(lo, np.sqrt(2))
    hi = min(hi, 1.5)
    alphas = np.linspace(lo, hi, n_points)

    def f(a):
        phi, _ = lf_phi(a, L)
        return _row_normalized_det(phi)

    vals = np.array([f(a) for a in alphas])
    roots = []
    # the window ends carry a double beta, where Phi is trivially singular
    for i in range(1, len(vals) - 1):
        if vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1]:
            res = scipy.optimize.minimize_scalar(f, bounds=(alphas[i - 1], alphas[i + 1]),
                                                 method="bounded", options={"xatol": 1e-12})
            a_best, v_best = (res.x, res.fun) if res.fun < vals[i] else (alphas[i], vals[i])
            if v_best < threshold:
                roots.append(float(a_best))
    return {"alphas": alphas, "detphi": vals, "roots_nonreflecting": np.array(roots),
            "alphas_periodic": lf_periodic_alphas(L, h)}
