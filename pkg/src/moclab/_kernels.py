"""Compiled inner loops for long runs.

Arrays are laid out with the node index last so the sweeps vectorize.
"""

import numba
import numpy as np


@numba.njit(cache=True, fastmath={"contract"})
def linear_run(e, G, W, nsteps, periodic):
    """Advance ``e`` (shape ``(4, M+1)``) by ``nsteps`` steps of ``s_m <- G s_{m-1} + W s_{m+1}``.

    Nonreflecting runs zero-pad beyond the ends and pin ``s+`` at node 0 and
    ``s-`` at node M. Periodic runs identify node M with node 0.
    """
    M = e.shape[1] - 1
    e = e.copy()
    new = np.empty_like(e)
    g00, g01, g02, g03 = G[0, 0], G[0, 1], G[0, 2], G[0, 3]
    g10, g11, g12, g13 = G[1, 0], G[1, 1], G[1, 2], G[1, 3]
    g20, g21, g22, g23 = G[2, 0], G[2, 1], G[2, 2], G[2, 3]
    g30, g31, g32, g33 = G[3, 0], G[3, 1], G[3, 2], G[3, 3]
    w00, w01, w02, w03 = W[0, 0], W[0, 1], W[0, 2], W[0, 3]
    w10, w11, w12, w13 = W[1, 0], W[1, 1], W[1, 2], W[1, 3]
    w20, w21, w22, w23 = W[2, 0], W[2, 1], W[2, 2], W[2, 3]
    w30, w31, w32, w33 = W[3, 0], W[3, 1], W[3, 2], W[3, 3]
    for _ in range(nsteps):
        a0, a1, a2, a3 = e[0], e[1], e[2], e[3]
        b0, b1, b2, b3 = new[0], new[1], new[2], new[3]
        # one sweep producing all four components keeps memory traffic low
        for m in range(1, M):
            l0, l1, l2, l3 = a0[m - 1], a1[m - 1], a2[m - 1], a3[m - 1]
            r0, r1, r2, r3 = a0[m + 1], a1[m + 1], a2[m + 1], a3[m + 1]
            b0[m] = g00 * l0 + g01 * l1 + g02 * l2 + g03 * l3 + w00 * r0 + w01 * r1 + w02 * r2 + w03 * r3
            b1[m] = g10 * l0 + g11 * l1 + g12 * l2 + g13 * l3 + w10 * r0 + w11 * r1 + w12 * r2 + w13 * r3
            b2[m] = g20 * l0 + g21 * l1 + g22 * l2 + g23 * l3 + w20 * r0 + w21 * r1 + w22 * r2 + w23 * r3
            b3[m] = g30 * l0 + g31 * l1 + g32 * l2 + g33 * l3 + w30 * r0 + w31 * r1 + w32 * r2 + w33 * r3
        for i in range(4):
            right = W[i, 0] * a0[1] + W[i, 1] * a1[1] + W[i, 2] * a2[1] + W[i, 3] * a3[1]
            left = G[i, 0] * a0[M - 1] + G[i, 1] * a1[M - 1] + G[i, 2] * a2[M - 1] + G[i, 3] * a3[M - 1]
            if periodic:
                new[i, 0] = left + right
                new[i, M] = left + right
            else:
                new[i, 0] = right
                new[i, M] = left
        if not periodic:
            new[0, 0] = 0.0
            new[1, 0] = 0.0
            new[2, M] = 0.0
            new[3, M] = 0.0
        e, new = new, e
    return e


@numba.njit(inline="always")
def _gn_fp(u, v):
    return 1j * ((v.real * v.real + v.imag * v.imag) * u + v * v * np.conj(u)) - 1j * v


@numba.njit(inline="always")
def _gn_fm(u, v):
    return 1j * ((u.real * u.real + u.imag * u.imag) * v + u * u * np.conj(v)) - 1j * u


@numba.njit(cache=True)
def gn_me_run(u, v, h, nsteps, periodic, u_left, v_right):
    """Modified-Euler steps for the Gross-Neveu model."""
    M = u.shape[0] - 1
    u = u.copy()
    v = v.copy()
    fp = np.empty_like(u)
    fm = np.empty_like(v)
    ub = np.empty_like(u)
    vb = np.empty_like(v)
    un = np.empty_like(u)
    vn = np.empty_like(v)
    hh = 0.5 * h
    for _ in range(nsteps):
        for m in range(M + 1):
            fp[m] = _gn_fp(u[m], v[m])
            fm[m] = _gn_fm(u[m], v[m])
        for m in range(1, M + 1):
            ub[m] = u[m - 1] + h * fp[m - 1]
        for m in range(M):
            vb[m] = v[m + 1] + h * fm[m + 1]
        if periodic:
            ub[0] = u[M - 1] + h * fp[M - 1]
            vb[M] = v[1] + h * fm[1]
        else:
            ub[0] = u_left
            vb[M] = v_right
        for m in range(1, M + 1):
            un[m] = u[m - 1] + hh * (fp[m - 1] + _gn_fp(ub[m], vb[m]))
        for m in range(M):
            vn[m] = v[m + 1] + hh * (fm[m + 1] + _gn_fm(ub[m], vb[m]))
        if periodic:
            un[0] = u[M - 1] + hh * (fp[M - 1] + _gn_fp(ub[0], vb[0]))
            vn[M] = v[1] + hh * (fm[1] + _gn_fm(ub[M], vb[M]))
        else:
            un[0] = u_left
            vn[M] = v_right
        u, un = un, u
        v, vn = vn, v
    return u, v
