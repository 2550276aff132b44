"""Dense amplification-matrix spectrum against the boundary determinant.

Every eigenvalue of the nonreflecting simple-Euler matrix away from
lambda^2 = 1 is a zero of det Phi, and the largest modulus near
lambda^2 = -1 follows the closed-form estimate.

Run: python3 demos/eigen_spectrum.py
"""

import numpy as np

from moclab import stability as st


def main():
    M, h = 64, 0.05
    ev = st.eig_dense(st.assemble_amplification_matrix("se", M, h).matrix)
    sel = [lam for lam in ev if abs(lam) > 1e-8 and abs(lam * lam - 1) > 0.5]
    on = max(st.normalized_detphi("se", lam, M, h) for lam in sel)
    off = st.normalized_detphi("se", 0.999 * np.exp(0.9j), M, h)
    print(f"M = {M}, h = {h}: {len(ev)} eigenvalues, {np.sum(np.abs(ev) < 1e-12)} pinned zeros")
    print(f"normalized |det Phi| on {len(sel)} eigenvalues: max {on:.2e}")
    print(f"normalized |det Phi| off the spectrum:        {off:.2e}")

    L, h = 16.0, 0.25
    M = int(L / h)
    ev = st.eig_dense(st.assemble_amplification_matrix("se", M, h).matrix)
    mid = ev[np.abs(np.angle(ev**2) - np.pi) < 0.5]
    pred = st.se_lambda_predictions(L, h)["magnitude_2M"] ** (1 / (2 * M))
    print(f"\nL = {L}, h = {h}: max |lambda| near lambda^2 = -1 is {np.abs(mid).max():.5f}, "
          f"closed form {pred:.5f}")


if __name__ == "__main__":
    main()
