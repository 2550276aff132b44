"""Simple-Euler instability under nonreflecting boundaries.

Von Neumann analysis predicts growth across the whole spectrum, fastest at
the ends (kh = 0 and pi) where max|lambda| - 1 = 3 h^2. With nonreflecting
boundaries the middle of the spectrum decays instead, at a rate the
boundary-matching analysis predicts in closed form. This script prints both.

Run: python3 demos/se_instability.py
"""

import numpy as np

from moclab import spectral as sp
from moclab import stability as st
from moclab.model import LinearCoupledWave, NoiseSpec, make_grid
from moclab.schemes import run


def main():
    h = 0.02
    for kh in (0.0, np.pi / 4, np.pi / 2):
        g = np.abs(st.von_neumann_factors("se", kh, h)).max()
        print(f"von Neumann  kh = {kh:.3f}: (max|lambda| - 1)/h^2 = {(g - 1) / h**2:+.4f}")

    L = 50.0
    grid = make_grid(L, h)
    series = run(LinearCoupledWave(), "se", "nonreflecting", grid, NoiseSpec(1.0, 1),
                 t_final=4 * L, sample_every=L)
    spec = sp.spectrum_series(series, grid, windowed=True)
    mid = sp.mid_norms(spec, 20, np.pi / 2)
    end = sp.mid_norms(spec, 20, 2 * np.pi / 40)
    print("\n   t    mid-spectrum norm   norm near kh = 0.16")
    for t, m, e in zip(series.times, mid, end):
        print(f"{t:5.0f}   {m:16.6e}   {e:19.4e}")

    lam = sp.staircase_lambda(series.times[1:], mid[1:], L, h)
    pred = st.se_lambda_predictions(L, h)["magnitude_2M"]
    print(f"\nmeasured |lambda|^2M = {lam ** (2 * grid.M):.4e}")
    print(f"closed form          = {pred:.4e}")


if __name__ == "__main__":
    main()
