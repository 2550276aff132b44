"""Leapfrog growth rates from the boundary determinant and from simulation.

Writing lambda = i(1 + h alpha), nonreflecting modes exist where the reduced
boundary matrix is singular. The scan locates those alpha, compares the
largest with the periodic growth rate, and checks both against a direct
simulation.

Run: python3 demos/leapfrog_scan.py
"""

import numpy as np

from moclab import stability as st
from moclab.model import LinearCoupledWave, NoiseSpec, make_grid
from moclab.schemes import run


def main():
    L, h = 50.0, 0.01
    scan = st.lf_alpha_scan(L, h, n_points=8001)
    roots = scan["roots_nonreflecting"]
    per = scan["alphas_periodic"]
    print(f"{len(roots)} scan roots in [sqrt 2, 3/2]; largest {roots.max():.5f}")
    print(f"largest periodic alpha {per.max():.5f}  (gap {abs(roots.max() / per.max() - 1):.2%})")

    grid = make_grid(L, h)
    for bc in ("periodic", "nonreflecting"):
        s = run(LinearCoupledWave(), "lf", bc, grid, NoiseSpec(1e-10, 2), t_final=20.0,
                sample_every=0.5)
        sel = s.times >= 5.0
        r = np.polyfit(s.times[sel], np.log(s.norms[sel]), 1)[0]
        print(f"simulated alpha, {bc:13s}: {(np.exp(r * h) - 1) / h:.4f}")


if __name__ == "__main__":
    main()
