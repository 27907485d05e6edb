#!/usr/bin/env python3
"""Grid-refinement study of the discrete spectral gap.

The quadratic potential (s=2) has gap -2 in the strongly weighted space;
the constant surrogate has the zero-flux Laplacian gap -(pi/2L)^2. Both
converge at second order, confirmed by Richardson extrapolation.
"""

import numpy as np

from semidecay.fokker_planck import (EnlargedWeight, FPDiscretization, FPGrid,
                                     Potential, UniformPotential,
                                     spectral_gap_H)


def study(potential, exact, label, sizes=(250, 500, 1000, 2000), length=8.0):
    print(f"\n{label} (exact {exact:.8f})")
    print(f"{'N':>6} {'gap':>14} {'error':>10} {'order':>6}")
    gaps = []
    for n in sizes:
        disc = FPDiscretization.build(FPGrid(d=1, L=length, N=n), potential,
                                      EnlargedWeight("polynomial", 3.0))
        gaps.append(spectral_gap_H(disc).lambda_gap)
        err = abs(gaps[-1] - exact)
        order = ""
        if len(gaps) > 1:
            prev_err = abs(gaps[-2] - exact)
            order = f"{np.log2(prev_err / err):.2f}"
        print(f"{n:>6} {gaps[-1]:>14.8f} {err:>10.2e} {order:>6}")
    rich = gaps[-1] + (gaps[-1] - gaps[-2]) / 3.0   # h^2 Richardson
    print(f"Richardson extrapolation: {rich:.8f} (error {abs(rich - exact):.2e})")


def main():
    study(Potential(2.0), -2.0, "quadratic potential")
    study(UniformPotential(), -(np.pi / 16.0) ** 2, "constant surrogate")


if __name__ == "__main__":
    main()
