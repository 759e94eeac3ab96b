"""Speed of sound from the squeezed-state energy density against the Bogoliubov phonon speed."""

import argparse
import math

import numpy as np

from bosegas import hfb
from bosegas.model import Potential
from bosegas.numerics import RadialQuadrature


def sound_gap(coupling, rho0, step, d, k_max):
    pot = Potential("gaussian", 1.0, 1.0, coupling, d)
    quad = RadialQuadrature(d, k_max=k_max)
    rho = rho0 * (1 + step * np.arange(-2, 3))
    fits = [hfb.hfb_energy_density(pot, d, r, quad) for r in rho]
    c = hfb.speed_of_sound(rho, [e for e, _ in fits])
    mu = fits[2][1].mu
    return c, math.sqrt(mu)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rho", type=float, default=0.5)
    ap.add_argument("--step", type=float, default=0.02)
    ap.add_argument("--d", type=int, default=3)
    ap.add_argument("--k-max", type=float, default=10.0)
    ap.add_argument("--lambdas", type=float, nargs="+", default=[1.0, 0.5, 0.25])
    args = ap.parse_args()
    print("lambda,c_s,c_s_error,sqrt_mu,relative_gap")
    for lam in args.lambdas:
        c, c_ph = sound_gap(lam, args.rho, args.step, args.d, args.k_max)
        print(f"{lam},{c.value.real:.12g},{c.error:.3g},{c_ph:.12g},{abs(c.value.real / c_ph - 1):.6g}")


if __name__ == "__main__":
    main()
