"""Distance between the converged squeezed-state dispersion and the Bogoliubov one as λ shrinks.

Evidence only: a decreasing sequence at a few couplings says nothing about the limit.
"""

import argparse

from bosegas import hfb
from bosegas.model import Potential
from bosegas.numerics import RadialQuadrature


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mu", type=float, default=0.5)
    ap.add_argument("--d", type=int, default=3)
    ap.add_argument("--k-max", type=float, default=10.0)
    ap.add_argument("--lambdas", type=float, nargs="+", default=[1.0, 0.5, 0.25, 0.125])
    args = ap.parse_args()
    quad = RadialQuadrature(args.d, k_max=args.k_max)
    print("lambda,max_abs_D_minus_omega_bg")
    for lam in args.lambdas:
        dev = hfb.bogoliubov_deviation(Potential("gaussian", 1.0, 1.0, lam, args.d), args.d, args.mu, quad)
        print(f"{lam},{dev:.12g}")


if __name__ == "__main__":
    main()
