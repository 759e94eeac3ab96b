"""Inner-cutoff study of the d = 1 depletion and second-sweep gap integral."""

import argparse
import math

from bosegas import hfb
from bosegas.model import Potential


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mu", type=float, default=0.5)
    ap.add_argument("--lambda", dest="coupling", type=float, default=1.0)
    ap.add_argument("--decades", type=int, default=4)
    args = ap.parse_args()
    etas = [10.0 ** -(j + 2) for j in range(args.decades)]
    rep = hfb.d1_divergence(Potential("gaussian", 1.0, 1.0, args.coupling, 1), args.mu, etas)
    unit = 2 * math.log(10)
    print("decade,depletion_growth,expected,gap_growth,expected")
    for j, (dg, gg) in enumerate(zip(rep.depletion_growth, rep.gap_growth)):
        print(f"{j},{dg:.10g},{unit * rep.depletion_prefactor:.10g},{gg:.10g},{unit * rep.gap_prefactor:.10g}")
    print(f"# worst relative error {rep.worst_relative_error:.3e}")


if __name__ == "__main__":
    main()
