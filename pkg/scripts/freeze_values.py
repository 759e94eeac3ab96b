"""Regenerate tests/frozen_values.json from exact diagonalization and the finite-box solver.

Run after any deliberate change to the numerics, then review the diff.
"""

import json
import math
from pathlib import Path

import numpy as np

from bosegas import hfb
from bosegas.model import BoxGeometry
from bosegas.oracle import FockSpace, Reference, f_sum_check, ground_and_ies, structure_and_susceptibility
from bosegas.oracle.suites import PRESETS

OUT = Path(__file__).resolve().parents[1] / "tests" / "frozen_values.json"


def oracle_values(name):
    p = PRESETS[name]
    space = FockSpace(p.modes(), p.n_max, p.L)
    gs = ground_and_ies(space, space.hamiltonian(p.potential, p.mu))
    ref = Reference.from_ground(gs)
    q = [1] + [0] * (p.d - 1)
    sf = structure_and_susceptibility(ref, q)
    return {
        "E": gs.energy,
        "excitations": {",".join(map(str, k)): v for k, v in sorted(gs.sector_minima.items())},
        "particle_number": ref.particle_number,
        "structure_factor_q1": sf.s,
        "susceptibility_q1": sf.chi,
        "double_commutator_q1": f_sum_check(ref, q).identity_rhs,
    }


def box_values(name):
    p = PRESETS[name]
    sol = hfb.solve_finite_box(p.potential, BoxGeometry(p.d, p.L, p.K, False), mu=p.mu)
    return {"B": sol.B, "rho": sol.rho, "alpha_abs": abs(sol.state.alpha),
            "D": np.asarray(sol.D, float).tolist()}


def main():
    names = ["tiny-d1", "three-mode-d1", "small-d1"]
    data = {"oracle": {n: oracle_values(n) for n in names},
            "box": {n: box_values(n) for n in names},
            "lower_bound": {n: hfb.lower_bound_energy(PRESETS[n].potential, PRESETS[n].L, mu=PRESETS[n].mu,
                                                      box=BoxGeometry(1, PRESETS[n].L, PRESETS[n].K, False))
                            for n in names}}
    OUT.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
