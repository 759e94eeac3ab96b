"""Boost covariance, d = 1 periodicity and twisted boundary conditions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..model import Potential
from .fock import FockSpace, diagonalize, restrict


@dataclass
class BoostComparison:
    sector: int
    boosted_sector: int
    compared: int
    mismatch: float


@dataclass
class BoostReport:
    K: int
    n: int
    rows: list

    @property
    def max_mismatch(self) -> float:
        return max((r.mismatch for r in self.rows if r.compared), default=0.0)

    @property
    def compared(self) -> int:
        return sum(r.compared for r in self.rows)


def _sector_spectrum(space: FockSpace, H, P: int, n: int):
    sec = space.sector((P,), particles=n)
    if sec.dimension == 0:
        return sec, np.array([])
    vals = diagonalize(restrict(H, sec.indices, sec.indices)).values
    L = space.L
    return sec, vals - (2 * math.pi * P / L) ** 2 / (2 * n)


def boost_and_periodicity(potential: Potential | None, K: int, n: int, L: float = 2 * math.pi,
                          mu: float = 0.0, sectors=None) -> BoostReport:
    """Compare sp(H - P²/2n) in sector P with sector P + n (one boost unit).

    Only eigenvalues below the lowest kinetic energy of any basis state that
    touches the edge modes ±K are compared, in equal numbers; on a free gas
    these levels are exact images of each other under the boost. The
    interacting mismatch measures truncation and shrinks as K grows.
    """
    modes = np.arange(-K, K + 1)[:, None]
    space = FockSpace(modes, n, L)
    H = space.hamiltonian(potential, mu)
    kin = 0.5 * np.sum(space.momenta ** 2, axis=1)
    if sectors is None:
        sectors = range(-n * K, n * K + 1)
    rows = []
    for P in sectors:
        Q = P + n
        sa, va = _sector_spectrum(space, H, P, n)
        sb, vb = _sector_spectrum(space, H, Q, n)
        if va.size == 0 or vb.size == 0:
            rows.append(BoostComparison(P, Q, 0, 0.0))
            continue
        cut = math.inf
        for sec, Ptot in ((sa, P), (sb, Q)):
            edge = (sec.basis[:, 0] > 0) | (sec.basis[:, -1] > 0)
            if np.any(edge):
                e = sec.basis[edge] @ kin - mu * n - (2 * math.pi * Ptot / L) ** 2 / (2 * n)
                cut = min(cut, float(np.min(e)))
        m = min(int(np.sum(va < cut - 1e-12)), int(np.sum(vb < cut - 1e-12)))
        mis = float(np.max(np.abs(va[:m] - vb[:m]))) if m else 0.0
        rows.append(BoostComparison(P, Q, m, mis))
    return BoostReport(K, n, rows)


@dataclass
class TwistRow:
    sector: int
    twisted_minimum: float
    slack: float


@dataclass
class TwistReport:
    twist: float
    n: int
    ground_energy: float
    rows: list

    @property
    def min_slack(self) -> float:
        return min(r.slack for r in self.rows)


def twisted_boundary(potential: Potential | None, modes, n: int, L: float, twist: float,
                     mu: float = 0.0) -> TwistReport:
    """Slack of H_[α] - E >= α² n/(2L²) in every sector at fixed particle number.

    E is the untwisted n-particle ground energy on the same mode set; the
    twisted Hamiltonian uses momenta (2πm + α)/L in the first coordinate.
    """
    if not 0 <= twist <= math.pi:
        raise ValueError("twist must lie in [0, π]")
    modes = np.asarray(modes, int)
    modes = modes[:, None] if modes.ndim == 1 else modes
    plain = FockSpace(modes, n, L)
    Hp = plain.hamiltonian(potential, mu)
    E = min(diagonalize(restrict(Hp, s.indices, s.indices)).values[0]
            for s in (plain.sector(lab, particles=n) for lab in plain.sector_labels()) if s.dimension)
    twisted = FockSpace(modes, n, L, twist)
    Ht = twisted.hamiltonian(potential, mu)
    bound = twist ** 2 * n / (2 * L * L)
    rows = []
    for lab in twisted.sector_labels():
        sec = twisted.sector(lab, particles=n)
        if sec.dimension == 0:
            continue
        low = float(diagonalize(restrict(Ht, sec.indices, sec.indices)).values[0])
        rows.append(TwistRow(int(lab[0]), low, low - E - bound))
    return TwistReport(twist, n, float(E), rows)
