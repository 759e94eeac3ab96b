"""Ground-state operator inequalities and the symmetry-breaking field study."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..model import Potential
from .fock import FockSpace
from .response import Reference, adjoint, anticommutator, commutator

INEQUALITY_NAMES = (
    "anticommutator_schwarz",
    "uncertainty_pair",
    "resolvent_schwarz",
    "commutator_resolvent",
    "feynman_bound",
    "resolvent_gap_bound",
    "wagner_bound",
    "third_moment_bound",
)


@dataclass
class ToolkitReport:
    slacks: dict
    gap: float
    dropped: int
    approximate: bool
    toz_residual: float

    @property
    def min_slack(self) -> float:
        return min(self.slacks.values())


def _support_gap(ref: Reference, vectors, tol: float = 1e-10) -> float:
    """Lowest excitation energy among eigenvectors overlapping any given vector.

    The H-invariant subspace generated by a set of vectors is the span of
    their spectral components, so its spectral infimum is read off from
    the eigen-decomposition.
    """
    weight = np.zeros(len(ref.values))
    for v in vectors:
        weight += np.abs(ref.vectors.conj().T @ v) ** 2
    total = weight.sum()
    if total == 0:
        return math.inf
    sel = weight > tol * total
    return float(np.min(ref.values[sel]) - ref.E)


def _cap_leak(space: FockSpace, op, psi) -> int:
    """Components of Ψ at the particle cap when ``op`` raises particle number.

    Such components are where the capped matrix differs from the true
    operator, so a nonzero count marks a check as approximate.
    """
    coo = sp.coo_matrix(op)
    N = space.particle_numbers
    if not np.any(N[coo.row] > N[coo.col]):
        return 0
    return int(np.count_nonzero(np.abs(psi[N == space.n_max]) > 1e-12))


def inequality_toolkit(ref: Reference, A, B) -> ToolkitReport:
    """Signed slacks (right side minus left side) of eight ground-state inequalities.

    A and B are centered first. For the four gap bounds, ε is the spectral
    infimum of H on the invariant subspace generated by AΨ and A*Ψ, minus E.
    The matrix identities hold exactly in the capped space because adjoints
    are matrix adjoints; ``approximate`` marks systems whose ground state
    reaches the particle cap.
    """
    A = ref.centered(A)
    B = ref.centered(B)
    Ad, Bd = adjoint(A), adjoint(B)
    H = ref.H
    ev = ref.expect

    s = {}
    lhs = abs(ev(anticommutator(Ad, B))) ** 2
    s["anticommutator_schwarz"] = (ev(anticommutator(Ad, A)) * ev(anticommutator(Bd, B))).real - lhs
    lhs = abs(ev(commutator(Ad, B))) ** 2
    s["uncertainty_pair"] = (ev(anticommutator(A, Ad)) * ev(anticommutator(B, Bd))).real - lhs

    pAA = ref.static_pair(Ad, A).real
    pBB = ref.static_pair(Bd, B).real
    pAB = ref.static_pair(Ad, B)
    s["resolvent_schwarz"] = pAA * pBB - abs(pAB) ** 2
    dcA = ev(commutator(Ad, commutator(H, A))).real
    dcB = ev(commutator(Bd, commutator(H, B))).real
    cAB = ev(commutator(Ad, B))
    toz = ref.static_pair(Ad, commutator(H, B))
    s["commutator_resolvent"] = pAA * dcB - abs(cAB) ** 2

    eps = _support_gap(ref, [A @ ref.psi, Ad @ ref.psi])
    anti = ev(anticommutator(Ad, A)).real
    s["feynman_bound"] = dcA / anti - eps if anti > 0 else math.inf
    s["resolvent_gap_bound"] = dcA / pAA - eps ** 2 if pAA > 0 else math.inf
    s["wagner_bound"] = dcA * dcB / abs(cAB) ** 2 - eps ** 2 if abs(cAB) > 1e-14 else math.inf
    third = ev(commutator(commutator(Ad, H), commutator(H, commutator(H, A)))).real
    s["third_moment_bound"] = third / dcA - eps ** 2 if dcA > 1e-14 else math.inf

    leak = _cap_leak(ref.space, A, ref.psi) + _cap_leak(ref.space, B, ref.psi)
    return ToolkitReport({k: float(v) for k, v in s.items()}, eps, leak, leak > 0, abs(toz - cAB))


def random_operator(space: FockSpace, rng: np.random.Generator, hermitian: bool = False, terms: int = 4):
    """Random combination of one- and two-body monomials on the mode set."""
    M = len(space.modes)
    pieces = []
    for _ in range(terms):
        kind = rng.integers(4)
        c = complex(rng.normal(), rng.normal())
        i, j = rng.integers(M, size=2)
        if kind == 0:
            pieces.append((c, (), (int(i),)))
        elif kind == 1:
            pieces.append((c, (int(i),), ()))
        elif kind == 2:
            pieces.append((c, (int(i),), (int(j),)))
        else:
            pieces.append((c, (), (int(i), int(j))))
    op = space.monomial_matrix(pieces)
    return (op + adjoint(op)).tocsr() if hermitian else op


# -- symmetry-breaking field --------------------------------------------------


@dataclass
class FieldRow:
    nu: float
    a0: complex
    occupation: float
    anomalous: complex
    reality_defect: float
    translation_defect: float
    particle_number: float
    slack_structure: float
    slack_susceptibility: float
    slack_bogoliubov: float
    printed_susceptibility: float
    printed_bogoliubov: float
    printed_green: float
    slack_green: float
    degenerate: bool
    k_eff: float
    double_commutator_Q: float


@dataclass
class FieldStudy:
    k: tuple
    rows: list = field(default_factory=list)

    @property
    def min_slack(self) -> float:
        return min(min(r.slack_structure, r.slack_susceptibility, r.slack_bogoliubov, r.slack_green)
                   for r in self.rows)


def symmetry_breaking_run(potential: Potential, modes, n_max: int, L: float, mu: float,
                          nu_schedule, k) -> FieldStudy:
    """Ground state of H - μN - ν√V(a0* + a0) on the capped all-N space.

    For each ν the correlators ⟨a0⟩, ⟨a_k*a_k⟩, ⟨a_k a_{-k}⟩ are reported
    together with finite-size slacks of three lower bounds on ⟨a_k*a_k⟩ and
    on the static pair ⟨⟨a_k, a_k*⟩⟩:

    structure:      (⟨a*a⟩ + 1/2) ⟨N_k*N_k + N_k N_k*⟩/2 - |⟨a0⟩|²/4
    susceptibility: ⟨a*a⟩ + 1/2 - |⟨a0⟩|² / (2 n k_eff sqrt(χ)), where
                    k_eff² n/2 is the symmetrized ⟨N*(H-E)N⟩
    bogoliubov:     G11 - |m|²/W - |G12 + m²/W|, with W = ⟨[Q,[H,Q]]⟩,
                    Q = N_k + N_k*, m = ⟨a0⟩ + ⟨a_2k⟩
    green:          G11 - G12 - 2|m|²/W

    The ``printed_*`` values use |k| in place of k_eff and n|k|² in place
    of W; they are reported but not asserted.
    """
    space = FockSpace(np.asarray(modes), n_max, L)
    kk = np.atleast_1d(np.asarray(k, int))
    ik, imk, i0 = space.find_mode(kk), space.find_mode(-kk), space.find_mode(np.zeros_like(kk))
    if ik is None or imk is None or i0 is None:
        raise ValueError("mode set must contain 0, k and -k")
    i2k = space.find_mode(2 * kk)
    kvec = 2 * math.pi * kk / L
    k2 = float(kvec @ kvec)
    ak, amk, a0 = space.annihilator(ik), space.annihilator(imk), space.annihilator(i0)
    Nk, _ = space.density(kk)
    Q = (Nk + adjoint(Nk)).tocsr()
    study = FieldStudy(tuple(kk))
    for nu in nu_schedule:
        if nu < 0:
            raise ValueError("ν must be non-negative")
        H = space.hamiltonian(potential, mu, nu)
        ref = Reference.global_ground(space, H)
        ev = ref.expect
        n = ref.particle_number
        m0 = ev(a0)
        occ = ev(adjoint(ak) @ ak).real
        anom = ev(ak @ amk)
        reality = max(abs(m0.imag), abs(anom.imag))
        trans = 0.0
        for i in range(len(space.modes)):
            for j in range(len(space.modes)):
                if i != j:
                    trans = max(trans, abs(ev(adjoint(space.annihilator(i)) @ space.annihilator(j))))
        X = ev(adjoint(Nk) @ Nk).real
        Y = ev(Nk @ adjoint(Nk)).real
        s_structure = (occ + 0.5) * (X + Y) / 2 - abs(m0) ** 2 / 4
        shift = H - ref.E * sp.identity(H.shape[0], format="csr")
        FS = 0.5 * (ev(adjoint(Nk) @ shift @ Nk).real + ev(Nk @ shift @ adjoint(Nk)).real)
        k_eff = math.sqrt(2 * FS / n)
        chi = ref.static_pair(ref.centered(adjoint(Nk)), ref.centered(Nk)).real / n
        bound_sus = abs(m0) ** 2 / (2 * n * k_eff * math.sqrt(chi)) if chi > 0 else math.inf
        printed_sus = abs(m0) ** 2 / (2 * n * math.sqrt(k2 * chi)) if chi > 0 else math.inf
        W = ev(commutator(Q, commutator(H, Q))).real
        m = m0 + (ev(space.annihilator(i2k)) if i2k is not None else 0.0)
        akc = ref.centered(ak)
        amkc = ref.centered(amk)
        G11 = ref.static_pair(akc, adjoint(akc)).real
        G12 = ref.static_pair(akc, amkc)
        slack_bog = G11 - abs(m) ** 2 / W - abs(G12 + m ** 2 / W)
        pk = abs(m0) ** 2 / (n * k2)
        printed_bog = G11 - pk - abs(G12 + m0 ** 2 / (n * k2))
        study.rows.append(FieldRow(
            nu, m0, occ, anom, reality, trans, n, s_structure, occ + 0.5 - bound_sus, slack_bog,
            occ + 0.5 - printed_sus, printed_bog, (G11 - G12).real - 2 * pk,
            (G11 - G12).real - 2 * abs(m) ** 2 / W, ref.degenerate, k_eff, W))
    return study
