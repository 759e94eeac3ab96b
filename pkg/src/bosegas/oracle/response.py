"""Ground-state response: double commutators, resolvent forms, form factors.

Everything here works with dense eigendecompositions of capped Fock-space
matrices. Static resolvent forms are computed twice, by a spectral sum and
by conjugate gradients on the deflated operator, so each can audit the
other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fock import FockSpace, GroundState, diagonalize

POLE_TOLERANCE = 1e-8


class PoleProximityError(ValueError):
    pass


def _dense(op):
    return op.toarray() if sp.issparse(op) else np.asarray(op)


@dataclass
class Reference:
    """A state Ψ with H Ψ = E Ψ together with the full spectrum of H."""

    space: FockSpace
    H: sp.csr_matrix
    E: float
    psi: np.ndarray
    values: np.ndarray
    vectors: np.ndarray
    degenerate: bool = False

    @classmethod
    def from_ground(cls, gs: GroundState) -> "Reference":
        spec = diagonalize(gs.H)
        return cls(gs.space, gs.H, gs.energy, gs.vector, spec.values, spec.vectors, gs.degenerate)

    @classmethod
    def global_ground(cls, space: FockSpace, H) -> "Reference":
        """Ψ = lowest eigenvector of the whole capped space."""
        spec = diagonalize(H)
        scale = max(1.0, abs(spec.values[0]))
        degenerate = len(spec.values) > 1 and spec.values[1] - spec.values[0] < 1e-9 * scale
        psi = spec.vectors[:, 0].astype(complex)
        return cls(space, H, float(spec.values[0]), psi, spec.values, spec.vectors, degenerate)

    @property
    def particle_number(self) -> float:
        return self.expect(self.space.number()).real

    def expect(self, op) -> complex:
        return complex(np.vdot(self.psi, op @ self.psi))

    def centered(self, op):
        """op - ⟨op⟩·1."""
        return op - self.expect(op) * sp.identity(op.shape[0], dtype=complex, format="csr")

    def amplitudes(self, op) -> np.ndarray:
        """⟨j|op|Ψ⟩ for every eigenvector j."""
        return self.vectors.conj().T @ (op @ self.psi)

    def excitation_energies(self) -> np.ndarray:
        return self.values - self.E

    def resolvent(self, left, right, z: complex = 0.0) -> complex:
        """⟨left (H - E - z)^{-1} right⟩ over eigen-components away from E + z.

        Components with |E_j - E - z| < tol must carry no weight, otherwise
        a PoleProximityError is raised.
        """
        r = self.amplitudes(right)
        l = self.vectors.conj().T @ (_dense(left).conj().T @ self.psi)
        weights = np.conj(l) * r
        denom = self.excitation_energies() - z
        near = np.abs(denom) < POLE_TOLERANCE
        skip = near & (np.abs(weights) > 1e-12)
        if np.any(skip):
            raise PoleProximityError(f"z = {z} lies within {POLE_TOLERANCE} of an excitation energy")
        keep = ~near
        return complex(np.sum(weights[keep] / denom[keep]))

    def static_pair(self, a, b) -> complex:
        """⟨⟨a, b⟩⟩ = ⟨a (H-E)^{-1} b⟩ + ⟨b (H-E)^{-1} a⟩ for centered a, b."""
        return self.resolvent(a, b) + self.resolvent(b, a)

    def static_pair_cg(self, a, b, tol: float = 1e-13) -> tuple[complex, float]:
        """Same form from conjugate-gradient solves on H - E + |Ψ⟩⟨Ψ|.

        Valid when Ψ is the lowest state in the block reached by a and b.
        Returns the value and the largest relative residual of the solves.
        """
        n = self.H.shape[0]
        psi = self.psi

        def matvec(x):
            return self.H @ x - self.E * x + psi * np.vdot(psi, x)

        op = spla.LinearOperator((n, n), matvec=matvec, dtype=complex)
        total, worst = 0.0 + 0j, 0.0
        for left, right in ((a, b), (b, a)):
            rhs = right @ psi
            rhs = rhs - psi * np.vdot(psi, rhs)
            if np.linalg.norm(rhs) == 0:
                continue
            x, info = spla.cg(op, rhs, rtol=tol, atol=0.0, maxiter=10 * n)
            res = np.linalg.norm(matvec(x) - rhs) / np.linalg.norm(rhs)
            worst = max(worst, float(res))
            total += np.vdot(_dense(left).conj().T @ psi, x)
        return complex(total), worst


def commutator(x, y):
    return x @ y - y @ x


def anticommutator(x, y):
    return x @ y + y @ x


def adjoint(x):
    return x.conj().T.tocsr() if sp.issparse(x) else np.conj(np.asarray(x)).T


# -- f-sum rule -----------------------------------------------------------


@dataclass
class FsumReport:
    identity_lhs: float
    identity_rhs: float
    identity_residual: float
    single_term: float
    continuum_value: float
    continuum_residual: float
    missing_pairs: int
    boundary_occupation: float


def f_sum_check(ref: Reference, q) -> FsumReport:
    """Eigenstate double-commutator identity and the continuum f-sum for N_q.

    identity: ⟨N*(H-E)N⟩ + ⟨N(H-E)N*⟩ = ⟨[N*, [H, N]]⟩, exact for eigenvectors.
    continuum: ⟨N*(H-E)N⟩ = |q|²⟨N⟩/2, compared with ``single_term``.
    ``boundary_occupation`` is the mean number of particles in modes p with
    p + q or p - q outside the mode set; when it vanishes on a free gas the
    continuum form is exact.
    """
    space = ref.space
    N, missing = space.density(q)
    Nd = adjoint(N)
    H = ref.H
    shift = H - ref.E * sp.identity(H.shape[0], format="csr")
    one = ref.expect(Nd @ shift @ N).real
    two = ref.expect(N @ shift @ Nd).real
    rhs = ref.expect(commutator(Nd, commutator(H, N))).real
    qq = np.atleast_1d(np.asarray(q, int))
    kq = 2 * math.pi * qq / space.L
    cont = 0.5 * float(kq @ kq) * ref.particle_number
    edge = [i for i, m in enumerate(space.modes)
            if space.find_mode(m + qq) is None or space.find_mode(m - qq) is None]
    occ = sum(ref.expect(space.number(i)).real for i in edge)
    return FsumReport(one + two, rhs, abs(one + two - rhs), one, cont, abs(one - cont), missing, occ)


# -- structure factor and susceptibility ------------------------------------


@dataclass
class StructureReport:
    s: float
    chi: float
    chi_cg: float
    cg_residual: float
    fsum_term: float
    schwarz_slack: float
    schwarz_slack_continuum: float


def structure_and_susceptibility(ref: Reference, q) -> StructureReport:
    """s_q = ⟨N_q* N_q⟩/n and χ_q = 2⟨N_q*(H-E)^{-1}N_q⟩/n.

    ``schwarz_slack`` uses the measured ⟨N*(H-E)N⟩ and is non-negative for
    any eigenvector; the continuum version replaces it by |q|²n/2.
    """
    qq = np.atleast_1d(np.asarray(q, int))
    if not np.any(qq):
        raise ValueError("structure factor needs q != 0")
    N, _ = ref.space.density(qq)
    Nd = adjoint(N)
    n = ref.particle_number
    s = ref.expect(Nd @ N).real / n
    chi = 2 * ref.resolvent(Nd, N).real / n
    val, res = ref.static_pair_cg(Nd, N)
    chi_cg = val.real / n  # static pair counts both orderings; symmetric by reflection
    shift = ref.H - ref.E * sp.identity(ref.H.shape[0], format="csr")
    F = ref.expect(Nd @ shift @ N).real
    kq = 2 * math.pi * qq / ref.space.L
    k2 = float(kq @ kq)
    return StructureReport(s, chi, chi_cg, res, F,
                           math.sqrt(max(F, 0.0) * chi / (2 * n)) - s,
                           0.5 * math.sqrt(k2 * chi) - s)


@dataclass
class FeynmanReport:
    rayleigh: float
    fsum_form: float
    difference: float
    excitation: float
    slack: float
    sector_ok: bool


def bijls_feynman(ref: Reference, gs: GroundState, q) -> FeynmanReport:
    """Variational energy of N_q Ψ two ways, and ε(q) against k²/(2 s_q)."""
    qq = np.atleast_1d(np.asarray(q, int))
    N, _ = ref.space.density(qq)
    phi = N @ ref.psi
    norm2 = float(np.vdot(phi, phi).real)
    if norm2 < 1e-14:
        raise ValueError("N_q Ψ vanishes")
    rq = float(np.vdot(phi, ref.H @ phi).real) / norm2 - ref.E
    kq = 2 * math.pi * qq / ref.space.L
    n = ref.particle_number
    s = norm2 / n
    fsum_form = float(kq @ kq) / (2 * s)
    target = tuple(np.asarray(gs.sector_label) + qq)
    support = np.flatnonzero(np.abs(phi) > 1e-14)
    labels = ref.space.momentum_labels[support]
    sector_ok = bool(np.all(labels == np.asarray(target)))
    eps = gs.sector_minima.get(target, math.inf)
    return FeynmanReport(rq, fsum_form, abs(rq - fsum_form), eps, fsum_form - eps, sector_ok)


# -- Green's functions -------------------------------------------------------


@dataclass
class GreenMatrix:
    G11: complex
    G12: complex
    G21: complex
    G22: complex

    def as_array(self) -> np.ndarray:
        return np.array([[self.G11, self.G21], [self.G12, self.G22]])


def _green_entry(ref: Reference, A, B, z) -> complex:
    return ref.resolvent(A, B, z) + ref.resolvent(B, A, -z)


def green_matrix(ref: Reference, z: complex, k) -> GreenMatrix:
    """G_ij(z, k) = ⟨A_i (H-E-z)^{-1} B_j⟩ + ⟨B_j (H-E+z)^{-1} A_i⟩.

    A = (a_k, a*_{-k}), B = (a*_k, a_{-k}). Real z is allowed when it is
    farther than 1e-8 from every weighted excitation energy.
    """
    sp_ = ref.space
    kk = np.atleast_1d(np.asarray(k, int))
    ik, imk = sp_.find_mode(kk), sp_.find_mode(-kk)
    if ik is None or imk is None:
        raise ValueError("both k and -k must be in the mode set")
    ak = ref.centered(sp_.annihilator(ik))
    amk = ref.centered(sp_.annihilator(imk))
    A1, A2 = ak, adjoint(amk)
    B1, B2 = adjoint(ak), amk
    return GreenMatrix(_green_entry(ref, A1, B1, z), _green_entry(ref, A1, B2, z),
                       _green_entry(ref, A2, B1, z), _green_entry(ref, A2, B2, z))


@dataclass
class GreenSymmetryReport:
    reality: float
    conjugation: float
    reflection: float
    inversion: float


def green_symmetries(ref: Reference, z: complex, k) -> GreenSymmetryReport:
    """Deviations from G12 = G21, G11(z) = conj G11(z̄), G(z,k) = G(z,-k),
    G12(z,k) = G12(-z,-k) and G11(z,k) = G22(-z,-k)."""
    kk = np.atleast_1d(np.asarray(k, int))
    g = green_matrix(ref, z, kk)
    gc = green_matrix(ref, np.conj(z), kk)
    gm = green_matrix(ref, z, -kk)
    gi = green_matrix(ref, -z, -kk)
    inversion = max(abs(g.G12 - gi.G12), abs(g.G11 - gi.G22))
    return GreenSymmetryReport(abs(g.G12 - g.G21), abs(g.G11 - np.conj(gc.G11)),
                               float(np.max(np.abs(g.as_array() - gm.as_array()))), inversion)


# -- van Hove form factor ----------------------------------------------------


@dataclass
class FormFactor:
    omega: np.ndarray
    values: np.ndarray
    eta: float
    energies: np.ndarray
    weights: np.ndarray
    s_direct: float
    weight_sum: float
    first_moment: float
    fsum_moment: float
    quadrature_sum: float


def van_hove_formfactor(ref: Reference, q, omega=None, eta: float | None = None) -> FormFactor:
    """S(ω, q) = n^{-1} Σ_j |⟨j|N_q|Ψ⟩|² L_η(ω - (E_j - E)) with a unit-area Lorentzian.

    The zeroth moment Σ_j weights is compared with s_q = ⟨N_q*N_q⟩/n and
    the first moment with ⟨N_q*(H-E)N_q⟩/n; both are η-independent.
    """
    qq = np.atleast_1d(np.asarray(q, int))
    N, _ = ref.space.density(qq)
    n = ref.particle_number
    amp = ref.amplitudes(N)
    w = np.abs(amp) ** 2 / n
    de = ref.excitation_energies()
    sel = w > 1e-16
    energies, weights = de[sel], w[sel]
    width = float(np.ptp(energies)) if energies.size > 1 else max(1.0, float(np.max(np.abs(energies), initial=1.0)))
    if eta is None:
        eta = 0.05 * (width if width > 0 else 1.0)
    if eta <= 0:
        raise ValueError("broadening must be positive")
    if omega is None:
        lo = float(np.min(energies, initial=0.0)) - 40 * eta
        hi = float(np.max(energies, initial=0.0)) + 40 * eta
        omega = np.linspace(lo, hi, 4001)
    omega = np.asarray(omega, float)
    lor = eta / (math.pi * ((omega[:, None] - energies[None, :]) ** 2 + eta ** 2))
    values = lor @ weights
    Nd = adjoint(N)
    s_direct = ref.expect(Nd @ N).real / n
    shift = ref.H - ref.E * sp.identity(ref.H.shape[0], format="csr")
    fsum = ref.expect(Nd @ shift @ N).real / n
    quad = float(np.trapezoid(values, omega)) if omega.size > 1 else 0.0
    return FormFactor(omega, values, eta, energies, weights, s_direct, float(weights.sum()),
                      float(energies @ weights), fsum, quad)
