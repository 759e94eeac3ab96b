"""Numerical audit of displacement and squeezing transformations.

States are products over mode groups: the zero mode (displaced, and
squeezed when it is rotated) and each ±k pair (two-mode squeezed). Each
group lives on an occupation cutoff n_cut per mode, and its unitary is a
dense matrix exponential. Expectations of the Hamiltonian are assembled
term by term from products of group moments, with no use of Wick's rule.

Conventions: W_α = exp(-α a* + ᾱ a), so W a W* = a + α, and a pair squeeze
U_θ = exp(-θ a_k* a_{-k}* + θ̄ a_k a_{-k}). The transformed state is
(U W)* Ω, the one-quasiparticle state (U W)* a_k* Ω, and the matching
squeeze coefficients are c = cosh|θ|, s = -(θ/|θ|) sinh|θ|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from ..hfb import BoxSystem, HfbState, coefficients_D_O, coefficients_f_g, energy_B
from ..model import BoxGeometry, Potential
from .fock import interaction_terms

TAIL_BUDGET = 1e-8


class TruncationError(ValueError):
    """The occupation cutoff is too small for the requested transformation."""


def lowering(n_cut: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_cut + 1, dtype=float)), 1).astype(complex)


def pair_lowering(n_cut: int):
    a = lowering(n_cut)
    eye = np.eye(n_cut + 1)
    return np.kron(a, eye), np.kron(eye, a)


def displacement(alpha: complex, a: np.ndarray) -> np.ndarray:
    return expm(-alpha * a.conj().T + np.conj(alpha) * a)


def single_squeeze(theta: complex, a: np.ndarray) -> np.ndarray:
    ad = a.conj().T
    return expm(-0.5 * theta * ad @ ad + 0.5 * np.conj(theta) * a @ a)


def pair_squeeze(theta: complex, a1: np.ndarray, a2: np.ndarray) -> np.ndarray:
    return expm(-theta * a1.conj().T @ a2.conj().T + np.conj(theta) * a1 @ a2)


def squeeze_parameter(theta: complex) -> complex:
    """s = -(θ/|θ|) sinh|θ|."""
    r = abs(theta)
    return 0j if r == 0 else -theta / r * math.sinh(r)


# -- operator identities -----------------------------------------------------


@dataclass
class IdentityReport:
    rotation: float
    number: float
    pair_creation: float
    pair_annihilation: float
    displacement: float
    identity_at_zero: float


def rotation_identities(theta: complex, alpha: complex = 0.5, n_cut: int = 24) -> IdentityReport:
    """Max entry errors of the conjugation formulas on the low-occupation block."""
    a1, a2 = pair_lowering(n_cut)
    U = pair_squeeze(theta, a1, a2)
    Ud = U.conj().T
    r = abs(theta)
    ph = theta / r if r else 1.0
    c, sh = math.cosh(r), math.sinh(r)
    d = lambda x: x.conj().T
    low_occ = n_cut // 6
    occ = np.array([(i, j) for i in range(n_cut + 1) for j in range(n_cut + 1)])
    low = np.flatnonzero(np.max(occ, axis=1) <= low_occ)
    blk = lambda m: m[np.ix_(low, low)]
    err = lambda x, y: float(np.max(np.abs(blk(x) - blk(y))))
    rot = err(U @ a1 @ Ud, c * a1 + ph * sh * d(a2))
    num = err(U @ d(a1) @ a1 @ Ud,
              c * c * d(a1) @ a1 + c * ph * sh * d(a1) @ d(a2)
              + c * np.conj(ph) * sh * a2 @ a1 + sh * sh * a2 @ d(a2))
    cre = err(U @ d(a1) @ d(a2) @ Ud,
              c * c * d(a1) @ d(a2) + c * np.conj(ph) * sh * (d(a1) @ a1 + a2 @ d(a2))
              + np.conj(ph) ** 2 * sh * sh * a2 @ a1)
    ann = err(U @ a1 @ a2 @ Ud,
              c * c * a1 @ a2 + c * ph * sh * (d(a2) @ a2 + a1 @ d(a1))
              + ph * ph * sh * sh * d(a2) @ d(a1))
    a = lowering(n_cut)
    W = displacement(alpha, a)
    low1 = np.arange(low_occ + 1)
    disp = float(np.max(np.abs((W @ a @ W.conj().T - a)[np.ix_(low1, low1)] - alpha * np.eye(low_occ + 1))))
    U0 = pair_squeeze(0.0, a1, a2)
    return IdentityReport(rot, num, cre, ann, disp, float(np.max(np.abs(U0 - np.eye(U0.shape[0])))))


# -- product states ------------------------------------------------------------


@dataclass
class _Group:
    modes: tuple          # grid indices, one or two
    ops: list             # lowering matrices for each mode of the group
    vacuum_state: np.ndarray
    excited: dict         # grid index -> (UW)* a* Ω restricted to the group


def _tail(vec: np.ndarray, n_cut: int, n_modes: int) -> float:
    if n_modes == 1:
        return float(abs(vec[-1]))
    occ = np.array([(i, j) for i in range(n_cut + 1) for j in range(n_cut + 1)])
    return float(np.linalg.norm(vec[np.max(occ, axis=1) == n_cut]))


def _build_groups(system: BoxSystem, alpha: complex, theta: np.ndarray, n_cut: int):
    groups, tails = [], []
    z = system.zero
    a = lowering(n_cut)
    vac = np.zeros(n_cut + 1, complex)
    vac[0] = 1
    U0 = single_squeeze(theta[z], a) if system.rotate_zero else np.eye(n_cut + 1)
    T_dag = displacement(alpha, a).conj().T @ U0.conj().T
    g = _Group((z,), [a], T_dag @ vac, {z: T_dag @ a.conj().T @ vac})
    groups.append(g)
    tails.append(max(_tail(g.vacuum_state, n_cut, 1), _tail(g.excited[z], n_cut, 1)))
    a1, a2 = pair_lowering(n_cut)
    vac2 = np.zeros((n_cut + 1) ** 2, complex)
    vac2[0] = 1
    for i in range(len(system.momenta)):
        j = int(system.partner[i])
        if i == z or j < i:
            continue
        Ud = pair_squeeze(theta[i], a1, a2).conj().T
        g = _Group((i, j), [a1, a2], Ud @ vac2,
                   {i: Ud @ a1.conj().T @ vac2, j: Ud @ a2.conj().T @ vac2})
        groups.append(g)
        tails.append(max(_tail(v, n_cut, 2) for v in [g.vacuum_state, *g.excited.values()]))
    return groups, max(tails)


def _expectation(groups, owner, terms, excited_mode=None) -> float:
    cache = {}
    total = 0j
    for coeff, cre, ann in terms:
        word = [(i, True) for i in cre] + [(i, False) for i in ann]
        value = coeff
        for gi, g in enumerate(groups):
            sub = tuple(w for w in word if owner[w[0]] == gi)
            if not sub:
                continue
            key = (gi, sub)
            if key not in cache:
                vec = g.excited[excited_mode] if excited_mode in g.modes else g.vacuum_state
                out = vec
                for mode, dag in reversed(sub):
                    op = g.ops[g.modes.index(mode)]
                    out = (op.conj().T if dag else op) @ out
                cache[key] = np.vdot(vec, out)
            value = value * cache[key]
            if value == 0:
                break
        total += value
    return float(total.real)


@dataclass
class TransformReport:
    B_numeric: float
    B_formula: float
    B_error: float
    D_numeric: np.ndarray
    D_formula: np.ndarray
    D_error: float
    tail: float
    n_cut: int
    identities: IdentityReport | None


def verify_bogoliubov_transform(potential: Potential, geometry: BoxGeometry, alpha: complex, theta,
                                mu: float, n_cut: int = 24, tail_budget: float = TAIL_BUDGET,
                                identities: bool = True) -> TransformReport:
    """Compare ⟨Ω|H - μN|Ω⟩ and ⟨b_k*Ω|H - μN|b_k*Ω⟩ with B and B + D(k).

    ``theta`` holds one squeeze angle per grid point of the full box (zero
    mode included); it is symmetrized over ±k. The zero-mode angle is used
    only when ``geometry.include_zero`` is set.
    """
    system = BoxSystem(potential, geometry)
    theta = np.asarray(theta, complex)
    if theta.shape != (len(system.momenta),):
        raise ValueError("need one angle per grid point")
    theta = system.symmetrize(theta)
    groups, tail = _build_groups(system, alpha, theta, n_cut)
    if tail > tail_budget:
        need = n_cut
        while tail > tail_budget and need < 160:
            need += 8
            _, tail = _build_groups(system, alpha, theta, need)
        raise TruncationError(f"occupation cutoff {n_cut} leaves tail {tail:.2e}; need n_cut >= {need}")
    owner = {}
    for gi, g in enumerate(groups):
        for m in g.modes:
            owner[m] = gi
    m_int = BoxGeometry(geometry.d, geometry.L, geometry.K, True, geometry.ball).integer_modes()
    terms, _ = interaction_terms(m_int, system.momenta, system.volume, potential)
    terms += [(system.kinetic[i] - mu, (i,), (i,)) for i in range(len(system.momenta))]
    B_num = _expectation(groups, owner, terms)
    D_num = np.array([_expectation(groups, owner, terms, i) - B_num for i in range(len(system.momenta))])

    s = np.array([squeeze_parameter(t) for t in theta])
    state = HfbState(system, alpha, s)
    B = energy_B(state, mu)
    f, g = coefficients_f_g(state, mu)
    D = coefficients_D_O(state, f, g).D
    ident = rotation_identities(theta[int(np.argmax(np.abs(theta)))], alpha if alpha else 0.5, n_cut) \
        if identities else None
    return TransformReport(B_num, B, abs(B_num - B), D_num, D, float(np.max(np.abs(D_num - D))),
                           tail, n_cut, ident)


def coherent_occupation(alpha: complex, n_cut: int = 24) -> float:
    a = lowering(n_cut)
    vac = np.zeros(n_cut + 1, complex)
    vac[0] = 1
    v = displacement(alpha, a).conj().T @ vac
    return float(np.vdot(v, a.conj().T @ a @ v).real)
