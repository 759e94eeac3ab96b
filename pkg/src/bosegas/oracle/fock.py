"""Occupation-number bases and second-quantized operators on small mode sets.

The space holds every occupation vector over the given modes with total
particle number <= n_max. Operators are sparse matrices on this space;
terms that would exceed the cap or leave the mode set are dropped, and
the number of dropped amplitudes is recorded on the matrix builder.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..model import Potential, fourier_coefficient

DENSE_LIMIT = 2000
DIMENSION_LIMIT = 20_000


def _compositions(n_modes: int, cap: int):
    """All occupation tuples with sum <= cap, lexicographic order."""
    if n_modes == 0:
        yield ()
        return
    for first in range(cap + 1):
        for rest in _compositions(n_modes - 1, cap - first):
            yield (first,) + rest


def count_states(n_modes: int, cap: int) -> int:
    return math.comb(n_modes + cap, cap)


def interaction_terms(modes: np.ndarray, momenta: np.ndarray, volume: float, potential: Potential):
    """(1/2V) Σ v̂(k2 - k3) a*_{k1} a*_{k2} a_{k3} a_{k4} over k1 + k2 = k3 + k4.

    Quadruples with some momentum outside the mode set are skipped and
    counted. Returns (terms, skipped) with terms as (coeff, creators,
    annihilators) on mode indices.
    """
    index = {tuple(m): i for i, m in enumerate(modes)}
    M = len(modes)
    terms, skipped = [], 0
    for i3 in range(M):
        for i4 in range(M):
            total = modes[i3] + modes[i4]
            for i1 in range(M):
                i2 = index.get(tuple(total - modes[i1]))
                if i2 is None:
                    skipped += 1
                    continue
                v = float(fourier_coefficient(potential, (momenta[i2] - momenta[i3])[None, :])[0])
                if v != 0:
                    terms.append((v / (2 * volume), (i1, i2), (i3, i4)))
    return terms, skipped


def substitute_mode(terms, mode: int, value: complex):
    """Replace a_mode by ``value`` and a*_mode by its conjugate in every monomial.

    Remaining mode indices above ``mode`` shift down by one, so the result
    acts on the mode list with ``mode`` removed.
    """
    out = []
    shift = lambda idx: tuple(i - (i > mode) for i in idx if i != mode)
    for coeff, cre, ann in terms:
        p, q = cre.count(mode), ann.count(mode)
        out.append((coeff * np.conj(value) ** p * value ** q, shift(cre), shift(ann)))
    return out


@dataclass
class FockSector:
    """Basis vectors of one total-momentum block, with their positions."""

    label: tuple
    indices: np.ndarray
    basis: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.indices)


@dataclass
class FockSpace:
    """All occupations of ``modes`` (integer vectors) with at most n_max bosons.

    ``L`` sets the momentum scale k = (2π m + twist)/L; the twist shifts the
    first coordinate only.
    """

    modes: np.ndarray
    n_max: int
    L: float = 2 * math.pi
    twist: float = 0.0
    basis: np.ndarray = field(init=False)
    index: dict = field(init=False)
    dropped: int = field(init=False, default=0)

    def __post_init__(self):
        modes = np.asarray(self.modes, dtype=int)
        self.modes = modes[:, None] if modes.ndim == 1 else modes
        if len({tuple(m) for m in self.modes}) != len(self.modes):
            raise ValueError("modes must be distinct")
        est = count_states(len(self.modes), self.n_max)
        if est > DIMENSION_LIMIT:
            raise ValueError(f"Fock space dimension {est} exceeds limit {DIMENSION_LIMIT}")
        self.basis = np.array(list(_compositions(len(self.modes), self.n_max)), dtype=int)
        self.index = {tuple(b): i for i, b in enumerate(self.basis)}
        self.mode_index = {tuple(m): i for i, m in enumerate(self.modes)}

    @property
    def d(self) -> int:
        return self.modes.shape[1]

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def volume(self) -> float:
        return self.L ** self.d

    @property
    def momenta(self) -> np.ndarray:
        k = 2 * math.pi * self.modes.astype(float)
        k[:, 0] += self.twist
        return k / self.L

    @property
    def particle_numbers(self) -> np.ndarray:
        return self.basis.sum(axis=1)

    @property
    def momentum_labels(self) -> np.ndarray:
        """Total integer momentum of every basis vector, shape (dim, d)."""
        return self.basis @ self.modes

    def find_mode(self, m) -> int | None:
        return self.mode_index.get(tuple(np.atleast_1d(m)))

    def sector(self, label, particles: int | None = None) -> FockSector:
        lab = np.atleast_1d(np.asarray(label, int))
        sel = np.all(self.momentum_labels == lab, axis=1)
        if particles is not None:
            sel &= self.particle_numbers == particles
        idx = np.flatnonzero(sel)
        return FockSector(tuple(int(v) for v in lab), idx, self.basis[idx])

    def sector_labels(self) -> list[tuple]:
        return sorted({tuple(int(v) for v in x) for x in self.momentum_labels})

    # -- operator construction -------------------------------------------

    def monomial_matrix(self, terms) -> sp.csr_matrix:
        """Sum of normal-ordered monomials coeff·a*_{c1}..a*_{cp} a_{a1}..a_{aq}.

        ``terms`` is an iterable of (coeff, creators, annihilators) with mode
        indices. Annihilators act right to left.
        """
        rows, cols, vals = [], [], []
        dropped = 0
        for j, state in enumerate(self.basis):
            for coeff, cre, ann in terms:
                occ = list(state)
                amp = 1.0
                ok = True
                for m in reversed(ann):
                    if occ[m] == 0:
                        ok = False
                        break
                    amp *= math.sqrt(occ[m])
                    occ[m] -= 1
                if not ok:
                    continue
                for m in reversed(cre):
                    occ[m] += 1
                    amp *= math.sqrt(occ[m])
                if sum(occ) > self.n_max:
                    dropped += 1
                    continue
                rows.append(self.index[tuple(occ)])
                cols.append(j)
                vals.append(coeff * amp)
        self.dropped = dropped
        n = self.dimension
        return sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(n, n))

    def annihilator(self, mode: int) -> sp.csr_matrix:
        return self.monomial_matrix([(1.0, (), (mode,))])

    def creator(self, mode: int) -> sp.csr_matrix:
        """Adjoint of the annihilator on the capped space."""
        return self.annihilator(mode).conj().T.tocsr()

    def number(self, mode: int | None = None) -> sp.csr_matrix:
        occ = self.particle_numbers if mode is None else self.basis[:, mode]
        return sp.diags(occ.astype(complex)).tocsr()

    def momentum_operator(self, axis: int = 0) -> sp.csr_matrix:
        return sp.diags((self.basis @ self.momenta[:, axis]).astype(complex)).tocsr()

    def density(self, q) -> tuple[sp.csr_matrix, int]:
        """N_q = Σ_p a*_{p+q} a_p over p with p and p + q in the mode set.

        Returns the matrix and the number of pairs (p, p+q) dropped because
        p + q lies outside the mode set.
        """
        q = np.atleast_1d(np.asarray(q, int))
        terms, missing = [], 0
        for p_idx, p in enumerate(self.modes):
            t = self.find_mode(p + q)
            if t is None:
                missing += 1
            else:
                terms.append((1.0, (t,), (p_idx,)))
        return self.monomial_matrix(terms), missing

    def kinetic_terms(self, mu: float):
        e = 0.5 * np.sum(self.momenta ** 2, axis=1) - mu
        return [(e[i], (i,), (i,)) for i in range(len(self.modes))]

    def interaction_terms(self, potential: Potential):
        terms, skipped = interaction_terms(self.modes, self.momenta, self.volume, potential)
        self.skipped_quadruples = skipped
        return terms, skipped

    def hamiltonian(self, potential: Potential | None, mu: float = 0.0, nu: float = 0.0) -> sp.csr_matrix:
        """H - μN - ν√V (a*_0 + a_0), assembled as a sparse Hermitian matrix."""
        terms = self.kinetic_terms(mu)
        if potential is not None:
            inter, _ = self.interaction_terms(potential)
            terms += inter
        H = self.monomial_matrix(terms)
        if nu:
            z = self.find_mode(np.zeros(self.d, int))
            if z is None:
                raise ValueError("symmetry-breaking field needs the zero mode")
            a0 = self.annihilator(z)
            H = H - nu * math.sqrt(self.volume) * (a0 + a0.conj().T)
        H = H.tocsr()
        asym = abs(H - H.conj().T)
        if asym.nnz and asym.max() > 1e-12:
            raise AssertionError("assembled Hamiltonian is not Hermitian")
        return H


@dataclass
class SpectralData:
    values: np.ndarray
    vectors: np.ndarray
    degenerate: bool
    residual: float


def diagonalize(H, n_states: int | None = None, tol: float = 1e-10) -> SpectralData:
    """Lowest eigenpairs; dense up to DENSE_LIMIT, Lanczos above.

    Real Hamiltonians are diagonalized in real arithmetic so eigenvectors
    come out real.
    """
    n = H.shape[0]
    if n == 0:
        return SpectralData(np.array([]), np.zeros((0, 0)), False, 0.0)
    Hd = H.toarray() if sp.issparse(H) else np.asarray(H)
    real = np.max(np.abs(Hd.imag), initial=0.0) == 0
    if real:
        Hd = Hd.real
    if n <= DENSE_LIMIT:
        vals, vecs = sla.eigh(Hd)
    else:
        k = min(n_states or 6, n - 2)
        vals, vecs = spla.eigsh(sp.csr_matrix(Hd), k=k, which="SA", tol=1e-13)
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    if n_states is not None:
        vals, vecs = vals[:n_states], vecs[:, :n_states]
    scale = max(1.0, float(np.max(np.abs(vals))))
    resid = float(np.max(np.linalg.norm(Hd @ vecs - vecs * vals, axis=0))) if len(vals) else 0.0
    if resid > tol * scale * 100:
        raise RuntimeError(f"eigen residual {resid:.2e} too large")
    degenerate = len(vals) > 1 and abs(vals[1] - vals[0]) < 1e-9 * scale
    return SpectralData(vals, vecs, degenerate, resid)


def restrict(op, rows: np.ndarray, cols: np.ndarray):
    return op[rows][:, cols]


@dataclass
class GroundState:
    """Global ground state of a capped space plus the lowest energy per sector."""

    space: FockSpace
    H: sp.csr_matrix
    energy: float
    vector: np.ndarray
    sector_label: tuple
    sector_minima: dict
    degenerate: bool

    def expect(self, op) -> complex:
        v = self.vector
        return complex(np.vdot(v, op @ v))


def _pool_size() -> int:
    try:
        return max(1, int(os.environ.get("BOSE_THREADS", "1")))
    except ValueError:
        return 1


def _sector_job(space: FockSpace, H, lab):
    sec = space.sector(lab)
    return lab, sec, diagonalize(restrict(H, sec.indices, sec.indices), n_states=2)


def ground_and_ies(space: FockSpace, H) -> GroundState:
    """E = min over sectors, ε(k) = min sp H(k) - E for every sector k.

    Sectors are diagonalized as independent jobs; BOSE_THREADS caps the pool.
    """
    labels = space.sector_labels()
    with ThreadPoolExecutor(_pool_size()) as pool:
        results = list(pool.map(lambda lab: _sector_job(space, H, lab), labels))
    minima = {}
    best = None
    for lab, sec, spec in results:
        minima[lab] = float(spec.values[0])
        if best is None or spec.values[0] < best[0] - 1e-12:
            vec = np.zeros(space.dimension, dtype=complex)
            vec[sec.indices] = spec.vectors[:, 0]
            best = (float(spec.values[0]), vec, lab, spec.degenerate)
    E, vec, lab, degen = best
    ground_ties = [k for k, v in minima.items() if k != lab and abs(v - E) < 1e-9 * max(1, abs(E))]
    return GroundState(space, H, E, vec, lab, {k: v - E for k, v in minima.items()}, degen or bool(ground_ties))


@dataclass
class LegendreCheck:
    grand_canonical: float
    canonical: dict
    minimum_over_n: float
    difference: float


def grand_canonical_check(space: FockSpace, potential: Potential | None, mu: float) -> LegendreCheck:
    """min sp (H - μN) on the capped space against min_n (E^n - μ n) from fixed-n blocks."""
    Hmu = space.hamiltonian(potential, mu)
    E_gc = float(diagonalize(Hmu, n_states=1).values[0])
    H0 = space.hamiltonian(potential, 0.0)
    N = space.particle_numbers
    canon = {}
    for n in range(space.n_max + 1):
        idx = np.flatnonzero(N == n)
        canon[n] = float(diagonalize(restrict(H0, idx, idx), n_states=1).values[0])
    best = min(e - mu * n for n, e in canon.items())
    return LegendreCheck(E_gc, canon, best, abs(E_gc - best))
