"""Zero-mode c-number Hamiltonians on the nonzero-mode Fock space."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..model import Potential
from .fock import FockSpace, diagonalize, interaction_terms, substitute_mode


class ZeroModeSymbols:
    """Wick and anti-Wick symbols of H - μN with respect to the zero mode.

    ``modes`` must contain the origin. Both symbols act on the capped Fock
    space of the remaining modes.
    """

    def __init__(self, potential: Potential, modes, n_max: int, L: float, mu: float):
        modes = np.asarray(modes, int)
        modes = modes[:, None] if modes.ndim == 1 else modes
        self.potential, self.mu, self.L = potential, mu, L
        self.d = modes.shape[1]
        zero = [i for i, m in enumerate(modes) if not np.any(m)]
        if not zero:
            raise ValueError("the zero mode must be in the mode set")
        self.zero = zero[0]
        self.volume = L ** self.d
        k = 2 * np.pi * modes / L
        self.terms, self.skipped = interaction_terms(modes, k, self.volume, potential)
        e = 0.5 * np.sum(k * k, axis=1) - mu
        self.terms = self.terms + [(e[i], (i,), (i,)) for i in range(len(modes))]
        rest = np.delete(modes, self.zero, axis=0)
        self.space = FockSpace(rest, n_max, L)
        self.rest_k = 2 * np.pi * rest / L
        self.v0 = float(potential.radial(0.0))
        # H(α) = Σ ᾱ^p α^q M_pq, with p, q the zero-mode creator/annihilator counts
        groups = {}
        for term in self.terms:
            key = (term[1].count(self.zero), term[2].count(self.zero))
            groups.setdefault(key, []).append(term)
        self.blocks = {key: self.space.monomial_matrix(substitute_mode(ts, self.zero, 1.0))
                       for key, ts in groups.items()}

    def wick_matrix(self, alpha: complex):
        """H(α): a0 -> α, a0* -> ᾱ in the normal-ordered Hamiltonian."""
        alpha = complex(alpha)
        out = None
        for (p, q), M in self.blocks.items():
            part = (np.conj(alpha) ** p * alpha ** q) * M
            out = part if out is None else out + part
        return out.tocsr()

    def anti_wick_matrix(self, alpha: complex):
        """H̃(α) = H(α) - 2v̂(0)|α|²/V + v̂(0)/V + μ - Σ'(v̂(0)+v̂(k))/V a_k* a_k."""
        V = self.volume
        corr = [(-(self.v0 + float(self.potential.radial(np.linalg.norm(kv)))) / V, (i,), (i,))
                for i, kv in enumerate(self.rest_k)]
        H = self.wick_matrix(alpha) + self.space.monomial_matrix(corr)
        shift = -2 * self.v0 * abs(alpha) ** 2 / V + self.v0 / V + self.mu
        return H + shift * sp.identity(H.shape[0], dtype=complex, format="csr")

    def lowest(self, matrix) -> float:
        return float(diagonalize(matrix, n_states=1).values[0])

