"""Interaction potentials, periodic boxes and momentum lattices.

Potentials are specified by their Fourier coefficient v̂(|k|), with the
convention v̂(k) = ∫ v(x) e^{-ikx} dx. Every evaluation goes through |k|,
so evenness holds exactly.
"""

from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import j1

from .numerics import RadialQuadrature, radial_integral

KINDS = ("gaussian", "constant-band", "tabulated-radial")


class PotentialRangeError(ValueError):
    """Raised when a tabulated potential is evaluated outside its table."""


def _norms(k) -> np.ndarray:
    """|k| for a scalar, a 1-D array of radii/1-D momenta, or (n, d) vectors."""
    arr = np.asarray(k, dtype=float)
    if arr.ndim <= 1:
        return np.abs(arr)
    return np.sqrt(np.sum(arr * arr, axis=-1))


def _ball_volume(d: int, r: float) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r ** d


@dataclass(frozen=True)
class Potential:
    """Spherically symmetric two-body interaction.

    ``strength`` is v̂(0) before the coupling multiplier, in energy·volume.
    For the gaussian kind v̂(k) = coupling·strength·exp(-k²width²/2); for the
    constant-band kind v̂(k) = coupling·strength on |k| <= width, zero beyond.
    """

    kind: str = "gaussian"
    strength: float = 1.0
    width: float = 1.0
    coupling: float = 1.0
    d: int = 3
    table_k: tuple = ()
    table_v: tuple = ()
    repulsive: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.d not in (1, 2, 3):
            raise ValueError("dimension must be 1, 2 or 3")
        if self.kind == "tabulated-radial":
            k = np.asarray(self.table_k, float)
            if k.size < 2 or np.any(np.diff(k) <= 0) or k[0] < 0:
                raise ValueError("table radii must be ascending and non-negative")
        elif self.width <= 0:
            raise ValueError("width must be positive")

    @classmethod
    def gaussian_position(cls, amplitude: float, width: float, d: int, coupling: float = 1.0):
        """Gaussian given in position space, v(x) = amplitude·exp(-x²/(2 width²))."""
        return cls("gaussian", amplitude * (2 * math.pi * width * width) ** (d / 2), width, coupling, d)

    @classmethod
    def from_table(cls, path, d: int, coupling: float = 1.0, repulsive: bool = True):
        """Read a two-column ``|k| value`` table, ``#`` starts a comment."""
        text = Path(path).read_text().replace(",", " ")
        data = np.loadtxt(io.StringIO(text), comments="#", ndmin=2)
        if data.shape[1] != 2:
            raise ValueError("tabulated potential needs exactly two columns")
        return cls("tabulated-radial", float(data[0, 1]), 1.0, coupling, d,
                   tuple(data[:, 0]), tuple(data[:, 1]), repulsive)

    def scaled(self, coupling: float) -> "Potential":
        return Potential(self.kind, self.strength, self.width, coupling, self.d,
                         self.table_k, self.table_v, self.repulsive)

    def radial(self, r) -> np.ndarray:
        """v̂ as a function of the radius |k| (array in, array out)."""
        r = np.asarray(r, dtype=float)
        lam = self.coupling
        if self.kind == "gaussian":
            return lam * self.strength * np.exp(-0.5 * (r * self.width) ** 2)
        if self.kind == "constant-band":
            return np.where(r <= self.width, lam * self.strength, 0.0)
        kt = np.asarray(self.table_k)
        lo, hi = kt[0], kt[-1]
        if np.any(r < lo - 1e-300) or np.any(r > hi):
            bad = r[(r < lo) | (r > hi)]
            raise PotentialRangeError(f"|k| = {bad.ravel()[0]!r} outside table range [{lo}, {hi}]")
        return lam * self._interp()(r)

    def _interp(self):
        return PchipInterpolator(np.asarray(self.table_k), np.asarray(self.table_v), extrapolate=False)

    def __call__(self, k) -> np.ndarray:
        return fourier_coefficient(self, k)

    @property
    def v0_hat(self) -> float:
        return float(self.radial(0.0 if self.kind != "tabulated-radial" else self.table_k[0]))

    def position_value(self, x) -> np.ndarray:
        """v(x) = (2π)^{-d} ∫ v̂(k) e^{ikx} dk for the built-in kinds."""
        r = _norms(x)
        lam, s, w, d = self.coupling, self.strength, self.width, self.d
        if self.kind == "gaussian":
            return lam * s * (2 * math.pi * w * w) ** (-d / 2) * np.exp(-0.5 * (r / w) ** 2)
        if self.kind == "constant-band":
            rr = np.where(r == 0, 1.0, r)
            if d == 1:
                out = np.sin(w * rr) / (math.pi * rr)
                at0 = w / math.pi
            elif d == 2:
                out = w * j1(w * rr) / (2 * math.pi * rr)
                at0 = w * w / (4 * math.pi)
            else:
                out = (np.sin(w * rr) - w * rr * np.cos(w * rr)) / (2 * math.pi ** 2 * rr ** 3)
                at0 = w ** 3 / (6 * math.pi ** 2)
            return lam * s * np.where(r == 0, at0, out)
        raise NotImplementedError("position-space values need a closed form")

    def v_at_origin(self) -> float:
        """v(0) = (2π)^{-d} ∫ v̂(k) dk."""
        if self.kind == "gaussian":
            return float(self.position_value(0.0))
        if self.kind == "constant-band":
            return self.coupling * self.strength * _ball_volume(self.d, self.width) / (2 * math.pi) ** self.d
        kt = self.table_k
        quad = RadialQuadrature(self.d, eta=kt[0], k_max=kt[-1], k_split=kt[-1]) if kt[0] > 0 else \
            RadialQuadrature(self.d, k_max=kt[-1], k_split=min(1.0, kt[-1]))
        val, _ = radial_integral(self.radial, quad)
        return val / (2 * math.pi) ** self.d

    def check_repulsive(self, k) -> None:
        if self.repulsive:
            vals = fourier_coefficient(self, k)
            if np.any(vals <= 0):
                raise ValueError("potential flagged repulsive but v̂ <= 0 on the grid")


def fourier_coefficient(potential: Potential, k) -> np.ndarray:
    """v̂(k) for scalar momenta, radii or an (n, d) array of vectors."""
    return potential.radial(_norms(k))


def tabulate(potential: Potential, radii) -> Potential:
    """Sample ``potential`` on ``radii`` and return the tabulated version."""
    radii = np.asarray(radii, float)
    return Potential("tabulated-radial", potential.v0_hat, 1.0, 1.0, potential.d,
                     tuple(radii), tuple(potential.radial(radii)), potential.repulsive)


@dataclass(frozen=True)
class BoxGeometry:
    """Periodic box [0, L)^d with lattice modes (2π/L)·m, |m_i| <= K."""

    d: int
    L: float
    K: int
    include_zero: bool = True
    ball: bool = False

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError("dimension must be 1, 2 or 3")
        if not self.L > 0:
            raise ValueError("side length must be positive")
        if self.K < 0:
            raise ValueError("mode cutoff must be non-negative")

    @property
    def volume(self) -> float:
        return self.L ** self.d

    @property
    def spacing(self) -> float:
        return 2 * math.pi / self.L

    def integer_modes(self) -> np.ndarray:
        """Integer coordinates m, lexicographically ordered, shape (n, d)."""
        rng = range(-self.K, self.K + 1)
        modes = np.array(list(itertools.product(rng, repeat=self.d)), dtype=int).reshape(-1, self.d)
        keep = np.ones(len(modes), bool)
        if self.ball:
            keep &= np.sum(modes * modes, axis=1) <= self.K ** 2
        if not self.include_zero:
            keep &= np.any(modes != 0, axis=1)
        return modes[keep]


def momentum_grid(geometry: BoxGeometry) -> np.ndarray:
    """Momentum vectors of the box, shape (n, d), closed under k -> -k."""
    return geometry.spacing * geometry.integer_modes()


def periodized_potential(potential: Potential, geometry: BoxGeometry, x) -> float:
    """(1/V) Σ_{|m_i|<=K} e^{ikx} v̂(k), summed over the full box of modes."""
    full = BoxGeometry(geometry.d, geometry.L, geometry.K, True, geometry.ball)
    k = momentum_grid(full)
    x = np.atleast_1d(np.asarray(x, float))
    phase = np.exp(1j * k @ x)
    total = np.sum(phase * fourier_coefficient(potential, k)) / geometry.volume
    return total


@dataclass(frozen=True)
class CouplingParams:
    """Chemical potential μ, symmetry-breaking field ν and condensate density κ."""

    mu: float = 0.0
    nu: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        for name in ("mu", "nu", "kappa"):
            val = getattr(self, name)
            if not math.isfinite(val) or val < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {val}")
