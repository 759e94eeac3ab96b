"""Closed-form Bogoliubov approximation of the grand-canonical Bose gas."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import BoxGeometry, Potential, _norms, fourier_coefficient, momentum_grid
from .numerics import RadialQuadrature, radial_integral


def _pair_strength(potential: Potential, k, rho=None, mu=None) -> np.ndarray:
    """v̂(k)·ρ, or v̂(k)·μ/v̂(0) in the grand-canonical form."""
    if (rho is None) == (mu is None):
        raise ValueError("give exactly one of rho and mu")
    vk = fourier_coefficient(potential, k)
    if rho is not None:
        if rho < 0:
            raise ValueError("density must be non-negative")
        return vk * rho
    if mu < 0:
        raise ValueError("chemical potential must be non-negative")
    return vk * mu / potential.v0_hat


def dispersion_bg(potential: Potential, k, rho: float | None = None, mu: float | None = None) -> np.ndarray:
    """ω(k) = sqrt(k²/2 (k²/2 + 2 v̂(k) ρ)), with ρ -> μ/v̂(0) when μ is given."""
    kin = 0.5 * _norms(k) ** 2
    radicand = kin * (kin + 2 * _pair_strength(potential, k, rho, mu))
    if np.any(radicand < 0):
        idx = np.flatnonzero(np.ravel(radicand) < 0)[0]
        raise ValueError(f"negative radicand in the dispersion at |k| = {np.ravel(_norms(k))[idx]!r}")
    return np.sqrt(radicand)


def coherent_alpha(mu: float, volume: float, v0_hat: float) -> float:
    """|α| minimising -μ|α|² + v̂(0)|α|⁴/(2V)."""
    if v0_hat <= 0:
        raise ValueError("v̂(0) must be positive")
    return math.sqrt(mu * volume / v0_hat)


def coherent_energy(alpha_sq: float, mu: float, volume: float, v0_hat: float) -> float:
    return -mu * alpha_sq + v0_hat * alpha_sq ** 2 / (2 * volume)


def squeeze_coefficients(potential: Potential, mu: float, k, tau: float = 0.0):
    """Rotation coefficients (c_k, s_k) that remove the pair terms.

    |s_k|² = ((1 - r²)^{-1/2} - 1)/2 with r = A/(k²/2 + A), A = v̂(k)μ/v̂(0).
    The phase of s_k is e^{2iτ}, matching the phase of the pair term.
    """
    if mu <= 0:
        raise ValueError("squeezing needs mu > 0")
    r_abs = _norms(k)
    if np.any(r_abs == 0):
        raise ValueError("the zero mode is not rotated")
    a = _pair_strength(potential, k, mu=mu)
    ratio = a / (0.5 * r_abs ** 2 + a)
    s_sq = 0.5 * np.expm1(-0.5 * np.log1p(-ratio * ratio))
    s = np.exp(2j * tau) * np.sqrt(s_sq)
    c = np.sqrt(1 + s_sq)
    return c, s


def bg_ground_energy(potential: Potential, mu: float, geometry: BoxGeometry, tail_tol: float = 1e-10) -> float:
    """E = -Vμ²/(2v̂(0)) - Σ_k ½[(k²/2 + v̂(k)μ/v̂(0)) - ω(k)], zero mode included."""
    full = BoxGeometry(geometry.d, geometry.L, geometry.K, True, geometry.ball)
    k = momentum_grid(full)
    a = _pair_strength(potential, k, mu=mu)
    kin = 0.5 * np.sum(k * k, axis=1)
    summand = 0.5 * ((kin + a) - dispersion_bg(potential, k, mu=mu))
    m = full.integer_modes()
    shell = np.max(np.abs(m), axis=1) == full.K
    if full.K > 0 and np.max(summand[shell]) > tail_tol:
        warnings.warn(f"ground-energy summand at the cutoff is {np.max(summand[shell]):.3e}", RuntimeWarning)
    return -full.volume * mu * mu / (2 * potential.v0_hat) - float(np.sum(summand))


@dataclass
class DepletionResult:
    value: float
    divergent: bool
    error: float = 0.0
    eta: float = 0.0


def depletion_density(potential: Potential, mu: float, geometry: BoxGeometry | None = None,
                      quad: RadialQuadrature | None = None) -> DepletionResult:
    """Non-condensed density (1/V)Σ'|s_k|², or (2π)^{-d}∫|s_k|² dk.

    In d = 1 the continuum integral diverges logarithmically at small |k|;
    the value for the given inner cutoff is returned with ``divergent`` set.
    """
    if geometry is not None:
        k = momentum_grid(BoxGeometry(geometry.d, geometry.L, geometry.K, False, geometry.ball))
        if mu == 0 or not np.any(fourier_coefficient(potential, k)):
            return DepletionResult(0.0, False)
        _, s = squeeze_coefficients(potential, mu, k)
        return DepletionResult(float(np.sum(np.abs(s) ** 2)) / geometry.volume, False)
    if quad is None:
        raise ValueError("need a geometry or a radial quadrature")

    def integrand(r):
        if mu == 0 or potential.v0_hat == 0:
            return np.zeros_like(r)
        _, s = squeeze_coefficients(potential, mu, r)
        return np.abs(s) ** 2

    val, err = radial_integral(integrand, quad)
    norm = (2 * math.pi) ** quad.d
    return DepletionResult(val / norm, quad.d == 1 and mu > 0, err / norm, quad.eta)


@dataclass
class DispersionTable:
    """Dispersion values on a set of momenta, with provenance metadata."""

    momenta: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def radii(self) -> np.ndarray:
        return _norms(self.momenta)


def bogoliubov_table(potential: Potential, momenta, mu: float) -> DispersionTable:
    return DispersionTable(np.asarray(momenta, float), dispersion_bg(potential, momenta, mu=mu),
                           {"formula": "bogoliubov", "mu": mu})


@dataclass
class Velocities:
    critical: float
    phonon: float
    phonon_error: float


def velocity_extract(table: DispersionTable, error_order: int = 2) -> Velocities:
    """Critical velocity min ω/|k| and the k -> 0 slope.

    The slope comes from the secants ω/|k| at the two smallest nonzero radii,
    combined by Richardson extrapolation assuming a leading error of order
    r**error_order (2 for dispersions even in k, 1 for a k² correction).
    """
    r = table.radii
    nz = r > 0
    if len(np.unique(r[nz])) < 2:
        raise ValueError("need at least two distinct nonzero radii")
    ratio = table.values[nz] / r[nz]
    critical = float(np.min(ratio))
    radii = np.unique(r[nz])[:2]
    slope = [float(np.min(ratio[r[nz] == q])) for q in radii]
    r1, r2 = radii
    w1, w2 = r1 ** error_order, r2 ** error_order
    phonon = (w2 * slope[0] - w1 * slope[1]) / (w2 - w1)
    return Velocities(critical, phonon, abs(phonon - slope[0]))
