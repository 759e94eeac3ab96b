"""Quadrature, lattice sums and damped fixed-point iteration."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

SPHERE_AREA = {1: 2.0, 2: 2.0 * np.pi, 3: 4.0 * np.pi}


@dataclass(frozen=True)
class RadialQuadrature:
    """Composite Gauss-Legendre rule for radial integrals over R^d.

    Panels are spaced geometrically between ``eta`` and ``k_split`` and
    uniformly from ``k_split`` to ``k_max``. With ``eta == 0`` a first panel
    ``[0, k_inner]`` is added so that the rule covers the origin.

    Weights include the surface measure |S^{d-1}| k^{d-1}; for d = 1 this is
    the factor 2 counting both signs of k.
    """

    d: int
    eta: float = 0.0
    k_max: float = 12.0
    order: int = 12
    graded_panels: int = 24
    uniform_panels: int = 24
    k_split: float = 1.0
    k_inner: float = 1e-3

    def __post_init__(self):
        if self.d not in SPHERE_AREA:
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.eta < 0 or self.k_max <= self.eta:
            raise ValueError("need 0 <= eta < k_max")

    def edges(self) -> np.ndarray:
        lo = self.eta if self.eta > 0 else self.k_inner
        split = min(max(self.k_split, lo), self.k_max)
        parts = []
        if self.eta == 0:
            parts.append(np.array([0.0]))
        if split > lo:
            parts.append(np.geomspace(lo, split, self.graded_panels + 1))
        else:
            parts.append(np.array([lo]))
        if self.k_max > split:
            parts.append(np.linspace(split, self.k_max, self.uniform_panels + 1)[1:])
        return np.unique(np.concatenate(parts))

    def nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes in increasing order and weights including surface measure."""
        x, w = np.polynomial.legendre.leggauss(self.order)
        e = self.edges()
        a, b = e[:-1, None], e[1:, None]
        nodes = (0.5 * (b - a) * x + 0.5 * (b + a)).ravel()
        weights = (0.5 * (b - a) * w).ravel()
        weights = weights * SPHERE_AREA[self.d] * nodes ** (self.d - 1)
        return nodes, weights

    def refined(self) -> "RadialQuadrature":
        return RadialQuadrature(
            self.d, self.eta, self.k_max, self.order,
            2 * self.graded_panels, 2 * self.uniform_panels, self.k_split, self.k_inner,
        )


def _integrate(f, quad: RadialQuadrature) -> float:
    k, w = quad.nodes_weights()
    vals = np.asarray(f(k), dtype=float)
    bad = ~np.isfinite(vals)
    if bad.any():
        raise FloatingPointError(f"integrand not finite at |k| = {k[bad][0]!r}")
    return float(np.dot(w, vals))


def radial_integral(f: Callable[[np.ndarray], np.ndarray], quad: RadialQuadrature) -> tuple[float, float]:
    """Integrate a radial function over {eta < |k| <= k_max} in R^d.

    Returns the value on the refined rule and the difference to the base
    rule as an error estimate.
    """
    coarse = _integrate(f, quad)
    fine = _integrate(f, quad.refined())
    return fine, abs(fine - coarse)


def lattice_sum(f: Callable[[np.ndarray], np.ndarray], integer_modes: np.ndarray,
                spacing: float) -> tuple[float, float]:
    """Sum f over the momenta ``spacing * m`` for integer vectors m.

    The tail estimate is the summed magnitude on the outermost shell
    max_i |m_i| = K.
    """
    m = np.atleast_2d(integer_modes)
    vals = np.asarray(f(spacing * m))
    shell = np.max(np.abs(m), axis=1) == np.max(np.abs(m))
    total = vals.sum()
    total = float(total) if np.isrealobj(vals) else complex(total)
    return total, float(np.abs(vals[shell]).sum())


@dataclass
class FixedPointResult:
    x: np.ndarray
    converged: bool
    iterations: int
    gamma: float
    trace: list = field(default_factory=list)


def damped_fixed_point(step: Callable[[np.ndarray], np.ndarray], x0, gamma: float = 0.5,
                       tol: float = 1e-12, max_iter: int = 10_000, patience: int = 5,
                       norm: Callable[[np.ndarray], float] | None = None) -> FixedPointResult:
    """Iterate x <- (1 - gamma) x + gamma step(x).

    The update norm is the max-norm of ``step(x) - x`` scaled by gamma. If it
    grows for ``patience`` consecutive sweeps, gamma is halved and the
    iteration restarts from the state preceding the growth streak.
    Exhausting ``max_iter`` returns an unconverged result, never raises.
    """
    if not 0 < gamma <= 1:
        raise ValueError("damping must lie in (0, 1]")
    norm = norm or (lambda v: float(np.max(np.abs(v))) if np.size(v) else 0.0)
    x = np.array(x0, dtype=complex if np.iscomplexobj(x0) else float, copy=True)
    trace: list[float] = []
    growth = 0
    good = x.copy()
    for it in range(1, max_iter + 1):
        new = np.asarray(step(x))
        delta = gamma * norm(new - x)
        if trace and delta > trace[-1]:
            growth += 1
        else:
            growth = 0
            good = x.copy()
        trace.append(delta)
        if growth >= patience:
            gamma *= 0.5
            x = good.copy()
            growth = 0
            continue
        x = (1 - gamma) * x + gamma * new
        if delta < tol:
            return FixedPointResult(x, True, it, gamma, trace)
    return FixedPointResult(x, False, max_iter, gamma, trace)
