"""Subadditive hulls on finite momentum lattices.

The hull of ω is the largest function ε <= ω with ε(k1 + k2) <= ε(k1) + ε(k2).
On a lattice it is reached by min-plus relaxation
ε <- min(ω, min_{k'} ε(k') + ε(k - k')).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

HARD_CUTOFF = "hard-cutoff"
WRAPAROUND = "wraparound"
GRID_GUARD = 100_000


@dataclass(frozen=True)
class SpectrumGrid:
    """Values on a d-dimensional lattice stored as a dense array.

    With the hard-cutoff rule the array index ``origin`` is the zero
    momentum and entries set to +inf are absent grid points. With the
    wraparound rule indices are taken modulo the array shape, index 0 being
    the origin.
    """

    values: np.ndarray
    spacing: float = 1.0
    rule: str = HARD_CUTOFF
    origin: tuple = ()

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.size == 0:
            raise ValueError("empty spectrum grid")
        if self.rule not in (HARD_CUTOFF, WRAPAROUND):
            raise ValueError(f"unknown combination rule {self.rule!r}")
        if not self.origin:
            origin = tuple(n // 2 for n in vals.shape) if self.rule == HARD_CUTOFF else (0,) * vals.ndim
            object.__setattr__(self, "origin", origin)
        finite = vals[np.isfinite(vals)]
        if np.any(finite < 0):
            raise ValueError("spectrum values must be non-negative")

    @property
    def d(self) -> int:
        return self.values.ndim

    def integer_coords(self) -> np.ndarray:
        """Integer lattice coordinates of every array cell, shape (*shape, d)."""
        grids = np.meshgrid(*[np.arange(n) - o for n, o in zip(self.values.shape, self.origin)], indexing="ij")
        return np.stack(grids, axis=-1)

    def radii(self) -> np.ndarray:
        m = self.integer_coords()
        if self.rule == WRAPAROUND:
            n = np.array(self.values.shape)
            m = np.minimum(np.mod(m, n), np.mod(-m, n))
        return self.spacing * np.sqrt(np.sum(m * m, axis=-1))

    def with_values(self, values) -> "SpectrumGrid":
        return replace(self, values=np.asarray(values, float))


def from_function(omega, d: int, K: int, spacing: float) -> SpectrumGrid:
    """Tabulate ω(k) on the hard-cutoff box |m_i| <= K with k = spacing·m."""
    axes = [np.arange(-K, K + 1)] * d
    m = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    k = spacing * m.reshape(-1, d)
    vals = np.asarray(omega(k), float).reshape((2 * K + 1,) * d)
    return SpectrumGrid(vals, spacing, HARD_CUTOFF, (K,) * d)


def _offsets(grid: SpectrumGrid, inner_radius: float | None):
    shape = grid.values.shape
    for idx in itertools.product(*[range(n) for n in shape]):
        if not np.isfinite(grid.values[idx]):
            continue
        off = tuple(i - o for i, o in zip(idx, grid.origin))
        if inner_radius is not None and grid.spacing * np.sqrt(sum(x * x for x in off)) > inner_radius:
            continue
        yield idx, off


def _shifted(arr: np.ndarray, off: tuple, rule: str) -> np.ndarray:
    """out[k] = arr[k - off] (missing entries +inf under the hard cutoff)."""
    if rule == WRAPAROUND:
        return np.roll(arr, off, axis=tuple(range(arr.ndim)))
    out = np.full_like(arr, np.inf)
    src, dst = [], []
    for o, n in zip(off, arr.shape):
        if o >= 0:
            src.append(slice(0, n - o))
            dst.append(slice(o, n))
        else:
            src.append(slice(-o, n))
            dst.append(slice(0, n + o))
    out[tuple(dst)] = arr[tuple(src)]
    return out


def minplus_step(omega: np.ndarray, eps: np.ndarray, grid: SpectrumGrid, inner_radius=None) -> np.ndarray:
    """One Jacobi sweep: min(ω, min_{k'} ε(k') + ε(k - k'))."""
    new = omega.copy()
    for idx, off in _offsets(grid.with_values(eps), inner_radius):
        cand = eps[idx] + _shifted(eps, off, grid.rule)
        np.minimum(new, cand, out=new)
    return new


@dataclass
class HullResult:
    grid: SpectrumGrid
    sweeps: int
    converged: bool
    guarded: bool


def subadditive_hull(grid: SpectrumGrid, max_parts: int | None = None,
                     inner_radius: float | None = None) -> HullResult:
    """Iterate min-plus relaxation to a bitwise fixed point.

    ``max_parts`` bounds the number of sweeps. Under the hard-cutoff rule
    decompositions leaving the stored grid are dropped, which can only
    raise the result. Grids above 1e5 points restrict the inner
    minimisation to |k'| <= inner_radius and report it.
    """
    omega = grid.values
    guarded = False
    if omega.size > GRID_GUARD:
        if inner_radius is None:
            raise ValueError(f"grid of {omega.size} points needs an inner radius")
        guarded = True
    eps = omega.copy()
    sweeps = 0
    while max_parts is None or sweeps < max_parts:
        new = minplus_step(omega, eps, grid, inner_radius if guarded else None)
        sweeps += 1
        if np.array_equal(new, eps):
            return HullResult(grid.with_values(new), sweeps, True, guarded)
        eps = new
    return HullResult(grid.with_values(eps), sweeps, False, guarded)


@dataclass
class SubadditivityReport:
    ok: bool
    witness: tuple | None = None
    excess: float = 0.0


def is_subadditive(grid: SpectrumGrid, tol: float = 0.0) -> SubadditivityReport:
    """Exhaustive check of ε(k1 + k2) <= ε(k1) + ε(k2) over all pairs.

    The witness is (k1, k2, k1 + k2) in integer coordinates.
    """
    eps = grid.values
    for idx, off in _offsets(grid, None):
        total = eps[idx] + _shifted(eps, off, grid.rule)
        viol = eps > total + tol
        if viol.any():
            where = tuple(int(i) for i in np.argwhere(viol)[0])
            k12 = tuple(w - o for w, o in zip(where, grid.origin))
            k2 = tuple(a - b for a, b in zip(k12, off))
            if grid.rule == WRAPAROUND:
                k2 = tuple(int(x % n) for x, n in zip(k2, eps.shape))
            return SubadditivityReport(False, (off, k2, k12), float(eps[where] - total[where]))
    return SubadditivityReport(True)


def periodic_hull_d1(profile, n: int, check: bool = True) -> SpectrumGrid:
    """Periodic extension ε(k) = f(dist(k, Z)) sampled at k = j/n.

    The profile must be increasing and concave on [0, 1/2] with f(0) >= 0;
    the samples are validated before use.
    """
    if n < 2:
        raise ValueError("need at least two grid points per period")
    t = np.arange(n // 2 + 1) / n
    f = np.asarray(profile(t), float)
    if check:
        if f[0] < 0:
            raise ValueError("profile must satisfy f(0) >= 0")
        df = np.diff(f)
        if np.any(df < -1e-15):
            raise ValueError("profile must be non-decreasing on [0, 1/2]")
        if np.any(np.diff(df) > 1e-12):
            raise ValueError("profile must be concave on [0, 1/2]")
    j = np.arange(n)
    return SpectrumGrid(f[np.minimum(j, n - j)], 1.0 / n, WRAPAROUND, (0,))


@dataclass
class SlopeReport:
    symmetry_defect: float
    omega_slope: float
    hull_slope: float
    slopes_equal: bool
    minimizer_value_equal: bool
    summation_gap: float
    linear_bound_ok: bool
    phonon_slope_omega: float
    phonon_slope_hull: float


def hull_slope_checks(omega: SpectrumGrid, hull: SpectrumGrid) -> SlopeReport:
    """On-grid slope properties of a hull of a radial dispersion.

    Reports the spread of hull values among points of equal radius, the
    grid minima of ω/|k| and ε/|k| (equal when the hull matches ω bitwise
    at the minimizer and the minima differ by no more than the rounding of
    a sum of equal parts), whether
    ε(k) <= c|k| with c the slope at the smallest radius, and the slopes at
    the smallest nonzero radius.
    """
    r = omega.radii()
    nz = (r > 0) & np.isfinite(omega.values)
    eps, om = hull.values[nz], omega.values[nz]
    rr = r[nz]
    defect = 0.0
    for q in np.unique(np.round(rr / omega.spacing, 9)):
        sel = np.isclose(rr / omega.spacing, q, rtol=0, atol=1e-9)
        defect = max(defect, float(np.ptp(eps[sel])))
    om_slope = float(np.min(om / rr))
    hull_slope = float(np.min(eps / rr))
    # at the minimizer of ω/|k| no decomposition can beat ω, so the hull equals ω bitwise there;
    # at its multiples the hull is a floating sum of equal terms, which may round one ulp low
    at = int(np.argmin(om / rr))
    value_equal = bool(eps[at] == om[at])
    parts = max(1.0, float(rr.max() / rr[at]))
    gap = om_slope - hull_slope
    equal = value_equal and gap <= 2 * parts * np.spacing(om_slope)
    rmin = rr.min()
    c0 = float(np.min(om[rr == rmin]) / rmin)
    return SlopeReport(defect, om_slope, hull_slope, equal, value_equal, gap,
                       bool(np.all(eps <= c0 * rr * (1 + 1e-12))),
                       c0, float(np.min(eps[rr == rmin]) / rmin))
