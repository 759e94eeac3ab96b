"""Squeezed-state (improved Bogoliubov) variational problem.

A trial state is fixed by the condensate amplitude α and pair amplitudes
s_k with s_k = s_{-k}, c_k = sqrt(1 + |s_k|²). The pair parameters
S_k = 2 s_k c_k and C_k = c_k² + |s_k|² satisfy C_k² - |S_k|² = 1.

Finite boxes use lattice sums with 1/V; the thermodynamic solver replaces
(1/V)Σ_k by (2π)^{-d}∫dk on a radial quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .bogoliubov import dispersion_bg
from .model import BoxGeometry, Potential, fourier_coefficient, momentum_grid
from .numerics import RadialQuadrature, damped_fixed_point
from .subadditive import SpectrumGrid, subadditive_hull


REFINE_ROUNDS = 4


class HfbIterationError(RuntimeError):
    """The fixed-point map left the physical branch f > |g|."""


# ---------------------------------------------------------------------------
# finite-box state and coefficients


@dataclass
class BoxSystem:
    """Momentum grid plus the potential matrices used by every lattice sum."""

    potential: Potential
    geometry: BoxGeometry
    momenta: np.ndarray = field(init=False)
    kinetic: np.ndarray = field(init=False)
    vk: np.ndarray = field(init=False)
    vdiff: np.ndarray = field(init=False)
    v0: float = field(init=False)
    partner: np.ndarray = field(init=False)
    zero: int = field(init=False)

    def __post_init__(self):
        full = BoxGeometry(self.geometry.d, self.geometry.L, self.geometry.K, True, self.geometry.ball)
        self.momenta = momentum_grid(full)
        self.kinetic = 0.5 * np.sum(self.momenta ** 2, axis=1)
        self.vk = fourier_coefficient(self.potential, self.momenta)
        diff = self.momenta[:, None, :] - self.momenta[None, :, :]
        self.vdiff = fourier_coefficient(self.potential, diff.reshape(-1, full.d)).reshape(len(self.momenta), -1)
        self.v0 = float(fourier_coefficient(self.potential, np.zeros((1, full.d)))[0])
        m = full.integer_modes()
        index = {tuple(x): i for i, x in enumerate(m)}
        self.partner = np.array([index[tuple(-x)] for x in m])
        self.zero = index[(0,) * full.d]

    @property
    def volume(self) -> float:
        return self.geometry.volume

    @property
    def rotate_zero(self) -> bool:
        return self.geometry.include_zero

    def symmetrize(self, s) -> np.ndarray:
        """Copy each value from the representative of its ±k pair."""
        s = np.asarray(s, dtype=complex).copy()
        rep = np.minimum(np.arange(len(s)), self.partner)
        s = s[rep]
        if not self.rotate_zero:
            s[self.zero] = 0
        return s


@dataclass
class HfbState:
    """Condensate amplitude and pair amplitudes on the full momentum grid."""

    system: BoxSystem
    alpha: complex
    s: np.ndarray

    def __post_init__(self):
        self.s = self.system.symmetrize(self.s)
        self.alpha = complex(self.alpha)

    @classmethod
    def from_pair_parameters(cls, system: BoxSystem, alpha: complex, S) -> "HfbState":
        """Build from S_k, taking the branch C_k = +sqrt(1 + |S_k|²)."""
        S = np.asarray(S, dtype=complex)
        C = np.sqrt(1 + np.abs(S) ** 2)
        s_abs = np.abs(S) / np.sqrt(2 * (C + 1))  # C - 1 cancels for small |S|
        phase = np.where(np.abs(S) > 0, S / np.where(np.abs(S) > 0, np.abs(S), 1), 1)
        return cls(system, alpha, phase * s_abs)

    @property
    def c(self) -> np.ndarray:
        return np.sqrt(1 + np.abs(self.s) ** 2)

    @property
    def S(self) -> np.ndarray:
        return 2 * self.s * self.c

    @property
    def C(self) -> np.ndarray:
        return self.c ** 2 + np.abs(self.s) ** 2

    @property
    def tau(self) -> float:
        return float(np.angle(self.alpha)) if self.alpha != 0 else 0.0


def energy_B_raw(system: BoxSystem, alpha: complex, s: np.ndarray, mu: float) -> float:
    """Expectation of H - μN in the squeezed state, for any pair vector s."""
    V = system.volume
    s = np.asarray(s, complex)
    c = np.sqrt(1 + np.abs(s) ** 2)
    a2 = abs(alpha) ** 2
    n = np.abs(s) ** 2
    cs = c * s
    val = -mu * a2 + system.v0 * a2 ** 2 / (2 * V)
    val += np.sum((system.kinetic - mu + (system.vk + system.v0) * a2 / V) * n)
    val -= np.sum(system.vk / (2 * V) * (np.conj(alpha) ** 2 * cs + alpha ** 2 * np.conj(cs)))
    val += np.conj(cs) @ system.vdiff @ cs / (2 * V)
    val += n @ (system.v0 + system.vdiff) @ n / (2 * V)
    return float(np.real(val))


def energy_B(state: HfbState, mu: float) -> float:
    return energy_B_raw(state.system, state.alpha, state.s, mu)


def coefficients_f_g(state: HfbState, mu: float | None = None):
    """(f_k, g_k). With μ given the μ-form is used, otherwise μ is eliminated."""
    sy, V = state.system, state.system.volume
    a = state.alpha
    if mu is None:
        mu = chemical_potential_of_state(state)
    n = np.abs(state.s) ** 2
    cs = state.c * state.s
    f = sy.kinetic - mu + abs(a) ** 2 * (sy.v0 + sy.vk) / V + (sy.vdiff + sy.v0) @ n / V
    g = a ** 2 * sy.vk / V - sy.vdiff @ cs / V
    return np.real(f), g


def coefficients_f_g_pair_form(state: HfbState):
    """(f_k, g_k) in terms of (C, S) with μ eliminated, α² kept."""
    sy, V = state.system, state.system.volume
    a = state.alpha
    e2 = np.exp(2j * state.tau)
    C, S = state.C, state.S
    f = sy.kinetic + abs(a) ** 2 * sy.vk / V + (sy.vdiff - sy.vk[None, :]) @ (C - 1) / (2 * V) \
        + e2 * np.sum(sy.vk * np.conj(S)) / (2 * V)
    g = a ** 2 * sy.vk / V - sy.vdiff @ S / (2 * V)
    return f, g


def chemical_potential_of_state(state: HfbState) -> float:
    """μ at which ∂_α B vanishes for the given (α, S)."""
    if state.alpha == 0:
        raise ValueError("μ cannot be eliminated at α = 0; use the μ-form coefficients")
    sy, V = state.system, state.system.volume
    e2 = np.exp(2j * state.tau)
    mu = sy.v0 * abs(state.alpha) ** 2 / V + np.sum((sy.v0 + sy.vk) * (state.C - 1)) / (2 * V) \
        - e2 * np.sum(sy.vk * np.conj(state.S)) / (2 * V)
    return float(np.real(mu))


def density_of_state(state: HfbState) -> float:
    return float((abs(state.alpha) ** 2 + np.sum(state.C - 1) / 2) / state.system.volume)


@dataclass
class QuasiparticleCoefficients:
    D: np.ndarray
    O: np.ndarray
    D_pair_form: np.ndarray
    O_pair_form: np.ndarray


def coefficients_D_O(state: HfbState, f, g) -> QuasiparticleCoefficients:
    """Diagonal and anomalous coefficients of the rotated quadratic part."""
    c, s = state.c, state.s
    D = f * (c ** 2 + np.abs(s) ** 2) - c * (s * np.conj(g) + np.conj(s) * g)
    O = -2 * c * s * f + s ** 2 * np.conj(g) + c ** 2 * g
    C, S = state.C, state.S
    return QuasiparticleCoefficients(np.real(D), O, np.real(C * f - S * np.conj(g)), -S * f + C * g)


@dataclass
class Gradients:
    d_alpha: complex
    d_alpha_bar: complex
    d_s: np.ndarray
    d_s_bar: np.ndarray
    linear: complex


def gradients_B(state: HfbState, mu: float) -> Gradients:
    """Wirtinger derivatives of B, each s_k an independent variable.

    Also returns the linear coefficient C = c_0 ∂_ᾱB - s_0 ∂_αB of the
    rotated Hamiltonian.
    """
    sy, V = state.system, state.system.volume
    a, s, c = state.alpha, state.s, state.c
    n = np.abs(s) ** 2
    common = -mu + sy.v0 * abs(a) ** 2 / V + np.sum((sy.v0 + sy.vk) * n) / V
    d_a = common * np.conj(a) - np.sum(sy.vk * np.conj(s) * c) / V * a
    d_ab = np.conj(d_a)
    f, g = coefficients_f_g(state, mu)
    d_s = f * np.conj(s) - 0.5 * np.conj(g) * (c + n / (2 * c)) - g * np.conj(s) ** 2 / (4 * c)
    d_sb = np.conj(d_s)
    z = sy.zero
    linear = c[z] * d_ab - s[z] * d_a
    return Gradients(d_a, d_ab, d_s, d_sb, linear)


def linear_coefficient(state: HfbState, mu: float) -> complex:
    """C from its explicit expression (independent of the gradient code)."""
    sy, V = state.system, state.system.volume
    a, s, c = state.alpha, state.s, state.c
    z = sy.zero
    n = np.abs(s) ** 2
    first = (sy.v0 * abs(a) ** 2 / V - mu + np.sum((sy.v0 + sy.vk) * n) / V) * (a * c[z] - np.conj(a) * s[z])
    second = np.sum(sy.vk / V * (a * s[z] * c * np.conj(s) - np.conj(a) * c[z] * c * s))
    return complex(first + second)


def zero_mode_hessian(state: HfbState, mu: float) -> np.ndarray:
    """[[∂_ᾱ∂_α B, ∂_ᾱ² B], [∂_α² B, ∂_α∂_ᾱ B]] = [[f_0, g_0], [ḡ_0, f_0]]."""
    f, g = coefficients_f_g(state, mu)
    z = state.system.zero
    return np.array([[f[z], g[z]], [np.conj(g[z]), f[z]]], dtype=complex)


def gap_squared(state: HfbState) -> complex:
    """D(0)² = 4 (v̂(0)/V) α² Σ_k v̂(k) S̄_k/(2V), complex if negative."""
    sy, V = state.system, state.system.volume
    return complex(4 * sy.v0 / V * state.alpha ** 2 * np.sum(sy.vk * np.conj(state.S)) / (2 * V))


@dataclass
class StationarityReport:
    linear_residual: float
    max_O: float
    grad_alpha: float
    grad_s: float
    hessian: np.ndarray
    hessian_psd: bool
    gap_squared: complex
    gap: float
    constraint_defect: float
    imag_S: float


@dataclass
class BoxSolution:
    state: HfbState
    mu: float
    B: float
    D: np.ndarray
    f: np.ndarray
    g: np.ndarray
    report: StationarityReport
    converged: bool
    iterations: int
    trace: list
    rho: float


def stationarity_report(state: HfbState, mu: float) -> StationarityReport:
    f, g = coefficients_f_g(state, mu)
    q = coefficients_D_O(state, f, g)
    grads = gradients_B(state, mu)
    rotated = np.ones(len(state.s), bool)
    if not state.system.rotate_zero:
        rotated[state.system.zero] = False
    hess = zero_mode_hessian(state, mu)
    eig = np.linalg.eigvalsh(hess)
    scale = max(1.0, float(np.max(np.abs(hess))))
    d2 = gap_squared(state)
    gap = math.copysign(math.sqrt(max(d2.real, 0.0)), f[state.system.zero]) if d2.real >= 0 else float("nan")
    return StationarityReport(
        abs(linear_coefficient(state, mu)),
        float(np.max(np.abs(q.O[rotated]))) if rotated.any() else 0.0,
        abs(grads.d_alpha),
        float(np.max(np.abs(grads.d_s[rotated]))) if rotated.any() else 0.0,
        hess, bool(eig.min() >= -1e-12 * scale), d2, gap,
        float(np.max(np.abs(state.C ** 2 - np.abs(state.S) ** 2 - 1))),
        float(np.max(np.abs(state.S.imag))) if abs(state.tau) < 1e-15 else 0.0,
    )


def _pair_update(f, g, where):
    """S = g/D, D = sqrt(f² - |g|²), on the physical branch only."""
    bad = np.flatnonzero((f <= 0) & where)
    if bad.size:
        raise HfbIterationError(f"f_k <= 0 at grid index {bad[0]}")
    rad = f * f - np.abs(g) ** 2
    bad = np.flatnonzero((rad < 0) & where)
    if bad.size:
        raise HfbIterationError(f"f_k² < |g_k|² at grid index {bad[0]}")
    D = np.sqrt(np.where(where, rad, 1.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        S = np.where(where, g / D, 0)
    S[where & (D == 0)] = np.inf
    return S, D


def _require_finite(S):
    bad = np.flatnonzero(~np.isfinite(S))
    if bad.size:
        raise HfbIterationError(f"S is infinite at grid index {bad[0]} (D = 0 in the previous sweep); "
                                "the iteration cannot continue")


def solve_finite_box(potential: Potential, geometry: BoxGeometry, *, kappa: float | None = None,
                     mu: float | None = None, tau: float = 0.0, damping: float = 0.5,
                     tol: float = 1e-12, max_iter: int = 5000, initial_S=None) -> BoxSolution:
    """Damped fixed-point iteration S <- g/D starting from S = 0.

    Exactly one of ``kappa`` (condensate density, μ recovered afterwards)
    and ``mu`` (|α| re-solved every sweep) must be given. The zero mode is
    rotated only when ``geometry.include_zero`` is set; in that case the
    second sweep meets D(0) = 0 and raises.
    """
    if (kappa is None) == (mu is None):
        raise ValueError("give exactly one of kappa and mu")
    sy = BoxSystem(potential, geometry)
    V = sy.volume
    rotated = np.ones(len(sy.momenta), bool)
    if not sy.rotate_zero:
        rotated[sy.zero] = False
    phase = np.exp(1j * tau)

    def alpha_of(S):
        if kappa is not None:
            return math.sqrt(kappa * V) * phase
        C = np.sqrt(1 + np.abs(S) ** 2)
        rhs = mu - np.sum((sy.v0 + sy.vk) * (C - 1)) / (2 * V) \
            + np.real(np.exp(2j * tau) * np.sum(sy.vk * np.conj(S))) / (2 * V)
        if rhs <= 0:
            raise HfbIterationError("no condensate amplitude solves the μ equation")
        return math.sqrt(rhs * V / sy.v0) * phase

    def step(S):
        _require_finite(S)
        st = HfbState.from_pair_parameters(sy, alpha_of(S), S)
        f, g = coefficients_f_g_pair_form(st)
        S_new, _ = _pair_update(np.real(f), g, rotated)
        return sy.symmetrize(np.where(rotated, S_new, 0))

    S0 = np.zeros(len(sy.momenta), complex) if initial_S is None else sy.symmetrize(initial_S)
    res = damped_fixed_point(step, S0, damping, tol, max_iter)
    iterations, trace = res.iterations, list(res.trace)
    step_tol = tol
    # the update norm is in units of S; tighten it until the energy-scale residuals meet tol too
    for _ in range(REFINE_ROUNDS):
        state = HfbState.from_pair_parameters(sy, alpha_of(res.x), res.x)
        mu_val = chemical_potential_of_state(state) if mu is None else mu
        report = stationarity_report(state, mu_val)
        worst = max(report.linear_residual, report.max_O, report.grad_alpha, report.grad_s)
        if not res.converged or worst <= tol or iterations >= max_iter:
            break
        step_tol /= 10
        more = damped_fixed_point(step, res.x, damping, step_tol, max_iter - iterations)
        iterations += more.iterations
        trace += list(more.trace)
        if not more.converged:
            break  # roundoff floor reached; keep the tol-converged state
        res = more
    state = HfbState.from_pair_parameters(sy, alpha_of(res.x), res.x)
    mu_val = chemical_potential_of_state(state) if mu is None else mu
    report = stationarity_report(state, mu_val)
    f, g = coefficients_f_g(state, mu_val)
    q = coefficients_D_O(state, f, g)
    return BoxSolution(state, mu_val, energy_B(state, mu_val), q.D, f, np.asarray(g),
                       report, res.converged, iterations, np.asarray(trace), density_of_state(state))


@dataclass
class IterationRecord:
    S: np.ndarray
    D: np.ndarray
    f: np.ndarray
    g: np.ndarray


def iterate_finite_box(potential: Potential, geometry: BoxGeometry, kappa: float, sweeps: int,
                       tau: float = 0.0) -> list[IterationRecord]:
    """Undamped sweeps from S = 0, recording every intermediate D(k).

    With the zero mode rotated the first sweep gives D(0) = 0, so the
    second sweep raises ``HfbIterationError``.
    """
    sy = BoxSystem(potential, geometry)
    rotated = np.ones(len(sy.momenta), bool)
    if not sy.rotate_zero:
        rotated[sy.zero] = False
    alpha = math.sqrt(kappa * sy.volume) * np.exp(1j * tau)
    S = np.zeros(len(sy.momenta), complex)
    out = []
    for _ in range(sweeps):
        _require_finite(S)
        st = HfbState.from_pair_parameters(sy, alpha, S)
        f, g = coefficients_f_g_pair_form(st)
        S, D = _pair_update(np.real(f), g, rotated)
        out.append(IterationRecord(S.copy(), np.where(rotated, D, np.nan), np.real(f), g))
    return out


# ---------------------------------------------------------------------------
# thermodynamic limit


def angular_kernel(potential: Potential, targets, nodes, d: int, n_angle: int = 96) -> np.ndarray:
    """K[i, j] = average of v̂(|k_i - k'|) over directions of k' with |k'| = nodes[j].

    In d = 1 the "average" is (v̂(k - k') + v̂(k + k'))/2. The gaussian kind
    uses the closed form in d = 3.
    """
    k = np.asarray(targets, float)[:, None]
    q = np.asarray(nodes, float)[None, :]
    if d == 1:
        return 0.5 * (potential.radial(np.abs(k - q)) + potential.radial(k + q))
    if d == 3 and potential.kind == "gaussian":
        w2 = potential.width ** 2
        x = k * q * w2
        amp = potential.coupling * potential.strength
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(x > 1e-12, -np.expm1(-2 * x) / (2 * np.where(x > 1e-12, x, 1)), 1 - x)
        return amp * np.exp(-0.5 * (k - q) ** 2 * w2) * ratio
    t, w = np.polynomial.legendre.leggauss(n_angle)
    if d == 3:
        u = t
        weights = 0.5 * w
    else:
        u = np.cos(np.pi * (t + 1) / 2)
        weights = 0.5 * w
    dist = np.sqrt(np.maximum(k[..., None] ** 2 + q[..., None] ** 2 - 2 * k[..., None] * q[..., None] * u, 0))
    return np.sum(potential.radial(dist) * weights, axis=-1)


@dataclass
class ContinuumSystem:
    potential: Potential
    quad: RadialQuadrature
    nodes: np.ndarray = field(init=False)
    weights: np.ndarray = field(init=False)
    vk: np.ndarray = field(init=False)
    kernel: np.ndarray = field(init=False)
    v0: float = field(init=False)

    def __post_init__(self):
        self.nodes, self.weights = self.quad.nodes_weights()
        self.vk = self.potential.radial(self.nodes)
        self.kernel = angular_kernel(self.potential, self.nodes, self.nodes, self.quad.d)
        self.v0 = float(self.potential.radial(0.0))

    @property
    def norm(self) -> float:
        return (2 * math.pi) ** self.quad.d

    def integral(self, values) -> complex:
        """(2π)^{-d} ∫ values dk over the quadrature nodes."""
        return np.sum(self.weights * values) / self.norm

    def f_g(self, kappa: float, S, tau: float = 0.0, targets=None):
        """Continuum (f_k, g_k) at the nodes or at extra target radii."""
        C = np.sqrt(1 + np.abs(S) ** 2)
        e2 = np.exp(2j * tau)
        if targets is None:
            k, K, vk = self.nodes, self.kernel, self.vk
        else:
            k = np.asarray(targets, float)
            K = angular_kernel(self.potential, k, self.nodes, self.quad.d)
            vk = self.potential.radial(k)
        w = self.weights / (2 * self.norm)
        f = 0.5 * k ** 2 + kappa * vk + (K - self.vk[None, :]) @ (w * (C - 1)) \
            + e2 * np.sum(w * self.vk * np.conj(S))
        g = kappa * e2 * vk - K @ (w * S)
        return np.real(f), g

    def mu(self, kappa: float, S, tau: float = 0.0) -> float:
        C = np.sqrt(1 + np.abs(S) ** 2)
        e2 = np.exp(2j * tau)
        w = self.weights / (2 * self.norm)
        return float(np.real(self.v0 * kappa + np.sum(w * (self.v0 + self.vk) * (C - 1))
                             - e2 * np.sum(w * self.vk * np.conj(S))))

    def gap_integral(self, S) -> complex:
        """(1/(2(2π)^d)) ∫ v̂(k) S̄_k dk."""
        return np.sum(self.weights * self.vk * np.conj(S)) / (2 * self.norm)


@dataclass
class ContinuumSolution:
    system: ContinuumSystem
    kappa: float
    tau: float
    S: np.ndarray
    D: np.ndarray
    f: np.ndarray
    g: np.ndarray
    mu: float
    gap: float
    gap_squared_formula: float
    gap_squared_direct: float
    gap_history: list
    converged: bool
    iterations: int
    trace: list

    @property
    def C(self):
        return np.sqrt(1 + np.abs(self.S) ** 2)

    @property
    def density(self) -> float:
        return self.kappa + float(np.real(self.system.integral((self.C - 1) / 2)))


def _continuum_step(sys_: ContinuumSystem, kappa, tau):
    def step(S):
        _require_finite(S)
        f, g = sys_.f_g(kappa, S, tau)
        S_new, _ = _pair_update(f, g, np.ones(len(f), bool))
        return S_new
    return step


def solve_thermodynamic(potential: Potential, d: int, kappa: float, quad: RadialQuadrature | None = None,
                        damping: float = 0.5, tol: float = 1e-12, max_iter: int = 2000,
                        iterations: int | None = None, tau: float = 0.0) -> ContinuumSolution:
    """Continuum fixed point at condensate density κ.

    With ``iterations = n`` exactly n undamped sweeps are made from S = 0;
    the returned f, g, D are those of sweep n (sweep 1 is the Bogoliubov
    solution) and S is the pair profile they produce. Otherwise the damped
    iteration runs to ``tol``. D(0)² is evaluated both as f_0² - |g_0|² and
    as 4 v̂(0) κ ∫v̂ S̄/(2(2π)^d) with S extended to a refined rule.
    """
    if d == 1 and (iterations is None or iterations > 1):
        raise ValueError("d = 1 integrals diverge beyond the first sweep; see d1_divergence")
    quad = quad or RadialQuadrature(d)
    sys_ = ContinuumSystem(potential, quad)
    step = _continuum_step(sys_, kappa, tau)
    zero = np.zeros(len(sys_.nodes), complex)
    history = []
    if iterations is not None:
        profiles = [zero]
        trace = []
        for _ in range(iterations):
            used, before = profiles[-1], profiles[-2] if len(profiles) > 1 else None
            history.append(_gap_pair(sys_, kappa, used, before, tau)[0])
            profiles.append(step(used))
            trace.append(float(np.max(np.abs(profiles[-1] - used))))
        used = profiles[-2]
        before = profiles[-3] if len(profiles) > 2 else None
        S, converged, its = profiles[-1], False, iterations
    else:
        res = damped_fixed_point(step, zero, damping, tol, max_iter)
        S, converged, its, trace = res.x, res.converged, res.iterations, res.trace
        used = before = S
    f, g = sys_.f_g(kappa, used, tau)
    D = np.sqrt(np.maximum(f * f - np.abs(g) ** 2, 0))
    direct, formula = _gap_pair(sys_, kappa, used, before, tau)
    if iterations is None:
        history.append(direct)
    gap = math.sqrt(direct) if direct >= 0 else float("nan")
    return ContinuumSolution(sys_, kappa, tau, S, D, f, g, sys_.mu(kappa, used, tau), gap, formula, direct,
                             history, converged, its, trace)


def nystrom_profile(sys_: ContinuumSystem, kappa: float, S_before, radii, tau: float = 0.0) -> np.ndarray:
    """Evaluate step(S_before) = g/D at arbitrary radii."""
    f, g = sys_.f_g(kappa, S_before, tau, targets=radii)
    return g / np.sqrt(f * f - np.abs(g) ** 2)


def _gap_pair(sys_: ContinuumSystem, kappa, used, before, tau):
    """D(0)² from f_0² - |g_0|² (profile ``used``) and from the closed form.

    The closed form integrates v̂ S̄ on the refined rule, with S = ``used``
    regenerated there from ``before`` (None means ``used`` vanishes).
    """
    f0, g0 = sys_.f_g(kappa, used, tau, targets=[0.0])
    direct = float(f0[0] ** 2 - abs(g0[0]) ** 2)
    if before is None:
        return direct, 0.0
    k, w = sys_.quad.refined().nodes_weights()
    S_fine = nystrom_profile(sys_, kappa, before, k, tau)
    integral = np.sum(w * sys_.potential.radial(k) * np.conj(S_fine)) / (2 * sys_.norm)
    formula = float(np.real(4 * sys_.v0 * kappa * np.exp(2j * tau) * integral))
    return direct, formula


def continuum_energy_density(solution: ContinuumSolution) -> float:
    """B/V + μρ for a continuum solution: the energy density at density ρ."""
    sy = solution.system
    k, w = sy.nodes, sy.weights / sy.norm
    S, C = solution.S, solution.C
    kappa, mu = solution.kappa, solution.mu
    n = (C - 1) / 2
    cs = S / 2
    e2 = np.exp(2j * solution.tau)
    vk = sy.vk
    val = -mu * kappa + sy.v0 * kappa ** 2 / 2
    val += np.sum(w * (0.5 * k ** 2 - mu + (vk + sy.v0) * kappa) * n)
    val -= kappa * np.sum(w * vk * np.real(np.conj(e2) * cs))
    val += 0.5 * np.conj(w * cs) @ sy.kernel @ (w * cs)
    val += 0.5 * sy.v0 * np.sum(w * n) ** 2 + 0.5 * (w * n) @ sy.kernel @ (w * n)
    return float(np.real(val)) + mu * solution.density


# ---------------------------------------------------------------------------
# bounds, sandwich, sound speed and parameter maps


def _lattice_origin_value(potential: Potential, d: int, L: float, tol: float = 1e-16) -> float:
    """(1/V) Σ over all m in Z^d of v̂(2πm/L), summed until the outer shell is negligible."""
    K, prev = 4, None
    while True:
        m = BoxGeometry(d, L, K).integer_modes()
        vals = potential.radial(2 * math.pi / L * np.sqrt(np.sum(m * m, axis=1)))
        shell = np.max(np.abs(m), axis=1) == K
        total = float(vals.sum()) / L ** d
        if float(np.abs(vals[shell]).sum()) / L ** d < tol * max(1.0, abs(total)) or K > 4096:
            return total
        K *= 2


def lower_bound_energy(potential: Potential, volume: float, mu: float | None = None,
                       n: float | None = None, box: BoxGeometry | None = None) -> float:
    """Rigorous lower bound on the ground energy.

    With ``n`` the canonical bound v̂(0)n²/(2V) - v(0)n/2 is returned, with
    ``mu`` the grand-canonical bound -V(v(0)/2 + μ)²/(2v̂(0)). For a
    periodic box (``box`` given) v(0) is the periodized value
    (1/V)Σ_m v̂(2πm/L) over the whole lattice.
    """
    if (mu is None) == (n is None):
        raise ValueError("give exactly one of mu and n")
    v0_hat = float(potential.radial(0.0))
    if v0_hat <= 0:
        raise ValueError("the bound needs v̂(0) > 0")
    if potential.kind == "constant-band" or potential.kind == "gaussian":
        nonneg = potential.strength * potential.coupling >= 0
    else:
        nonneg = bool(np.all(np.asarray(potential.table_v) >= 0)) and potential.coupling >= 0
    if not nonneg:
        raise ValueError("the bound needs v̂ >= 0")
    if box is not None:
        v_origin = _lattice_origin_value(potential, box.d, box.L)
        volume = box.volume
    else:
        v_origin = potential.v_at_origin()
    if not math.isfinite(v_origin):
        raise ValueError("the bound needs v(0) finite")
    if n is not None:
        if n < 0:
            raise ValueError("particle number must be non-negative")
        return v0_hat * n * n / (2 * volume) - v_origin * n / 2
    return -volume * (0.5 * v_origin + mu) ** 2 / (2 * v0_hat)


@dataclass
class SandwichResult:
    anti_wick: float
    wick: float
    c_number: float
    alpha_wick: float
    alpha_anti_wick: float
    alpha_c_number: float


def _scan_min(fun, hi: float, points: int = 41):
    grid = np.linspace(0.0, hi, points)
    vals = [fun(a) for a in grid]
    i = int(np.argmin(vals))
    lo, up = grid[max(i - 1, 0)], grid[min(i + 1, points - 1)]
    if up <= lo:
        return float(vals[i]), float(grid[i])
    res = minimize_scalar(fun, bounds=(lo, up), method="bounded", options={"xatol": 1e-10})
    if res.fun < vals[i]:
        return float(res.fun), float(res.x)
    return float(vals[i]), float(grid[i])


def c_number_sandwich(potential: Potential, mu: float, geometry: BoxGeometry, n_max: int,
                      alpha_max: float | None = None) -> SandwichResult:
    """Infima of the zero-mode symbols over real α >= 0.

    ``wick`` is the minimum of -μα² + v̂(0)α⁴/(2V) (the coherent condensate
    with empty excited modes, an upper bound on the ground energy).
    ``c_number`` minimizes the lowest eigenvalue of H(α), the Hamiltonian
    with a_0 replaced by α, also an upper bound. ``anti_wick`` minimizes the
    lowest eigenvalue of the anti-Wick symbol, a lower bound. The excited
    modes live on the capped Fock space of the nonzero box modes.
    """
    from .oracle.cnumber import ZeroModeSymbols

    V = geometry.volume
    v0 = float(potential.radial(0.0))
    modes = BoxGeometry(geometry.d, geometry.L, geometry.K, True, geometry.ball).integer_modes()
    sym = ZeroModeSymbols(potential, modes, n_max, geometry.L, mu)
    quartic = lambda a: -mu * a * a + v0 * a ** 4 / (2 * V)
    a_w = math.sqrt(max(mu, 0.0) * V / v0)
    hi = alpha_max or 2.0 * max(a_w, 1.0) + 2.0
    res = minimize_scalar(quartic, bounds=(0.0, hi), method="bounded", options={"xatol": 1e-12})
    wick = min(quartic(a_w), float(res.fun))
    c_num, a_c = _scan_min(lambda a: sym.lowest(sym.wick_matrix(a)), hi)
    anti, a_a = _scan_min(lambda a: sym.lowest(sym.anti_wick_matrix(a)), hi)
    return SandwichResult(anti, wick, c_num, a_w, a_a, a_c)


@dataclass
class SoundSpeed:
    value: complex
    error: float
    stable: bool
    second_derivative: float
    rho: float


def speed_of_sound(rho, energy_density) -> SoundSpeed:
    """c_s = sqrt(ρ e''(ρ)) at the central sample of an evenly spaced curve.

    e'' is the second central difference with the finest spacing; the error
    is its difference from the estimate at doubled spacing. A negative e''
    returns an imaginary c_s with ``stable`` false.
    """
    rho = np.asarray(rho, float)
    e = np.asarray(energy_density, float)
    if rho.size < 5 or rho.size != e.size:
        raise ValueError("need at least five matching density samples")
    h = np.diff(rho)
    if np.any(h <= 0) or np.max(np.abs(h - h[0])) > 1e-9 * abs(h[0]):
        raise ValueError("density samples must be evenly spaced and increasing")
    h = h[0]
    m = rho.size // 2
    fine = (e[m + 1] - 2 * e[m] + e[m - 1]) / h ** 2
    coarse = (e[m + 2] - 2 * e[m] + e[m - 2]) / (4 * h * h)
    r = rho[m]
    c = complex(np.sqrt(complex(r * fine)))
    c_coarse = complex(np.sqrt(complex(r * coarse)))
    return SoundSpeed(c if fine < 0 else c.real, abs(c - c_coarse), bool(fine >= 0), float(fine), float(r))


def kappa_for_mu(potential: Potential, d: int, mu: float, quad: RadialQuadrature | None = None,
                 tol: float = 1e-12, damping: float = 0.5, xtol: float = 1e-13) -> tuple[float, ContinuumSolution]:
    """Condensate density whose converged continuum solution has chemical potential μ."""
    if mu <= 0:
        raise ValueError("μ must be positive")
    quad = quad or RadialQuadrature(d)
    v0 = float(potential.radial(0.0))
    cache = {}

    def solve(kappa):
        if kappa not in cache:
            cache[kappa] = solve_thermodynamic(potential, d, kappa, quad, damping, tol)
        return cache[kappa]

    def resid(kappa):
        return solve(kappa).mu - mu

    lo, hi = 0.25 * mu / v0, mu / v0
    for _ in range(60):
        if resid(hi) > 0:
            break
        lo, hi = hi, 2 * hi
    for _ in range(60):
        if resid(lo) < 0:
            break
        lo *= 0.5
    kappa = brentq(resid, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)
    return kappa, solve(kappa)


def hfb_energy_density(potential: Potential, d: int, rho: float, quad: RadialQuadrature | None = None,
                       tol: float = 1e-12) -> tuple[float, ContinuumSolution]:
    """Energy density e(ρ) of the converged continuum solution with total density ρ."""
    quad = quad or RadialQuadrature(d)
    cache = {}

    def solve(kappa):
        if kappa not in cache:
            cache[kappa] = solve_thermodynamic(potential, d, kappa, quad, tol=tol)
        return cache[kappa]

    hi = rho
    lo = 0.5 * rho
    while solve(lo).density > rho:
        lo *= 0.5
    kappa = brentq(lambda x: solve(x).density - rho, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    sol = solve(kappa)
    return continuum_energy_density(sol), sol


@dataclass
class DivergenceRow:
    eta: float
    depletion: float
    gap_integral: float


@dataclass
class DivergenceReport:
    mu: float
    rows: list
    depletion_growth: list
    gap_growth: list
    depletion_prefactor: float
    gap_prefactor: float

    @property
    def worst_relative_error(self) -> float:
        dev = [abs(g / (2 * math.log(10) * self.depletion_prefactor) - 1) for g in self.depletion_growth]
        dev += [abs(g / (2 * math.log(10) * self.gap_prefactor) - 1) for g in self.gap_growth]
        return max(dev)


def d1_divergence(potential: Potential, mu: float, etas, k_max: float = 12.0) -> DivergenceReport:
    """Growth of the d = 1 depletion and second-sweep gap integral as the inner cutoff shrinks.

    The first sweep at κ = μ/v̂(0) gives S_k ≈ sqrt(μ)/|k| for small |k|, so
    both (2π)^{-1}∫|s_k|² dk and (2(2π))^{-1}∫v̂ S̄ dk grow by
    2 ln 10 · sqrt(μ)/(4π) and 2 ln 10 · v̂(0) sqrt(μ)/(4π) per decade.
    """
    from .bogoliubov import depletion_density

    if potential.d != 1:
        raise ValueError("the divergence study is for d = 1")
    v0 = float(potential.radial(0.0))
    kappa = mu / v0
    rows = []
    for eta in sorted(etas, reverse=True):
        quad = RadialQuadrature(1, eta=eta, k_max=k_max, graded_panels=48)
        dep = depletion_density(potential, mu, quad=quad).value
        sys_ = ContinuumSystem(potential, quad)
        first = _continuum_step(sys_, kappa, 0.0)(np.zeros(len(sys_.nodes), complex))
        rows.append(DivergenceRow(eta, dep, float(np.real(sys_.gap_integral(first)))))
    dec = [math.log10(a.eta / b.eta) for a, b in zip(rows, rows[1:])]
    dg = [(b.depletion - a.depletion) / t for a, b, t in zip(rows, rows[1:], dec)]
    gg = [(b.gap_integral - a.gap_integral) / t for a, b, t in zip(rows, rows[1:], dec)]
    return DivergenceReport(mu, rows, dg, gg, math.sqrt(mu) / (4 * math.pi), v0 * math.sqrt(mu) / (4 * math.pi))


@dataclass
class UpperBoundTable:
    momenta: np.ndarray
    B: float
    D: np.ndarray
    bound: np.ndarray
    hull: np.ndarray | None


def excitation_upper_bounds(solution: BoxSolution, hull: bool = False) -> UpperBoundTable:
    """B + D(k) on the box grid, and B + hull(D) when ``hull`` is set.

    The zero mode, when not rotated, gets D(0) = 0 in the hull input since
    adding a condensate particle costs no excitation energy there.
    """
    sy = solution.state.system
    D = np.asarray(solution.D, float).copy()
    hull_vals = None
    if hull:
        geo = sy.geometry
        full = BoxGeometry(geo.d, geo.L, geo.K, True, geo.ball)
        m = full.integer_modes()
        arr = np.full((2 * geo.K + 1,) * geo.d, np.inf)
        vals = np.maximum(D, 0.0)
        if not sy.rotate_zero:
            vals[sy.zero] = 0.0
        for mi, v in zip(m, vals):
            arr[tuple(mi + geo.K)] = v
        grid = SpectrumGrid(arr, geo.spacing, origin=(geo.K,) * geo.d)
        h = subadditive_hull(grid).grid.values
        hull_vals = np.array([h[tuple(mi + geo.K)] for mi in m]) + solution.B
    return UpperBoundTable(sy.momenta, solution.B, D, solution.B + D, hull_vals)


@dataclass
class MultiStartReport:
    solutions: list
    max_B_spread: float
    max_S_spread: float


def multistart_finite_box(potential: Potential, geometry: BoxGeometry, seeds=(0, 1, 2), scale: float = 0.3,
                          **kwargs) -> MultiStartReport:
    """Solve from S = 0 (first seed) and from random real profiles; report disagreement."""
    sy = BoxSystem(potential, geometry)
    sols = []
    for i, seed in enumerate(seeds):
        init = None
        if i:
            init = scale * np.random.default_rng(seed).random(len(sy.momenta))
        sols.append(solve_finite_box(potential, geometry, initial_S=init, **kwargs))
    Bs = [s.B for s in sols]
    Ss = [s.state.S for s in sols]
    spread = max(float(np.max(np.abs(a - b))) for a in Ss for b in Ss)
    return MultiStartReport(sols, max(Bs) - min(Bs), spread)


def bogoliubov_deviation(potential: Potential, d: int, mu: float, quad: RadialQuadrature | None = None,
                         k_cut: float | None = None) -> float:
    """max_k |D(k) - ω_bg,μ(k)| for the converged continuum solution at chemical potential μ."""
    _, sol = kappa_for_mu(potential, d, mu, quad)
    k = sol.system.nodes
    sel = np.ones(len(k), bool) if k_cut is None else k <= k_cut
    omega = dispersion_bg(potential, k[sel], mu=mu)
    return float(np.max(np.abs(sol.D[sel] - omega)))
