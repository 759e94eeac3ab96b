import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bosegas import hfb
from bosegas.bogoliubov import dispersion_bg
from bosegas.model import BoxGeometry, Potential
from bosegas.numerics import RadialQuadrature
from bosegas.oracle import verify_bogoliubov_transform

D1 = Potential("gaussian", 1.0, 1.0, 0.8, 1)
WIDE = Potential("constant-band", 1.0, 1e6, 1.0, 1)


def zero_state(geo, pot=D1, alpha=0.0):
    sy = hfb.BoxSystem(pot, geo)
    return hfb.HfbState(sy, alpha, np.zeros(len(sy.momenta), complex))


def random_state(rng, geo, pot=D1, scale=0.3):
    sy = hfb.BoxSystem(pot, geo)
    n = len(sy.momenta)
    s = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return hfb.HfbState(sy, complex(rng.uniform(0.3, 1.5), rng.uniform(-0.5, 0.5)), s)


GEO = BoxGeometry(1, 2 * math.pi, 3, False)


# -- energy and coefficients ----------------------------------------------------


def test_vacuum_and_coherent_energy():
    assert hfb.energy_B(zero_state(GEO), 0.7) == 0.0
    mu = 0.7
    a = math.sqrt(mu * GEO.volume / D1.v0_hat)
    assert hfb.energy_B(zero_state(GEO, alpha=a), mu) == pytest.approx(-GEO.volume * mu ** 2 / (2 * D1.v0_hat))


def test_energy_matches_exponentiated_transform():
    rng = np.random.default_rng(3)
    geo = BoxGeometry(1, 2 * math.pi, 1, False)
    theta = 0.2 * rng.standard_normal(3) * np.exp(1j * rng.uniform(0, 6, 3))
    rep = verify_bogoliubov_transform(D1, geo, 0.6 + 0.1j, theta, mu=0.4, n_cut=24, identities=False)
    assert rep.B_error < 1e-8
    assert rep.D_error < 1e-8


def test_first_sweep_coefficients():
    kappa, tau = 0.4, 0.3
    geo = BoxGeometry(1, 2 * math.pi, 3, False)
    st_ = zero_state(geo, alpha=math.sqrt(kappa * geo.volume) * np.exp(1j * tau))
    f, g = hfb.coefficients_f_g_pair_form(st_)
    k = st_.system.momenta[:, 0]
    vk = D1.radial(np.abs(k))
    assert np.allclose(np.real(f), k * k / 2 + kappa * vk, atol=1e-14)
    assert np.allclose(g, kappa * vk * np.exp(2j * tau), atol=1e-14)
    q = hfb.coefficients_D_O(st_, *hfb.coefficients_f_g(st_, hfb.chemical_potential_of_state(st_)))
    f2, g2 = hfb.coefficients_f_g(st_, hfb.chemical_potential_of_state(st_))
    assert np.allclose(q.D, f2) and np.allclose(q.O, g2)


def test_free_coefficients():
    free = Potential("gaussian", 1.0, 1.0, 0.0, 1)
    st_ = zero_state(GEO, free)
    f, g = hfb.coefficients_f_g(st_, 0.3)
    k = st_.system.momenta[:, 0]
    assert np.allclose(f, k * k / 2 - 0.3) and np.all(g == 0)


def test_sqrt3_example():
    # κ = 1, v̂ ≡ 1 on the grid, k² = 2: f = 2, g = 1, D = √3
    geo = BoxGeometry(1, 2 * math.pi / math.sqrt(2), 1, False)
    st_ = zero_state(geo, WIDE, alpha=math.sqrt(geo.volume))
    f, g = hfb.coefficients_f_g_pair_form(st_)
    f = np.real(f)
    i = int(np.argmax(st_.system.momenta[:, 0]))
    assert f[i] == pytest.approx(2.0) and abs(g[i]) == pytest.approx(1.0)
    # Bogoliubov point: S <- g/D, C <- f/D with D = sqrt(f² - |g|²)
    rad = f * f - np.abs(g) ** 2
    pair = np.divide(g, np.sqrt(rad), out=np.zeros_like(g), where=rad > 0)  # the zero mode has D = 0
    bog = hfb.HfbState.from_pair_parameters(st_.system, st_.alpha, pair)
    q = hfb.coefficients_D_O(bog, f, g)
    assert q.D[i] == pytest.approx(math.sqrt(3), abs=1e-7)
    assert np.allclose(q.D, q.D_pair_form, atol=1e-12) and np.allclose(q.O, q.O_pair_form, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_f_is_real_and_forms_agree(seed):
    rng = np.random.default_rng(seed)
    st_ = random_state(rng, BoxGeometry(2, 5.0, 1, False), Potential("gaussian", 1.0, 1.0, 0.6, 2))
    mu = hfb.chemical_potential_of_state(st_)
    f, g = hfb.coefficients_f_g(st_, mu)
    fp, gp = hfb.coefficients_f_g_pair_form(st_)
    assert np.max(np.abs(np.imag(f))) < 1e-14
    assert np.allclose(f, np.real(fp), atol=1e-12) and np.allclose(g, gp, atol=1e-12)
    # the reduced D, O forms need s_k ḡ_k real: align each s_k with g_k and compare with frozen f, g
    aligned = hfb.HfbState(st_.system, st_.alpha, np.abs(st_.s) * np.exp(1j * np.angle(g)))
    q = hfb.coefficients_D_O(aligned, f, g)
    assert np.allclose(q.D, q.D_pair_form, atol=1e-12) and np.allclose(q.O, q.O_pair_form, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_pair_parameters_roundtrip(seed):
    rng = np.random.default_rng(seed)
    sy = hfb.BoxSystem(D1, GEO)
    S = sy.symmetrize(10.0 ** rng.uniform(-9, 1, len(sy.momenta)) * np.exp(1j * rng.uniform(0, 6, len(sy.momenta))))
    S[sy.zero] = 0
    back = hfb.HfbState.from_pair_parameters(sy, 1.0, S).S
    keep = np.abs(S) > 0
    assert np.max(np.abs(back - S)[keep] / np.abs(S)[keep]) < 1e-14


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_constraint_and_symmetry(seed):
    st_ = random_state(np.random.default_rng(seed), BoxGeometry(1, 4.0, 3, True), scale=2.0)
    assert np.max(np.abs(st_.C ** 2 - np.abs(st_.S) ** 2 - 1)) < 1e-12 * np.max(st_.C ** 2)
    assert np.array_equal(st_.s, st_.s[st_.system.partner])


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), phase=st.floats(0, 2 * math.pi))
def test_gauge_invariance(seed, phase):
    """α -> e^{iφ}α, s -> e^{2iφ}s leaves B, D and |O| unchanged."""
    st_ = random_state(np.random.default_rng(seed), GEO)
    rot = hfb.HfbState(st_.system, st_.alpha * np.exp(1j * phase), st_.s * np.exp(2j * phase))
    mu = 0.5
    assert hfb.energy_B(rot, mu) == pytest.approx(hfb.energy_B(st_, mu), abs=1e-12)
    q1 = hfb.coefficients_D_O(st_, *hfb.coefficients_f_g(st_, mu))
    q2 = hfb.coefficients_D_O(rot, *hfb.coefficients_f_g(rot, mu))
    assert np.allclose(q1.D, q2.D, atol=1e-12) and np.allclose(np.abs(q1.O), np.abs(q2.O), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), lam=st.floats(0.1, 2.0))
def test_coupling_scale_covariance(seed, lam):
    """B is affine in λ: B(λ) = B_kin + λ B_int."""
    rng = np.random.default_rng(seed)
    st0 = random_state(rng, GEO, D1.scaled(0.0))
    mk = lambda c: hfb.HfbState(hfb.BoxSystem(D1.scaled(c), GEO), st0.alpha, st0.s)
    b0, b1, bl = (hfb.energy_B(mk(c), 0.4) for c in (0.0, 1.0, lam))
    assert bl == pytest.approx(b0 + lam * (b1 - b0), abs=1e-11)


# -- gradients -------------------------------------------------------------------


def test_linear_coefficient_with_unrotated_zero():
    st_ = random_state(np.random.default_rng(1), GEO)
    g = hfb.gradients_B(st_, 0.4)
    assert st_.s[st_.system.zero] == 0
    assert g.linear == pytest.approx(g.d_alpha_bar, abs=1e-15)


def test_gradients_vanish_at_fixed_point():
    sol = hfb.solve_finite_box(D1, BoxGeometry(1, 2 * math.pi, 2, False), mu=0.6)
    assert sol.converged
    g = hfb.gradients_B(sol.state, sol.mu)
    free = np.arange(len(g.d_s)) != sol.state.system.zero  # s_0 is held at zero
    assert abs(g.d_alpha) < 1e-12 and np.max(np.abs(g.d_s[free])) < 1e-12
    q = hfb.coefficients_D_O(sol.state, *hfb.coefficients_f_g(sol.state, sol.mu))
    assert np.allclose(q.D, q.D_pair_form, atol=1e-12) and np.allclose(q.O, q.O_pair_form, atol=1e-12)


# -- chemical potential and density ---------------------------------------------------


def test_chemical_potential_examples():
    st_ = zero_state(GEO, alpha=1.3)
    assert hfb.chemical_potential_of_state(st_) == pytest.approx(D1.v0_hat * 1.69 / GEO.volume)
    assert hfb.density_of_state(st_) == pytest.approx(1.69 / GEO.volume)


def test_chemical_potential_intensive():
    rng = np.random.default_rng(5)
    small = BoxGeometry(1, 2 * math.pi, 3, False)
    big = BoxGeometry(1, 4 * math.pi, 6, False)
    sy_s, sy_b = hfb.BoxSystem(D1, small), hfb.BoxSystem(D1, big)
    s = 0.2 * rng.standard_normal(len(sy_s.momenta))
    # the doubled box has every other mode at the small box momenta; the others carry S = 0
    s_big = np.zeros(len(sy_b.momenta))
    s_big[::2] = s
    kappa = 0.3
    mu_s = hfb.chemical_potential_of_state(hfb.HfbState(sy_s, math.sqrt(kappa * small.volume), s))
    mu_b = hfb.chemical_potential_of_state(hfb.HfbState(sy_b, math.sqrt(kappa * big.volume), s_big))
    # the zero-S modes add nothing, but the 1/V sums halve: compare with the doubled profile
    s_fill = np.repeat(s, 2)[: len(sy_b.momenta)]
    s_fill = sy_b.symmetrize(np.interp(sy_b.momenta[:, 0], sy_s.momenta[:, 0], s))
    mu_fill = hfb.chemical_potential_of_state(hfb.HfbState(sy_b, math.sqrt(kappa * big.volume), s_fill))
    assert mu_b != mu_s
    assert mu_fill == pytest.approx(mu_s, rel=0.05)


def test_extra_pair_with_zero_S_leaves_mu():
    rng = np.random.default_rng(9)
    g3, g4 = BoxGeometry(1, 2 * math.pi, 3, False), BoxGeometry(1, 2 * math.pi, 4, False)
    sy3, sy4 = hfb.BoxSystem(D1, g3), hfb.BoxSystem(D1, g4)
    s3 = 0.3 * rng.standard_normal(len(sy3.momenta))
    s4 = np.concatenate([[0.0], s3, [0.0]])
    a = 1.1
    assert hfb.chemical_potential_of_state(hfb.HfbState(sy4, a, s4)) == pytest.approx(
        hfb.chemical_potential_of_state(hfb.HfbState(sy3, a, s3)), abs=1e-14)


def test_density_is_minus_dB_dmu():
    geo = BoxGeometry(1, 2 * math.pi, 3, False)
    h = 1e-4
    mu = 0.5
    lo, mid, hi = (hfb.solve_finite_box(D1, geo, mu=m) for m in (mu - h, mu, mu + h))
    slope = -(hi.B - lo.B) / (2 * h)
    assert slope == pytest.approx(geo.volume * mid.rho, rel=1e-6)
    assert mid.rho >= abs(mid.state.alpha) ** 2 / geo.volume


# -- solvers ---------------------------------------------------------------------------


def test_rotated_zero_mode_stops_at_second_sweep():
    geo = BoxGeometry(1, 2 * math.pi, 2, True)
    first = hfb.iterate_finite_box(D1, geo, 0.5, 1)[0]
    assert first.D[hfb.BoxSystem(D1, geo).zero] == 0
    with pytest.raises(hfb.HfbIterationError, match="grid index"):
        hfb.iterate_finite_box(D1, geo, 0.5, 2)
    with pytest.raises(hfb.HfbIterationError):
        hfb.solve_finite_box(D1, geo, kappa=0.5)


def test_nine_mode_residuals():
    sol = hfb.solve_finite_box(D1, BoxGeometry(1, 2 * math.pi, 4, False), kappa=0.4)
    r = sol.report
    assert sol.converged and r.max_O <= 1e-8 and r.linear_residual <= 1e-8
    assert max(r.max_O, r.grad_s, r.grad_alpha, r.linear_residual) <= 1e-12


def test_solver_independent_of_damping():
    geo = BoxGeometry(1, 2 * math.pi, 2, False)
    sols = [hfb.solve_finite_box(D1, geo, mu=0.5, damping=g) for g in (0.3, 0.5, 0.8)]
    for s in sols[1:]:
        assert np.max(np.abs(s.state.S - sols[0].state.S)) < 1e-11
        assert s.B == pytest.approx(sols[0].B, abs=1e-12)


def test_solver_argument_errors():
    with pytest.raises(ValueError):
        hfb.solve_finite_box(D1, GEO)
    with pytest.raises(ValueError):
        hfb.solve_finite_box(D1, GEO, mu=0.1, kappa=0.1)


def test_multistart_agrees():
    rep = hfb.multistart_finite_box(D1, BoxGeometry(1, 2 * math.pi, 2, False), kappa=0.5)
    assert rep.max_B_spread < 1e-10 and rep.max_S_spread < 1e-8


def test_hessian_psd_iff_gap_nonnegative():
    rng = np.random.default_rng(11)
    for _ in range(40):
        st_ = random_state(rng, GEO, scale=0.8)
        mu = float(rng.uniform(-1, 1))
        rep = hfb.stationarity_report(st_, mu)
        f0 = hfb.coefficients_f_g(st_, mu)[0][st_.system.zero]
        f0g0 = f0 ** 2 - abs(hfb.coefficients_f_g(st_, mu)[1][st_.system.zero]) ** 2
        if abs(f0g0) < 1e-9:
            continue
        assert rep.hessian_psd == (f0 >= 0 and f0g0 >= 0)


# -- continuum -------------------------------------------------------------------------------


def test_continuum_first_sweep():
    pot = Potential("gaussian", 1.0, 1.0, 1.0, 3)
    sol = hfb.solve_thermodynamic(pot, 3, 0.5, iterations=1)
    k = sol.system.nodes
    omega = np.sqrt((k * k / 2) ** 2 + k * k * 0.5 * pot.radial(k))
    assert np.allclose(sol.D, omega, rtol=1e-12)
    # D(k) -> 0 at the origin, so relative agreement degrades near the first node
    assert np.allclose(sol.S, 0.5 * pot.radial(k) / omega, rtol=1e-6)


def test_continuum_d1_refuses_second_sweep():
    with pytest.raises(ValueError):
        hfb.solve_thermodynamic(D1, 1, 0.5, iterations=2)


def test_gap_positive_at_second_sweep_2d():
    pot = Potential("gaussian", 1.0, 1.0, 1.0, 2)
    sol = hfb.solve_thermodynamic(pot, 2, 1.0, iterations=2)
    assert sol.gap > 0
    assert sol.gap_squared_direct == pytest.approx(sol.gap_squared_formula, abs=1e-6)


def test_energy_density_is_consistent_with_mu():
    pot = Potential("gaussian", 1.0, 1.0, 0.5, 3)
    quad = RadialQuadrature(3, k_max=10.0)
    h = 1e-3
    e_lo, _ = hfb.hfb_energy_density(pot, 3, 0.5 - h, quad)
    e_hi, _ = hfb.hfb_energy_density(pot, 3, 0.5 + h, quad)
    _, mid = hfb.hfb_energy_density(pot, 3, 0.5, quad)
    assert (e_hi - e_lo) / (2 * h) == pytest.approx(mid.mu, rel=1e-6)


def test_kappa_for_mu_hits_target():
    pot = Potential("gaussian", 1.0, 1.0, 0.5, 3)
    kappa, sol = hfb.kappa_for_mu(pot, 3, 0.3, RadialQuadrature(3, k_max=10.0))
    assert sol.mu == pytest.approx(0.3, abs=1e-10)
    with pytest.raises(ValueError):
        hfb.kappa_for_mu(pot, 3, -1.0)


# -- bounds and sandwiches ----------------------------------------------------------------------


def test_upper_bound_table():
    sol = hfb.solve_finite_box(D1, BoxGeometry(1, 2 * math.pi, 3, False), mu=0.5)
    tab = hfb.excitation_upper_bounds(sol, hull=True)
    assert np.allclose(tab.bound - tab.B, tab.D, atol=0)
    assert np.all(tab.hull <= tab.bound + 1e-15)


def test_lower_bound_examples():
    # constant band of width 2π in d = 1: v̂(0) = 1 and v(0) = 2
    band = Potential("constant-band", 1.0, 2 * math.pi, 1.0, 1)
    assert band.v_at_origin() == pytest.approx(2.0)
    assert hfb.lower_bound_energy(band, 1.0, mu=1.0) == pytest.approx(-2.0)
    assert hfb.lower_bound_energy(band, 1.0, n=0) == 0.0
    with pytest.raises(ValueError):
        hfb.lower_bound_energy(band, 1.0)
    with pytest.raises(ValueError):
        hfb.lower_bound_energy(band, 1.0, mu=1.0, n=1)
    with pytest.raises(ValueError):
        hfb.lower_bound_energy(band.scaled(-1.0), 1.0, mu=1.0)


def test_canonical_bound_below_grand_canonical_family():
    geo = BoxGeometry(1, 2 * math.pi, 2, False)
    gc = hfb.lower_bound_energy(D1, geo.volume, mu=0.3, box=geo)
    canon = min(hfb.lower_bound_energy(D1, geo.volume, n=n, box=geo) - 0.3 * n for n in np.linspace(0, 20, 2001))
    assert gc <= canon + 1e-12


def test_sandwich_zero_mode_only():
    geo = BoxGeometry(1, 3.0, 0, False)
    mu = 0.4
    sw = hfb.c_number_sandwich(D1, mu, geo, 4)
    assert sw.wick == pytest.approx(-geo.volume * mu ** 2 / (2 * D1.v0_hat), rel=1e-12)
    assert sw.alpha_wick ** 2 == pytest.approx(mu * geo.volume / D1.v0_hat)
    assert sw.anti_wick <= sw.c_number <= sw.wick + 1e-12


def test_sandwich_ordering():
    sw = hfb.c_number_sandwich(D1, 0.1, BoxGeometry(1, 2 * math.pi, 1, False), 4)
    assert sw.anti_wick <= sw.c_number <= sw.wick + 1e-12


# -- sound speed ------------------------------------------------------------------------------------


def test_sound_speed_mean_field():
    v0 = 1.7
    rho = np.linspace(0.9, 1.1, 5)
    c = hfb.speed_of_sound(rho, v0 * rho ** 2 / 2)
    assert c.value == pytest.approx(math.sqrt(v0), rel=1e-10) and c.stable
    shifted = hfb.speed_of_sound(rho, v0 * rho ** 2 / 2 + 3.0)
    assert shifted.value == pytest.approx(c.value, rel=1e-9)


def test_sound_speed_unstable_and_bad_input():
    rho = np.linspace(0.9, 1.1, 5)
    c = hfb.speed_of_sound(rho, -rho ** 2)
    assert not c.stable and abs(c.value.imag) > 0
    with pytest.raises(ValueError):
        hfb.speed_of_sound(rho[:4], rho[:4])
    with pytest.raises(ValueError):
        hfb.speed_of_sound(np.array([0, 1, 2, 4, 5.0]), np.ones(5))


def _hfb_sound_gap(lam):
    pot = Potential("gaussian", 1.0, 1.0, lam, 3)
    quad = RadialQuadrature(3, k_max=10.0)
    rho0, h = 0.5, 0.01
    rho = rho0 + h * np.arange(-2, 3)
    vals = [hfb.hfb_energy_density(pot, 3, r, quad) for r in rho]
    c = hfb.speed_of_sound(rho, [v[0] for v in vals])
    return abs(c.value / math.sqrt(vals[2][1].mu) - 1)


@pytest.mark.slow
def test_sound_speed_weak_coupling_trend():
    assert _hfb_sound_gap(0.25) < _hfb_sound_gap(1.0)


def test_divergence_report():
    rep = hfb.d1_divergence(Potential("gaussian", 1.0, 1.0, 1.0, 1), 1.0, [1e-2, 1e-3, 1e-4])
    assert rep.worst_relative_error < 0.05
    with pytest.raises(ValueError):
        hfb.d1_divergence(Potential("gaussian", 1.0, 1.0, 1.0, 3), 1.0, [1e-2])


def test_bogoliubov_deviation_small_coupling():
    quad = RadialQuadrature(3, k_max=10.0)
    dev = hfb.bogoliubov_deviation(Potential("gaussian", 1.0, 1.0, 0.1, 3), 3, 0.2, quad)
    assert dev < 0.05
