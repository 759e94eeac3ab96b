import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bosegas.model import BoxGeometry, Potential
from bosegas.oracle import (FockSpace, Reference, bijls_feynman, boost_and_periodicity, count_states,
                            f_sum_check, grand_canonical_check, green_matrix, green_symmetries,
                            ground_and_ies, inequality_toolkit, random_operator, rotation_identities,
                            structure_and_susceptibility, symmetry_breaking_run, twisted_boundary,
                            van_hove_formfactor, verify_bogoliubov_transform)
from bosegas.oracle.cnumber import ZeroModeSymbols
from bosegas.oracle.response import PoleProximityError, adjoint
from bosegas.oracle.suites import PRESETS, SUITES, run_suites
from bosegas.oracle.transform import TruncationError, coherent_occupation

POT = Potential("gaussian", 1.0, 1.0, 0.4, 1)
THREE = np.array([-1, 0, 1])


def interacting(modes=THREE, n_max=4, mu=0.1, pot=POT, L=2 * math.pi):
    space = FockSpace(modes, n_max, L)
    H = space.hamiltonian(pot, mu)
    return space, H, ground_and_ies(space, H)


# -- bases -------------------------------------------------------------------------


def test_dimension_counts():
    assert FockSpace(np.array([0]), 3).dimension == 4
    space = FockSpace(THREE, 2)
    assert space.sector((0,)).dimension == 4  # vac, 0, 0², (-1)(+1)
    assert space.sector((0,), particles=2).dimension == 2


@pytest.mark.parametrize("n_modes,cap", [(5, 4), (3, 6), (4, 3)])
def test_total_count_matches_enumeration(n_modes, cap):
    space = FockSpace(np.arange(n_modes) - n_modes // 2, cap)
    brute = sum(1 for occ in itertools.product(range(cap + 1), repeat=n_modes) if sum(occ) <= cap)
    assert space.dimension == brute == count_states(n_modes, cap)
    assert sum(space.sector(lab).dimension for lab in space.sector_labels()) == brute


def test_distinct_modes_and_size_limit():
    with pytest.raises(ValueError):
        FockSpace(np.array([0, 0]), 2)
    with pytest.raises(ValueError, match="exceeds"):
        FockSpace(np.arange(-6, 7), 12)


# -- Hamiltonian ------------------------------------------------------------------------


def test_free_hamiltonian_is_diagonal():
    space = FockSpace(THREE, 3)
    H = space.hamiltonian(None, mu=0.2).toarray()
    k2 = np.sum(space.momenta ** 2, axis=1) / 2
    assert np.allclose(H, np.diag(space.basis @ (k2 - 0.2)), atol=0)


def test_single_mode_closed_form():
    space = FockSpace(np.array([0]), 6, L=3.0)
    pot = Potential("gaussian", 2.5, 1.0, 1.0, 1)
    H = space.hamiltonian(pot, mu=0.3).toarray()
    n = np.arange(7)
    assert np.allclose(np.diag(H), 2.5 * n * (n - 1) / (2 * 3.0) - 0.3 * n, atol=1e-14)
    assert np.count_nonzero(H - np.diag(np.diag(H))) == 0


def _slow_apply(space, pot, mu, vec):
    """H - μN applied to a vector by walking every a*a*aa term on dict-keyed occupations."""
    k = space.momenta[:, 0]
    M = len(k)
    V = space.L
    out = {}
    for j, occ in enumerate(space.basis):
        amp0 = vec[j]
        if amp0 == 0:
            continue
        key = tuple(occ)
        out[key] = out.get(key, 0) + amp0 * sum(occ[i] * (k[i] ** 2 / 2 - mu) for i in range(M))
        for i1, i2, i3, i4 in itertools.product(range(M), repeat=4):
            if not math.isclose(k[i1] + k[i2], k[i3] + k[i4], abs_tol=1e-12):
                continue
            weight = float(pot.radial(abs(k[i2] - k[i3]))) / (2 * V)
            state = list(occ)
            amp = amp0
            for m in (i4, i3):
                amp *= math.sqrt(state[m])
                state[m] -= 1
                if state[m] < 0:
                    break
            else:
                for m in (i2, i1):
                    state[m] += 1
                    amp *= math.sqrt(state[m])
                key = tuple(state)
                out[key] = out.get(key, 0) + weight * amp
    res = np.zeros(space.dimension, complex)
    for key, val in out.items():
        res[space.index[key]] = val
    return res


def test_hamiltonian_against_term_by_term_application():
    rng = np.random.default_rng(2)
    space = FockSpace(THREE, 4)
    H = space.hamiltonian(POT, mu=0.3)
    for _ in range(3):
        psi = rng.standard_normal(space.dimension) + 1j * rng.standard_normal(space.dimension)
        assert np.allclose(H @ psi, _slow_apply(space, POT, 0.3, psi), atol=1e-12)
        slow = np.vdot(psi, _slow_apply(space, POT, 0.3, psi))
        assert np.vdot(psi, H @ psi) == pytest.approx(slow, abs=1e-10)


def test_field_needs_zero_mode():
    with pytest.raises(ValueError):
        FockSpace(np.array([-1, 1]), 2).hamiltonian(POT, nu=0.1)


# -- ground state and excitations --------------------------------------------------------


def test_free_gas_spectrum():
    space = FockSpace(THREE, 3)
    gs = ground_and_ies(space, space.hamiltonian(None, 0.0))
    assert gs.energy == 0.0
    # sector ±1 with one particle costs 1/2; sector 2 needs two particles at +1
    assert gs.sector_minima[(1,)] == pytest.approx(0.5)
    assert gs.sector_minima[(2,)] == pytest.approx(1.0)


@pytest.mark.parametrize("mu,coupling", [(0.1, 0.4), (0.3, 1.0), (0.05, 0.2)])
def test_zero_momentum_excitation_vanishes(mu, coupling):
    _, _, gs = interacting(mu=mu, pot=POT.scaled(coupling / POT.coupling))
    assert gs.sector_label == (0,)
    assert gs.sector_minima[(0,)] == 0.0
    assert all(v >= 0 for v in gs.sector_minima.values())


def test_grand_canonical_identity():
    space = FockSpace(THREE, 4)
    chk = grand_canonical_check(space, POT, 0.2)
    assert chk.difference < 1e-10


# -- f-sum, structure factor, Bijls ------------------------------------------------------


def test_fsum_identity_and_zero_momentum():
    space, H, gs = interacting()
    ref = Reference.from_ground(gs)
    assert f_sum_check(ref, 1).identity_residual < 1e-10
    zero = f_sum_check(ref, 0)
    assert abs(zero.identity_lhs) < 1e-10 and abs(zero.identity_rhs) < 1e-10


def test_free_gas_interior_fsum_and_schwarz_saturation():
    # all particles in mode 0 with modes -2..2: N_1 moves them to ±1, never to the edge
    space = FockSpace(np.arange(-2, 3), 3)
    H = space.hamiltonian(None, 0.0)
    psi = np.zeros(space.dimension, complex)
    psi[space.index[(0, 0, 3, 0, 0)]] = 1
    ref = Reference(space, H, 0.0, psi, *np.linalg.eigh(H.toarray()))
    fs = f_sum_check(ref, 1)
    assert fs.continuum_residual < 1e-10
    sr = structure_and_susceptibility(ref, 1)
    assert sr.s == pytest.approx(1.0) and sr.chi == pytest.approx(4.0)  # 4/k² at k = 1
    assert abs(sr.schwarz_slack_continuum) < 1e-12
    gs = ground_and_ies(space, H)
    bf = bijls_feynman(ref, gs, 1)
    assert bf.difference < 1e-8 and bf.rayleigh == pytest.approx(0.5)


def test_structure_factor_properties():
    space, H, gs = interacting(np.arange(-2, 3), 4)
    ref = Reference.from_ground(gs)
    plus, minus = structure_and_susceptibility(ref, 1), structure_and_susceptibility(ref, -1)
    assert plus.s == pytest.approx(minus.s, abs=1e-12)
    assert plus.schwarz_slack >= -1e-12
    assert plus.chi == pytest.approx(plus.chi_cg, rel=1e-8)
    with pytest.raises(ValueError):
        structure_and_susceptibility(ref, 0)


def test_bijls_bound_and_sector():
    space, H, gs = interacting()
    ref = Reference.from_ground(gs)
    rep = bijls_feynman(ref, gs, 1)
    assert rep.sector_ok
    assert rep.excitation <= rep.rayleigh + 1e-12


# -- toolkit --------------------------------------------------------------------------------


def test_inequalities_on_random_pairs():
    rng = np.random.default_rng(4)
    space, H, gs = interacting(np.arange(-2, 2), 4)
    ref = Reference.from_ground(gs)
    for _ in range(6):
        A = random_operator(space, rng)
        B = random_operator(space, rng, hermitian=True)
        rep = inequality_toolkit(ref, A, B)
        assert rep.min_slack >= -1e-10, rep.slacks
        assert rep.toz_residual < 1e-10


def test_anticommutator_schwarz_equality_for_equal_operators():
    rng = np.random.default_rng(8)
    space, H, gs = interacting()
    A = random_operator(space, rng)
    rep = inequality_toolkit(Reference.from_ground(gs), A, A)
    assert abs(rep.slacks["anticommutator_schwarz"]) < 1e-9


def test_wagner_pair():
    space, H, gs = interacting()
    ref = Reference.from_ground(gs)
    ik, imk = space.find_mode(1), space.find_mode(-1)
    A = adjoint(space.annihilator(ik) - adjoint(space.annihilator(imk)))
    Nk, _ = space.density(1)
    rep = inequality_toolkit(ref, A, Nk)
    assert rep.slacks["wagner_bound"] >= -1e-10


# -- symmetry-breaking field -------------------------------------------------------------------


def test_field_off_and_translation():
    study = symmetry_breaking_run(POT, THREE, 4, 2 * math.pi, 0.1, [0.0, 0.3], 1)
    off, on = study.rows
    assert abs(off.a0) < 1e-12
    assert abs(on.a0) > 0 and on.reality_defect < 1e-10
    assert max(off.translation_defect, on.translation_defect) < 1e-12


def test_bogoliubov_slack_on_schedule():
    study = symmetry_breaking_run(POT, THREE, 4, 2 * math.pi, 0.1, [0.5, 0.2, 0.1], 1)
    assert study.min_slack >= -1e-9
    with pytest.raises(ValueError):
        symmetry_breaking_run(POT, THREE, 4, 2 * math.pi, 0.1, [-0.1], 1)


# -- Green's functions and form factor ---------------------------------------------------------------


def test_green_symmetries():
    space, H, gs = interacting()
    ref = Reference.from_ground(gs)
    rep = green_symmetries(ref, 0.3 + 0.2j, 1)
    assert max(rep.reality, rep.conjugation, rep.reflection, rep.inversion) < 1e-10


def test_free_green_pole():
    space = FockSpace(THREE, 2)
    mu = -0.25
    H = space.hamiltonian(None, mu)
    ref = Reference.global_ground(space, H)
    pole = 0.5 - mu
    g = [green_matrix(ref, pole + h, 1).G11 for h in (1e-3, -1e-3)]
    # residue 1: G11 ≈ 1/(pole - z) up to sign convention, symmetric around the pole
    assert abs(g[0] * 1e-3) == pytest.approx(1.0, rel=1e-9) and g[0] == pytest.approx(-g[1], rel=1e-9)
    with pytest.raises(PoleProximityError):
        green_matrix(ref, pole, 1)


def test_form_factor_moments():
    space, H, gs = interacting()
    ref = Reference.from_ground(gs)
    for eta in (0.02, 0.1):
        ff = van_hove_formfactor(ref, 1, eta=eta)
        assert abs(ff.weight_sum - ff.s_direct) < 1e-10
        assert abs(ff.first_moment - ff.fsum_moment) < 1e-10
    eps = gs.sector_minima[(1,)]
    ff = van_hove_formfactor(ref, 1, eta=1e-3)
    assert np.all(ff.energies >= eps - 1e-12)
    below = ff.omega < eps - 3 * ff.eta
    assert np.max(ff.values[below], initial=0.0) < ff.weights.sum() / (math.pi * 9 * ff.eta) * 1.01
    with pytest.raises(ValueError):
        van_hove_formfactor(ref, 1, eta=-1.0)


# -- boost and twist -------------------------------------------------------------------------------


def test_free_boost_is_exact():
    rep = boost_and_periodicity(None, 3, 2)
    assert rep.compared > 0 and rep.max_mismatch < 1e-12


def test_single_particle_boost():
    rep = boost_and_periodicity(POT, 3, 1)
    assert rep.max_mismatch < 1e-12


def test_interacting_boost_mismatch_decreases():
    small = boost_and_periodicity(POT, 2, 2, sectors=[0])
    large = boost_and_periodicity(POT, 4, 2, sectors=[0])
    assert large.max_mismatch <= small.max_mismatch + 1e-14


def test_twist():
    assert twisted_boundary(POT, THREE, 2, 2 * math.pi, 0.0).min_slack == pytest.approx(0.0, abs=1e-12)
    free = twisted_boundary(None, THREE, 1, 2 * math.pi, 0.7)
    assert free.min_slack == pytest.approx(0.0, abs=1e-14)
    assert twisted_boundary(POT, THREE, 3, 2 * math.pi, math.pi / 2).min_slack >= -1e-12
    with pytest.raises(ValueError):
        twisted_boundary(None, THREE, 1, 1.0, 4.0)


# -- transformations -----------------------------------------------------------------------------


def test_identity_rotation_and_coherent_occupation():
    rep = rotation_identities(0.0)
    assert rep.identity_at_zero < 1e-13 and rep.rotation < 1e-13
    assert coherent_occupation(1.0) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=5, deadline=None)
@given(r=st.floats(0.01, 0.4), phase=st.floats(0, 2 * math.pi))
def test_rotation_identities(r, phase):
    rep = rotation_identities(r * np.exp(1j * phase))
    # the dense exponential on a 24-boson cutoff leaks ~1e-10 into the audited block at |θ| ~ 0.4
    assert max(rep.rotation, rep.number, rep.pair_creation, rep.pair_annihilation, rep.displacement) < 1e-8


def test_transform_truncation_refusal():
    geo = BoxGeometry(1, 2 * math.pi, 1, False)
    with pytest.raises(TruncationError, match="need n_cut"):
        verify_bogoliubov_transform(POT, geo, 0.8, np.full(3, 0.3), mu=0.1, n_cut=6)


# -- zero-mode symbols and suites ------------------------------------------------------------------


def test_symbols_bracket_the_exact_ground_state():
    sym = ZeroModeSymbols(POT, THREE, 4, 2 * math.pi, 0.1)
    _, _, gs = interacting(n_max=12)  # cap high enough not to raise E
    alphas = np.linspace(0, 3, 151)
    wick = min(sym.lowest(sym.wick_matrix(a)) for a in alphas)
    anti = min(sym.lowest(sym.anti_wick_matrix(a)) for a in alphas)
    assert anti <= gs.energy <= wick
    with pytest.raises(ValueError):
        ZeroModeSymbols(POT, np.array([-1, 1]), 3, 1.0, 0.1)


@pytest.mark.parametrize("preset", ["tiny-d1", "three-mode-d1"])
def test_every_suite_passes_hard_checks(preset):
    checks = run_suites(PRESETS[preset], SUITES, seed=1)
    failed = [c for c in checks if c.hard and not c.passed]
    assert not failed, [(c.suite, c.name, c.value) for c in failed]


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suites(PRESETS["tiny-d1"], ["nope"])
