import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bosegas.model import (BoxGeometry, CouplingParams, Potential, PotentialRangeError, fourier_coefficient,
                           momentum_grid, periodized_potential, tabulate)


def test_unit_gaussian_at_origin():
    pot = Potential.gaussian_position(1.0, 1.0, 1)
    assert float(pot.radial(0.0)) == pytest.approx(math.sqrt(2 * math.pi), abs=1e-7)


def test_position_value_roundtrip():
    pot = Potential.gaussian_position(1.0, 1.0, 1)
    assert pot.position_value(0.7) == pytest.approx(math.exp(-0.49 / 2), rel=1e-10)
    assert pot.v_at_origin() == pytest.approx(1.0, rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(kind=st.sampled_from(["gaussian", "constant-band"]), d=st.integers(1, 3),
       k=st.lists(st.floats(-20, 20, allow_nan=False), min_size=1, max_size=3))
def test_evenness(kind, d, k):
    pot = Potential(kind, 1.3, 0.8, 0.7, d)
    vec = np.zeros((1, d))
    vec[0, :min(d, len(k))] = k[:d]
    assert fourier_coefficient(pot, vec)[0] == fourier_coefficient(pot, -vec)[0]


def test_tabulated_matches_gaussian():
    pot = Potential("gaussian", 1.0, 1.0, 1.0, 3)
    tab = tabulate(pot, np.linspace(0, 12, 12001))
    r = np.linspace(0, 11.9, 777)
    assert np.max(np.abs(tab.radial(r) - pot.radial(r))) < 1e-8


def test_tabulated_range_error():
    tab = tabulate(Potential("gaussian", 1.0, 1.0, 1.0, 1), np.linspace(0, 5, 50))
    with pytest.raises(PotentialRangeError):
        tab.radial(6.0)


def test_table_from_file(tmp_path):
    r = np.linspace(0, 10, 2001)
    path = tmp_path / "v.csv"
    np.savetxt(path, np.column_stack([r, np.exp(-r ** 2 / 2)]), delimiter=",")
    pot = Potential.from_table(path, 3)
    assert float(pot.radial(1.0)) == pytest.approx(math.exp(-0.5), abs=1e-7)


def test_bad_potentials():
    with pytest.raises(ValueError):
        Potential("yukawa")
    with pytest.raises(ValueError):
        Potential("gaussian", width=0.0)
    with pytest.raises(ValueError):
        Potential("gaussian", d=4)


def test_periodized_single_term():
    pot = Potential("gaussian", 2.0, 1.0, 1.0, 1)
    geo = BoxGeometry(1, 3.0, 0)
    assert periodized_potential(pot, geo, 0.4) == pytest.approx(2.0 / 3.0, rel=1e-15)


def test_periodized_real_and_image_sum():
    pot = Potential.gaussian_position(1.0, 1.0, 1)
    geo = BoxGeometry(1, 20.0, 200)
    val = periodized_potential(pot, geo, 1.0)
    assert abs(val.imag) < 1e-14
    images = sum(math.exp(-(1.0 + n * 20.0) ** 2 / 2) for n in range(-5, 6))
    assert val.real == pytest.approx(images, abs=1e-6)


def test_mode_sets():
    assert momentum_grid(BoxGeometry(1, 2 * math.pi, 1)).ravel().tolist() == [-1.0, 0.0, 1.0]
    assert len(BoxGeometry(2, 1.0, 1).integer_modes()) == 9
    assert len(BoxGeometry(2, 1.0, 1, include_zero=False).integer_modes()) == 8
    assert len(BoxGeometry(3, 1.0, 2, ball=True).integer_modes()) == 33


@settings(max_examples=30, deadline=None)
@given(d=st.integers(1, 3), K=st.integers(0, 3), zero=st.booleans(), ball=st.booleans())
def test_mode_set_closed_under_negation(d, K, zero, ball):
    m = BoxGeometry(d, 2.0, K, zero, ball).integer_modes()
    assert {tuple(x) for x in m} == {tuple(-x) for x in m}


def test_geometry_validation():
    with pytest.raises(ValueError):
        BoxGeometry(1, -1.0, 2)
    with pytest.raises(ValueError):
        BoxGeometry(1, 1.0, -1)
    assert BoxGeometry(3, 2.0, 1).volume == 8.0


def test_coupling_params():
    CouplingParams(1.0, 0.1, 0.2)
    for bad in [dict(mu=-1.0), dict(nu=float("nan")), dict(kappa=float("inf"))]:
        with pytest.raises(ValueError):
            CouplingParams(**bad)


def test_scaled_and_repulsive():
    pot = Potential("constant-band", 1.0, 2.0, 1.0, 2)
    assert pot.scaled(0.25).v0_hat == 0.25
    with pytest.raises(ValueError):
        pot.check_repulsive(np.array([[3.0, 0.0]]))
