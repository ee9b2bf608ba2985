import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.constants import e, h

from kerrdimer.circuit import (
    CircuitParams,
    FluxDivergenceError,
    NoSignChangeError,
    NonPositiveDefiniteError,
    _eigenfrequencies,
    bare_frequencies,
    floating_network_modes,
    hopping_components,
    j_dc,
    josephson_inductance,
    normal_modes,
    zero_coupling_flux,
)

P = CircuitParams()
GHZ = 1 / (2 * math.pi)


def test_josephson_inductance_at_zero_flux():
    oracle = (h / (2 * e) / (2 * math.pi)) ** 2 / (h * 80e9) * 1e9
    assert P.l_j0 == pytest.approx(oracle, rel=1e-12)
    assert P.l_j0 == pytest.approx(2.04, abs=0.01)
    assert josephson_inductance(P, 0.0) == pytest.approx(0.3 + oracle, rel=1e-12)


def test_josephson_inductance_periodic_and_divergent():
    assert josephson_inductance(P, 1.0) == pytest.approx(josephson_inductance(P, 0.0), rel=1e-12)
    with pytest.raises(FluxDivergenceError):
        josephson_inductance(P, 0.5)


def test_invalid_elements():
    with pytest.raises(ValueError):
        CircuitParams(c_j=0.0)
    with pytest.raises(ValueError):
        CircuitParams(l_a=-1.0)
    with pytest.raises(NonPositiveDefiniteError):
        _eigenfrequencies(np.eye(2), -np.eye(2))


def test_decoupled_limit():
    wa, wb = normal_modes(P, -0.37, coupler=False)
    oracle = sorted(1 / math.sqrt(l * 1e-9 * c * 1e-15) / 1e9 for l, c in ((1.9, 260), (1.9, 300)))
    assert [wa, wb] == pytest.approx(oracle, rel=1e-12)


def test_modes_at_operating_point():
    wm, wp = normal_modes(P, -0.37)
    assert wm * GHZ == pytest.approx(6.802, rel=0.05)
    assert wp * GHZ == pytest.approx(7.164, rel=0.05)
    # frozen model output
    assert wm * GHZ == pytest.approx(6.735813193227455, rel=1e-9)
    assert wp * GHZ == pytest.approx(7.12010795517178, rel=1e-9)


def test_floating_variant_agrees_with_grounded_reduction():
    assert floating_network_modes(P, -0.37) == pytest.approx(normal_modes(P, -0.37), rel=1e-3)


def test_minimum_splitting_near_operating_point():
    flux = np.linspace(-0.49, 0.0, 4901)
    split = [np.diff(normal_modes(P, f))[0] for f in flux]
    assert flux[np.argmin(split)] == pytest.approx(-0.37, abs=0.03)


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.49, 0.49))
def test_modes_even_periodic_and_ordered(f):
    w = np.array(normal_modes(P, f))
    assert np.allclose(w, normal_modes(P, -f), rtol=1e-9)
    assert np.allclose(w, normal_modes(P, f + 1.0), rtol=1e-9)
    assert w[1] >= w[0] > 0


def test_zero_coupling_flux_matches_sweep_root():
    star = zero_coupling_flux(P)
    assert star == pytest.approx(-0.37, abs=0.03)
    flux = np.linspace(-0.49, 0.0, 4901)
    vals = np.array([j_dc(P, f) for f in flux])
    i = np.nonzero(np.diff(np.sign(vals)))[0]
    assert len(i) == 1
    assert star == pytest.approx(0.5 * (flux[i[0]] + flux[i[0] + 1]), abs=1e-4)
    assert abs(j_dc(P, star)) < 2 * math.pi * 0.01
    assert j_dc(P, star - 0.01) * j_dc(P, star + 0.01) < 0


def test_mirror_root():
    assert zero_coupling_flux(P, interval=(0.0, 0.5)) == pytest.approx(-zero_coupling_flux(P), abs=1e-4)


def test_no_sign_change():
    with pytest.raises(NoSignChangeError):
        zero_coupling_flux(P, interval=(-0.1, 0.0))


def test_hopping_range_at_zero_flux():
    jdc = j_dc(P, 0.0) * GHZ
    assert 0.5 <= abs(jdc) <= 1.0
    assert jdc == pytest.approx(-0.8054868166907604, rel=1e-9)
    j_c, j_l = hopping_components(P, 0.0)
    assert j_c > 0 and j_l > 0


def test_larger_shunt_capacitance_moves_zero_toward_zero_flux():
    # more capacitive coupling needs a stiffer (less flux-suppressed) inductive branch
    star = zero_coupling_flux(P)
    doubled = zero_coupling_flux(P.replace(c_j=2 * P.c_j))
    assert abs(doubled) < abs(star)
    assert doubled == pytest.approx(-0.1946, abs=1e-3)


def test_splitting_at_crossing_is_twice_hopping():
    # equal bare frequencies: splitting equals 2|J| to leading order
    p = P.replace(c_b=P.c_a)
    wa, wb = bare_frequencies(p, 0.0)
    assert wa == pytest.approx(wb, rel=1e-12)
    wm, wp = normal_modes(p, 0.0)
    assert wp - wm == pytest.approx(2 * abs(j_dc(p, 0.0)), rel=0.1)
