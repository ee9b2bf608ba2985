import pytest

from kerrdimer.hamiltonian import DimerParams, effective_from_full, mhz
from kerrdimer.rwa import rwa_validation, scaled_full_params


def test_scaled_parameters_reduce_to_target():
    target = DimerParams.device(j_ac=mhz(3.0))
    full = scaled_full_params(target, ratio=20.0)
    eff = effective_from_full(full)
    assert eff.j_ac == pytest.approx(target.j_ac, rel=1e-12)
    assert eff.v == pytest.approx(target.v)
    assert full.detuning == pytest.approx(20 * target.largest_rate)


def test_lab_model_matches_effective_model():
    report = rwa_validation()
    assert report.passed(0.05)
    assert report.rel_error_g2_ab < 0.05
    assert report.n_periods < 1e4
    assert report.effective.g2_ab == pytest.approx(report.full.g2_ab, rel=0.05)
