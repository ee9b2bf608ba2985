import json

import pytest

from kerrdimer.config import ConfigError, SweepConfig, config_from_dict, load_config
from kerrdimer.hamiltonian import mhz


def test_defaults_are_device_values():
    c = SweepConfig()
    assert c.dimer.u_a == pytest.approx(mhz(-3.1))
    assert c.dimer.v == pytest.approx(mhz(-7.0))
    assert c.dimer.delta_a == 0 and c.dimer.delta_b == 0
    assert 0.76 in c.omega_mhz
    assert c.j_ac_mhz[0] == 0 and c.j_ac_mhz[-1] == 40
    assert c.n_max == 5 and c.n_phases == 8


def test_empty_file_equals_defaults(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{}")
    assert load_config(p) == SweepConfig()
    assert load_config() == SweepConfig()


def test_round_trip_through_dict():
    c = SweepConfig(j_ac_mhz=(0.0, 5.0), omega_mhz=(1.0,), n_max=4, seed=12)
    assert config_from_dict(json.loads(json.dumps(c.to_dict()))) == c


def test_provenance_ignores_workers_and_out():
    a = SweepConfig(workers=1, out="x")
    b = SweepConfig(workers=3, out="y")
    assert a.provenance() == b.provenance()
    assert a.provenance() != SweepConfig(seed=1).provenance()


def test_overrides():
    c = load_config(None, {"n_max": 7, "seed": None, "workers": 2})
    assert c.n_max == 7 and c.workers == 2 and c.seed == 0


@pytest.mark.parametrize("data", [
    {"grid": {"j_ac_mhz": []}},
    {"grid": {"omega_mhz": [1.0, 0.5]}},
    {"grid": {"j_ac_mhz": [-1.0, 2.0]}},
    {"grid": {"j_ac_mhz": "0 1 2"}},
    {"n_max": 2},
    {"n_max": 4.5},
    {"n_phases": 0},
    {"seed": -1},
    {"seed": 2**64},
    {"truncation_tol": 0},
    {"schema_version": 2},
    {"bogus": 1},
    {"dimer": {"kappa_a": -1.0}},
    {"dimer": {"w": 1.0}},
    {"dimer": {"v": "big"}},
    {"circuit": {"c_j": 0}},
    {"spectrum": {"probe": "c"}},
    {"randomized_phases": 1},
])
def test_invalid_configs(data):
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_unreadable_files(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(None, {"n_max": 1})


def test_zero_decay_is_accepted():
    c = config_from_dict({"dimer": {"kappa_a": 0.0, "kappa_b": 0.0}})
    assert c.dimer.kappa_a == 0
