import numpy as np
import pytest

from kerrdimer.config import SweepConfig
from kerrdimer.sweep import SweepResult, SweepRow


def synthetic_result(j, omega, field):
    """SweepResult whose g2 fields all equal ``field(J, Omega)``; no solves."""
    config = SweepConfig(j_ac_mhz=tuple(j), omega_mhz=tuple(omega))
    rows = []
    for x in config.j_ac_mhz:
        for y in config.omega_mhz:
            v = float(field(x, y))
            rows.append(SweepRow(x, y, v, v, v, 0.1, 0.1, False, 0.0, 5))
    return SweepResult(config, tuple(rows))


@pytest.fixture
def make_result():
    return synthetic_result
