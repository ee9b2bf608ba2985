"""Check the effective model against the time-dependent lab Hamiltonian.

The lab model is written in the frame of the bare modes, where the
parametric hopping and the Kerr terms oscillate at multiples of the mode
detuning. Its long-time state, averaged over one modulation period, is
compared with the steady state of the effective model.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .correlations import CorrelationResult, dimer_steady_state, g2_zero_delay
from .fock import ProductSpace, vacuum_dm
from .hamiltonian import (
    DEVICE_OMEGA_A,
    DEVICE_PHI_DC,
    DimerParams,
    FullModelParams,
    effective_from_full,
    mhz,
    rotating_frame_h,
)
from .lindblad import decay_channels, evolve


@dataclass(frozen=True)
class RWAReport:
    full: CorrelationResult
    effective: CorrelationResult
    rel_error_g2_ab: float
    detuning: float  # rad/us
    phi_ac: float
    t_final: float  # us
    n_periods: float
    runtime: float  # s

    def passed(self, tol: float = 0.05) -> bool:
        return self.rel_error_g2_ab <= tol


def scaled_full_params(effective: DimerParams, ratio: float = 20.0,
                       phi_dc: float = DEVICE_PHI_DC, j_ell: float = mhz(1600.0)) -> FullModelParams:
    """Balanced lab parameters whose reduction gives ``effective``.

    The mode detuning is ``ratio`` times the largest effective rate and the
    modulation amplitude is chosen for the requested hopping magnitude.
    """
    delta = ratio * effective.largest_rate
    phi_ac = 4 * effective.j_ac / (j_ell * abs(math.sin(phi_dc / 2)))
    omega_a = mhz(DEVICE_OMEGA_A)
    return FullModelParams.balanced(
        u_a=effective.u_a,
        u_b=effective.u_b,
        v=effective.v,
        phi_dc=phi_dc,
        j_ell=j_ell,
        omega_res_a=omega_a,
        omega_res_b=omega_a + delta,
        phi_ac=phi_ac,
    )


def rwa_validation(
    j_ac: float = mhz(3.0),
    omega: float = mhz(1.0),
    ratio: float = 20.0,
    n_max: int = 5,
    t_kappa: float = 30.0,
    samples_per_period: int = 16,
    tol: float = 1e-8,
    base: DimerParams | None = None,
) -> RWAReport:
    """Evolve the lab model from vacuum and compare g2 with the effective model.

    Evolution runs to ``t_kappa / min(kappa)``; the state is then averaged
    over the last modulation period on ``samples_per_period`` points.
    """
    start = time.perf_counter()
    base = DimerParams.device() if base is None else base
    target = base.replace(j_ac=j_ac, omega_a=omega, omega_b=omega)
    full = scaled_full_params(target, ratio)
    eff = effective_from_full(full, kappa_a=base.kappa_a, kappa_b=base.kappa_b).replace(
        omega_a=omega, omega_b=omega
    )
    space = ProductSpace.two_mode(n_max)
    H = rotating_frame_h(full, space, omega_a=omega, omega_b=omega)
    channels = decay_channels(eff, space)
    period = 2 * math.pi / full.omega_ac
    t_final = t_kappa / min(eff.kappa_a, eff.kappa_b)
    t_eval = t_final - period + period * np.arange(samples_per_period) / samples_per_period
    states = evolve(H, channels, vacuum_dm(space), t_final, tol=tol, t_eval=t_eval)
    rho = sum(states) / len(states)
    res_full = g2_zero_delay(rho, space)
    res_eff = g2_zero_delay(dimer_steady_state(eff, space), space)
    return RWAReport(
        full=res_full,
        effective=res_eff,
        rel_error_g2_ab=abs(res_full.g2_ab - res_eff.g2_ab) / abs(res_eff.g2_ab),
        detuning=full.omega_ac,
        phi_ac=full.phi_ac,
        t_final=t_final,
        n_periods=t_final / period,
        runtime=time.perf_counter() - start,
    )
