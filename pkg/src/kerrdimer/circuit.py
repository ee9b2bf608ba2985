"""Lumped-element model of two LC resonators joined by a shunted SQUID.

The network is reduced to two grounded nodes (one per resonator) joined by
the coupler branch, C_J in parallel with the SQUID inductance L_J. Node
flux coordinates give ``C phi'' = -K phi`` with capacitance matrix ``C`` and
inverse-inductance matrix ``K``; normal-mode frequencies solve the
generalized symmetric problem ``K v = w^2 C v``.

Element values are in fF, nH and GHz (energies as E/h); returned
frequencies and rates are angular, in rad/ns (2*pi*GHz).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
from scipy.constants import e as E_CHARGE
from scipy.constants import h as PLANCK
from scipy.optimize import bisect

FF = 1e-15
NH = 1e-9
PHI0 = PLANCK / (2 * E_CHARGE)


class FluxDivergenceError(ValueError):
    """The SQUID inductance diverges (flux too close to half a quantum)."""


class NoSignChangeError(ValueError):
    """The static hopping keeps its sign over the search interval."""


class NonPositiveDefiniteError(ValueError):
    """Capacitance or inductance matrix is not positive definite."""


@dataclass(frozen=True)
class CircuitParams:
    c_a: float = 260.0  # fF
    c_b: float = 300.0
    c_j: float = 95.0
    e_j_max: float = 80.0  # GHz
    l_a: float = 1.9  # nH
    l_b: float = 1.9
    l_s: float = 0.3
    c_s: float = 800.0  # fF, see floating_network_modes
    phi0: float = PHI0  # Wb

    def __post_init__(self):
        for name in ("c_a", "c_b", "c_j", "e_j_max", "l_a", "l_b", "l_s", "c_s", "phi0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def replace(self, **changes) -> "CircuitParams":
        return replace(self, **changes)

    @property
    def l_j0(self) -> float:
        """Josephson inductance at zero flux, (Phi0/2pi)^2 / E_J^max, in nH."""
        return (self.phi0 / (2 * math.pi)) ** 2 / (PLANCK * self.e_j_max * 1e9) / NH

    @property
    def z_char(self) -> tuple[float, float]:
        """sqrt(L/C) of each bare resonator, in ohm."""
        return (
            math.sqrt(self.l_a * NH / (self.c_a * FF)),
            math.sqrt(self.l_b * NH / (self.c_b * FF)),
        )


def josephson_inductance(params: CircuitParams, phi_dc_frac: float) -> float:
    """L_s + L_J0 / |cos(pi Phi/Phi0)| in nH."""
    c = abs(math.cos(math.pi * phi_dc_frac))
    if c <= 1e-6:
        raise FluxDivergenceError(f"|cos(pi*{phi_dc_frac})| = {c:.1e}: inductance diverges")
    return params.l_s + params.l_j0 / c


def network_matrices(params: CircuitParams, phi_dc_frac: float, coupler: bool = True):
    """(C in F, K in 1/H) of the two-node network."""
    ca, cb = params.c_a * FF, params.c_b * FF
    ka, kb = 1 / (params.l_a * NH), 1 / (params.l_b * NH)
    cj = params.c_j * FF if coupler else 0.0
    kj = 1 / (josephson_inductance(params, phi_dc_frac) * NH) if coupler else 0.0
    C = np.array([[ca + cj, -cj], [-cj, cb + cj]])
    K = np.array([[ka + kj, -kj], [-kj, kb + kj]])
    return C, K


def _eigenfrequencies(C: np.ndarray, K: np.ndarray) -> np.ndarray:
    try:
        w2 = scipy.linalg.eigh(K, C, eigvals_only=True)
    except np.linalg.LinAlgError as exc:
        raise NonPositiveDefiniteError(str(exc)) from exc
    if np.any(w2 <= 0):
        raise NonPositiveDefiniteError("inverse-inductance matrix is not positive definite")
    return np.sqrt(np.sort(w2)) / 1e9


def normal_modes(params: CircuitParams, phi_dc_frac: float, coupler: bool = True) -> tuple[float, float]:
    """(omega_minus, omega_plus) in rad/ns.

    ``coupler=False`` drops the coupler branch, giving the bare resonators
    ``1/sqrt(L_i C_i)``.
    """
    w = _eigenfrequencies(*network_matrices(params, phi_dc_frac, coupler))
    return float(w[0]), float(w[1])


def bare_frequencies(params: CircuitParams, phi_dc_frac: float) -> tuple[float, float]:
    """Frequencies of the node coordinates with the other node held fixed (rad/ns)."""
    C, K = network_matrices(params, phi_dc_frac)
    Ci = np.linalg.inv(C)
    w = np.sqrt(np.diag(Ci) * np.diag(K)) / 1e9
    return float(w[0]), float(w[1])


def hopping_components(params: CircuitParams, phi_dc_frac: float) -> tuple[float, float]:
    """(J_c, J_l): capacitive and inductive hopping rates in rad/ns.

    Each node coordinate is quantized as a bare oscillator with impedance
    ``Z_i = sqrt(Cinv_ii / K_ii)``; the off-diagonal charge and flux
    couplings then give a beam-splitter term ``(J_c - J_l)(a^dag b + h.c.)``.
    """
    C, K = network_matrices(params, phi_dc_frac)
    Ci = np.linalg.inv(C)
    z = np.sqrt(np.diag(Ci) / np.diag(K))
    zz = math.sqrt(z[0] * z[1])
    j_c = 0.5 * Ci[0, 1] / zz
    j_l = -0.5 * K[0, 1] * zz
    return j_c / 1e9, j_l / 1e9


def j_dc(params: CircuitParams, phi_dc_frac: float) -> float:
    """Net static hopping J_c - J_l in rad/ns; positive when capacitive coupling wins."""
    j_c, j_l = hopping_components(params, phi_dc_frac)
    return j_c - j_l


def zero_coupling_flux(params: CircuitParams, interval=(-0.5, 0.0), xtol: float = 1e-4) -> float:
    """Flux (in units of Phi0) where the static hopping vanishes, by bisection."""
    lo, hi = interval
    eps = 1e-5
    # keep clear of the half-flux divergence
    lo = lo + eps if abs(abs(lo) - 0.5) < eps else lo
    hi = hi - eps if abs(abs(hi) - 0.5) < eps else hi
    f_lo, f_hi = j_dc(params, lo), j_dc(params, hi)
    if f_lo * f_hi > 0:
        raise NoSignChangeError(f"j_dc has the same sign at {lo} and {hi}")
    return float(bisect(lambda x: j_dc(params, x), lo, hi, xtol=xtol))


def floating_network_modes(params: CircuitParams, phi_dc_frac: float) -> np.ndarray:
    """Mode frequencies (rad/ns) of a four-node floating variant.

    Each resonator sits between its coupler node and a pad that is shunted
    to ground by C_s; the coupler joins the two coupler nodes. Returns the
    two nonzero frequencies, ascending. Used to check that the grounded
    two-node reduction does not depend on C_s at the quoted precision.
    """

    def laplacian(edges):
        M = np.zeros((4, 4))
        for i, j, v in edges:
            M[i, i] += v
            if j is None:
                continue
            M[j, j] += v
            M[i, j] -= v
            M[j, i] -= v
        return M

    lj = josephson_inductance(params, phi_dc_frac) * NH
    C = laplacian([
        (0, 1, params.c_a * FF), (1, None, params.c_s * FF),
        (0, 2, params.c_j * FF),
        (2, 3, params.c_b * FF), (3, None, params.c_s * FF),
    ])
    K = laplacian([(0, 1, 1 / (params.l_a * NH)), (2, 3, 1 / (params.l_b * NH)), (0, 2, 1 / lj)])
    w2 = scipy.linalg.eigh(K, C, eigvals_only=True)
    w = np.sqrt(np.clip(w2, 0, None)) / 1e9
    return np.sort(w)[-2:]
