"""Self-checks run by ``kerrdimer validate``.

Each check returns a :class:`Check`; exceptions inside a check are caught
and reported as a failure with the error message, so one broken check
does not hide the others.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .circuit import hopping_components, normal_modes, zero_coupling_flux
from .config import SweepConfig
from .correlations import (
    fit_lorentzian,
    g2_zero_delay,
    transmission_spectrum,
    two_tone_kerr_extraction,
)
from .fock import (
    ProductSpace,
    destroy,
    normal_moment,
    number,
    random_density_matrix,
    trace_distance,
)
from .hamiltonian import (
    coupler_quadrature,
    effective_from_full,
    mhz,
    quartic_normal_ordered,
    to_mhz,
)
from .lindblad import dimer_liouvillian, steady_state
from .measurement import (
    GaussianSource,
    MomentTable,
    NoiseModel,
    ORDERS,
    bootstrap_g2_aa,
    compose_on,
    deconvolve,
    g2_from_moments,
    noise_table,
    simulate_record,
    state_to_diff_moments,
)
from .rwa import rwa_validation, scaled_full_params
from .sweep import converged_cell

# measured resonances (GHz) at the reference flux, and the expected
# zero-coupling flux and hopping scale
REFERENCE_MODES_GHZ = (6.802, 7.164)
REFERENCE_FLUX = -0.37
FLUX_TOL = 0.03
REFERENCE_J_DC_GHZ = 0.8


@dataclass
class Check:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    error: str | None = None
    runtime: float = 0.0

    def to_dict(self) -> dict:
        d = {"name": self.name, "passed": self.passed, "details": self.details}
        if self.error is not None:
            d["error"] = self.error
        return d


@dataclass
class ValidationReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        # runtimes are left out so the report is reproducible
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            extra = f"  ({c.error})" if c.error else ""
            lines.append(f"{status}  {c.name:<24} {c.runtime:7.2f} s{extra}")
        n_ok = sum(c.passed for c in self.checks)
        lines.append(f"{n_ok}/{len(self.checks)} checks passed")
        return "\n".join(lines)


def _clean(obj):
    """JSON-friendly copy: numpy scalars to float, NaN/inf to strings."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


# -- individual checks ----------------------------------------------------------


def check_linear_cavity(config: SweepConfig) -> Check:
    """Driven linear cavity: n = 4 Omega^2 / kappa^2 and g2 = 1."""
    kappa = config.dimer.kappa_a
    space = ProductSpace.two_mode(14, 3)
    worst_n = worst_g2 = 0.0
    rows = []
    for n_target in (0.05, 0.25, 0.5):
        omega = 0.5 * kappa * math.sqrt(n_target)
        p = config.dimer.replace(u_a=0.0, u_b=0.0, v=0.0, j_ac=0.0, delta_a=0.0,
                                 omega_a=omega, omega_b=0.0)
        rho = steady_state(dimer_liouvillian(p, space))
        n = normal_moment(rho, 1, 1, space=space).real
        g2 = normal_moment(rho, 2, 2, space=space).real / n**2
        worst_n = max(worst_n, abs(n - n_target) / n_target)
        worst_g2 = max(worst_g2, abs(g2 - 1.0))
        rows.append({"n_expected": n_target, "n": n, "g2_aa": g2})
    return Check("linear_cavity", worst_n <= 1e-6 and worst_g2 <= 1e-6,
                 {"cases": rows, "max_rel_error_n": worst_n, "max_abs_error_g2": worst_g2})


def check_uniqueness(config: SweepConfig) -> Check:
    """Two independent constrained solves land on the same state."""
    p = config.dimer.replace(j_ac=mhz(3.0), omega_a=mhz(0.76), omega_b=mhz(0.76))
    space = ProductSpace.two_mode(config.n_max)
    L = dimer_liouvillian(p, space)
    info = {}
    r0 = steady_state(L, 0, info=info)
    r1 = steady_state(L, space.dim - 1)
    dist = trace_distance(r0, r1)
    return Check("steady_state_uniqueness", dist <= 1e-9,
                 {"trace_distance": dist, "residual": info["residual"],
                  "condition_estimate": info["condition_estimate"]})


def check_truncation(config: SweepConfig) -> Check:
    """Cutoff convergence at zero hopping and the strongest configured drive."""
    omega = config.omega[-1]
    p = config.dimer.replace(j_ac=0.0, omega_a=omega, omega_b=omega)
    res, cut, ok = converged_cell(p, config)
    return Check("truncation", ok, {
        "omega_mhz": config.omega_mhz[-1], "n_max": config.n_max, "n_max_used": cut,
        "tolerance": config.truncation_tol, "g2_aa": res.g2_aa, "g2_ab": res.g2_ab,
        "n_a": res.n_a,
    })


def check_rwa(config: SweepConfig) -> Check:
    rep = rwa_validation(base=config.dimer)
    return Check("rwa", rep.passed(0.05), {
        "g2_ab_full": rep.full.g2_ab, "g2_ab_effective": rep.effective.g2_ab,
        "rel_error_g2_ab": rep.rel_error_g2_ab, "detuning_mhz": to_mhz(rep.detuning),
        "n_periods": rep.n_periods, "tolerance": 0.05,
    })


def check_circuit(config: SweepConfig) -> Check:
    cp = config.circuit
    modes = [w / (2 * math.pi) for w in normal_modes(cp, REFERENCE_FLUX)]
    mode_err = max(abs(m - r) / r for m, r in zip(modes, REFERENCE_MODES_GHZ))
    flux = zero_coupling_flux(cp)
    j_c, j_l = hopping_components(cp, 0.0)
    # coupling is strongest at zero flux; the net value sets the tuning scale
    j_range = abs(j_c - j_l) / (2 * math.pi)
    ratio = j_range / REFERENCE_J_DC_GHZ
    ok = mode_err <= 0.05 and abs(flux - REFERENCE_FLUX) <= FLUX_TOL and 0.5 <= ratio <= 2.0
    return Check("circuit", ok, {
        "modes_ghz": modes, "max_rel_mode_error": mode_err, "zero_coupling_flux": flux,
        "j_dc_zero_flux_ghz": j_range, "j_dc_ratio_to_reference": ratio,
    })


def check_moments(config: SweepConfig) -> Check:
    """Moment pipeline equals direct g2; round trips are exact; sampling agrees."""
    rng = np.random.default_rng(config.seed)
    space = ProductSpace.two_mode(3)
    worst = 0.0
    for _ in range(50):
        rho = random_density_matrix(space, rng, rank=int(rng.integers(1, space.dim + 1)))
        direct = g2_zero_delay(rho, space)
        via = g2_from_moments(state_to_diff_moments(rho, space))
        for x, y in zip(via, (direct.g2_aa, direct.g2_bb, direct.g2_ab)):
            worst = max(worst, abs(x - y) / abs(y))
    noise = noise_table(NoiseModel(config.measurement.n_add, config.measurement.n_add))
    trip = 0.0
    for _ in range(20):
        diff = MomentTable({nm: rng.normal() for nm in ORDERS}, "diff")
        trip = max(trip, deconvolve(compose_on(diff, noise), noise).max_abs_diff(diff))
        on = MomentTable({nm: rng.normal() for nm in ORDERS}, "on")
        trip = max(trip, compose_on(deconvolve(on, noise), noise).max_abs_diff(on))
    m = config.measurement
    record = simulate_record(GaussianSource("coherent", alpha=m.alpha),
                             noise=NoiseModel(m.n_add, m.n_add),
                             n_samples=m.n_samples, seed=config.seed)
    g2, err = bootstrap_g2_aa(record, seed=config.seed)
    ok = worst <= 1e-9 and trip <= 1e-12 and abs(g2 - 1.0) <= 3 * err
    return Check("moments", ok, {
        "max_rel_error_pipeline": worst, "max_round_trip_error": trip,
        "sampled_g2_aa": g2, "bootstrap_error": err, "n_samples": m.n_samples,
    })


def check_quartic(config: SweepConfig) -> Check:
    """Normally ordered quartic plus its ordering corrections equals x^4."""
    space = ProductSpace.two_mode(6)
    x = coupler_quadrature(space)
    A = destroy(space, 0) - destroy(space, 1)  # x = A + A^dag, [A, A^dag] = 2
    Ad = A.conj().T
    x2_normal = Ad @ Ad + 2 * Ad @ A + A @ A
    rhs = quartic_normal_ordered(space) + 12 * x2_normal + 12 * np.eye(space.dim)
    lhs = np.linalg.matrix_power(x, 4)
    na, nb = np.diag(number(space, 0)).real, np.diag(number(space, 1)).real
    keep = (na <= 4) & (nb <= 4)  # top two levels of each mode excluded
    err = float(np.max(np.abs((lhs - rhs)[np.ix_(keep, keep)])))
    return Check("quartic_identity", err < 1e-12, {"max_abs_error": err, "n_max": 6})


def check_splitting(config: SweepConfig) -> Check:
    """Weak-probe doublet split by 2 J and linear in the modulation depth."""
    s = config.spectrum
    j = mhz(s.j_ac_mhz)
    p = config.dimer.replace(j_ac=j, omega_a=0.0, omega_b=0.0)
    grid = np.linspace(-mhz(s.span_mhz), mhz(s.span_mhz), s.n_points)
    fit = fit_lorentzian(transmission_spectrum(p, s.probe, grid), 2)
    split = abs(fit.centers[1] - fit.centers[0])
    rel = abs(split - 2 * j) / (2 * j)
    # J from the reduction at a few modulation depths
    full = scaled_full_params(p)
    depths = full.phi_ac * np.array([0.5, 1.0, 1.5, 2.0])
    js = np.array([
        effective_from_full(replace(full, phi_ac=d), kappa_a=p.kappa_a, kappa_b=p.kappa_b).j_ac
        for d in depths
    ])
    lin = float(np.max(np.abs(js / depths - js[0] / depths[0])) / (js[0] / depths[0]))
    return Check("parametric_splitting", rel <= 0.05 and lin < 1e-12, {
        "j_ac_mhz": s.j_ac_mhz, "splitting_mhz": to_mhz(split), "rel_error": rel,
        "linearity_error": lin,
    })


def check_kerr_extraction(config: SweepConfig) -> Check:
    v = two_tone_kerr_extraction(config.dimer.replace(j_ac=0.0))
    rel = abs(v - config.dimer.v) / abs(config.dimer.v)
    return Check("kerr_extraction", rel <= 0.2,
                 {"v_estimate_mhz": to_mhz(v), "v_mhz": to_mhz(config.dimer.v), "rel_error": rel})


CHECKS = (
    check_linear_cavity,
    check_uniqueness,
    check_truncation,
    check_rwa,
    check_circuit,
    check_moments,
    check_quartic,
    check_splitting,
    check_kerr_extraction,
)


def _name(fn) -> str:
    return {
        "check_uniqueness": "steady_state_uniqueness",
        "check_quartic": "quartic_identity",
        "check_splitting": "parametric_splitting",
    }.get(fn.__name__, fn.__name__.removeprefix("check_"))


def run_validation(config: SweepConfig, checks=CHECKS, progress=None) -> ValidationReport:
    out = []
    for fn in checks:
        start = time.perf_counter()
        try:
            c = fn(config)
        except Exception as exc:
            c = Check(_name(fn), False, error=f"{type(exc).__name__}: {exc}")
        c.passed = bool(c.passed)
        c.details = _clean(c.details)
        c.runtime = time.perf_counter() - start
        out.append(c)
        if progress:
            progress(c)
    return ValidationReport(out)
