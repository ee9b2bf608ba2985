"""Zero-delay photon statistics, weak-probe spectra and Lorentzian fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, least_squares
from scipy.signal import find_peaks, peak_widths

from .fock import (
    TRUNCATION_THRESHOLD,
    ProductSpace,
    destroy,
    expect,
    infer_space,
    normal_moment,
    top_level_population,
)
from .hamiltonian import DimerParams
from .lindblad import dimer_liouvillian, steady_state


class VacuumDenominatorError(ValueError):
    """An occupation in a g2 denominator is numerically zero."""


class FitError(RuntimeError):
    """Lorentzian fit failed or the requested peaks are not resolved."""


#: occupations below this are treated as vacuum in g2 denominators
VACUUM_THRESHOLD = 1e-9


@dataclass(frozen=True)
class CorrelationResult:
    g2_aa: float
    g2_bb: float
    g2_ab: float
    n_a: float
    n_b: float
    truncation_flag: bool = False
    phase_spread: float = 0.0
    per_phase: tuple = field(default=(), compare=False, repr=False)


def g2_zero_delay(rho: np.ndarray, space: ProductSpace | None = None) -> CorrelationResult:
    space = infer_space(rho) if space is None else space

    def m(*pqrs):
        return normal_moment(rho, *pqrs, space=space, warn=False).real

    n_a = m(1, 1, 0, 0)
    n_b = m(0, 0, 1, 1)
    if n_a <= VACUUM_THRESHOLD or n_b <= VACUUM_THRESHOLD:
        raise VacuumDenominatorError(
            f"occupations ({n_a:.3e}, {n_b:.3e}) below {VACUUM_THRESHOLD:g}"
        )
    return CorrelationResult(
        g2_aa=m(2, 2, 0, 0) / n_a**2,
        g2_bb=m(0, 0, 2, 2) / n_b**2,
        g2_ab=m(1, 1, 1, 1) / (n_a * n_b),
        n_a=n_a,
        n_b=n_b,
        truncation_flag=top_level_population(rho, space) > TRUNCATION_THRESHOLD,
    )


def dimer_steady_state(params: DimerParams, space: ProductSpace) -> np.ndarray:
    return steady_state(dimer_liouvillian(params, space))


def phase_averaged_g2(
    params: DimerParams,
    space: ProductSpace,
    n_phases: int = 8,
    randomized: bool = False,
    seed: int | None = None,
) -> CorrelationResult:
    """g2 averaged over hopping phases.

    The phases are ``theta_k = 2 pi k / n_phases`` or, with ``randomized``,
    uniform draws from a generator seeded by ``seed``. Every field is the
    arithmetic mean over phases; ``phase_spread`` is max - min of g2_ab.
    """
    if n_phases < 1:
        raise ValueError("n_phases must be >= 1")
    if params.j_ac == 0:
        # theta does not enter the Hamiltonian
        thetas = [0.0]
    elif randomized:
        thetas = list(np.sort(np.random.default_rng(seed).uniform(0, 2 * np.pi, n_phases)))
    else:
        thetas = [2 * np.pi * k / n_phases for k in range(n_phases)]

    results = [g2_zero_delay(dimer_steady_state(params.replace(theta=th), space), space) for th in thetas]

    def mean(attr):
        return math.fsum(getattr(r, attr) for r in results) / len(results)

    g2_ab = [r.g2_ab for r in results]
    return CorrelationResult(
        g2_aa=mean("g2_aa"),
        g2_bb=mean("g2_bb"),
        g2_ab=mean("g2_ab"),
        n_a=mean("n_a"),
        n_b=mean("n_b"),
        truncation_flag=any(r.truncation_flag for r in results),
        phase_spread=max(g2_ab) - min(g2_ab),
        per_phase=tuple(zip(thetas, results)),
    )


# -- spectra -------------------------------------------------------------------


@dataclass(frozen=True)
class Spectrum:
    detunings: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.detunings, dtype=float)
        y = np.asarray(self.amplitudes, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("detunings and amplitudes must be 1-D arrays of equal length")
        if np.any(np.diff(x) <= 0):
            raise ValueError("detuning grid must be strictly increasing")
        if np.any(y < 0):
            raise ValueError("amplitudes must be non-negative")
        object.__setattr__(self, "detunings", x)
        object.__setattr__(self, "amplitudes", y)

    @property
    def power(self) -> np.ndarray:
        return self.amplitudes**2


_MODES = {"a": 0, "b": 1}


def _mode_index(mode) -> int:
    if mode in _MODES:
        return _MODES[mode]
    if mode in (0, 1):
        return int(mode)
    raise ValueError(f"mode must be 'a', 'b', 0 or 1, got {mode!r}")


def transmission_spectrum(
    params: DimerParams,
    probe_mode,
    detunings,
    space: ProductSpace | None = None,
    probe_strength: float | None = None,
    sweep: str = "both",
    enforce_linear: bool = True,
) -> Spectrum:
    """Steady-state ``|<a>|`` (or ``|<b>|``) under a weak probe.

    The probe drive replaces the drive of ``probe_mode``; the other mode
    keeps the drive and detuning of ``params``. ``sweep="both"`` shifts both
    detunings together (probe frequency scanned across the coupled pair),
    ``sweep="probe"`` shifts only the probed mode. The default probe
    strength is kappa/20 of the probed mode.
    """
    k = _mode_index(probe_mode)
    kappa = (params.kappa_a, params.kappa_b)[k]
    if probe_strength is None:
        probe_strength = kappa / 20
    if enforce_linear and abs(probe_strength) > kappa / 10:
        raise ValueError("probe strength exceeds kappa/10 (outside linear response)")
    if sweep not in ("both", "probe"):
        raise ValueError("sweep must be 'both' or 'probe'")
    space = ProductSpace.two_mode(3) if space is None else space
    drive = "omega_a" if k == 0 else "omega_b"
    base = params.replace(**{drive: probe_strength})
    op = destroy(space, k)
    amps = []
    for x in np.asarray(detunings, dtype=float):
        if sweep == "both":
            p = base.replace(delta_a=x, delta_b=x)
        else:
            p = base.replace(**{("delta_a" if k == 0 else "delta_b"): x})
        amps.append(abs(expect(dimer_steady_state(p, space), op)))
    return Spectrum(np.asarray(detunings, dtype=float), np.array(amps))


@dataclass(frozen=True)
class LorentzianFit:
    centers: np.ndarray
    widths: np.ndarray  # half widths at half maximum
    amplitudes: np.ndarray
    residual_norm: float

    @property
    def n_peaks(self) -> int:
        return len(self.centers)


def lorentzian_sum(x, centers, widths, amplitudes) -> np.ndarray:
    x = np.asarray(x, dtype=float)[:, None]
    return np.sum(np.asarray(amplitudes) / (1 + ((x - np.asarray(centers)) / np.asarray(widths)) ** 2), axis=1)


def coherent_lorentzian_sum(x, centers, widths, residues) -> np.ndarray:
    """``|sum_k r_k g_k / (x - x_k + i g_k)|^2``; a lone pole has peak height ``|r_k|^2``."""
    x = np.asarray(x, dtype=float)[:, None]
    g = np.asarray(widths)
    field = np.sum(np.asarray(residues) * g / (x - np.asarray(centers) + 1j * g), axis=1)
    return np.abs(field) ** 2


def _unpack(theta, n, coherent):
    c, g = theta[:n], theta[n:2 * n]
    if not coherent:
        return c, g, theta[2 * n:]
    rest = theta[2 * n:]
    # global phase fixed by taking the first residue real
    r = np.concatenate([[rest[0]], rest[1:n] + 1j * rest[n:]])
    return c, g, r


def _model(x, theta, n, coherent):
    c, g, w = _unpack(theta, n, coherent)
    if coherent:
        return coherent_lorentzian_sum(x, c, g, w)
    return lorentzian_sum(x, c, g, w)


def _least_squares(x, y, c0, g0, h0, coherent, max_nfev):
    n = len(c0)
    scale = float(np.max(y))
    span = x[-1] - x[0]
    dx = span / max(len(x) - 1, 1)
    if coherent:
        w0 = np.concatenate([[np.sqrt(h0[0] / scale)], np.sqrt(np.asarray(h0[1:]) / scale), np.zeros(n - 1)])
        wlo = np.concatenate([[0.0], np.full(2 * (n - 1), -np.inf)])
        whi = np.full(2 * n - 1, np.inf)
    else:
        w0 = np.asarray(h0) / scale
        wlo = np.zeros(n)
        whi = np.full(n, np.inf)
    lower = np.concatenate([np.full(n, x[0]), np.full(n, dx * 1e-3), wlo])
    upper = np.concatenate([np.full(n, x[-1]), np.full(n, 10 * span), whi])
    theta0 = np.clip(np.concatenate([c0, g0, w0]), lower, upper)
    sol = least_squares(
        lambda th: _model(x, th, n, coherent) - y / scale,
        theta0, bounds=(lower, upper), x_scale="jac",
        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev,
    )
    if sol.status <= 0:
        raise FitError(f"Lorentzian fit did not converge: {sol.message}")
    c, g, w = _unpack(sol.x, n, coherent)
    heights = (np.abs(w) ** 2 if coherent else w) * scale
    return c, g, heights, float(np.linalg.norm(sol.fun) * scale)


def fit_lorentzian(
    spectrum: Spectrum,
    n_peaks: int = 1,
    coherent: bool = False,
    min_height: float = 0.01,
    max_nfev: int = 4000,
) -> LorentzianFit:
    """Least-squares Lorentzian fit to the spectral power ``amplitudes**2``.

    Each peak is ``A / (1 + ((x - x0) / gamma)^2)``, so gamma is the half
    width of the power line (kappa/2 for a bare cavity). With ``coherent``
    the peaks are complex poles whose fields add before squaring, which is
    the right model when the lines come from one coherent response and
    interfere in their tails; ``amplitudes`` are then the heights of the
    isolated poles.

    Peaks are seeded at the highest local maxima above ``min_height`` times
    the top. A missing peak (a shoulder) is seeded at the largest positive
    residual of the fit with one peak fewer; if that residual is below the
    height threshold the peaks are unresolved and :class:`FitError` is
    raised. The seeding rule makes the fit deterministic.
    """
    if n_peaks not in (1, 2):
        raise ValueError("n_peaks must be 1 or 2")
    x = spectrum.detunings
    y = spectrum.power
    top = float(np.max(y)) if len(y) else 0.0
    if top <= 0 or np.ptp(y) <= 1e-12 * top:
        raise FitError("flat spectrum: no peak to fit")
    # pad so maxima at the grid edges count as peaks
    padded = np.concatenate(([-np.inf], y, [-np.inf]))
    idx = find_peaks(padded)[0] - 1
    idx = idx[y[idx] > min_height * top]
    idx = np.sort(idx[np.argsort(y[idx])[::-1][:n_peaks]])
    dx = (x[-1] - x[0]) / max(len(x) - 1, 1)
    c0 = list(x[idx])
    g0 = list(np.maximum(0.5 * peak_widths(y, idx, rel_height=0.5)[0] * dx, dx / 2))
    h0 = list(y[idx])
    while len(c0) < n_peaks:
        c, g, h, _ = _least_squares(x, y, c0, g0, h0, coherent, max_nfev)
        model = _model_from(x, c, g, h, coherent)
        resid = y - model
        k = int(np.argmax(resid))
        if resid[k] <= min_height * top:
            raise FitError(f"found {len(c0)} resolved peak(s), {n_peaks} requested")
        c0, g0, h0 = list(c) + [x[k]], list(g) + [float(np.median(g))], list(h) + [resid[k]]
    c, g, h, res = _least_squares(x, y, c0, g0, h0, coherent, max_nfev)
    order = np.argsort(c)
    return LorentzianFit(centers=c[order], widths=g[order], amplitudes=h[order], residual_norm=res)


def _model_from(x, c, g, h, coherent):
    if coherent:
        # re-seeding only needs the magnitudes, phases restart at zero
        return coherent_lorentzian_sum(x, c, g, np.sqrt(h))
    return lorentzian_sum(x, c, g, h)


# -- two-tone spectroscopy -------------------------------------------------------


def pump_strength_for(params: DimerParams, pump_mode, target_n: float = 0.3,
                      space: ProductSpace | None = None) -> float:
    """Resonant drive rate that gives the pumped mode ``target_n`` photons."""
    k = _mode_index(pump_mode)
    space = ProductSpace.two_mode(5) if space is None else space
    drive = "omega_a" if k == 0 else "omega_b"
    base = params.replace(omega_a=0.0, omega_b=0.0, delta_a=0.0, delta_b=0.0)
    kappa = (params.kappa_a, params.kappa_b)[k]

    def excess(omega):
        rho = dimer_steady_state(base.replace(**{drive: omega}), space)
        return normal_moment(rho, *((1, 1, 0, 0) if k == 0 else (0, 0, 1, 1)), space=space, warn=False).real - target_n

    return brentq(excess, kappa * 1e-3, 5 * kappa, xtol=1e-6 * kappa)


@dataclass(frozen=True)
class TwoToneResult:
    v_estimate: float
    bare_index: int
    fit: LorentzianFit
    pump_strength: float
    spectrum: Spectrum


def two_tone_kerr_extraction(
    params: DimerParams,
    pump_mode="b",
    pump_strength: float | None = None,
    n_points: int = 241,
    space: ProductSpace | None = None,
    details: bool = False,
):
    """Cross-Kerr estimate from the pump-induced splitting of the probe line.

    The pumped mode is driven on resonance (default strength gives 0.3
    photons) while the other mode is probed weakly over about
    +-2.5 max(|V|, kappa). The probe line splits into a bare peak and one
    shifted by the cross-Kerr rate; with the ``+delta n`` detuning convention
    the shifted peak sits at ``delta = -V``. A coherent two-pole fit gives
    ``V = -(x_shifted - x_bare)``, the bare peak being the stronger one.
    """
    k = _mode_index(pump_mode)
    probe = 1 - k
    if space is None:
        cut = [2, 2]
        cut[k] = 6
        space = ProductSpace.two_mode(*cut)
    if pump_strength is None:
        pump_strength = pump_strength_for(params, k, space=space)
    kappa = max(params.kappa_a, params.kappa_b)
    half = 2.5 * max(abs(params.v), kappa)
    grid = np.linspace(-half, half, n_points)
    pumped = params.replace(
        **{("omega_a" if k == 0 else "omega_b"): pump_strength,
           "delta_a": 0.0, "delta_b": 0.0}
    )
    spec = transmission_spectrum(pumped, probe, grid, space=space, sweep="probe")
    fit = fit_lorentzian(spec, 2, coherent=True)
    bare_i = int(np.argmax(fit.amplitudes))
    sep = fit.centers[1 - bare_i] - fit.centers[bare_i]
    if abs(sep) < float(np.min(fit.widths)):
        raise FitError("conditional peak not resolved from the bare line")
    v_est = -float(sep)
    if not details:
        return v_est
    return TwoToneResult(v_est, bare_i, fit, pump_strength, spec)
