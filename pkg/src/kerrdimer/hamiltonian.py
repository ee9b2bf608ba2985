"""Effective and lab-frame Hamiltonians of the parametrically coupled Kerr dimer.

Units: every rate and frequency is an angular frequency in rad/us, i.e. the
value in MHz times 2*pi (use :func:`mhz`). Times are in microseconds, so
``rate * t`` is a phase without conversion factors.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .fock import ProductSpace, destroy

TWO_PI = 2.0 * math.pi

# measured operating point
DEVICE_U_A = -3.1
DEVICE_U_B = -2.7
DEVICE_V = -7.0
DEVICE_KAPPA_A = 2.8
DEVICE_KAPPA_B = 2.4
DEVICE_OMEGA_A = 6802.0
DEVICE_OMEGA_B = 7164.0
DEVICE_J_ELL = 1600.0
DEVICE_PHI_DC = -0.74 * math.pi


def mhz(value):
    """Convert a frequency in MHz to an angular rate in rad/us."""
    return TWO_PI * value


def to_mhz(rate):
    return rate / TWO_PI


class UnbalancedCouplingError(ValueError):
    """The flux operating point leaves a static hopping or detuning residue."""


@dataclass(frozen=True)
class DimerParams:
    """Rates of the rotating-frame dimer model (all in rad/us).

    ``omega_a``/``omega_b`` are drive rates. They are real by convention; a
    complex value is accepted and enters as ``omega * a^dag + conj(omega) * a``.
    """

    delta_a: float = 0.0
    delta_b: float = 0.0
    j_ac: float = 0.0
    theta: float = 0.0
    u_a: float = 0.0
    u_b: float = 0.0
    v: float = 0.0
    omega_a: complex = 0.0
    omega_b: complex = 0.0
    kappa_a: float = mhz(DEVICE_KAPPA_A)
    kappa_b: float = mhz(DEVICE_KAPPA_B)

    def __post_init__(self):
        if self.j_ac < 0:
            raise ValueError("j_ac must be >= 0; carry the sign in theta")
        if self.kappa_a < 0 or self.kappa_b < 0:
            raise ValueError("decay rates must be non-negative")

    @classmethod
    def device(cls, **overrides) -> "DimerParams":
        """Measured Kerr and decay rates, zero hopping, drives and detunings."""
        base = cls(
            u_a=mhz(DEVICE_U_A),
            u_b=mhz(DEVICE_U_B),
            v=mhz(DEVICE_V),
            kappa_a=mhz(DEVICE_KAPPA_A),
            kappa_b=mhz(DEVICE_KAPPA_B),
        )
        return replace(base, **overrides)

    def with_drive(self, omega: float) -> "DimerParams":
        """Equal drive on both modes."""
        return replace(self, omega_a=omega, omega_b=omega)

    def replace(self, **changes) -> "DimerParams":
        return replace(self, **changes)

    @property
    def largest_rate(self) -> float:
        return max(
            abs(self.delta_a), abs(self.delta_b), self.j_ac, abs(self.u_a), abs(self.u_b),
            abs(self.v), abs(self.omega_a), abs(self.omega_b), self.kappa_a, self.kappa_b,
        )


@dataclass(frozen=True)
class FullModelParams:
    """Lab-frame parameters of the flux-modulated coupler (rad/us, radians).

    ``j_n_tilde`` defaults to ``-v_tilde / 2``, the correlated-hopping rate the
    quartic coupler term produces by itself.
    """

    omega_res_a: float
    omega_res_b: float
    j_c: float
    j_ell: float
    u_tilde_a: float
    u_tilde_b: float
    v_tilde: float
    phi_dc: float
    phi_ac: float = 0.0
    omega_ac: float = 0.0
    j_n_tilde: float | None = None

    def __post_init__(self):
        if not self.omega_res_b > self.omega_res_a:
            raise ValueError("omega_res_b must exceed omega_res_a")
        if self.phi_ac < 0:
            raise ValueError("phi_ac must be >= 0")
        if self.j_n_tilde is None:
            object.__setattr__(self, "j_n_tilde", -self.v_tilde / 2.0)

    @property
    def detuning(self) -> float:
        return self.omega_res_b - self.omega_res_a

    @classmethod
    def balanced(
        cls,
        u_a: float = mhz(DEVICE_U_A),
        u_b: float = mhz(DEVICE_U_B),
        v: float = mhz(DEVICE_V),
        phi_dc: float = DEVICE_PHI_DC,
        j_ell: float = mhz(DEVICE_J_ELL),
        omega_res_a: float = mhz(DEVICE_OMEGA_A),
        omega_res_b: float = mhz(DEVICE_OMEGA_B),
        phi_ac: float = 0.0,
    ) -> "FullModelParams":
        """Balanced operating point reproducing the given dressed Kerr rates."""
        c = math.cos(phi_dc / 2)
        return cls(
            omega_res_a=omega_res_a,
            omega_res_b=omega_res_b,
            j_c=j_ell * c,
            j_ell=j_ell,
            u_tilde_a=u_a / c,
            u_tilde_b=u_b / c,
            v_tilde=v / c,
            phi_dc=phi_dc,
            phi_ac=phi_ac,
            omega_ac=omega_res_b - omega_res_a,
        )

    def flux_phase(self, t: float) -> float:
        return self.phi_dc + self.phi_ac * math.cos(self.omega_ac * t)

    def coupler_factor(self, t: float) -> float:
        """cos(phi(t)/2), the factor multiplying J_ell and V_tilde."""
        return math.cos(self.flux_phase(t) / 2)


# -- effective model ---------------------------------------------------------


def _ladders(space: ProductSpace):
    if len(space.modes) != 2:
        raise ValueError("the dimer lives on a two-mode space")
    a = destroy(space, 0)
    b = destroy(space, 1)
    return a, a.conj().T, b, b.conj().T


def build_effective_h(params: DimerParams, space: ProductSpace) -> np.ndarray:
    a, ad, b, bd = _ladders(space)
    na = ad @ a
    nb = bd @ b
    hop = params.j_ac * np.exp(1j * params.theta) * (ad @ b)
    drive = params.omega_a * ad + params.omega_b * bd
    h = (
        params.delta_a * na
        + params.delta_b * nb
        + 0.5 * params.u_a * (ad @ ad @ a @ a)
        + 0.5 * params.u_b * (bd @ bd @ b @ b)
        + params.v * (na @ nb)
    )
    h = h + hop + hop.conj().T + drive + drive.conj().T
    if np.max(np.abs(h - h.conj().T)) >= 1e-12:
        raise AssertionError("effective Hamiltonian is not Hermitian")
    return h


def total_number(space: ProductSpace) -> np.ndarray:
    a, ad, b, bd = _ladders(space)
    return ad @ a + bd @ b


def manifold_spectrum(params: DimerParams, space: ProductSpace, n_exc: int) -> np.ndarray:
    """Ascending eigenvalues of the drive-free Hamiltonian with ``n_exc`` photons."""
    if params.omega_a != 0 or params.omega_b != 0:
        raise ValueError("manifold_spectrum needs zero drives (total photon number must be conserved)")
    if n_exc < 0 or any(m.n_max < n_exc for m in space.modes):
        raise ValueError(f"space cutoff too small for the {n_exc}-excitation manifold")
    h = build_effective_h(params, space)
    idx = [space.index(n, n_exc - n) for n in range(n_exc, -1, -1)]
    block = h[np.ix_(idx, idx)]
    return np.linalg.eigvalsh(block)


# -- lab-frame model ---------------------------------------------------------

#: Normally ordered expansion of (a + a^dag - b - b^dag)^4 as printed, one
#: (coefficient, operator word) per term; words are read left to right.
QUARTIC_EXPANSION = (
    (1, "a+4"), (4, "a+3 a"), (6, "a+2 a2"), (4, "a+ a3"), (1, "a4"),
    (-4, "b+ a+3"), (-4, "a+3 b"), (-12, "b+ a+2 a"), (-12, "a+2 b a"),
    (-12, "b+ a+ a2"), (-12, "a+ b a2"), (-4, "b+ a3"), (-4, "b a3"),
    (6, "b+2 a+2"), (12, "b+ a+2 b"), (6, "a+2 b2"),
    (12, "b+2 a+ a"), (24, "b+ a+ b a"), (12, "a+ b2 a"),
    (6, "b+2 a2"), (12, "b+ b a2"), (6, "b2 a2"),
    (-4, "b+3 a+"), (-4, "b+3 a"), (-12, "b+2 a+ b"), (-12, "b+2 b a"),
    (-12, "b+ a+ b2"), (-12, "b+ b2 a"), (-4, "a+ b3"), (-4, "b3 a"),
    (1, "b+4"), (4, "b+3 b"), (6, "b+2 b2"), (4, "b+ b3"), (1, "b4"),
)

_TOKEN = re.compile(r"^([ab])(\+?)(\d*)$")


def parse_word(word: str) -> list[tuple[str, bool, int]]:
    """Split ``"b+ a+2 a"`` into ``[("b", True, 1), ("a", True, 2), ("a", False, 1)]``."""
    out = []
    for tok in word.split():
        m = _TOKEN.match(tok)
        if m is None:
            raise ValueError(f"bad operator token {tok!r}")
        out.append((m.group(1), m.group(2) == "+", int(m.group(3) or 1)))
    return out


def word_operator(word: str, space: ProductSpace) -> np.ndarray:
    a, ad, b, bd = _ladders(space)
    table = {("a", False): a, ("a", True): ad, ("b", False): b, ("b", True): bd}
    op = np.eye(space.dim, dtype=complex)
    for mode, dagger, power in parse_word(word):
        op = op @ np.linalg.matrix_power(table[(mode, dagger)], power)
    return op


def word_exponents(word: str) -> tuple[int, int, int, int]:
    """(p, q, r, s) of a word equal to a^dag^p a^q b^dag^r b^s once the modes commute."""
    p = q = r = s = 0
    for mode, dagger, power in parse_word(word):
        if mode == "a":
            if dagger:
                p += power
            else:
                q += power
        elif dagger:
            r += power
        else:
            s += power
    return p, q, r, s


def quartic_normal_ordered(space: ProductSpace) -> np.ndarray:
    """Sum of the printed normally ordered terms of the coupler quartic."""
    out = np.zeros((space.dim, space.dim), dtype=complex)
    for coef, word in QUARTIC_EXPANSION:
        out += coef * word_operator(word, space)
    return out


def coupler_quadrature(space: ProductSpace) -> np.ndarray:
    a, ad, b, bd = _ladders(space)
    return a + ad - b - bd


def build_full_h(params: FullModelParams, space: ProductSpace, t: float) -> np.ndarray:
    """Lab-frame Hamiltonian at time ``t`` (us).

    The coupler quartic is the explicit matrix fourth power of
    ``a + a^dag - b - b^dag``, so it contains the normal-ordering corrections
    that :func:`rotating_frame_h` leaves out. On-site Kerr and correlated
    hopping are topped up when ``u_tilde`` or ``j_n_tilde`` depart from the
    values the quartic implies (``v_tilde/2`` and ``-v_tilde/2``).
    """
    a, ad, b, bd = _ladders(space)
    c = params.coupler_factor(t)
    j_ell = params.j_ell * c
    x = coupler_quadrature(space)
    h = params.omega_res_a * (ad @ a) + params.omega_res_b * (bd @ b)
    h = h - (params.j_c - j_ell) * (ad @ ad + bd @ bd + a @ a + b @ b)
    h = h + (params.j_c - j_ell) * (ad @ b + bd @ a)
    h = h - (params.j_c + j_ell) * (ad @ bd + b @ a)
    h = h + (params.v_tilde * c / 24.0) * np.linalg.matrix_power(x, 4)
    h = h + _kerr_corrections(params, space, c)
    return 0.5 * (h + h.conj().T)


def _kerr_corrections(params: FullModelParams, space: ProductSpace, c: float) -> np.ndarray:
    a, ad, b, bd = _ladders(space)
    du_a = params.u_tilde_a - params.v_tilde / 2
    du_b = params.u_tilde_b - params.v_tilde / 2
    dj_n = params.j_n_tilde + params.v_tilde / 2
    out = 0.5 * c * (du_a * (ad @ ad @ a @ a) + du_b * (bd @ bd @ b @ b))
    corr = ad @ (ad @ a + bd @ b) @ b
    return out - dj_n * c * (corr + corr.conj().T)


def effective_from_full(
    params: FullModelParams,
    kappa_a: float = mhz(DEVICE_KAPPA_A),
    kappa_b: float = mhz(DEVICE_KAPPA_B),
    residual_tol: float = mhz(1.0),
    detuning_tol: float = mhz(1.0),
) -> DimerParams:
    """Rotating-wave reduction of the modulated coupler at a balanced bias.

    The hopping sign is carried by ``theta`` (0 or pi); drives and detunings
    are left at zero.
    """
    c = math.cos(params.phi_dc / 2)
    residual = params.j_c - params.j_ell * c
    if abs(residual) > residual_tol:
        raise UnbalancedCouplingError(
            f"static hopping residue {to_mhz(residual):.3f} MHz exceeds "
            f"{to_mhz(residual_tol):.3f} MHz"
        )
    if abs(params.omega_ac - params.detuning) > detuning_tol:
        raise UnbalancedCouplingError(
            f"modulation frequency misses the mode detuning by "
            f"{to_mhz(params.omega_ac - params.detuning):.3f} MHz"
        )
    j = params.j_ell * math.sin(params.phi_dc / 2) * params.phi_ac / 4
    return DimerParams(
        j_ac=abs(j),
        theta=0.0 if j >= 0 else math.pi,
        u_a=params.u_tilde_a * c,
        u_b=params.u_tilde_b * c,
        v=params.v_tilde * c,
        kappa_a=kappa_a,
        kappa_b=kappa_b,
    )


def correlated_hopping_rate(params: FullModelParams) -> float:
    """Resonant correlated-hopping amplitude dropped by :func:`effective_from_full`."""
    return -params.j_n_tilde * math.sin(params.phi_dc / 2) * params.phi_ac / 4


@dataclass
class _FrameTerm:
    static: np.ndarray
    modulated: np.ndarray


@dataclass
class RotatingFrameHamiltonian:
    """Callable ``H(t)`` of the lab model in the frame of the bare modes.

    ``H(t) = sum_f exp(i f t) (A_f + cos(phi(t)/2) B_f)`` plus the drives.
    """

    params: FullModelParams
    terms: dict = field(default_factory=dict)
    drive_detunings: tuple[float, float] = (0.0, 0.0)
    drive_ops: tuple = ()

    def __call__(self, t: float) -> np.ndarray:
        c = self.params.coupler_factor(t)
        h = None
        for freq, term in self.terms.items():
            m = term.static + c * term.modulated
            if freq != 0.0:
                m = np.exp(1j * freq * t) * m
            h = m if h is None else h + m
        if self.drive_ops:
            da, db = self.drive_detunings
            (oa, ad), (ob, bd) = self.drive_ops
            dr = oa * np.exp(1j * da * t) * ad + ob * np.exp(1j * db * t) * bd
            h = h + dr + dr.conj().T
        return h


def rotating_frame_h(
    params: FullModelParams,
    space: ProductSpace,
    omega_a: complex = 0.0,
    omega_b: complex = 0.0,
    delta_a: float = 0.0,
    delta_b: float = 0.0,
    keep_counter_rotating: bool = False,
) -> RotatingFrameHamiltonian:
    """Lab Hamiltonian transformed to the frame rotating at the bare frequencies.

    Every term is a normally ordered word ``a^dag^p a^q b^dag^r b^s`` that
    picks up ``exp(i((p-q) w_a + (r-s) w_b) t)``. The coupler quartic enters
    through the printed normally ordered expansion (normal-ordering
    corrections omitted). Drives at ``w_i + delta_i`` appear as
    ``Omega_i a^dag exp(i delta_i t) + h.c.``, which matches ``+delta_i n_i``
    in the effective model.

    With ``keep_counter_rotating=False`` words that change the total photon
    number are dropped; they oscillate near ``w_a + w_b`` and only produce
    Bloch-Siegert shifts.
    """
    terms: list[tuple[complex, complex, str]] = []  # (static coef, modulated coef, word)
    jc = params.j_c
    jl = params.j_ell
    for w in ("a+2", "b+2", "a2", "b2"):
        terms.append((-jc, jl, w))
    for w in ("a+ b", "b+ a"):
        terms.append((jc, -jl, w))
    for w in ("a+ b+", "b a"):
        terms.append((-jc, -jl, w))
    for coef, w in QUARTIC_EXPANSION:
        terms.append((0.0, params.v_tilde * coef / 24.0, w))
    du_a = params.u_tilde_a - params.v_tilde / 2
    du_b = params.u_tilde_b - params.v_tilde / 2
    dj_n = params.j_n_tilde + params.v_tilde / 2
    terms += [(0.0, 0.5 * du_a, "a+2 a2"), (0.0, 0.5 * du_b, "b+2 b2")]
    for w in ("a+2 a b", "a+ b+ b2", "b+ a+ a2", "b+2 b a"):
        terms.append((0.0, -dj_n, w))

    grouped: dict[float, _FrameTerm] = {}
    for static, modulated, word in terms:
        if static == 0 and modulated == 0:
            continue
        p, q, r, s = word_exponents(word)
        if not keep_counter_rotating and (p - q) + (r - s) != 0:
            continue
        freq = (p - q) * params.omega_res_a + (r - s) * params.omega_res_b
        op = word_operator(word, space)
        slot = grouped.setdefault(
            freq,
            _FrameTerm(np.zeros_like(op), np.zeros_like(op)),
        )
        slot.static += static * op
        slot.modulated += modulated * op
    a, ad, b, bd = _ladders(space)
    return RotatingFrameHamiltonian(
        params=params,
        terms=dict(sorted(grouped.items())),
        drive_detunings=(delta_a, delta_b),
        drive_ops=((omega_a, ad), (omega_b, bd)),
    )
