"""Liouvillian construction, steady states and time evolution.

Density matrices are vectorized by column stacking, ``vec(rho) =
rho.reshape(-1, order="F")``, so that ``vec(A X B) = (B^T kron A) vec(X)``.
The superoperator is stored as a ``scipy.sparse`` CSR matrix; operators stay
dense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fock import ProductSpace, destroy
from .hamiltonian import build_effective_h


class SingularSystemError(RuntimeError):
    """The constrained steady-state system has no unique solution."""


class StepSizeUnderflowError(RuntimeError):
    """Adaptive integration needed a step below the floating-point floor."""


@dataclass(frozen=True)
class CollapseChannel:
    operator: np.ndarray
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"collapse rate must be positive, got {self.rate}")


@dataclass(frozen=True)
class Liouvillian:
    matrix: sp.csr_matrix
    dim: int
    n_channels: int

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho), self.dim)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape((dim, dim), order="F")


def decay_channels(params, space: ProductSpace) -> list[CollapseChannel]:
    """Photon loss of both modes; zero-rate channels are omitted."""
    rates = (params.kappa_a, params.kappa_b)
    return [
        CollapseChannel(destroy(space, k), rate)
        for k, rate in enumerate(rates)
        if rate > 0
    ]


def dimer_liouvillian(params, space: ProductSpace) -> Liouvillian:
    return build_liouvillian(build_effective_h(params, space), decay_channels(params, space))


def build_liouvillian(H: np.ndarray, channels: Sequence[CollapseChannel] = ()) -> Liouvillian:
    H = np.asarray(H)
    d = H.shape[0]
    if H.shape != (d, d):
        raise ValueError(f"Hamiltonian must be square, got {H.shape}")
    eye = sp.identity(d, dtype=complex, format="csr")
    Hs = sp.csr_matrix(H)
    L = -1j * (sp.kron(eye, Hs) - sp.kron(Hs.T, eye))
    for ch in channels:
        c = np.asarray(ch.operator)
        if c.shape != (d, d):
            raise ValueError(f"collapse operator shape {c.shape} does not match H {H.shape}")
        cs = sp.csr_matrix(c)
        cdc = sp.csr_matrix(c.conj().T @ c)
        L = L + ch.rate * (
            sp.kron(cs.conj(), cs) - 0.5 * sp.kron(eye, cdc) - 0.5 * sp.kron(cdc.T, eye)
        )
    L = sp.csr_matrix(L)
    L.eliminate_zeros()
    return Liouvillian(L, d, len(channels))


def lindblad_rhs(H: np.ndarray, channels: Sequence[CollapseChannel], rho: np.ndarray) -> np.ndarray:
    """Direct evaluation of the Lindblad generator on ``rho``."""
    out = -1j * (H @ rho - rho @ H)
    for ch in channels:
        c = ch.operator
        cd = c.conj().T
        out = out + ch.rate * (c @ rho @ cd - 0.5 * (cd @ c @ rho + rho @ cd @ c))
    return out


def _constrained_system(L: Liouvillian, row: int):
    n = L.matrix.shape[0]
    keep = np.ones(n)
    keep[row] = 0.0
    trace_row = np.zeros(n, dtype=complex)
    trace_row[:: L.dim + 1] = 1.0
    M = sp.diags(keep) @ L.matrix + sp.csr_matrix(
        (trace_row[:: L.dim + 1], (np.full(L.dim, row), np.arange(0, n, L.dim + 1))),
        shape=(n, n),
    )
    rhs = np.zeros(n, dtype=complex)
    rhs[row] = 1.0
    return sp.csc_matrix(M), rhs


def _factorize(M: sp.csc_matrix, fast: bool):
    if fast:
        # symmetric-pattern ordering without pivoting; residual-checked by caller
        return spla.splu(
            M,
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    return spla.splu(M, permc_spec="COLAMD")


def steady_state(
    L: Liouvillian,
    constraint_level: int = 0,
    residual_tol: float = 1e-10,
    info: dict | None = None,
) -> np.ndarray:
    """Unique stationary state of ``L``.

    The row of the superoperator belonging to the population of basis state
    ``constraint_level`` is replaced by the trace functional and the
    resulting sparse system is solved directly. Only population rows are
    redundant, so different levels give independent solves of the same
    problem. The solution is Hermitized
    and trace-normalized. ``residual_tol`` bounds ``|L vec(rho)|_inf``
    relative to ``max(1, |L|_inf)``. When ``info`` is a dict it receives the
    residual and a 1-norm condition estimate.
    """
    if L.n_channels == 0:
        raise SingularSystemError("no dissipative channel: the steady state is not unique")
    if not 0 <= constraint_level < L.dim:
        raise IndexError("constraint_level out of range")
    M, rhs = _constrained_system(L, constraint_level * (L.dim + 1))
    scale = max(1.0, spla.norm(L.matrix, np.inf))
    rho = None
    for fast in (True, False):
        try:
            lu = _factorize(M, fast)
        except RuntimeError as exc:
            if fast:
                continue
            raise SingularSystemError(f"constrained Liouvillian is singular: {exc}") from exc
        x = lu.solve(rhs)
        if not np.all(np.isfinite(x)):
            continue
        cand = unvec(x, L.dim)
        cand = 0.5 * (cand + cand.conj().T)
        tr = np.trace(cand).real
        if abs(tr) < 1e-300:
            continue
        cand = cand / tr
        residual = float(np.max(np.abs(L.matrix @ vec(cand))))
        if residual <= residual_tol * scale:
            rho = cand
            break
    if rho is None:
        raise SingularSystemError(
            "steady-state solve did not reach the residual tolerance "
            "(dark state or zero-rate channel set?)"
        )
    if info is not None:
        info["residual"] = residual
        info["condition_estimate"] = _condition_estimate(M, lu)
    return rho


def _condition_estimate(M: sp.csc_matrix, lu) -> float:
    n = M.shape[0]
    inv = spla.LinearOperator(
        (n, n),
        matvec=lu.solve,
        rmatvec=lambda y: lu.solve(y, trans="H"),
        dtype=complex,
    )
    return float(spla.norm(M, 1) * spla.onenormest(inv))


# -- time evolution -------------------------------------------------------------

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


def _generator(H_of_t, channels: Sequence[CollapseChannel]):
    # K rho + (K rho)^dag + sum c rho c^dag, valid for Hermitian rho
    jumps = [math.sqrt(ch.rate) * np.asarray(ch.operator) for ch in channels]
    jumps = [(c, c.conj().T) for c in jumps]
    damp = 0.0
    for c, cd in jumps:
        damp = damp + cd @ c
    if callable(H_of_t):
        def K_of(t):
            return -1j * np.asarray(H_of_t(t)) - 0.5 * damp
    else:
        K0 = -1j * np.asarray(H_of_t) - 0.5 * damp

        def K_of(t):
            return K0

    def f(t, rho):
        out = K_of(t) @ rho
        out = out + out.conj().T
        for c, cd in jumps:
            out = out + c @ rho @ cd
        return out

    return f


def evolve(
    H_of_t,
    channels: Sequence[CollapseChannel],
    rho0: np.ndarray,
    t_final: float,
    tol: float = 1e-8,
    t0: float = 0.0,
    t_eval: Sequence[float] | None = None,
    first_step: float | None = None,
    max_steps: int = 10_000_000,
):
    """Integrate the master equation from ``t0`` to ``t_final`` (us).

    ``H_of_t`` is a constant Hamiltonian or a callable ``t -> H``. Steps are
    Dormand-Prince 5(4) with a PI step-size controller; the local error
    estimate of every accepted step is below ``tol`` in the max norm. When
    ``t_eval`` is given, the states at those times are returned as a list
    (steps are clipped to land on them); otherwise the final state.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    rho = np.array(rho0, dtype=complex)
    rho = 0.5 * (rho + rho.conj().T)
    f = _generator(H_of_t, channels)
    targets = sorted(t_eval) if t_eval is not None else [t_final]
    if targets and (targets[0] < t0 or targets[-1] > t_final):
        raise ValueError("t_eval must lie within [t0, t_final]")
    if t_eval is not None and targets[-1] != t_final:
        targets.append(t_final)
    out = []
    t = t0
    span = t_final - t0
    if span == 0:
        return [rho.copy() for _ in (t_eval or [])] if t_eval is not None else rho
    h = first_step if first_step else min(span, 1e-3 * span + 1e-6)
    k1 = f(t, rho)
    err_prev = 1.0
    safety, alpha, beta = 0.9, 0.7 / 5, 0.4 / 5
    steps = 0
    ti = 0
    while ti < len(targets):
        target = targets[ti]
        if t >= target:
            if t_eval is not None and ti < len(t_eval):
                out.append(rho.copy())
            ti += 1
            continue
        h = min(h, target - t)
        if h <= 1e-14 * max(1.0, abs(t)):
            raise StepSizeUnderflowError(f"step size {h:.3e} underflowed at t={t:.6g}")
        ks = [k1]
        for i in range(1, 7):
            y = rho.copy()
            for aij, kj in zip(_A[i], ks):
                if aij:
                    y += (h * aij) * kj
            ks.append(f(t + _C[i] * h, y))
        y5 = rho.copy()
        for bi, ki in zip(_B5, ks):
            if bi:
                y5 += (h * bi) * ki
        err_mat = sum((h * ei) * ki for ei, ki in zip(_E, ks) if ei)
        err = float(np.max(np.abs(err_mat))) / tol
        steps += 1
        if steps > max_steps:
            raise StepSizeUnderflowError("maximum number of steps exceeded")
        if err <= 1.0:
            t = t + h
            if abs(t - target) < 1e-12 * max(1.0, abs(target)):
                t = target
            rho = 0.5 * (y5 + y5.conj().T)
            k1 = ks[6] if np.array_equal(rho, y5) else f(t, rho)
            factor = safety * max(err, 1e-10) ** (-alpha) * err_prev**beta
            err_prev = max(err, 1e-4)
            h = h * min(5.0, max(0.2, factor))
        else:
            h = h * max(0.1, safety * err ** (-1 / 5))
    if t_eval is not None:
        return out
    return rho
