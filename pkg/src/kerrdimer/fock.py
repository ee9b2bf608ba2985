"""Truncated Fock-space operators for a pair of bosonic modes.

Operators and density matrices are plain dense ``numpy`` arrays. Mode order
is fixed: mode ``a`` (index 0) is the leading Kronecker factor, mode ``b``
(index 1) the trailing one, so the basis state ``|n_a n_b>`` sits at index
``n_a * dim_b + n_b``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg


class TruncationWarning(UserWarning):
    """Population near the Fock cutoff is large enough to bias moments."""


#: population of the top two Fock levels above which moments are suspect
TRUNCATION_THRESHOLD = 1e-6


@dataclass(frozen=True)
class ModeSpace:
    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    @property
    def dim(self) -> int:
        return self.n_max + 1


@dataclass(frozen=True)
class ProductSpace:
    modes: tuple[ModeSpace, ...]

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ValueError("a product space needs at least one mode")

    @classmethod
    def two_mode(cls, n_max_a: int, n_max_b: int | None = None) -> "ProductSpace":
        if n_max_b is None:
            n_max_b = n_max_a
        return cls((ModeSpace(n_max_a), ModeSpace(n_max_b)))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(m.dim for m in self.modes)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def enlarged(self, extra: int) -> "ProductSpace":
        """Same space with every mode cutoff raised by ``extra``."""
        return ProductSpace(tuple(ModeSpace(m.n_max + extra) for m in self.modes))

    def index(self, *occupations: int) -> int:
        """Basis index of ``|n_0 n_1 ...>``."""
        if len(occupations) != len(self.modes):
            raise ValueError("one occupation per mode required")
        return int(np.ravel_multi_index(occupations, self.dims))


def _as_product(space) -> ProductSpace:
    if isinstance(space, ModeSpace):
        return ProductSpace((space,))
    return space


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@lru_cache(maxsize=64)
def _destroy_cached(space: ProductSpace, mode_index: int) -> np.ndarray:
    factors = []
    for k, mode in enumerate(space.modes):
        if k == mode_index:
            factors.append(np.diag(np.sqrt(np.arange(1, mode.dim, dtype=float)), 1))
        else:
            factors.append(np.eye(mode.dim))
    op = factors[0]
    for f in factors[1:]:
        op = np.kron(op, f)
    return _frozen(op.astype(complex))


def destroy(space, mode_index: int = 0) -> np.ndarray:
    """Annihilation operator of one mode, tensored with identities.

    The returned array is read-only and shared between callers.
    """
    space = _as_product(space)
    if not 0 <= mode_index < len(space.modes):
        raise IndexError(f"mode_index {mode_index} out of range for {len(space.modes)} modes")
    return _destroy_cached(space, mode_index)


def create(space, mode_index: int = 0) -> np.ndarray:
    return _frozen(destroy(space, mode_index).conj().T.copy())


def number(space, mode_index: int = 0) -> np.ndarray:
    a = destroy(space, mode_index)
    return a.conj().T @ a


def identity(space) -> np.ndarray:
    return np.eye(_as_product(space).dim, dtype=complex)


def tensor(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kronecker product with ``A`` as the leading factor."""
    return np.kron(A, B)


def expect(rho: np.ndarray, op: np.ndarray) -> complex:
    """``trace(rho @ op)`` without forming the product."""
    rho = np.asarray(rho)
    op = np.asarray(op)
    if rho.shape != op.shape or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"dimension mismatch: rho {rho.shape} vs operator {op.shape}")
    return complex(np.einsum("ij,ji->", rho, op))


def infer_space(rho: np.ndarray) -> ProductSpace:
    """Two-mode space with equal cutoffs matching the dimension of ``rho``."""
    dim = np.asarray(rho).shape[0]
    side = int(round(np.sqrt(dim)))
    if side * side != dim or side < 2:
        raise ValueError(
            f"cannot infer a symmetric two-mode space from dimension {dim}; pass space explicitly"
        )
    return ProductSpace.two_mode(side - 1)


def mode_populations(rho: np.ndarray, space: ProductSpace) -> list[np.ndarray]:
    """Photon-number distribution of each mode (diagonal of the reduced states)."""
    diag = np.real(np.diagonal(rho)).reshape(space.dims)
    out = []
    for k in range(len(space.modes)):
        axes = tuple(i for i in range(len(space.modes)) if i != k)
        out.append(diag.sum(axis=axes) if axes else diag)
    return out


def top_level_population(rho: np.ndarray, space: ProductSpace) -> float:
    """Largest population held in the top two Fock levels of any mode."""
    return max(float(p[-2:].sum()) for p in mode_populations(rho, space))


def normal_moment(rho, p: int, q: int, r: int = 0, s: int = 0, space=None, warn: bool = True) -> complex:
    """Normally ordered moment <a^dag^p a^q b^dag^r b^s>.

    Warns with :class:`TruncationWarning` when the top two Fock levels of
    either mode hold more than ``TRUNCATION_THRESHOLD`` population, unless
    ``warn`` is false.
    """
    if min(p, q, r, s) < 0:
        raise ValueError("moment orders must be non-negative")
    space = infer_space(rho) if space is None else _as_product(space)
    if len(space.modes) != 2:
        raise ValueError("normal_moment is defined for two-mode spaces")
    rho = np.asarray(rho)
    if rho.shape != (space.dim, space.dim):
        raise ValueError(f"rho has shape {rho.shape}, space dimension is {space.dim}")
    pop = top_level_population(rho, space) if warn else 0.0
    if pop > TRUNCATION_THRESHOLD:
        warnings.warn(
            f"top-level Fock population {pop:.2e} exceeds {TRUNCATION_THRESHOLD:g}",
            TruncationWarning,
            stacklevel=2,
        )
    a = destroy(space, 0)
    b = destroy(space, 1)
    mp = np.linalg.matrix_power
    op = mp(a.conj().T, p) @ mp(a, q) @ mp(b.conj().T, r) @ mp(b, s)
    return expect(rho, op)


def check_density_matrix(rho: np.ndarray, atol: float = 1e-9, psd_tol: float = 1e-8) -> None:
    """Raise ``ValueError`` unless ``rho`` is Hermitian, unit-trace and PSD."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > atol:
        raise ValueError(f"not Hermitian (max deviation {herm:.2e})")
    tr = np.trace(rho)
    if abs(tr - 1) > atol:
        raise ValueError(f"trace is {tr}, expected 1")
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lam < -psd_tol:
        raise ValueError(f"smallest eigenvalue {lam:.2e} is negative")


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    diff = np.asarray(rho) - np.asarray(sigma)
    return 0.5 * float(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))).sum())


# -- common states -----------------------------------------------------------


def fock_dm(space: ProductSpace, *occupations: int) -> np.ndarray:
    psi = np.zeros(space.dim, dtype=complex)
    psi[space.index(*occupations)] = 1.0
    return np.outer(psi, psi.conj())


def vacuum_dm(space: ProductSpace) -> np.ndarray:
    return fock_dm(space, *([0] * len(space.modes)))


def coherent_dm(space: ProductSpace, *alphas: complex) -> np.ndarray:
    """Displaced vacuum ``D(alpha_a) D(alpha_b) |0 0>`` on the truncated space."""
    if len(alphas) != len(space.modes):
        raise ValueError("one amplitude per mode required")
    gen = np.zeros((space.dim, space.dim), dtype=complex)
    for k, alpha in enumerate(alphas):
        a = destroy(space, k)
        gen += alpha * a.conj().T - np.conj(alpha) * a
    psi = scipy.linalg.expm(gen)[:, 0]
    return np.outer(psi, psi.conj())


def thermal_dm(space: ProductSpace, *n_means: float) -> np.ndarray:
    """Product of thermal states, renormalized after truncation."""
    if len(n_means) != len(space.modes):
        raise ValueError("one mean occupation per mode required")
    diag = np.ones(1)
    for mode, nbar in zip(space.modes, n_means):
        n = np.arange(mode.dim)
        p = (nbar / (1.0 + nbar)) ** n if nbar > 0 else (n == 0).astype(float)
        diag = np.kron(diag, p)
    return np.diag(diag / diag.sum()).astype(complex)


def random_density_matrix(space: ProductSpace, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random full-rank (or ``rank``-limited) state from a complex Ginibre matrix."""
    rank = space.dim if rank is None else rank
    g = rng.standard_normal((space.dim, rank)) + 1j * rng.standard_normal((space.dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
