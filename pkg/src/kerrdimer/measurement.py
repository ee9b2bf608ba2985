"""Phase-cycled quadrature detection and noise deconvolution.

The detected quadrature of each mode is ``I = (a + a^dag) / 2`` plus
independent amplifier noise. Both local-oscillator phases are cycled
uniformly and independently, so only moments with equal numbers of creation
and annihilation operators per mode survive the phase average.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .fock import infer_space, normal_moment

MAX_ORDER = 4
KINDS = ("on", "off", "diff")


def _orders():
    return [(n, m) for n in range(MAX_ORDER + 1) for m in range(MAX_ORDER + 1 - n)]


ORDERS = tuple(_orders())


class NonGaussianSourceError(ValueError):
    """Sampling only supports Gaussian calibration states."""


@dataclass(frozen=True)
class MomentTable:
    """Moments <I_a^n I_b^m> for n + m <= 4."""

    entries: dict = field(default_factory=dict)
    kind: str = "diff"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        full = {nm: 0.0 for nm in ORDERS}
        for key, val in dict(self.entries).items():
            key = tuple(int(k) for k in key)
            if key not in full:
                raise ValueError(f"moment order {key} outside n + m <= {MAX_ORDER}")
            full[key] = float(val)
        full[(0, 0)] = 1.0
        object.__setattr__(self, "entries", full)

    def __getitem__(self, nm) -> float:
        return self.entries[tuple(nm)]

    def check(self, tol: float = 0.0) -> None:
        if self.kind == "diff":
            return
        for nm in ((2, 0), (0, 2), (4, 0), (0, 4), (2, 2)):
            if self.entries[nm] < -tol:
                raise ValueError(f"even moment {nm} is negative in an {self.kind} table")

    def max_abs_diff(self, other: "MomentTable") -> float:
        return max(abs(self.entries[k] - other.entries[k]) for k in ORDERS)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "m", "value", "kind"])
        for n, m in ORDERS:
            w.writerow([n, m, repr(self.entries[(n, m)]), self.kind])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "MomentTable":
        rows = list(csv.DictReader(io.StringIO(text)))
        kinds = {r["kind"] for r in rows}
        if len(kinds) != 1:
            raise ValueError("a moment table CSV holds exactly one kind")
        return cls({(int(r["n"]), int(r["m"])): float(r["value"]) for r in rows}, kinds.pop())


@dataclass(frozen=True)
class NoiseModel:
    n_add_a: float = 2.0
    n_add_b: float = 2.0
    gaussian: bool = True

    def __post_init__(self):
        if self.n_add_a < 0 or self.n_add_b < 0:
            raise ValueError("added noise quanta must be >= 0")
        if not self.gaussian:
            raise ValueError("only Gaussian noise is modelled")

    @property
    def variances(self) -> tuple[float, float]:
        """Quadrature variance per channel, vacuum included."""
        return (2 * self.n_add_a + 1) / 4, (2 * self.n_add_b + 1) / 4


def _gaussian_moment(var: float, k: int) -> float:
    if k % 2:
        return 0.0
    return var ** (k // 2) * math.prod(range(k - 1, 0, -2))


def noise_table(noise: NoiseModel) -> MomentTable:
    """Off table of independent zero-mean Gaussian noise on both channels."""
    va, vb = noise.variances
    return MomentTable(
        {(n, m): _gaussian_moment(va, n) * _gaussian_moment(vb, m) for n, m in ORDERS},
        kind="off",
    )


def state_to_diff_moments(rho: np.ndarray, space=None) -> MomentTable:
    """Phase-averaged normally ordered quadrature moments of ``rho``.

    With independent uniform phases only these survive:
    (2,0) = <a^dag a>/2, (4,0) = 3/8 <a^dag^2 a^2>, (2,2) = <n_a n_b>/4,
    and the mirrored b entries.
    """
    space = infer_space(rho) if space is None else space

    def m(*pqrs):
        return normal_moment(rho, *pqrs, space=space, warn=False).real

    return MomentTable(
        {
            (2, 0): m(1, 1, 0, 0) / 2,
            (0, 2): m(0, 0, 1, 1) / 2,
            (4, 0): 3 / 8 * m(2, 2, 0, 0),
            (0, 4): 3 / 8 * m(0, 0, 2, 2),
            (2, 2): m(1, 1, 1, 1) / 4,
        },
        kind="diff",
    )


def coherent_diff_table(alpha_a: complex, alpha_b: complex = 0.0) -> MomentTable:
    """Diff table of a product coherent state (analytic)."""
    na, nb = abs(alpha_a) ** 2, abs(alpha_b) ** 2
    return MomentTable(
        {(2, 0): na / 2, (0, 2): nb / 2, (4, 0): 3 / 8 * na**2, (0, 4): 3 / 8 * nb**2, (2, 2): na * nb / 4},
        kind="diff",
    )


def _convolve(x: MomentTable, y: MomentTable, kind: str) -> MomentTable:
    out = {}
    for n, m in ORDERS:
        out[(n, m)] = math.fsum(
            comb(n, k) * comb(m, l) * x.entries[(n - k, m - l)] * y.entries[(k, l)]
            for k in range(n + 1)
            for l in range(m + 1)
        )
    return MomentTable(out, kind=kind)


def compose_on(diff: MomentTable, off: MomentTable) -> MomentTable:
    """Moments of signal plus independent noise (binomial double convolution)."""
    return _convolve(off, diff, "on")


def deconvolve(on: MomentTable, off: MomentTable) -> MomentTable:
    """Invert :func:`compose_on` order by order.

    The (k, l) = (n, m) term of the convolution carries the unknown with
    coefficient ``off[0,0] = 1``; all other terms involve lower orders.
    """
    diff = {(0, 0): 1.0}
    for n, m in sorted(ORDERS, key=lambda nm: (sum(nm), nm)):
        if (n, m) == (0, 0):
            continue
        lower = math.fsum(
            comb(n, k) * comb(m, l) * off.entries[(n - k, m - l)] * diff[(k, l)]
            for k in range(n + 1)
            for l in range(m + 1)
            if (k, l) != (n, m)
        )
        diff[(n, m)] = on.entries[(n, m)] - lower
    return MomentTable(diff, kind="diff")


class MomentDenominatorError(ValueError):
    """Second-order quadrature moment too small to normalize g2."""


def g2_from_moments(diff: MomentTable) -> tuple[float, float, float]:
    """(g2_aa, g2_bb, g2_ab) from phase-averaged quadrature moments."""
    ia2, ib2 = diff[(2, 0)], diff[(0, 2)]
    if ia2 <= 1e-12 or ib2 <= 1e-12:
        raise MomentDenominatorError(f"<I^2> = ({ia2:.2e}, {ib2:.2e}) is numerically zero")
    return (
        2 / 3 * diff[(4, 0)] / ia2**2,
        2 / 3 * diff[(0, 4)] / ib2**2,
        diff[(2, 2)] / (ia2 * ib2),
    )


def g2_aa_from_moments(diff: MomentTable) -> float:
    """Single-channel g2 for records where channel b carries no signal."""
    ia2 = diff[(2, 0)]
    if ia2 <= 1e-12:
        raise MomentDenominatorError(f"<I_a^2> = {ia2:.2e} is numerically zero")
    return 2 / 3 * diff[(4, 0)] / ia2**2


# -- sampling ----------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianSource:
    """Calibration state of one channel: ``kind`` is 'coherent', 'thermal' or 'vacuum'."""

    kind: str = "vacuum"
    alpha: complex = 0.0
    n_thermal: float = 0.0

    def __post_init__(self):
        if self.kind not in ("coherent", "thermal", "vacuum"):
            raise NonGaussianSourceError(f"unsupported source {self.kind!r}")
        if self.n_thermal < 0:
            raise ValueError("thermal occupation must be >= 0")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Signal quadrature samples (vacuum noise lives in the noise model)."""
        if self.kind == "coherent":
            phase = rng.uniform(0, 2 * np.pi, n)
            return abs(self.alpha) * np.cos(phase)
        if self.kind == "thermal":
            # Re of a complex Gaussian with <|z|^2> = n_th
            return rng.normal(0.0, math.sqrt(self.n_thermal / 2), n)
        return np.zeros(n)


@dataclass(frozen=True)
class SampledRecord:
    on: MomentTable
    off: MomentTable
    on_samples: tuple = field(repr=False)  # (I_a, I_b)
    off_samples: tuple = field(repr=False)


def _raw_moments(xa: np.ndarray, xb: np.ndarray) -> dict:
    pa = [np.ones_like(xa)]
    pb = [np.ones_like(xb)]
    for _ in range(MAX_ORDER):
        pa.append(pa[-1] * xa)
        pb.append(pb[-1] * xb)
    return {(n, m): float(np.mean(pa[n] * pb[m])) for n, m in ORDERS}


def _chunk_sizes(n: int, chunk: int):
    full, rest = divmod(n, chunk)
    return [chunk] * full + ([rest] if rest else [])


def _draw(source_a, source_b, noise, n_samples, seed, chunk):
    va, vb = noise.variances
    streams = np.random.SeedSequence(seed).spawn(len(_chunk_sizes(n_samples, chunk)))
    xa, xb = [], []
    for ss, size in zip(streams, _chunk_sizes(n_samples, chunk)):
        rng = np.random.default_rng(ss)
        sa = source_a.sample(rng, size)
        sb = source_b.sample(rng, size)
        xa.append(sa + rng.normal(0, math.sqrt(va), size))
        xb.append(sb + rng.normal(0, math.sqrt(vb), size))
    return np.concatenate(xa), np.concatenate(xb)


def simulate_record(
    source_a,
    source_b=None,
    noise: NoiseModel = NoiseModel(),
    n_samples: int = 1_000_000,
    seed: int = 0,
    chunk: int = 250_000,
) -> SampledRecord:
    """Sampled on and off moment tables for Gaussian calibration sources.

    Each sample is the signal quadrature (uniform random LO phase) plus
    Gaussian noise of variance ``(2 n_add + 1)/4``. The off record is drawn
    with the source switched off. Samples are drawn in chunks from
    independent substreams of ``seed``, so the output depends only on the
    seed and sample count.
    """
    if n_samples < 10_000:
        raise ValueError("n_samples must be >= 1e4")
    source_b = GaussianSource() if source_b is None else source_b
    for s in (source_a, source_b):
        if not isinstance(s, GaussianSource):
            raise NonGaussianSourceError(f"source {s!r} is not a Gaussian calibration state")
    on_a, on_b = _draw(source_a, source_b, noise, n_samples, [seed, 0], chunk)
    off_a, off_b = _draw(GaussianSource(), GaussianSource(), noise, n_samples, [seed, 1], chunk)
    return SampledRecord(
        on=MomentTable(_raw_moments(on_a, on_b), "on"),
        off=MomentTable(_raw_moments(off_a, off_b), "off"),
        on_samples=(on_a, on_b),
        off_samples=(off_a, off_b),
    )


def _block_sums(xa: np.ndarray, xb: np.ndarray, n_blocks: int) -> np.ndarray:
    """Per-block sums of x_a^n x_b^m, shape (n_blocks, len(ORDERS))."""
    ia = np.array_split(np.arange(len(xa)), n_blocks)
    out = np.empty((n_blocks, len(ORDERS)))
    for b, idx in enumerate(ia):
        ya, yb = xa[idx], xb[idx]
        pa = [np.ones_like(ya)]
        pb = [np.ones_like(yb)]
        for _ in range(MAX_ORDER):
            pa.append(pa[-1] * ya)
            pb.append(pb[-1] * yb)
        out[b] = [np.sum(pa[n] * pb[m]) for n, m in ORDERS]
    return out


def bootstrap_g2_aa(record: SampledRecord, n_boot: int = 100, n_blocks: int = 200,
                    seed: int = 0) -> tuple[float, float]:
    """(g2_aa, bootstrap standard error) of a sampled record, channel a only.

    Samples are independent, so resampling equal blocks with replacement
    is equivalent to resampling single shots and much cheaper.
    """
    est = g2_aa_from_moments(deconvolve(record.on, record.off))
    on_sums = _block_sums(*record.on_samples, n_blocks)
    off_sums = _block_sums(*record.off_samples, n_blocks)
    n_on, n_off = len(record.on_samples[0]), len(record.off_samples[0])
    rng = np.random.default_rng(seed)
    vals = []
    for _ in range(n_boot):
        i = rng.integers(0, n_blocks, n_blocks)
        j = rng.integers(0, n_blocks, n_blocks)
        on = MomentTable(dict(zip(ORDERS, on_sums[i].sum(axis=0) / n_on)), "on")
        off = MomentTable(dict(zip(ORDERS, off_sums[j].sum(axis=0) / n_off)), "off")
        vals.append(g2_aa_from_moments(deconvolve(on, off)))
    return est, float(np.std(vals, ddof=1))
