"""Phase-diagram sweep over hopping rate and drive strength."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .config import SweepConfig, config_from_dict
from .correlations import CorrelationResult, phase_averaged_g2
from .fock import ProductSpace
from .hamiltonian import mhz

FIELDS = ("g2_aa", "g2_bb", "g2_ab", "n_a", "n_b")


@dataclass(frozen=True)
class SweepRow:
    j_ac_mhz: float
    omega_mhz: float
    g2_aa: float
    g2_bb: float
    g2_ab: float
    n_a: float
    n_b: float
    truncation_flag: bool
    phase_spread: float
    n_max_used: int
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


COLUMNS = tuple(f.name for f in fields(SweepRow))


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    rows: tuple

    @property
    def j_ac_mhz(self) -> np.ndarray:
        return np.array(self.config.j_ac_mhz)

    @property
    def omega_mhz(self) -> np.ndarray:
        return np.array(self.config.omega_mhz)

    @property
    def n_failed(self) -> int:
        return sum(not r.ok for r in self.rows)

    def grid(self, name: str) -> np.ndarray:
        """Field values as an array indexed [j_ac, omega]."""
        if name not in FIELDS + ("phase_spread",):
            raise KeyError(f"unknown field {name!r}")
        nj, no = len(self.config.j_ac_mhz), len(self.config.omega_mhz)
        return np.array([getattr(r, name) for r in self.rows], dtype=float).reshape(nj, no)

    def row(self, j_ac_mhz: float, omega_mhz: float) -> SweepRow:
        for r in self.rows:
            if r.j_ac_mhz == j_ac_mhz and r.omega_mhz == omega_mhz:
                return r
        raise KeyError((j_ac_mhz, omega_mhz))


def _relative_gap(a: CorrelationResult, b: CorrelationResult) -> float:
    return max(abs(getattr(a, f) - getattr(b, f)) / max(abs(getattr(b, f)), 1e-300) for f in FIELDS)


def converged_cell(params, config: SweepConfig, seed=None):
    """Phase-averaged g2 at the smallest checked cutoff that agrees with cutoff + 2.

    Returns (result, cutoff, converged). Starting at ``config.n_max`` the
    cutoff is raised by 2 at most ``max_escalations`` times.
    """
    n = config.n_max

    def run(cut):
        return phase_averaged_g2(
            params, ProductSpace.two_mode(cut), config.n_phases,
            randomized=config.randomized_phases, seed=seed,
        )

    low = run(n)
    for step in range(config.max_escalations + 1):
        high = run(n + 2)
        if _relative_gap(low, high) <= config.truncation_tol:
            return low, n, True
        if step == config.max_escalations:
            break
        low, n = high, n + 2
    return low, n, False


def _cell(args) -> SweepRow:
    config, i, j = args
    j_mhz, o_mhz = config.j_ac_mhz[i], config.omega_mhz[j]
    params = config.dimer.replace(j_ac=mhz(j_mhz), omega_a=mhz(o_mhz), omega_b=mhz(o_mhz))
    seed = int(np.random.SeedSequence([config.seed, i, j]).generate_state(1)[0])
    try:
        res, cut, ok = converged_cell(params, config, seed)
    except Exception as exc:  # recorded per cell, the sweep carries on
        nan = math.nan
        return SweepRow(j_mhz, o_mhz, nan, nan, nan, nan, nan, True, nan, config.n_max,
                        f"error: {type(exc).__name__}: {exc}")
    return SweepRow(j_mhz, o_mhz, res.g2_aa, res.g2_bb, res.g2_ab, res.n_a, res.n_b,
                    not ok, res.phase_spread, cut)


def run_sweep(config: SweepConfig, progress=None) -> SweepResult:
    """Evaluate every grid cell; rows are ordered by j_ac, then omega.

    Cells run in a process pool of ``config.workers``; each cell is a pure
    function of the config and its indices, so the result does not depend
    on the worker count.
    """
    tasks = [(config, i, j) for i in range(len(config.j_ac_mhz)) for j in range(len(config.omega_mhz))]
    if config.workers == 1:
        rows = []
        for t in tasks:
            rows.append(_cell(t))
            if progress:
                progress(len(rows), len(tasks))
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_cell, tasks))
    rows.sort(key=lambda r: (r.j_ac_mhz, r.omega_mhz))
    return SweepResult(config, tuple(rows))


# -- CSV -------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def sweep_to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    buf.write(f"# kerrdimer {__version__}\n")
    buf.write(f"# config: {result.config.provenance()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in result.rows:
        w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def write_sweep_csv(result: SweepResult, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(sweep_to_csv(result))
    return path


def read_sweep_csv(path) -> SweepResult:
    text = Path(path).read_text()
    lines = text.splitlines()
    config = None
    body = []
    for line in lines:
        if line.startswith("# config: "):
            config = config_from_dict(json.loads(line[len("# config: "):]))
        elif not line.startswith("#"):
            body.append(line)
    if config is None:
        raise ValueError(f"{path} has no config header")
    rows = []
    for rec in csv.DictReader(body):
        rows.append(SweepRow(
            j_ac_mhz=float(rec["j_ac_mhz"]),
            omega_mhz=float(rec["omega_mhz"]),
            **{f: float(rec[f]) for f in FIELDS},
            truncation_flag=rec["truncation_flag"] == "true",
            phase_spread=float(rec["phase_spread"]),
            n_max_used=int(rec["n_max_used"]),
            status=rec["status"],
        ))
    return SweepResult(config, tuple(rows))
