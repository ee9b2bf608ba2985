"""JSON configuration for sweeps, validation and the CLI.

Rates in the file are plain MHz (the value divided by 2*pi) and are
converted to rad/us on load. Circuit elements use fF, nH and GHz.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .circuit import CircuitParams
from .hamiltonian import DimerParams, mhz, to_mhz

SCHEMA_VERSION = 1

DEFAULT_J_MHZ = (0.0, 1.0, 2.0, 3.0, 4.0, 6.0, 10.0, 20.0, 40.0)
DEFAULT_OMEGA_MHZ = (0.1, 0.3, 0.76, 1.5, 2.5, 4.0)

_DIMER_KEYS = ("delta_a", "delta_b", "u_a", "u_b", "v", "kappa_a", "kappa_b")


class ConfigError(ValueError):
    """Invalid configuration file or value."""


@dataclass(frozen=True)
class SpectrumConfig:
    j_ac_mhz: float = 20.0
    probe: str = "a"
    span_mhz: float = 40.0
    n_points: int = 201


@dataclass(frozen=True)
class MeasurementConfig:
    n_add: float = 2.0
    n_samples: int = 1_000_000
    alpha: float = 1.0


@dataclass(frozen=True)
class SweepConfig:
    j_ac_mhz: tuple = DEFAULT_J_MHZ
    omega_mhz: tuple = DEFAULT_OMEGA_MHZ
    dimer: DimerParams = field(default_factory=DimerParams.device)
    n_max: int = 5
    n_phases: int = 8
    randomized_phases: bool = False
    truncation_tol: float = 1e-4
    max_escalations: int = 1
    workers: int = 1
    seed: int = 0
    out: str = "out"
    circuit: CircuitParams = field(default_factory=CircuitParams)
    spectrum: SpectrumConfig = field(default_factory=SpectrumConfig)
    measurement: MeasurementConfig = field(default_factory=MeasurementConfig)

    def __post_init__(self):
        for name in ("j_ac_mhz", "omega_mhz"):
            grid = tuple(float(v) for v in getattr(self, name))
            if not grid:
                raise ConfigError(f"{name} grid is empty")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigError(f"{name} grid must be strictly increasing")
            object.__setattr__(self, name, grid)
        if min(self.j_ac_mhz) < 0:
            raise ConfigError("j_ac values must be >= 0")
        if min(self.omega_mhz) < 0:
            raise ConfigError("drive rates must be >= 0")
        if int(self.n_max) != self.n_max or self.n_max < 3:
            raise ConfigError("n_max must be an integer >= 3")
        if self.n_phases < 1:
            raise ConfigError("n_phases must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not self.truncation_tol > 0:
            raise ConfigError("truncation_tol must be positive")
        if self.max_escalations < 0:
            raise ConfigError("max_escalations must be >= 0")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    @property
    def j_ac(self) -> tuple:
        return tuple(mhz(v) for v in self.j_ac_mhz)

    @property
    def omega(self) -> tuple:
        return tuple(mhz(v) for v in self.omega_mhz)

    def replace(self, **changes) -> "SweepConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        """Plain-MHz dictionary that :func:`config_from_dict` reads back."""
        return {
            "schema_version": SCHEMA_VERSION,
            "grid": {"j_ac_mhz": list(self.j_ac_mhz), "omega_mhz": list(self.omega_mhz)},
            "dimer": {k: to_mhz(getattr(self.dimer, k)) for k in _DIMER_KEYS},
            "n_max": self.n_max,
            "n_phases": self.n_phases,
            "randomized_phases": self.randomized_phases,
            "truncation_tol": self.truncation_tol,
            "max_escalations": self.max_escalations,
            "workers": self.workers,
            "seed": self.seed,
            "out": self.out,
            "circuit": {f.name: getattr(self.circuit, f.name) for f in fields(CircuitParams) if f.name != "phi0"},
            "spectrum": asdict(self.spectrum),
            "measurement": asdict(self.measurement),
        }

    def provenance(self) -> str:
        """Canonical JSON used in output headers; the worker count is left out."""
        d = self.to_dict()
        d.pop("workers")
        d.pop("out")
        return json.dumps(d, sort_keys=True, separators=(",", ":"))


_TOP_KEYS = {
    "schema_version", "grid", "dimer", "n_max", "n_phases", "randomized_phases",
    "truncation_tol", "max_escalations", "workers", "seed", "out",
    "circuit", "spectrum", "measurement",
}


def _check_keys(section: str, data: dict, allowed) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"{section} must be an object")
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {', '.join(sorted(unknown))}")


def _number(section, key, value, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number")
    if kind is int and int(value) != value:
        raise ConfigError(f"{section}.{key} must be an integer")
    return kind(value)


def config_from_dict(data: dict) -> SweepConfig:
    _check_keys("config", data, _TOP_KEYS)
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    kw = {}
    grid = data.get("grid", {})
    _check_keys("grid", grid, ("j_ac_mhz", "omega_mhz"))
    for key in ("j_ac_mhz", "omega_mhz"):
        if key in grid:
            vals = grid[key]
            if not isinstance(vals, list):
                raise ConfigError(f"grid.{key} must be a list")
            kw[key] = tuple(_number("grid", key, v) for v in vals)

    dimer = data.get("dimer", {})
    _check_keys("dimer", dimer, _DIMER_KEYS)
    base = DimerParams.device()
    try:
        kw["dimer"] = base.replace(**{k: mhz(_number("dimer", k, v)) for k, v in dimer.items()})
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    for key in ("n_max", "n_phases", "max_escalations", "workers", "seed"):
        if key in data:
            kw[key] = _number("config", key, data[key], int)
    if "truncation_tol" in data:
        kw["truncation_tol"] = _number("config", "truncation_tol", data["truncation_tol"])
    if "randomized_phases" in data:
        if not isinstance(data["randomized_phases"], bool):
            raise ConfigError("randomized_phases must be true or false")
        kw["randomized_phases"] = data["randomized_phases"]
    if "out" in data:
        kw["out"] = str(data["out"])

    circuit = data.get("circuit", {})
    names = [f.name for f in fields(CircuitParams) if f.name != "phi0"]
    _check_keys("circuit", circuit, names)
    try:
        kw["circuit"] = CircuitParams(**{k: _number("circuit", k, v) for k, v in circuit.items()})
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    for key, cls in (("spectrum", SpectrumConfig), ("measurement", MeasurementConfig)):
        section = data.get(key, {})
        _check_keys(key, section, [f.name for f in fields(cls)])
        kw[key] = cls(**section)
    if kw["spectrum"].probe not in ("a", "b"):
        raise ConfigError("spectrum.probe must be 'a' or 'b'")
    return SweepConfig(**kw)


def load_config(path=None, overrides: dict | None = None) -> SweepConfig:
    """Read a JSON config (defaults when ``path`` is None) and apply overrides."""
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    cfg = config_from_dict(data)
    if overrides:
        try:
            cfg = cfg.replace(**{k: v for k, v in overrides.items() if v is not None})
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
    return cfg
