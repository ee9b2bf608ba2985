"""Command-line entry point: ``kerrdimer <command> [options]``.

Exit codes: 0 success, 1 a cell or check failed, 2 bad configuration or usage.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import hopping_components, normal_modes, zero_coupling_flux
from .config import ConfigError, load_config
from .contour import contours_to_json
from .correlations import FitError, fit_lorentzian, transmission_spectrum
from .heatmap import render_heatmap
from .hamiltonian import mhz, to_mhz
from .sweep import read_sweep_csv, run_sweep, write_sweep_csv
from .validation import run_validation

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON configuration file")
    common.add_argument("--out", help="output directory (default from config: out)")
    common.add_argument("--workers", type=_positive, help="worker processes for the sweep")
    common.add_argument("--seed", type=_u64, help="random seed")
    common.add_argument("--nmax", type=int, help="Fock cutoff per mode")

    parser = argparse.ArgumentParser(prog="kerrdimer", description="Driven-dissipative Kerr dimer toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="phase-diagram sweep, contours and heatmaps")
    for name, text in (("contour", "contours.json from an existing sweep.csv"),
                       ("heatmap", "SVG heatmaps from an existing sweep.csv")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--csv", type=Path, help="sweep CSV (default: <out>/sweep.csv)")
    sub.add_parser("spectrum", parents=[common], help="weak-probe transmission spectrum")
    sub.add_parser("circuit", parents=[common], help="lumped-circuit modes and hopping versus flux")
    sub.add_parser("validate", parents=[common], help="run the self-checks")
    return parser


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit_figures(result, out: Path) -> None:
    _write(out / "contours.json", _dump(contours_to_json(result)))
    for field in ("g2_ab", "g2_aa"):
        path = render_heatmap(result, field, out / f"{field}.svg")
        print(f"wrote {path}")


def cmd_sweep(config, out: Path, args) -> int:
    n = len(config.j_ac_mhz) * len(config.omega_mhz)

    def progress(done, total):
        print(f"\r{done}/{total} cells", end="", file=sys.stderr, flush=True)

    result = run_sweep(config, progress=progress if config.workers == 1 else None)
    if config.workers == 1:
        print(file=sys.stderr)
    write_sweep_csv(result, out / "sweep.csv")
    print(f"wrote {out / 'sweep.csv'}")
    _emit_figures(result, out)
    flagged = sum(r.truncation_flag for r in result.rows)
    print(f"{n} cells, {result.n_failed} failed, {flagged} truncation-flagged")
    for r in result.rows:
        if not r.ok:
            print(f"  J={r.j_ac_mhz} MHz, Omega={r.omega_mhz} MHz: {r.status}", file=sys.stderr)
    return EXIT_FAIL if result.n_failed else EXIT_OK


def _load_sweep(out: Path, args):
    path = args.csv or out / "sweep.csv"
    try:
        return read_sweep_csv(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read sweep {path}: {exc}") from exc


def cmd_contour(config, out: Path, args) -> int:
    result = _load_sweep(out, args)
    _write(out / "contours.json", _dump(contours_to_json(result)))
    return EXIT_FAIL if result.n_failed else EXIT_OK


def cmd_heatmap(config, out: Path, args) -> int:
    result = _load_sweep(out, args)
    for field in ("g2_ab", "g2_aa"):
        print(f"wrote {render_heatmap(result, field, out / f'{field}.svg')}")
    return EXIT_FAIL if result.n_failed else EXIT_OK


def cmd_spectrum(config, out: Path, args) -> int:
    s = config.spectrum
    params = config.dimer.replace(j_ac=mhz(s.j_ac_mhz), omega_a=0.0, omega_b=0.0)
    grid = np.linspace(-mhz(s.span_mhz), mhz(s.span_mhz), s.n_points)
    spec = transmission_spectrum(params, s.probe, grid)
    rows = ["detuning_mhz,amplitude"] + [f"{float(to_mhz(x))!r},{float(y)!r}" for x, y in zip(spec.detunings, spec.amplitudes)]
    _write(out / "spectrum.csv", "\n".join(rows) + "\n")
    try:
        fit = fit_lorentzian(spec, 2)
    except FitError as exc:
        print(f"peak fit failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    centers = [to_mhz(c) for c in fit.centers]
    report = {
        "j_ac_mhz": s.j_ac_mhz,
        "probe": s.probe,
        "peak_centers_mhz": centers,
        "peak_half_widths_mhz": [to_mhz(w) for w in fit.widths],
        "splitting_mhz": abs(centers[1] - centers[0]),
    }
    _write(out / "spectrum.json", _dump(report))
    print(f"splitting {report['splitting_mhz']:.3f} MHz (2 J = {2 * s.j_ac_mhz:.3f} MHz)")
    return EXIT_OK


def cmd_circuit(config, out: Path, args) -> int:
    cp = config.circuit
    ghz = 1 / (2 * math.pi)
    table = []
    for flux in np.round(np.linspace(-0.49, 0.49, 99), 6):
        w_minus, w_plus = normal_modes(cp, float(flux))
        j_c, j_l = hopping_components(cp, float(flux))
        table.append({
            "flux": float(flux), "omega_minus_ghz": w_minus * ghz, "omega_plus_ghz": w_plus * ghz,
            "j_c_ghz": j_c * ghz, "j_l_ghz": j_l * ghz, "j_dc_ghz": (j_c - j_l) * ghz,
        })
    star = zero_coupling_flux(cp)
    report = {
        "l_j0_nh": cp.l_j0,
        "zero_coupling_flux": [star, zero_coupling_flux(cp, interval=(0.0, 0.5))],
        "modes_at_zero_coupling_ghz": [w * ghz for w in normal_modes(cp, star)],
        "table": table,
    }
    _write(out / "circuit.json", _dump(report))
    print(f"zero-coupling flux {star:.4f} Phi0")
    return EXIT_OK


def cmd_validate(config, out: Path, args) -> int:
    def progress(check):
        print(f"{'PASS' if check.passed else 'FAIL'}  {check.name}", file=sys.stderr, flush=True)

    report = run_validation(config, progress=progress)
    _write(out / "validation.json", report.to_json())
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_FAIL


COMMANDS = {
    "sweep": cmd_sweep,
    "contour": cmd_contour,
    "heatmap": cmd_heatmap,
    "spectrum": cmd_spectrum,
    "circuit": cmd_circuit,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, {
            "out": args.out, "workers": args.workers, "seed": args.seed, "n_max": args.nmax,
        })
        return COMMANDS[args.command](config, Path(config.out), args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
