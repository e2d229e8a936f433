"""Command-line entry point: `surface-spins <command> [options]`.

Every command resolves to a RunConfig (from --config and/or flags), runs the
matching library operation, writes its output file and prints one summary line.
"""

import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional

import numpy as np

from crystal.presets import PRESETS, build_preset
from crystal.structure import Structure
from crystal.termination import EDGE_VARIANTS
from crystal.topology import enumerate_dbs, spin_areal_density
from errors import ConfigError, InputError, SurfaceSpinError
from fileio.run_config import RunConfig, load_config
from fileio.structure_io import emit_structure, parse_structure
from fileio.tables import (anneal_table, dbs_table, desorb_table, eseem_table, fit_table, scan_table,
                           sweep_table, write_table)
from hyperfine.fixture import DEFAULT_FIXTURE, load_fixture, resolve_a_iso
from hyperfine.inversion import fit_geometry
from hyperfine.isotopes import ISOTOPES, isotope
from hyperfine.scan import db_spin_center, scan_structure
from kinetics.desorption import (EDGE_MODELS, DesorptionModel, anneal_report, celsius_to_kelvin,
                                 coverage_trajectory, rate_ratio, temperature_sweep)
from spindynamics.eseem import linear_grid, propagate_two_pulse_echo, two_pulse_eseem
from spindynamics.hamiltonian import (SpinPairHamiltonian, electron_zeeman, hamiltonian_from_field,
                                      nuclear_frequencies)

logger = logging.getLogger("surface_spins")

ESEEM_METHODS = ("closed-form", "propagate")


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _names(text: str) -> List[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


# --- structure commands ------------------------------------------------------

def _structure(cfg: RunConfig) -> Structure:
    if cfg["structure"]:
        return parse_structure(cfg["structure"])
    return build_preset(cfg["preset"], cfg["edge_variant"], cfg["lattice_param"])


def _density_text(s: Structure, spins: int) -> str:
    if not any(s.cell.periodic[:2]):
        return "no surface cell"
    return f"{spin_areal_density(s, spins):.3g} spins/cm^2"


def cmd_build(cfg: RunConfig) -> str:
    s = _structure(cfg)
    path = emit_structure(s, cfg.output)
    total = enumerate_dbs(s).total
    side = float(np.linalg.norm(s.cell.vectors[0]))
    return (f"wrote {len(s)} atoms to {path}: {total} dangling bond(s), "
            f"density {_density_text(s, total)}, cell side {side:.2f} A")


def cmd_dbs(cfg: RunConfig) -> str:
    s = _structure(cfg)
    report = enumerate_dbs(s)
    write_table(dbs_table(s, report), cfg.output)
    return (f"{report.total} dangling bond(s) on {len(report.open_sites())} atom(s), "
            f"density {_density_text(s, report.total)}")


def cmd_hfi(cfg: RunConfig) -> str:
    s = _structure(cfg)
    fixture = load_fixture(cfg["fixture"] or DEFAULT_FIXTURE)
    if cfg["alternatives"]:
        fixture = fixture.with_alternatives()
    lobe = fixture.lobe_offset if cfg["lobe_offset"] is None else cfg["lobe_offset"]
    center = db_spin_center(s, lobe, cfg["back_lobe"])
    field_dir = fixture.field_direction if cfg["field_dir"] is None else cfg["field_dir"]
    rows = scan_structure(s, center, field_dir, resolve_a_iso(s, fixture.a_iso), cfg["threshold"])
    write_table(scan_table(rows), cfg.output)
    flagged = [r for r in rows if r.flagged]
    return f"{len(rows)} nuclei scanned, {len(flagged)} with |a| or b >= {cfg['threshold']:g} MHz"


# --- spin commands -----------------------------------------------------------

def cmd_fit(cfg: RunConfig) -> str:
    solutions = fit_geometry(cfg["a"], cfg["b"], cfg["a_iso"], isotope(cfg["isotope"]))
    write_table(fit_table(solutions), cfg.output)
    if not solutions:
        return f"no geometry reproduces a = {cfg['a']:g}, b = {cfg['b']:g} MHz"
    best = solutions[0]
    return f"r = {best.r:.3f} A, theta = {best.theta:.2f} deg, T = {best.T:.4f} MHz"


def _spin_pair(cfg: RunConfig) -> SpinPairHamiltonian:
    spec = isotope(cfg["isotope"])
    if cfg["larmor_MHz"] is not None:
        return SpinPairHamiltonian(electron_zeeman(cfg["field_T"]), cfg["larmor_MHz"], cfg["a"], cfg["b"])
    return hamiltonian_from_field(spec, cfg["field_T"], cfg["a"], cfg["b"])


def cmd_eseem(cfg: RunConfig) -> str:
    if cfg["method"] not in ESEEM_METHODS:
        raise ConfigError(f"unknown ESEEM method {cfg['method']!r}, choose from {', '.join(ESEEM_METHODS)}")
    h = _spin_pair(cfg)
    grid = linear_grid(cfg["tau_max_us"], cfg["steps"])
    trace = two_pulse_eseem(h, grid) if cfg["method"] == "closed-form" else propagate_two_pulse_echo(h, grid)
    write_table(eseem_table(trace), cfg.output)
    f = nuclear_frequencies(h)
    return (f"omega_alpha = {f.omega_alpha:.4f} MHz, omega_beta = {f.omega_beta:.4f} MHz, "
            f"k = {f.k:.4g}, {len(trace.samples)} delays")


# --- kinetics commands -------------------------------------------------------

def cmd_desorb(cfg: RunConfig) -> str:
    model = DesorptionModel(cfg["barrier"], cfg["nu"], cfg["order"])
    T = cfg["T_K"] if cfg["T_K"] is not None else celsius_to_kelvin(cfg["T_C"])
    if cfg["t_max_s"] <= 0 or cfg["steps"] < 2:
        raise InputError("need t_max_s > 0 and at least two steps")
    grid = np.linspace(0.0, cfg["t_max_s"], cfg["steps"])
    trajectory = coverage_trajectory(model, T, cfg["theta0"], grid, cfg["numerical"])
    write_table(desorb_table(trajectory), cfg.output)
    return f"{model.label} at {T:.2f} K: theta({cfg['t_max_s']:g} s) = {trajectory.coverage[-1]:.6g}"


def _models(cfg: RunConfig) -> List[DesorptionModel]:
    if cfg["barriers"]:
        return [DesorptionModel(E, cfg["nu"]) for E in cfg["barriers"]]
    unknown = [name for name in cfg["models"] if name not in EDGE_MODELS]
    if unknown:
        raise InputError(f"unknown model(s) {', '.join(unknown)}, choose from {', '.join(EDGE_MODELS)}")
    return [DesorptionModel(EDGE_MODELS[n].E_des, cfg["nu"], EDGE_MODELS[n].order, n) for n in cfg["models"]]


def cmd_anneal(cfg: RunConfig) -> str:
    models = _models(cfg)
    temperatures = [celsius_to_kelvin(t) for t in cfg["temperatures_C"]]
    if not temperatures:
        raise InputError("no anneal temperature given")
    rows = anneal_report(models, temperatures, cfg["duration_s"], cfg["N0"], cfg["threshold"])
    write_table(anneal_table(rows), cfg.output)
    if len(temperatures) < 2:
        return f"{len(rows)} anneal rows"
    hot, cold = max(temperatures), min(temperatures)
    ratios = ", ".join(f"{m.label} {rate_ratio(m, hot, cold):.2f}" for m in models)
    return f"rate ratio {hot:.2f} K / {cold:.2f} K: {ratios}"


def cmd_sweep(cfg: RunConfig) -> str:
    if not cfg["barriers"]:
        raise InputError("no desorption barrier given")
    models = [DesorptionModel(E, cfg["nu"]) for E in cfg["barriers"]]
    lo = cfg["t_min_k"] if cfg["t_min_k"] is not None else celsius_to_kelvin(cfg["t_min_c"])
    hi = cfg["t_max_k"] if cfg["t_max_k"] is not None else celsius_to_kelvin(cfg["t_max_c"])
    rows = temperature_sweep(models, (lo, hi), cfg["steps"])
    write_table(sweep_table(models, rows), cfg.output)
    return f"{len(rows)} temperatures from {lo:.2f} to {hi:.2f} K for {len(models)} barrier(s)"


HANDLERS: Dict[str, Callable[[RunConfig], str]] = {
    "build": cmd_build,
    "dbs": cmd_dbs,
    "hfi": cmd_hfi,
    "fit": cmd_fit,
    "eseem": cmd_eseem,
    "desorb": cmd_desorb,
    "anneal": cmd_anneal,
    "sweep": cmd_sweep,
}


# --- argument parsing --------------------------------------------------------

def _structure_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--structure", help="read an .xyz or interchange file instead of a preset")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--edge-variant", dest="edge_variant", choices=sorted(EDGE_VARIANTS))
    p.add_argument("--lattice-param", dest="lattice_param", type=float, help="A")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config; flags override its values")
    common.add_argument("--out", dest="output", help="output file")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")

    parser = argparse.ArgumentParser(prog="surface-spins",
                                     description="Diamond surface dangling-bond spin toolkit")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("build", parents=[common], help="build a structure and write it")
    _structure_flags(p)

    p = sub.add_parser("dbs", parents=[common], help="list dangling bonds")
    _structure_flags(p)

    p = sub.add_parser("hfi", parents=[common], help="hyperfine scan around the dangling bond")
    _structure_flags(p)
    p.add_argument("--fixture", help="Fermi-contact fixture (JSON)")
    p.add_argument("--field-dir", dest="field_dir", type=_floats, help="x,y,z")
    p.add_argument("--threshold", type=float, help="MHz")
    p.add_argument("--alternatives", action="store_const", const=True,
                   help="use the fixture's alternative a_iso values")
    p.add_argument("--lobe-offset", dest="lobe_offset", type=float, help="A")
    p.add_argument("--back-lobe", dest="back_lobe", type=float, help="population fraction")

    p = sub.add_parser("fit", parents=[common], help="distance and angle from (a, b)")
    p.add_argument("--a", type=float, help="MHz")
    p.add_argument("--b", type=float, help="MHz")
    p.add_argument("--a-iso", dest="a_iso", type=float, help="MHz")
    p.add_argument("--isotope", choices=sorted(ISOTOPES))

    p = sub.add_parser("eseem", parents=[common], help="two-pulse echo envelope")
    p.add_argument("--a", type=float, help="MHz")
    p.add_argument("--b", type=float, help="MHz")
    p.add_argument("--isotope", choices=sorted(ISOTOPES))
    p.add_argument("--field-t", dest="field_T", type=float, help="T")
    p.add_argument("--larmor-mhz", dest="larmor_MHz", type=float, help="overrides the field's Larmor frequency")
    p.add_argument("--tau-max-us", dest="tau_max_us", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--method", choices=ESEEM_METHODS)

    p = sub.add_parser("desorb", parents=[common], help="coverage against time at one temperature")
    p.add_argument("--barrier", type=float, help="eV")
    p.add_argument("--nu", type=float, help="1/s")
    p.add_argument("--order", type=float)
    p.add_argument("--t-c", dest="T_C", type=float, help="degrees C")
    p.add_argument("--t-k", dest="T_K", type=float, help="K, overrides --t-c")
    p.add_argument("--theta0", type=float)
    p.add_argument("--t-max-s", dest="t_max_s", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--numerical", action="store_const", const=True, help="integrate first order too")

    p = sub.add_parser("anneal", parents=[common], help="spins left after an anneal")
    p.add_argument("--models", type=_names, help=f"comma-separated, from {', '.join(EDGE_MODELS)}")
    p.add_argument("--barriers", type=_floats, help="eV, replaces --models")
    p.add_argument("--nu", type=float, help="1/s")
    p.add_argument("--temperatures-c", dest="temperatures_C", type=_floats)
    p.add_argument("--duration-s", dest="duration_s", type=float)
    p.add_argument("--n0", dest="N0", type=float, help="initial spins per cm^2")
    p.add_argument("--threshold", type=float, help="spins per cm^2 counted as cleared")

    p = sub.add_parser("sweep", parents=[common], help="desorption rate against temperature")
    p.add_argument("--barriers", type=_floats, help="eV")
    p.add_argument("--nu", type=float, help="1/s")
    p.add_argument("--t-min-c", dest="t_min_c", type=float)
    p.add_argument("--t-max-c", dest="t_max_c", type=float)
    p.add_argument("--t-min-k", dest="t_min_k", type=float)
    p.add_argument("--t-max-k", dest="t_max_k", type=float)
    p.add_argument("--steps", type=int)
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "output", "verbose")}
    if args.config:
        base = load_config(args.config)
        if base.command != args.command:
            raise ConfigError(f"config {args.config} is for {base.command!r}, not {args.command!r}")
        return base.updated(flags, args.output)
    return RunConfig(args.command, {k: v for k, v in flags.items() if v is not None}, args.output or "")


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s", force=True)


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run one command and return the exit status"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _configure_logging(args.verbose)

    try:
        cfg = _config_from_args(args)
        logger.debug("running %s -> %s", cfg.command, cfg.output)
        summary = HANDLERS[cfg.command](cfg)
    except SurfaceSpinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return InputError.exit_code
    print(summary)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
