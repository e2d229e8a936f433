"""Comma-delimited result tables. Every table starts with its header line."""

import csv
import io
import logging
from pathlib import Path
from typing import Iterable, List, Sequence, Union

from crystal.structure import DbReport, Structure
from hyperfine.inversion import GeometrySolution
from hyperfine.scan import ScanRow
from kinetics.desorption import AnnealRow, CoverageTrajectory, DesorptionModel, SweepRow, kelvin_to_celsius
from spindynamics.eseem import EchoTrace

logger = logging.getLogger(__name__)

SCAN_HEADER = ("atom_index", "element", "isotope", "a_MHz", "b_MHz", "flagged")
ESEEM_HEADER = ("tau_us", "E")
SWEEP_HEADER = ("T_K", "T_C", "rate_per_s", "clamped")
DBS_HEADER = ("atom_index", "element", "role", "db_count", "dx", "dy", "dz")
DESORB_HEADER = ("t_s", "theta")
ANNEAL_HEADER = ("model", "E_eV", "T_K", "T_C", "rate_per_s", "desorbed_per_cm2",
                 "remaining_per_cm2", "time_to_clear_s", "cleared", "clamped")
FIT_HEADER = ("solution", "r_A", "theta_deg", "T_MHz", "residual_MHz")


def _render(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _sci(value: float) -> str:
    return f"{value:.5e}"


def _flag(value: bool) -> str:
    return "1" if value else "0"


def scan_table(rows: Sequence[ScanRow]) -> str:
    return _render(SCAN_HEADER, ((r.atom_index, r.element, r.isotope, f"{r.a:.6f}", f"{r.b:.6f}",
                                  _flag(r.flagged)) for r in rows))


def eseem_table(trace: EchoTrace) -> str:
    return _render(ESEEM_HEADER, ((f"{t:.9g}", f"{e:.9g}") for t, e in trace.samples))


def sweep_header(models: Sequence[DesorptionModel]) -> List[str]:
    """`T_K,T_C,rate_per_s,clamped` for one model; with several, a rate column per
    model label followed by a clamp flag per model label"""
    if len(models) == 1:
        return list(SWEEP_HEADER)
    return (["T_K", "T_C"] + [f"rate_per_s_{m.label}" for m in models]
            + [f"clamped_{m.label}" for m in models])


def sweep_table(models: Sequence[DesorptionModel], rows: Sequence[SweepRow]) -> str:
    return _render(sweep_header(models),
                   ([_sci(r.T_K), _sci(r.T_C)] + [_sci(k) for k in r.rates] + [_flag(f) for f in r.flags]
                    for r in rows))


def dbs_table(s: Structure, report: DbReport) -> str:
    """Open sites only; the direction is blank where none is defined"""
    out = []
    for entry in report.open_sites():
        atom = s.atoms[entry.index]
        direction = ["", "", ""] if entry.direction is None else [f"{v:.6f}" for v in entry.direction]
        out.append([entry.index, atom.species, atom.role, entry.db_count] + direction)
    return _render(DBS_HEADER, out)


def desorb_table(trajectory: CoverageTrajectory) -> str:
    return _render(DESORB_HEADER, ((_sci(t), f"{c:.9g}") for t, c in trajectory.samples))


def anneal_table(rows: Sequence[AnnealRow]) -> str:
    return _render(ANNEAL_HEADER, ((r.model, f"{r.E_des:g}", _sci(r.T_K), _sci(kelvin_to_celsius(r.T_K)),
                                    _sci(r.rate), _sci(r.desorbed), _sci(r.remaining),
                                    _sci(r.time_to_clear), _flag(r.cleared), _flag(r.clamped))
                                   for r in rows))


def fit_table(solutions: Sequence[GeometrySolution]) -> str:
    return _render(FIT_HEADER, ((n, f"{sol.r:.6f}", f"{sol.theta:.6f}", f"{sol.T:.6f}", f"{sol.residual:.3e}")
                                for n, sol in enumerate(solutions, start=1)))


def write_table(text: str, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(text)
    logger.debug("wrote %d rows to %s", text.count("\n") - 1, path)
    return path


def read_table(path: Union[str, Path]) -> List[dict]:
    """Rows of a written table as dictionaries keyed by header"""
    with open(path, newline="") as f:
        return list(csv.DictReader(f))
