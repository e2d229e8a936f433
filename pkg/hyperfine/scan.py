"""Hyperfine couplings of every magnetic nucleus in a structure to the dangling-bond spin."""

import logging
from dataclasses import dataclass
from typing import List, Mapping, Optional, Sequence

import numpy as np

from crystal.structure import Structure
from crystal.topology import enumerate_dbs, minimum_image
from errors import InputError
from hyperfine.isotopes import ELEMENT_ISOTOPES, isotope
from hyperfine.tensors import SpinCenter, dipolar_tensor, secular_couplings, total_tensor

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScanRow:
    atom_index: int
    element: str
    isotope: str
    a: float
    b: float
    flagged: bool


def db_spin_center(s: Structure, lobe_offset: float, back_lobe: float = 0.0) -> SpinCenter:
    """Point-spin model of the open DB: the lobe sits `lobe_offset` A out along the DB direction.

    A `back_lobe` fraction of the population may be put on the opposite side
    of the host nucleus.
    """
    if lobe_offset <= 0:
        raise InputError("lobe offset must be positive")
    if not 0.0 <= back_lobe < 1.0:
        raise InputError("back lobe fraction must lie in [0, 1)")
    report = enumerate_dbs(s)
    hosts = [i for i in s.indices(role="db-host") if report.count(i) == 1]
    if not hosts:
        hosts = [e.index for e in report.open_sites() if e.db_count == 1]
    if len(hosts) != 1:
        raise InputError(f"need exactly one single-DB host, found {len(hosts)}")

    host = hosts[0]
    centre = np.array(s.atoms[host].position)
    direction = report.direction(host)
    front = tuple(float(v) for v in centre + lobe_offset * direction)
    if back_lobe == 0:
        return SpinCenter(((front, 1.0),))
    back = tuple(float(v) for v in centre - lobe_offset * direction)
    return SpinCenter(((front, 1.0 - back_lobe), (back, back_lobe)))


def scan_structure(s: Structure, center: SpinCenter, field_dir: Sequence[float],
                   a_iso_table: Optional[Mapping[int, float]] = None,
                   threshold: float = 10.0) -> List[ScanRow]:
    """One row per C and H nucleus in atom order; rows with max(|a|, b) >= threshold are flagged.

    Each nucleus is taken at its periodic image closest to the first spin site.
    """
    a_iso_table = a_iso_table or {}
    anchor = np.array(center.sites[0][0])
    rows = []
    for i, atom in enumerate(s.atoms):
        symbol = ELEMENT_ISOTOPES.get(atom.species)
        if symbol is None:
            continue
        spec = isotope(symbol)
        nucleus = anchor + minimum_image(s, np.array(atom.position) - anchor)
        a_iso = a_iso_table.get(i, 0.0)
        pair = secular_couplings(total_tensor(dipolar_tensor(center, nucleus, spec), a_iso), field_dir)
        flagged = max(abs(pair.a), pair.b) >= threshold
        rows.append(ScanRow(i, atom.species, symbol, pair.a, pair.b, flagged))
    logger.debug("scanned %d nuclei, %d flagged", len(rows), sum(r.flagged for r in rows))
    return rows
