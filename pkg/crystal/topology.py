"""Coordination analysis: neighbor lists, dangling bonds and derived surface quantities."""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from ase.geometry import find_mic
from ase.neighborlist import neighbor_list as ase_neighbor_list

from constants import ANGSTROM2_TO_CM2, PAIR_CUTOFFS, TETRAHEDRAL_ANGLE, VALENCE
from crystal.structure import DbEntry, DbReport, Structure
from errors import InputError

logger = logging.getLogger(__name__)

# Facet criterion: both the vertical and the in-plane part of the DB direction exceed this
TILT_TOLERANCE = 0.1


@dataclass(frozen=True)
class Bond:
    j: int
    image: Tuple[int, int, int]
    vector: Tuple[float, float, float]
    distance: float

    @property
    def unit(self) -> np.ndarray:
        return np.array(self.vector) / self.distance


Adjacency = Tuple[Tuple[Bond, ...], ...]


def pair_cutoff(a: str, b: str, cc_cutoff: float) -> float:
    """Bonding distance for a species pair; 0 means the pair never bonds"""
    if a == "C" and b == "C":
        return cc_cutoff
    return PAIR_CUTOFFS.get(frozenset((a, b)), 0.0)


def valence(species: str) -> int:
    try:
        return VALENCE[species]
    except KeyError:
        raise InputError(f"no valence known for species {species!r}") from None


def pair_cutoffs(s: Structure) -> Dict[Tuple[str, str], float]:
    """Cutoff per bonding species pair present in `s`, keyed the way ASE expects"""
    kinds = sorted(set(s.species))
    cutoffs = {}
    for a in kinds:
        for b in kinds:
            c = pair_cutoff(a, b, s.bond_cutoff)
            if c > 0:
                cutoffs[(a, b)] = c
    return cutoffs


def neighbor_list(s: Structure) -> Adjacency:
    """Symmetric adjacency honoring periodic images.

    Bonds of each atom are ordered by (neighbor index, image) so the result
    does not depend on how the search was traversed.
    """
    n = len(s)
    if n == 0:
        return ()
    cutoffs = pair_cutoffs(s)
    if not cutoffs:
        return tuple(() for _ in range(n))

    first, second, dist, vec, shift = ase_neighbor_list("ijdDS", s.to_ase(), cutoffs)
    bonds: List[List[Bond]] = [[] for _ in range(n)]
    for i, j, d, v, image in zip(first, second, dist, vec, shift):
        bonds[i].append(Bond(int(j), tuple(int(k) for k in image), tuple(float(x) for x in v), float(d)))
    return tuple(tuple(sorted(b, key=lambda x: (x.j, x.image))) for b in bonds)


def coordination(s: Structure, adjacency: Optional[Adjacency] = None) -> List[int]:
    """Geometric bonds plus one for each dimer tag"""
    adjacency = adjacency if adjacency is not None else neighbor_list(s)
    counts = [len(b) for b in adjacency]
    for i, j in s.dimers:
        counts[i] += 1
        counts[j] += 1
    return counts


def closest_approach(s: Structure) -> Tuple[int, int, float]:
    """Closest pair of distinct atoms under the minimum-image convention"""
    dist = s.to_ase().get_all_distances(mic=True)
    np.fill_diagonal(dist, np.inf)
    i, j = np.unravel_index(int(np.argmin(dist)), dist.shape)
    return int(min(i, j)), int(max(i, j)), float(dist[i, j])


def minimum_image(s: Structure, vector: Sequence[float]) -> np.ndarray:
    """Shortest periodic representative of a displacement"""
    shortest, _ = find_mic(np.asarray(vector, dtype=float)[None, :], s.cell.matrix, s.cell.periodic)
    return shortest[0]


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def enumerate_dbs(s: Structure, adjacency: Optional[Adjacency] = None) -> DbReport:
    """Dangling-bond census from coordination under the bond cutoffs"""
    adjacency = adjacency if adjacency is not None else neighbor_list(s)
    counts = coordination(s, adjacency)
    carbon_z = [a.position[2] for a in s.atoms if a.species == "C"]
    mid_z = float(np.mean(carbon_z)) if carbon_z else 0.0

    entries = []
    for i, atom in enumerate(s.atoms):
        db = 0 if atom.species == "H" else max(0, valence(atom.species) - counts[i])
        direction = None
        if db:
            total = sum((b.unit for b in adjacency[i]), np.zeros(3))
            if np.linalg.norm(total) < 1e-8:
                # symmetric or empty bond set, point away from the slab middle
                total = np.array([0.0, 0.0, -1.0 if atom.position[2] >= mid_z else 1.0])
            direction = tuple(float(v) for v in -_unit(total))
        entries.append(DbEntry(i, db, direction))

    report = DbReport(tuple(entries))
    logger.debug("%d dangling bonds on %d atoms", report.total, len(report.open_sites()))
    return report


def _perpendicular(u: np.ndarray) -> np.ndarray:
    reference = np.array([0.0, 0.0, 1.0]) if abs(u[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    return _unit(reference - np.dot(reference, u) * u)


def missing_bond_directions(s: Structure, index: int,
                            adjacency: Optional[Adjacency] = None) -> List[np.ndarray]:
    """Directions of the vacant tetrahedral bonds of one atom (geometric bonds only).

    With no bonds at all the ideal tetrahedron of the rotated diamond frame
    (x along [110], z along [001]) is returned.
    """
    adjacency = adjacency if adjacency is not None else neighbor_list(s)
    units = [b.unit for b in adjacency[index]]
    half = math.radians(TETRAHEDRAL_ANGLE / 2)

    if len(units) >= 4:
        return []
    if len(units) == 3:
        return [-_unit(sum(units))]
    if len(units) == 2:
        centre = -_unit(units[0] + units[1])
        normal = _unit(np.cross(units[0], units[1]))
        return [_unit(centre * math.cos(half) + sign * normal * math.sin(half)) for sign in (1, -1)]
    if len(units) == 1:
        u = units[0]
        e1 = _perpendicular(u)
        e2 = np.cross(u, e1)
        cos_t = -1.0 / 3.0
        sin_t = math.sqrt(1 - cos_t ** 2)
        return [_unit(cos_t * u + sin_t * (math.cos(phi) * e1 + math.sin(phi) * e2))
                for phi in (0.0, 2 * math.pi / 3, 4 * math.pi / 3)]
    p, q = math.sqrt(2.0 / 3.0), 1.0 / math.sqrt(3.0)
    return [np.array(v) for v in ((p, 0.0, q), (-p, 0.0, q), (0.0, p, -q), (0.0, -p, -q))]


def is_tilted(direction: Sequence[float]) -> bool:
    d = np.asarray(direction)
    return abs(d[2]) > TILT_TOLERANCE and float(np.hypot(d[0], d[1])) > TILT_TOLERANCE


def facet_sites(s: Structure, report: Optional[DbReport] = None) -> List[int]:
    """Carbons carrying exactly one DB that is tilted out of both the surface normal and the plane"""
    report = report if report is not None else enumerate_dbs(s)
    return [e.index for e in report.entries
            if e.db_count == 1 and s.atoms[e.index].species == "C" and is_tilted(e.direction)]


def cc_bond_length(s: Structure, adjacency: Optional[Adjacency] = None) -> float:
    """Median C-C bond length"""
    adjacency = adjacency if adjacency is not None else neighbor_list(s)
    lengths = [b.distance for i, bonds in enumerate(adjacency) if s.atoms[i].species == "C"
               for b in bonds if s.atoms[b.j].species == "C"]
    if not lengths:
        raise InputError("structure has no C-C bonds")
    return float(np.median(lengths))


def layer_spacing(s: Structure, adjacency: Optional[Adjacency] = None) -> float:
    """(100) interlayer distance a/4 inferred from the bond length a*sqrt(3)/4"""
    return cc_bond_length(s, adjacency) / math.sqrt(3.0)


def row_spacing(s: Structure, adjacency: Optional[Adjacency] = None) -> float:
    """In-plane (1x1) surface period a/sqrt(2)"""
    return cc_bond_length(s, adjacency) * math.sqrt(8.0 / 3.0)


def local_depth(s: Structure, index: int) -> int:
    """Atomic layer of an atom counted from the upper terrace plane (1 = surface layer)"""
    z_top = max(a.position[2] for a in s.atoms if a.species == "C" and a.role != "floating-C")
    depth = (z_top - s.atoms[index].position[2]) / layer_spacing(s)
    return int(round(depth)) + 1


def spin_areal_density(s: Structure, n_spins: int) -> float:
    """Spins per cm^2 of the in-plane cell"""
    if n_spins < 0:
        raise InputError("spin count must be non-negative")
    area = s.cell.in_plane_area
    if area <= 0:
        raise InputError("structure has no in-plane area")
    return n_spins / (area * ANGSTROM2_TO_CM2)
