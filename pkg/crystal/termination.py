"""Surface termination: dimer pairing, site classification and terminator placement."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from constants import BOND_CH, BOND_CO, BOND_OH, MIN_SEPARATION, TERMINATORS, VALENCE
from crystal.structure import Atom, Structure
from crystal.topology import (Adjacency, closest_approach, coordination, enumerate_dbs, facet_sites,
                              minimum_image, missing_bond_directions, neighbor_list, row_spacing)
from errors import IncompleteTerminationError, InputError, TerminationError

logger = logging.getLogger(__name__)

SITE_CLASSES = ("db-host", "floating", "bottom", "step-bridge", "trench", "terrace")
DEFAULT_RULE = "*"

PAIR_TOLERANCE = 0.35          # A, in-plane mismatch from one surface period
DIMER_HEIGHT_TOLERANCE = 0.35  # A
BRIDGE_HEIGHT_TOLERANCE = 0.5  # A

# H of a hydroxyl: cos/sin of the angle between the O-H bond and the C-O axis
OH_AXIAL = 0.334
OH_LATERAL = 0.943

Rule = Union[str, Sequence[str]]

EDGE_VARIANTS: Dict[str, Dict[str, str]] = {
    "O/H/H": {"step-bridge": "O-bridge", "trench": "H"},
    "O/OH/OH": {"step-bridge": "O-bridge", "trench": "OH"},
    "OH/OH": {"step-bridge": "H", "trench": "OH"},
}


def edge_rules(variant: str = "O/H/H") -> Dict[str, Rule]:
    """Mixed H/O/OH terrace, H-terminated bottom, hydroxylated floating carbon, open DB host"""
    if variant not in EDGE_VARIANTS:
        raise InputError(f"unknown edge variant {variant!r}, choose from {sorted(EDGE_VARIANTS)}")
    rules: Dict[str, Rule] = {"terrace": ["H", "O-bridge", "OH"], "bottom": "H",
                              "floating": "OH", "db-host": "none"}
    rules.update(EDGE_VARIANTS[variant])
    return rules


@dataclass(frozen=True)
class Site:
    """One or two DB-carrying atoms terminated together, with their open directions"""
    atoms: Tuple[int, ...]
    directions: Tuple[Tuple[Tuple[float, float, float], ...], ...]
    site_class: str = "terrace"

    @property
    def is_bridge(self) -> bool:
        return len(self.atoms) == 2


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def _in_plane_axes(s: Structure) -> Tuple[np.ndarray, np.ndarray]:
    a, b, _ = s.cell.matrix
    return _unit(a), _unit(b)


def _pairing_axis(s: Structure, adjacency: Adjacency, i: int) -> np.ndarray:
    """In-plane cell axis perpendicular to the dominant horizontal component of the bonds"""
    ax, ay = _in_plane_axes(s)
    along_x = sum(abs(np.dot(b.vector, ax)) for b in adjacency[i])
    along_y = sum(abs(np.dot(b.vector, ay)) for b in adjacency[i])
    return ay if along_x >= along_y else ax


def _matches_period(s: Structure, i: int, j: int, axis: np.ndarray, period: float, dz_max: float) -> bool:
    delta = minimum_image(s, np.subtract(s.atoms[j].position, s.atoms[i].position))
    if abs(delta[2]) >= dz_max:
        return False
    horizontal = delta - np.array([0.0, 0.0, delta[2]])
    return any(np.linalg.norm(horizontal - sign * period * axis) < PAIR_TOLERANCE for sign in (1, -1))


def _greedy_pairs(s: Structure, candidates: List[int], axes: Mapping[int, np.ndarray], period: float,
                  dz_max: float, forbidden: Mapping[int, int]) -> List[Tuple[int, int]]:
    """Pair candidates in index order with the lowest-index match one period away"""
    pool = sorted(candidates)
    taken = set()
    pairs = []
    for i in pool:
        if i in taken:
            continue
        for j in pool:
            if j == i or j in taken or forbidden.get(i) == j:
                continue
            if _matches_period(s, i, j, axes[i], period, dz_max):
                pairs.append((i, j))
                taken.update((i, j))
                break
    return pairs


def _excluded(s: Structure, i: int) -> bool:
    return s.atoms[i].role in ("db-host", "floating-C")


def pair_dimers(s: Structure) -> Structure:
    """Tag (2x1) dimers between doubly undercoordinated surface atoms one period apart"""
    adjacency = neighbor_list(s)
    report = enumerate_dbs(s, adjacency)
    paired = {i for pair in s.dimers for i in pair}
    candidates = [e.index for e in report.entries
                  if e.db_count == 2 and s.atoms[e.index].species == "C"
                  and e.index not in paired and not _excluded(s, e.index)]
    if not candidates:
        return s
    axes = {i: _pairing_axis(s, adjacency, i) for i in candidates}
    pairs = _greedy_pairs(s, candidates, axes, row_spacing(s, adjacency), DIMER_HEIGHT_TOLERANCE, {})
    logger.debug("tagged %d dimers", len(pairs))
    return s.with_dimers(pairs)


def find_sites(s: Structure) -> List[Site]:
    """Group the open DBs of a dimer-tagged structure into bridge and lone sites, then classify them"""
    adjacency = neighbor_list(s)
    report = enumerate_dbs(s, adjacency)
    open_atoms = [e.index for e in report.open_sites() if s.atoms[e.index].species != "H"]

    directions: Dict[int, List[np.ndarray]] = {}
    for i in open_atoms:
        if report.count(i) == 1:
            directions[i] = [report.direction(i)]
        else:
            directions[i] = missing_bond_directions(s, i, adjacency)[:report.count(i)]
            logger.warning("atom %d keeps %d DBs after pairing, terminating each bond", i, report.count(i))

    singles = [i for i in open_atoms if report.count(i) == 1 and not _excluded(s, i)]
    axes = {i: _pairing_axis(s, adjacency, i) for i in singles}
    forbidden = {i: s.dimer_partner(i) for i in singles}
    bridges = _greedy_pairs(s, singles, axes, row_spacing(s, adjacency), BRIDGE_HEIGHT_TOLERANCE, forbidden)

    in_bridge = {i for pair in bridges for i in pair}
    groups = [tuple(pair) for pair in bridges] + [(i,) for i in open_atoms if i not in in_bridge]
    groups.sort(key=min)

    facets = set(facet_sites(s, report))
    carbon_z = [a.position[2] for a in s.atoms if a.species == "C"]
    mid_z = (min(carbon_z) + max(carbon_z)) / 2

    sites = []
    for group in groups:
        roles = {s.atoms[i].role for i in group}
        z = np.mean([s.atoms[i].position[2] for i in group])
        if "db-host" in roles:
            site_class = "db-host"
        elif "floating-C" in roles:
            site_class = "floating"
        elif z < mid_z:
            site_class = "bottom"
        elif len(group) == 2 and facets.intersection(group):
            site_class = "step-bridge"
        elif len(group) == 1:
            site_class = "trench"
        else:
            site_class = "terrace"
        dirs = tuple(tuple(tuple(float(v) for v in d) for d in directions[i]) for i in group)
        sites.append(Site(group, dirs, site_class))
    return sites


def _resolve_rules(rules: Mapping[str, Rule], sites: Sequence[Site]) -> List[str]:
    for value in rules.values():
        for name in ([value] if isinstance(value, str) else value):
            if name not in TERMINATORS:
                raise InputError(f"unknown terminator {name!r}, choose from {TERMINATORS}")

    counters: Dict[str, int] = {}
    chosen = []
    for site in sites:
        rule = rules.get(site.site_class, rules.get(DEFAULT_RULE))
        if rule is None:
            raise IncompleteTerminationError(
                f"no termination rule for {site.site_class} site on atoms {list(site.atoms)}")
        if isinstance(rule, str):
            chosen.append(rule)
            continue
        if not rule:
            raise IncompleteTerminationError(f"empty rule list for {site.site_class} sites")
        k = counters.get(site.site_class, 0)
        chosen.append(rule[k % len(rule)])
        counters[site.site_class] = k + 1
    return chosen


def _hydroxyl_plane(s: Structure, i: int, direction: np.ndarray, partner: Optional[int]) -> np.ndarray:
    z = np.array([0.0, 0.0, 1.0])
    horizontal = direction - np.dot(direction, z) * z
    if np.linalg.norm(horizontal) > 0.1:
        return _unit(np.cross(z, horizontal))
    if partner is not None:
        delta = minimum_image(s, np.subtract(s.atoms[partner].position, s.atoms[i].position))
        delta[2] = 0.0
        if np.linalg.norm(delta) > 1e-6:
            return _unit(np.cross(z, delta))
    return np.array([1.0, 0.0, 0.0])


def _hydroxyl(s: Structure, i: int, direction: np.ndarray, partner: Optional[int]) -> List[Atom]:
    origin = np.array(s.atoms[i].position)
    oxygen = origin + BOND_CO * direction
    tilt = _hydroxyl_plane(s, i, direction, partner)
    hydrogen = oxygen + BOND_OH * _unit(OH_AXIAL * direction + OH_LATERAL * tilt)
    return [Atom("O", tuple(oxygen), "terminator-OH"), Atom("H", tuple(hydrogen), "terminator-OH")]


def _bridge_oxygen(s: Structure, site: Site) -> Atom:
    a, b = site.atoms
    pa = np.array(s.atoms[a].position)
    ab = minimum_image(s, np.subtract(s.atoms[b].position, pa))
    half = np.linalg.norm(ab) / 2
    if half >= BOND_CO:
        raise TerminationError(f"atoms {a} and {b} are too far apart for a bridging oxygen")
    combined = np.add(site.directions[0][0], site.directions[1][0])
    across = combined - np.dot(combined, ab) / np.dot(ab, ab) * ab
    height = np.sqrt(BOND_CO ** 2 - half ** 2)
    return Atom("O", tuple(pa + ab / 2 + height * _unit(across)), "terminator-O-bridge")


def _place(s: Structure, site: Site, terminator: str) -> List[Atom]:
    if terminator == "none":
        return []
    if terminator == "O-bridge":
        if not site.is_bridge:
            raise TerminationError(f"O-bridge needs two neighboring DBs, atom {site.atoms[0]} is alone")
        return [_bridge_oxygen(s, site)]

    added = []
    for k, i in enumerate(site.atoms):
        partner = site.atoms[1 - k] if site.is_bridge else s.dimer_partner(i)
        for d in site.directions[k]:
            d = np.asarray(d)
            if terminator == "H":
                added.append(Atom("H", tuple(np.array(s.atoms[i].position) + BOND_CH * d), "terminator-H"))
            else:
                added.extend(_hydroxyl(s, i, d, partner))
    return added


def _check_terminated(s: Structure, left_open: set) -> None:
    if len(s) > 1:
        i, j, d = closest_approach(s)
        if d < MIN_SEPARATION:
            raise TerminationError(f"terminators overlap: atoms {i} and {j} are {d:.3f} A apart")
    adjacency = neighbor_list(s)
    for i, n in enumerate(coordination(s, adjacency)):
        if n > VALENCE[s.atoms[i].species]:
            raise TerminationError(f"atom {i} ({s.atoms[i].species}) is over-coordinated ({n} bonds)")
    for entry in enumerate_dbs(s, adjacency).open_sites():
        if entry.index not in left_open:
            raise TerminationError(f"atom {entry.index} still has {entry.db_count} DB(s) after termination")


def terminate(slab: Structure, rules: Mapping[str, Rule]) -> Structure:
    """Saturate open DBs according to per-site-class rules.

    A rule is a terminator name or a list cycled over the sites of that
    class in index order; the key "*" supplies a default. Heavy atoms never
    move; terminators are appended after the existing atoms.
    """
    paired = pair_dimers(slab)
    sites = find_sites(paired)
    chosen = _resolve_rules(rules, sites)

    added: List[Atom] = []
    left_open = set()
    for site, terminator in zip(sites, chosen):
        if terminator == "none":
            left_open.update(site.atoms)
        added.extend(_place(paired, site, terminator))

    wrapped = [a.moved(paired.cell.wrap(np.array(a.position))) for a in added]
    terminated = paired.with_atoms(wrapped)
    _check_terminated(terminated, left_open)
    logger.debug("placed %d terminator atoms on %d sites, %d left open",
                 len(added), len(sites), len(left_open))
    return terminated
