"""Ideal diamond geometries: bulk cells, (100) slabs, Chadi steps and the raised trench carbon.

Lattices come from ase.build. Slabs are brought into a rotated frame with x
along [110], y along [1-10] and z along [001]. Layer k sits a/4 above layer
k-1; even layers bond upward along x and downward along y, odd layers the
other way round.
"""

import logging
import math
from typing import List, Sequence, Tuple

import numpy as np
from ase.build import bulk, diamond100
from scipy.optimize import brentq
from scipy.spatial.transform import Rotation

from constants import MIN_LAYERS, MIN_TERRACE_ROWS, MIN_VACUUM
from crystal.structure import Atom, Cell, Structure
from crystal.topology import cc_bond_length, enumerate_dbs, facet_sites, neighbor_list
from errors import GeometryError, InputError, InvalidSiteError, UnsupportedSurfaceError

logger = logging.getLogger(__name__)

AXES = {"x": 0, "y": 1}


def build_bulk(lattice_param: float, repetitions: Sequence[int]) -> Structure:
    """Conventional diamond cell (FCC with a two-atom basis) tiled `repetitions` times"""
    if lattice_param <= 0:
        raise InputError("lattice parameter must be positive")
    reps = tuple(int(r) for r in repetitions)
    if len(reps) != 3 or min(reps) < 1:
        raise InputError("repetitions must be three integers >= 1")

    atoms = bulk("C", "diamond", a=lattice_param, cubic=True).repeat(reps)
    logger.debug("built bulk cell %s with %d atoms", reps, len(atoms))
    return Structure.from_ase(atoms)


def _check_surface(surface) -> None:
    miller = tuple(int(v) for v in surface)
    if len(miller) != 3 or sorted(abs(v) for v in miller) != [0, 0, 1]:
        raise UnsupportedSurfaceError(f"surface {miller} is not supported, only (100)")


def _slab_lattice(lattice_param: float, n: int, m: int, layers: int,
                  vacuum: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """ASE (100) lattice in this module's frame.

    Returns positions ordered by layer, then x, then y, with the bottom layer
    at z = vacuum/2 and an atom on the origin, their layer indices and the
    cell lengths. ASE may stack the second layer along y; the slab is then
    built with swapped lateral repeats and mirrored across x = y.
    """
    half = lattice_param / math.sqrt(8.0)
    spacing = lattice_param / 4
    for size, swap in (((n, m), False), ((m, n), True)):
        atoms = diamond100("C", size + (layers,), a=lattice_param, vacuum=vacuum / 2)
        pos = atoms.get_positions()
        lengths = np.array(atoms.cell.lengths())
        if swap:
            pos, lengths = pos[:, [1, 0, 2]], lengths[[1, 0, 2]]
        bottom = pos[pos[:, 2] < pos[:, 2].min() + 0.1]
        origin = min(bottom, key=lambda p: (round(p[0], 6), round(p[1], 6)))
        rel = pos - origin
        rel[:, :2] -= np.floor((rel[:, :2] + 1e-6) / lengths[:2]) * lengths[:2]
        k = np.rint(rel[:, 2] / spacing).astype(int)
        gx = np.rint(rel[:, 0] / half).astype(int)
        gy = np.rint(rel[:, 1] / half).astype(int)
        if np.all(gx[k == 1] % 2 == 1):
            order = np.lexsort((gy, gx, k))
            rel[:, 2] += vacuum / 2
            return rel[order], k[order], lengths
    raise GeometryError("ASE (100) slab does not follow diamond layer stacking")


def cut_slab(lattice_param: float, surface: Sequence[int] = (1, 0, 0), layers: int = 9,
             lateral_repeats: Tuple[int, int] = (1, 1), vacuum: float = MIN_VACUUM) -> Structure:
    """Unterminated (100) slab periodic in-plane with a vacuum gap along z.

    Atoms are ordered by layer (bottom first), then along x, then along y.
    The top and bottom layers are tagged "surface".
    """
    _check_surface(surface)
    if lattice_param <= 0:
        raise InputError("lattice parameter must be positive")
    if layers < MIN_LAYERS:
        raise InputError(f"a slab needs at least {MIN_LAYERS} layers, got {layers}")
    if vacuum < MIN_VACUUM:
        raise InputError(f"vacuum must be at least {MIN_VACUUM} A, got {vacuum}")
    n, m = (int(r) for r in lateral_repeats)
    if n < 1 or m < 1:
        raise InputError("lateral repeats must be >= 1")

    positions, layer, lengths = _slab_lattice(lattice_param, n, m, layers, vacuum)
    atoms = tuple(Atom("C", tuple(float(v) for v in p), "surface" if k in (0, layers - 1) else "bulk")
                  for p, k in zip(positions, layer))
    height = (layers - 1) * lattice_param / 4 + vacuum
    cell = Cell(((float(lengths[0]), 0.0, 0.0), (0.0, float(lengths[1]), 0.0), (0.0, 0.0, height)),
                (True, True, False))
    logger.debug("cut (100) slab: %d layers, %dx%d, %.2f A vacuum", layers, n, m, vacuum)
    return Structure(cell, atoms)


def _top_layer(slab: Structure) -> List[int]:
    carbons = slab.indices(species="C")
    z_top = max(slab.atoms[i].position[2] for i in carbons)
    return [i for i in carbons if abs(slab.atoms[i].position[2] - z_top) < 0.1]


def facet_step_axis(slab: Structure) -> str:
    """In-plane axis a step edge must run along to expose a (111) microfacet.

    The edge has to cut across the bonds tying the top layer to the layer
    below, so it runs perpendicular to their in-plane direction.
    """
    adjacency = neighbor_list(slab)
    top = _top_layer(slab)
    horizontal = np.zeros(2)
    for i in top:
        for bond in adjacency[i]:
            if bond.vector[2] < 0:
                horizontal += np.abs(bond.vector[:2])
    return "x" if horizontal[1] >= horizontal[0] else "y"


def carve_chadi_step(slab: Structure, step_axis: str = "x", upper_terrace_width: int = 3) -> Structure:
    """Remove part of the top layer to leave a single-layer step running along `step_axis`.

    Top-layer rows are counted along the in-plane step normal; rows
    [0, upper_terrace_width) form the upper terrace. Atoms of the layer below
    that lose an upward bond become surface atoms; those keeping exactly one
    form the tilted (111) microfacet at the step edges.
    """
    if upper_terrace_width == 0:
        return slab
    if step_axis not in AXES:
        raise InputError(f"step axis must be 'x' or 'y', got {step_axis!r}")
    normal = 1 - AXES[step_axis]

    top = _top_layer(slab)
    coords = sorted({round(slab.atoms[i].position[normal], 6) for i in top})
    rows = len(coords)
    lower = rows - upper_terrace_width
    if upper_terrace_width < MIN_TERRACE_ROWS or lower < MIN_TERRACE_ROWS:
        raise GeometryError(f"terraces need at least {MIN_TERRACE_ROWS} rows each, "
                            f"got {upper_terrace_width} and {lower} of {rows}")
    if (lower - 1) % 2:
        raise GeometryError(f"lower terrace of {lower} rows leaves an unpaired exposed row")

    kept_rows = set(coords[:upper_terrace_width])
    removed = [i for i in top if round(slab.atoms[i].position[normal], 6) not in kept_rows]
    removed_set = set(removed)

    adjacency = neighbor_list(slab)
    exposed = {b.j for i in removed for b in adjacency[i]} - removed_set
    stepped = slab
    for i in exposed:
        stepped = stepped.replaced(i, stepped.atoms[i].tagged("surface"))
    stepped = stepped.without(removed)
    logger.debug("carved step along %s: removed %d atoms, exposed %d", step_axis, len(removed), len(exposed))

    if not facet_sites(stepped):
        raise GeometryError(f"a step along {step_axis} exposes no (111) facet on this slab; "
                            f"use {facet_step_axis(slab)!r}")
    return stepped


def raise_trench_carbon(slab: Structure, site: int) -> Structure:
    """Lift a step-edge carbon toward the (111) adlayer site next to its facet neighbor.

    The carbon rotates about the axis through its upper neighbor and the
    lower neighbor it shares with an adjacent facet atom until it sits at
    bonding distance from that atom. It keeps those two bonds, gains the
    new one, and gives up its other downward bond, leaving a single DB on a
    third-layer carbon.
    """
    if not 0 <= site < len(slab) or slab.atoms[site].species != "C":
        raise InvalidSiteError(f"atom {site} is not a carbon of this structure")
    adjacency = neighbor_list(slab)
    report = enumerate_dbs(slab, adjacency)
    facets = facet_sites(slab, report)
    if site not in facets:
        raise InvalidSiteError(f"atom {site} is not a step-edge facet carbon")

    bonds = adjacency[site]
    up = [b for b in bonds if b.vector[2] > 0]
    down = [b for b in bonds if b.vector[2] < 0]
    if len(up) != 1 or len(down) != 2:
        raise InvalidSiteError(f"atom {site} does not have the bonding of a step-edge carbon")

    down_ids = {b.j for b in down}
    partner = None
    for f in facets:
        if f == site:
            continue
        shared = down_ids & {b.j for b in adjacency[f]}
        if shared:
            partner, shared_id = f, min(shared)
            break
    if partner is None:
        raise InvalidSiteError(f"atom {site} has no facet neighbor to bond to")

    pivot = next(b for b in down if b.j == shared_id)
    released = next(b for b in down if b.j != shared_id)
    to_partner = np.array(pivot.vector) - np.array(
        next(b for b in adjacency[partner] if b.j == shared_id).vector)

    u = np.array(up[0].vector)
    d = np.array(pivot.vector)
    centre = (u + d) / 2
    axis = (d - u) / np.linalg.norm(d - u)
    target = (cc_bond_length(slab, adjacency) + slab.bond_cutoff) / 2

    def moved(phi):
        return centre + Rotation.from_rotvec(phi * axis).apply(-centre)

    probe = 1e-3
    sign = 1.0 if (np.linalg.norm(moved(probe) - to_partner)
                   < np.linalg.norm(moved(-probe) - to_partner)) else -1.0

    def gap(phi):
        return float(np.linalg.norm(moved(sign * phi) - to_partner)) - target

    if gap(0.0) * gap(math.pi / 2) > 0:
        raise GeometryError(f"atom {site} cannot reach bonding distance of atom {partner}")
    phi = brentq(gap, 0.0, math.pi / 2, xtol=1e-12)
    logger.debug("raising atom %d by %.2f deg toward atom %d", site, math.degrees(phi), partner)

    position = np.array(slab.atoms[site].position) + moved(sign * phi)
    position = slab.cell.wrap(position)
    raised = slab.replaced(site, slab.atoms[site].moved(position, role="floating-C"))
    raised = raised.replaced(released.j, raised.atoms[released.j].tagged("db-host"))
    raised.validate()

    after = enumerate_dbs(raised)
    if after.count(site) != 1 or after.count(released.j) != 1 or after.count(partner) != 0:
        raise GeometryError(f"raising atom {site} did not leave single DBs on it and atom {released.j}")
    if after.entries[site].direction[2] <= 0:
        raise GeometryError(f"DB of raised atom {site} does not face the vacuum")
    return raised
