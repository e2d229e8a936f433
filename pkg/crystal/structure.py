"""Immutable value types for periodic atomic structures."""

from dataclasses import dataclass, field, replace
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from ase import Atoms

from constants import BOND_CUTOFF, MIN_SEPARATION, ROLES
from errors import GeometryError, InputError

Vector = Tuple[float, float, float]


@dataclass(frozen=True)
class Cell:
    """Three lattice vectors (A) and the axes along which the structure repeats"""
    vectors: Tuple[Vector, Vector, Vector]
    periodic: Tuple[bool, bool, bool] = (True, True, True)

    def __post_init__(self):
        if self.volume <= 0:
            raise GeometryError("cell vectors must be right-handed and linearly independent")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.vectors, dtype=float)

    @property
    def volume(self) -> float:
        return float(np.linalg.det(np.array(self.vectors, dtype=float)))

    @property
    def in_plane_area(self) -> float:
        """Area spanned by the first two vectors, A^2"""
        a, b, _ = self.matrix
        return float(np.linalg.norm(np.cross(a, b)))

    def widths(self) -> np.ndarray:
        """Perpendicular height of the cell along each axis"""
        m = self.matrix
        cross = np.array([np.cross(m[1], m[2]), np.cross(m[2], m[0]), np.cross(m[0], m[1])])
        return abs(self.volume) / np.linalg.norm(cross, axis=1)

    def fractional(self, positions: np.ndarray) -> np.ndarray:
        return np.linalg.solve(self.matrix.T, np.asarray(positions, dtype=float).T).T

    def cartesian(self, fractional: np.ndarray) -> np.ndarray:
        return np.asarray(fractional, dtype=float) @ self.matrix

    def wrap(self, positions: np.ndarray) -> np.ndarray:
        """Map positions back into the cell along periodic axes only"""
        frac = self.fractional(positions)
        mask = np.array(self.periodic)
        frac[..., mask] -= np.floor(frac[..., mask])
        # floor can leave 1.0 behind for values a hair below zero
        frac[..., mask] = np.where(frac[..., mask] >= 1.0, 0.0, frac[..., mask])
        return self.cartesian(frac)


@dataclass(frozen=True)
class Atom:
    species: str
    position: Vector
    role: str = "bulk"

    def __post_init__(self):
        if self.role not in ROLES:
            raise InputError(f"unknown role tag {self.role!r}")

    def moved(self, position: Sequence[float], role: Optional[str] = None) -> "Atom":
        return replace(self, position=_as_vector(position), role=role or self.role)

    def tagged(self, role: str) -> "Atom":
        return replace(self, role=role)


@dataclass(frozen=True)
class Structure:
    """A cell, an ordered list of atoms and the C-C bond cutoff.

    `dimers` holds (2x1) pairing tags. A tag counts as one bond when
    coordination is analysed but contributes no bond vector.
    """
    cell: Cell
    atoms: Tuple[Atom, ...]
    bond_cutoff: float = BOND_CUTOFF
    dimers: Tuple[Tuple[int, int], ...] = field(default=())

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def positions(self) -> np.ndarray:
        if not self.atoms:
            return np.zeros((0, 3))
        return np.array([a.position for a in self.atoms], dtype=float)

    @property
    def species(self) -> List[str]:
        return [a.species for a in self.atoms]

    @property
    def roles(self) -> List[str]:
        return [a.role for a in self.atoms]

    def indices(self, role: Optional[str] = None, species: Optional[str] = None) -> List[int]:
        return [i for i, a in enumerate(self.atoms)
                if (role is None or a.role == role) and (species is None or a.species == species)]

    def dimer_partner(self, index: int) -> Optional[int]:
        for i, j in self.dimers:
            if i == index:
                return j
            if j == index:
                return i
        return None

    def with_atoms(self, atoms: Iterable[Atom]) -> "Structure":
        """Append atoms, keeping existing indices"""
        return replace(self, atoms=self.atoms + tuple(atoms))

    def with_dimers(self, pairs: Iterable[Tuple[int, int]]) -> "Structure":
        merged = list(self.dimers) + [tuple(sorted(p)) for p in pairs]
        return replace(self, dimers=tuple(merged))

    def replaced(self, index: int, atom: Atom) -> "Structure":
        atoms = list(self.atoms)
        atoms[index] = atom
        return replace(self, atoms=tuple(atoms))

    def without(self, indices: Iterable[int]) -> "Structure":
        """Delete atoms; dimer tags touching a deleted atom are dropped, the rest renumbered"""
        drop = set(indices)
        new_index = {}
        kept = []
        for i, atom in enumerate(self.atoms):
            if i not in drop:
                new_index[i] = len(kept)
                kept.append(atom)
        dimers = tuple((new_index[i], new_index[j]) for i, j in self.dimers
                       if i in new_index and j in new_index)
        return replace(self, atoms=tuple(kept), dimers=dimers)

    def translated(self, shift: Sequence[float]) -> "Structure":
        shifted = self.positions + np.asarray(shift, dtype=float)
        atoms = tuple(a.moved(p) for a, p in zip(self.atoms, shifted))
        return replace(self, atoms=atoms)

    def wrapped(self) -> "Structure":
        pos = self.cell.wrap(self.positions)
        return replace(self, atoms=tuple(a.moved(p) for a, p in zip(self.atoms, pos)))

    def to_ase(self) -> Atoms:
        """Positions, species, cell and periodicity as ASE atoms; roles and dimer tags stay behind"""
        return Atoms(symbols=self.species, positions=self.positions, cell=self.cell.matrix,
                     pbc=self.cell.periodic)

    @classmethod
    def from_ase(cls, atoms: Atoms, roles: Optional[Sequence[str]] = None,
                 bond_cutoff: float = BOND_CUTOFF) -> "Structure":
        if roles is None:
            roles = ["bulk"] * len(atoms)
        elif len(roles) != len(atoms):
            raise InputError(f"{len(roles)} roles given for {len(atoms)} atoms")
        cell = Cell(tuple(_as_vector(v) for v in atoms.get_cell()), tuple(bool(p) for p in atoms.pbc))
        members = tuple(Atom(sym, _as_vector(p), role)
                        for sym, p, role in zip(atoms.get_chemical_symbols(), atoms.get_positions(), roles))
        return cls(cell, members, bond_cutoff)

    def validate(self) -> "Structure":
        """Raise GeometryError on overlapping atoms or over-coordinated carbon"""
        from crystal.topology import coordination, closest_approach

        if len(self) > 1:
            i, j, d = closest_approach(self)
            if d < MIN_SEPARATION:
                raise GeometryError(f"atoms {i} and {j} are {d:.3f} A apart")
        for i, n in enumerate(coordination(self)):
            if self.atoms[i].species == "C" and n > 4:
                raise GeometryError(f"carbon {i} has coordination {n}")
        return self


@dataclass(frozen=True)
class DbEntry:
    index: int
    db_count: int
    direction: Optional[Vector] = None


@dataclass(frozen=True)
class DbReport:
    """Dangling-bond census: one entry per atom"""
    entries: Tuple[DbEntry, ...]

    @property
    def total(self) -> int:
        return sum(e.db_count for e in self.entries)

    def open_sites(self) -> List[DbEntry]:
        return [e for e in self.entries if e.db_count > 0]

    def count(self, index: int) -> int:
        return self.entries[index].db_count

    def direction(self, index: int) -> Optional[np.ndarray]:
        d = self.entries[index].direction
        return None if d is None else np.array(d)


def _as_vector(values: Sequence[float]) -> Vector:
    x, y, z = (float(v) for v in values)
    return (x, y, z)
