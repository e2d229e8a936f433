"""Structure files: the JSON interchange document and extended XYZ (through ase.io)."""

import io
import json
import logging
import re
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from ase.io import read as ase_read
from ase.io import write as ase_write

from constants import BOND_CUTOFF
from crystal.structure import Atom, Cell, Structure
from errors import InputError, StructureParseError

logger = logging.getLogger(__name__)

FORMATS = ("xyz", "interchange")
INTERCHANGE_TAG = "surface-spins/structure"
INTERCHANGE_VERSION = 1

_LATTICE_QUOTED = re.compile(r'Lattice="([^"]*)"')
_PBC_QUOTED = re.compile(r'pbc="([^"]*)"')

PathLike = Union[str, Path]


def _format_for(path: PathLike, fmt: Optional[str]) -> str:
    if fmt is None:
        fmt = "xyz" if Path(path).suffix.lower() == ".xyz" else "interchange"
    if fmt not in FORMATS:
        raise InputError(f"unknown structure format {fmt!r}, expected one of {', '.join(FORMATS)}")
    return fmt


# --- interchange -------------------------------------------------------------

def dumps_interchange(s: Structure) -> str:
    """One atom per line; floats are written with repr so parsing gives back the same bits"""
    header = {
        "format": INTERCHANGE_TAG,
        "version": INTERCHANGE_VERSION,
        "cell": {
            "vectors": [[float(v) for v in row] for row in s.cell.vectors],
            "periodic": [bool(p) for p in s.cell.periodic],
        },
        "bond_cutoff": float(s.bond_cutoff),
        "dimers": [[int(i), int(j)] for i, j in s.dimers],
    }
    lines = ["{"]
    for key, value in header.items():
        lines.append(f"  {json.dumps(key)}: {json.dumps(value)},")
    lines.append('  "atoms": [')
    for n, atom in enumerate(s.atoms):
        entry = {"species": atom.species,
                 "position": [float(v) for v in atom.position],
                 "role": atom.role}
        comma = "," if n < len(s.atoms) - 1 else ""
        lines.append(f"    {json.dumps(entry)}{comma}")
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _line_of(text: str, offset: int) -> int:
    return text.count("\n", 0, max(offset, 0)) + 1


def _key_line(text: str, key: str) -> int:
    return _line_of(text, text.find(f'"{key}"'))


def _atom_lines(text: str) -> List[int]:
    """Line of the opening brace of every atom object (atoms hold no nested objects)"""
    start = text.find('"atoms"')
    if start < 0:
        return []
    return [_line_of(text, start + m.start()) for m in re.finditer(r"\{", text[start:])]


def _vector(value, path: str, line: int, field: str):
    if not isinstance(value, list) or len(value) != 3:
        raise StructureParseError(path, line, field, "expected three numbers")
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise StructureParseError(path, line, field, "expected three numbers")


def loads_interchange(text: str, path: str = "<string>") -> Structure:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise StructureParseError(path, e.lineno, "json", e.msg)
    if not isinstance(doc, dict):
        raise StructureParseError(path, 1, "document", "expected an object")
    if doc.get("format", INTERCHANGE_TAG) != INTERCHANGE_TAG:
        raise StructureParseError(path, _key_line(text, "format"), "format", repr(doc["format"]))

    for key in ("cell", "atoms"):
        if key not in doc:
            raise StructureParseError(path, _line_of(text, len(text)), key, "missing")

    cell_line = _key_line(text, "cell")
    cell_doc = doc["cell"]
    if not isinstance(cell_doc, dict) or "vectors" not in cell_doc:
        raise StructureParseError(path, cell_line, "cell.vectors", "missing")
    vectors = cell_doc["vectors"]
    if not isinstance(vectors, list) or len(vectors) != 3:
        raise StructureParseError(path, cell_line, "cell.vectors", "expected three vectors")
    vectors = tuple(_vector(v, path, cell_line, "cell.vectors") for v in vectors)
    periodic = cell_doc.get("periodic", [True, True, True])
    if not isinstance(periodic, list) or len(periodic) != 3 or not all(isinstance(p, bool) for p in periodic):
        raise StructureParseError(path, cell_line, "cell.periodic", "expected three booleans")

    bond_cutoff = doc.get("bond_cutoff", BOND_CUTOFF)
    if isinstance(bond_cutoff, bool) or not isinstance(bond_cutoff, (int, float)) or bond_cutoff <= 0:
        raise StructureParseError(path, _key_line(text, "bond_cutoff"), "bond_cutoff", "expected a positive number")

    if not isinstance(doc["atoms"], list):
        raise StructureParseError(path, _key_line(text, "atoms"), "atoms", "expected a list")
    lines = _atom_lines(text)
    atoms = []
    for n, entry in enumerate(doc["atoms"]):
        line = lines[n] if n < len(lines) else _key_line(text, "atoms")
        if not isinstance(entry, dict):
            raise StructureParseError(path, line, f"atoms[{n}]", "expected an object")
        species = entry.get("species")
        if not isinstance(species, str) or not species:
            raise StructureParseError(path, line, f"atoms[{n}].species")
        position = _vector(entry.get("position"), path, line, f"atoms[{n}].position")
        try:
            atoms.append(Atom(species, position, entry.get("role", "bulk")))
        except InputError as e:
            raise StructureParseError(path, line, f"atoms[{n}].role", str(e))

    dimers = []
    for pair in doc.get("dimers", []):
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(i, int) and 0 <= i < len(atoms) for i in pair)):
            raise StructureParseError(path, _key_line(text, "dimers"), "dimers", f"bad pair {pair!r}")
        dimers.append((pair[0], pair[1]))

    cell = Cell(vectors, tuple(periodic))
    return Structure(cell, tuple(atoms), float(bond_cutoff), tuple(dimers))


# --- xyz ---------------------------------------------------------------------

def _fixed(value: float) -> str:
    value = round(float(value), 6)
    if value == 0:
        value = 0.0  # no "-0.000000"
    return f"{value:.6f}"


def dumps_xyz(s: Structure) -> str:
    """Atom count, a comment carrying Lattice= and pbc=, then element and x y z at 6 decimals"""
    lattice = " ".join(_fixed(v) for row in s.cell.vectors for v in row)
    pbc = " ".join("T" if p else "F" for p in s.cell.periodic)
    atoms = s.to_ase()
    atoms.set_positions(np.round(atoms.get_positions(), 6) + 0.0)
    buffer = io.StringIO()
    ase_write(buffer, atoms, format="xyz", comment=f'Lattice="{lattice}" pbc="{pbc}"', fmt="%.6f")
    return buffer.getvalue()


def _lattice(comment: str, path: str) -> Sequence[float]:
    match = _LATTICE_QUOTED.search(comment)
    if match:
        tokens = match.group(1).split()
    elif "Lattice=" in comment:
        tokens = comment.split("Lattice=", 1)[1].split()[:9]
    else:
        raise StructureParseError(path, 2, "Lattice", "comment line carries no cell")
    try:
        values = [float(t) for t in tokens]
    except ValueError:
        raise StructureParseError(path, 2, "Lattice", "non-numeric entry")
    if len(values) != 9:
        raise StructureParseError(path, 2, "Lattice", f"expected 9 numbers, got {len(values)}")
    return values


def _pbc(comment: str, path: str):
    match = _PBC_QUOTED.search(comment)
    if not match:
        return (True, True, True)
    flags = match.group(1).split()
    if len(flags) != 3 or any(f not in ("T", "F") for f in flags):
        raise StructureParseError(path, 2, "pbc", "expected three of T/F")
    return tuple(f == "T" for f in flags)


def loads_xyz(text: str, path: str = "<string>") -> Structure:
    """Roles are not stored in XYZ; every atom comes back as bulk.

    Lines are checked here so errors carry a line number; ASE's extxyz
    reader then builds the atoms from the checked lines.
    """
    lines = text.splitlines()
    if not lines:
        raise StructureParseError(path, 1, "atom count", "file is empty")
    try:
        count = int(lines[0].strip())
    except ValueError:
        raise StructureParseError(path, 1, "atom count", repr(lines[0].strip()))
    if count < 0:
        raise StructureParseError(path, 1, "atom count", "negative")
    if len(lines) < 2:
        raise StructureParseError(path, 2, "Lattice", "comment line missing")
    values = _lattice(lines[1], path)
    periodic = _pbc(lines[1], path)
    if count == 0:
        return Structure(Cell(tuple(tuple(values[3 * k:3 * k + 3]) for k in range(3)), periodic), ())

    checked = []
    for n in range(count):
        line_no = n + 3
        if line_no > len(lines):
            raise StructureParseError(path, line_no, "atom line", f"expected {count} atoms, found {n}")
        words = lines[line_no - 1].split()
        if len(words) < 4:
            raise StructureParseError(path, line_no, "atom line", "expected element and three coordinates")
        try:
            x, y, z = (float(w) for w in words[1:4])
        except ValueError:
            raise StructureParseError(path, line_no, "position", " ".join(words[1:4]))
        checked.append(f"{words[0]} {x!r} {y!r} {z!r}")

    lattice = " ".join(repr(v) for v in values)
    pbc = " ".join("T" if p else "F" for p in periodic)
    document = "\n".join([str(count), f'Lattice="{lattice}" pbc="{pbc}"'] + checked) + "\n"
    return Structure.from_ase(ase_read(io.StringIO(document), format="extxyz"))


# --- files -------------------------------------------------------------------

def parse_structure(path: PathLike, fmt: Optional[str] = None) -> Structure:
    """Read a structure; the format follows the suffix (.xyz) unless given"""
    fmt = _format_for(path, fmt)
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}")
    s = loads_xyz(text, str(path)) if fmt == "xyz" else loads_interchange(text, str(path))
    logger.debug("read %d atoms from %s", len(s), path)
    return s


def emit_structure(s: Structure, path: PathLike, fmt: Optional[str] = None) -> Path:
    fmt = _format_for(path, fmt)
    text = dumps_xyz(s) if fmt == "xyz" else dumps_interchange(s)
    path = Path(path)
    path.write_text(text)
    logger.debug("wrote %d atoms to %s (%s)", len(s), path, fmt)
    return path
