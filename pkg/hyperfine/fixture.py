"""Fermi-contact tables: loading the shipped fixture and resolving selectors to atoms."""

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping, Tuple

from crystal.structure import Structure
from crystal.topology import neighbor_list
from database import DATA_DIR
from errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_FIXTURE = DATA_DIR / "paper_fixture.json"


@dataclass(frozen=True)
class HyperfineFixture:
    lobe_offset: float
    field_direction: Tuple[float, float, float]
    a_iso: Mapping[str, float]
    alternatives: Mapping[str, float] = field(default_factory=dict)
    quoted: Mapping[str, Tuple[float, float]] = field(default_factory=dict)

    def with_alternatives(self) -> "HyperfineFixture":
        """Same fixture with the alternative values replacing the primary ones"""
        merged = dict(self.a_iso)
        merged.update(self.alternatives)
        return HyperfineFixture(self.lobe_offset, self.field_direction, merged, self.alternatives, self.quoted)


def load_fixture(path=DEFAULT_FIXTURE) -> HyperfineFixture:
    """Reads the fixture file"""
    try:
        with open(path, "r") as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read hyperfine fixture {path}: {exc}") from None
    try:
        return HyperfineFixture(
            lobe_offset=float(data["lobe_offset_A"]),
            field_direction=tuple(float(v) for v in data["field_direction"]),
            a_iso={k: float(v) for k, v in data["a_iso_MHz"].items()},
            alternatives={k: float(v) for k, v in data.get("alternatives_MHz", {}).items()},
            quoted={k: tuple(float(x) for x in v) for k, v in data.get("quoted_couplings_MHz", {}).items()},
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"hyperfine fixture {path} is malformed: {exc!r}") from None


def _bonded(s: Structure, adjacency, i: int, species: str):
    return [b.j for b in adjacency[i] if s.atoms[b.j].species == species]


def select(s: Structure, selector: str, adjacency=None):
    """Atom indices named by a selector such as 'db-host', 'db-host:shell2', 'floating-C:OH-H' or 'index:12'"""
    adjacency = adjacency if adjacency is not None else neighbor_list(s)
    base, _, qualifier = selector.partition(":")
    if base == "index":
        try:
            index = int(qualifier)
        except ValueError:
            raise ConfigError(f"bad atom index in selector {selector!r}") from None
        if not 0 <= index < len(s):
            raise ConfigError(f"selector {selector!r} is outside the structure")
        return [index]

    roots = s.indices(role=base)
    if not qualifier:
        return roots
    if qualifier in ("shell1", "shell2"):
        seen = set(roots)
        shell = set(roots)
        for _ in range(1 if qualifier == "shell1" else 2):
            shell = {j for i in shell for j in _bonded(s, adjacency, i, "C")} - seen
            seen |= shell
        return sorted(shell)
    if qualifier == "OH-H":
        oxygens = [o for i in roots for o in _bonded(s, adjacency, i, "O")]
        return sorted({h for o in oxygens for h in _bonded(s, adjacency, o, "H")})
    raise ConfigError(f"unknown selector {selector!r}")


def resolve_a_iso(s: Structure, table: Mapping[str, float]) -> Dict[int, float]:
    """Map atom index -> a_iso. Index selectors win over role selectors"""
    adjacency = neighbor_list(s)
    resolved: Dict[int, float] = {}
    ordered = sorted(table.items(), key=lambda item: item[0].startswith("index:"))
    for selector, value in ordered:
        atoms = select(s, selector, adjacency)
        if not atoms:
            logger.warning("selector %r matches no atom", selector)
        for i in atoms:
            resolved[i] = value
    return resolved
