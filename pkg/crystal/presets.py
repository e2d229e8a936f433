"""Named structure pipelines used by the command line."""

import logging

from constants import DEFAULT_LAYERS, LATTICE_PARAM, MIN_VACUUM
from crystal.builder import build_bulk, carve_chadi_step, cut_slab, facet_step_axis, raise_trench_carbon
from crystal.structure import Structure
from crystal.termination import edge_rules, terminate
from crystal.topology import facet_sites
from errors import InputError

logger = logging.getLogger(__name__)

PRESETS = ("paper-step", "flat", "bulk")

STEP_LATERAL = (6, 6)
STEP_TERRACE_ROWS = 3


def build_step_model(variant: str = "O/H/H", lattice_param: float = LATTICE_PARAM,
                     layers: int = DEFAULT_LAYERS, vacuum: float = MIN_VACUUM) -> Structure:
    """6x6 (100) slab with a Chadi step, a raised trench carbon and the edge termination `variant`"""
    rules = edge_rules(variant)
    slab = cut_slab(lattice_param, (1, 0, 0), layers, STEP_LATERAL, vacuum)
    stepped = carve_chadi_step(slab, facet_step_axis(slab), STEP_TERRACE_ROWS)
    site = facet_sites(stepped)[0]
    logger.debug("raising facet carbon %d", site)
    raised = raise_trench_carbon(stepped, site)
    return terminate(raised, rules)


def build_preset(name: str, variant: str = "O/H/H", lattice_param: float = LATTICE_PARAM) -> Structure:
    if name == "paper-step":
        return build_step_model(variant, lattice_param)
    if name == "flat":
        slab = cut_slab(lattice_param, (1, 0, 0), DEFAULT_LAYERS, STEP_LATERAL, MIN_VACUUM)
        return terminate(slab, {"*": "H"})
    if name == "bulk":
        return build_bulk(lattice_param, (1, 1, 1))
    raise InputError(f"unknown preset {name!r}, choose from {', '.join(PRESETS)}")
