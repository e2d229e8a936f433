from pathlib import Path

import pytest

from constants import LATTICE_PARAM
from crystal.builder import carve_chadi_step, cut_slab, raise_trench_carbon
from crystal.presets import build_step_model

# Indices in the 6x6, 9-layer slab after a width-3 step along x
RAISED_SITE = 254
DB_HOST = 248


@pytest.fixture(scope="session")
def repo_root():
    return Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def flat_slab():
    return cut_slab(LATTICE_PARAM, (1, 0, 0), 9, (6, 6))


@pytest.fixture(scope="session")
def small_slab():
    return cut_slab(LATTICE_PARAM, (1, 0, 0), 6, (2, 2))


@pytest.fixture(scope="session")
def stepped(flat_slab):
    return carve_chadi_step(flat_slab, "x", 3)


@pytest.fixture(scope="session")
def raised(stepped):
    return raise_trench_carbon(stepped, RAISED_SITE)


@pytest.fixture(scope="session")
def paper_step():
    return build_step_model("O/H/H")
