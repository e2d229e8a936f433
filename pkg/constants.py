"""Shared physical constants and nominal geometry tables.

Every module reads its constants from here; nothing else defines them.
"""

from typing import Dict, FrozenSet, Tuple


# Physical constants
GAMMA_E = 28024.9514          # MHz/T, free electron
GAMMA_1H = 42.577478          # MHz/T
GAMMA_13C = 10.7084           # MHz/T
MU0_OVER_4PI = 1e-7           # T*m/A
PLANCK = 6.62607015e-34       # J*s
K_B = 8.617333262e-5          # eV/K
ZERO_CELSIUS = 273.15         # K

# Unit conversions
ANGSTROM = 1e-10              # m
ANGSTROM2_TO_CM2 = 1e-16
MHZ = 1e6                     # Hz

# Diamond
LATTICE_PARAM = 3.57          # A, computed equilibrium value
LATTICE_PARAM_EXPERIMENT = 3.567
TETRAHEDRAL_ANGLE = 109.47122063449069  # degrees, arccos(-1/3)

# Bonding
BOND_CUTOFF = 1.85            # A, C-C; between 1st (1.546) and 2nd (2.524) neighbours
MIN_SEPARATION = 0.7          # A
VALENCE: Dict[str, int] = {"C": 4, "O": 2, "H": 1}

# Pairs involving terminator species use their own cutoffs. C-C falls back to
# the structure's bond_cutoff. Pairs not listed here never bond.
PAIR_CUTOFFS: Dict[FrozenSet[str], float] = {
    frozenset(("C", "H")): 1.30,
    frozenset(("C", "O")): 1.70,
    frozenset(("O", "H")): 1.20,
}

# Nominal terminator geometry
BOND_CH = 1.09
BOND_CO = 1.43
BOND_OH = 0.97
ANGLE_COH = 109.47            # degrees

# Surface
MIN_VACUUM = 10.0             # A
MIN_LAYERS = 6
DEFAULT_LAYERS = 9
MIN_TERRACE_ROWS = 2

ROLES: Tuple[str, ...] = (
    "bulk",
    "surface",
    "terminator-H",
    "terminator-O-bridge",
    "terminator-OH",
    "floating-C",
    "db-host",
)

TERMINATORS: Tuple[str, ...] = ("H", "O-bridge", "OH", "none")
