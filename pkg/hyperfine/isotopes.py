"""Nuclear species constants and the point-dipole prefactor."""

from dataclasses import dataclass
from typing import Dict

from constants import ANGSTROM, GAMMA_13C, GAMMA_1H, GAMMA_E, MHZ, MU0_OVER_4PI, PLANCK
from errors import InputError


def dipolar_prefactor(gamma_n: float) -> float:
    """C_n = (mu0/4pi) h gamma_e gamma_n in MHz*A^3 (gammas in MHz/T)"""
    hz_m3 = MU0_OVER_4PI * PLANCK * (GAMMA_E * MHZ) * (gamma_n * MHZ)
    return hz_m3 / ANGSTROM ** 3 / MHZ


@dataclass(frozen=True)
class IsotopeSpec:
    symbol: str
    element: str
    spin: float
    gamma: float  # MHz/T

    def __post_init__(self):
        if self.gamma <= 0:
            raise InputError(f"{self.symbol}: gyromagnetic ratio must be positive")

    @property
    def dipolar_constant(self) -> float:
        """C_n, MHz*A^3"""
        return dipolar_prefactor(self.gamma)


ISOTOPES: Dict[str, IsotopeSpec] = {
    "1H": IsotopeSpec("1H", "H", 0.5, GAMMA_1H),
    "13C": IsotopeSpec("13C", "C", 0.5, GAMMA_13C),
}

# Magnetic isotope probed for each element; O has no spin-1/2 isotope here
ELEMENT_ISOTOPES = {"H": "1H", "C": "13C"}


def isotope(symbol: str) -> IsotopeSpec:
    try:
        return ISOTOPES[symbol]
    except KeyError:
        raise InputError(f"unknown isotope {symbol!r}, choose from {', '.join(ISOTOPES)}") from None
