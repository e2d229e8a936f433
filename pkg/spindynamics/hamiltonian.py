"""Secular S=1/2, I=1/2 spin-pair Hamiltonian and its nuclear transition frequencies."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from constants import GAMMA_E
from errors import InputError
from hyperfine.isotopes import IsotopeSpec

# Spin-1/2 operators
SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
ID2 = np.eye(2, dtype=complex)

# Product basis |m_S m_I>: (+,+), (+,-), (-,+), (-,-)
S_X, S_Y, S_Z = np.kron(SX, ID2), np.kron(SY, ID2), np.kron(SZ, ID2)
I_X, I_Z = np.kron(ID2, SX), np.kron(ID2, SZ)


@dataclass(frozen=True)
class SpinPairHamiltonian:
    omega_S: float  # MHz
    omega_I: float  # MHz
    a: float        # MHz
    b: float        # MHz


@dataclass(frozen=True)
class ManifoldFrequencies:
    omega_alpha: float  # MHz
    omega_beta: float   # MHz
    k: float            # modulation depth


def larmor(isotope: IsotopeSpec, B: float) -> float:
    """Nuclear Larmor frequency gamma_n * B in MHz"""
    if B < 0:
        raise InputError("field must be non-negative")
    return isotope.gamma * B


def electron_zeeman(B: float) -> float:
    """Free-electron Zeeman frequency in MHz"""
    if B < 0:
        raise InputError("field must be non-negative")
    return GAMMA_E * B


def hamiltonian_from_field(isotope: IsotopeSpec, B: float, a: float, b: float) -> SpinPairHamiltonian:
    return SpinPairHamiltonian(electron_zeeman(B), larmor(isotope, B), a, b)


def build_hamiltonian(h: SpinPairHamiltonian) -> np.ndarray:
    """omega_S Sz + omega_I Iz + a SzIz + b SzIx, in MHz"""
    return (h.omega_S * S_Z + h.omega_I * I_Z
            + h.a * S_Z @ I_Z + h.b * S_Z @ I_X)


def nuclear_frequencies(h: SpinPairHamiltonian) -> ManifoldFrequencies:
    omega_alpha = math.hypot(h.omega_I + h.a / 2, h.b / 2)
    omega_beta = math.hypot(h.omega_I - h.a / 2, h.b / 2)
    if omega_alpha == 0 or omega_beta == 0:
        k = 0.0
    else:
        k = (h.b * h.omega_I / (omega_alpha * omega_beta)) ** 2
    return ManifoldFrequencies(omega_alpha, omega_beta, k)


def eigen_gaps(h: SpinPairHamiltonian) -> ManifoldFrequencies:
    """Nuclear splittings and modulation depth from diagonalizing the 4x4 matrix.

    The Hamiltonian commutes with Sz, so the m_S = +1/2 and -1/2 blocks are
    diagonalized separately; k = 4|<a0|b0>|^2 |<a0|b1>|^2 from the overlap of
    the nuclear eigenvectors of the two manifolds.
    """
    matrix = build_hamiltonian(h)
    gaps, vectors = [], []
    for block in (slice(0, 2), slice(2, 4)):
        levels, states = eigh(matrix[block, block])
        gaps.append(float(levels[1] - levels[0]))
        vectors.append(states)
    overlap = vectors[0].conj().T @ vectors[1]
    k = 4 * abs(overlap[0, 0]) ** 2 * abs(overlap[0, 1]) ** 2
    return ManifoldFrequencies(gaps[0], gaps[1], float(k))
