"""Point-dipole hyperfine tensors and their secular decomposition."""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from errors import InputError, SingularityError
from hyperfine.isotopes import IsotopeSpec

# Closest approach of a nucleus to a spin site, A
SINGULAR_DISTANCE = 0.1

Vector = Tuple[float, float, float]
Matrix = Tuple[Vector, Vector, Vector]


@dataclass(frozen=True)
class SpinCenter:
    """Electron spin density as weighted point populations"""
    sites: Tuple[Tuple[Vector, float], ...]

    def __post_init__(self):
        if not self.sites:
            raise InputError("a spin center needs at least one site")
        populations = [p for _, p in self.sites]
        if min(populations) < 0:
            raise InputError("site populations must be non-negative")
        if abs(sum(populations) - 1.0) > 1e-12:
            raise InputError(f"site populations sum to {sum(populations)!r}, not 1")

    @classmethod
    def single(cls, position: Sequence[float]) -> "SpinCenter":
        return cls(((_vector(position), 1.0),))

    def moved(self, transform) -> "SpinCenter":
        """Apply `transform` (array -> array) to every site position"""
        return SpinCenter(tuple((_vector(transform(np.array(pos))), p) for pos, p in self.sites))


@dataclass(frozen=True)
class HyperfineTensor:
    A: Matrix
    a_iso: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.A)

    @property
    def anisotropic(self) -> np.ndarray:
        return self.matrix - self.a_iso * np.eye(3)


@dataclass(frozen=True)
class SecularPair:
    a: float  # MHz, A_ZZ
    b: float  # MHz, pseudo-secular, >= 0


def _vector(values) -> Vector:
    x, y, z = (float(v) for v in values)
    return (x, y, z)


def _matrix(m: np.ndarray) -> Matrix:
    return tuple(_vector(row) for row in m)


def dipolar_constant(r: float, isotope: IsotopeSpec) -> float:
    """T = C_n / r^3, MHz"""
    return isotope.dipolar_constant / r ** 3


def dipolar_tensor(center: SpinCenter, nucleus_pos: Sequence[float], isotope: IsotopeSpec) -> np.ndarray:
    """Sum over sites of p * C_n * (3 r r^T - I) / r^3, in MHz"""
    nucleus = np.asarray(nucleus_pos, dtype=float)
    tensor = np.zeros((3, 3))
    for position, population in center.sites:
        r_vec = nucleus - np.asarray(position)
        r = float(np.linalg.norm(r_vec))
        if r < SINGULAR_DISTANCE:
            raise SingularityError(r, SINGULAR_DISTANCE)
        if population == 0:
            continue
        r_hat = r_vec / r
        tensor += population * dipolar_constant(r, isotope) * (3 * np.outer(r_hat, r_hat) - np.eye(3))
    return tensor


def total_tensor(dip: np.ndarray, a_iso: float) -> HyperfineTensor:
    dip = np.asarray(dip, dtype=float)
    scale = max(1.0, float(np.abs(dip).max()))
    if abs(np.trace(dip)) > 1e-9 * scale or np.abs(dip - dip.T).max() > 1e-12 * scale:
        raise InputError("dipolar part must be symmetric and traceless")
    return HyperfineTensor(_matrix(a_iso * np.eye(3) + dip), float(a_iso))


def principal_values(tensor) -> np.ndarray:
    """Eigenvalues of a symmetric tensor, largest first"""
    matrix = tensor.matrix if isinstance(tensor, HyperfineTensor) else np.asarray(tensor)
    return np.linalg.eigvalsh(matrix)[::-1]


def _field_axis(field_dir: Sequence[float]) -> np.ndarray:
    b = np.asarray(field_dir, dtype=float)
    length = np.linalg.norm(b)
    if length == 0:
        raise InputError("field direction must be non-zero")
    return b / length


def secular_couplings(A: HyperfineTensor, field_dir: Sequence[float]) -> SecularPair:
    """a = A_ZZ and b = sqrt(A_ZX^2 + A_ZY^2) in a frame with Z along the field.

    The column A.B splits into its part along B (a) and a perpendicular
    remainder whose length is b, so no explicit choice of X and Y is made.
    """
    b_hat = _field_axis(field_dir)
    column = A.matrix @ b_hat
    a = float(b_hat @ column)
    b = float(np.linalg.norm(column - a * b_hat))
    return SecularPair(a, b)


def forward_ab(r: float, theta: float, a_iso: float, isotope: IsotopeSpec) -> SecularPair:
    """Closed form a = a_iso + T(3cos^2 - 1), b = 3T sin cos for an axial point dipole"""
    if r <= SINGULAR_DISTANCE:
        raise SingularityError(r, SINGULAR_DISTANCE)
    if not 0.0 <= theta <= 90.0:
        raise InputError(f"theta must lie in [0, 90] degrees, got {theta}")
    t = dipolar_constant(r, isotope)
    c, s = math.cos(math.radians(theta)), math.sin(math.radians(theta))
    return SecularPair(a_iso + t * (3 * c * c - 1), 3 * t * s * c)
