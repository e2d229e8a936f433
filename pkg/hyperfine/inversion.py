"""Invert measured secular couplings (a, b) to an electron-nucleus distance and angle."""

import logging
import math
from dataclasses import dataclass
from typing import List

from scipy.optimize import brentq

from errors import InputError
from hyperfine.isotopes import IsotopeSpec
from hyperfine.tensors import forward_ab

logger = logging.getLogger(__name__)

# Half-width of the bracket around the closed-form angle, degrees
REFINE_WINDOW = 0.5


@dataclass(frozen=True)
class GeometrySolution:
    r: float         # A
    theta: float     # degrees, [0, 90]
    residual: float  # MHz, max deviation of forward_ab from the input pair
    T: float = 0.0   # MHz, dipolar constant at r


def _angle_equation(theta_deg: float, delta: float, b: float) -> float:
    th = math.radians(theta_deg)
    s, c = math.sin(th), math.cos(th)
    return delta * 3 * s * c - b * (3 * c * c - 1)


def _solution(r: float, theta: float, a: float, b: float, a_iso: float,
              isotope: IsotopeSpec) -> GeometrySolution:
    forward = forward_ab(r, theta, a_iso, isotope)
    residual = max(abs(forward.a - a), abs(forward.b - b))
    return GeometrySolution(r, theta, residual, isotope.dipolar_constant / r ** 3)


def fit_geometry(a: float, b: float, a_iso: float, isotope: IsotopeSpec) -> List[GeometrySolution]:
    """All (r, theta) on the physical branch reproducing (a, b), best residual first.

    Dividing the angle equation by cos^2 leaves b t^2 + 3 delta t - 2b = 0 in
    t = tan(theta), delta = a - a_iso. Its roots have product -2, so for b > 0
    exactly one angle lies in (0, 90). For b = 0 only the axis (delta > 0)
    or the perpendicular plane (delta < 0) remain. An empty list means no
    geometry fits.
    """
    if b < 0:
        raise InputError("b must be non-negative")
    delta = a - a_iso
    c_n = isotope.dipolar_constant

    if b == 0:
        if delta > 0:
            t_dip, theta = delta / 2, 0.0
        elif delta < 0:
            t_dip, theta = -delta, 90.0
        else:
            logger.warning("a = a_iso and b = 0: no dipolar coupling to invert")
            return []
        r = (c_n / t_dip) ** (1 / 3)
        return [_solution(r, theta, a, b, a_iso, isotope)]

    tan_theta = 4 * b / (3 * delta + math.sqrt(9 * delta ** 2 + 8 * b ** 2))
    theta = math.degrees(math.atan(tan_theta))
    lo, hi = max(0.0, theta - REFINE_WINDOW), min(90.0, theta + REFINE_WINDOW)
    if _angle_equation(lo, delta, b) * _angle_equation(hi, delta, b) < 0:
        theta = brentq(_angle_equation, lo, hi, args=(delta, b), xtol=1e-14, rtol=1e-15)
    else:
        logger.debug("angle root not bracketed in [%g, %g], keeping closed form", lo, hi)

    th = math.radians(theta)
    t_dip = b / (3 * math.sin(th) * math.cos(th))
    if t_dip <= 0:
        return []
    r = (c_n / t_dip) ** (1 / 3)
    solutions = [_solution(r, theta, a, b, a_iso, isotope)]
    if solutions[0].residual > 1e-9:
        logger.warning("fit residual %.3g MHz exceeds 1e-9", solutions[0].residual)
    return sorted(solutions, key=lambda sol: (sol.residual, sol.r))
