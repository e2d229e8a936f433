"""Polanyi-Wigner thermal desorption: R = -dtheta/dt = nu exp(-E/kT) theta^n."""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp

from constants import K_B, ZERO_CELSIUS
from errors import InputError, NumericalError

logger = logging.getLogger(__name__)

# Smallest exponent exp() can take without underflowing to zero
MIN_EXPONENT = math.log(np.finfo(float).tiny)

ODE_TOLERANCE = {"rtol": 1e-12, "atol": 1e-14}

ANNEAL_TEMPERATURES_C = (465.0, 600.0)


@dataclass(frozen=True)
class DesorptionModel:
    E_des: float         # eV
    nu: float = 1e15     # 1/s
    order: float = 1.0
    name: str = ""

    def __post_init__(self):
        if self.E_des <= 0:
            raise InputError("desorption barrier must be positive")
        if self.nu <= 0:
            raise InputError("prefactor must be positive")
        if self.order <= 0:
            raise InputError("reaction order must be positive")

    @property
    def label(self) -> str:
        return self.name or f"{self.E_des:g}eV"


EDGE_MODELS: Dict[str, DesorptionModel] = {
    "O/H/H": DesorptionModel(0.89, 1e15, 1.0, "O/H/H"),
    "O/OH/OH": DesorptionModel(1.12, 1e15, 1.0, "O/OH/OH"),
    "OH/OH": DesorptionModel(0.96, 1e15, 1.0, "OH/OH"),
}


@dataclass(frozen=True)
class CoverageTrajectory:
    samples: Tuple[Tuple[float, float], ...]  # (t in s, theta)

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples])

    @property
    def coverage(self) -> np.ndarray:
        return np.array([c for _, c in self.samples])


@dataclass(frozen=True)
class SweepRow:
    T_K: float
    rates: Tuple[float, ...]
    flags: Tuple[bool, ...]  # per model, set where the rate underflowed

    @property
    def clamped(self) -> bool:
        return any(self.flags)

    @property
    def T_C(self) -> float:
        return kelvin_to_celsius(self.T_K)


@dataclass(frozen=True)
class AnnealRow:
    model: str
    E_des: float
    T_K: float
    rate: float
    desorbed: float
    remaining: float
    time_to_clear: float
    cleared: bool
    clamped: bool


def celsius_to_kelvin(t_c: float) -> float:
    return t_c + ZERO_CELSIUS


def kelvin_to_celsius(t_k: float) -> float:
    return t_k - ZERO_CELSIUS


def _rate(m: DesorptionModel, T: float) -> Tuple[float, bool]:
    """Rate constant and whether exp() had to be clamped to zero"""
    if T <= 0:
        raise InputError(f"temperature must be positive, got {T} K")
    exponent = -m.E_des / (K_B * T)
    if exponent < MIN_EXPONENT:
        return 0.0, True
    return m.nu * math.exp(exponent), False


def rate_constant(m: DesorptionModel, T: float) -> float:
    """nu exp(-E_des / k_B T), 1/s"""
    rate, clamped = _rate(m, T)
    if clamped:
        logger.warning("rate for %s at %.2f K underflows, clamped to 0", m.label, T)
    return rate


def rate_ratio(m: DesorptionModel, T_hot: float, T_cold: float) -> float:
    """rate(T_hot) / rate(T_cold) evaluated in log space"""
    if T_hot <= 0 or T_cold <= 0:
        raise InputError("temperatures must be positive")
    return math.exp(m.E_des / K_B * (1 / T_cold - 1 / T_hot))


def _check_grid(t_grid: Sequence[float]) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.size == 0:
        raise InputError("time grid is empty")
    if t[0] < 0 or np.any(np.diff(t) <= 0):
        raise InputError("time grid must be non-negative and strictly increasing")
    return t


def _integrate(order: float, theta0: float, tau: np.ndarray) -> np.ndarray:
    """Coverage on a grid of dimensionless times tau = k t"""
    if tau[-1] == 0:
        return np.full(tau.shape, theta0)

    def rhs(_, y):
        return [-max(y[0], 0.0) ** order]

    solution = solve_ivp(rhs, (0.0, float(tau[-1])), [theta0], method="DOP853",
                         t_eval=tau, **ODE_TOLERANCE)
    if not solution.success:
        raise NumericalError(f"coverage integration failed: {solution.message}")
    return np.clip(solution.y[0], 0.0, theta0)


def coverage_trajectory(m: DesorptionModel, T: float, theta0: float, t_grid: Sequence[float],
                        numerical: bool = False) -> CoverageTrajectory:
    """theta(t) from dtheta/dt = -k theta^n.

    First order uses theta0 exp(-kt) unless `numerical` is set; other orders
    are integrated in the dimensionless time kt.
    """
    if not 0 < theta0 <= 1:
        raise InputError("initial coverage must lie in (0, 1]")
    t = _check_grid(t_grid)
    k = rate_constant(m, T)
    if m.order == 1 and not numerical:
        theta = theta0 * np.exp(-k * t)
    else:
        theta = _integrate(m.order, theta0, k * t)
    return CoverageTrajectory(tuple((float(a), float(b)) for a, b in zip(t, theta)))


def time_to_fraction(m: DesorptionModel, T: float, fraction_remaining: float) -> float:
    """Seconds until theta/theta0 falls to `fraction_remaining`; inf if the rate underflows"""
    if not 0 < fraction_remaining < 1:
        raise InputError("fraction remaining must lie in (0, 1)")
    k = rate_constant(m, T)
    if k == 0:
        return math.inf
    if m.order == 1:
        return -math.log(fraction_remaining) / k

    def reached(_, y):
        return y[0] - fraction_remaining
    reached.terminal = True
    reached.direction = -1

    horizon = 10.0
    while horizon < 1e300:
        solution = solve_ivp(lambda _, y: [-max(y[0], 0.0) ** m.order], (0.0, horizon), [1.0],
                             method="DOP853", events=reached, **ODE_TOLERANCE)
        if not solution.success:
            raise NumericalError(f"coverage integration failed: {solution.message}")
        if solution.t_events[0].size:
            return float(solution.t_events[0][0]) / k
        horizon *= 1e3
    raise NumericalError(f"coverage never reaches {fraction_remaining:g}")


def desorbed_after(m: DesorptionModel, T: float, duration: float, N0: float) -> Tuple[float, float]:
    """(desorbed, remaining) areal densities after holding at T for `duration` seconds"""
    if N0 <= 0:
        raise InputError("initial density must be positive")
    if duration < 0:
        raise InputError("duration must be non-negative")
    theta = coverage_trajectory(m, T, 1.0, [duration]).coverage[-1]
    desorbed = N0 - N0 * float(theta)
    # one of the two subtractions is exact, so desorbed + remaining == N0 in floating point
    return desorbed, N0 - desorbed


def _models(models) -> List[DesorptionModel]:
    if isinstance(models, DesorptionModel):
        return [models]
    models = list(models)
    if not models:
        raise InputError("no desorption model given")
    return models


def temperature_grid(T_min: float, T_max: float, steps: int,
                     markers: Sequence[float] = ()) -> List[float]:
    """Evenly spaced kelvin grid with marker temperatures inside the range merged in"""
    if T_min <= 0 or T_max < T_min:
        raise InputError("temperature range must be positive and ordered")
    if T_min == T_max:
        return [T_min]
    if steps < 2:
        raise InputError("a sweep needs at least two steps")
    grid = [float(t) for t in np.linspace(T_min, T_max, steps)]
    for marker in markers:
        if T_min <= marker <= T_max and all(abs(marker - t) > 1e-9 for t in grid):
            grid.append(float(marker))
    return sorted(grid)


def temperature_sweep(models: Union[DesorptionModel, Sequence[DesorptionModel]],
                      T_range: Tuple[float, float], steps: int,
                      markers: Optional[Sequence[float]] = None) -> List[SweepRow]:
    """Rate constants of each model on a temperature grid (kelvin)"""
    models = _models(models)
    if markers is None:
        markers = tuple(celsius_to_kelvin(t) for t in ANNEAL_TEMPERATURES_C)
    rows = []
    for T in temperature_grid(T_range[0], T_range[1], steps, markers):
        rates, flags = zip(*(_rate(m, T) for m in models))
        rows.append(SweepRow(T, tuple(rates), tuple(flags)))
    if any(r.clamped for r in rows):
        logger.warning("some rates underflowed and were clamped to 0")
    return rows


def anneal_report(models: Union[DesorptionModel, Sequence[DesorptionModel]], temperatures: Sequence[float],
                  duration: float, N0: float, threshold: float = 1.0) -> List[AnnealRow]:
    """Desorbed and remaining spins after holding each model at each temperature (kelvin).

    time_to_clear is the hold time that leaves fewer than `threshold` spins
    per cm^2 of the initial N0.
    """
    if not 0 < threshold < N0:
        raise InputError("clear threshold must lie between 0 and N0")
    rows = []
    for m in _models(models):
        for T in temperatures:
            rate, clamped = _rate(m, T)
            desorbed, remaining = desorbed_after(m, T, duration, N0)
            clear = time_to_fraction(m, T, threshold / N0)
            rows.append(AnnealRow(m.label, m.E_des, T, rate, desorbed, remaining, clear,
                                  clear <= duration, clamped or remaining == 0.0))
    return rows
