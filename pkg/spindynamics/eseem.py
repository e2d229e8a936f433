"""Two-pulse (pi/2 - tau - pi - tau) echo envelope modulation."""

import logging
import math
from dataclasses import dataclass, replace
from typing import List, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from errors import InputError
from spindynamics.hamiltonian import S_X, S_Y, S_Z, SpinPairHamiltonian, build_hamiltonian, nuclear_frequencies

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EchoTrace:
    samples: Tuple[Tuple[float, float], ...]  # (tau in us, E)

    @property
    def tau(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples])

    @property
    def envelope(self) -> np.ndarray:
        return np.array([e for _, e in self.samples])


def _check_grid(tau_grid: Sequence[float]) -> np.ndarray:
    tau = np.asarray(tau_grid, dtype=float)
    if tau.size == 0:
        raise InputError("tau grid is empty")
    if tau.min() < 0:
        raise InputError("tau values must be non-negative")
    if np.any(np.diff(tau) <= 0):
        raise InputError("tau grid must be strictly increasing")
    return tau


def two_pulse_eseem(h: SpinPairHamiltonian, tau_grid: Sequence[float]) -> EchoTrace:
    """Closed-form echo envelope; frequencies in MHz, tau in microseconds"""
    tau = _check_grid(tau_grid)
    f = nuclear_frequencies(h)
    wa = 2 * math.pi * f.omega_alpha * tau
    wb = 2 * math.pi * f.omega_beta * tau
    envelope = 1 - f.k / 4 * (2 - 2 * np.cos(wa) - 2 * np.cos(wb) + np.cos(wa - wb) + np.cos(wa + wb))
    return EchoTrace(tuple((float(t), float(e)) for t, e in zip(tau, envelope)))


def _echo_amplitude(h: SpinPairHamiltonian, tau: float) -> float:
    half = expm(-1j * (math.pi / 2) * S_X)
    full = expm(-1j * math.pi * S_X)
    free = expm(-2j * math.pi * build_hamiltonian(h) * tau)
    sequence = free @ full @ free @ half
    rho = sequence @ S_Z @ sequence.conj().T
    return float(np.real(np.trace(rho @ S_Y)))


def propagate_two_pulse_echo(h: SpinPairHamiltonian, tau_grid: Sequence[float]) -> EchoTrace:
    """Density-matrix propagation with ideal pulses about x, starting from Sz.

    The echo is read out along Sy and normalized by the same sequence run
    without the pseudo-secular coupling.
    """
    tau = _check_grid(tau_grid)
    reference = replace(h, b=0.0)
    samples = []
    for t in tau:
        samples.append((float(t), _echo_amplitude(h, t) / _echo_amplitude(reference, t)))
    logger.debug("propagated %d echo delays", len(samples))
    return EchoTrace(tuple(samples))


def modulation_bounds(h: SpinPairHamiltonian) -> Tuple[float, float]:
    """Envelope range [1 - 2k, 1]"""
    k = nuclear_frequencies(h).k
    return 1 - 2 * k, 1.0


def linear_grid(tau_max: float, steps: int) -> List[float]:
    if tau_max <= 0 or steps < 2:
        raise InputError("need tau_max > 0 and at least two steps")
    return [float(t) for t in np.linspace(0.0, tau_max, steps)]
