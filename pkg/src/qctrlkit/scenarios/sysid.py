"""Three-axis qubit Hamiltonian ``H = (Ox sx + Oy sy + Oz sz) / 2`` probed by
free evolution from eigenstates of each Pauli operator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..identification import Experiment
from ._common import SIGMA_X, SIGMA_Y, SIGMA_Z, TWO_PI

__all__ = ["ThreeAxisConfig", "three_axis_experiments", "PREPARATIONS", "TRUE_RATES", "REPORTED_ERRORS"]

TRUE_RATES = TWO_PI * np.array([0.5e6, 1.5e6, 1.8e6])
# reference two-sigma uncertainties of the three estimates
REPORTED_ERRORS = TWO_PI * np.array([0.016e6, 0.022e6, 0.018e6])

_PLUS_X = np.array([1, 1], dtype=complex) / np.sqrt(2)
_PLUS_Y = np.array([1, 1j], dtype=complex) / np.sqrt(2)
_PLUS_Z = np.array([1, 0], dtype=complex)

# (preparation, measured observable): each state is read out in a different basis
PREPARATIONS = (
    ("x", _PLUS_X, SIGMA_Z),
    ("y", _PLUS_Y, SIGMA_X),
    ("z", _PLUS_Z, SIGMA_Y),
)


@dataclass(frozen=True)
class ThreeAxisConfig:
    """Wait-time grid: ``points`` uniform times on ``[start, stop]`` (s) per preparation."""

    points: int = 20
    start: float = 0.0
    stop: float = 1e-6


def three_axis_experiments(config: ThreeAxisConfig = None):
    """Experiments ordered preparation-major, with unknowns ``(Ox, Oy, Oz)``."""
    config = config or ThreeAxisConfig()
    times = np.linspace(config.start, config.stop, config.points)
    generators = 0.5 * np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])
    return [Experiment([t], psi, O, generators) for _, psi, O in PREPARATIONS for t in times]
