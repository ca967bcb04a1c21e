"""Carr-Purcell-Meiboom-Gill dynamical-decoupling sequences."""

from __future__ import annotations

import numpy as np

from ..control import ControlSolution, DriveTerm
from ..pwc import PwcScalar, Segmentation
from ._common import QUBIT_DRIVE, SIGMA_Z

__all__ = ["cpmg_sequence", "pulse_centers", "DEPHASING"]

# dephasing noise operator; free evolution of duration tau has F(0) = tau^2 / 4
DEPHASING = 0.5 * SIGMA_Z


def pulse_centers(order: int, duration: float) -> np.ndarray:
    """``t_j = tau (j - 1/2) / n`` for ``j = 1..n``."""
    return duration * (np.arange(1, order + 1) - 0.5) / order


def cpmg_sequence(order: int, duration: float, pulse_width: float = None,
                  phase: float = 0.0) -> ControlSolution:
    """``order`` equally spaced pi pulses on a qubit.

    Each pulse is a single constant segment of amplitude ``pi / pulse_width``
    on the drive operator ``|1><0| / 2``, so that ``phase = 0`` rotates about
    ``sigma_x``. ``order = 0`` is free evolution.

    Parameters
    ----------
    order : int
    duration : float
        Total sequence duration (s).
    pulse_width : float, optional
        Defaults to ``duration / (50 * order)``.
    phase : float
        Drive phase of every pulse.
    """
    order = int(order)
    if order < 0:
        raise ValueError("order must be non-negative")
    if not duration > 0:
        raise ValueError("duration must be positive")
    if order == 0:
        return ControlSolution(drift=np.zeros((2, 2)), duration=duration)
    if pulse_width is None:
        pulse_width = duration / (50 * order)
    if not 0 < pulse_width * order < duration:
        raise ValueError("pulses overlap: order * pulse_width must be below the duration")
    amplitude = np.pi / pulse_width * np.exp(1j * phase)
    edges = []
    for c in pulse_centers(order, duration):
        edges += [c - pulse_width / 2, c + pulse_width / 2]
    boundaries = np.concatenate([[0.0], edges, [duration]])
    values = np.zeros(boundaries.size - 1, dtype=complex)
    values[1::2] = amplitude
    keep = np.diff(boundaries) > 0
    seg = Segmentation(np.diff(boundaries)[keep])
    pulse = PwcScalar(values[keep], seg)
    return ControlSolution([DriveTerm(pulse, QUBIT_DRIVE)], drift=np.zeros((2, 2)), duration=duration)
