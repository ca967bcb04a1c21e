"""Parametrically activated iSWAP between a fixed (F) and a tunable (T) transmon.

The four-level subspace is ordered ``|00>, |10>, |01>, |11>`` with kets
written ``|T F>``; as a tensor product this is ``kron(F, T)`` with the
tunable qubit as the fast index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import jv

from ..control import ControlSolution, DriveTerm
from ..pwc import PwcScalar, Segmentation
from ._common import TWO_PI

__all__ = [
    "ISWAP_COUPLING",
    "FIXED_QUBIT_DRIVE",
    "ISWAP_NOISE",
    "ISWAP_TARGET",
    "IswapConfig",
    "coupling_rate",
    "resonance_conditions",
    "iswap_system",
]


def _unit(i, j, dim=4):
    m = np.zeros((dim, dim), dtype=complex)
    m[i, j] = 1.0
    return m


# (1/2)|10><01|
ISWAP_COUPLING = 0.5 * _unit(1, 2)
# (1/2)|0><1|_F (x) I_T
FIXED_QUBIT_DRIVE = 0.5 * np.kron(_unit(0, 1, 2), np.eye(2))
# (1/2) I_F (x) sigma_z on the tunable qubit, |0> -> -1
ISWAP_NOISE = 0.5 * np.diag([-1.0, 1.0, -1.0, 1.0]).astype(complex)
ISWAP_TARGET = np.array([[1, 0, 0, 0], [0, 0, -1j, 0], [0, -1j, 0, 0], [0, 0, 0, 1]], dtype=complex)


def coupling_rate(g: float, modulation_amplitude: float, pump_frequency: float) -> float:
    """``Lambda = 2 g J_1(omega_T / (2 omega_p))``."""
    return 2.0 * g * float(jv(1, modulation_amplitude / (2.0 * pump_frequency)))


def resonance_conditions(detuning: float, eta_fixed: float, eta_tunable: float, order: int = 1) -> dict:
    """Pump frequencies ``omega_p`` activating each transition at harmonic ``order``.

    Only the iSWAP condition is used by the simulated subspace; the others
    are provided for reference.
    """
    n2 = 2.0 * order
    return {
        "iswap": detuning / n2,
        "cz20": (detuning + abs(eta_fixed)) / n2,
        "cz02": (detuning - abs(eta_tunable)) / n2,
    }


@dataclass(frozen=True)
class IswapConfig:
    """Parameters of the iSWAP subspace (angular units)."""

    lambda_max: float = TWO_PI * 1e6
    coupling: float = None
    modulation_amplitude: float = None
    pump_frequency: float = None
    omega_max: float = TWO_PI * 1e6
    segments: int = 1

    @property
    def rate(self) -> float:
        if None in (self.coupling, self.modulation_amplitude, self.pump_frequency):
            return self.lambda_max
        return coupling_rate(self.coupling, self.modulation_amplitude, self.pump_frequency)


def iswap_system(config: IswapConfig = None, **overrides):
    """Primitive iSWAP control and its effective dephasing operator.

    The coupling drive is held at the rate ``Lambda`` (derived from the
    Bessel-function expression when the coupling, modulation amplitude and
    pump frequency are all given, else ``lambda_max``) for the duration
    ``pi / Lambda``, which completes the ``|10> <-> |01>`` transfer. The
    fixed-qubit drive is present with zero amplitude so that optimizers and
    simulators see the full control template.

    Returns
    -------
    ctrl : ControlSolution
    noise_operator : ndarray
    """
    config = config or IswapConfig()
    if overrides:
        config = IswapConfig(**{**config.__dict__, **overrides})
    rate = config.rate
    if not rate > 0:
        raise ValueError("coupling rate must be positive")
    duration = np.pi / rate
    seg = Segmentation.uniform(config.segments, duration)
    coupling = PwcScalar(np.full(config.segments, rate, dtype=complex), seg)
    fixed = PwcScalar(np.zeros(config.segments, dtype=complex), seg)
    ctrl = ControlSolution([DriveTerm(coupling, ISWAP_COUPLING), DriveTerm(fixed, FIXED_QUBIT_DRIVE)],
                           drift=np.zeros((4, 4)), duration=duration)
    return ctrl, ISWAP_NOISE
