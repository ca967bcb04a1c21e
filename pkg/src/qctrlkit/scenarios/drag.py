"""Anharmonic three-level transmon driven by (Half-)DRAG pulses.

``H(t) = (gamma(t) a + h.c.) + (eta/2) a^dag^2 a^2 + Delta(t) a^dag a + beta_z(t) Z``

with ``a = |0><1| + sqrt(2)|1><2|`` and ``Z = diag(1, -1, 0)`` the qubit
``sigma_z`` embedded in the qutrit. The in-phase quadrature is a Gaussian
(offset so that it starts and ends at zero), the quadrature component is
``weight * dI/dt / eta`` and the detuning is ``kappa * I^2 / eta``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy.optimize import minimize_scalar

from ..control import ControlSolution, DriveTerm, ShiftTerm
from ..noise import psd_from_function
from ..pwc import PwcScalar, Segmentation
from ..simulator import NoiseChannel, final_unitary
from ._common import TWO_PI, basis_state

__all__ = [
    "LOWERING",
    "NUMBER",
    "QUTRIT_DEPHASING",
    "QutritSystem",
    "DragConfig",
    "drag_waveforms",
    "drag_qutrit",
    "calibrate_amplitude",
    "drag_noise_channels",
    "transfer_populations",
]

LOWERING = np.array([[0, 1, 0], [0, 0, np.sqrt(2)], [0, 0, 0]], dtype=complex)
NUMBER = LOWERING.conj().T @ LOWERING
QUTRIT_DEPHASING = np.diag([1.0, -1.0, 0.0]).astype(complex)


@dataclass(frozen=True)
class QutritSystem:
    """Anharmonic oscillator truncated to three levels."""

    anharmonicity: float = -TWO_PI * 250e6

    @property
    def lowering(self) -> np.ndarray:
        return LOWERING

    @property
    def drift(self) -> np.ndarray:
        a, ad = LOWERING, LOWERING.conj().T
        return 0.5 * self.anharmonicity * ad @ ad @ a @ a

    @property
    def dephasing(self) -> np.ndarray:
        return QUTRIT_DEPHASING


@dataclass(frozen=True)
class DragConfig:
    """Pulse and noise parameters (angular units, seconds).

    ``amplitude = None`` means "calibrate": the peak is set by a 1-D sweep
    maximizing the ``|0> -> |1>`` transfer. The default DRAG weight of 0.5
    is the Half-DRAG choice.
    """

    anharmonicity: float = -TWO_PI * 250e6
    duration: float = 20e-9
    width: float = None
    segments: int = 200
    amplitude: float = None
    drag_weight: float = 0.5
    detuning_weight: float = 0.0
    # noise magnitudes: rms of each channel's realization
    phase_rms: float = 0.1
    detuning_rms: float = TWO_PI * 2e6
    dephasing_rms: float = TWO_PI * 2e6
    noise_corner: float = TWO_PI * 20e6
    noise_bandwidth: float = TWO_PI * 500e6
    noise_resolution: float = TWO_PI * 10e6

    @property
    def sigma(self) -> float:
        return self.width if self.width is not None else self.duration / 6

    def to_dict(self) -> dict:
        return asdict(self)


def drag_waveforms(config: DragConfig, amplitude: float = None):
    """Segment values ``(I, Q, Delta)`` and the segmentation."""
    amplitude = config.amplitude if amplitude is None else amplitude
    if amplitude is None:
        raise ValueError("amplitude is not set; calibrate first")
    if not config.sigma > 0:
        raise ValueError("pulse width must be positive")
    seg = Segmentation.uniform(config.segments, config.duration)
    t = seg.midpoints - config.duration / 2
    s = config.sigma
    edge = np.exp(-(config.duration / 2) ** 2 / (2 * s ** 2))
    shape = (np.exp(-t ** 2 / (2 * s ** 2)) - edge) / (1 - edge)
    slope = -t / s ** 2 * np.exp(-t ** 2 / (2 * s ** 2)) / (1 - edge)
    eta = config.anharmonicity
    I = amplitude * shape
    Q = config.drag_weight * amplitude * slope / eta
    delta = config.detuning_weight * I ** 2 / eta
    return I, Q, delta, seg


def _control(config: DragConfig, amplitude: float) -> ControlSolution:
    I, Q, delta, seg = drag_waveforms(config, amplitude)
    system = QutritSystem(config.anharmonicity)
    return ControlSolution(
        [DriveTerm(PwcScalar(I + 1j * Q, seg), system.lowering)],
        [ShiftTerm(PwcScalar(delta, seg), NUMBER)],
        drift=system.drift,
        duration=config.duration,
    )


def transfer_populations(ctrl: ControlSolution, initial: int = 0) -> np.ndarray:
    """Final populations starting from basis state ``initial`` without noise."""
    H, seg = ctrl.hamiltonian()
    psi = final_unitary(H, seg) @ basis_state(initial, ctrl.dimension)
    return np.abs(psi) ** 2


def calibrate_amplitude(config: DragConfig) -> float:
    """Peak amplitude maximizing ``P_1`` after the pulse (1-D sweep plus refinement).

    The sweep brackets the amplitude whose in-phase area gives a pi rotation
    on the qubit transition, ``int I dt = pi / 2``.
    """
    I_unit, _, _, seg = drag_waveforms(config, 1.0)
    nominal = (np.pi / 2) / float(np.sum(I_unit * seg.durations))

    def loss(scale):
        return 1.0 - transfer_populations(_control(config, scale * nominal))[1]

    grid = np.linspace(0.7, 1.3, 25)
    values = [loss(s) for s in grid]
    k = int(np.argmin(values))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(loss, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    return float(res.x * nominal)


def drag_noise_channels(config: DragConfig):
    """Drive-phase, detuning and additive dephasing channels.

    Each channel has a ``1/f``-like spectrum with a corner at
    ``noise_corner``, scaled so that its realizations have the configured
    rms value. Channel order: phase, detuning, dephasing.
    """
    count = int(round(config.noise_bandwidth / config.noise_resolution)) + 1
    shape = psd_from_function(lambda w: 1.0 / (1.0 + w / config.noise_corner),
                              config.noise_resolution * (count - 1), count)
    unit = shape.scaled(1.0 / shape.power())
    return [
        NoiseChannel("drive-phase", index=0, psd=unit.scaled(config.phase_rms ** 2), label="phase"),
        NoiseChannel("shift", index=0, psd=unit.scaled(config.detuning_rms ** 2), label="detuning"),
        NoiseChannel("additive", operator=QUTRIT_DEPHASING, psd=unit.scaled(config.dephasing_rms ** 2),
                     label="dephasing"),
    ]


def drag_qutrit(config: DragConfig = None, noise: bool = True, **overrides):
    """Calibrated DRAG X_pi on the qutrit.

    Returns
    -------
    ctrl : ControlSolution
        One drive on ``a`` and one shift on ``a^dag a``.
    channels : list of NoiseChannel
        Empty when ``noise`` is false.
    config : DragConfig
        With the calibrated amplitude filled in.
    """
    config = config or DragConfig()
    if overrides:
        config = replace(config, **overrides)
    if config.amplitude is None:
        config = replace(config, amplitude=calibrate_amplitude(config))
    ctrl = _control(config, config.amplitude)
    return ctrl, (drag_noise_channels(config) if noise else []), config
