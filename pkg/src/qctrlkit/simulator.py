"""Noisy time-domain simulation of piecewise-constant Hamiltonians.

Noise enters either multiplicatively, by perturbing a drive modulus, a drive
phase or a shift value, or additively as ``beta(t) N``. Each realization is
resampled onto the joint grid of the control segments and the noise sample
grid before the segment exponentials are multiplied out.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .control import (
    ControlSolution,
    FidelityValue,
    Projector,
    _projector,
    assemble_hamiltonian,
    is_hermitian,
    matrix_exp_unitary,
)
from .noise import NoiseTimeSeries, OneSidedPsd, shannon_interpolate, time_series
from .pwc import JointGrid, PwcScalar, Segmentation, joint_segments, segment_index

__all__ = [
    "NoiseChannel",
    "EnsembleDensityMatrix",
    "SimulationResult",
    "joint_segments",
    "noise_pwc",
    "realize_noisy_hamiltonian",
    "unitary_evolution",
    "final_unitary",
    "propagate_state",
    "ensemble_density",
    "simulate",
    "robust_infidelity_mc",
]

COUPLINGS = ("additive", "drive", "drive-phase", "shift")


@dataclass(frozen=True)
class NoiseChannel:
    """A single stochastic noise source.

    Parameters
    ----------
    coupling : {"additive", "drive", "drive-phase", "shift"}
        ``"additive"`` adds ``beta(t) * operator``. ``"drive"`` adds the noise
        to the modulus of drive ``index``, ``"drive-phase"`` to its phase and
        ``"shift"`` to the value of shift ``index``.
    operator : array_like, optional
        Hermitian noise operator for additive channels, shape (D, D), or a
        PWC operator series given as ``(matrices, Segmentation)``.
    index : int, optional
        Term index for multiplicative channels.
    psd : OneSidedPsd, optional
        Spectrum from which realizations are drawn.
    series : NoiseTimeSeries or PwcScalar, optional
        An explicit realization, used for every trial.
    label : str, optional
    """

    coupling: str
    operator: object = None
    index: int = None
    psd: OneSidedPsd = None
    series: object = None
    label: str = ""

    def __post_init__(self):
        if self.coupling not in COUPLINGS:
            raise ValueError(f"unknown coupling {self.coupling!r}; expected one of {COUPLINGS}")
        if (self.psd is None) == (self.series is None):
            raise ValueError("exactly one of psd or series must be given")
        if self.coupling == "additive":
            if self.operator is None:
                raise ValueError("additive channels need an operator")
            if isinstance(self.operator, tuple):
                mats, seg = self.operator
                mats = np.asarray(mats, dtype=complex)
                if not isinstance(seg, Segmentation):
                    seg = Segmentation(seg)
                if not is_hermitian(mats):
                    raise ValueError("noise operator must be Hermitian")
                object.__setattr__(self, "operator", (mats, seg))
            else:
                op = np.asarray(self.operator, dtype=complex)
                if op.ndim != 2 or op.shape[0] != op.shape[1] or not is_hermitian(op):
                    raise ValueError("noise operator must be a square Hermitian matrix")
                object.__setattr__(self, "operator", op)
        elif self.index is None:
            raise ValueError(f"{self.coupling} channels need a term index")

    def validate(self, ctrl: ControlSolution):
        if self.coupling in ("drive", "drive-phase"):
            if not 0 <= self.index < len(ctrl.drives):
                raise ValueError(f"channel references missing drive {self.index}")
        elif self.coupling == "shift":
            if not 0 <= self.index < len(ctrl.shifts):
                raise ValueError(f"channel references missing shift {self.index}")
        else:
            op = self.operator[0][0] if isinstance(self.operator, tuple) else self.operator
            if op.shape[0] != ctrl.dimension:
                raise ValueError("noise operator dimension does not match the system")


def _native_segmentation(series: NoiseTimeSeries, duration: float) -> Segmentation:
    """Uniform segmentation at the series' own sample spacing."""
    count = max(1, int(np.ceil(duration / series.dt - 1e-9)))
    return Segmentation.uniform(count, duration)


def noise_pwc(channel: NoiseChannel, duration: float, seed=None, channel_index=0,
              trial=0, copies: int | None = None) -> PwcScalar:
    """Draw (or take) a realization and express it as a PWC series on ``[0, duration]``.

    Continuous realizations are sampled by Whittaker-Shannon interpolation at
    the midpoints of segments of the native sample spacing.
    """
    source = channel.series
    if source is None:
        source = time_series(channel.psd, seed, channel_index, trial)
    if isinstance(source, PwcScalar):
        if abs(source.duration - duration) > 1e-9 * duration:
            raise ValueError("explicit noise series duration differs from the control duration")
        return source
    if not isinstance(source, NoiseTimeSeries):
        raise TypeError("noise series must be a NoiseTimeSeries or PwcScalar")
    seg = _native_segmentation(source, duration)
    mids = seg.midpoints
    period = source.period
    values = shannon_interpolate(source, np.mod(mids, period), copies=copies)
    return PwcScalar(values, seg)


def realize_noisy_hamiltonian(ctrl: ControlSolution, channels=(), seed=None, trial: int = 0,
                              copies: int | None = None):
    """Segment Hamiltonians for one noise realization.

    Parameters
    ----------
    ctrl : ControlSolution
    channels : sequence of NoiseChannel
    seed : int
        Base seed; channel ``k`` of trial ``t`` draws from stream ``(seed, k, t)``.
    trial : int

    Returns
    -------
    hamiltonians : ndarray, shape (m, D, D)
    segmentation : Segmentation
    """
    channels = list(channels)
    for ch in channels:
        ch.validate(ctrl)
    if not channels:
        return assemble_hamiltonian(ctrl.on_joint_grid())
    if any(ch.psd is not None for ch in channels) and seed is None:
        raise ValueError("a seed is required for channels defined by a PSD")

    tau = ctrl.duration
    noises = [noise_pwc(ch, tau, seed, k, trial, copies) for k, ch in enumerate(channels)]
    series = list(ctrl.pulses) + noises
    op_channels = [ch for ch in channels if isinstance(ch.operator, tuple)]
    for ch in op_channels:
        mats, seg = ch.operator
        series.append((mats, seg))
    if not ctrl.pulses:
        series.insert(0, (np.zeros(1), Segmentation([tau])))
        offset = 1
    else:
        offset = 0
    grid = joint_segments(*series)
    seg = grid.segmentation
    vals = list(grid.values[offset:])
    nd, ns = len(ctrl.drives), len(ctrl.shifts)
    drives = [np.asarray(v, dtype=complex).copy() for v in vals[:nd]]
    shifts = [np.asarray(v, dtype=float).copy() for v in vals[nd:nd + ns]]
    noise_vals = vals[nd + ns:nd + ns + len(channels)]
    op_vals = iter(vals[nd + ns + len(channels):])

    H = np.broadcast_to(ctrl.drift, (seg.count,) + ctrl.drift.shape).astype(complex)
    additive = []
    for ch, delta in zip(channels, noise_vals):
        delta = np.asarray(delta, dtype=float)
        if ch.coupling == "drive":
            g = drives[ch.index]
            drives[ch.index] = (np.abs(g) + delta) * np.exp(1j * np.angle(g))
        elif ch.coupling == "drive-phase":
            drives[ch.index] = drives[ch.index] * np.exp(1j * delta)
        elif ch.coupling == "shift":
            shifts[ch.index] = shifts[ch.index] + delta
        else:
            op = next(op_vals) if isinstance(ch.operator, tuple) else ch.operator
            additive.append((delta, op))
    for term, g in zip(ctrl.drives, drives):
        part = g[:, None, None] * term.operator
        H = H + part + np.conj(np.swapaxes(part, -1, -2))
    for term, a in zip(ctrl.shifts, shifts):
        H = H + a[:, None, None] * term.operator
    for delta, op in additive:
        H = H + delta[:, None, None] * op
    return H, seg


def _segment_products(H, seg: Segmentation):
    """Segment propagators and cumulative products ``Q_k = U_k ... U_1``."""
    steps = matrix_exp_unitary(H, seg.durations)
    D = H.shape[-1]
    cumulative = np.empty((seg.count + 1, D, D), dtype=complex)
    cumulative[0] = np.eye(D)
    for k in range(seg.count):
        cumulative[k + 1] = steps[k] @ cumulative[k]
    return steps, cumulative


def final_unitary(H, seg: Segmentation) -> np.ndarray:
    """Total propagator ``U(tau, 0)`` of a PWC Hamiltonian."""
    steps = matrix_exp_unitary(H, seg.durations)
    U = np.eye(H.shape[-1], dtype=complex)
    for step in steps:
        U = step @ U
    return U


def unitary_evolution(H, seg: Segmentation, times) -> np.ndarray:
    """Propagators ``U(t, 0)`` at arbitrary times in ``[0, tau]``.

    Within a segment the partial exponential ``exp(-i H_k (t - t_k))`` is
    applied to the product of all completed segments.
    """
    H = np.asarray(H, dtype=complex)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    tau = seg.duration
    if np.any(times < -1e-12 * tau) or np.any(times > tau * (1 + 1e-12)):
        raise ValueError("requested times must lie in [0, duration]")
    times = np.clip(times, 0.0, tau)
    _, cumulative = _segment_products(H, seg)
    idx = segment_index(seg, times)
    b = seg.boundaries
    elapsed = times - b[idx]
    partial = matrix_exp_unitary(H[idx], elapsed, check=False)
    out = partial @ cumulative[idx]
    at_end = np.isclose(times, tau, rtol=1e-14, atol=0)
    out[at_end] = cumulative[-1]
    out[times == 0] = np.eye(H.shape[-1])
    return out


def propagate_state(unitaries, psi0) -> np.ndarray:
    """States ``U_t |psi0>`` for a stack of propagators."""
    psi0 = np.asarray(psi0, dtype=complex).ravel()
    if abs(np.linalg.norm(psi0) - 1) > 1e-9:
        raise ValueError("initial state is not normalized")
    return np.asarray(unitaries) @ psi0


@dataclass(frozen=True)
class EnsembleDensityMatrix:
    """Mean density matrix of an ensemble of pure states."""

    rho: np.ndarray
    trials: int

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.rho)).copy()


def ensemble_density(states) -> EnsembleDensityMatrix:
    """``rho = (1/M) sum_m |psi_m><psi_m|`` from states of shape (M, D)."""
    states = np.asarray(states, dtype=complex)
    if states.ndim == 1:
        states = states[None, :]
    if states.ndim != 2:
        raise ValueError("states must have shape (trials, dimension)")
    rho = np.einsum("mi,mj->ij", states, states.conj()) / states.shape[0]
    return EnsembleDensityMatrix(0.5 * (rho + rho.conj().T), states.shape[0])


@dataclass(frozen=True)
class SimulationResult:
    """Ensemble simulation output.

    Attributes
    ----------
    times : ndarray
    populations : ndarray, shape (len(times), D)
        Ensemble-mean populations at each time.
    final_density : EnsembleDensityMatrix
    states : ndarray or None
        Per-trial states, shape (trials, len(times), D), when requested.
    """

    times: np.ndarray
    populations: np.ndarray
    final_density: EnsembleDensityMatrix
    states: np.ndarray = None


def _map(func, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, items))
    return [func(i) for i in items]


def simulate(ctrl: ControlSolution, psi0, times, channels=(), seed=None, trials: int = 1,
             keep_states: bool = False, workers: int | None = None) -> SimulationResult:
    """Propagate ``psi0`` under ``trials`` noise realizations.

    Without channels a single noise-free trajectory is computed regardless
    of ``trials``.
    """
    channels = list(channels)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if not channels:
        trials = 1

    def run(trial):
        H, seg = realize_noisy_hamiltonian(ctrl, channels, seed, trial)
        return propagate_state(unitary_evolution(H, seg, times), psi0)

    states = np.array(_map(run, range(trials), workers))
    populations = np.mean(np.abs(states) ** 2, axis=0)
    final = ensemble_density(states[:, -1, :])
    return SimulationResult(times, populations, final, states if keep_states else None)


def robust_infidelity_mc(ctrl: ControlSolution, channels, P=None, trials: int = 100,
                         seed: int = 0, workers: int | None = None,
                         copies: int | None = None) -> FidelityValue:
    """Monte Carlo ensemble infidelity ``1 - <|Tr(P U_noise) / Tr P|^2>``.

    ``U_noise = U_total U_ctrl^dagger`` isolates the effect of the noise for
    each realization.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    H0, seg0 = assemble_hamiltonian(ctrl.on_joint_grid())
    U_ctrl = final_unitary(H0, seg0)
    P = _projector(P, ctrl.dimension)

    def one(trial):
        H, seg = realize_noisy_hamiltonian(ctrl, channels, seed, trial, copies=copies)
        U_noise = final_unitary(H, seg) @ U_ctrl.conj().T
        overlap = np.sum(P.diagonal * np.diag(U_noise)) / P.trace
        return 1.0 - abs(overlap) ** 2

    values = np.array(_map(one, range(trials), workers))
    stderr = float(values.std(ddof=1) / np.sqrt(trials)) if trials > 1 else None
    return FidelityValue(float(values.mean()), "robust", stderr, trials)
