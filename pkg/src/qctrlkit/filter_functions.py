"""Leading-order filter functions of PWC controls.

The noise operator is moved into the control frame, ``N~(t) = U(t)^dag N U(t)``,
made traceless on the target subspace and Fourier transformed:

    G(omega) = int_0^tau N~'(t) exp(i omega t) dt
    F(omega) = (1 / Tr P) sum_l p_l sum_q |G_lq(omega)|^2

The leading-order ensemble infidelity for a one-sided PSD ``S1`` is
``(1 / 2pi) int_0^inf F(omega) S1(omega) d omega``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .control import ControlSolution, Projector, _projector, assemble_hamiltonian, matrix_exp_unitary
from .noise import OneSidedPsd
from .pwc import Segmentation, segment_index

__all__ = [
    "TogglingFrameSeries",
    "FilterFunctionResult",
    "default_sample_count",
    "toggling_frame",
    "dtft",
    "filter_function",
    "robust_infidelity_ff",
]


@dataclass(frozen=True)
class TogglingFrameSeries:
    """Traceless control-frame noise operator sampled at ``t_i = i dt``.

    Attributes
    ----------
    samples : ndarray, shape (m, D, D)
    dt : float
        ``tau / (m - 1)``.
    projector : Projector
    """

    samples: np.ndarray
    dt: float
    projector: Projector

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.shape[0]) * self.dt

    @property
    def duration(self) -> float:
        return (self.samples.shape[0] - 1) * self.dt


@dataclass(frozen=True)
class FilterFunctionResult:
    """Filter function values on an angular-frequency grid."""

    frequencies: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if f.shape != v.shape:
            raise ValueError("frequencies and values differ in shape")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "values", v)


def default_sample_count(segment_count: int) -> int:
    return max(1000, 10 * int(segment_count))


def _hamiltonian(ctrl):
    if isinstance(ctrl, ControlSolution):
        return assemble_hamiltonian(ctrl.on_joint_grid())
    H, seg = ctrl
    if not isinstance(seg, Segmentation):
        seg = Segmentation(seg)
    return np.asarray(H, dtype=complex), seg


def toggling_frame(ctrl, noise_operator, projector=None, m: int | None = None,
                   frame: str = "stepped") -> TogglingFrameSeries:
    """Sample the traceless control-frame noise operator.

    Parameters
    ----------
    ctrl : ControlSolution or (hamiltonians, Segmentation)
    noise_operator : array_like or (matrices, Segmentation)
        Constant operator or PWC operator series.
    projector : Projector, optional
        Defaults to the full space.
    m : int, optional
        Number of samples, at least 2. Defaults to
        ``max(1000, 10 * segment_count)``.
    frame : {"stepped", "exact"}
        ``"stepped"`` advances the propagator by ``exp(-i H(t_i) dt)`` between
        samples, as described below. ``"exact"`` evaluates ``U(t_i)`` with
        partial segment exponentials, which removes the O(dt) error at
        segment boundaries that do not fall on the sample grid.

    Notes
    -----
    At step ``i`` the operator is conjugated by the propagator accumulated
    through step ``i - 1`` and only then is the propagator advanced by
    ``exp(-i H(t_i) dt)``, so sample ``i`` sees the evolution up to
    ``t_i``.
    """
    H, seg = _hamiltonian(ctrl)
    D = H.shape[-1]
    m = default_sample_count(seg.count) if m is None else int(m)
    if m < 2:
        raise ValueError("at least two samples are required")
    P = _projector(projector, D)
    tau = seg.duration
    dt = tau / (m - 1)
    t = np.arange(m) * dt

    if isinstance(noise_operator, tuple):
        mats, nseg = noise_operator
        if not isinstance(nseg, Segmentation):
            nseg = Segmentation(nseg)
        mats = np.asarray(mats, dtype=complex)
        N_t = mats[segment_index(nseg, t)]
    else:
        N = np.asarray(noise_operator, dtype=complex)
        if N.shape != (D, D):
            raise ValueError(f"noise operator shape {N.shape} does not match dimension {D}")
        N_t = np.broadcast_to(N, (m, D, D))

    if frame == "exact":
        from .simulator import unitary_evolution

        U_t = unitary_evolution(H, seg, t)
        out = np.conj(np.swapaxes(U_t, -1, -2)) @ N_t @ U_t
    elif frame == "stepped":
        idx = segment_index(seg, t)
        # one step propagator per segment; samples in the same segment reuse it
        steps = matrix_exp_unitary(H, np.full(seg.count, dt))
        U = np.eye(D, dtype=complex)
        out = np.empty((m, D, D), dtype=complex)
        for i in range(m):
            out[i] = U.conj().T @ N_t[i] @ U
            U = steps[idx[i]] @ U
    else:
        raise ValueError(f"unknown frame {frame!r}")
    tr = np.einsum("l,ill->i", P.diagonal, out) / P.trace
    out -= tr[:, None, None] * np.eye(D)
    return TogglingFrameSeries(out, dt, P)


def _weights(m, dt, quadrature):
    w = np.full(m, dt)
    if quadrature == "trapezoid":
        w[0] = w[-1] = dt / 2
    elif quadrature != "riemann":
        raise ValueError(f"unknown quadrature {quadrature!r}")
    return w


def dtft(series: TogglingFrameSeries, frequencies, quadrature: str = "trapezoid") -> np.ndarray:
    """Discrete-time Fourier transform ``G(omega) = sum_i w_i N~'_i exp(i omega t_i)``.

    Parameters
    ----------
    series : TogglingFrameSeries
    frequencies : array_like
        Angular frequencies.
    quadrature : {"trapezoid", "riemann"}
        Trapezoid weights halve both endpoints; ``"riemann"`` uses ``dt``
        everywhere. Both converge at rate O(dt) or better; the trapezoid
        rule is exact for constant integrands.

    Returns
    -------
    ndarray, shape (len(frequencies), D, D)
    """
    freqs = np.atleast_1d(np.asarray(frequencies, dtype=float))
    if not np.all(np.isfinite(freqs)):
        raise ValueError("frequencies must be finite")
    samples = series.samples
    m, D, _ = samples.shape
    w = _weights(m, series.dt, quadrature)
    phase = np.exp(1j * np.outer(freqs, series.times)) * w
    return (phase @ samples.reshape(m, D * D)).reshape(freqs.size, D, D)


def _ff_values(G, P: Projector):
    return np.einsum("l,flq->f", P.diagonal, np.abs(G) ** 2) / P.trace


def filter_function(ctrl, noise_operator, projector=None, frequencies=None, m: int | None = None,
                    quadrature: str = "trapezoid", frame: str = "stepped",
                    label: str = "") -> FilterFunctionResult:
    """Filter function ``F(omega)`` of one noise channel.

    Parameters
    ----------
    ctrl : ControlSolution or (hamiltonians, Segmentation)
    noise_operator : array_like or (matrices, Segmentation)
    projector : Projector, optional
    frequencies : array_like
        Angular frequencies (rad/s).
    m : int, optional
        Time samples; see :func:`toggling_frame`.
    quadrature : {"trapezoid", "riemann"}
    frame : {"stepped", "exact"}
        See :func:`toggling_frame`.

    Returns
    -------
    FilterFunctionResult
    """
    if frequencies is None:
        raise ValueError("frequencies are required")
    series = toggling_frame(ctrl, noise_operator, projector, m, frame)
    G = dtft(series, frequencies, quadrature)
    values = np.maximum(_ff_values(G, series.projector), 0.0)
    return FilterFunctionResult(np.atleast_1d(np.asarray(frequencies, float)), values, label)


def _psd_on_grid(psd, omega):
    if isinstance(psd, OneSidedPsd):
        if omega.max() > psd.max_frequency * (1 + 1e-9) or omega.min() < 0:
            raise ValueError("filter-function grid extends beyond the PSD range")
        return psd(omega)
    if callable(psd):
        return np.asarray(psd(omega), dtype=float)
    values = np.asarray(psd, dtype=float)
    if values.shape != omega.shape:
        raise ValueError("sampled PSD must be aligned with the filter-function grid")
    return values


def robust_infidelity_ff(filter_functions, psds) -> float:
    """Leading-order ensemble infidelity ``sum_k (1/2pi) int F_k S_k d omega``.

    Parameters
    ----------
    filter_functions : FilterFunctionResult or sequence of them
        Filter functions on non-negative grids.
    psds : OneSidedPsd, callable or array, or a sequence of them
        One-sided PSDs, one per channel. Arrays must be sampled on the
        filter-function grid; ``OneSidedPsd`` inputs are interpolated.

    Notes
    -----
    The one-sided PSD already carries the power of negative frequencies, so
    for even filter functions the integral over the real line reduces to
    the integral of ``F * S1`` over ``[0, inf)``.
    """
    if isinstance(filter_functions, FilterFunctionResult):
        filter_functions, psds = [filter_functions], [psds]
    if len(filter_functions) != len(psds):
        raise ValueError("one PSD per filter function is required")
    total = 0.0
    for ff, psd in zip(filter_functions, psds):
        omega = ff.frequencies
        if omega.size < 2 or np.any(np.diff(omega) <= 0):
            raise ValueError("filter-function grid must be increasing with at least two points")
        total += trapezoid(ff.values * _psd_on_grid(psd, omega), omega) / (2 * np.pi)
    return float(total)
