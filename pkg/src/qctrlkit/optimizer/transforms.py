"""Linear pulse transforms used to build optimizable waveforms.

Every transform here is linear in its input values, so each is expressed as
a constant matrix acting on the value vector. The same matrices serve the
numpy functions below and the differentiable graph nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.special import sici

from ..pwc import PwcScalar, Segmentation

__all__ = [
    "Kernel",
    "SincKernel",
    "RCKernel",
    "DeltaKernel",
    "SampledKernel",
    "kernel_from_dict",
    "pwc_scalar",
    "filter_matrix",
    "lti_filter",
    "fourier_basis",
    "crab_matrix",
    "crab_waveform",
    "symmetrize_indices",
    "symmetrize",
    "interleave_mask",
]


class Kernel:
    """Impulse response of a linear time-invariant filter.

    Subclasses provide the step response ``A(x) = int_{-inf}^x K(s) ds``,
    which is all that is needed to filter PWC input exactly.
    """

    def step_response(self, x):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class SincKernel(Kernel):
    """Ideal low pass ``K(t) = sin(w_c t) / (pi t)`` with cutoff ``w_c`` (rad/s)."""

    cutoff: float

    def __post_init__(self):
        if not self.cutoff > 0:
            raise ValueError("cutoff must be positive")

    def step_response(self, x):
        si, _ = sici(self.cutoff * np.asarray(x, dtype=float))
        return 0.5 + si / np.pi

    def to_dict(self):
        return {"type": "sinc", "cutoff": self.cutoff}


@dataclass(frozen=True)
class RCKernel(Kernel):
    """First-order low pass ``K(t) = exp(-t / RC) / RC`` for ``t >= 0``."""

    time_constant: float

    def __post_init__(self):
        if not self.time_constant > 0:
            raise ValueError("time constant must be positive")

    @classmethod
    def from_cutoff(cls, cutoff: float) -> "RCKernel":
        return cls(1.0 / cutoff)

    def step_response(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, -np.expm1(-np.maximum(x, 0) / self.time_constant), 0.0)

    def to_dict(self):
        return {"type": "rc", "time_constant": self.time_constant}


@dataclass(frozen=True)
class DeltaKernel(Kernel):
    """Identity filter."""

    def step_response(self, x):
        return (np.asarray(x, dtype=float) >= 0).astype(float)

    def to_dict(self):
        return {"type": "delta"}


class SampledKernel(Kernel):
    """User-supplied kernel samples, normalized to unit DC gain.

    Parameters
    ----------
    times : array_like
        Increasing sample times (may include negative times).
    values : array_like
        Kernel values; zero outside the sampled range.
    """

    def __init__(self, times, values):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise ValueError("kernel times and values must be equal-length 1-D arrays")
        if np.any(np.diff(times) <= 0):
            raise ValueError("kernel times must be increasing")
        cum = cumulative_trapezoid(values, times, initial=0.0)
        total = cum[-1]
        if not np.isfinite(total) or abs(total) < 1e-300:
            raise ValueError("kernel is not normalizable (zero or non-finite integral)")
        self.times = times
        self.values = values
        self._cum = cum / total

    def step_response(self, x):
        return np.interp(np.asarray(x, dtype=float), self.times, self._cum, left=0.0, right=1.0)

    def to_dict(self):
        return {"type": "samples", "times": self.times.tolist(), "values": self.values.tolist()}


def kernel_from_dict(spec: dict) -> Kernel:
    kind = spec.get("type")
    if kind == "sinc":
        return SincKernel(float(spec["cutoff"]))
    if kind == "rc":
        if "time_constant" in spec:
            return RCKernel(float(spec["time_constant"]))
        return RCKernel.from_cutoff(float(spec["cutoff"]))
    if kind == "delta":
        return DeltaKernel()
    if kind == "samples":
        return SampledKernel(spec["times"], spec["values"])
    raise ValueError(f"unknown kernel type {kind!r}")


def pwc_scalar(values, duration: float) -> PwcScalar:
    """Uniformly segmented PWC function of ``duration`` taking ``values``."""
    values = np.atleast_1d(np.asarray(values))
    if values.size == 0:
        raise ValueError("at least one value is required")
    return PwcScalar(values, Segmentation.uniform(values.size, duration))


def filter_matrix(kernel: Kernel, input_segmentation: Segmentation, segments: int,
                  extend: str = "zero") -> np.ndarray:
    """Matrix mapping input PWC values to filtered values at output midpoints.

    Parameters
    ----------
    kernel : Kernel
    input_segmentation : Segmentation
    segments : int
        Number of uniform output segments over the same duration.
    extend : {"zero", "hold"}
        Input outside ``[0, tau]`` is zero, or holds the first and last
        values indefinitely.
    """
    if segments < 1:
        raise ValueError("output segment count must be at least 1")
    tau = input_segmentation.duration
    out = Segmentation.uniform(segments, tau).midpoints
    b = input_segmentation.boundaries
    A = kernel.step_response(out[:, None] - b[None, :])
    M = A[:, :-1] - A[:, 1:]
    if extend == "hold":
        M[:, 0] += 1.0 - A[:, 0]
        M[:, -1] += A[:, -1]
    elif extend != "zero":
        raise ValueError(f"unknown extension {extend!r}")
    return M


def lti_filter(pulse: PwcScalar, kernel: Kernel, segments: int, extend: str = "zero") -> PwcScalar:
    """Convolve a PWC pulse with ``kernel`` and re-discretize on ``segments`` segments.

    The convolution of a PWC input is evaluated exactly from the kernel's
    step response and sampled at the output segment midpoints.
    """
    M = filter_matrix(kernel, pulse.segmentation, segments, extend)
    return PwcScalar(M @ pulse.values, Segmentation.uniform(segments, pulse.duration))


def fourier_basis(frequencies):
    """Cosine and sine functions at each angular frequency, interleaved."""
    funcs = []
    for w in np.atleast_1d(np.asarray(frequencies, dtype=float)):
        funcs.append(lambda t, w=w: np.cos(w * t))
        funcs.append(lambda t, w=w: np.sin(w * t))
    return funcs


def crab_matrix(basis, duration: float, segments: int) -> np.ndarray:
    """Basis functions sampled at the midpoints of ``segments`` uniform segments.

    Parameters
    ----------
    basis : sequence of callables or dict
        Callables ``f(t)``; a dict ``{"type": "fourier", "frequencies": [...]}``
        selects the Fourier basis.
    """
    if isinstance(basis, dict):
        if basis.get("type") != "fourier":
            raise ValueError("only the Fourier basis can be declared by name")
        basis = fourier_basis(basis["frequencies"])
    t = Segmentation.uniform(segments, duration).midpoints
    return np.stack([np.asarray(f(t), dtype=float) * np.ones_like(t) for f in basis], axis=1)


def crab_waveform(coefficients, basis, duration: float, segments: int) -> PwcScalar:
    """Superposition ``sum_b c_b f_b(t)`` sampled on ``segments`` segments."""
    coefficients = np.atleast_1d(np.asarray(coefficients, dtype=float))
    M = crab_matrix(basis, duration, segments)
    if M.shape[1] != coefficients.size:
        raise ValueError(f"{coefficients.size} coefficients for {M.shape[1]} basis functions")
    return PwcScalar(M @ coefficients, Segmentation.uniform(segments, duration))


def symmetrize_indices(count: int, odd: bool = False) -> np.ndarray:
    """Index map producing the mirrored sequence of ``count`` free values.

    ``odd=False`` gives ``2 * count`` entries ``[0..n-1, n-1..0]``;
    ``odd=True`` shares the central value, giving ``2 * count - 1`` entries.
    """
    idx = np.arange(count)
    mirror = idx[::-1][1:] if odd else idx[::-1]
    return np.concatenate([idx, mirror])


def symmetrize(pulse, odd: bool = False):
    """Mirror the first half of a pulse onto the second half.

    Accepts a :class:`PwcScalar` (durations are mirrored as well) or a
    plain value array.
    """
    if isinstance(pulse, PwcScalar):
        idx = symmetrize_indices(pulse.values.size, odd)
        return PwcScalar(pulse.values[idx], Segmentation(pulse.durations[idx]))
    values = np.asarray(pulse)
    return values[symmetrize_indices(values.shape[0], odd)]


def interleave_mask(v, mask):
    """Elementwise product ``v * b`` with a binary mask ``b``."""
    v = np.asarray(v)
    mask = np.asarray(mask)
    if mask.shape != v.shape:
        raise ValueError("mask length does not match the variables")
    if not np.all((mask == 0) | (mask == 1)):
        raise ValueError("mask entries must be 0 or 1")
    return v * mask
