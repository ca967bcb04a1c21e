"""Synthesis of stationary noise realizations from one-sided power spectra.

A one-sided PSD ``S1`` sampled at ``omega_k = k * d_omega`` (k = 0..N-1) is
symmetrized into the two-sided sequence of length ``L = 2N - 1``, given
uniformly random phases with Hermitian symmetry and inverse transformed into
a real series. The series has time step ``dt = 2 pi / (L d_omega)`` and
period ``T = 2 pi / d_omega``.

Normalization: ``x_j = sqrt(d_omega / 2 pi) * sum_k X_k exp(2 pi i jk / L)``,
which gives ``<x_j^2> = (1/2pi) sum_k S1_k d_omega``. This is the zero-lag
Wiener-Khinchin integral evaluated on the sample grid. Because the
amplitudes ``|X_k|`` are deterministic and only the phases are random, the
periodogram of every single realization reproduces the input spectrum
exactly; ensemble averaging is only needed for the time-domain statistics.

All frequencies are angular (rad/s) and PSD values are per rad/s.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "OneSidedPsd",
    "NoiseTimeSeries",
    "rng_for",
    "two_sided",
    "random_spectrum",
    "time_series",
    "shannon_interpolate",
    "periodogram",
    "psd_from_function",
]


def rng_for(seed, *keys) -> np.random.Generator:
    """Independent generator keyed by ``(seed, *keys)``.

    Keys are typically ``(channel_index, trial_index)``; streams for
    different keys are statistically independent and do not depend on the
    order in which they are requested.
    """
    if seed is None:
        raise ValueError("an explicit seed is required")
    entropy = [int(seed)] + [int(k) for k in keys]
    if any(e < 0 for e in entropy):
        raise ValueError("seed and keys must be non-negative integers")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


@dataclass(frozen=True)
class OneSidedPsd:
    """One-sided power spectral density on a uniform angular-frequency grid.

    Parameters
    ----------
    samples : array_like
        ``S1(k * resolution)`` for ``k = 0..N-1``; non-negative.
    resolution : float
        Grid spacing in rad/s.
    """

    samples: np.ndarray
    resolution: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).ravel()
        if s.size < 2:
            raise ValueError("a PSD needs at least two samples")
        if not np.all(np.isfinite(s)) or np.any(s < 0):
            raise ValueError("PSD samples must be finite and non-negative")
        if not self.resolution > 0:
            raise ValueError("frequency resolution must be positive")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "resolution", float(self.resolution))

    @property
    def size(self) -> int:
        return self.samples.size

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.size) * self.resolution

    @property
    def max_frequency(self) -> float:
        return (self.size - 1) * self.resolution

    def power(self) -> float:
        """Variance ``(1/2pi) sum_k S1_k d_omega`` of the synthesized series."""
        return float(np.sum(self.samples) * self.resolution / (2 * np.pi))

    def __call__(self, omega):
        """Linear interpolation of the spectrum, zero outside the grid."""
        omega = np.abs(np.asarray(omega, dtype=float))
        return np.interp(omega, self.frequencies, self.samples, right=0.0)

    def scaled(self, factor: float) -> "OneSidedPsd":
        return OneSidedPsd(self.samples * factor, self.resolution)


def psd_from_function(func, max_frequency: float, count: int) -> OneSidedPsd:
    """Sample ``func(omega)`` on ``count`` points spanning ``[0, max_frequency]``."""
    omega = np.linspace(0.0, max_frequency, count)
    return OneSidedPsd(np.asarray(func(omega), dtype=float), omega[1] - omega[0])


@dataclass(frozen=True)
class NoiseTimeSeries:
    """Real noise samples ``x_j`` at times ``j * dt``.

    The series is treated as one period of a periodic signal with period
    ``len(samples) * dt``.
    """

    samples: np.ndarray
    dt: float
    seed: tuple = None

    def __post_init__(self):
        x = np.asarray(self.samples)
        if np.iscomplexobj(x):
            raise ValueError("noise samples must be real")
        x = np.asarray(x, dtype=float).ravel()
        if x.size == 0:
            raise ValueError("empty series")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def size(self) -> int:
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.size) * self.dt

    @property
    def period(self) -> float:
        return self.size * self.dt

    def __call__(self, times, copies: int | None = 3):
        return shannon_interpolate(self, times, copies=copies)


def two_sided(psd: OneSidedPsd) -> np.ndarray:
    """Symmetrized two-sided spectrum of length ``2N - 1``.

    ``S2_0 = S1_0``, ``S2_k = S1_k / 2`` for ``1 <= k <= N-1`` and the upper
    half mirrors the lower one.
    """
    s1 = psd.samples
    half = s1[1:] / 2.0
    return np.concatenate([[s1[0]], half, half[::-1]])


def random_spectrum(psd: OneSidedPsd, seed, channel: int = 0, trial: int = 0) -> np.ndarray:
    """Complex amplitudes ``X_k = exp(i phi_k) sqrt(S2_k)`` with Hermitian symmetry.

    ``phi_0 = 0`` and ``phi_k`` is uniform on (-pi, pi) for ``1 <= k <= N-1``;
    the upper half is the complex conjugate mirror.
    """
    rng = seed if isinstance(seed, np.random.Generator) else rng_for(seed, channel, trial)
    n = psd.size
    phases = rng.uniform(-np.pi, np.pi, size=n - 1)
    amp = np.sqrt(two_sided(psd))
    lower = amp[1:n] * np.exp(1j * phases)
    return np.concatenate([[amp[0] + 0j], lower, np.conj(lower[::-1])])


def time_series(psd: OneSidedPsd, seed, channel: int = 0, trial: int = 0) -> NoiseTimeSeries:
    """One real noise realization with the statistics of ``psd``.

    Parameters
    ----------
    psd : OneSidedPsd
    seed : int or numpy.random.Generator
        Integer seeds are combined with ``channel`` and ``trial`` through
        :func:`rng_for`.
    channel, trial : int
        Stream keys for ensemble generation.

    Returns
    -------
    NoiseTimeSeries
        ``2N - 1`` samples with ``dt = 2 pi / ((2N - 1) d_omega)``.
    """
    X = random_spectrum(psd, seed, channel, trial)
    L = X.size
    x = np.fft.ifft(X) * L * np.sqrt(psd.resolution / (2 * np.pi))
    scale = np.max(np.abs(x), initial=0.0)
    if scale > 0 and np.max(np.abs(x.imag)) > 1e-9 * scale:
        raise RuntimeError("synthesized series has a significant imaginary part")
    dt = 2 * np.pi / (L * psd.resolution)
    provenance = None if isinstance(seed, np.random.Generator) else (int(seed), channel, trial)
    return NoiseTimeSeries(x.real, dt, provenance)


def shannon_interpolate(series: NoiseTimeSeries, times, copies: int | None = 3, chunk: int = 2048):
    """Whittaker-Shannon interpolation of a periodic series.

    Parameters
    ----------
    series : NoiseTimeSeries
    times : array_like
        Sample times in ``[0, L dt]``.
    copies : int or None
        Number of periodic copies of the series added on each side of the
        base period before truncating the sinc sum. ``None`` evaluates the
        infinite periodic sum exactly through the Dirichlet kernel.
    chunk : int
        Number of times evaluated per block, bounding memory use.

    Returns
    -------
    ndarray
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    x = series.samples
    L = x.size
    dt = series.dt
    span = L * dt
    if np.any(times < -1e-12 * span) or np.any(times > span * (1 + 1e-12)):
        raise ValueError("interpolation times must lie within one period [0, L*dt]")
    u_all = times / dt
    out = np.empty_like(u_all)
    if copies is None:
        k = np.arange(L)
        for start in range(0, u_all.size, chunk):
            u = u_all[start:start + chunk, None] - k[None, :]
            out[start:start + chunk] = _periodic_sinc(u, L) @ x
        return out
    copies = int(copies)
    k = np.arange(-copies * L, (copies + 1) * L)
    xk = x[k % L]
    for start in range(0, u_all.size, chunk):
        u = u_all[start:start + chunk, None] - k[None, :]
        out[start:start + chunk] = np.sinc(u) @ xk
    return out


def _periodic_sinc(u, L):
    """Sum of ``sinc(u + nL)`` over all integers ``n``."""
    u = np.asarray(u, dtype=float)
    num = np.sin(np.pi * u)
    den = np.sin(np.pi * u / L)
    with np.errstate(invalid="ignore", divide="ignore"):
        if L % 2:
            val = num / (L * den)
        else:
            val = num * np.cos(np.pi * u / L) / (L * den)
    near = np.abs(den) < 1e-12
    if np.any(near):
        m = np.round(u[near] / L)
        sign = (-1.0) ** (m * (L - 1)) if L % 2 else (-1.0) ** (m * L)
        val[near] = sign
    return val


def periodogram(series: NoiseTimeSeries) -> OneSidedPsd:
    """One-sided periodogram ``|dt * DFT(x)|^2 / T`` folded onto ``k >= 0``.

    The resolution is ``2 pi / T`` with ``T = L dt``. Bins ``k >= 1`` are
    doubled (the Nyquist bin of an even-length series is not). With this
    definition ``(1/2pi) sum_k S1_k d_omega`` equals the mean square of the
    series (Parseval).
    """
    x = series.samples
    L = x.size
    if L < 2:
        raise ValueError("periodogram needs at least two samples")
    T = L * series.dt
    X = series.dt * np.fft.fft(x)
    s2 = np.abs(X) ** 2 / T
    n = L // 2 + 1
    s1 = s2[:n].copy()
    if L % 2:
        s1[1:] *= 2
    else:
        s1[1:-1] *= 2
    return OneSidedPsd(s1, 2 * np.pi / T)
