"""Noise spectroscopy: reconstruct PSDs from measured infidelities.

Each measured infidelity is modelled as a trapezoid quadrature of filter
function times PSD, ``I_j = sum_k (1/2pi) int F_k^j S_k d omega``, which
stacks into the linear system ``F_hat S = I``. Two inversions are offered:
a truncated SVD pseudoinverse and a non-negative regularized least-squares
fit with an L-curve choice of the regularization strength.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .filter_functions import filter_function
from .optimizer.minimize import StopCriteria, minimize

__all__ = [
    "FrequencyPartition",
    "SensitivityMatrix",
    "MeasurementRecord",
    "ReconstructedPsd",
    "HyperparameterChoice",
    "build_sensitivity",
    "sensitivity_from_filters",
    "difference_matrix",
    "reconstruct_svd",
    "reconstruct_co",
    "find_hyperparameter",
    "splice",
]


@dataclass(frozen=True)
class FrequencyPartition:
    """Uniform frequency samples for each noise channel.

    Parameters
    ----------
    bands : sequence of (omega_min, omega_max, count)
        One entry per channel, angular frequencies in rad/s.
    """

    bands: tuple

    def __post_init__(self):
        bands = []
        for lo, hi, count in self.bands:
            lo, hi, count = float(lo), float(hi), int(count)
            if count < 2:
                raise ValueError("each channel needs at least two frequency samples")
            if not 0 <= lo < hi:
                raise ValueError("frequency bands must satisfy 0 <= omega_min < omega_max")
            bands.append((lo, hi, count))
        if not bands:
            raise ValueError("at least one channel is required")
        object.__setattr__(self, "bands", tuple(bands))

    @classmethod
    def single(cls, omega_min, omega_max, count) -> "FrequencyPartition":
        return cls(((omega_min, omega_max, count),))

    @property
    def channels(self) -> int:
        return len(self.bands)

    @property
    def counts(self):
        return [b[2] for b in self.bands]

    @property
    def size(self) -> int:
        return sum(self.counts)

    def frequencies(self, channel: int = None):
        """Sample frequencies of one channel, or of all channels concatenated."""
        if channel is None:
            return np.concatenate([np.linspace(lo, hi, n) for lo, hi, n in self.bands])
        lo, hi, n = self.bands[channel]
        return np.linspace(lo, hi, n)

    def resolution(self, channel: int) -> float:
        lo, hi, n = self.bands[channel]
        return (hi - lo) / (n - 1)

    def slices(self):
        edges = np.concatenate([[0], np.cumsum(self.counts)])
        return [slice(a, b) for a, b in zip(edges[:-1], edges[1:])]

    def to_dict(self):
        return {"bands": [list(b) for b in self.bands]}


@dataclass(frozen=True)
class SensitivityMatrix:
    """Quadrature-weighted filter-function matrix ``F_hat`` (rows: controls)."""

    matrix: np.ndarray
    partition: FrequencyPartition
    labels: tuple = ()

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=float)
        if M.ndim != 2 or M.shape[1] != self.partition.size:
            raise ValueError("sensitivity matrix columns must match the partition size")
        object.__setattr__(self, "matrix", M)

    @property
    def shape(self):
        return self.matrix.shape


@dataclass(frozen=True)
class MeasurementRecord:
    """Measured infidelities with their uncertainties."""

    infidelities: np.ndarray
    uncertainties: np.ndarray = None

    def __post_init__(self):
        I = np.asarray(self.infidelities, dtype=float).ravel()
        dI = np.zeros_like(I) if self.uncertainties is None else np.asarray(self.uncertainties, float).ravel()
        if dI.shape != I.shape:
            raise ValueError("uncertainties must match the infidelities")
        if np.any(dI < 0):
            raise ValueError("uncertainties must be non-negative")
        object.__setattr__(self, "infidelities", I)
        object.__setattr__(self, "uncertainties", dI)


@dataclass(frozen=True)
class ReconstructedPsd:
    """Reconstructed PSD samples on a frequency partition."""

    values: np.ndarray
    partition: FrequencyPartition
    method: str
    regularization: float = None
    warning: str = None

    @property
    def frequencies(self):
        return self.partition.frequencies()

    def channel(self, k: int):
        """``(frequencies, values)`` of channel ``k``."""
        return self.partition.frequencies(k), self.values[self.partition.slices()[k]]


def sensitivity_from_filters(filter_values, partition: FrequencyPartition, labels=()) -> SensitivityMatrix:
    """Assemble ``F_hat`` from filter functions sampled on the partition.

    Parameters
    ----------
    filter_values : array_like, shape (c, n)
        ``F_k^j(omega_{k,l})`` with the channel blocks concatenated along
        the second axis.
    """
    F = np.array(filter_values, dtype=float)
    if F.ndim == 1:
        F = F[None, :]
    if F.shape[1] != partition.size:
        raise ValueError("filter values do not match the partition")
    for k, sl in enumerate(partition.slices()):
        w = np.full(sl.stop - sl.start, partition.resolution(k) / (2 * np.pi))
        w[0] /= 2
        w[-1] /= 2
        F[:, sl] *= w
    return SensitivityMatrix(F, partition, tuple(labels))


def build_sensitivity(controls, noise_operators, partition: FrequencyPartition, projector=None,
                      m: int = None, **kwargs) -> SensitivityMatrix:
    """Filter-function sensitivity matrix for a set of controls.

    Parameters
    ----------
    controls : sequence of ControlSolution or (hamiltonians, Segmentation)
    noise_operators : sequence
        One noise operator per channel of ``partition``.
    partition : FrequencyPartition
    projector : Projector, optional
    m : int, optional
        Time samples for the filter functions.
    """
    if len(noise_operators) != partition.channels:
        raise ValueError("one noise operator per partition channel is required")
    if len(controls) < 1:
        raise ValueError("at least one control is required")
    rows = []
    for ctrl in controls:
        row = []
        for k, N in enumerate(noise_operators):
            ff = filter_function(ctrl, N, projector, partition.frequencies(k), m, **kwargs)
            row.append(ff.values)
        rows.append(np.concatenate(row))
    return sensitivity_from_filters(np.array(rows), partition)


def _matrix(F):
    return F.matrix if isinstance(F, SensitivityMatrix) else np.asarray(F, dtype=float)


def _partition(F, n):
    if isinstance(F, SensitivityMatrix):
        return F.partition
    return FrequencyPartition.single(0.0, 1.0, n) if n >= 2 else None


def _measurements(I):
    if isinstance(I, MeasurementRecord):
        return I.infidelities
    return np.asarray(I, dtype=float).ravel()


def reconstruct_svd(F, I, cutoff: float = 1e-8) -> ReconstructedPsd:
    """Truncated-SVD pseudoinverse solution ``S = V D^+ U^T I``.

    Singular values below ``cutoff`` times the largest are discarded.
    """
    M = _matrix(F)
    y = _measurements(I)
    if M.shape[0] != y.size:
        raise ValueError("one infidelity per sensitivity row is required")
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        raise ValueError("all singular values are zero")
    keep = s > cutoff * s[0]
    inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    S = Vt.T @ (inv * (U.T @ y))
    return ReconstructedPsd(S, _partition(F, M.shape[1]), "svd")


def difference_matrix(partition_or_counts) -> np.ndarray:
    """First-difference matrix applied independently within each channel block."""
    counts = partition_or_counts.counts if isinstance(partition_or_counts, FrequencyPartition) \
        else list(partition_or_counts)
    n = sum(counts)
    rows = []
    start = 0
    for c in counts:
        for i in range(c - 1):
            r = np.zeros(n)
            r[start + i] = -1.0
            r[start + i + 1] = 1.0
            rows.append(r)
        start += c
    return np.array(rows).reshape(-1, n)


def _co_solve(M, y, Dm, lam, w_t, w_1, x0=None, stop=None):
    """Minimize ``|M S - y|^2 + lam (w_t |D S|^2 + w_1 sum S)`` over ``S >= 0``."""
    n = M.shape[1]
    # rescale unknowns so the problem is O(1): S = s * x
    col = np.linalg.norm(M, axis=0)
    col = np.where(col > 0, col, 1.0)
    A = M / col
    B = Dm / col if Dm.size else Dm
    l1 = 1.0 / col
    ys = max(np.linalg.norm(y), 1e-300)
    A_ = A
    y_ = y / ys
    Q = A_.T @ A_ + lam * w_t * (B.T @ B if B.size else 0)
    c = A_.T @ y_
    lin = 0.5 * lam * w_1 * l1 / ys

    def fun(x):
        Qx = Q @ x
        return float(x @ Qx - 2 * c @ x + 2 * lin @ x + y_ @ y_), 2 * (Qx - c + lin)

    start = np.maximum(np.linalg.lstsq(A_, y_, rcond=None)[0], 0.0) if x0 is None else x0
    res = minimize(fun, (np.zeros(n), np.full(n, np.inf)), starts=1, x0=start,
                   stop=stop or StopCriteria(max_iter=20000, grad_tol=1e-12, cost_tol=1e-15))
    x = np.maximum(res.x, 0.0)
    return x * ys / col, res


def reconstruct_co(F, I, lam: float = None, tikhonov_weight: float = 1.0, l1_weight: float = 0.0,
                   grid=None) -> ReconstructedPsd:
    """Non-negative regularized least squares reconstruction.

    Minimizes ``|F_hat S - I|^2 + lam * (w_T |D S|^2 + w_1 |S|_1)`` subject
    to ``S >= 0``, where ``D`` is the per-channel first-difference matrix.
    When ``lam`` is omitted it is chosen by :func:`find_hyperparameter`.
    """
    M = _matrix(F)
    y = _measurements(I)
    if M.shape[0] != y.size:
        raise ValueError("one infidelity per sensitivity row is required")
    partition = _partition(F, M.shape[1])
    Dm = difference_matrix(partition.counts if partition is not None else [M.shape[1]])
    note = None
    if lam is None:
        choice = find_hyperparameter(M, y, partition, tikhonov_weight, l1_weight, grid)
        lam, note = choice.lam, choice.warning
    if lam < 0:
        raise ValueError("regularization strength must be non-negative")
    S, res = _co_solve(M, y, Dm, lam, tikhonov_weight, l1_weight)
    if res.failures:
        raise RuntimeError(f"optimizer failure: {res.failures}")
    return ReconstructedPsd(S, partition, "co", float(lam), note)


@dataclass(frozen=True)
class HyperparameterChoice:
    """Result of the L-curve search."""

    lam: float
    grid: np.ndarray
    residual_norms: np.ndarray
    regularizer_norms: np.ndarray
    curvature: np.ndarray
    warning: str = None


def _regularizer(S, Dm, w_t, w_1):
    return w_t * float(np.sum((Dm @ S) ** 2)) + w_1 * float(np.sum(S))


def find_hyperparameter(F, I, partition=None, tikhonov_weight: float = 1.0, l1_weight: float = 0.0,
                        grid=None, points: int = 20) -> HyperparameterChoice:
    """L-curve choice of the regularization strength.

    The regularized problem is solved on a logarithmic grid of ``lam``
    values spanning the scale ``|F_hat|^2 / |D|^2``; the selected value
    maximizes the curvature of ``(log residual, log regularizer)``. A flat
    curve yields the mid-grid value with a warning.
    """
    M = _matrix(F)
    y = _measurements(I)
    if partition is None:
        partition = _partition(F, M.shape[1])
    Dm = difference_matrix(partition.counts if partition is not None else [M.shape[1]])
    if grid is None:
        # balance point between data and smoothing terms in the rescaled problem
        col = np.linalg.norm(M, axis=0)
        col = np.where(col > 0, col, 1.0)
        A = M / col
        B = Dm / col
        scale = np.linalg.norm(A, 2) ** 2 / max(np.linalg.norm(B, 2) ** 2, 1e-300)
        grid = scale * np.logspace(-8, 2, points)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 1:
        return HyperparameterChoice(float(grid[0]), grid, np.zeros(1), np.zeros(1), np.zeros(1))
    res_norm, reg_norm = [], []
    x0 = None
    for lam in grid:
        S, _ = _co_solve(M, y, Dm, lam, tikhonov_weight, l1_weight)
        res_norm.append(np.linalg.norm(M @ S - y))
        reg_norm.append(np.sqrt(max(_regularizer(S, Dm, tikhonov_weight, l1_weight), 0.0)))
    res_norm, reg_norm = np.array(res_norm), np.array(reg_norm)
    tiny = 1e-300
    x = np.log(np.maximum(res_norm, tiny))
    z = np.log(np.maximum(reg_norm, tiny))
    t = np.log(grid)
    warning = None
    if np.ptp(x) < 1e-6 or np.ptp(z) < 1e-6 or grid.size < 3:
        warning = "flat L-curve; returning the mid-grid value"
        return HyperparameterChoice(float(grid[grid.size // 2]), grid, res_norm, reg_norm,
                                    np.zeros_like(grid), warning)
    dx, dz = np.gradient(x, t), np.gradient(z, t)
    ddx, ddz = np.gradient(dx, t), np.gradient(dz, t)
    curvature = (dx * ddz - dz * ddx) / np.maximum((dx ** 2 + dz ** 2) ** 1.5, tiny)
    interior = curvature.copy()
    interior[0] = interior[-1] = -np.inf
    k = int(np.argmax(interior))
    if not np.isfinite(interior[k]) or interior[k] <= 0:
        warning = "no L-curve corner found; returning the mid-grid value"
        k = grid.size // 2
    return HyperparameterChoice(float(grid[k]), grid, res_norm, reg_norm, curvature, warning)


def splice(reconstructions, tol: float = 1e-9) -> tuple:
    """Join reconstructions over adjacent frequency sub-domains.

    Parameters
    ----------
    reconstructions : sequence of (frequencies, values) or ReconstructedPsd
        Single-channel estimates ordered by frequency.

    Returns
    -------
    frequencies, values : ndarray
        Union of the frequency samples; values at frequencies shared by
        several sub-domains are averaged.

    Raises
    ------
    ValueError
        If consecutive sub-domains leave a gap wider than the larger of
        their sample spacings.
    """
    parts = []
    for r in reconstructions:
        if isinstance(r, ReconstructedPsd):
            if r.partition.channels != 1:
                raise ValueError("splice operates on single-channel reconstructions")
            f, v = r.channel(0)
        else:
            f, v = (np.asarray(a, dtype=float) for a in r)
        parts.append((f, v))
    if not parts:
        raise ValueError("nothing to splice")
    parts.sort(key=lambda p: p[0][0])
    for (f1, _), (f2, _) in zip(parts[:-1], parts[1:]):
        spacing = max(np.max(np.diff(f1), initial=0), np.max(np.diff(f2), initial=0))
        if f2[0] - f1[-1] > spacing * (1 + 1e-9):
            raise ValueError(f"gap between sub-domains at {f1[-1]} .. {f2[0]}")
    f_all = np.concatenate([p[0] for p in parts])
    v_all = np.concatenate([p[1] for p in parts])
    scale = max(np.max(np.abs(f_all)), 1.0)
    keys = np.round(f_all / (tol * scale)).astype(np.int64)
    uniq, inverse = np.unique(keys, return_inverse=True)
    sums = np.bincount(inverse, weights=v_all)
    counts = np.bincount(inverse)
    freqs = np.bincount(inverse, weights=f_all) / counts
    return freqs, sums / counts
