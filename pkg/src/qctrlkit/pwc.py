"""Piecewise-constant (PWC) time series on arbitrary segmentations.

A PWC series is a list of per-segment values together with the segment
durations. Values may be scalars or arrays (for operator-valued series the
leading axis indexes segments).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Segmentation",
    "PwcScalar",
    "JointGrid",
    "joint_segments",
    "segment_index",
]

_REL_TOL = 1e-12


@dataclass(frozen=True)
class Segmentation:
    """Partition of ``[0, duration]`` into consecutive segments.

    Parameters
    ----------
    durations : array_like
        Positive segment durations in seconds.
    duration : float, optional
        Declared total duration. If given it must agree with the sum of
        ``durations`` to 1e-12 relative.
    """

    durations: np.ndarray
    duration: float = field(default=None)

    def __post_init__(self):
        durations = np.atleast_1d(np.asarray(self.durations, dtype=float))
        if durations.ndim != 1 or durations.size == 0:
            raise ValueError("durations must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(durations)) or np.any(durations <= 0):
            raise ValueError("every segment duration must be finite and > 0")
        total = float(np.sum(durations))
        if self.duration is not None:
            declared = float(self.duration)
            if abs(total - declared) > _REL_TOL * max(abs(declared), abs(total)) * 10:
                raise ValueError(
                    f"segment durations sum to {total!r}, declared duration is {declared!r}"
                )
            total = declared
        durations.setflags(write=False)
        object.__setattr__(self, "durations", durations)
        object.__setattr__(self, "duration", total)

    @classmethod
    def uniform(cls, count: int, duration: float) -> "Segmentation":
        """Return ``count`` equal segments spanning ``duration``."""
        if count < 1:
            raise ValueError("segment count must be at least 1")
        return cls(np.full(int(count), duration / count), duration=duration)

    @classmethod
    def from_boundaries(cls, boundaries) -> "Segmentation":
        boundaries = np.asarray(boundaries, dtype=float)
        return cls(np.diff(boundaries), duration=boundaries[-1] - boundaries[0])

    @property
    def count(self) -> int:
        return self.durations.size

    def __len__(self):
        return self.count

    @property
    def boundaries(self) -> np.ndarray:
        """Segment boundaries ``t_0 = 0 < t_1 < ... < t_m = duration``."""
        b = np.concatenate([[0.0], np.cumsum(self.durations)])
        b[-1] = self.duration
        return b

    @property
    def midpoints(self) -> np.ndarray:
        b = self.boundaries
        return 0.5 * (b[:-1] + b[1:])

    def is_uniform(self, rtol: float = 1e-9) -> bool:
        return bool(np.allclose(self.durations, self.durations[0], rtol=rtol, atol=0))

    def __eq__(self, other):
        if not isinstance(other, Segmentation):
            return NotImplemented
        return self.count == other.count and np.allclose(
            self.durations, other.durations, rtol=1e-12, atol=0
        )

    def __hash__(self):
        return hash((self.count, round(self.duration, 15)))


def segment_index(segmentation: Segmentation, times) -> np.ndarray:
    """Index of the segment containing each time.

    Segments are closed on the left; the final boundary belongs to the last
    segment.
    """
    times = np.asarray(times, dtype=float)
    b = segmentation.boundaries
    idx = np.searchsorted(b, times, side="right") - 1
    return np.clip(idx, 0, segmentation.count - 1)


@dataclass(frozen=True)
class PwcScalar:
    """Piecewise-constant scalar function of time.

    Parameters
    ----------
    values : array_like
        Per-segment values, real or complex.
    segmentation : Segmentation or array_like
        Either a :class:`Segmentation` or the segment durations.
    """

    values: np.ndarray
    segmentation: Segmentation

    def __post_init__(self):
        seg = self.segmentation
        if not isinstance(seg, Segmentation):
            seg = Segmentation(seg)
        values = np.atleast_1d(np.asarray(self.values))
        if values.dtype.kind not in "fc":
            values = values.astype(float)
        if values.shape[0] != seg.count:
            raise ValueError(
                f"{values.shape[0]} values given for {seg.count} segments"
            )
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "segmentation", seg)

    @classmethod
    def constant(cls, value, duration: float) -> "PwcScalar":
        return cls(np.array([value]), Segmentation([duration]))

    @property
    def durations(self) -> np.ndarray:
        return self.segmentation.durations

    @property
    def duration(self) -> float:
        return self.segmentation.duration

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values) or bool(
            np.all(self.values.imag == 0)
        )

    def __call__(self, times):
        """Sample the function at ``times`` (right-continuous)."""
        return self.values[segment_index(self.segmentation, times)]

    def resample(self, segmentation: Segmentation) -> "PwcScalar":
        """Re-express on a finer segmentation by midpoint lookup."""
        return PwcScalar(self(segmentation.midpoints), segmentation)


@dataclass(frozen=True)
class JointGrid:
    """Common refinement of several PWC series.

    Attributes
    ----------
    segmentation : Segmentation
        The joint segmentation.
    values : list of ndarray
        Values of every input series on the joint segments, in input order.
    """

    segmentation: Segmentation
    values: tuple

    @property
    def boundaries(self) -> np.ndarray:
        return self.segmentation.boundaries


def _as_series(item):
    if isinstance(item, PwcScalar):
        return item.values, item.segmentation
    values, seg = item
    if not isinstance(seg, Segmentation):
        seg = Segmentation(seg)
    values = np.asarray(values)
    if values.shape[0] != seg.count:
        raise ValueError("values and segmentation disagree in length")
    return values, seg


def joint_segments(*series, mode: str = "union", tol: float = 1e-9) -> JointGrid:
    """Resample several PWC series onto a shared segmentation.

    Parameters
    ----------
    *series : PwcScalar or (values, Segmentation)
        Two or more series with equal total durations. Array-valued series
        (e.g. operator series) are accepted as ``(values, segmentation)``
        pairs whose leading axis indexes segments.
    mode : {"union", "uniform"}
        ``"union"`` merges all boundary sets. ``"uniform"`` requires uniform
        inputs and uses the least common refinement into equal segments,
        which is the layout obtained when every input segment is split into
        equal pieces.
    tol : float
        Relative tolerance for the duration check and for merging nearly
        coincident boundaries.

    Returns
    -------
    JointGrid
    """
    if len(series) == 0:
        raise ValueError("at least one series is required")
    parsed = [_as_series(s) for s in series]
    durations = np.array([seg.duration for _, seg in parsed])
    tau = float(durations.max())
    if np.any(np.abs(durations - tau) > tol * tau):
        raise ValueError(f"series durations differ: {durations.tolist()}")

    if mode == "union":
        b = np.concatenate([seg.boundaries * (tau / seg.duration) for _, seg in parsed])
        b = np.sort(b)
        keep = np.concatenate([[True], np.diff(b) > tol * tau])
        b = b[keep]
        b[0] = 0.0
        if tau - b[-1] <= tol * tau:
            b[-1] = tau
        else:
            b = np.append(b, tau)
        joint = Segmentation.from_boundaries(b)
    elif mode == "uniform":
        counts = []
        for _, seg in parsed:
            if not seg.is_uniform():
                raise ValueError("mode='uniform' requires uniformly segmented inputs")
            counts.append(seg.count)
        joint = Segmentation.uniform(int(np.lcm.reduce(counts)), tau)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    mids = joint.midpoints
    values = []
    for vals, seg in parsed:
        scaled = Segmentation(seg.durations * (tau / seg.duration), duration=tau)
        values.append(np.asarray(vals)[segment_index(scaled, mids)])
    return JointGrid(joint, tuple(values))
