import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qctrlkit.pwc import PwcScalar, Segmentation, joint_segments, segment_index


def test_segmentation_rejects_nonpositive_durations():
    with pytest.raises(ValueError):
        Segmentation([1.0, 0.0])
    with pytest.raises(ValueError):
        Segmentation([1.0, -1.0])


def test_segmentation_declared_duration_must_match():
    Segmentation([0.5, 0.5], duration=1.0)
    with pytest.raises(ValueError):
        Segmentation([0.5, 0.5], duration=1.1)


def test_uniform_boundaries():
    seg = Segmentation.uniform(4, 2.0)
    np.testing.assert_allclose(seg.boundaries, [0, 0.5, 1.0, 1.5, 2.0])
    assert seg.is_uniform()


def test_pwc_length_mismatch():
    with pytest.raises(ValueError):
        PwcScalar([1.0, 2.0], [1.0])


def test_segment_index_left_closed():
    seg = Segmentation([1.0, 1.0])
    np.testing.assert_array_equal(segment_index(seg, [0.0, 0.999, 1.0, 2.0]), [0, 0, 1, 1])


def test_joint_halves_and_thirds():
    tau = 6.0
    a = PwcScalar([1.0, 2.0], Segmentation.uniform(2, tau))
    b = PwcScalar([10.0, 20.0, 30.0], Segmentation.uniform(3, tau))
    grid = joint_segments(a, b)
    np.testing.assert_allclose(grid.segmentation.durations, [2, 1, 1, 2])
    # union of {0,3,6} and {0,2,4,6}
    np.testing.assert_allclose(grid.boundaries, [0, 2, 3, 4, 6])
    np.testing.assert_allclose(grid.values[0], [1, 1, 2, 2])
    np.testing.assert_allclose(grid.values[1], [10, 20, 20, 30])


def test_joint_uniform_mode_gives_six_sixths():
    tau = 1.0
    a = PwcScalar([1.0, 2.0], Segmentation.uniform(2, tau))
    b = PwcScalar([10.0, 20.0, 30.0], Segmentation.uniform(3, tau))
    grid = joint_segments(a, b, mode="uniform")
    np.testing.assert_allclose(grid.segmentation.durations, np.full(6, tau / 6))
    pairs = list(zip(grid.values[0], grid.values[1]))
    assert pairs == [(1, 10), (1, 10), (1, 20), (2, 20), (2, 30), (2, 30)]


def test_joint_identical_segmentations():
    seg = Segmentation([0.1, 0.3, 0.6])
    grid = joint_segments(PwcScalar([1, 2, 3], seg), PwcScalar([4, 5, 6], seg))
    assert grid.segmentation == seg


def test_joint_duration_mismatch():
    with pytest.raises(ValueError):
        joint_segments(PwcScalar([1.0], [1.0]), PwcScalar([1.0], [1.1]))


def test_joint_coprime_counts_pointwise():
    tau = 1.0
    series = [PwcScalar(np.arange(n) + 10 * n, Segmentation.uniform(n, tau)) for n in (2, 3, 5)]
    grid = joint_segments(*series)
    # interior boundaries: 1 + 2 + 4 at most
    assert grid.segmentation.count - 1 <= 7
    probe = np.linspace(0.001, 0.999, 333)
    idx = segment_index(grid.segmentation, probe)
    for s, vals in zip(series, grid.values):
        np.testing.assert_array_equal(vals[idx], s(probe))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.floats(0.05, 3.0), min_size=1, max_size=6), min_size=1, max_size=4),
       st.integers(0, 2 ** 31))
def test_joint_preserves_values_property(duration_lists, seed):
    rng = np.random.default_rng(seed)
    tau = 2.0
    series = []
    for d in duration_lists:
        d = np.asarray(d)
        series.append(PwcScalar(rng.normal(size=d.size), Segmentation(d / d.sum() * tau)))
    grid = joint_segments(*series)
    b = grid.boundaries
    assert np.all(np.diff(b) > 0)
    mids = grid.segmentation.midpoints
    for s, vals in zip(series, grid.values):
        np.testing.assert_array_equal(vals, s(mids))
