import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid

from qctrlkit.reconstruction import (
    FrequencyPartition,
    MeasurementRecord,
    build_sensitivity,
    difference_matrix,
    find_hyperparameter,
    reconstruct_co,
    reconstruct_svd,
    sensitivity_from_filters,
    splice,
)
from qctrlkit.scenarios import DEPHASING, cpmg_sequence

from conftest import SX


def test_partition_validation_and_layout():
    p = FrequencyPartition(((0.0, 1.0, 3), (2.0, 4.0, 5)))
    assert p.channels == 2 and p.size == 8
    np.testing.assert_allclose(p.frequencies(1), [2.0, 2.5, 3.0, 3.5, 4.0])
    assert p.resolution(0) == 0.5
    assert [s.start for s in p.slices()] == [0, 3]
    for bad in [((0.0, 1.0, 1),), ((1.0, 1.0, 3),), ((-1.0, 1.0, 3),), ()]:
        with pytest.raises(ValueError):
            FrequencyPartition(bad)


def test_quadrature_weights_integrate_constant():
    # F = 1 on [a, b]: the row sum is the trapezoid integral (b - a) / 2 pi
    p = FrequencyPartition.single(2.0, 7.0, 11)
    S = sensitivity_from_filters(np.ones(11), p)
    assert np.isclose(S.matrix.sum(), 5.0 / (2 * np.pi))
    assert np.isclose(S.matrix[0, 0], 0.5 * 0.5 / (2 * np.pi))
    assert np.isclose(S.matrix[0, 5], 0.5 / (2 * np.pi))
    with pytest.raises(ValueError):
        sensitivity_from_filters(np.ones(10), p)


def test_two_channel_row_is_sum_of_channels():
    p = FrequencyPartition(((0.0, 1.0, 5), (0.0, 3.0, 7)))
    rng = np.random.default_rng(0)
    F = rng.uniform(0, 1, (1, 12))
    S = rng.uniform(0, 2, 12)
    row = sensitivity_from_filters(F, p).matrix[0]
    w0 = trapezoid(F[0, :5] * S[:5], p.frequencies(0)) / (2 * np.pi)
    w1 = trapezoid(F[0, 5:] * S[5:], p.frequencies(1)) / (2 * np.pi)
    assert np.isclose(row @ S, w0 + w1)


def test_build_sensitivity_from_controls():
    p = FrequencyPartition.single(0.0, 2 * np.pi * 4e6, 9)
    ctrls = [cpmg_sequence(n, 1e-6) for n in (1, 2)]
    S = build_sensitivity(ctrls, [DEPHASING], p, m=800)
    assert S.shape == (2, 9)
    assert np.all(S.matrix >= 0)
    with pytest.raises(ValueError):
        build_sensitivity(ctrls, [DEPHASING, SX], p)


def test_svd_identity_and_square():
    S_true = np.array([1.0, 2.0, 0.5, 3.0])
    r = reconstruct_svd(np.eye(4), S_true)
    np.testing.assert_allclose(r.values, S_true, atol=1e-14)
    rng = np.random.default_rng(1)
    M = rng.uniform(0.1, 1.0, (4, 4))
    np.testing.assert_allclose(reconstruct_svd(M, M @ S_true).values, S_true, rtol=1e-10)
    with pytest.raises(ValueError):
        reconstruct_svd(M, np.ones(3))
    with pytest.raises(ValueError):
        reconstruct_svd(np.zeros((2, 2)), np.ones(2))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(-3, 3), st.floats(-3, 3))
def test_svd_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(6, 5))
    y1, y2 = rng.normal(size=6), rng.normal(size=6)
    lhs = reconstruct_svd(M, a * y1 + b * y2).values
    rhs = a * reconstruct_svd(M, y1).values + b * reconstruct_svd(M, y2).values
    assert np.allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(rhs).max()))


def test_svd_truncation_discards_small_directions():
    M = np.diag([1.0, 1e-12])
    r = reconstruct_svd(M, [1.0, 1.0])
    np.testing.assert_allclose(r.values, [1.0, 0.0])


def test_co_nonnegative_and_exact_without_regularization():
    rng = np.random.default_rng(4)
    M = rng.uniform(0, 1, (12, 6))
    S_true = rng.uniform(0.5, 2.0, 6)
    r = reconstruct_co(M, M @ S_true, lam=0.0)
    np.testing.assert_allclose(r.values, S_true, rtol=1e-5)
    noisy = M @ S_true + rng.normal(0, 0.5, 12)
    r = reconstruct_co(M, noisy, lam=1e-3)
    assert np.all(r.values >= 0)
    with pytest.raises(ValueError):
        reconstruct_co(M, noisy, lam=-1.0)


def test_co_clamps_negative_least_squares():
    # the unconstrained solution is negative; the constrained optimum is zero
    r = reconstruct_co(np.eye(2), [-1.0, 2.0], lam=0.0)
    np.testing.assert_allclose(r.values, [0.0, 2.0], atol=1e-8)


def test_smoothing_reduces_roughness():
    rng = np.random.default_rng(5)
    n = 20
    M = rng.uniform(0, 1, (8, n))  # underdetermined
    S_true = 1 + 0.5 * np.sin(np.linspace(0, np.pi, n))
    y = M @ S_true
    D = difference_matrix([n])
    rough = reconstruct_co(M, y, lam=1e-10).values
    smooth = reconstruct_co(M, y, lam=1e2).values
    assert np.sum((D @ smooth) ** 2) < np.sum((D @ rough) ** 2)


def test_difference_matrix_blocks():
    D = difference_matrix([3, 2])
    np.testing.assert_array_equal(D, [[-1, 1, 0, 0, 0], [0, -1, 1, 0, 0], [0, 0, 0, -1, 1]])
    assert not (difference_matrix([4]) @ np.full(4, 2.0)).any()


def test_hyperparameter_curve_shape():
    rng = np.random.default_rng(6)
    M = rng.uniform(0, 1, (10, 15))
    y = M @ (1 + rng.uniform(0, 0.2, 15)) + rng.normal(0, 0.05, 10)
    choice = find_hyperparameter(M, y, points=12)
    assert choice.grid.size == 12
    assert choice.grid[0] <= choice.lam <= choice.grid[-1]
    # residual grows and roughness shrinks with stronger regularization
    assert choice.residual_norms[-1] >= choice.residual_norms[0]
    assert choice.regularizer_norms[-1] <= choice.regularizer_norms[0]
    single = find_hyperparameter(M, y, grid=[0.3])
    assert single.lam == 0.3


def test_measurement_record_validation():
    rec = MeasurementRecord([0.1, 0.2])
    assert not rec.uncertainties.any()
    with pytest.raises(ValueError):
        MeasurementRecord([0.1, 0.2], [0.1])
    with pytest.raises(ValueError):
        MeasurementRecord([0.1], [-0.1])
    r = reconstruct_svd(np.eye(2), MeasurementRecord([0.1, 0.2]))
    np.testing.assert_allclose(r.values, [0.1, 0.2])


def test_splice_overlap_average_and_gap():
    f, v = splice([(np.array([0.0, 1.0, 2.0]), np.array([1.0, 1.0, 3.0])),
                   (np.array([2.0, 3.0]), np.array([5.0, 2.0]))])
    np.testing.assert_allclose(f, [0, 1, 2, 3])
    np.testing.assert_allclose(v, [1, 1, 4, 2])
    # order of the inputs does not matter
    f2, v2 = splice([(np.array([2.0, 3.0]), np.array([5.0, 2.0])),
                     (np.array([0.0, 1.0, 2.0]), np.array([1.0, 1.0, 3.0]))])
    np.testing.assert_allclose(v2, v)
    with pytest.raises(ValueError):
        splice([(np.array([0.0, 1.0]), np.ones(2)), (np.array([5.0, 6.0]), np.ones(2))])
    with pytest.raises(ValueError):
        splice([])
