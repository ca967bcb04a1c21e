import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qctrlkit.control import (
    ControlSolution,
    DriveTerm,
    FidelityValue,
    Projector,
    ShiftTerm,
    assemble_hamiltonian,
    controllability_rank,
    drive_quadratures,
    from_cartesian,
    from_polar,
    frobenius_inner,
    is_hermitian,
    matrix_exp_unitary,
    optimal_infidelity,
    state_fidelity,
    to_cartesian,
    to_polar,
)
from qctrlkit.pwc import PwcScalar, Segmentation

from conftest import I2, SX, SY, SZ, random_hermitian, random_unitary

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def test_frobenius_examples(rng):
    assert frobenius_inner(I2, I2) == 2
    assert frobenius_inner(SX, SY) == 0
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    val = frobenius_inner(A, A)
    assert abs(val.imag) < 1e-14 and val.real >= 0
    assert np.isclose(val.real, np.linalg.norm(A, "fro") ** 2)
    with pytest.raises(ValueError):
        frobenius_inner(I2, np.eye(3))


def test_polar_cartesian_examples():
    assert to_polar(1.0) == (1.0, 0.0)
    mod, ph = to_polar(1j)
    assert np.isclose(mod, 1) and np.isclose(ph, np.pi / 2)
    assert to_cartesian(1j) == (0.0, 1.0)
    assert to_polar(0.0) == (0.0, 0.0)


@settings(max_examples=50, deadline=None)
@given(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False))
def test_polar_cartesian_round_trip(gamma):
    assert abs(from_polar(*to_polar(gamma)) - gamma) <= 1e-12 * max(1.0, abs(gamma))
    assert from_cartesian(*to_cartesian(gamma)) == gamma


def test_drive_quadratures(rng):
    A_I, A_Q = drive_quadratures(np.zeros((2, 2)))
    assert not A_I.any() and not A_Q.any()
    C = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    A_I, A_Q = drive_quadratures(C)
    np.testing.assert_allclose((A_I - 1j * A_Q) / 2, C, atol=1e-14)
    np.testing.assert_allclose(A_I, A_I.conj().T, atol=1e-14)
    np.testing.assert_allclose(A_Q, A_Q.conj().T, atol=1e-14)


def test_assemble_drift_only():
    D = np.diag([0.3, -0.3])
    ctrl = ControlSolution([], [ShiftTerm(PwcScalar([0.0, 0.0], [1.0, 1.0]), SZ)], D)
    H, _ = assemble_hamiltonian(ctrl)
    np.testing.assert_allclose(H, np.broadcast_to(D, (2, 2, 2)))


def test_assemble_real_drive_gives_quadrature():
    sigma_minus = np.array([[0, 1], [0, 0]], dtype=complex)
    C = sigma_minus / 2
    omega = 2.5
    ctrl = ControlSolution([DriveTerm(PwcScalar.constant(omega, 1.0), C)])
    H, _ = assemble_hamiltonian(ctrl)
    A_I, _ = drive_quadratures(C)
    np.testing.assert_allclose(H[0], omega * A_I, atol=1e-15)


@pytest.mark.parametrize("phi", [0.0, 0.4, np.pi / 2, 2.0, -1.1])
def test_assemble_polar_drive_rotation_axis(phi):
    # gamma |0><1| + h.c. with gamma = (Omega/2) e^{i phi}
    omega = 1.7
    C = np.array([[0, 1], [0, 0]], dtype=complex)
    ctrl = ControlSolution([DriveTerm(PwcScalar.constant(omega / 2 * np.exp(1j * phi), 1.0), C)])
    H, _ = assemble_hamiltonian(ctrl)
    expected = omega / 2 * (np.cos(phi) * SX - np.sin(phi) * SY)
    np.testing.assert_allclose(H[0], expected, atol=1e-15)
    # with the lowering operator |1><0| the sign of the y component flips
    ctrl = ControlSolution([DriveTerm(PwcScalar.constant(omega / 2 * np.exp(1j * phi), 1.0), C.T)])
    H, _ = assemble_hamiltonian(ctrl)
    np.testing.assert_allclose(H[0], omega / 2 * (np.cos(phi) * SX + np.sin(phi) * SY), atol=1e-15)


def test_assemble_requires_joint_grid():
    ctrl = ControlSolution([DriveTerm(PwcScalar([1, 2], [0.5, 0.5]), SX)],
                           [ShiftTerm(PwcScalar([1, 2, 3], np.full(3, 1 / 3)), SZ)])
    with pytest.raises(ValueError):
        assemble_hamiltonian(ctrl)
    H, seg = ctrl.hamiltonian()
    assert seg.count == 4


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(1, 4), st.integers(2, 4))
def test_assembled_hamiltonians_hermitian(seed, segments, dim):
    rng = np.random.default_rng(seed)
    seg = Segmentation(rng.uniform(0.1, 1.0, segments))
    drives = [DriveTerm(PwcScalar(rng.normal(size=segments) + 1j * rng.normal(size=segments), seg),
                        rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))]
    shifts = [ShiftTerm(PwcScalar(rng.normal(size=segments), seg), random_hermitian(rng, dim))]
    ctrl = ControlSolution(drives, shifts, random_hermitian(rng, dim))
    H, _ = assemble_hamiltonian(ctrl)
    assert is_hermitian(H, atol=1e-12)


def test_control_validation():
    with pytest.raises(ValueError):
        ShiftTerm(PwcScalar([1.0], [1.0]), np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        ControlSolution([], [], np.array([[0, 1], [0, 0]]), 1.0)
    with pytest.raises(ValueError):
        ControlSolution([DriveTerm(PwcScalar([1.0], [1.0]), SX)], [], np.eye(3))
    with pytest.raises(ValueError):
        ControlSolution([DriveTerm(PwcScalar([1.0], [1.0]), SX)],
                        [ShiftTerm(PwcScalar([1.0], [2.0]), SZ)])


def test_matrix_exp_examples(rng):
    np.testing.assert_allclose(matrix_exp_unitary(np.zeros((2, 2)), 1.0), I2)
    U = matrix_exp_unitary(np.pi / 2 * SZ, 1.0)
    np.testing.assert_allclose(U, np.diag([np.exp(-1j * np.pi / 2), np.exp(1j * np.pi / 2)]), atol=1e-15)
    H = random_hermitian(rng, 8)
    U = matrix_exp_unitary(H, 0.37)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(8), atol=1e-10)
    assert abs(abs(np.linalg.det(U)) - 1) < 1e-8
    with pytest.raises(ValueError):
        matrix_exp_unitary(np.array([[0, 1], [0, 0]]), 1.0)
    with pytest.raises(ValueError):
        matrix_exp_unitary(SZ, -1.0)


def test_matrix_exp_matches_scipy(rng):
    from scipy.linalg import expm

    H = random_hermitian(rng, 5)
    np.testing.assert_allclose(matrix_exp_unitary(H, 0.8), expm(-1j * 0.8 * H), atol=1e-12)


def test_optimal_infidelity_examples():
    assert optimal_infidelity(SX, SX).value == 0
    assert np.isclose(optimal_infidelity(np.exp(0.7j) * SX, SX).value, 0, atol=1e-15)
    assert np.isclose(optimal_infidelity(SX, I2).value, 1)
    with pytest.raises(ValueError):
        optimal_infidelity(SX, np.eye(3))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(2, 5))
def test_optimal_infidelity_invariants(seed, n):
    rng = np.random.default_rng(seed)
    U = random_unitary(rng, n)
    diag = (rng.random(n) < 0.5).astype(float)
    diag[rng.integers(n)] = 1
    P = Projector(diag)
    assert optimal_infidelity(U, U, P).value < 1e-12
    V = random_unitary(rng, n)
    base = optimal_infidelity(V, U, P).value
    for theta in rng.uniform(-np.pi, np.pi, 20):
        assert abs(optimal_infidelity(np.exp(1j * theta) * V, U, P).value - base) < 1e-12


def test_subspace_projector_ignores_leakage_block():
    U = np.eye(3, dtype=complex)
    U[2, 2] = -1
    assert optimal_infidelity(U, np.eye(3), Projector.onto([0, 1], 3)).value < 1e-15
    assert optimal_infidelity(U, np.eye(3)).value > 0.1


def test_projector_validation():
    with pytest.raises(ValueError):
        Projector([0, 0])
    with pytest.raises(ValueError):
        Projector([0.5, 1])
    assert Projector.onto([0, 2], 4).trace == 2


def test_fidelity_value_range():
    with pytest.raises(ValueError):
        FidelityValue(1.5, "optimal")
    with pytest.raises(ValueError):
        FidelityValue(0.1, "bogus")
    assert FidelityValue(0.25, "robust").fidelity == 0.75


def test_state_fidelity_examples():
    zero = np.array([1, 0])
    assert state_fidelity(I2, zero, zero) == 1
    assert state_fidelity(SX, zero, zero) == 0
    assert np.isclose(state_fidelity(HADAMARD, zero, zero), 1 / np.sqrt(2))
    with pytest.raises(ValueError):
        state_fidelity(I2, [1, 1], zero)


def test_state_fidelity_transfer_direction():
    # the amplitude is <final| U |initial>
    U = np.array([[0, 0], [1, 0]], dtype=complex) + np.array([[0, 1j], [0, 0]])
    assert state_fidelity(U, [1, 0], [0, 1]) == 1
    assert state_fidelity(U, [0, 1], [1, 0]) == 1


def test_controllability_examples():
    assert controllability_rank([SZ]) == 1
    assert controllability_rank([SX, SY]) == 3
    controls = [np.kron(SX, I2), np.kron(SY, I2), np.kron(I2, SX), np.kron(I2, SY), np.kron(SX, SX)]
    assert controllability_rank(controls) == 15


def test_controllability_local_only_is_not_full():
    controls = [np.kron(SX, I2), np.kron(SY, I2), np.kron(I2, SX), np.kron(I2, SY)]
    assert controllability_rank(controls) == 6


@settings(max_examples=15, deadline=None)
@given(st.floats(0.01, 100.0), st.floats(-100.0, -0.01))
def test_controllability_scale_invariant(a, b):
    controls = [a * np.kron(SX, I2), np.kron(SY, I2), b * np.kron(I2, SX), np.kron(I2, SY), np.kron(SX, SX)]
    assert controllability_rank(controls) == 15
