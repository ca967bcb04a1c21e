"""Control Hamiltonians, fidelity metrics and Lie-algebraic controllability.

The control Hamiltonian on each segment is

    H = sum_j (gamma_j C_j + h.c.) + sum_l alpha_l A_l + D

with complex drive pulses ``gamma_j`` on (generally non-Hermitian) operators
``C_j``, real shift pulses ``alpha_l`` on Hermitian operators ``A_l`` and a
constant Hermitian drift ``D``. All rates are angular (rad/s).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .pwc import PwcScalar, Segmentation, joint_segments

__all__ = [
    "DriveTerm",
    "ShiftTerm",
    "ControlSolution",
    "Projector",
    "FidelityValue",
    "frobenius_inner",
    "to_polar",
    "from_polar",
    "to_cartesian",
    "from_cartesian",
    "drive_quadratures",
    "assemble_hamiltonian",
    "matrix_exp_unitary",
    "optimal_infidelity",
    "state_fidelity",
    "robust_infidelity_mc",
    "controllability_rank",
    "is_hermitian",
]

HERMITIAN_TOL = 1e-12


def is_hermitian(matrix, atol: float = HERMITIAN_TOL) -> bool:
    """Check Hermiticity with a tolerance scaled by the matrix norm."""
    matrix = np.asarray(matrix)
    scale = max(1.0, float(np.max(np.abs(matrix), initial=0.0)))
    return bool(np.allclose(matrix, np.conj(np.swapaxes(matrix, -1, -2)), rtol=0, atol=atol * scale))


def _square(matrix, name="operator") -> np.ndarray:
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {matrix.shape}")
    return matrix


@dataclass(frozen=True)
class DriveTerm:
    """Complex pulse ``gamma(t)`` driving the non-Hermitian operator ``C``."""

    pulse: PwcScalar
    operator: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "operator", _square(self.operator, "drive operator"))
        pulse = self.pulse
        pulse = PwcScalar(np.asarray(pulse.values, dtype=complex), pulse.segmentation)
        object.__setattr__(self, "pulse", pulse)


@dataclass(frozen=True)
class ShiftTerm:
    """Real pulse ``alpha(t)`` on the Hermitian operator ``A``."""

    pulse: PwcScalar
    operator: np.ndarray

    def __post_init__(self):
        op = _square(self.operator, "shift operator")
        if not is_hermitian(op):
            raise ValueError("shift operator must be Hermitian")
        object.__setattr__(self, "operator", op)
        values = np.asarray(self.pulse.values)
        if np.iscomplexobj(values):
            if np.any(np.abs(values.imag) > 1e-12 * max(1.0, np.max(np.abs(values)))):
                raise ValueError("shift pulses must be real")
            values = values.real
        object.__setattr__(
            self, "pulse", PwcScalar(values.astype(float), self.pulse.segmentation)
        )


@dataclass(frozen=True)
class ControlSolution:
    """A complete PWC control: drives, shifts, drift and total duration.

    Parameters
    ----------
    drives, shifts : sequence
        Drive and shift terms. Each may carry its own segmentation.
    drift : array_like
        Constant Hermitian drift Hamiltonian.
    duration : float, optional
        Total duration. Inferred from the pulses when omitted; required when
        there are no pulses.
    """

    drives: tuple = ()
    shifts: tuple = ()
    drift: np.ndarray = None
    duration: float = None

    def __post_init__(self):
        drives = tuple(self.drives)
        shifts = tuple(self.shifts)
        if self.drift is None:
            if not drives and not shifts:
                raise ValueError("a drift or at least one control term is required")
            dim = (drives or shifts)[0].operator.shape[0]
            drift = np.zeros((dim, dim), dtype=complex)
        else:
            drift = _square(self.drift, "drift")
        if not is_hermitian(drift):
            raise ValueError("drift must be Hermitian")
        dim = drift.shape[0]
        for term in drives + shifts:
            if term.operator.shape != (dim, dim):
                raise ValueError(
                    f"operator shape {term.operator.shape} does not match dimension {dim}"
                )
        durations = [t.pulse.duration for t in drives + shifts]
        if self.duration is None:
            if not durations:
                raise ValueError("duration is required when there are no pulses")
            duration = durations[0]
        else:
            duration = float(self.duration)
        for d in durations:
            if abs(d - duration) > 1e-9 * duration:
                raise ValueError(f"pulse duration {d} differs from total duration {duration}")
        drift.setflags(write=False)
        object.__setattr__(self, "drives", drives)
        object.__setattr__(self, "shifts", shifts)
        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "duration", duration)

    @property
    def dimension(self) -> int:
        return self.drift.shape[0]

    @property
    def pulses(self) -> list:
        return [t.pulse for t in self.drives] + [t.pulse for t in self.shifts]

    @property
    def segmentation(self) -> Segmentation:
        """Joint segmentation of all pulses (a single segment if there are none)."""
        if not self.pulses:
            return Segmentation([self.duration])
        return joint_segments(*self.pulses).segmentation

    def on_joint_grid(self) -> "ControlSolution":
        """Return an equivalent solution whose pulses share one segmentation."""
        if not self.pulses:
            return self
        grid = joint_segments(*self.pulses)
        seg = grid.segmentation
        n = len(self.drives)
        drives = [
            DriveTerm(PwcScalar(v, seg), t.operator)
            for t, v in zip(self.drives, grid.values[:n])
        ]
        shifts = [
            ShiftTerm(PwcScalar(v, seg), t.operator)
            for t, v in zip(self.shifts, grid.values[n:])
        ]
        return ControlSolution(drives, shifts, self.drift, self.duration)

    def hamiltonian(self):
        """Shortcut for :func:`assemble_hamiltonian` on the joint grid."""
        return assemble_hamiltonian(self.on_joint_grid())


@dataclass(frozen=True)
class Projector:
    """Diagonal 0/1 projector onto a subspace of the computational basis."""

    diagonal: np.ndarray

    def __post_init__(self):
        diag = np.asarray(self.diagonal, dtype=float).ravel()
        if diag.size == 0 or not np.all((diag == 0) | (diag == 1)):
            raise ValueError("projector diagonal entries must be 0 or 1")
        if diag.sum() == 0:
            raise ValueError("projector must have at least one nonzero entry")
        diag.setflags(write=False)
        object.__setattr__(self, "diagonal", diag)

    @classmethod
    def full(cls, dimension: int) -> "Projector":
        return cls(np.ones(dimension))

    @classmethod
    def onto(cls, indices: Sequence[int], dimension: int) -> "Projector":
        diag = np.zeros(dimension)
        diag[list(indices)] = 1
        return cls(diag)

    @property
    def dimension(self) -> int:
        return self.diagonal.size

    @property
    def trace(self) -> int:
        return int(self.diagonal.sum())

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal).astype(complex)


def _projector(P, dimension: int) -> Projector:
    if P is None:
        return Projector.full(dimension)
    if not isinstance(P, Projector):
        P = Projector(P)
    if P.dimension != dimension:
        raise ValueError(f"projector dimension {P.dimension} != {dimension}")
    return P


@dataclass(frozen=True)
class FidelityValue:
    """An infidelity estimate.

    Attributes
    ----------
    value : float
        Infidelity in [0, 1].
    kind : {"optimal", "robust", "state"}
    stderr : float or None
        Standard error for Monte Carlo estimates.
    trials : int or None
    """

    value: float
    kind: str
    stderr: float = None
    trials: int = None

    def __post_init__(self):
        if self.kind not in ("optimal", "robust", "state"):
            raise ValueError(f"unknown fidelity kind {self.kind!r}")
        value = float(self.value)
        if not -1e-9 <= value <= 1 + 1e-9:
            raise ValueError(f"infidelity {value} outside [0, 1]")
        object.__setattr__(self, "value", min(max(value, 0.0), 1.0))

    @property
    def fidelity(self) -> float:
        return 1.0 - self.value

    def __float__(self):
        return self.value


def frobenius_inner(A, B) -> complex:
    """Frobenius inner product ``Tr(A^dagger B)``."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch: {A.shape} vs {B.shape}")
    return complex(np.vdot(A, B))


def to_polar(gamma):
    """Split a complex pulse into modulus and phase, ``gamma = Omega exp(i phi)``."""
    gamma = np.asarray(gamma, dtype=complex)
    return np.abs(gamma), np.angle(gamma)


def from_polar(modulus, phase):
    return np.asarray(modulus) * np.exp(1j * np.asarray(phase))


def to_cartesian(gamma):
    """Split a complex pulse into quadratures, ``gamma = I + iQ``."""
    gamma = np.asarray(gamma, dtype=complex)
    return gamma.real, gamma.imag


def from_cartesian(i_quad, q_quad):
    return np.asarray(i_quad) + 1j * np.asarray(q_quad)


def drive_quadratures(C):
    """Hermitian quadrature operators of a drive operator.

    Returns ``A_I = C + C^dagger`` and ``A_Q = i (C - C^dagger)`` so that
    ``gamma C + h.c. = I A_I + Q A_Q`` and ``C = (A_I - i A_Q) / 2``.
    """
    C = _square(C, "drive operator")
    Cd = C.conj().T
    return C + Cd, 1j * (C - Cd)


def assemble_hamiltonian(ctrl: ControlSolution):
    """Per-segment control Hamiltonians.

    Parameters
    ----------
    ctrl : ControlSolution
        All pulses must share one segmentation; use
        :meth:`ControlSolution.on_joint_grid` otherwise.

    Returns
    -------
    hamiltonians : ndarray, shape (m, D, D)
    segmentation : Segmentation
    """
    pulses = ctrl.pulses
    if pulses:
        seg = pulses[0].segmentation
        for p in pulses[1:]:
            if p.segmentation != seg:
                raise ValueError(
                    "incompatible segmentations; call ControlSolution.on_joint_grid first"
                )
    else:
        seg = Segmentation([ctrl.duration])
    m = seg.count
    H = np.broadcast_to(ctrl.drift, (m,) + ctrl.drift.shape).astype(complex)
    for term in ctrl.drives:
        g = term.pulse.values[:, None, None]
        part = g * term.operator
        H = H + part + np.conj(np.swapaxes(part, -1, -2))
    for term in ctrl.shifts:
        H = H + term.pulse.values[:, None, None] * term.operator
    return H, seg


def matrix_exp_unitary(H, dt=1.0, check: bool = True):
    """Compute ``exp(-i H dt)`` for Hermitian ``H`` by eigendecomposition.

    Parameters
    ----------
    H : array_like, shape (..., D, D)
        Hermitian matrix or stack of matrices.
    dt : float or array_like
        Time step(s), broadcast against the leading axes of ``H``.
    check : bool
        Raise if ``H`` is not Hermitian within tolerance.
    """
    H = np.asarray(H, dtype=complex)
    dt = np.asarray(dt, dtype=float)
    if np.any(dt < 0):
        raise ValueError("time step must be non-negative")
    if check and not is_hermitian(H, atol=1e-10):
        raise ValueError("matrix is not Hermitian")
    w, V = np.linalg.eigh(H)
    phases = np.exp(-1j * w * dt[..., None])
    return (V * phases[..., None, :]) @ np.conj(np.swapaxes(V, -1, -2))


def optimal_infidelity(U_ctrl, U_target, P=None) -> FidelityValue:
    """Subspace gate infidelity ``1 - |Tr(U_target^dagger P U_ctrl) / Tr P|^2``.

    ``P`` defaults to the full projector. The result is independent of the
    global phase of ``U_ctrl``.
    """
    U_ctrl = np.asarray(U_ctrl, dtype=complex)
    U_target = np.asarray(U_target, dtype=complex)
    if U_ctrl.shape != U_target.shape:
        raise ValueError(f"dimension mismatch: {U_ctrl.shape} vs {U_target.shape}")
    P = _projector(P, U_ctrl.shape[0])
    overlap = frobenius_inner(P.diagonal[:, None] * U_target, U_ctrl) / P.trace
    return FidelityValue(1.0 - abs(overlap) ** 2, "optimal")


def _normalized(psi, name):
    psi = np.asarray(psi, dtype=complex).ravel()
    if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
        raise ValueError(f"{name} is not normalized")
    return psi


def state_fidelity(U, psi_initial, psi_final) -> float:
    """Transfer amplitude ``|<psi_final| U |psi_initial>|``."""
    U = np.asarray(U, dtype=complex)
    psi_i = _normalized(psi_initial, "psi_initial")
    psi_f = _normalized(psi_final, "psi_final")
    return float(min(abs(np.vdot(psi_f, U @ psi_i)), 1.0))


def robust_infidelity_mc(ctrl, channels, P=None, trials: int = 100, seed: int = 0, **kwargs):
    """Monte Carlo robust infidelity; see :func:`qctrlkit.simulator.robust_infidelity_mc`."""
    from .simulator import robust_infidelity_mc as _mc

    return _mc(ctrl, channels, P, trials=trials, seed=seed, **kwargs)


def _anti_hermitian_vector(op) -> np.ndarray:
    op = _square(op)
    if is_hermitian(op, atol=1e-10):
        op = 1j * op
    elif not np.allclose(op, -op.conj().T, atol=1e-10 * max(1.0, np.abs(op).max())):
        raise ValueError("generators must be Hermitian or anti-Hermitian")
    return np.concatenate([op.real.ravel(), op.imag.ravel()])


def _from_vector(vec, n):
    half = n * n
    return (vec[:half] + 1j * vec[half:]).reshape(n, n)


def controllability_rank(operators, threshold: float = 1e-9, max_rank: int = None) -> int:
    """Dimension of the real Lie algebra generated by ``operators``.

    Hermitian generators ``H`` are mapped to ``iH``. The algebra is closed
    under commutators with Gram-Schmidt orthogonalisation; a candidate is
    kept when its residual exceeds ``threshold`` times the largest generator
    norm. The final rank is the number of singular values above
    ``threshold`` times the largest.

    A system of dimension ``n`` is fully controllable when the rank is at
    least ``n**2 - 1``.
    """
    operators = [np.asarray(o, dtype=complex) for o in operators]
    if not operators:
        return 0
    n = operators[0].shape[0]
    if any(o.shape != (n, n) for o in operators):
        raise ValueError("all generators must share one dimension")
    max_rank = n * n if max_rank is None else max_rank

    vectors = [_anti_hermitian_vector(o) for o in operators]
    scale = max(np.linalg.norm(v) for v in vectors)
    if scale == 0:
        return 0
    basis: list[np.ndarray] = []

    def add(vec):
        norm = np.linalg.norm(vec)
        if norm == 0:
            return False
        v = vec / norm
        for _ in range(2):
            for b in basis:
                v = v - np.dot(b, v) * b
        if np.linalg.norm(v) > threshold:
            basis.append(v / np.linalg.norm(v))
            return True
        return False

    for v in vectors:
        add(v)
    frontier = list(range(len(basis)))
    while frontier and len(basis) < max_rank:
        new = []
        for i in frontier:
            Xi = _from_vector(basis[i], n)
            for j in range(len(basis)):
                if j == i:
                    continue
                Xj = _from_vector(basis[j], n)
                comm = Xi @ Xj - Xj @ Xi
                if add(np.concatenate([comm.real.ravel(), comm.imag.ravel()])):
                    new.append(len(basis) - 1)
                if len(basis) >= max_rank:
                    break
            if len(basis) >= max_rank:
                break
        frontier = new
    s = np.linalg.svd(np.array(basis), compute_uv=False)
    return int(np.sum(s > threshold * s[0]))
