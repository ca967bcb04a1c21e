"""Two-qubit dephasing probe sequences built from a fixed number of gates.

Qubits are ordered ``(a, b)`` with ``a`` the slow tensor index. Each gate
is one PWC segment of duration ``T_g`` generated by
``H_g = i log(U_g) / T_g`` (principal branch).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import schur

from ..control import ControlSolution, ShiftTerm
from ..pwc import PwcScalar, Segmentation
from ._common import IDENTITY2, SIGMA_X, SIGMA_Z

__all__ = [
    "GATES",
    "PROBE_NOISE",
    "BELL_STATE",
    "gate_generator",
    "probe_gates",
    "probe_unitaries",
    "two_qubit_probe",
    "probe_grid",
]

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)

GATES = {
    "I": np.eye(4, dtype=complex),
    "H_a": np.kron(_H, IDENTITY2),
    "H_ab": np.kron(_H, _H),
    "X_b": np.kron(IDENTITY2, SIGMA_X),
    "CNOT_ab": _CNOT,
}

# (Z_a - Z_b) / 2
PROBE_NOISE = 0.5 * (np.kron(SIGMA_Z, IDENTITY2) - np.kron(IDENTITY2, SIGMA_Z))
BELL_STATE = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)

_PREPARE = ["H_a", "CNOT_ab", "X_b"]          # U_E = X_b CNOT_ab H_a, H_a first
_SWAP = ["CNOT_ab", "H_ab", "CNOT_ab", "H_ab", "CNOT_ab"]


def gate_generator(U, duration: float) -> np.ndarray:
    """Hermitian ``H`` with ``exp(-i H duration) = U`` from the principal logarithm.

    Uses the complex Schur form, which is diagonal for unitary (normal)
    matrices, so eigenvalues ``-1`` map to phase ``+pi`` deterministically.
    """
    T, Z = schur(np.asarray(U, dtype=complex), output="complex")
    phases = np.angle(np.diag(T))
    phases = np.where(phases <= -np.pi + 1e-12, np.pi, phases)
    H = -(Z * phases) @ Z.conj().T / duration
    return 0.5 * (H + H.conj().T)


def probe_gates(i: int, j: int, total: int = 66) -> list:
    """Gate names of sequence ``(i, j)``.

    ``U_E``, ``i`` identities, ``SW``, ``j`` identities, ``SW``, the
    remaining identities, then ``U_E^dag`` (in time order).
    """
    fixed = 2 * len(_PREPARE) + 2 * len(_SWAP)
    i, j = int(i), int(j)
    if i < 0 or j < 0 or fixed + i + j > total:
        raise ValueError(f"need i, j >= 0 and {fixed} + i + j <= {total}")
    rest = total - fixed - i - j
    return (_PREPARE + ["I"] * i + _SWAP + ["I"] * j + _SWAP + ["I"] * rest
            + _PREPARE[::-1])


def probe_unitaries(names) -> np.ndarray:
    return np.array([GATES[n] for n in names])


def two_qubit_probe(i: int, j: int, gate_time: float = 110e-9, total: int = 66):
    """PWC realization of probe sequence ``(i, j)``.

    Every distinct non-identity gate becomes a shift term whose operator is
    its generator and whose pulse is 1 on the segments where it acts.

    Returns
    -------
    names : list of str
    ctrl : ControlSolution
    """
    names = probe_gates(i, j, total)
    seg = Segmentation.uniform(len(names), gate_time * len(names))
    shifts = []
    for gate in sorted(set(names) - {"I"}):
        values = np.array([1.0 if n == gate else 0.0 for n in names])
        shifts.append(ShiftTerm(PwcScalar(values, seg), gate_generator(GATES[gate], gate_time)))
    ctrl = ControlSolution(shifts=shifts, drift=np.zeros((4, 4)), duration=seg.duration)
    return names, ctrl


def probe_grid(step: int = 1, total: int = 66, max_sum: int = None):
    """All legal ``(i, j)`` with both indices multiples of ``step``."""
    limit = total - 16 if max_sum is None else max_sum
    return [(i, j) for i in range(0, limit + 1, step) for j in range(0, limit + 1 - i, step)]
