"""Operators shared by the scenario builders."""

from __future__ import annotations

from functools import reduce

import numpy as np

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)

# gamma C + h.c. = (Re gamma / 2) sigma_x + (Im gamma / 2) sigma_y
QUBIT_DRIVE = 0.5 * np.array([[0, 0], [1, 0]], dtype=complex)

TWO_PI = 2 * np.pi


def kron_all(*ops) -> np.ndarray:
    return reduce(np.kron, ops)


def embed(op, site: int, sites: int, local_dim: int = 2) -> np.ndarray:
    """``I^(site) (x) op (x) I^(sites - site - 1)`` with zero-based ``site``."""
    eye = np.eye(local_dim, dtype=complex)
    return kron_all(*[op if k == site else eye for k in range(sites)])


def basis_state(index: int, dim: int) -> np.ndarray:
    psi = np.zeros(dim, dtype=complex)
    psi[index] = 1.0
    return psi
