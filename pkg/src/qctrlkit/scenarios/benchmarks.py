"""Optimizer benchmark systems: a qubit inside a four-qubit register and a
linear Rydberg chain prepared into a GHZ state."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..optimizer.graph import CostGraph
from ._common import QUBIT_DRIVE, SIGMA_X, SIGMA_Z, TWO_PI, basis_state, embed, kron_all

__all__ = [
    "HADAMARD",
    "HadamardBenchmark",
    "RydbergBenchmark",
    "hadamard_problem",
    "rydberg_operators",
    "rydberg_interaction",
    "ghz_state",
    "rydberg_problem",
    "benchmark_systems",
]

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class HadamardBenchmark:
    """Three-axis control of the first of four qubits."""

    qubits: int = 4
    segments: int = 64
    duration: float = 0.5
    drive_max: float = TWO_PI * 2.0
    shift_max: float = TWO_PI * 2.0
    dephasing: float = TWO_PI * 1.0

    @property
    def dimension(self) -> int:
        return 2 ** self.qubits

    def operators(self):
        """Drive operator ``|1><0|/2 (x) I``, shift ``sigma_z/2 (x) I`` and drift."""
        C = embed(QUBIT_DRIVE, 0, self.qubits)
        A = embed(0.5 * SIGMA_Z, 0, self.qubits)
        return C, A, self.dephasing * A

    @property
    def target(self) -> np.ndarray:
        return embed(HADAMARD, 0, self.qubits)


def hadamard_problem(config: HadamardBenchmark = None) -> CostGraph:
    """Optimal-cost graph; the complex bound ``|I + iQ| <= max`` is imposed in polar form."""
    config = config or HadamardBenchmark()
    C, A, drift = config.operators()
    m = config.segments
    g = CostGraph()
    # amplitudes are optimized in units of their bounds
    modulus = g.scale(g.variables(m, 0.0, 1.0, name="modulus"), config.drive_max)
    phase = g.variables(m, -np.pi, np.pi, name="phase")
    alpha = g.scale(g.variables(m, -1.0, 1.0, name="alpha"), config.shift_max)
    gamma = g.polar(g.pwc(modulus, config.duration), g.pwc(phase, config.duration), name="gamma")
    H = g.operator_sum([
        g.drive(gamma, C),
        g.shift(g.pwc(alpha, config.duration), A),
        g.static_operator(drift, config.duration),
    ], name="hamiltonian")
    g.set_output(g.optimal_cost(H, config.target, name="infidelity"))
    return g


@dataclass(frozen=True)
class RydbergBenchmark:
    """Chain of ``atoms`` two-level Rydberg atoms with global controls."""

    atoms: int = 4
    segments: int = 40
    duration: float = 1.1e-6
    rabi_max: float = TWO_PI * 5e6
    detuning_max: float = TWO_PI * 20e6
    interaction: float = TWO_PI * 24e6
    edge_detuning: float = -TWO_PI * 4.5e6

    @property
    def dimension(self) -> int:
        return 2 ** self.atoms


def rydberg_operators(atoms: int):
    """Single-atom ``sigma_x`` and ``n = |1><1|`` embedded at each site."""
    n = np.diag([0.0, 1.0]).astype(complex)
    return [embed(SIGMA_X, i, atoms) for i in range(atoms)], [embed(n, i, atoms) for i in range(atoms)]


def rydberg_interaction(config: RydbergBenchmark) -> np.ndarray:
    """Fixed part ``-sum_i delta_i n_i + sum_{i<j} V / |i-j|^6 n_i n_j``."""
    _, ns = rydberg_operators(config.atoms)
    H = np.zeros((config.dimension,) * 2, dtype=complex)
    deltas = np.zeros(config.atoms)
    deltas[[0, -1]] = config.edge_detuning
    for i in range(config.atoms):
        H -= deltas[i] * ns[i]
        for j in range(i + 1, config.atoms):
            H += config.interaction / abs(i - j) ** 6 * ns[i] @ ns[j]
    return H


def ghz_state(atoms: int) -> np.ndarray:
    """``(|0101...> + |1010...>) / sqrt(2)``."""
    a = [0, 1] * atoms
    b = [1, 0] * atoms
    up = [basis_state(s, 2) for s in a[:atoms]]
    down = [basis_state(s, 2) for s in b[:atoms]]
    return (kron_all(*up) + kron_all(*down)) / np.sqrt(2)


def rydberg_problem(config: RydbergBenchmark = None) -> CostGraph:
    """State-transfer cost ``1 - |<GHZ| U |00...0>|^2``.

    The target is the state-preparation map ``|GHZ><00...0|``; it is not
    unitary, so the state-transfer form is used instead of the subspace
    gate infidelity.
    The Rabi rate and the global detuning are real PWC controls; the Rabi
    term enters as a shift on ``sum_i sigma_x / 2`` and the detuning as a
    shift on ``-sum_i n_i``.
    """
    config = config or RydbergBenchmark()
    xs, ns = rydberg_operators(config.atoms)
    g = CostGraph()
    # controls are optimized in units of their bounds
    rabi = g.scale(g.variables(config.segments, -1.0, 1.0, name="rabi"), config.rabi_max)
    detuning = g.scale(g.variables(config.segments, -1.0, 1.0, name="detuning"), config.detuning_max)
    H = g.operator_sum([
        g.shift(g.pwc(rabi, config.duration), 0.5 * sum(xs)),
        g.shift(g.pwc(detuning, config.duration), -sum(ns)),
        g.static_operator(rydberg_interaction(config), config.duration),
    ], name="hamiltonian")
    g.set_output(g.state_cost(H, basis_state(0, config.dimension), ghz_state(config.atoms), name="infidelity"))
    return g


def benchmark_systems(atoms: int = 4):
    """The two benchmark configurations and their cost graphs."""
    a, b = HadamardBenchmark(), RydbergBenchmark(atoms=atoms)
    return {"hadamard": (a, hadamard_problem(a)), "rydberg": (b, rydberg_problem(b))}
