"""Crosstalk-suppressing compilation of a five-qutrit circuit.

Always-on ZZ-type couplings between neighbouring qutrits are decoupled by
interleaving free-evolution periods with instantaneous single-qutrit
operations on the ``0-1`` and ``1-2`` transitions. The circuit is

    P_m exp(-i H_zz tau_m) ... P_1 exp(-i H_zz tau_1) P_0,

where each ``P_j`` is a product of ``k`` layers of simultaneous
single-qutrit unitaries ``exp(-i L)`` with
``L = sum_q sum_nu theta e^{i phi} C_nu^q + h.c.``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..optimizer._jax import expm_hermitian, jax, jnp
from ..optimizer.graph import CostGraph, register_op
from ._common import TWO_PI

__all__ = [
    "ZZ_COUPLINGS",
    "OMEGA",
    "C10",
    "C21",
    "controlled_phase",
    "pair_hamiltonian",
    "coupling_diagonal",
    "crosstalk_target",
    "CrosstalkProblem",
    "crosstalk_problem",
    "enforce_duration",
    "circuit_unitary",
    "circuit_infidelity",
    "baseline_infidelity",
    "split_variables",
]

# ZZ strengths per neighbouring pair, in units of 2 pi MHz:
# (alpha_11, alpha_12, alpha_21, alpha_22)
ZZ_COUPLINGS = np.array([
    [-0.27935, 0.1599, -0.52793, -0.74297],
    [-0.1382, 0.15827, -0.33507, -0.3418],
    [-0.276, -0.6313, 0.24327, -0.74777],
    [-0.26175, -0.49503, 0.14497, -0.70843],
])

OMEGA = np.exp(2j * np.pi / 3)
QUTRITS = 5
LEVELS = 3
# single-qutrit drive operators: (1/2)|1><0| and (1/2)|2><1|
C10 = 0.5 * np.array([[0, 0, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
C21 = 0.5 * np.array([[0, 0, 0], [0, 0, 0], [0, 1, 0]], dtype=complex)
_DRIVES = np.stack([C10, C21])


def controlled_phase() -> np.ndarray:
    """Two-qutrit phase gate, diagonal ``(1, 1, 1, 1, w*, w, 1, w, w*)``."""
    w = OMEGA
    return np.diag([1, 1, 1, 1, np.conj(w), w, 1, w, np.conj(w)]).astype(complex)


def pair_hamiltonian(alphas) -> np.ndarray:
    """Diagonal of the nine-level pair Hamiltonian on ``|11>, |12>, |21>, |22>``."""
    a11, a12, a21, a22 = alphas
    diag = np.zeros(9)
    diag[3 * 1 + 1], diag[3 * 1 + 2], diag[3 * 2 + 1], diag[3 * 2 + 2] = a11, a12, a21, a22
    return diag


def coupling_diagonal(couplings=None) -> np.ndarray:
    """Diagonal of ``H_zz`` on the 3^5 space, in the couplings' units."""
    couplings = ZZ_COUPLINGS if couplings is None else np.asarray(couplings, dtype=float)
    if couplings.shape != (QUTRITS - 1, 4):
        raise ValueError("expected one row of four couplings per neighbouring pair")
    total = np.zeros(LEVELS ** QUTRITS)
    for p, alphas in enumerate(couplings):
        left = np.ones(LEVELS ** p)
        right = np.ones(LEVELS ** (QUTRITS - p - 2))
        total += np.kron(np.kron(left, pair_hamiltonian(alphas)), right)
    return total


def crosstalk_target() -> np.ndarray:
    """Diagonal of ``U_Cphi (x) U_Cphi (x) I``."""
    cp = np.diag(controlled_phase())
    return np.kron(np.kron(cp, cp), np.ones(LEVELS))


@dataclass(frozen=True)
class CrosstalkProblem:
    """Configuration of the compilation problem.

    Times are in microseconds and couplings in rad/us (the ``ZZ_COUPLINGS`` values
    times 2 pi), which keeps the optimization variables of order one.
    """

    periods: int = 12
    layers: int = 2
    max_duration: float = 1.5
    penalty_weight: float = 10.0
    couplings: np.ndarray = field(default_factory=lambda: ZZ_COUPLINGS.copy())

    def __post_init__(self):
        if self.periods < 1 or self.layers < 1:
            raise ValueError("need at least one period and one layer")
        object.__setattr__(self, "couplings", np.asarray(self.couplings, dtype=float))

    @property
    def angle_count(self) -> int:
        return (self.periods + 1) * self.layers * QUTRITS * 2

    @property
    def hamiltonian_diagonal(self) -> np.ndarray:
        """``H_zz`` diagonal in rad/us."""
        return TWO_PI * coupling_diagonal(self.couplings)

    def to_dict(self) -> dict:
        return {"periods": self.periods, "layers": self.layers, "max_duration": self.max_duration,
                "penalty_weight": self.penalty_weight, "couplings": self.couplings.tolist()}


def _apply_layer(U, theta, phi):
    """Left-multiply ``U`` (3^5 x cols) by ``prod_q exp(-i L_q)``.

    ``theta`` and ``phi`` have shape (5, 2): qutrit by transition.
    """
    gamma = theta * jnp.exp(1j * phi)
    part = jnp.einsum("qn,nab->qab", gamma, _DRIVES)
    L = part + jnp.conj(jnp.swapaxes(part, -1, -2))
    gates = expm_hermitian(L, jnp.ones(QUTRITS))
    cols = U.shape[-1]
    T = U.reshape((LEVELS,) * QUTRITS + (cols,))
    for q in range(QUTRITS):
        T = jnp.moveaxis(jnp.tensordot(gates[q], T, axes=([1], [q])), 0, q)
    return T.reshape(LEVELS ** QUTRITS, cols)


def split_variables(problem: CrosstalkProblem, v):
    """``(taus, thetas, phis)`` with angle arrays of shape (m+1, k, 5, 2)."""
    m, n = problem.periods, problem.angle_count
    shape = (problem.periods + 1, problem.layers, QUTRITS, 2)
    return v[:m], v[m:m + n].reshape(shape), v[m + n:m + 2 * n].reshape(shape)


def _apply_gate(U, thetas, phis):
    """Apply the ``k`` layers of one product gate ``P_j`` (arrays of shape (k, 5, 2))."""
    for ell in range(thetas.shape[0]):
        U = _apply_layer(U, thetas[ell], phis[ell])
    return U


def _circuit(taus, thetas, phis, hzz):
    D = LEVELS ** QUTRITS
    U = _apply_gate(jnp.eye(D, dtype=complex), thetas[0], phis[0])

    # scanning over periods keeps the traced program small
    def period(U, inputs):
        tau, th, ph = inputs
        U = jnp.exp(-1j * hzz * tau)[:, None] * U
        return _apply_gate(U, th, ph), None

    U, _ = jax.lax.scan(period, U, (taus, thetas[1:], phis[1:]))
    return U


def _infidelity(U, target_diag):
    overlap = jnp.sum(jnp.conj(target_diag) * jnp.diagonal(U)) / target_diag.size
    return 1.0 - jnp.abs(overlap) ** 2


def _evaluate(params, taus, thetas, phis):
    shape = (params["periods"] + 1, params["layers"], QUTRITS, 2)
    hzz = TWO_PI * jnp.asarray(coupling_diagonal(np.asarray(params["couplings"])))
    U = _circuit(taus, thetas.reshape(shape), phis.reshape(shape), hzz)
    return _infidelity(U, jnp.asarray(crosstalk_target()))


def _meta(params, *inputs):
    return "scalar", None, None, None


register_op("crosstalk_infidelity", _evaluate, _meta)


def circuit_unitary(problem: CrosstalkProblem, taus, thetas, phis) -> np.ndarray:
    shape = (problem.periods + 1, problem.layers, QUTRITS, 2)
    return np.asarray(_circuit(jnp.asarray(taus, dtype=float), jnp.asarray(thetas, dtype=float).reshape(shape),
                               jnp.asarray(phis, dtype=float).reshape(shape),
                               jnp.asarray(problem.hamiltonian_diagonal)))


def circuit_infidelity(problem: CrosstalkProblem, taus, thetas, phis) -> float:
    """``1 - |Tr(U_target^dag U) / 3^5|^2`` for the given circuit variables."""
    U = circuit_unitary(problem, taus, thetas, phis)
    return float(_infidelity(jnp.asarray(U), jnp.asarray(crosstalk_target())))


def baseline_infidelity(problem: CrosstalkProblem = None, duration: float = None) -> float:
    """Infidelity of the uncompensated circuit: no control, free evolution only.

    ``duration`` (us) defaults to the duration cap.
    """
    problem = problem or CrosstalkProblem()
    duration = problem.max_duration if duration is None else duration
    U = np.exp(-1j * problem.hamiltonian_diagonal * duration)
    overlap = np.sum(np.conj(crosstalk_target()) * U) / U.size
    return float(1.0 - abs(overlap) ** 2)


def enforce_duration(problem: CrosstalkProblem, v) -> np.ndarray:
    """Copy of ``v`` with the waits scaled down uniformly so their total is at most the cap.

    The duration penalty is a soft hinge, so optimized circuits can overshoot
    the cap slightly; this projects them back onto it.
    """
    v = np.array(v, dtype=float)
    total = v[:problem.periods].sum()
    if total > problem.max_duration:
        v[:problem.periods] *= problem.max_duration / total
    return v


def crosstalk_problem(problem: CrosstalkProblem = None, **overrides) -> CostGraph:
    """Cost graph ``I_optimal + duration penalty`` for the compilation.

    Variables (in order): ``tau_1..tau_m`` (us, each in ``[0, 2 tau_max / m]``
    so that uniform initial points have total duration ``tau_max`` on
    average; the cap itself is enforced by the penalty), the
    rotation angles ``theta`` in ``[0, 2 pi]`` and the phases ``phi`` in
    ``[-2 pi, 2 pi]``, each angle block laid out as (period, layer, qutrit,
    transition).
    """
    if problem is None:
        problem = CrosstalkProblem(**overrides)
    elif overrides:
        raise ValueError("pass either a CrosstalkProblem or keyword overrides")
    g = CostGraph()
    taus = g.variables(problem.periods, 0.0, 2 * problem.max_duration / problem.periods, name="tau")
    thetas = g.variables(problem.angle_count, 0.0, TWO_PI, name="theta")
    phis = g.variables(problem.angle_count, -TWO_PI, TWO_PI, name="phi")
    infid = g.node("crosstalk_infidelity", [taus, thetas, phis], name="infidelity",
                   periods=problem.periods, layers=problem.layers,
                   couplings=problem.couplings.tolist())
    penalty = g.duration_penalty(taus, problem.max_duration, problem.penalty_weight, name="duration")
    g.set_output(g.weighted_sum([infid, penalty], name="cost"))
    return g
