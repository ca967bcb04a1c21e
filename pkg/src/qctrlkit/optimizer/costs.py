"""Differentiable cost components on PWC Hamiltonians.

All functions take segment Hamiltonians ``H`` of shape (m, D, D) and
segment durations and return JAX scalars, so they compose with
``jax.grad``.
"""

from __future__ import annotations

import numpy as np

from ._jax import dagger, expm_hermitian, jax, jnp

__all__ = [
    "propagator",
    "optimal_cost",
    "state_cost",
    "toggling_samples",
    "filter_values",
    "quasi_static_cost",
    "fixed_freq_cost",
    "band_cost",
    "duration_penalty",
]


def propagator(H, durations):
    """Total propagator ``prod_k exp(-i H_k tau_k)`` (latest segment on the left)."""
    steps = expm_hermitian(H, jnp.asarray(durations, dtype=float))

    def body(U, step):
        return step @ U, None

    D = H.shape[-1]
    U, _ = jax.lax.scan(body, jnp.eye(D, dtype=complex), steps)
    return U


def optimal_cost(H, durations, target, projector=None):
    """Subspace infidelity ``1 - |Tr(U_t^dag P U) / Tr P|^2``."""
    U = propagator(H, durations)
    target = jnp.asarray(target, dtype=complex)
    D = target.shape[0]
    p = jnp.ones(D) if projector is None else jnp.asarray(projector, dtype=float)
    overlap = jnp.sum(jnp.conj(p[:, None] * target) * U) / jnp.sum(p)
    return 1.0 - jnp.abs(overlap) ** 2


def state_cost(H, durations, psi_initial, psi_final):
    """State-transfer infidelity ``1 - |<psi_f| U |psi_i>|^2``."""
    U = propagator(H, durations)
    amp = jnp.vdot(jnp.asarray(psi_final, dtype=complex), U @ jnp.asarray(psi_initial, dtype=complex))
    return 1.0 - jnp.abs(amp) ** 2


def _sample_plan(durations, m):
    """Static sample times and the segment index of every sample."""
    durations = np.asarray(durations, dtype=float)
    tau = float(durations.sum())
    dt = tau / (m - 1)
    t = np.arange(m) * dt
    b = np.concatenate([[0.0], np.cumsum(durations)])
    idx = np.clip(np.searchsorted(b, t, side="right") - 1, 0, durations.size - 1)
    return t, dt, idx


def toggling_samples(H, durations, noise_operator, projector=None, m=1000):
    """Traceless control-frame noise operator at ``m`` uniform samples.

    Uses the stepped propagation of the numpy filter-function module:
    sample ``i`` is conjugated by the propagator accumulated through step
    ``i - 1`` before the step ``exp(-i H(t_i) dt)`` is applied.
    """
    t, dt, idx = _sample_plan(durations, m)
    D = H.shape[-1]
    steps = expm_hermitian(H, jnp.full(H.shape[0], dt))[idx]

    def body(U, step):
        return step @ U, U

    _, Us = jax.lax.scan(body, jnp.eye(D, dtype=complex), steps)
    N = jnp.asarray(noise_operator, dtype=complex)
    Nt = dagger(Us) @ N @ Us
    p = jnp.ones(D) if projector is None else jnp.asarray(projector, dtype=float)
    tr = jnp.einsum("l,ill->i", p, Nt) / jnp.sum(p)
    return Nt - tr[:, None, None] * jnp.eye(D), t, dt


def filter_values(H, durations, noise_operator, frequencies, projector=None, m=1000):
    """Filter function at the given angular frequencies (trapezoid DTFT)."""
    Nt, t, dt = toggling_samples(H, durations, noise_operator, projector, m)
    w = np.full(t.size, dt)
    w[0] = w[-1] = dt / 2
    freqs = np.atleast_1d(np.asarray(frequencies, dtype=float))
    phase = jnp.asarray(np.exp(1j * np.outer(freqs, t)) * w)
    D = Nt.shape[-1]
    G = (phase @ Nt.reshape(t.size, D * D)).reshape(freqs.size, D, D)
    p = jnp.ones(D) if projector is None else jnp.asarray(projector, dtype=float)
    return jnp.einsum("l,flq->f", p, jnp.abs(G) ** 2) / jnp.sum(p)


def quasi_static_cost(H, durations, noise_operators, projector=None, m=1000):
    """``sum_k F_k(0) / 2 pi`` over the listed noise operators."""
    total = 0.0
    for N in noise_operators:
        total = total + filter_values(H, durations, N, [0.0], projector, m)[0]
    return total / (2 * np.pi)


def fixed_freq_cost(H, durations, noise_operator, frequency, projector=None, m=1000):
    """``F(omega) / 2 pi`` at one frequency."""
    return filter_values(H, durations, noise_operator, [frequency], projector, m)[0] / (2 * np.pi)


def band_cost(H, durations, noise_operator, frequencies, psd_values, projector=None, m=1000):
    """``(1/2pi) int S(omega) F(omega) d omega`` by the trapezoid rule on ``frequencies``."""
    freqs = np.asarray(frequencies, dtype=float)
    F = filter_values(H, durations, noise_operator, freqs, projector, m)
    integrand = F * jnp.asarray(psd_values, dtype=float)
    return jnp.sum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(freqs)) / (2 * np.pi)


def duration_penalty(durations, max_duration, weight=1.0):
    """Quadratic hinge ``w * max(0, sum(durations) - max_duration)^2``."""
    excess = jnp.sum(durations) - max_duration
    return weight * jnp.where(excess > 0, excess, 0.0) ** 2
