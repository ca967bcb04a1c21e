"""JAX primitives shared by the cost graph: x64 setup and a differentiable
exponential of Hermitian matrices."""

from __future__ import annotations

import jax

jax.config.update("jax_enable_x64", True)

import jax.numpy as jnp  # noqa: E402

__all__ = ["jax", "jnp", "expm_hermitian", "dagger"]


def dagger(a):
    return jnp.conj(jnp.swapaxes(a, -1, -2))


def _phi(w, dt):
    """Divided differences of ``f(x) = exp(-i x dt)`` on the eigenvalues.

    ``L_ab = (f(w_a) - f(w_b)) / (w_a - w_b)`` written in a form that is
    smooth through degeneracies: ``-i dt exp(-i (w_a + w_b) dt / 2) sinc``.
    """
    wa = w[..., :, None]
    wb = w[..., None, :]
    half = (wa - wb) * dt[..., None, None] / 2
    # jnp.sinc is the normalized sinc, sin(pi x)/(pi x)
    return -1j * dt[..., None, None] * jnp.exp(-1j * (wa + wb) * dt[..., None, None] / 2) * jnp.sinc(
        half / jnp.pi
    )


@jax.custom_jvp
def expm_hermitian(H, dt):
    """``exp(-i H dt)`` for Hermitian ``H`` (batched over leading axes).

    The derivative uses the Daleckii-Krein formula in the eigenbasis, which
    stays finite for degenerate spectra.
    """
    w, V = jnp.linalg.eigh(H)
    phases = jnp.exp(-1j * w * dt[..., None])
    return (V * phases[..., None, :]) @ dagger(V)


@expm_hermitian.defjvp
def _expm_hermitian_jvp(primals, tangents):
    H, dt = primals
    dH, ddt = tangents
    w, V = jnp.linalg.eigh(H)
    phases = jnp.exp(-1j * w * dt[..., None])
    U = (V * phases[..., None, :]) @ dagger(V)
    Vd = dagger(V)
    # derivative through H at fixed dt
    dHb = Vd @ dH @ V
    dU_H = V @ (_phi(w, dt) * dHb) @ Vd
    # derivative through dt: -i H U
    dU_t = -1j * (H @ U) * ddt[..., None, None]
    return U, dU_H + dU_t
