"""Maximum-likelihood estimation of Hamiltonian parameters.

Each experiment prepares a state, evolves it under a PWC Hamiltonian that
depends linearly on unknown parameters ``theta`` and measures an
observable. With Gaussian measurement noise the negative log-likelihood is

    C(theta) = sum_m (Y_m(theta) - y_m)^2 / (2 dy_m^2),

whose Hessian at the minimum is the Fisher information; its inverse bounds
the covariance of the estimate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .control import is_hermitian
from .noise import rng_for
from .optimizer._jax import expm_hermitian, jax, jnp
from .optimizer.minimize import StopCriteria, minimize

__all__ = [
    "Experiment",
    "DataSet",
    "EstimationResult",
    "predicted_values",
    "likelihood_cost",
    "fisher_information",
    "gauss_newton_information",
    "identify",
    "simulate_data",
]


@dataclass(frozen=True)
class Experiment:
    """One measurement setting.

    The Hamiltonian on segment ``k`` is
    ``H_k(theta) = static[k] + sum_p theta_p generators[p]``.

    Parameters
    ----------
    durations : array_like
        Segment durations (a single wait time is a one-segment experiment).
    initial_state : array_like
        Normalized state vector.
    observable : array_like
        Hermitian operator.
    generators : array_like, shape (P, D, D)
        Hermitian generators multiplying the unknown parameters.
    static : array_like, shape (segments, D, D), optional
        Known control Hamiltonian on each segment (zero when omitted).
    """

    durations: np.ndarray
    initial_state: np.ndarray
    observable: np.ndarray
    generators: np.ndarray
    static: np.ndarray = None

    def __post_init__(self):
        durations = np.atleast_1d(np.asarray(self.durations, dtype=float))
        if np.any(durations < 0):
            raise ValueError("durations must be non-negative")
        psi = np.asarray(self.initial_state, dtype=complex).ravel()
        if abs(np.linalg.norm(psi) - 1) > 1e-9:
            raise ValueError("initial state must be normalized")
        O = np.asarray(self.observable, dtype=complex)
        if not is_hermitian(O, 1e-10):
            raise ValueError("observable must be Hermitian")
        G = np.asarray(self.generators, dtype=complex)
        if G.ndim == 2:
            G = G[None]
        if not is_hermitian(G, 1e-10):
            raise ValueError("generators must be Hermitian")
        D = psi.size
        if O.shape != (D, D) or G.shape[1:] != (D, D):
            raise ValueError("operator dimensions do not match the state")
        static = np.zeros((durations.size, D, D), complex) if self.static is None \
            else np.asarray(self.static, dtype=complex).reshape(durations.size, D, D)
        for name, val in [("durations", durations), ("initial_state", psi), ("observable", O),
                          ("generators", G), ("static", static)]:
            object.__setattr__(self, name, val)

    @property
    def duration(self) -> float:
        return float(self.durations.sum())

    @property
    def parameter_count(self) -> int:
        return self.generators.shape[0]


@dataclass(frozen=True)
class DataSet:
    """Measured means ``y`` and their standard deviations ``dy``."""

    values: np.ndarray
    uncertainties: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.values, dtype=float).ravel()
        dy = np.broadcast_to(np.asarray(self.uncertainties, dtype=float), y.shape).copy()
        if np.any(dy <= 0):
            raise ValueError("measurement uncertainties must be positive")
        object.__setattr__(self, "values", y)
        object.__setattr__(self, "uncertainties", dy)


@dataclass
class EstimationResult:
    """Maximum-likelihood estimate and its Cramer-Rao covariance.

    Attributes
    ----------
    theta : ndarray
    covariance : ndarray or None
        Inverse Fisher information; ``None`` when the Fisher matrix is
        singular.
    errors : ndarray or None
        ``2 sqrt(diag(covariance))``.
    cost : float
    fisher : ndarray
    starts : int
    indefinite : bool
        True when the Fisher matrix has a negative eigenvalue beyond
        tolerance (the estimate may not be a minimum).
    """

    theta: np.ndarray
    covariance: np.ndarray
    errors: np.ndarray
    cost: float
    fisher: np.ndarray
    starts: int
    indefinite: bool = False
    start_costs: np.ndarray = field(default=None, repr=False)

    def to_dict(self):
        return {
            "theta": self.theta.tolist(),
            "covariance": None if self.covariance is None else self.covariance.tolist(),
            "errors": None if self.errors is None else self.errors.tolist(),
            "cost": self.cost,
            "fisher": self.fisher.tolist(),
            "starts": self.starts,
            "indefinite": self.indefinite,
        }


def _stack(experiments):
    """Group experiments by (segment count, dimension) for batched evaluation."""
    groups = {}
    for i, e in enumerate(experiments):
        key = (e.durations.size, e.initial_state.size, e.parameter_count)
        groups.setdefault(key, []).append(i)
    batches = []
    for key, idx in groups.items():
        es = [experiments[i] for i in idx]
        batches.append({
            "index": np.array(idx),
            "durations": np.stack([e.durations for e in es]),
            "psi": np.stack([e.initial_state for e in es]),
            "O": np.stack([e.observable for e in es]),
            "G": np.stack([e.generators for e in es]),
            "static": np.stack([e.static for e in es]),
        })
    return batches


def _predict_jax(theta, batches, count):
    out = jnp.zeros(count)
    for b in batches:
        # H[e, k] = static[e, k] + sum_p theta_p G[e, p]
        H = jnp.asarray(b["static"]) + jnp.einsum("p,epij->eij", theta, jnp.asarray(b["G"]))[:, None]
        U_seg = expm_hermitian(H, jnp.asarray(b["durations"]))
        psi = jnp.asarray(b["psi"])
        for k in range(b["durations"].shape[1]):
            psi = jnp.einsum("eij,ej->ei", U_seg[:, k], psi)
        y = jnp.real(jnp.einsum("ei,eij,ej->e", jnp.conj(psi), jnp.asarray(b["O"]), psi))
        out = out.at[b["index"]].set(y)
    return out


def predicted_values(theta, experiments) -> np.ndarray:
    """Noise-free expectation values ``<psi| U^dag O U |psi>`` for every experiment."""
    theta = np.asarray(theta, dtype=float)
    batches = _stack(experiments)
    return np.asarray(_predict_jax(jnp.asarray(theta), batches, len(experiments)))


def likelihood_cost(theta, data: DataSet, experiments) -> float:
    """Gaussian negative log-likelihood up to a constant."""
    if len(data.values) != len(experiments):
        raise ValueError("one data point per experiment is required")
    Y = predicted_values(theta, experiments)
    return float(np.sum((Y - data.values) ** 2 / (2 * data.uncertainties ** 2)))


def _cost_function(data, experiments):
    batches = _stack(experiments)
    y = jnp.asarray(data.values)
    w = jnp.asarray(1.0 / (2 * data.uncertainties ** 2))
    n = len(experiments)

    def cost(theta):
        return jnp.sum(w * (_predict_jax(theta, batches, n) - y) ** 2)

    return jax.jit(cost), jax.jit(jax.value_and_grad(cost))


def fisher_information(cost, theta, step: float = 1e-4, richardson: bool = True) -> np.ndarray:
    """Symmetrized central finite-difference Hessian of ``cost`` at ``theta``.

    The step along coordinate ``i`` is ``step * max(|theta_i|, 1)``. With
    ``richardson`` the estimate is refined once by combining steps ``h``
    and ``h/2``.
    """
    theta = np.asarray(theta, dtype=float)
    n = theta.size
    h0 = step * np.maximum(np.abs(theta), 1.0)

    def hessian(h):
        Hm = np.empty((n, n))
        f0 = cost(theta)
        for i in range(n):
            ei = np.zeros(n)
            ei[i] = h[i]
            Hm[i, i] = (cost(theta + ei) - 2 * f0 + cost(theta - ei)) / h[i] ** 2
            for j in range(i + 1, n):
                ej = np.zeros(n)
                ej[j] = h[j]
                val = (cost(theta + ei + ej) - cost(theta + ei - ej)
                       - cost(theta - ei + ej) + cost(theta - ei - ej)) / (4 * h[i] * h[j])
                Hm[i, j] = Hm[j, i] = val
        return Hm

    H = hessian(h0)
    if richardson:
        H = (4 * hessian(h0 / 2) - H) / 3
    return 0.5 * (H + H.T)


def gauss_newton_information(theta, data: DataSet, experiments, step: float = 1e-6) -> np.ndarray:
    """``J^T W J`` with the Jacobian of the predictions and ``W = 1/dy^2``."""
    theta = np.asarray(theta, dtype=float)
    batches = _stack(experiments)
    J = np.asarray(jax.jacfwd(lambda t: _predict_jax(t, batches, len(experiments)))(jnp.asarray(theta)))
    return J.T @ (J / data.uncertainties[:, None] ** 2)


def _spectral_width(theta, generators) -> float:
    """Largest eigenvalue gap of ``sum_p theta_p G_p``."""
    ev = np.linalg.eigvalsh(np.einsum("p,pij->ij", theta, generators))
    return float(ev[-1] - ev[0])


def _fold(theta, generators, band_limit):
    """Alias of ``theta`` with eigenvalue gaps folded into ``[-band, band)``.

    Sampling at spacing ``pi / band`` cannot distinguish gaps that differ by
    ``2 band``; the folded Hamiltonian is projected back onto the span of
    the generators by least squares.
    """
    H = np.einsum("p,pij->ij", theta, generators)
    ev, V = np.linalg.eigh(H)
    period = 2 * band_limit
    gaps = ev - ev[0]
    folded = ev[0] + (gaps + band_limit) % period - band_limit
    H_f = (V * folded) @ V.conj().T
    A = generators.reshape(generators.shape[0], -1).T
    A = np.concatenate([A.real, A.imag])
    b = np.concatenate([H_f.ravel().real, H_f.ravel().imag])
    return np.linalg.lstsq(A, b, rcond=None)[0]


def identify(experiments, data: DataSet, bounds=None, starts: int = 30, seed: int = 0,
             init_bound: float = None, stop: StopCriteria = None, step: float = 1e-4,
             band_limit="nyquist") -> EstimationResult:
    """Multi-start maximum-likelihood estimate with Cramer-Rao error bars.

    Parameters
    ----------
    experiments : sequence of Experiment
    data : DataSet
    bounds : (lower, upper), optional
        Parameter bounds; unbounded when omitted.
    starts : int
        Random starts (default 30).
    seed : int
    init_bound : float, optional
        Initial parameters are drawn uniformly from ``[-b, b]``. Defaults to
        ``pi / dt`` with ``dt`` the smallest spacing between distinct
        experiment durations (the Nyquist rate of the wait-time grid).
    step : float
        Relative finite-difference step for the Fisher information.
    band_limit : "nyquist", float or None
        Largest admissible eigenvalue gap of ``sum_p theta_p G_p``. Faster
        dynamics alias onto the wait-time grid and fit the data equally
        well; an out-of-band estimate is folded back into the band and
        re-polished, and the folded point is kept when its cost matches.
        ``"nyquist"`` uses ``pi / dt`` of the wait-time grid.
    """
    experiments = list(experiments)
    if len(data.values) != len(experiments):
        raise ValueError("one data point per experiment is required")
    P = experiments[0].parameter_count
    times = np.unique(np.round([e.duration for e in experiments], 15))
    spacing = np.diff(times)
    spacing = spacing[spacing > 0]
    nyquist = np.pi / spacing.min() if spacing.size else None
    if bounds is None:
        bounds = (np.full(P, -np.inf), np.full(P, np.inf))
    lower, upper = (np.broadcast_to(np.asarray(b, dtype=float), (P,)) for b in bounds)
    if init_bound is None:
        if nyquist is None:
            raise ValueError("cannot infer the Nyquist bound from a single duration; pass init_bound")
        init_bound = nyquist
    if isinstance(band_limit, str):
        if band_limit != "nyquist":
            raise ValueError("band_limit must be 'nyquist', a number or None")
        band_limit = nyquist
    lo = np.maximum(lower, -init_bound)
    hi = np.minimum(upper, init_bound)

    f, fg = _cost_function(data, experiments)
    scale = init_bound

    # optimize in units of init_bound so that gradients are O(1)
    def scaled(x):
        v, g = fg(jnp.asarray(x * scale))
        return float(v), np.asarray(g) * scale

    stop = stop or StopCriteria(max_iter=2000, grad_tol=1e-10, cost_tol=1e-15)
    res = minimize(scaled, (lower / scale, upper / scale), starts=starts, seed=seed, stop=stop,
                   initializer=lambda rng: rng.uniform(lo, hi) / scale)
    theta = np.clip(res.x * scale, lower, upper)
    cost = float(f(jnp.asarray(theta)))
    if band_limit is not None:
        G = experiments[0].generators
        if _spectral_width(theta, G) > band_limit * (1 + 1e-9):
            folded = _fold(theta, G, band_limit)
            polished = minimize(scaled, (lower / scale, upper / scale), starts=1, seed=seed, stop=stop,
                                x0=folded / scale)
            candidate = np.clip(polished.x * scale, lower, upper)
            value = float(f(jnp.asarray(candidate)))
            if value <= cost * (1 + 1e-6) + 1e-12 and _spectral_width(candidate, G) <= band_limit * (1 + 1e-6):
                theta, cost = candidate, value
            else:
                warnings.warn("estimate lies outside the band limit and no in-band alias was found",
                              RuntimeWarning)
    fisher = fisher_information(lambda t: float(f(jnp.asarray(t))), theta, step)
    eig = np.linalg.eigvalsh(fisher)
    indefinite = bool(eig.min() < -1e-8 * max(abs(np.trace(fisher)), 1e-300))
    covariance = errors = None
    if eig.min() > 1e-12 * max(eig.max(), 1e-300):
        covariance = np.linalg.inv(fisher)
        covariance = 0.5 * (covariance + covariance.T)
        errors = 2 * np.sqrt(np.clip(np.diag(covariance), 0, None))
    else:
        warnings.warn("Fisher information is singular; covariance unavailable", RuntimeWarning)
    return EstimationResult(theta, covariance, errors, cost, fisher, starts, indefinite, res.start_costs)


def simulate_data(theta, experiments, sigma: float, seed: int, uncertainty: float = None) -> DataSet:
    """Synthetic measurements: exact predictions plus Gaussian noise of width ``sigma``.

    The recorded uncertainty is ``uncertainty`` if given, otherwise ``sigma``.
    """
    Y = predicted_values(theta, experiments)
    noise = rng_for(seed, 0).normal(0.0, sigma, size=Y.shape) if sigma > 0 else 0.0
    dy = sigma if uncertainty is None else uncertainty
    return DataSet(Y + noise, np.full(Y.shape, dy))
