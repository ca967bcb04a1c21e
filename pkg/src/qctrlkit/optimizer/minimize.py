"""Bounded multi-start quasi-Newton minimization."""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from ..noise import rng_for
from .graph import CostGraph

__all__ = ["StopCriteria", "OptimizationResult", "minimize", "finite_difference_gradient"]


@dataclass(frozen=True)
class StopCriteria:
    """Stopping rules for each start."""

    max_iter: int = 10000
    grad_tol: float = 1e-5
    cost_tol: float = 0.0
    target_cost: float = None


@dataclass
class OptimizationResult:
    """Outcome of a multi-start optimization.

    Attributes
    ----------
    x : ndarray
        Best variables found.
    cost : float
        Best cost (minimum over successful starts).
    history : list of ndarray
        Best-so-far cost after every iteration, one array per start.
    start_costs : ndarray
        Final cost of every start (``nan`` for failed starts).
    failures : dict
        Start index to error message for starts that failed.
    seed : int
    iterations, evaluations : ndarray
        Per-start counts.
    wall_time : float
    """

    x: np.ndarray
    cost: float
    history: list
    start_costs: np.ndarray
    failures: dict
    seed: int
    iterations: np.ndarray
    evaluations: np.ndarray
    wall_time: float = 0.0
    messages: list = field(default_factory=list)

    @property
    def best_start(self) -> int:
        return int(np.nanargmin(self.start_costs))

    def to_dict(self) -> dict:
        return {
            "x": self.x.tolist(),
            "cost": self.cost,
            "start_costs": [None if np.isnan(c) else float(c) for c in self.start_costs],
            "failures": {str(k): v for k, v in self.failures.items()},
            "seed": self.seed,
            "iterations": self.iterations.tolist(),
            "evaluations": self.evaluations.tolist(),
            "wall_time": self.wall_time,
        }


def _objective(objective):
    if isinstance(objective, CostGraph):
        return objective.value_and_grad
    if callable(objective):
        return objective
    raise TypeError("objective must be a CostGraph or a callable returning (value, gradient)")


def _initial_point(rng, lower, upper, init_scale):
    lo = np.where(np.isfinite(lower), lower, np.where(np.isfinite(upper), upper - 2 * init_scale, -init_scale))
    hi = np.where(np.isfinite(upper), upper, np.where(np.isfinite(lower), lower + 2 * init_scale, init_scale))
    return rng.uniform(lo, hi)


def minimize(objective, bounds=None, starts: int = 1, seed: int = 0, stop: StopCriteria = None,
             x0=None, init_scale: float = 1.0, initializer=None) -> OptimizationResult:
    """Multi-start L-BFGS-B.

    Parameters
    ----------
    objective : CostGraph or callable
        A graph, or ``f(x) -> (value, gradient)``.
    bounds : (lower, upper), optional
        Defaults to the graph's variable bounds.
    starts : int
        Number of independent starts.
    seed : int
        Start ``s`` draws its initial point from stream ``(seed, s)``,
        uniformly within the bounds (``init_scale`` sets the range along
        unbounded directions).
    stop : StopCriteria, optional
    x0 : array_like, optional
        Initial point for the first start; other starts are random.
    initializer : callable, optional
        ``initializer(rng) -> x`` replacing the uniform draw.

    Returns
    -------
    OptimizationResult
    """
    if starts < 1:
        raise ValueError("starts must be at least 1")
    stop = stop or StopCriteria()
    fun = _objective(objective)
    if bounds is None:
        if not isinstance(objective, CostGraph):
            raise ValueError("bounds are required for callable objectives")
        bounds = objective.bounds
    lower, upper = (np.asarray(b, dtype=float) for b in bounds)
    scipy_bounds = [(lo if np.isfinite(lo) else None, hi if np.isfinite(hi) else None)
                    for lo, hi in zip(lower, upper)]

    t0 = time.perf_counter()
    history, costs, failures, iters, evals, xs, messages = [], [], {}, [], [], [], []
    for s in range(starts):
        rng = rng_for(seed, s)
        if s == 0 and x0 is not None:
            start = np.clip(np.asarray(x0, dtype=float), lower, upper)
        elif initializer is not None:
            start = np.clip(np.asarray(initializer(rng), dtype=float), lower, upper)
        else:
            start = _initial_point(rng, lower, upper, init_scale)
        trace = []
        count = [0]
        last = {}

        def wrapped(x):
            key = np.asarray(x, dtype=float).tobytes()
            if key in last:
                return last[key]
            count[0] += 1
            value, grad = fun(np.clip(x, lower, upper))
            value = float(value)
            if not np.isfinite(value) or not np.all(np.isfinite(grad)):
                raise FloatingPointError("non-finite cost or gradient")
            last.clear()
            last[key] = (value, np.asarray(grad, dtype=float))
            return last[key]

        best = [np.inf]

        # scipy ends the run cleanly when the callback raises StopIteration
        def record(xk):
            value = wrapped(xk)[0]
            best[0] = min(best[0], value)
            trace.append(best[0])
            if stop.target_cost is not None and best[0] <= stop.target_cost:
                raise StopIteration

        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                res = _scipy_minimize(
                    wrapped, start, jac=True, method="L-BFGS-B", bounds=scipy_bounds,
                    callback=record,
                    options={"maxiter": stop.max_iter, "gtol": stop.grad_tol, "ftol": stop.cost_tol,
                             "maxfun": 20 * stop.max_iter},
                )
            x = np.clip(res.x, lower, upper)
            value = wrapped(x)[0]
            messages.append(str(res.message))
            iters.append(int(res.nit))
        except Exception as exc:  # noqa: BLE001  (a failed start is recorded, not fatal)
            failures[s] = f"{type(exc).__name__}: {exc}"
            history.append(np.array(trace))
            costs.append(np.nan)
            iters.append(len(trace))
            evals.append(count[0])
            xs.append(None)
            messages.append(failures[s])
            continue
        history.append(np.array(trace if trace else [value]))
        costs.append(value)
        evals.append(count[0])
        xs.append(x)
    costs = np.array(costs, dtype=float)
    if np.all(np.isnan(costs)):
        raise RuntimeError(f"all {starts} starts failed: {failures}")
    best = int(np.nanargmin(costs))
    return OptimizationResult(xs[best], float(costs[best]), history, costs, failures, seed,
                              np.array(iters), np.array(evals), time.perf_counter() - t0, messages)


def finite_difference_gradient(fun, x, step: float = 1e-6, relative: bool = True) -> np.ndarray:
    """Central finite-difference gradient of a scalar function.

    The step for coordinate ``i`` is ``step * max(|x_i|, 1)`` when
    ``relative`` is true.
    """
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        h = step * max(abs(x[i]), 1.0) if relative else step
        e = np.zeros_like(x)
        e[i] = h
        grad[i] = (fun(x + e) - fun(x - e)) / (2 * h)
    return grad
