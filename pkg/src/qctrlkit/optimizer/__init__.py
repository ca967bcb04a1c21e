"""Gradient-based optimization of composable cost graphs."""

from .costs import (
    band_cost,
    duration_penalty,
    fixed_freq_cost,
    optimal_cost,
    propagator,
    quasi_static_cost,
    state_cost,
)
from .graph import CostGraph, Node, register_op
from .minimize import OptimizationResult, StopCriteria, finite_difference_gradient, minimize
from .transforms import (
    DeltaKernel,
    RCKernel,
    SampledKernel,
    SincKernel,
    crab_waveform,
    interleave_mask,
    lti_filter,
    pwc_scalar,
    symmetrize,
)


def gradient(graph: CostGraph, v):
    """Exact gradient of ``graph`` at ``v``."""
    return graph.gradient(v)


__all__ = [
    "CostGraph",
    "Node",
    "register_op",
    "OptimizationResult",
    "StopCriteria",
    "minimize",
    "gradient",
    "finite_difference_gradient",
    "pwc_scalar",
    "lti_filter",
    "crab_waveform",
    "symmetrize",
    "interleave_mask",
    "SincKernel",
    "RCKernel",
    "DeltaKernel",
    "SampledKernel",
    "optimal_cost",
    "state_cost",
    "quasi_static_cost",
    "fixed_freq_cost",
    "band_cost",
    "duration_penalty",
    "propagator",
]
