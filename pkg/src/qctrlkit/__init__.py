"""Quantum control toolkit: PWC control Hamiltonians, noise synthesis, noisy
simulation, filter functions, gradient-based control optimization, noise
spectroscopy and Hamiltonian identification."""

__version__ = "0.1.0"

from .control import (  # noqa: E402
    ControlSolution,
    DriveTerm,
    FidelityValue,
    Projector,
    ShiftTerm,
    assemble_hamiltonian,
    controllability_rank,
    optimal_infidelity,
    state_fidelity,
)
from .filter_functions import filter_function, robust_infidelity_ff, toggling_frame  # noqa: E402
from .noise import OneSidedPsd, NoiseTimeSeries, periodogram, psd_from_function, time_series  # noqa: E402
from .pwc import PwcScalar, Segmentation, joint_segments  # noqa: E402
from .simulator import NoiseChannel, robust_infidelity_mc, simulate  # noqa: E402

__all__ = [
    "__version__",
    "ControlSolution",
    "DriveTerm",
    "ShiftTerm",
    "Projector",
    "FidelityValue",
    "assemble_hamiltonian",
    "optimal_infidelity",
    "state_fidelity",
    "controllability_rank",
    "filter_function",
    "toggling_frame",
    "robust_infidelity_ff",
    "OneSidedPsd",
    "NoiseTimeSeries",
    "time_series",
    "periodogram",
    "psd_from_function",
    "PwcScalar",
    "Segmentation",
    "joint_segments",
    "NoiseChannel",
    "simulate",
    "robust_infidelity_mc",
]
