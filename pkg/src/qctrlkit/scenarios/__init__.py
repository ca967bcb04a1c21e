"""Builders for the concrete physical systems used as fixtures and benchmarks.

:data:`SCENARIOS` maps a name to ``build(params) -> artifact``, where the
artifact is a JSON-ready dictionary consumed by the command-line tools: a
control (``"type": "control"``), an optimization problem (``"problem"``) or
an identification setup (``"experiments"``).
"""

from __future__ import annotations

import numpy as np

from ..io import channels_to_dict, control_to_dict, experiments_to_dict
from .benchmarks import (
    HadamardBenchmark,
    RydbergBenchmark,
    benchmark_systems,
    ghz_state,
    hadamard_problem,
    rydberg_interaction,
    rydberg_problem,
)
from .cpmg import DEPHASING, cpmg_sequence, pulse_centers
from .crosstalk import (
    CrosstalkProblem,
    baseline_infidelity,
    circuit_infidelity,
    controlled_phase,
    crosstalk_problem,
)
from .drag import DragConfig, QutritSystem, calibrate_amplitude, drag_noise_channels, drag_qutrit
from .iswap import ISWAP_NOISE, IswapConfig, coupling_rate, iswap_system
from .probe import PROBE_NOISE, probe_grid, two_qubit_probe
from .sysid import ThreeAxisConfig, three_axis_experiments, TRUE_RATES

__all__ = [
    "SCENARIOS",
    "build",
    "cpmg_sequence",
    "pulse_centers",
    "DEPHASING",
    "DragConfig",
    "QutritSystem",
    "drag_qutrit",
    "calibrate_amplitude",
    "drag_noise_channels",
    "IswapConfig",
    "iswap_system",
    "coupling_rate",
    "ISWAP_NOISE",
    "two_qubit_probe",
    "probe_grid",
    "PROBE_NOISE",
    "CrosstalkProblem",
    "crosstalk_problem",
    "circuit_infidelity",
    "baseline_infidelity",
    "controlled_phase",
    "HadamardBenchmark",
    "RydbergBenchmark",
    "hadamard_problem",
    "rydberg_problem",
    "rydberg_interaction",
    "ghz_state",
    "benchmark_systems",
    "ThreeAxisConfig",
    "three_axis_experiments",
]


def _problem(graph, starts, stop=None, metadata=None):
    out = {"type": "problem", "graph": graph.to_dict(), "starts": int(starts)}
    if stop:
        out["stop"] = stop
    if metadata:
        out["metadata"] = metadata
    return out


def _cpmg(params):
    ctrl = cpmg_sequence(params.get("order", 1), params.get("duration", 1e-6),
                         params.get("pulse_width"), params.get("phase", 0.0))
    return control_to_dict(ctrl, [DEPHASING], metadata={"scenario": "cpmg", "params": params})


def _drag(params):
    ctrl, channels, config = drag_qutrit(DragConfig(**params))
    out = control_to_dict(ctrl, [QutritSystem(config.anharmonicity).dephasing],
                          metadata={"scenario": "drag", "params": config.to_dict()})
    out["noise"] = channels_to_dict(channels)
    return out


def _iswap(params):
    ctrl, N = iswap_system(IswapConfig(**params))
    return control_to_dict(ctrl, [N], metadata={"scenario": "iswap", "params": params})


def _probe(params):
    names, ctrl = two_qubit_probe(params.get("i", 0), params.get("j", 0),
                                  params.get("gate_time", 110e-9), params.get("total", 66))
    return control_to_dict(ctrl, [PROBE_NOISE], metadata={"scenario": "probe", "params": params,
                                                          "gates": names})


def _crosstalk(params):
    params = dict(params)
    starts = params.pop("starts", 8)
    problem = CrosstalkProblem(**params)
    return _problem(crosstalk_problem(problem), starts, {"max_iter": 5000, "target_cost": 5e-3},
                    {"scenario": "crosstalk", "params": problem.to_dict(), "time_unit": "us",
                     "baseline_infidelity": baseline_infidelity(problem)})


def _hadamard(params):
    params = dict(params)
    starts = params.pop("starts", 20)
    config = HadamardBenchmark(**params)
    return _problem(hadamard_problem(config), starts, {"max_iter": 10000, "grad_tol": 1e-5},
                    {"scenario": "hadamard", "params": config.__dict__})


def _rydberg(params):
    params = dict(params)
    starts = params.pop("starts", 20)
    config = RydbergBenchmark(**params)
    return _problem(rydberg_problem(config), starts, {"max_iter": 10000, "grad_tol": 1e-5},
                    {"scenario": "rydberg", "params": config.__dict__})


def _sysid(params):
    config = ThreeAxisConfig(**params)
    out = experiments_to_dict(three_axis_experiments(config), ["omega_x", "omega_y", "omega_z"])
    out["truth"] = TRUE_RATES.tolist()
    return out


SCENARIOS = {
    "cpmg": _cpmg,
    "drag": _drag,
    "iswap": _iswap,
    "probe": _probe,
    "crosstalk": _crosstalk,
    "hadamard": _hadamard,
    "rydberg": _rydberg,
    "sysid": _sysid,
}


def build(name: str, params: dict = None) -> dict:
    """Artifact for scenario ``name`` with parameter overrides ``params``."""
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; available: {sorted(SCENARIOS)}")
    return SCENARIOS[name](dict(params or {}))
