"""JSON and CSV interchange for controls, graphs, experiments and spectra.

Complex numbers appear only in JSON, as ``[re, im]`` pairs. CSV files use
``.`` as the decimal separator and carry units in their headers.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from importlib import resources

import jsonschema
import numpy as np

from .control import ControlSolution, DriveTerm, ShiftTerm
from .optimizer.graph import complex_from_json, complex_to_json
from .pwc import PwcScalar, Segmentation

__all__ = [
    "load_schema",
    "validate",
    "control_to_dict",
    "control_from_dict",
    "experiments_to_dict",
    "experiments_from_dict",
    "channels_to_dict",
    "channels_from_dict",
    "write_csv",
    "read_csv",
    "file_digest",
]


def load_schema(name: str) -> dict:
    """Bundled JSON schema ``name`` (without the ``.json`` suffix)."""
    text = resources.files("qctrlkit").joinpath("schemas", f"{name}.json").read_text()
    return json.loads(text)


def validate(data, name: str):
    """Raise ``jsonschema.ValidationError`` unless ``data`` matches schema ``name``."""
    jsonschema.validate(data, load_schema(name))
    return data


def _pwc_dict(pulse: PwcScalar, complex_values: bool) -> dict:
    values = complex_to_json(pulse.values) if complex_values else np.asarray(pulse.values, float).tolist()
    return {"values": values, "durations": pulse.durations.tolist()}


def control_to_dict(ctrl: ControlSolution, noise_operators=None, labels=None, metadata=None) -> dict:
    """Serialize a control (and optionally its noise operators)."""
    out = {
        "type": "control",
        "dimension": ctrl.dimension,
        "duration": ctrl.duration,
        "drift": complex_to_json(ctrl.drift),
        "drives": [dict(operator=complex_to_json(t.operator), **_pwc_dict(t.pulse, True))
                   for t in ctrl.drives],
        "shifts": [dict(operator=complex_to_json(t.operator), **_pwc_dict(t.pulse, False))
                   for t in ctrl.shifts],
    }
    if labels:
        out["labels"] = dict(labels)
    if noise_operators is not None:
        out["noise_operators"] = [complex_to_json(N) for N in noise_operators]
    if metadata:
        out["metadata"] = metadata
    return out


def control_from_dict(data: dict, check: bool = True):
    """Inverse of :func:`control_to_dict`.

    Returns
    -------
    ctrl : ControlSolution
    noise_operators : list of ndarray
    """
    if check:
        validate(data, "control")
    drives = [DriveTerm(PwcScalar(complex_from_json(d["values"]), Segmentation(d["durations"])),
                        complex_from_json(d["operator"])) for d in data.get("drives", [])]
    shifts = [ShiftTerm(PwcScalar(np.asarray(s["values"], float), Segmentation(s["durations"])),
                        complex_from_json(s["operator"])) for s in data.get("shifts", [])]
    ctrl = ControlSolution(drives, shifts, complex_from_json(data["drift"]), data.get("duration"))
    noise = [complex_from_json(N) for N in data.get("noise_operators", [])]
    return ctrl, noise


def experiments_to_dict(experiments, parameter_names=None, units="rad/s") -> dict:
    return {
        "type": "experiments",
        "parameter_names": list(parameter_names or []),
        "units": units,
        "experiments": [
            {
                "durations": np.asarray(e.durations).tolist(),
                "initial_state": complex_to_json(e.initial_state),
                "observable": complex_to_json(e.observable),
                "generators": complex_to_json(e.generators),
                "static": complex_to_json(e.static),
            }
            for e in experiments
        ],
    }


def experiments_from_dict(data: dict, check: bool = True):
    from .identification import Experiment

    if check:
        validate(data, "experiments")
    out = []
    for e in data["experiments"]:
        static = complex_from_json(e["static"]) if "static" in e else None
        out.append(Experiment(e["durations"], complex_from_json(e["initial_state"]),
                              complex_from_json(e["observable"]), complex_from_json(e["generators"]),
                              static))
    return out


def channels_to_dict(channels) -> dict:
    """Serialize PSD-defined noise channels."""
    out = []
    for ch in channels:
        if ch.psd is None:
            raise ValueError("only PSD-defined channels can be serialized")
        item = {"coupling": ch.coupling, "label": ch.label,
                "psd": {"samples": ch.psd.samples.tolist(), "resolution": ch.psd.resolution}}
        if ch.coupling == "additive":
            if isinstance(ch.operator, tuple):
                raise ValueError("time-dependent noise operators cannot be serialized")
            item["operator"] = complex_to_json(ch.operator)
        else:
            item["index"] = ch.index
        out.append(item)
    return {"channels": out}


def channels_from_dict(data: dict, check: bool = True):
    from .noise import OneSidedPsd
    from .simulator import NoiseChannel

    if check:
        validate(data, "noise")
    out = []
    for item in data["channels"]:
        psd = OneSidedPsd(item["psd"]["samples"], item["psd"]["resolution"])
        op = complex_from_json(item["operator"]) if "operator" in item else None
        out.append(NoiseChannel(item["coupling"], operator=op, index=item.get("index"), psd=psd,
                                label=item.get("label", "")))
    return out


def write_csv(path, header, rows):
    """Write numeric rows with full float precision (``repr`` formatting)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(x)) for x in row])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def read_csv(path):
    """Read a numeric CSV with one header row.

    Returns
    -------
    header : list of str
    data : ndarray, shape (rows, columns)
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader if row]
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
