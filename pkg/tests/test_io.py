import json

import jsonschema
import numpy as np
import pytest

from qctrlkit.io import (
    channels_from_dict,
    channels_to_dict,
    control_from_dict,
    control_to_dict,
    experiments_from_dict,
    experiments_to_dict,
    file_digest,
    read_csv,
    validate,
    write_csv,
)
from qctrlkit.optimizer.graph import complex_from_json, complex_to_json
from qctrlkit.scenarios import DEPHASING, cpmg_sequence, drag_noise_channels, DragConfig
from qctrlkit.scenarios.sysid import three_axis_experiments
from qctrlkit.identification import predicted_values
from qctrlkit.simulator import final_unitary


def test_complex_json_round_trip(rng):
    a = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    np.testing.assert_array_equal(complex_from_json(json.loads(json.dumps(complex_to_json(a)))), a)


def test_control_round_trip():
    ctrl = cpmg_sequence(3, 2e-6)
    data = json.loads(json.dumps(control_to_dict(ctrl, [DEPHASING], metadata={"k": 1})))
    back, noise = control_from_dict(data)
    np.testing.assert_array_equal(noise[0], DEPHASING)
    np.testing.assert_allclose(final_unitary(*back.hamiltonian()), final_unitary(*ctrl.hamiltonian()), atol=0)
    assert back.duration == ctrl.duration


def test_control_schema_rejects_malformed():
    data = control_to_dict(cpmg_sequence(1, 1e-6))
    bad = dict(data)
    del bad["drift"]
    with pytest.raises(jsonschema.ValidationError):
        control_from_dict(bad)
    with pytest.raises(jsonschema.ValidationError):
        validate({"type": "control", "drift": "x"}, "control")


def test_experiments_round_trip():
    exps = three_axis_experiments()
    data = json.loads(json.dumps(experiments_to_dict(exps, ["a", "b", "c"])))
    back = experiments_from_dict(data)
    theta = [1.0, 2.0, 3.0]
    np.testing.assert_array_equal(predicted_values(theta, back), predicted_values(theta, exps))


def test_channels_round_trip():
    channels = drag_noise_channels(DragConfig())
    back = channels_from_dict(json.loads(json.dumps(channels_to_dict(channels))))
    assert [c.coupling for c in back] == [c.coupling for c in channels]
    for a, b in zip(back, channels):
        np.testing.assert_array_equal(a.psd.samples, b.psd.samples)


def test_csv_round_trip_full_precision(tmp_path):
    rows = np.array([[0.1, 1 / 3], [1e-300, -2.5e17]])
    path = tmp_path / "x.csv"
    write_csv(path, ["a [s]", "b [1]"], rows)
    header, data = read_csv(path)
    assert header == ["a [s]", "b [1]"]
    np.testing.assert_array_equal(data, rows)
    assert len(file_digest(path)) == 64
