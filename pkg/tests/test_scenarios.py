import json

import numpy as np
import pytest
from scipy.linalg import expm
from scipy.special import jv

from qctrlkit.control import is_hermitian, state_fidelity
from qctrlkit.scenarios import (
    DEPHASING,
    SCENARIOS,
    DragConfig,
    HadamardBenchmark,
    QutritSystem,
    RydbergBenchmark,
    benchmark_systems,
    build,
    controlled_phase,
    coupling_rate,
    cpmg_sequence,
    drag_qutrit,
    ghz_state,
    iswap_system,
    probe_grid,
    pulse_centers,
    rydberg_interaction,
    two_qubit_probe,
)
from qctrlkit.scenarios.crosstalk import (
    enforce_duration,
    OMEGA,
    ZZ_COUPLINGS,
    CrosstalkProblem,
    baseline_infidelity,
    circuit_unitary,
    coupling_diagonal,
    crosstalk_problem,
    crosstalk_target,
)
from qctrlkit.scenarios.drag import LOWERING, drag_waveforms, transfer_populations
from qctrlkit.scenarios.iswap import ISWAP_NOISE
from qctrlkit.scenarios.probe import probe_gates, probe_unitaries
from qctrlkit.simulator import final_unitary

from conftest import I2, SX, SZ

TWO_PI = 2 * np.pi


# ------------------------------------------------------------------- CPMG
def test_cpmg_free_evolution_and_validation():
    ctrl = cpmg_sequence(0, 2e-6)
    assert ctrl.duration == 2e-6 and not ctrl.drives
    with pytest.raises(ValueError):
        cpmg_sequence(4, 1e-6, pulse_width=0.3e-6)
    with pytest.raises(ValueError):
        cpmg_sequence(-1, 1e-6)


@pytest.mark.parametrize("n", [1, 2, 3, 8])
def test_cpmg_areas_timing_and_duration(n):
    tau = 3e-6
    ctrl = cpmg_sequence(n, tau)
    pulse = ctrl.drives[0].pulse
    assert abs(pulse.durations.sum() - tau) < 1e-12 * tau
    on = np.abs(pulse.values) > 0
    assert on.sum() == n
    # drive operator |1><0| / 2 with amplitude pi / width gives a pi rotation
    areas = np.abs(pulse.values[on]) * pulse.durations[on] / 2
    np.testing.assert_allclose(areas, np.pi / 2, atol=1e-12)
    starts = np.concatenate([[0], np.cumsum(pulse.durations)[:-1]])
    centers = starts[on] + pulse.durations[on] / 2
    np.testing.assert_allclose(centers, pulse_centers(n, tau), atol=1e-18)
    H, seg = ctrl.hamiltonian()
    assert is_hermitian(H)
    # an even number of pi pulses is the identity up to phase
    U = final_unitary(H, seg)
    expected = I2 if n % 2 == 0 else SX
    assert abs(abs(np.trace(expected.conj().T @ U)) / 2 - 1) < 1e-10


# ------------------------------------------------------------------- DRAG
def test_qutrit_lowering_operator():
    np.testing.assert_array_equal(LOWERING, [[0, 1, 0], [0, 0, np.sqrt(2)], [0, 0, 0]])
    system = QutritSystem(-TWO_PI * 200e6)
    np.testing.assert_allclose(np.diag(system.drift), [0, 0, -TWO_PI * 200e6])
    np.testing.assert_array_equal(np.diag(system.dephasing), [1, -1, 0])


def test_drag_weight_zero_gives_no_quadrature():
    config = DragConfig(drag_weight=0.0, detuning_weight=0.0, amplitude=1e8)
    I, Q, delta, seg = drag_waveforms(config)
    assert not Q.any() and not delta.any()
    assert I.max() <= 1e8 and I.min() >= 0
    np.testing.assert_allclose(I, I[::-1], rtol=1e-12)


def test_drag_derivative_and_detuning_profiles():
    config = DragConfig(amplitude=1e8, detuning_weight=1.0)
    I, Q, delta, seg = drag_waveforms(config)
    # Q follows dI/dt scaled by beta / eta; it is odd about the centre
    dI = np.gradient(I, seg.midpoints)
    np.testing.assert_allclose(Q[5:-5], 0.5 * dI[5:-5] / config.anharmonicity, rtol=2e-3, atol=1e-3 * abs(Q).max())
    np.testing.assert_allclose(Q, -Q[::-1], atol=1e-9 * abs(Q).max())
    np.testing.assert_allclose(delta, I ** 2 / config.anharmonicity)
    with pytest.raises(ValueError):
        drag_waveforms(DragConfig(width=0.0, amplitude=1.0))


def test_drag_calibration_transfers_population():
    ctrl, channels, config = drag_qutrit()
    pops = transfer_populations(ctrl)
    assert pops[1] > 0.999 and pops[2] < 1e-3
    assert config.amplitude > 0
    assert [c.label for c in channels] == ["phase", "detuning", "dephasing"]
    assert is_hermitian(ctrl.hamiltonian()[0])
    _, none, _ = drag_qutrit(noise=False, amplitude=config.amplitude)
    assert none == []


def test_drag_noise_magnitudes():
    config = DragConfig()
    _, channels, _ = drag_qutrit(config, amplitude=1e8)
    np.testing.assert_allclose([c.psd.power() for c in channels],
                               [config.phase_rms ** 2, config.detuning_rms ** 2, config.dephasing_rms ** 2],
                               rtol=1e-12)


# ------------------------------------------------------------------ iSWAP
def test_iswap_noise_matrix():
    np.testing.assert_array_equal(ISWAP_NOISE, np.diag([-1.0, 1.0, -1.0, 1.0]) / 2)


@pytest.mark.parametrize("x", [1e-3, 0.05, 0.1, 0.2])
def test_bessel_small_argument(x):
    assert abs(jv(1, x) / (x / 2) - 1) < 0.01
    # Lambda = 2 g J_1(omega_T / 2 omega_p) with omega_T / 2 omega_p = x
    assert np.isclose(coupling_rate(3.0, 2 * x, 1.0), 6.0 * jv(1, x))


def test_iswap_full_transfer():
    ctrl, N = iswap_system()
    U = final_unitary(*ctrl.hamiltonian())
    # |01> (index 1) and |10> (index 2) swap completely; |00> and |11> are untouched
    assert np.isclose(abs(U[2, 1]), 1) and np.isclose(abs(U[1, 2]), 1)
    assert np.isclose(abs(U[0, 0]), 1) and np.isclose(abs(U[3, 3]), 1)
    ctrl2, _ = iswap_system(coupling=TWO_PI * 5e6, modulation_amplitude=0.2, pump_frequency=1.0, segments=4)
    assert np.isclose(ctrl2.duration, np.pi / coupling_rate(TWO_PI * 5e6, 0.2, 1.0))
    U2 = final_unitary(*ctrl2.hamiltonian())
    assert np.isclose(abs(U2[2, 1]), 1)


# ------------------------------------------------------------------ probe
def test_probe_layout_and_validation():
    names = probe_gates(3, 5)
    assert len(names) == 66
    assert names[:3] == ["H_a", "CNOT_ab", "X_b"] and names[-3:] == ["X_b", "CNOT_ab", "H_a"]
    assert names[3:6] == ["I"] * 3
    with pytest.raises(ValueError):
        probe_gates(30, 21)
    with pytest.raises(ValueError):
        probe_gates(-1, 0)
    assert len(probe_grid()) == 51 * 52 // 2


def test_probe_prepares_bell_state():
    from qctrlkit.scenarios.probe import BELL_STATE

    U = np.eye(4, dtype=complex)
    for g in probe_unitaries(["H_a", "CNOT_ab", "X_b"]):
        U = g @ U
    psi = U @ np.array([1, 0, 0, 0])
    assert np.isclose(abs(np.vdot(BELL_STATE, psi)), 1)


@pytest.mark.parametrize("ij", probe_grid(step=10))
def test_probe_ideal_product_is_identity(ij):
    names = probe_gates(*ij)
    U = np.eye(4, dtype=complex)
    for g in probe_unitaries(names):
        U = g @ U
    assert abs(abs(np.trace(U)) / 4 - 1) < 1e-10
    _, ctrl = two_qubit_probe(*ij)
    H, seg = ctrl.hamiltonian()
    assert is_hermitian(H)
    V = final_unitary(H, seg)
    assert abs(abs(np.trace(V)) / 4 - 1) < 1e-10


# -------------------------------------------------------------- crosstalk
def test_controlled_phase_diagonal():
    w = np.exp(2j * np.pi / 3)
    assert np.isclose(OMEGA, w)
    np.testing.assert_allclose(np.diag(controlled_phase()), [1, 1, 1, 1, w.conjugate(), w, 1, w, w.conjugate()])
    target = crosstalk_target()
    np.testing.assert_allclose(np.abs(target), 1)
    assert target.size == 3 ** 5


def test_coupling_table_values():
    assert ZZ_COUPLINGS[0, 0] == -0.27935
    assert ZZ_COUPLINGS[3, 3] == -0.70843
    np.testing.assert_array_equal(ZZ_COUPLINGS[1], [-0.1382, 0.15827, -0.33507, -0.3418])
    diag = coupling_diagonal()
    # |11000> picks up alpha_11 of the first pair only
    idx = 1 * 81 + 1 * 27
    assert np.isclose(diag[idx], -0.27935)
    assert diag[0] == 0
    problem = CrosstalkProblem()
    assert np.isclose(problem.hamiltonian_diagonal[idx], -0.27935 * TWO_PI)


def test_zero_angles_reduce_to_free_evolution():
    problem = CrosstalkProblem(periods=3, layers=1)
    rng = np.random.default_rng(0)
    taus = rng.uniform(0, 0.5, 3)
    phis = rng.uniform(-1, 1, problem.angle_count)
    U = circuit_unitary(problem, taus, np.zeros(problem.angle_count), phis)
    np.testing.assert_allclose(np.diag(U), np.exp(-1j * problem.hamiltonian_diagonal * taus.sum()), atol=1e-12)
    assert np.max(np.abs(U - np.diag(np.diag(U)))) < 1e-12


def test_baseline_value_and_graph_penalty():
    problem = CrosstalkProblem()
    # frozen direct evaluation of the uncompensated circuit at 1.5 us
    assert np.isclose(baseline_infidelity(problem), 0.9934, atol=5e-4)
    g = crosstalk_problem(problem)
    m, n = problem.periods, problem.angle_count
    v = np.zeros(g.variable_count)
    v[:m] = 2 * problem.max_duration / m  # twice the cap
    assert g.evaluate_node("duration", v) == pytest.approx(problem.penalty_weight * problem.max_duration ** 2)
    v[:m] = problem.max_duration / m
    assert g.evaluate_node("duration", v) == 0
    assert np.isclose(g.evaluate(v), baseline_infidelity(problem), atol=1e-10)
    with pytest.raises(ValueError):
        CrosstalkProblem(periods=0)


def test_enforce_duration_projects_onto_cap():
    problem = CrosstalkProblem(periods=3, layers=1)
    v = np.arange(3 + 2 * problem.angle_count, dtype=float) / 10
    v[:3] = [0.6, 0.7, 0.8]
    w = enforce_duration(problem, v)
    assert np.isclose(w[:3].sum(), problem.max_duration)
    np.testing.assert_allclose(w[:3] / w[0], v[:3] / v[0])
    np.testing.assert_array_equal(w[3:], v[3:])
    v[:3] = [0.1, 0.2, 0.3]
    np.testing.assert_array_equal(enforce_duration(problem, v), v)


# ------------------------------------------------------------- benchmarks
def test_rydberg_interaction_decay():
    config = RydbergBenchmark(atoms=4, edge_detuning=0.0)
    H = rydberg_interaction(config)
    # |1010> has atoms 0 and 2 excited
    idx = int("1010", 2)
    assert np.isclose(H[idx, idx].real, config.interaction / 64)
    assert np.allclose(H, np.diag(np.diag(H)))


def test_ghz_state():
    psi = ghz_state(4)
    assert np.isclose(np.linalg.norm(psi), 1)
    e = np.zeros(16)
    e[int("0101", 2)] = 1
    assert np.isclose(abs(psi @ e), 1 / np.sqrt(2))


def test_hadamard_drift_commutes_with_shift():
    config = HadamardBenchmark()
    C, A, drift = config.operators()
    assert np.allclose(drift @ A, A @ drift)
    assert config.dimension == 16
    target = config.target
    np.testing.assert_allclose(target @ target.conj().T, np.eye(16), atol=1e-14)


def test_benchmark_graphs_evaluate():
    systems = benchmark_systems()
    for name, (config, graph) in systems.items():
        lo, hi = graph.bounds
        v = np.random.default_rng(1).uniform(lo, hi)
        val = graph.evaluate(v)
        assert 0 <= val <= 1, name


# -------------------------------------------------------------- registry
@pytest.mark.parametrize("name", ["cpmg", "iswap", "probe", "sysid", "hadamard"])
def test_build_artifacts_are_json(name):
    art = build(name, {})
    text = json.dumps(art)
    assert json.loads(text)["type"] in {"control", "problem", "experiments"}


def test_build_unknown_scenario():
    with pytest.raises(KeyError):
        build("bogus")
    assert set(SCENARIOS) >= {"cpmg", "drag", "iswap", "probe", "crosstalk", "hadamard", "rydberg", "sysid"}
