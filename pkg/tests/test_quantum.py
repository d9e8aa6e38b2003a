import numpy as np
import pytest

from qflbench.quantum import (CNOT, CZ, Circuit, Gate, H, QaoaConfig, RX, RY,
                              RZ, StateVector, apply, expect_qubo,
                              parameter_shift_grad, qaoa_solve, qaoa_state,
                              z_expectations)
from qflbench.qubo import BitString, Qubo, brute_force_min, energy, energy_table, random_qubo
from qflbench.rng import substream

GATE_POOL = ("rx", "ry", "rz", "h", "cz", "cnot")


def random_circuit(rng, n_qubits, n_gates, n_params=0):
    gates = []
    slots = list(range(n_params))
    rng.shuffle(slots)
    for _ in range(n_gates):
        name = GATE_POOL[rng.integers(len(GATE_POOL))]
        if name in ("cz", "cnot"):
            q1, q2 = rng.choice(n_qubits, 2, replace=False)
            gates.append(Gate(name, (int(q1), int(q2))))
        elif name == "h":
            gates.append(H(int(rng.integers(n_qubits))))
        else:
            q = int(rng.integers(n_qubits))
            if slots:
                gates.append(Gate(name, (q,), slot=slots.pop()))
            else:
                gates.append(Gate(name, (q,), angle=float(rng.uniform(0, 2 * np.pi))))
    while slots:  # ensure every requested slot is used
        gates.append(RY(int(rng.integers(n_qubits)), slot=slots.pop()))
    return Circuit(n_qubits, gates)


def test_hadamard_on_zero():
    out = apply(StateVector.zero(1), Circuit(1, [H(0)]))
    assert np.allclose(out.amplitudes, [1 / np.sqrt(2), 1 / np.sqrt(2)])


def test_ry_pi_flips():
    out = apply(StateVector.zero(1), Circuit(1, [RY(0, angle=np.pi)]))
    assert abs(out.amplitudes[1]) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_cnot_and_cz_action():
    # CNOT flips the target iff the control is set
    st = apply(StateVector.zero(2), Circuit(2, [RY(0, angle=np.pi), CNOT(0, 1)]))
    assert abs(st.amplitudes[0b11]) ** 2 == pytest.approx(1.0, abs=1e-12)
    # CZ phases only the |11> amplitude
    st = apply(StateVector.uniform(2), Circuit(2, [CZ(0, 1)]))
    assert np.allclose(st.amplitudes * 2, [1, 1, 1, -1])


def test_norm_preserved_long_random_circuit():
    rng = substream(0, "unitarity")
    circ = random_circuit(rng, 6, 200)
    out = apply(StateVector.zero(6), circ)
    assert abs(out.norm() - 1.0) <= 1e-9


def test_apply_validates_arity_and_qubits():
    circ = Circuit(2, [RY(0, slot=0)])
    with pytest.raises(ValueError):
        apply(StateVector.zero(2), circ, [])
    with pytest.raises(ValueError):
        Circuit(1, [H(1)])
    with pytest.raises(ValueError):
        Circuit(1, [RY(0, slot=1)])  # slots must start at 0
    with pytest.raises(ValueError):
        Circuit(2, [Gate("h", (0,), slot=0)])  # only rotations take slots


def test_statevector_cap():
    with pytest.raises(ValueError):
        StateVector.zero(21)


def test_expect_qubo_basis_state_and_uniform():
    q = random_qubo(2, substream(1, "expect"))
    for x in range(4):
        amps = np.zeros(4, dtype=complex)
        amps[x] = 1.0
        st = StateVector(2, amps)
        assert expect_qubo(st, q) == pytest.approx(energy(q, BitString.from_index(x, 2)))
    uni = StateVector.uniform(2)
    assert expect_qubo(uni, q) == pytest.approx(energy_table(q).mean())


def test_expect_qubo_bounded_by_spectrum():
    q = random_qubo(8, substream(2, "expect-rand"))
    rng = substream(3, "expect-state")
    amps = rng.standard_normal(256) + 1j * rng.standard_normal(256)
    amps /= np.linalg.norm(amps)
    val = expect_qubo(StateVector(8, amps), q)
    table = energy_table(q)
    assert table.min() - 1e-9 <= val <= table.max() + 1e-9


def test_z_expectations_parity():
    st = apply(StateVector.zero(2), Circuit(2, [RY(0, angle=np.pi)]))  # |01> little-endian
    assert z_expectations(st, (0,)) == pytest.approx(-1.0)
    assert z_expectations(st, (1,)) == pytest.approx(1.0)
    assert z_expectations(st, (0, 1)) == pytest.approx(-1.0)


def test_qaoa_state_zero_angles_is_uniform():
    q = random_qubo(4, substream(4, "qaoa0"))
    st = qaoa_state(q, [0.0], [0.0])
    assert np.allclose(st.amplitudes, StateVector.uniform(4).amplitudes)


def test_qaoa_state_norm_and_single_qubit_driving():
    q = Qubo(n=1, linear=np.array([1.0]), quad={})
    best_prob = 0.0
    for gamma in np.linspace(0, np.pi, 25):
        for beta in np.linspace(0, np.pi, 25):
            st = qaoa_state(q, [gamma], [beta])
            assert abs(st.norm() - 1.0) <= 1e-9
            best_prob = max(best_prob, st.probabilities()[0])
    assert best_prob >= 0.999


def test_qaoa_solve_separable_and_constant():
    q = Qubo(n=3, linear=np.array([-1.0, -1.0, -1.0]), quad={}, offset=0.25)
    bs, val, trace = qaoa_solve(q, QaoaConfig(depth_p=2, seed=0))
    assert list(bs.bits) == [1, 1, 1]
    assert val == pytest.approx(-2.75)
    assert len(trace) > 0
    flat = Qubo(n=2, linear=np.zeros(2), quad={}, offset=1.5)
    _, val, _ = qaoa_solve(flat, QaoaConfig(depth_p=1, seed=0))
    assert val == 1.5


def test_qaoa_solve_never_beats_brute_force():
    for s in range(5):
        q = random_qubo(6, substream(s, "qaoa-sanity"))
        _, best = brute_force_min(q)
        _, val, _ = qaoa_solve(q, QaoaConfig(depth_p=2, restarts=2, seed=s))
        assert val >= best - 1e-12


def test_qaoa_solve_deterministic():
    q = random_qubo(7, substream(6, "qaoa-det"))
    cfg = QaoaConfig(depth_p=3, restarts=3, seed=11)
    a = qaoa_solve(q, cfg)
    b = qaoa_solve(q, cfg)
    assert np.array_equal(a[0].bits, b[0].bits) and a[1] == b[1] and a[2] == b[2]


def test_qaoa_coordinate_grid_optimizer():
    q = random_qubo(5, substream(7, "qaoa-grid"))
    _, best = brute_force_min(q)
    _, val, _ = qaoa_solve(q, QaoaConfig(depth_p=2, restarts=2, seed=1,
                                         angle_optimizer="coordinate-grid"))
    assert val >= best - 1e-12


def test_qaoa_config_validation():
    with pytest.raises(ValueError):
        QaoaConfig(depth_p=0)
    with pytest.raises(ValueError):
        QaoaConfig(shots=0)
    with pytest.raises(ValueError):
        QaoaConfig(angle_optimizer="newton")


def test_parameter_shift_analytic():
    circ = Circuit(1, [RY(0, slot=0)])
    grad = parameter_shift_grad(circ, [0.7], 0, StateVector.zero(1))
    assert grad[0] == pytest.approx(-np.sin(0.7), abs=1e-10)
    grad0 = parameter_shift_grad(circ, [0.0], 0, StateVector.zero(1))
    assert grad0[0] == pytest.approx(0.0, abs=1e-12)


def test_parameter_shift_matches_finite_differences():
    rng = substream(8, "pshift")
    circ = random_circuit(rng, 4, 24, n_params=8)
    params = rng.uniform(-np.pi, np.pi, 8)
    obs = (0, 2)
    grad = parameter_shift_grad(circ, params, obs, StateVector.zero(4))
    h = 1e-5
    for j in range(8):
        up, dn = params.copy(), params.copy()
        up[j] += h
        dn[j] -= h
        fd = (z_expectations(apply(StateVector.zero(4), circ, up), obs)
              - z_expectations(apply(StateVector.zero(4), circ, dn), obs)) / (2 * h)
        assert grad[j] == pytest.approx(fd, abs=1e-6)


def test_parameter_shift_rejects_shared_slots():
    circ = Circuit(1, [RY(0, slot=0), RX(0, slot=0)])
    with pytest.raises(ValueError):
        parameter_shift_grad(circ, [0.3], 0, StateVector.zero(1))
