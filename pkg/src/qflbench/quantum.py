"""Exact statevector simulation: gates, QAOA over QUBO cost functions, and
parameter-shift gradients.

Convention: qubit q maps to bit q of the basis-state index with weight 2^q,
matching the BitString layout in the qubo module. Everything is exact
(complex128); there is no shot noise in expectation values.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .qubo import Qubo, BitString, energy_table
from .rng import substream

MAX_QUBITS = 20


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_qubits > MAX_QUBITS:
            raise ValueError(f"n_qubits={self.n_qubits} exceeds cap {MAX_QUBITS}")
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError("amplitude count must be 2^n_qubits")

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def uniform(cls, n_qubits: int) -> "StateVector":
        amps = np.full(1 << n_qubits, 1.0 / np.sqrt(1 << n_qubits), dtype=np.complex128)
        return cls(n_qubits, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())


@dataclass(frozen=True)
class Gate:
    name: str              # rx | ry | rz | h | cz | cnot
    qubits: tuple
    slot: int = None       # parameter slot for trainable rotations
    angle: float = None    # fixed angle for non-trainable rotations

ROTATIONS = ("rx", "ry", "rz")


def RX(qubit, slot=None, angle=None):
    return Gate("rx", (qubit,), slot, angle)

def RY(qubit, slot=None, angle=None):
    return Gate("ry", (qubit,), slot, angle)

def RZ(qubit, slot=None, angle=None):
    return Gate("rz", (qubit,), slot, angle)

def H(qubit):
    return Gate("h", (qubit,))

def CZ(q1, q2):
    return Gate("cz", (q1, q2))

def CNOT(control, target):
    return Gate("cnot", (control, target))


@dataclass
class Circuit:
    n_qubits: int
    gates: list

    def __post_init__(self):
        slots = set()
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"gate {g.name} uses out-of-range qubit {q}")
            if g.slot is not None:
                if g.name not in ROTATIONS:
                    raise ValueError(f"only rotation gates may be parameterized, got {g.name}")
                slots.add(g.slot)
        if slots != set(range(len(slots))):
            raise ValueError("parameter slots must be contiguous from 0")
        self.num_slots = len(slots)


def _rotation_matrix(name, theta):
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    if name == "rx":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if name == "ry":
        return np.array([[c, -s], [s, c]])
    return np.array([[np.exp(-1j * theta / 2.0), 0], [0, np.exp(1j * theta / 2.0)]])

_H_MATRIX = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def _apply_1q(amps, mat, qubit):
    """In-place 2x2 gate on one qubit of a flat amplitude array."""
    view = amps.reshape(-1, 2, 1 << qubit)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = mat[0, 0] * a0 + mat[0, 1] * a1
    view[:, 1, :] = mat[1, 0] * a0 + mat[1, 1] * a1


def _bit_mask(n, qubit):
    return (np.arange(1 << n) >> qubit) & 1


def apply(state: StateVector, circuit: Circuit, params=None) -> StateVector:
    """Apply the circuit's gates in order; returns a new StateVector."""
    params = np.asarray(params if params is not None else [], dtype=float)
    if len(params) != circuit.num_slots:
        raise ValueError(f"expected {circuit.num_slots} params, got {len(params)}")
    out = state.copy()
    amps = out.amplitudes
    n = circuit.n_qubits
    if n != state.n_qubits:
        raise ValueError("circuit width does not match state")
    for g in circuit.gates:
        if g.name in ROTATIONS:
            theta = params[g.slot] if g.slot is not None else g.angle
            _apply_1q(amps, _rotation_matrix(g.name, theta), g.qubits[0])
        elif g.name == "h":
            _apply_1q(amps, _H_MATRIX, g.qubits[0])
        elif g.name == "cz":
            q1, q2 = g.qubits
            mask = (_bit_mask(n, q1) & _bit_mask(n, q2)).astype(bool)
            amps[mask] *= -1.0
        elif g.name == "cnot":
            c, t = g.qubits
            sel = _bit_mask(n, c).astype(bool)
            lo = sel & (_bit_mask(n, t) == 0)
            hi = sel & (_bit_mask(n, t) == 1)
            amps[lo], amps[hi] = amps[hi].copy(), amps[lo].copy()
        else:
            raise ValueError(f"unknown gate {g.name}")
    return out


def expect_qubo(state: StateVector, q: Qubo, table: np.ndarray = None) -> float:
    """<psi| H_cost |psi> for the diagonal Hamiltonian whose eigenvalue on
    |x> is energy(q, x)."""
    if q.n != state.n_qubits:
        raise ValueError(f"qubo size {q.n} != state width {state.n_qubits}")
    if table is None:
        table = energy_table(q)
    return float(state.probabilities() @ table)


def z_expectations(state: StateVector, qubits) -> float:
    """<Z ... Z> parity expectation over the given qubit set."""
    parity = np.zeros(1 << state.n_qubits, dtype=np.int64)
    for q in qubits:
        parity ^= _bit_mask(state.n_qubits, q)
    signs = 1.0 - 2.0 * parity
    return float(state.probabilities() @ signs)


def _kron_power(mat: np.ndarray, count: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=mat.dtype)
    for _ in range(count):
        out = np.kron(out, mat)
    return out


def qaoa_state(q: Qubo, gammas, betas, table: np.ndarray = None) -> StateVector:
    """Alternating ansatz: uniform superposition, then p layers of the
    diagonal cost phase e^{-i gamma E(x)} and the transverse mixer RX(2 beta).

    The cost phase is applied directly per basis state from the energy table;
    exact and equivalent (up to global phase) to the Ising-form gate circuit.
    """
    if q.n > MAX_QUBITS:
        raise ValueError(f"qubo size {q.n} exceeds cap {MAX_QUBITS}")
    gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    if gammas.shape != betas.shape:
        raise ValueError("gammas and betas must have equal length")
    if table is None:
        table = energy_table(q)
    state = StateVector.uniform(q.n)
    lo = q.n // 2
    hi = q.n - lo
    for gamma, beta in zip(gammas, betas):
        state.amplitudes *= np.exp(-1j * gamma * table)
        # the mixer applies the same RX(2 beta) to every qubit, so the whole
        # layer collapses to two Kronecker-power matrices (low/high halves)
        mat = _rotation_matrix("rx", 2.0 * beta)
        k_lo = _kron_power(mat, lo)
        k_hi = k_lo if hi == lo else _kron_power(mat, hi)
        view = state.amplitudes.reshape(1 << hi, 1 << lo)
        state.amplitudes = (k_hi @ view @ k_lo.T).reshape(-1)
    return state


@dataclass
class QaoaConfig:
    depth_p: int = 3
    shots: int = 1024
    angle_optimizer: str = "simplex"   # "simplex" | "coordinate-grid"
    restarts: int = 1
    seed: int = 0
    eval_budget: int = 150

    def __post_init__(self):
        if self.depth_p < 1:
            raise ValueError("depth_p must be >= 1")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.angle_optimizer not in ("simplex", "coordinate-grid"):
            raise ValueError(f"unknown angle optimizer {self.angle_optimizer!r}")


def _coordinate_grid_minimize(fun, x0, budget, grid_points=8):
    """Cyclic coordinate search over a shrinking grid around the incumbent."""
    x = np.asarray(x0, dtype=float)
    best = fun(x)
    evals = 1
    width = np.pi
    while evals < budget:
        improved = False
        for j in range(len(x)):
            if evals >= budget:
                break
            offsets = np.linspace(-width, width, grid_points)
            for off in offsets:
                if evals >= budget:
                    break
                trial = x.copy()
                trial[j] = x[j] + off
                val = fun(trial)
                evals += 1
                if val < best - 1e-15:
                    best, x = val, trial
                    improved = True
        if not improved:
            width /= 2.0
            if width < 1e-3:
                break
    return x


def qaoa_solve(q: Qubo, cfg: QaoaConfig):
    """Minimize the QUBO with QAOA: optimize angles by a derivative-free
    method, then return the lowest-energy bitstring observed across all
    sampled shots and all basis states visited while computing expectations.

    Returns (BitString, energy_value, trace) where trace is the list of
    (evaluation index, expectation) pairs across restarts.
    """
    if q.n > MAX_QUBITS:
        raise ValueError(f"qubo size {q.n} exceeds cap {MAX_QUBITS}")
    table = energy_table(q)
    p = cfg.depth_p
    trace = []
    best = {"energy": np.inf, "key": None, "x": None}

    def note(x_index):
        e = float(table[x_index])
        key = BitString.from_index(x_index, q.n).lex_key()
        if e < best["energy"] - 1e-15 or (e <= best["energy"] + 1e-15 and
                                          (best["key"] is None or key < best["key"])):
            best["energy"], best["key"], best["x"] = e, key, x_index

    for r in range(cfg.restarts):
        if r == 0:
            angles0 = np.concatenate([np.full(p, 0.1), np.full(p, 0.4)])
        else:
            angles0 = substream(cfg.seed, "qaoa-init", r).uniform(0.0, np.pi, 2 * p)

        def objective(angles):
            state = qaoa_state(q, angles[:p], angles[p:], table)
            probs = state.probabilities()
            # every basis state touched with nonzero probability counts as visited
            visited = np.flatnonzero(probs > 1e-12)
            if len(visited):
                note(int(visited[np.argmin(table[visited])]))
            val = float(probs @ table)
            trace.append((len(trace), val))
            return val

        if cfg.angle_optimizer == "simplex":
            res = minimize(objective, angles0, method="Nelder-Mead",
                           options={"maxfev": cfg.eval_budget, "xatol": 1e-4,
                                    "fatol": 1e-8})
            final_angles = res.x
        else:
            final_angles = _coordinate_grid_minimize(objective, angles0, cfg.eval_budget)

        state = qaoa_state(q, final_angles[:p], final_angles[p:], table)
        probs = state.probabilities()
        probs = probs / probs.sum()
        rng = substream(cfg.seed, "qaoa-shots", r)
        samples = rng.choice(len(probs), size=cfg.shots, p=probs)
        for x in np.unique(samples):
            note(int(x))

    return BitString.from_index(best["x"], q.n), best["energy"], trace


def parameter_shift_grad(circuit: Circuit, params, observable, input_state: StateVector) -> np.ndarray:
    """Exact gradient of <O> w.r.t. each parameter slot via the shift rule:
    d<O>/dtheta_j = (1/2)[<O>(theta_j + pi/2) - <O>(theta_j - pi/2)].

    `observable` is a qubit index or an iterable of qubit indices (Z-parity).
    Valid only when every parameterized gate is an RX/RY/RZ rotation, each
    slot used by exactly one gate.
    """
    qubits = (observable,) if np.isscalar(observable) else tuple(observable)
    params = np.asarray(params, dtype=float)
    slot_count = np.zeros(circuit.num_slots, dtype=int)
    for g in circuit.gates:
        if g.slot is not None:
            if g.name not in ROTATIONS:
                raise ValueError(f"parameter-shift rule requires rotation gates, got {g.name}")
            slot_count[g.slot] += 1
    if np.any(slot_count != 1):
        raise ValueError("each parameter slot must be used by exactly one rotation gate")

    grad = np.empty(circuit.num_slots)
    for j in range(circuit.num_slots):
        shifted = params.copy()
        shifted[j] += np.pi / 2.0
        plus = z_expectations(apply(input_state, circuit, shifted), qubits)
        shifted[j] -= np.pi
        minus = z_expectations(apply(input_state, circuit, shifted), qubits)
        grad[j] = 0.5 * (plus - minus)
    return grad
