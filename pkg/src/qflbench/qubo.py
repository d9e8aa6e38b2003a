"""QUBO encoding of the sub-channel assignment subproblem, plus classical solvers.

The exact Shannon sum-rate is not quadratic in the assignment bits, so the
Qubo built here is a search surrogate: a linear per-device rate reward, a
pairwise co-channel interference penalty, and a one-hot feasibility penalty.
Candidate assignments decoded from it are always re-scored against the true
sum-rate before acceptance (see solvers.assignment_step).
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .wireless import NetworkInstance, Assignment, PowerVector

BRUTE_FORCE_CAP = 24


@dataclass
class Qubo:
    n: int
    linear: np.ndarray
    quad: dict            # (i, j) with i < j -> coefficient
    offset: float = 0.0

    def __post_init__(self):
        self.linear = np.asarray(self.linear, dtype=float)
        if self.linear.shape != (self.n,):
            raise ValueError(f"linear has length {self.linear.shape}, expected ({self.n},)")
        for (i, j) in self.quad:
            if not (0 <= i < j < self.n):
                raise ValueError(f"bad quad index pair ({i}, {j}) for n={self.n}")

    def to_json(self) -> str:
        doc = {
            "n": self.n,
            "linear": self.linear.tolist(),
            "quad": [[i, j, c] for (i, j), c in sorted(self.quad.items())],
            "offset": self.offset,
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "Qubo":
        doc = json.loads(text)
        quad = {(int(i), int(j)): float(c) for i, j, c in doc["quad"]}
        return cls(n=int(doc["n"]), linear=np.asarray(doc["linear"]), quad=quad,
                   offset=float(doc["offset"]))


@dataclass
class BitString:
    bits: np.ndarray

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.int8)
        if np.any((self.bits != 0) & (self.bits != 1)):
            raise ValueError("bits must be 0/1")

    @classmethod
    def from_index(cls, x: int, n: int) -> "BitString":
        return cls((x >> np.arange(n)) & 1)

    def to_index(self) -> int:
        return int(np.sum(self.bits.astype(np.int64) << np.arange(len(self.bits))))

    def lex_key(self) -> int:
        """Integer whose ordering equals lexicographic order of (b0, b1, ...)."""
        n = len(self.bits)
        return int(np.sum(self.bits.astype(np.int64) << (n - 1 - np.arange(n))))


def energy(q: Qubo, x: BitString) -> float:
    """Exact value of the quadratic form at x."""
    b = x.bits
    if len(b) != q.n:
        raise ValueError(f"bitstring length {len(b)} != qubo size {q.n}")
    val = q.offset + float(q.linear @ b)
    for (i, j), c in q.quad.items():
        val += c * b[i] * b[j]
    return val


def energy_table(q: Qubo, chunk: int = 1 << 20) -> np.ndarray:
    """Energies of all 2^n bitstrings, indexed by the little-endian integer.

    Bit i of index x is (x >> i) & 1.
    """
    if q.n > BRUTE_FORCE_CAP:
        raise ValueError(f"n={q.n} exceeds enumeration cap {BRUTE_FORCE_CAP}")
    total = 1 << q.n
    out = np.empty(total)
    items = sorted(q.quad.items())
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = ((idx[:, None] >> np.arange(q.n)) & 1).astype(np.float64)
        e = q.offset + bits @ q.linear
        for (i, j), c in items:
            e += c * bits[:, i] * bits[:, j]
        out[start:start + len(idx)] = e
    return out


def brute_force_min(q: Qubo) -> tuple:
    """Global minimum by exhaustive enumeration; ties -> lexicographically
    smallest bitstring. Oracle for everything else in this module."""
    table = energy_table(q)
    best = table.min()
    ties = np.flatnonzero(table == best)
    keys = [BitString.from_index(int(x), q.n).lex_key() for x in ties]
    x = int(ties[int(np.argmin(keys))])
    return BitString.from_index(x, q.n), float(best)


def anneal_min(q: Qubo, sweeps: int = 2000, restarts: int = 10,
               schedule: tuple = None, seed: int = 0) -> tuple:
    """Single-flip Metropolis simulated annealing with a geometric temperature
    schedule; deterministic given seed. Returns the best state ever seen."""
    if sweeps < 1:
        raise ValueError(f"sweeps must be >= 1, got {sweeps}")
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    from .rng import substream

    scale = float(np.max(np.abs(q.linear))) if q.n else 1.0
    if q.quad:
        scale = max(scale, max(abs(c) for c in q.quad.values()))
    scale = scale or 1.0
    t_hi, t_lo = schedule if schedule is not None else (2.0 * scale, 1e-3 * scale)

    neighbors = [[] for _ in range(q.n)]
    for (i, j), c in q.quad.items():
        neighbors[i].append((j, c))
        neighbors[j].append((i, c))

    temps = t_hi * (t_lo / t_hi) ** (np.arange(sweeps) / max(sweeps - 1, 1))
    best_e, best_key, best_bits = np.inf, None, None
    for r in range(restarts):
        rng = substream(seed, "anneal", r)
        x = rng.integers(0, 2, q.n).astype(np.int8)
        e = energy(q, BitString(x.copy()))
        if e < best_e:
            best_e, best_bits = e, x.copy()
            best_key = BitString(best_bits).lex_key()
        for t in temps:
            flips = rng.integers(0, q.n, q.n)
            accept = rng.random(q.n)
            for i, u in zip(flips, accept):
                delta = (1 - 2 * x[i]) * (q.linear[i] + sum(c * x[j] for j, c in neighbors[i]))
                if delta <= 0 or u < np.exp(-delta / t):
                    x[i] ^= 1
                    e += delta
                    if e <= best_e + 1e-12:
                        key = BitString(x).lex_key()
                        if e < best_e - 1e-12 or key < best_key:
                            best_e, best_bits, best_key = e, x.copy(), key
    # the incremental energy can drift over long runs; recompute exactly
    bs = BitString(best_bits)
    return bs, energy(q, bs)


def random_qubo(n: int, rng: np.random.Generator, density: float = 0.5,
                scale: float = 1.0) -> Qubo:
    """Random dense-ish instance for benchmarks and oracle tests."""
    linear = rng.uniform(-scale, scale, n)
    quad = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                quad[(i, j)] = float(rng.uniform(-scale, scale))
    return Qubo(n=n, linear=linear, quad=quad, offset=float(rng.uniform(-scale, scale)))


@dataclass
class AssignmentVarMap:
    """Bookkeeping for the block QUBO: which bit means which (device, channel)."""
    pairs: list                      # var index -> (device, channel)
    index_of: dict                   # (device, channel) -> var index
    candidates: dict                 # device -> list of candidate channels
    rhat: dict                       # (device, channel) -> surrogate rate reward
    active: list = field(default_factory=list)

    @property
    def n(self):
        return len(self.pairs)


def build_assignment_qubo(instance: NetworkInstance, powers: PowerVector,
                          active_devices, candidates: dict, incumbent: Assignment,
                          lam_onehot: float = None, lam_int: float = None):
    """Encode re-assignment of `active_devices` (others frozen at `incumbent`)
    as a minimization QUBO. Returns (Qubo, AssignmentVarMap).

    Objective: -sum r_hat[i,k] x_ik
               + lam_int * sum_k sum_{i<j} (p_i g_ik + p_j g_jk) x_ik x_jk
               + lam_onehot * sum_i (sum_k x_ik - 1)^2
    where r_hat is the device's rate ignoring interference from other active
    devices but keeping interference from the frozen ones.
    """
    cfg = instance.config
    active = list(active_devices)
    for i in active:
        if not candidates.get(i):
            raise ValueError(f"device {i} has an empty candidate channel list")

    p_w = powers.watts()
    noise = cfg.noise_power_w
    active_set = set(active)

    # interference from frozen devices, per channel
    i_fixed = np.zeros(cfg.num_channels)
    for j in range(cfg.num_devices):
        if j not in active_set:
            k = incumbent.channel_of_device[j]
            i_fixed[k] += p_w[j] * instance.link_gain[j, k]

    pairs, index_of, rhat = [], {}, {}
    for i in active:
        for k in candidates[i]:
            index_of[(i, k)] = len(pairs)
            pairs.append((i, k))
            g = p_w[i] * instance.link_gain[i, k]
            rhat[(i, k)] = cfg.channel_bandwidth_hz * np.log2(1.0 + g / (noise + i_fixed[k]))

    n = len(pairs)
    rvals = np.array([rhat[pc] for pc in pairs])
    span = float(rvals.max() - rvals.min()) if n else 1.0
    if lam_onehot is None:
        lam_onehot = 2.0 * (span if span > 0 else max(abs(rvals).max(), 1.0))
    if lam_onehot <= 0:
        raise ValueError("lam_onehot must be positive")

    # symmetric co-channel interference proxy, in watts
    proxy = {}
    for a_idx in range(n):
        i, k = pairs[a_idx]
        for b_idx in range(a_idx + 1, n):
            j, k2 = pairs[b_idx]
            if k2 == k and j != i:
                proxy[(a_idx, b_idx)] = p_w[i] * instance.link_gain[i, k] + p_w[j] * instance.link_gain[j, k]
    if lam_int is None:
        mean_proxy = np.mean(list(proxy.values())) if proxy else 0.0
        mean_r = float(np.mean(np.abs(rvals))) if n else 0.0
        lam_int = (mean_r / mean_proxy) if mean_proxy > 0 else 0.0

    linear = -rvals.copy()
    quad = {key: lam_int * val for key, val in proxy.items() if lam_int * val != 0.0}
    offset = 0.0
    # one-hot penalty: lam * (sum_k x - 1)^2 = lam * (1 - sum_k x + 2 sum_{k<k'} x x')
    for i in active:
        var_idxs = [index_of[(i, k)] for k in candidates[i]]
        offset += lam_onehot
        for v in var_idxs:
            linear[v] -= lam_onehot
        for a in range(len(var_idxs)):
            for b in range(a + 1, len(var_idxs)):
                key = tuple(sorted((var_idxs[a], var_idxs[b])))
                quad[key] = quad.get(key, 0.0) + 2.0 * lam_onehot

    q = Qubo(n=n, linear=linear, quad=quad, offset=offset)
    vmap = AssignmentVarMap(pairs=pairs, index_of=index_of,
                            candidates={i: list(candidates[i]) for i in active},
                            rhat=rhat, active=active)
    return q, vmap


def decode_assignment(x: BitString, vmap: AssignmentVarMap, prior: Assignment) -> Assignment:
    """Decode a (possibly infeasible) bitstring into a valid Assignment.

    One-hot violations are repaired toward the highest surrogate-rate
    candidate; inactive devices keep their prior channels."""
    if len(x.bits) != vmap.n:
        raise ValueError(f"bitstring length {len(x.bits)} != variable count {vmap.n}")
    out = prior.copy()
    for i in vmap.active:
        chosen = [k for k in vmap.candidates[i] if x.bits[vmap.index_of[(i, k)]]]
        pool = chosen if chosen else vmap.candidates[i]
        out.channel_of_device[i] = max(pool, key=lambda k: vmap.rhat[(i, k)])
    return out
