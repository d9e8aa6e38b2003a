"""Joint sub-channel assignment + power control solvers.

Both solvers share one block-coordinate skeleton: alternate a discrete
assignment step over a round-robin device block with a continuous power
step, under a monotone safeguard (a proposal is accepted only if the true
sum-rate does not decrease). They differ in how each block is handled:

  QAOA+BCD  : assignment via QUBO solved by QAOA (or annealer/brute force),
              power via projected gradient ascent on the true sum-rate.
  SCA       : assignment via continuous relaxation of the same QUBO
              (ascend, then round), power via a successive concave
              lower-bound maximization.
"""

import hashlib
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import wireless
from .wireless import (NetworkInstance, Assignment, PowerVector, sum_rate,
                       all_sinr, dbm_to_watts, watts_to_dbm)
from .qubo import (Qubo, BitString, build_assignment_qubo, decode_assignment,
                   brute_force_min, anneal_min, BRUTE_FORCE_CAP)
from .quantum import QaoaConfig, qaoa_solve, MAX_QUBITS
from .rng import substream


@dataclass
class BcdConfig:
    outer_iterations: int = 150
    block_size: int = 6
    candidates_per_device: int = 2
    power_step: str = "projected-gradient"     # "projected-gradient" | "sca-bound"
    power_inner_iters: int = 4
    qaoa: QaoaConfig = field(default_factory=QaoaConfig)
    assignment_backend: str = "qaoa"           # "qaoa" | "anneal" | "brute-force"
    lam_onehot: float = None
    lam_int: float = None
    pga_step_size: float = 0.2
    restarts: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.outer_iterations < 1:
            raise ValueError("outer_iterations must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.assignment_backend not in ("qaoa", "anneal", "brute-force"):
            raise ValueError(f"unknown assignment backend {self.assignment_backend!r}")
        if self.power_step not in ("projected-gradient", "sca-bound"):
            raise ValueError(f"unknown power step {self.power_step!r}")
        if (self.assignment_backend == "qaoa"
                and self.block_size * self.candidates_per_device > MAX_QUBITS):
            raise ValueError("block_size x candidates_per_device exceeds the "
                             f"{MAX_QUBITS}-qubit statevector cap")


@dataclass
class TracePoint:
    iteration: int
    best_sum_rate_bps: float
    assignment_hash: str
    wall_s: float          # measured; not reproducible across runs
    work_evals: int        # deterministic work proxy: true-objective evaluations so far


@dataclass
class SolverTrace:
    solver: str
    seed: int
    points: list = field(default_factory=list)

    def best_rates(self):
        return np.array([p.best_sum_rate_bps for p in self.points])


def _hash_assignment(assignment: Assignment) -> str:
    return hashlib.blake2b(assignment.channel_of_device.astype(np.int64).tobytes(),
                           digest_size=8).hexdigest()


def greedy_assignment(instance: NetworkInstance) -> Assignment:
    """Every device takes its best-gain channel (interference-blind)."""
    return Assignment(np.argmax(instance.link_gain, axis=1))


def midpoint_powers(instance: NetworkInstance) -> PowerVector:
    lo, hi = instance.config.power_range_dbm
    return PowerVector(np.full(instance.config.num_devices, (lo + hi) / 2.0))


def top_channels_by_gain(instance: NetworkInstance, device: int, count: int):
    order = np.argsort(-instance.link_gain[device])
    return [int(k) for k in order[:count]]


def candidate_channels(instance: NetworkInstance, powers: PowerVector,
                       incumbent: Assignment, block, count: int) -> dict:
    """Per-device candidate shortlist for a block re-assignment.

    Channels are ranked by the interference-aware score
    g_{i,k} / (N0*B + I_fixed_k), where I_fixed_k is the received power on k
    from devices outside the block at their incumbent channels. Ranking by
    raw gain instead caps the whole pipeline: with Rician fading the per-
    channel gains differ little, so the profitable moves are the ones that
    dodge interference, and those never enter a gain-ranked shortlist."""
    cfg = instance.config
    p_w = powers.watts()
    block_set = set(int(b) for b in block)
    i_fixed = np.zeros(cfg.num_channels)
    for j in range(cfg.num_devices):
        if j not in block_set:
            k = incumbent.channel_of_device[j]
            i_fixed[k] += p_w[j] * instance.link_gain[j, k]
    out = {}
    for i in block:
        score = instance.link_gain[i] / (cfg.noise_power_w + i_fixed)
        out[i] = [int(k) for k in np.argsort(-score)[:count]]
    return out


def power_step_pga(instance: NetworkInstance, assignment: Assignment,
                   powers: PowerVector, steps: int, step_size: float = 0.2) -> PowerVector:
    """Projected gradient ascent on the true sum-rate over transmit powers.

    Gradients by central finite differences in watts; the update moves in
    log-power space (step halved on non-improvement) and clips to the power
    box. Returns the best iterate visited, so the result never degrades."""
    if steps == 0:
        return powers.copy()
    cfg = instance.config
    lo_w = max(dbm_to_watts(cfg.power_range_dbm[0]), 1e-12)
    hi_w = dbm_to_watts(cfg.power_range_dbm[1])
    p_w = np.clip(powers.watts(), lo_w, hi_w)

    def objective(pw):
        return sum_rate(instance, assignment, PowerVector(watts_to_dbm(pw)))

    best_w, best_val = p_w.copy(), objective(p_w)
    cur = p_w.copy()
    step = step_size
    n = len(cur)
    for _ in range(steps):
        grad = np.empty(n)
        for i in range(n):
            h = max(0.01 * cur[i], 1e-9)
            hi_p, lo_p = cur.copy(), cur.copy()
            hi_p[i] = min(cur[i] + h, hi_w)
            lo_p[i] = max(cur[i] - h, lo_w)
            denom = hi_p[i] - lo_p[i]
            grad[i] = (objective(hi_p) - objective(lo_p)) / denom if denom > 0 else 0.0
        # chain rule into log-power space, then a normalized ascent step
        log_grad = grad * cur
        scale = np.max(np.abs(log_grad))
        if scale == 0:
            break
        trial = np.clip(cur * np.exp(step * log_grad / scale), lo_w, hi_w)
        val = objective(trial)
        if val > best_val:
            best_w, best_val = trial.copy(), val
            cur = trial
        else:
            step /= 2.0
    return PowerVector(watts_to_dbm(best_w))


def power_step_sca(instance: NetworkInstance, assignment: Assignment,
                   powers: PowerVector, inner_iters: int) -> PowerVector:
    """Successive concave lower-bound maximization of the sum-rate.

    At the current SINRs gamma_i, log2(1+gamma) >= alpha_i log2(gamma) + beta_i
    with alpha_i = gamma_i/(1+gamma_i); substituting p = 2^q makes the bound
    concave in q, which is ascended under box constraints, then re-expanded.
    The true sum-rate is non-decreasing across iterations because the bound
    is tight at each expansion point."""
    cfg = instance.config
    gamma = all_sinr(instance, assignment, powers)
    if np.any(gamma <= 0):
        raise ValueError("power_step_sca requires strictly positive SINRs; "
                         "nudge powers away from 0 W first")
    lo_q = np.log2(max(dbm_to_watts(cfg.power_range_dbm[0]), 1e-12))
    hi_q = np.log2(dbm_to_watts(cfg.power_range_dbm[1]))
    a = assignment.channel_of_device
    g = instance.link_gain[np.arange(cfg.num_devices), a]
    noise = cfg.noise_power_w
    same = a[:, None] == a[None, :]
    np.fill_diagonal(same, False)
    g_cross = np.where(same, instance.link_gain[:, a].T, 0.0)  # g_cross[i, j] = g_{j, a_i}

    q = np.clip(np.log2(powers.watts()), lo_q, hi_q)

    def bound_terms(qv, alpha, beta):
        p = 2.0 ** qv
        interf = g_cross @ p + noise
        return alpha * (qv + np.log2(g) - np.log2(interf)) + beta, p, interf

    for _ in range(inner_iters):
        p = 2.0 ** q
        interf = g_cross @ p + noise
        gamma = p * g / interf
        alpha = gamma / (1.0 + gamma)
        beta = np.log2(1.0 + gamma) - alpha * np.log2(gamma)

        # concave-bound ascent in q with backtracking
        terms, _, _ = bound_terms(q, alpha, beta)
        f_cur = float(terms.sum())
        for _ascent in range(20):
            p = 2.0 ** q
            interf = g_cross @ p + noise
            # dF/dq_k = alpha_k - ln2 * p_k * sum_i alpha_i g_cross[i,k] / interf_i
            grad = alpha - (2.0 ** q) * (g_cross.T @ (alpha / interf))
            scale = np.max(np.abs(grad))
            if scale < 1e-14:
                break
            step = 1.0 / scale
            improved = False
            for _bt in range(30):
                trial = np.clip(q + step * grad, lo_q, hi_q)
                terms, _, _ = bound_terms(trial, alpha, beta)
                f_trial = float(terms.sum())
                if f_trial > f_cur + 1e-15:
                    q, f_cur, improved = trial, f_trial, True
                    break
                step /= 2.0
            if not improved:
                break
    return PowerVector(watts_to_dbm(2.0 ** q))


def _solve_block_qubo(q: Qubo, cfg: BcdConfig, iteration: int):
    if cfg.assignment_backend == "qaoa":
        qcfg = replace(cfg.qaoa, seed=substream(cfg.seed, "qaoa-step", iteration).integers(2**63))
        bits, _, _ = qaoa_solve(q, qcfg)
    elif cfg.assignment_backend == "anneal":
        bits, _ = anneal_min(q, sweeps=400, restarts=4,
                             seed=substream(cfg.seed, "anneal-step", iteration).integers(2**63))
    else:
        if q.n > BRUTE_FORCE_CAP:
            raise ValueError(f"brute-force backend cannot handle n={q.n}")
        bits, _ = brute_force_min(q)
    return bits


def assignment_step(instance: NetworkInstance, powers: PowerVector,
                    incumbent: Assignment, block, cfg: BcdConfig,
                    iteration: int = 0) -> Assignment:
    """Re-assign the devices in `block` via the QUBO surrogate, keeping the
    incumbent whenever the decoded proposal would lower the true sum-rate."""
    block = list(block)
    candidates = candidate_channels(instance, powers, incumbent, block,
                                    cfg.candidates_per_device)
    q, vmap = build_assignment_qubo(instance, powers, block, candidates, incumbent,
                                    lam_onehot=cfg.lam_onehot, lam_int=cfg.lam_int)
    bits = _solve_block_qubo(q, cfg, iteration)
    proposal = decode_assignment(bits, vmap, incumbent)
    if sum_rate(instance, proposal, powers) >= sum_rate(instance, incumbent, powers):
        return proposal
    return incumbent


def _relaxed_assignment_step(instance, powers, incumbent, block, cfg, iteration=0):
    """SCA baseline's discrete handling: relax the block QUBO bits to [0,1],
    descend its energy by projected gradient (20 steps), round each device to
    its max-weight candidate, then apply the same monotone safeguard."""
    block = list(block)
    candidates = candidate_channels(instance, powers, incumbent, block,
                                    cfg.candidates_per_device)
    q, vmap = build_assignment_qubo(instance, powers, block, candidates, incumbent,
                                    lam_onehot=cfg.lam_onehot, lam_int=cfg.lam_int)
    quad = np.zeros((q.n, q.n))
    for (i, j), c in q.quad.items():
        quad[i, j] = quad[j, i] = c
    x = np.full(q.n, 0.5)

    def e_val(xv):
        return float(q.linear @ xv + 0.5 * xv @ quad @ xv)

    f_cur = e_val(x)
    # conservative Lipschitz bound on the quadratic's gradient
    lip = max(float(np.abs(quad).max()) * q.n, 1e-12)
    step = 1.0 / lip
    for _ in range(20):
        grad = q.linear + quad @ x
        trial = np.clip(x - step * grad, 0.0, 1.0)
        f_trial = e_val(trial)
        if f_trial < f_cur:
            x, f_cur = trial, f_trial
        else:
            step /= 2.0

    out = incumbent.copy()
    for i in block:
        weights = {k: x[vmap.index_of[(i, k)]] for k in candidates[i]}
        out.channel_of_device[i] = max(candidates[i], key=lambda k: (weights[k], vmap.rhat[(i, k)]))
    if sum_rate(instance, out, powers) >= sum_rate(instance, incumbent, powers):
        return out
    return incumbent


def _bcd_loop(instance: NetworkInstance, cfg: BcdConfig, solver_name: str,
              do_assignment, do_power):
    n = instance.config.num_devices
    assignment = greedy_assignment(instance)
    powers = midpoint_powers(instance)
    perm = substream(cfg.seed, "device-perm").permutation(n)
    trace = SolverTrace(solver=solver_name, seed=cfg.seed)
    evals0 = wireless.EVAL_COUNTER["count"]
    best = sum_rate(instance, assignment, powers)
    t0 = time.perf_counter()
    for it in range(cfg.outer_iterations):
        start = (it * cfg.block_size) % n
        block = [int(perm[(start + j) % n]) for j in range(min(cfg.block_size, n))]
        assignment = do_assignment(assignment, powers, block, it)
        powers = do_power(assignment, powers)
        rate = sum_rate(instance, assignment, powers)
        best = max(best, rate)
        trace.points.append(TracePoint(
            iteration=it, best_sum_rate_bps=best,
            assignment_hash=_hash_assignment(assignment),
            wall_s=time.perf_counter() - t0,
            work_evals=wireless.EVAL_COUNTER["count"] - evals0))
    return assignment, powers, trace


def _multi_start(instance: NetworkInstance, cfg: BcdConfig, solve_once):
    """Best-of-`cfg.restarts` runs: restart 0 keeps cfg.seed, later restarts
    derive fresh seeds; highest final true sum-rate wins, earliest on ties."""
    best = None
    for r in range(cfg.restarts):
        sub = replace(cfg, restarts=1)
        if r > 0:
            sub = replace(sub, seed=int(
                substream(cfg.seed, "bcd-restart", r).integers(2 ** 63)))
        result = solve_once(instance, sub)
        value = sum_rate(instance, result[0], result[1])
        if best is None or value > best[0]:
            best = (value, result)
    return best[1]


def solve_qaoa_bcd(instance: NetworkInstance, cfg: BcdConfig):
    """QAOA+QUBO+BCD pipeline; returns (Assignment, PowerVector, SolverTrace)."""
    if cfg.restarts > 1:
        return _multi_start(instance, cfg, solve_qaoa_bcd)

    def do_assignment(assignment, powers, block, it):
        return assignment_step(instance, powers, assignment, block, cfg, iteration=it)

    def do_power(assignment, powers):
        if cfg.power_step == "sca-bound":
            return power_step_sca(instance, assignment, powers, cfg.power_inner_iters)
        return power_step_pga(instance, assignment, powers,
                              cfg.power_inner_iters, cfg.pga_step_size)

    return _bcd_loop(instance, cfg, "qaoa_bcd", do_assignment, do_power)


def solve_sca_baseline(instance: NetworkInstance, cfg: BcdConfig):
    """SCA baseline on the identical BCD skeleton, initialization, and budget."""
    if cfg.restarts > 1:
        return _multi_start(instance, cfg, solve_sca_baseline)

    def do_assignment(assignment, powers, block, it):
        return _relaxed_assignment_step(instance, powers, assignment, block, cfg,
                                        iteration=it)

    def do_power(assignment, powers):
        lo, hi = instance.config.power_range_dbm
        if np.any(all_sinr(instance, assignment, powers) <= 0):
            powers = PowerVector(np.full(len(powers.power_dbm), (lo + hi) / 2.0))
        return power_step_sca(instance, assignment, powers, cfg.power_inner_iters)

    return _bcd_loop(instance, cfg, "sca", do_assignment, do_power)
