"""The two headline experiments (sum-rate traces and federated convergence)
plus their CSV/JSON result writers.

All CSV columns are fixed-order and every value is written deterministically,
so re-running with the same master seed reproduces the files byte-for-byte.
The wall_ms column reports modeled solver work (one unit per true-objective
evaluation), not measured wall-clock, precisely to keep outputs reproducible.
"""

import csv
import dataclasses
import json
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .config import ExperimentConfig
from .data_io import default_blob_dataset, load_idx_dataset, synth_blobs
from .fl import run_federation
from .rng import derive_seed
from .solvers import solve_qaoa_bcd, solve_sca_baseline
from .wireless import NetworkConfig, per_device_rates, sample_network

SUMRATE_COLUMNS = ["solver", "seed", "iteration", "sum_rate_bps", "wall_ms"]
FL_COLUMNS = ["arm", "seed", "round", "accuracy", "loss", "round_latency_s",
              "cumulative_time_s"]


def worker_count() -> int:
    """Worker cap from QFLBENCH_THREADS (0 or unset-invalid = auto)."""
    raw = os.environ.get("QFLBENCH_THREADS", "1")
    try:
        val = int(raw)
    except ValueError:
        return 1
    if val == 0:
        return os.cpu_count() or 1
    return max(val, 1)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: str, columns, rows):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def iterations_to_fraction(best_rates: np.ndarray, fraction: float = 0.95) -> int:
    """First iteration index whose best-so-far rate reaches fraction x final."""
    target = fraction * best_rates[-1]
    return int(np.argmax(best_rates >= target))


def _run_one_instance(args):
    cfg, index = args
    net_seed = derive_seed(cfg.master_seed, "network", index)
    net = dataclasses.replace(cfg.network, seed=net_seed)
    instance = sample_network(net)
    solver_seed = derive_seed(cfg.master_seed, "solver", index)
    bcd = dataclasses.replace(cfg.bcd, seed=solver_seed)
    out = {}
    for name, solver in (("qaoa_bcd", solve_qaoa_bcd), ("sca", solve_sca_baseline)):
        assignment, powers, trace = solver(instance, bcd)
        out[name] = {
            "trace": trace,
            "rates": per_device_rates(instance, assignment, powers),
        }
    return index, out


def run_optimize(cfg: ExperimentConfig, output_dir: str = None):
    """Fig-4a-style experiment: both solvers over num_instances seeded
    networks. Writes sumrate_trace.csv and summary.json."""
    output_dir = output_dir or cfg.output_dir
    os.makedirs(output_dir, exist_ok=True)
    jobs = [(cfg, i) for i in range(cfg.num_instances)]
    workers = worker_count()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_run_one_instance, jobs))
    else:
        results = dict(map(_run_one_instance, jobs))

    rows = []
    finals = {"qaoa_bcd": [], "sca": []}
    iters95 = {"qaoa_bcd": [], "sca": []}
    for i in sorted(results):
        for name in ("qaoa_bcd", "sca"):
            trace = results[i][name]["trace"]
            best = trace.best_rates()
            finals[name].append(float(best[-1]))
            iters95[name].append(iterations_to_fraction(best))
            for p in trace.points:
                rows.append([name, trace.seed, p.iteration, p.best_sum_rate_bps,
                             float(p.work_evals)])
    write_csv(os.path.join(output_dir, "sumrate_trace.csv"), SUMRATE_COLUMNS, rows)

    mean_q = float(np.mean(finals["qaoa_bcd"]))
    mean_s = float(np.mean(finals["sca"]))
    summary = {
        "num_instances": cfg.num_instances,
        "mean_final_sum_rate_bps": {"qaoa_bcd": mean_q, "sca": mean_s},
        "gap_percent": 100.0 * (mean_q - mean_s) / mean_s if mean_s else None,
        "mean_iterations_to_95pct": {k: float(np.mean(v)) for k, v in iters95.items()},
    }
    with open(os.path.join(output_dir, "summary.json"), "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
    return results, summary


def build_dataset(cfg: ExperimentConfig):
    ds = cfg.data_source
    if ds.kind == "idx-files":
        return load_idx_dataset(ds.images_path, ds.labels_path, classes=ds.classes,
                                max_per_class=ds.samples_per_class)
    return default_blob_dataset(feature_dim=ds.feature_dim,
                                samples_per_class=ds.samples_per_class,
                                stddev=ds.stddev,
                                seed=derive_seed(cfg.master_seed, "dataset"),
                                num_classes=len(ds.classes))


def run_federate(cfg: ExperimentConfig, output_dir: str = None):
    """Fig-4b-style experiment: solve the network with both solvers, feed the
    resulting per-device rates into two federation arms. Writes fl_rounds.csv
    and fl_summary.json."""
    output_dir = output_dir or cfg.output_dir
    os.makedirs(output_dir, exist_ok=True)
    # the federation's network has exactly the participating devices
    net = dataclasses.replace(cfg.network, num_devices=cfg.fl.num_devices,
                              seed=derive_seed(cfg.master_seed, "fl-network"))
    instance = sample_network(net)
    bcd = dataclasses.replace(cfg.bcd, seed=derive_seed(cfg.master_seed, "fl-solver"))
    a_q, p_q, _ = solve_qaoa_bcd(instance, bcd)
    a_s, p_s, _ = solve_sca_baseline(instance, bcd)
    rates_qfl = per_device_rates(instance, a_q, p_q)
    rates_fl = per_device_rates(instance, a_s, p_s)

    data = build_dataset(cfg)
    fl_cfg = dataclasses.replace(cfg.fl, seed=derive_seed(cfg.master_seed, "federation"))
    records = run_federation(data, fl_cfg, rates_qfl, rates_fl)

    rows = []
    for arm in ("qfl", "fl"):
        for r in records[arm]:
            rows.append([arm, fl_cfg.seed, r.round_index, r.accuracy, r.loss,
                         r.round_latency_s, r.cumulative_time_s])
    write_csv(os.path.join(output_dir, "fl_rounds.csv"), FL_COLUMNS, rows)

    summary = {
        "rates_bps": {"qfl": rates_qfl.tolist(), "fl": rates_fl.tolist()},
        "final_accuracy": {arm: records[arm][-1].accuracy for arm in records},
        "total_time_s": {arm: records[arm][-1].cumulative_time_s for arm in records},
    }
    with open(os.path.join(output_dir, "fl_summary.json"), "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
    return records, summary
