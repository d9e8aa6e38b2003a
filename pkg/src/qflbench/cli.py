"""Command-line entry point.

Subcommands:
  optimize    --config F   sum-rate traces for both solvers (Fig-4a analogue)
  federate    --config F   federated convergence under both solvers' rates
  qaoa-bench  --max-qubits Q --instances M   QAOA vs brute-force oracle
  selftest                 quick invariant suite; exit 0 iff all pass
"""

import argparse
import sys

import numpy as np


def _cmd_optimize(args):
    from .config import ExperimentConfig, load_config
    from .experiments import run_optimize

    cfg = load_config(args.config) if args.config else ExperimentConfig()
    _, summary = run_optimize(cfg, args.out)
    print(f"wrote sumrate_trace.csv + summary.json to {args.out or cfg.output_dir}")
    print(f"mean final sum-rate: qaoa_bcd={summary['mean_final_sum_rate_bps']['qaoa_bcd']:.3e} "
          f"sca={summary['mean_final_sum_rate_bps']['sca']:.3e} "
          f"gap={summary['gap_percent']:.1f}%")
    return 0


def _cmd_federate(args):
    from .config import ExperimentConfig, load_config
    from .experiments import run_federate

    cfg = load_config(args.config) if args.config else ExperimentConfig()
    _, summary = run_federate(cfg, args.out)
    print(f"wrote fl_rounds.csv + fl_summary.json to {args.out or cfg.output_dir}")
    print(f"final accuracy: qfl={summary['final_accuracy']['qfl']:.3f} "
          f"fl={summary['final_accuracy']['fl']:.3f}")
    return 0


def _cmd_qaoa_bench(args):
    from .qubo import brute_force_min, energy_table, random_qubo
    from .quantum import QaoaConfig, qaoa_solve
    from .rng import substream

    exact = within = 0
    print(f"{'inst':>4} {'n':>3} {'qaoa':>12} {'optimum':>12} {'gap%':>8} {'status':>8}")
    for m in range(args.instances):
        rng = substream(args.seed, "bench", m)
        n = int(rng.integers(2, args.max_qubits + 1))
        q = random_qubo(n, rng)
        _, best = brute_force_min(q)
        worst = float(energy_table(q).max())
        span = worst - best or 1.0
        cfg = QaoaConfig(depth_p=3, shots=1024, restarts=args.restarts,
                         seed=int(rng.integers(2**63)))
        _, val, _ = qaoa_solve(q, cfg)
        gap = 100.0 * (val - best) / span
        ok = gap <= 5.0
        exact += val <= best + 1e-9
        within += ok
        print(f"{m:>4} {n:>3} {val:>12.4f} {best:>12.4f} {gap:>8.2f} "
              f"{'pass' if ok else 'FAIL':>8}")
    print(f"within 5% of range: {within}/{args.instances}; "
          f"exact optimum: {exact}/{args.instances}")
    passed = within >= int(0.9 * args.instances) and exact >= int(0.8 * args.instances)
    print("qaoa-bench:", "PASS" if passed else "FAIL")
    return 0 if passed else 1


def _selftest_checks():
    import dataclasses

    from . import wireless
    from .data_io import parse_idx, write_idx
    from .fl import LabeledDataset, aggregate, init_model, partition_noniid, ModelParams
    from .qubo import BitString, brute_force_min, energy, random_qubo
    from .quantum import (Circuit, QaoaConfig, RY, StateVector, apply,
                          parameter_shift_grad, qaoa_solve)
    from .rng import substream
    from .solvers import BcdConfig, solve_qaoa_bcd, solve_sca_baseline
    from .wireless import NetworkConfig, sample_network

    checks = []

    # statevector norm under a long random circuit
    rng = substream(0, "selftest-gates")
    gates = [RY(int(rng.integers(4)), angle=float(rng.uniform(0, 2 * np.pi)))
             for _ in range(500)]
    state = apply(StateVector.zero(4), Circuit(4, gates))
    checks.append(("unitarity", abs(state.norm() - 1.0) <= 1e-9))

    # parameter-shift vs analytic gradient of <Z> after RY(theta)
    theta = 0.7
    circ = Circuit(1, [RY(0, slot=0)])
    grad = parameter_shift_grad(circ, [theta], 0, StateVector.zero(1))
    checks.append(("parameter-shift", abs(grad[0] + np.sin(theta)) <= 1e-10))

    # QAOA finds the optimum of a small random QUBO
    q = random_qubo(6, substream(1, "selftest-qubo"))
    _, best = brute_force_min(q)
    _, val, _ = qaoa_solve(q, QaoaConfig(depth_p=2, restarts=2, seed=3))
    checks.append(("qaoa-oracle", val <= best + 1e-9))

    # both solver traces are monotone on a tiny instance
    net = NetworkConfig(num_devices=4, num_channels=3, seed=11)
    instance = sample_network(net)
    bcd = BcdConfig(outer_iterations=10, block_size=2, assignment_backend="brute-force",
                    power_inner_iters=2, seed=5)
    for name, solver in (("qaoa-bcd-monotone", solve_qaoa_bcd),
                         ("sca-monotone", solve_sca_baseline)):
        _, _, trace = solver(instance, bcd)
        best_rates = trace.best_rates()
        checks.append((name, bool(np.all(np.diff(best_rates) >= -1e-9))))

    # single-label disjoint partition
    labels = np.arange(200) % 2
    data = LabeledDataset(np.zeros((200, 2)), labels, 2)
    shards = partition_noniid(data, 4, seed=0)
    purity = all(len(np.unique(s.labels)) == 1 for s in shards)
    cover = sum(len(s) for s in shards) == len(data)
    checks.append(("partition", purity and cover))

    # weighted-mean aggregation
    shape = init_model("linear", 2, 2, seed=0).shape
    m1 = ModelParams("linear", np.full(shape.num_params, 1.0), shape)
    m3 = ModelParams("linear", np.full(shape.num_params, 3.0), shape)
    agg = aggregate([m1, m3], [10, 30])
    checks.append(("aggregate", np.allclose(agg.values, 2.5, atol=1e-12)))

    # IDX round-trip
    img = np.arange(8, dtype=np.uint8).reshape(2, 2, 2)
    blob = write_idx("images", img)
    kind, arr = parse_idx(blob)
    checks.append(("idx-roundtrip", kind == "images" and np.array_equal(arr, img)
                   and write_idx(kind, arr) == blob))
    return checks


def _cmd_selftest(args):
    checks = _selftest_checks()
    ok = True
    for name, passed in checks:
        print(f"{name:<20} {'pass' if passed else 'FAIL'}")
        ok &= passed
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="qflbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="run both solvers, write sum-rate traces")
    p.add_argument("--config", help="experiment JSON (defaults are desk-scale)")
    p.add_argument("--out", help="output directory (overrides config)")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("federate", help="run the federated-learning comparison")
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_federate)

    p = sub.add_parser("qaoa-bench", help="QAOA vs brute-force oracle table")
    p.add_argument("--max-qubits", type=int, default=10, dest="max_qubits")
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_qaoa_bench)

    p = sub.add_parser("selftest", help="run the quick invariant suite")
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
