"""Race the QAOA+BCD pipeline against the SCA baseline on one desk-scale
network and print both sum-rate traces.

Run:  python3 demos/03_solver_race.py   (takes ~1 minute)
"""
import numpy as np

from qflbench import BcdConfig, NetworkConfig, sample_network, solve_qaoa_bcd, solve_sca_baseline

inst = sample_network(NetworkConfig(num_devices=24, num_channels=6, seed=0))
cfg = BcdConfig(outer_iterations=60, seed=0)

_, _, trace_q = solve_qaoa_bcd(inst, cfg)
_, _, trace_s = solve_sca_baseline(inst, cfg)

bq, bs = trace_q.best_rates(), trace_s.best_rates()
print(f"{'iter':>4} {'qaoa_bcd (Mbit/s)':>18} {'sca (Mbit/s)':>14}")
for it in range(0, 60, 5):
    print(f"{it:>4} {bq[it] / 1e6:>18.3f} {bs[it] / 1e6:>14.3f}")
print(f"{'end':>4} {bq[-1] / 1e6:>18.3f} {bs[-1] / 1e6:>14.3f}")
print(f"\nfinal gap: {100 * (bq[-1] - bs[-1]) / bs[-1]:.1f}%")
