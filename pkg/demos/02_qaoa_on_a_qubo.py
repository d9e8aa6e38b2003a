"""Solve a random QUBO three ways — exhaustively, by simulated annealing, and
by QAOA on an exact statevector — and compare.

Run:  python3 demos/02_qaoa_on_a_qubo.py
"""
import numpy as np

from qflbench import QaoaConfig, anneal_min, brute_force_min, qaoa_solve, random_qubo
from qflbench.rng import substream

q = random_qubo(10, substream(42, "demo-qubo"))

bits, exact = brute_force_min(q)
print(f"brute force : energy {exact:+.4f}  bits {''.join(map(str, bits.bits))}")

bits_a, val_a = anneal_min(q, sweeps=1000, restarts=5, seed=0)
print(f"annealer    : energy {val_a:+.4f}  bits {''.join(map(str, bits_a.bits))}")

bits_q, val_q, trace = qaoa_solve(q, QaoaConfig(depth_p=3, restarts=3, seed=0))
print(f"qaoa (p=3)  : energy {val_q:+.4f}  bits {''.join(map(str, bits_q.bits))}")

expectations = [v for _, v in trace]
print(f"\nangle optimization: {len(expectations)} expectation evaluations, "
      f"first {expectations[0]:+.4f} -> best {min(expectations):+.4f}")
print("gap to optimum:", f"{val_q - exact:.2e}")
