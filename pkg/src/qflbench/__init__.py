"""Desk-scale simulator for quantum-assisted federated learning over a
shared wireless uplink: QAOA/QUBO/BCD resource allocation versus an SCA
baseline, feeding a federated training harness."""

from .wireless import (NetworkConfig, NetworkInstance, Assignment, PowerVector,
                       sample_network, sinr, sum_rate, per_device_rates)
from .qubo import (Qubo, BitString, energy, energy_table, brute_force_min,
                   anneal_min, build_assignment_qubo, decode_assignment,
                   random_qubo)
from .quantum import (StateVector, Circuit, Gate, QaoaConfig, apply,
                      expect_qubo, qaoa_state, qaoa_solve, parameter_shift_grad)
from .solvers import (BcdConfig, SolverTrace, solve_qaoa_bcd, solve_sca_baseline,
                      power_step_pga, power_step_sca, assignment_step)
from .fl import (LabeledDataset, ModelParams, RoundRecord, FlConfig,
                 partition_noniid, vqc_forward, local_train, aggregate,
                 round_latency, run_federation)
from .data_io import parse_idx, write_idx, synth_blobs, load_idx_dataset
from .config import ExperimentConfig, parse_config, serialize_config, load_config

__version__ = "0.1.0"
