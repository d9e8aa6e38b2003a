"""A guided tour of the uplink model: sample a small network, inspect the
gains, and see how interference shapes the sum-rate.

Run:  python3 demos/01_network_tour.py
"""
import numpy as np

from qflbench import (Assignment, NetworkConfig, PowerVector, per_device_rates,
                      sample_network, sum_rate)

cfg = NetworkConfig(num_devices=6, num_channels=3, seed=7)
inst = sample_network(cfg)

print("device distances (m):", np.round(inst.device_distances_m, 1))
print("link gains (dB):")
print(np.round(10 * np.log10(inst.link_gain), 1))

# everyone piles onto channel 0 at full power: lots of interference
crowded = Assignment(np.zeros(6, dtype=int))
full = PowerVector(np.full(6, 24.0))
print(f"\ncrowded sum-rate : {sum_rate(inst, crowded, full) / 1e6:.3f} Mbit/s")

# spread the devices over the three channels
spread = Assignment(np.arange(6) % 3)
print(f"spread sum-rate  : {sum_rate(inst, spread, full) / 1e6:.3f} Mbit/s")

rates = per_device_rates(inst, spread, full)
for i, r in enumerate(rates):
    print(f"  device {i}: channel {spread.channel_of_device[i]}, "
          f"{r / 1e3:.1f} kbit/s")
