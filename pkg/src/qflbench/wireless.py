"""Uplink network model: geometry, Rician fading, interference, Shannon rates.

All rate computations in the package bottom out here; a NetworkInstance is
the ground truth against which every candidate (assignment, powers) pair is
scored.
"""

from dataclasses import dataclass, field

import numpy as np

from .rng import substream

# K-factors at or above this are treated as the pure line-of-sight limit.
LOS_LIMIT_K = 1e6


def dbm_to_watts(p_dbm):
    """p_W = 10^((p_dBm - 30)/10); -inf dBm maps to exactly 0 W."""
    p = np.asarray(p_dbm, dtype=float)
    out = np.where(np.isneginf(p), 0.0, 10.0 ** ((p - 30.0) / 10.0))
    return out if out.ndim else float(out)


def watts_to_dbm(p_w):
    p = np.asarray(p_w, dtype=float)
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(p) + 30.0
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class NetworkConfig:
    num_devices: int = 200
    num_channels: int = 20
    channel_bandwidth_hz: float = 180e3
    distance_range_m: tuple = (1.0, 1800.0)
    power_range_dbm: tuple = (0.0, 24.0)
    noise_psd_dbm_per_hz: float = -174.0
    rician_k: float = 3.0
    pathloss_exponent: float = 3.0
    pathloss_ref_db: float = 30.0
    seed: int = 0

    def __post_init__(self):
        if self.num_devices < 1:
            raise ValueError(f"num_devices must be >= 1, got {self.num_devices}")
        if self.num_channels < 1:
            raise ValueError(f"num_channels must be >= 1, got {self.num_channels}")
        if not self.channel_bandwidth_hz > 0:
            raise ValueError("channel_bandwidth_hz must be positive")
        lo, hi = self.distance_range_m
        if not (0 < lo <= hi < np.inf):
            raise ValueError(f"distance_range_m must lie in (0, inf), got {self.distance_range_m}")
        if self.power_range_dbm[0] > self.power_range_dbm[1]:
            raise ValueError("power_range_dbm lower bound exceeds upper bound")
        if self.rician_k < 0:
            raise ValueError("rician_k must be >= 0")

    @property
    def noise_power_w(self):
        """Thermal noise power over one sub-channel, in watts."""
        return dbm_to_watts(self.noise_psd_dbm_per_hz) * self.channel_bandwidth_hz


@dataclass(frozen=True)
class NetworkInstance:
    config: NetworkConfig
    device_distances_m: np.ndarray  # (N,)
    link_gain: np.ndarray           # (N, K) linear power gain, path loss x fading

    def __post_init__(self):
        if not (np.all(self.link_gain > 0) and np.all(np.isfinite(self.link_gain))):
            raise ValueError("link gains must be strictly positive and finite")


@dataclass
class Assignment:
    channel_of_device: np.ndarray

    def __post_init__(self):
        self.channel_of_device = np.asarray(self.channel_of_device, dtype=int)

    def validate(self, config: NetworkConfig):
        a = self.channel_of_device
        if a.shape != (config.num_devices,):
            raise ValueError(f"assignment length {a.shape} != num_devices {config.num_devices}")
        if np.any(a < 0) or np.any(a >= config.num_channels):
            raise ValueError("assignment contains out-of-range channel index")

    def copy(self):
        return Assignment(self.channel_of_device.copy())


@dataclass
class PowerVector:
    power_dbm: np.ndarray

    def __post_init__(self):
        self.power_dbm = np.asarray(self.power_dbm, dtype=float)

    def validate(self, config: NetworkConfig):
        p = self.power_dbm
        if p.shape != (config.num_devices,):
            raise ValueError(f"power vector length {p.shape} != num_devices {config.num_devices}")
        lo, hi = config.power_range_dbm
        # -inf is allowed as an "off" sentinel (0 W)
        in_range = (p >= lo) | np.isneginf(p)
        if not np.all(in_range & (p <= hi)):
            raise ValueError(f"powers must lie in [{lo}, {hi}] dBm (or be -inf)")

    def watts(self):
        return dbm_to_watts(self.power_dbm)

    def copy(self):
        return PowerVector(self.power_dbm.copy())


def rician_fading_power(rng: np.random.Generator, k: float, size) -> np.ndarray:
    """|h|^2 draws with unit mean power: E|h|^2 = K/(K+1) + 1/(K+1) = 1.

    K >= LOS_LIMIT_K collapses to the deterministic line-of-sight limit.
    """
    if k >= LOS_LIMIT_K:
        return np.ones(size)
    los = np.sqrt(k / (k + 1.0))
    sigma = np.sqrt(1.0 / (2.0 * (k + 1.0)))
    phase = rng.uniform(0.0, 2.0 * np.pi, size)
    h = los * np.exp(1j * phase) + sigma * (rng.standard_normal(size) + 1j * rng.standard_normal(size))
    return np.abs(h) ** 2


def sample_network(config: NetworkConfig) -> NetworkInstance:
    """Draw device positions and per-(device, channel) block fading.

    Pure function of (config, config.seed): each device owns its own fading
    substream, so gains are byte-identical regardless of evaluation order.
    """
    n, k = config.num_devices, config.num_channels
    lo, hi = config.distance_range_m
    dist = substream(config.seed, "distances").uniform(lo, hi, n)
    pl_db = config.pathloss_ref_db + 10.0 * config.pathloss_exponent * np.log10(dist)
    pl_lin = 10.0 ** (-pl_db / 10.0)
    fading = np.empty((n, k))
    for i in range(n):
        fading[i] = rician_fading_power(substream(config.seed, "fading", i), config.rician_k, k)
    return NetworkInstance(config=config, device_distances_m=dist, link_gain=pl_lin[:, None] * fading)


def _channel_signal_totals(instance, assignment, powers_w):
    """Per-channel sum of received signal power from the devices on it."""
    a = assignment.channel_of_device
    sig = powers_w * instance.link_gain[np.arange(len(a)), a]
    totals = np.zeros(instance.config.num_channels)
    np.add.at(totals, a, sig)
    return sig, totals


def sinr(instance: NetworkInstance, assignment: Assignment, powers: PowerVector, device: int) -> float:
    """p_i g_{i,k} / (co-channel interference + N0*B) for one device."""
    assignment.validate(instance.config)
    powers.validate(instance.config)
    return float(all_sinr(instance, assignment, powers)[device])


def all_sinr(instance, assignment, powers) -> np.ndarray:
    p_w = powers.watts()
    sig, totals = _channel_signal_totals(instance, assignment, p_w)
    interference = totals[assignment.channel_of_device] - sig
    return sig / (interference + instance.config.noise_power_w)


# running count of true-objective evaluations; a deterministic work measure
# used by the solvers' reproducible trace timestamps
EVAL_COUNTER = {"count": 0}


def sum_rate(instance: NetworkInstance, assignment: Assignment, powers: PowerVector) -> float:
    """Shannon sum-rate: sum_i B * log2(1 + SINR_i), in bit/s."""
    EVAL_COUNTER["count"] += 1
    gamma = all_sinr(instance, assignment, powers)
    return float(instance.config.channel_bandwidth_hz * np.sum(np.log2(1.0 + gamma)))


def per_device_rates(instance, assignment, powers) -> np.ndarray:
    """B * log2(1 + SINR_i) per device, in bit/s."""
    gamma = all_sinr(instance, assignment, powers)
    return instance.config.channel_bandwidth_hz * np.log2(1.0 + gamma)
