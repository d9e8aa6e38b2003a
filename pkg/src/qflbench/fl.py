"""Federated training simulator: non-IID single-label partition, local
training of a variational-quantum-circuit or linear classifier, weighted
aggregation, and a straggler-bound latency model driven by uplink rates.
"""

from dataclasses import dataclass, field

import numpy as np

from .quantum import Circuit, StateVector, RY, CZ, apply, z_expectations, parameter_shift_grad
from .rng import substream

COMPUTE_SECONDS = {"linear": 0.05, "vqc": 0.10}
BITS_PER_PARAM = 32


@dataclass
class LabeledDataset:
    features: np.ndarray   # (samples, feature_dim), values in [0, 1]
    labels: np.ndarray     # (samples,), class indices
    num_classes: int

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if len(self.features) == 0:
            raise ValueError("dataset is empty")
        if self.features.min() < 0 or self.features.max() > 1:
            raise ValueError("feature values must lie in [0, 1]")
        if self.labels.min() < 0 or self.labels.max() >= self.num_classes:
            raise ValueError("labels must lie in [0, num_classes)")

    def __len__(self):
        return len(self.features)

    def subset(self, idx):
        return LabeledDataset(self.features[idx], self.labels[idx], self.num_classes)


@dataclass
class VqcShape:
    n_qubits: int = 8
    encode_layers: int = 2
    var_layers: int = 3

    @property
    def feature_dim(self):
        return self.n_qubits * self.encode_layers

    @property
    def num_params(self):
        return self.n_qubits * self.var_layers


@dataclass
class LinearShape:
    feature_dim: int
    num_classes: int

    @property
    def num_params(self):
        # weights plus per-class bias
        return (self.feature_dim + 1) * self.num_classes


@dataclass
class ModelParams:
    kind: str              # "vqc" | "linear"
    values: np.ndarray
    shape: object          # VqcShape | LinearShape

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.kind not in ("vqc", "linear"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if len(self.values) != self.shape.num_params:
            raise ValueError(f"parameter vector length {len(self.values)} does not "
                             f"match shape ({self.shape.num_params})")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("parameters must be finite")

    def copy(self):
        return ModelParams(self.kind, self.values.copy(), self.shape)


def init_model(kind: str, feature_dim: int, num_classes: int, seed: int,
               vqc_shape: VqcShape = None) -> ModelParams:
    rng = substream(seed, "model-init")
    if kind == "vqc":
        shape = vqc_shape or VqcShape()
        if shape.feature_dim != feature_dim:
            raise ValueError(f"vqc shape expects {shape.feature_dim} features, data has {feature_dim}")
        if num_classes > shape.n_qubits:
            raise ValueError("num_classes cannot exceed qubit count (one readout qubit per class)")
        return ModelParams("vqc", rng.uniform(-0.1, 0.1, shape.num_params), shape)
    shape = LinearShape(feature_dim, num_classes)
    return ModelParams("linear", rng.normal(0.0, 0.01, shape.num_params), shape)


@dataclass
class RoundRecord:
    round_index: int
    accuracy: float
    loss: float
    round_latency_s: float
    cumulative_time_s: float
    participants: int


def partition_noniid(data: LabeledDataset, num_devices: int, seed: int):
    """Single-label shards: device d is assigned class d mod num_classes, and
    each class's samples are split evenly (remainder to earlier devices)
    among the devices holding that class. Disjoint cover of the dataset."""
    shards = []
    per_class_devices = {}
    for d in range(num_devices):
        per_class_devices.setdefault(d % data.num_classes, []).append(d)
    shard_idx = [None] * num_devices
    for c, devs in per_class_devices.items():
        idx = np.flatnonzero(data.labels == c)
        if len(idx) == 0:
            raise ValueError(f"class {c} has no samples to shard")
        idx = substream(seed, "partition", c).permutation(idx)
        splits = np.array_split(idx, len(devs))
        for d, s in zip(devs, splits):
            shard_idx[d] = s
    for d in range(num_devices):
        shards.append(data.subset(shard_idx[d]))
    return shards


# --- VQC classifier -------------------------------------------------------

def build_vqc_circuit(shape: VqcShape, features: np.ndarray) -> Circuit:
    """Angle encoding RY(pi * x_j) per qubit per encode layer (CZ ring between
    layers), then var_layers of trainable per-qubit RY followed by a CZ ring."""
    n = shape.n_qubits
    gates = []
    for layer in range(shape.encode_layers):
        for q in range(n):
            gates.append(RY(q, angle=np.pi * features[layer * n + q]))
        for q in range(n):
            gates.append(CZ(q, (q + 1) % n))
    slot = 0
    for _ in range(shape.var_layers):
        for q in range(n):
            gates.append(RY(q, slot=slot))
            slot += 1
        for q in range(n):
            gates.append(CZ(q, (q + 1) % n))
    return Circuit(n, gates)


def vqc_forward(params: ModelParams, feature_vector: np.ndarray, num_classes: int) -> np.ndarray:
    """Raw class scores: <Z> on qubit c for class c; each score in [-1, 1]."""
    shape = params.shape
    if num_classes > shape.n_qubits:
        raise ValueError("num_classes cannot exceed qubit count")
    circuit = build_vqc_circuit(shape, np.asarray(feature_vector, dtype=float))
    state = apply(StateVector.zero(shape.n_qubits), circuit, params.values)
    return np.array([z_expectations(state, (c,)) for c in range(num_classes)])


def softmax(scores):
    z = scores - np.max(scores, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _vqc_loss_grad(params, x, y, num_classes):
    """Cross-entropy loss and its gradient for one sample, with d<Z_c>/dtheta
    via the parameter-shift rule."""
    circuit = build_vqc_circuit(params.shape, x)
    state0 = StateVector.zero(params.shape.n_qubits)
    state = apply(state0, circuit, params.values)
    scores = np.array([z_expectations(state, (c,)) for c in range(num_classes)])
    probs = softmax(scores)
    loss = -np.log(max(probs[y], 1e-12))
    dscores = probs.copy()
    dscores[y] -= 1.0
    grad = np.zeros_like(params.values)
    for c in range(num_classes):
        if dscores[c] != 0.0:
            grad += dscores[c] * parameter_shift_grad(circuit, params.values, (c,), state0)
    return loss, grad


def _linear_forward(params, features):
    shape = params.shape
    w = params.values[:shape.feature_dim * shape.num_classes].reshape(shape.feature_dim,
                                                                      shape.num_classes)
    b = params.values[shape.feature_dim * shape.num_classes:]
    return features @ w + b


def predict(params: ModelParams, features: np.ndarray, num_classes: int) -> np.ndarray:
    features = np.atleast_2d(features)
    if params.kind == "linear":
        scores = _linear_forward(params, features)
    else:
        scores = np.vstack([vqc_forward(params, x, num_classes) for x in features])
    return np.argmax(scores, axis=-1)


def evaluate(params: ModelParams, data: LabeledDataset):
    """(accuracy, mean cross-entropy) on a dataset."""
    if params.kind == "linear":
        scores = _linear_forward(params, data.features)
    else:
        scores = np.vstack([vqc_forward(params, x, data.num_classes) for x in data.features])
    probs = softmax(scores)
    picked = probs[np.arange(len(data)), data.labels]
    loss = float(-np.mean(np.log(np.clip(picked, 1e-12, None))))
    acc = float(np.mean(np.argmax(scores, axis=-1) == data.labels))
    return acc, loss


def local_train(params: ModelParams, shard: LabeledDataset, epochs: int,
                learning_rate: float, batch_size: int, seed: int):
    """Mini-batch SGD on cross-entropy. Returns (updated params, shard size);
    the sample count is the aggregation weight."""
    if len(shard) == 0:
        raise ValueError("shard is empty")
    out = params.copy()
    rng = substream(seed, "local-train")
    n = len(shard)
    for _epoch in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            batch = order[start:start + batch_size]
            xb, yb = shard.features[batch], shard.labels[batch]
            if out.kind == "linear":
                scores = _linear_forward(out, xb)
                probs = softmax(scores)
                d = probs
                d[np.arange(len(yb)), yb] -= 1.0
                d /= len(yb)
                shape = out.shape
                gw = xb.T @ d
                gb = d.sum(axis=0)
                grad = np.concatenate([gw.ravel(), gb])
            else:
                grad = np.zeros_like(out.values)
                for x, y in zip(xb, yb):
                    _, g = _vqc_loss_grad(out, x, y, shard.num_classes)
                    grad += g
                grad /= len(yb)
            out.values = out.values - learning_rate * grad
    return out, n


def aggregate(models, counts) -> ModelParams:
    """Element-wise weighted mean: sum n_i theta_i / sum n_i."""
    if not models:
        raise ValueError("no models to aggregate")
    first = models[0]
    total = 0.0
    acc = np.zeros_like(first.values)
    for m, c in zip(models, counts):
        if m.kind != first.kind or len(m.values) != len(first.values):
            raise ValueError("all models must share kind and shape")
        if c <= 0:
            raise ValueError("sample counts must be positive")
        acc += float(c) * m.values
        total += float(c)
    if total == 0:
        raise ValueError("zero total sample count")
    return ModelParams(first.kind, acc / total, first.shape)


def round_latency(rates_bps, model_bits: int, participants, kind: str = "linear",
                  compute_seconds: dict = None) -> float:
    """Synchronous straggler-bound round time: max_i model_bits / rate_i over
    the participants, plus a per-kind compute constant."""
    compute_seconds = compute_seconds or COMPUTE_SECONDS
    rates_bps = np.asarray(rates_bps, dtype=float)
    participants = list(participants)
    if np.any(rates_bps[participants] <= 0):
        raise ValueError("all participant rates must be positive")
    upload = float(np.max(model_bits / rates_bps[participants]))
    return upload + compute_seconds[kind]


@dataclass
class FlConfig:
    num_devices: int = 10
    rounds: int = 30
    model_kind_qfl: str = "linear"
    model_kind_fl: str = "linear"
    epochs: int = 1
    learning_rate: float = 0.5
    batch_size: int = 16
    holdout_fraction: float = 0.25
    vqc_shape: VqcShape = field(default_factory=VqcShape)
    compute_seconds: dict = field(default_factory=lambda: dict(COMPUTE_SECONDS))
    bits_per_param: int = BITS_PER_PARAM
    seed: int = 0


def _train_test_split(data: LabeledDataset, holdout_fraction: float, seed: int):
    idx = substream(seed, "holdout").permutation(len(data))
    cut = int(round(len(data) * holdout_fraction))
    return data.subset(idx[cut:]), data.subset(idx[:cut])


def run_arm(data_train, data_test, cfg: FlConfig, rates_bps, kind: str):
    """One federation arm: shared partition/init/training seeds, latency from
    the supplied per-device rates."""
    shards = partition_noniid(data_train, cfg.num_devices, cfg.seed)
    model = init_model(kind, data_train.features.shape[1], data_train.num_classes,
                       cfg.seed, cfg.vqc_shape)
    model_bits = cfg.bits_per_param * len(model.values)
    participants = list(range(cfg.num_devices))
    records = []
    cumulative = 0.0
    for rnd in range(cfg.rounds):
        locals_, counts = [], []
        for d in participants:
            upd, cnt = local_train(model, shards[d], cfg.epochs, cfg.learning_rate,
                                   cfg.batch_size,
                                   seed=hash((cfg.seed, rnd, d)) & 0x7FFFFFFF)
            locals_.append(upd)
            counts.append(cnt)
        model = aggregate(locals_, counts)
        acc, loss = evaluate(model, data_test)
        latency = round_latency(rates_bps, model_bits, participants, kind,
                                cfg.compute_seconds)
        cumulative += latency
        records.append(RoundRecord(rnd, acc, loss, latency, cumulative,
                                   len(participants)))
    return records


def run_federation(data: LabeledDataset, cfg: FlConfig, rates_qfl, rates_fl):
    """Two arms sharing everything except the uplink rates (and optionally the
    model family). Returns {'qfl': [RoundRecord...], 'fl': [...]}."""
    train, test = _train_test_split(data, cfg.holdout_fraction, cfg.seed)
    return {
        "qfl": run_arm(train, test, cfg, np.asarray(rates_qfl, dtype=float),
                       cfg.model_kind_qfl),
        "fl": run_arm(train, test, cfg, np.asarray(rates_fl, dtype=float),
                      cfg.model_kind_fl),
    }
