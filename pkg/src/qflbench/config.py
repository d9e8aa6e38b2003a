"""Experiment configuration: a single JSON document with embedded defaults,
so a minimal (even empty) config runs the desk-scale experiment."""

import dataclasses
import json
import os
from dataclasses import dataclass, field

from .fl import FlConfig, VqcShape
from .quantum import QaoaConfig
from .solvers import BcdConfig
from .wireless import NetworkConfig

DESK_SCALE_NETWORK = dict(num_devices=24, num_channels=6)


@dataclass
class DataSourceConfig:
    kind: str = "synthetic"          # "synthetic" | "idx-files"
    images_path: str = None
    labels_path: str = None
    classes: tuple = (0, 1)
    samples_per_class: int = 1000
    stddev: float = 0.08
    feature_dim: int = 16

    def __post_init__(self):
        if self.kind not in ("synthetic", "idx-files"):
            raise ValueError(f"unknown data source {self.kind!r}")
        if self.kind == "idx-files":
            for p in (self.images_path, self.labels_path):
                if not p or not os.path.exists(p):
                    raise ValueError(f"idx-files data source references a missing path: {p!r}")


@dataclass
class ExperimentConfig:
    network: NetworkConfig = field(default_factory=lambda: NetworkConfig(**DESK_SCALE_NETWORK))
    bcd: BcdConfig = field(default_factory=BcdConfig)
    fl: FlConfig = field(default_factory=FlConfig)
    data_source: DataSourceConfig = field(default_factory=DataSourceConfig)
    output_dir: str = "results"
    master_seed: int = 0
    num_instances: int = 20


def _to_plain(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {k: _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    return obj


def serialize_config(cfg: ExperimentConfig) -> str:
    return json.dumps(_to_plain(cfg), indent=2)


_TUPLE_FIELDS = {"distance_range_m", "power_range_dbm", "classes"}


def _build(cls, doc: dict):
    kwargs = {}
    hints = {f.name: f for f in dataclasses.fields(cls)}
    for key, val in doc.items():
        if key not in hints:
            raise ValueError(f"unknown config field {key!r} for {cls.__name__}")
        if key == "qaoa":
            val = _build(QaoaConfig, val)
        elif key == "vqc_shape":
            val = _build(VqcShape, val)
        elif key in _TUPLE_FIELDS and isinstance(val, list):
            val = tuple(val)
        kwargs[key] = val
    return cls(**kwargs)


def parse_config(text: str) -> ExperimentConfig:
    doc = json.loads(text)
    kwargs = {}
    if "network" in doc:
        kwargs["network"] = _build(NetworkConfig, doc.pop("network"))
    if "bcd" in doc:
        kwargs["bcd"] = _build(BcdConfig, doc.pop("bcd"))
    if "fl" in doc:
        kwargs["fl"] = _build(FlConfig, doc.pop("fl"))
    if "data_source" in doc:
        kwargs["data_source"] = _build(DataSourceConfig, doc.pop("data_source"))
    for key in ("output_dir", "master_seed", "num_instances"):
        if key in doc:
            kwargs[key] = doc.pop(key)
    if doc:
        raise ValueError(f"unknown top-level config fields: {sorted(doc)}")
    return ExperimentConfig(**kwargs)


def load_config(path: str) -> ExperimentConfig:
    with open(path) as f:
        return parse_config(f.read())
