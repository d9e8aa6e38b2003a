import dataclasses
import json
import os

import numpy as np
import pytest

from qflbench.cli import main
from qflbench.config import (DataSourceConfig, ExperimentConfig, load_config,
                             parse_config, serialize_config)
from qflbench.data_io import (IdxFormatError, IdxTruncatedError,
                              avg_pool_images, load_idx_dataset, parse_idx,
                              synth_blobs, write_idx)
from qflbench.experiments import (iterations_to_fraction, run_federate,
                                  run_optimize, worker_count, write_csv)
from qflbench.fl import FlConfig
from qflbench.rng import derive_seed, substream
from qflbench.solvers import BcdConfig
from qflbench.wireless import NetworkConfig


def small_experiment(tmp_path, **overrides):
    kwargs = dict(
        network=NetworkConfig(num_devices=4, num_channels=2, seed=0),
        bcd=BcdConfig(outer_iterations=4, block_size=2, power_inner_iters=1,
                      assignment_backend="brute-force"),
        fl=FlConfig(num_devices=4, rounds=2),
        data_source=DataSourceConfig(samples_per_class=40, feature_dim=4),
        output_dir=str(tmp_path),
        num_instances=2,
    )
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)


# --- rng -----------------------------------------------------------------

def test_derive_seed_stable_and_distinct():
    assert derive_seed(0, "a") == derive_seed(0, "a")
    assert derive_seed(0, "a") != derive_seed(0, "b")
    assert derive_seed(0, "a", 1) != derive_seed(0, "a", 2)
    assert derive_seed(1, "a") != derive_seed(0, "a")


def test_substream_independent_of_sibling_draws():
    a1 = substream(0, "x").uniform(size=4)
    _ = substream(0, "y").uniform(size=100)
    a2 = substream(0, "x").uniform(size=4)
    assert np.array_equal(a1, a2)


# --- idx ------------------------------------------------------------------

def test_idx_round_trip():
    img = np.arange(8, dtype=np.uint8).reshape(2, 2, 2)
    blob = write_idx("images", img)
    kind, arr = parse_idx(blob)
    assert kind == "images" and np.array_equal(arr, img)
    assert write_idx(kind, arr) == blob
    lbl = np.array([0, 1], dtype=np.uint8)
    blob = write_idx("labels", lbl)
    kind, arr = parse_idx(blob)
    assert kind == "labels" and np.array_equal(arr, lbl)


def test_idx_error_taxonomy():
    img = np.zeros((2, 3, 3), dtype=np.uint8)
    blob = write_idx("images", img)
    with pytest.raises(IdxTruncatedError):
        parse_idx(blob[:-1])
    with pytest.raises(IdxTruncatedError):
        parse_idx(blob[:6])
    with pytest.raises(IdxFormatError):
        parse_idx(blob + b"\x00")
    with pytest.raises(IdxFormatError):
        parse_idx(b"\xff\xff\xff\xff" + blob[4:])
    # truncation errors are a subtype of the format error
    assert issubclass(IdxTruncatedError, IdxFormatError)


def test_avg_pool_images():
    img = np.zeros((1, 8, 8), dtype=np.uint8)
    img[0, :4, :4] = 100
    pooled = avg_pool_images(img, out_side=2)
    assert pooled.shape == (1, 4)
    assert pooled[0, 0] == pytest.approx(100.0)
    assert pooled[0, 3] == pytest.approx(0.0)


def test_load_idx_dataset_scaling_and_subset(tmp_path):
    rng = np.random.default_rng(0)
    images = rng.integers(0, 256, (30, 8, 8), dtype=np.uint8)
    images[0] = 255  # force the scaling endpoints to appear
    images[1] = 0
    labels = (np.arange(30) % 3).astype(np.uint8)
    ip, lp = tmp_path / "img.idx", tmp_path / "lbl.idx"
    ip.write_bytes(write_idx("images", images))
    lp.write_bytes(write_idx("labels", labels))
    ds = load_idx_dataset(str(ip), str(lp), classes=(0, 2), pool_side=2, max_per_class=5)
    assert ds.num_classes == 2
    assert set(ds.labels) <= {0, 1}  # remapped
    assert len(ds) == 10
    assert ds.features.max() == pytest.approx(1.0)
    assert ds.features.min() == pytest.approx(0.0)
    with pytest.raises(IdxFormatError):
        load_idx_dataset(str(lp), str(ip))  # swapped kinds


def test_synth_blobs_degenerate_and_deterministic():
    centers = np.array([[0.2, 0.2], [0.8, 0.8]])
    ds = synth_blobs(centers, 0.0, 5, 2, seed=0)
    assert np.allclose(ds.features[:5], 0.2)
    assert np.allclose(ds.features[5:], 0.8)
    a = synth_blobs(centers, 0.1, 5, 2, seed=1)
    b = synth_blobs(centers, 0.1, 5, 2, seed=1)
    assert np.array_equal(a.features, b.features)
    with pytest.raises(ValueError):
        synth_blobs(centers, 0.1, 5, 3, seed=0)


# --- config ---------------------------------------------------------------

def test_config_round_trip():
    cfg = ExperimentConfig(master_seed=7, num_instances=3,
                           network=NetworkConfig(num_devices=5, num_channels=2))
    again = parse_config(serialize_config(cfg))
    assert again == cfg


def test_config_rejects_unknown_fields():
    with pytest.raises(ValueError):
        parse_config(json.dumps({"networkx": {}}))
    with pytest.raises(ValueError):
        parse_config(json.dumps({"network": {"num_towers": 3}}))


def test_empty_config_uses_desk_scale_defaults():
    cfg = parse_config("{}")
    assert cfg.network.num_devices == 24
    assert cfg.network.num_channels == 6
    assert cfg.bcd.outer_iterations == 150


def test_load_config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"master_seed": 9}))
    assert load_config(str(path)).master_seed == 9


def test_data_source_validation(tmp_path):
    with pytest.raises(ValueError):
        DataSourceConfig(kind="csv")
    with pytest.raises(ValueError):
        DataSourceConfig(kind="idx-files", images_path=str(tmp_path / "missing"),
                         labels_path=str(tmp_path / "missing"))


# --- experiment drivers ---------------------------------------------------

def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("QFLBENCH_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("QFLBENCH_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.setenv("QFLBENCH_THREADS", "garbage")
    assert worker_count() == 1
    monkeypatch.delenv("QFLBENCH_THREADS")
    assert worker_count() == 1


def test_iterations_to_fraction():
    best = np.array([0.0, 50.0, 94.0, 96.0, 100.0])
    assert iterations_to_fraction(best, 0.95) == 3
    assert iterations_to_fraction(np.array([5.0, 5.0]), 0.95) == 0


def test_write_csv_formats_floats_exactly(tmp_path):
    path = tmp_path / "out.csv"
    write_csv(str(path), ["a", "b"], [[1, 0.1 + 0.2]])
    text = path.read_text()
    assert text.splitlines()[0] == "a,b"
    assert text.splitlines()[1] == f"1,{0.1 + 0.2!r}"


def test_run_optimize_outputs(tmp_path):
    cfg = small_experiment(tmp_path)
    _, summary = run_optimize(cfg)
    trace = (tmp_path / "sumrate_trace.csv").read_text().splitlines()
    assert trace[0] == "solver,seed,iteration,sum_rate_bps,wall_ms"
    # 2 instances x 2 solvers x 4 iterations
    assert len(trace) == 1 + 2 * 2 * 4
    saved = json.loads((tmp_path / "summary.json").read_text())
    assert saved["num_instances"] == 2
    assert set(summary["mean_final_sum_rate_bps"]) == {"qaoa_bcd", "sca"}


def test_run_federate_outputs(tmp_path):
    cfg = small_experiment(tmp_path)
    records, summary = run_federate(cfg)
    rows = (tmp_path / "fl_rounds.csv").read_text().splitlines()
    assert rows[0] == "arm,seed,round,accuracy,loss,round_latency_s,cumulative_time_s"
    assert len(rows) == 1 + 2 * cfg.fl.rounds
    assert set(records) == {"qfl", "fl"}
    assert 0.0 <= summary["final_accuracy"]["qfl"] <= 1.0


# --- cli ------------------------------------------------------------------

def test_cli_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out


def test_cli_optimize_and_federate(tmp_path, capsys):
    cfg = small_experiment(tmp_path)
    path = tmp_path / "cfg.json"
    path.write_text(serialize_config(cfg))
    assert main(["optimize", "--config", str(path)]) == 0
    assert (tmp_path / "sumrate_trace.csv").exists()
    assert main(["federate", "--config", str(path)]) == 0
    assert (tmp_path / "fl_rounds.csv").exists()
    capsys.readouterr()


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"bogus_field": 1}))
    assert main(["optimize", "--config", str(bad)]) == 1
    assert main(["optimize", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["no-such-command"]) == 1
    capsys.readouterr()


def test_cli_qaoa_bench_small(capsys):
    assert main(["qaoa-bench", "--max-qubits", "5", "--instances", "4",
                 "--restarts", "2"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out
