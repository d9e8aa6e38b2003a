import csv

import pytest

from plotkit.figures import (ColumnError, FigureSpec, load_csv, plot_fl,
                             plot_traces, sumrate_spec)
from plotkit.cli import main


def write_sumrate_csv(path, seeds=(1, 2)):
    rows = [["solver", "seed", "iteration", "sum_rate_bps", "wall_ms"]]
    for solver, base in (("qaoa_bcd", 2.0e7), ("sca", 1.6e7)):
        for seed in seeds:
            for it in range(5):
                rows.append([solver, seed, it, base + 1e5 * it * seed, it])
    with open(path, "w", newline="") as f:
        csv.writer(f).writerows(rows)


def write_fl_csv(path):
    rows = [["arm", "seed", "round", "accuracy", "loss", "round_latency_s",
             "cumulative_time_s"]]
    for arm, dt in (("qfl", 1.0), ("fl", 2.0)):
        for rnd in range(6):
            rows.append([arm, 0, rnd, 0.5 + 0.05 * rnd, 1.0 - 0.1 * rnd,
                         dt, dt * (rnd + 1)])
    with open(path, "w", newline="") as f:
        csv.writer(f).writerows(rows)


def test_load_csv_and_missing_column(tmp_path):
    path = tmp_path / "t.csv"
    write_sumrate_csv(path)
    cols = load_csv(str(path))
    assert set(cols) == {"solver", "seed", "iteration", "sum_rate_bps", "wall_ms"}
    spec = FigureSpec(str(path), "iteration", "nope", "solver",
                      str(tmp_path / "o.png"))
    with pytest.raises(ColumnError):
        plot_traces(spec)


def test_plot_traces_smoke(tmp_path):
    path = tmp_path / "t.csv"
    write_sumrate_csv(path)
    out = tmp_path / "fig.png"
    plot_traces(sumrate_spec(str(path), str(out)))
    assert out.stat().st_size > 0


def test_plot_traces_single_seed_band_collapses(tmp_path):
    # min = max = mean with one seed: the figure still renders
    path = tmp_path / "t.csv"
    write_sumrate_csv(path, seeds=(1,))
    out = tmp_path / "fig.png"
    plot_traces(sumrate_spec(str(path), str(out)))
    assert out.stat().st_size > 0


def test_plot_fl_smoke(tmp_path):
    path = tmp_path / "fl.csv"
    write_fl_csv(path)
    out = tmp_path / "fl.png"
    plot_fl(str(path), str(out))
    assert out.stat().st_size > 0


@pytest.mark.parametrize("ext", ["png", "svg"])
def test_deterministic_output_bytes(tmp_path, ext):
    path = tmp_path / "t.csv"
    write_sumrate_csv(path)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / f"{name}.{ext}"
        plot_traces(sumrate_spec(str(path), str(out)))
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_cli_sumrate_and_fl(tmp_path, capsys):
    tpath, fpath = tmp_path / "t.csv", tmp_path / "fl.csv"
    write_sumrate_csv(tpath)
    write_fl_csv(fpath)
    assert main(["sumrate", "--in", str(tpath), "--out",
                 str(tmp_path / "a.png")]) == 0
    assert main(["fl", "--in", str(fpath), "--out",
                 str(tmp_path / "b.png")]) == 0
    assert main(["sumrate", "--in", str(tmp_path / "missing.csv"), "--out",
                 str(tmp_path / "c.png")]) == 1
    capsys.readouterr()


def test_cli_custom_x_column(tmp_path, capsys):
    tpath = tmp_path / "t.csv"
    write_sumrate_csv(tpath)
    out = tmp_path / "work.png"
    assert main(["sumrate", "--in", str(tpath), "--out", str(out),
                 "--x-col", "wall_ms"]) == 0
    assert out.stat().st_size > 0
    capsys.readouterr()
