"""Mean-line + min-max-band plots over grouped experiment CSVs.

Output bytes are deterministic for identical inputs: a fixed style, a pinned
SVG hash salt, and no date metadata.
"""

import csv
from dataclasses import dataclass, field

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "plotkit",
}


class ColumnError(KeyError):
    """A requested column is missing from the CSV header."""


@dataclass
class FigureSpec:
    input_csv: str
    x_col: str
    y_col: str
    group_col: str
    output_path: str
    title: str = ""
    x_label: str = ""
    y_label: str = ""
    y_scale: float = 1.0
    seed_col: str = "seed"


def load_csv(path: str) -> dict:
    """Column name -> list of raw string values."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if not header:
            raise ColumnError(f"{path} has no header row")
        cols = {name: [] for name in header}
        for row in reader:
            for name, value in zip(header, row):
                cols[name].append(value)
    return cols


def _require(cols, *names):
    for name in names:
        if name not in cols:
            raise ColumnError(f"column {name!r} not found; have {sorted(cols)}")


def _grouped_band(cols, spec: FigureSpec):
    """Per group value: (x values, mean, min, max) of y across seeds."""
    _require(cols, spec.x_col, spec.y_col, spec.group_col)
    seeds = cols.get(spec.seed_col, ["0"] * len(cols[spec.x_col]))
    series = {}
    for g, s, x, y in zip(cols[spec.group_col], seeds,
                          cols[spec.x_col], cols[spec.y_col]):
        series.setdefault(g, {}).setdefault(float(x), []).append(
            float(y) * spec.y_scale)
    out = {}
    for g, by_x in series.items():
        xs = np.array(sorted(by_x))
        ys = [by_x[x] for x in xs]
        out[g] = (xs, np.array([np.mean(v) for v in ys]),
                  np.array([min(v) for v in ys]),
                  np.array([max(v) for v in ys]))
    return out


def _save(fig, path: str):
    kwargs = {}
    if path.endswith(".svg"):
        kwargs["metadata"] = {"Date": None}
    fig.savefig(path, **kwargs)
    plt.close(fig)


def plot_traces(spec: FigureSpec) -> str:
    """One mean line per group with a min-max band across seeds."""
    cols = load_csv(spec.input_csv)
    groups = _grouped_band(cols, spec)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for g in sorted(groups):
            xs, mean, lo, hi = groups[g]
            ax.plot(xs, mean, label=g)
            ax.fill_between(xs, lo, hi, alpha=0.2)
        ax.set_xlabel(spec.x_label or spec.x_col)
        ax.set_ylabel(spec.y_label or spec.y_col)
        if spec.title:
            ax.set_title(spec.title)
        ax.legend()
        fig.tight_layout()
        _save(fig, spec.output_path)
    return spec.output_path


def plot_fl(input_csv: str, output_path: str) -> str:
    """Accuracy vs cumulative time (left) and vs round (right), per arm."""
    cols = load_csv(input_csv)
    _require(cols, "arm", "round", "accuracy", "cumulative_time_s")
    arms = {}
    for arm, rnd, acc, t in zip(cols["arm"], cols["round"],
                                cols["accuracy"], cols["cumulative_time_s"]):
        arms.setdefault(arm, []).append((int(rnd), float(acc), float(t)))
    with plt.rc_context(STYLE):
        fig, (ax_t, ax_r) = plt.subplots(1, 2, figsize=(9.0, 4.0))
        for arm in sorted(arms):
            rows = sorted(arms[arm])
            rounds = [r[0] for r in rows]
            accs = [r[1] for r in rows]
            times = [r[2] for r in rows]
            ax_t.plot(times, accs, label=arm)
            ax_r.plot(rounds, accs, label=arm)
        ax_t.set_xlabel("cumulative time (s)")
        ax_r.set_xlabel("round")
        for ax in (ax_t, ax_r):
            ax.set_ylabel("accuracy")
            ax.legend()
        fig.tight_layout()
        _save(fig, output_path)
    return output_path


def sumrate_spec(input_csv: str, output_path: str, x_col: str = "iteration") -> FigureSpec:
    return FigureSpec(input_csv=input_csv, x_col=x_col, y_col="sum_rate_bps",
                      group_col="solver", output_path=output_path,
                      x_label=x_col, y_label="sum-rate (Mbit/s)",
                      y_scale=1e-6)
