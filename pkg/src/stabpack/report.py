"""Figure rendering for benchmark CSVs and scaling probes.

Report commands write figures next to the delimited output; everything here
is file-to-file so headless runs work (Agg backend).
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def render_benchmark(csv_path: str | Path, out_path: str | Path) -> Path:
    """Wall time against instance size, one line per algorithm."""
    csv_path, out_path = Path(csv_path), Path(out_path)
    series: dict[str, list[tuple[int, float]]] = {}
    with csv_path.open() as fh:
        for row in csv.DictReader(fh):
            if row["status"] != "ok":
                continue
            series.setdefault(row["algorithm"], []).append(
                (int(row["n"]), float(row["seconds"])))
    fig, ax = plt.subplots(figsize=(6, 4))
    for algo, pts in sorted(series.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [max(p[1], 1e-6) for p in pts],
                marker="o", label=algo)
    ax.set_xlabel("objects")
    ax.set_ylabel("seconds")
    ax.set_yscale("log")
    ax.legend()
    ax.set_title("solver wall time")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_scaling(points: list[tuple[float, float]], xlabel: str, ylabel: str,
                   title: str, out_path: str | Path,
                   fit_exponent: float | None = None) -> Path:
    """Log-log scatter of a scaling probe with an optional fitted power law."""
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    ax.plot(xs, ys, "o", label="measured")
    if fit_exponent is not None and len(points) >= 2 and min(ys) > 0:
        x0, y0 = xs[0], ys[0]
        ax.plot(xs, [y0 * (x / x0) ** fit_exponent for x in xs], "--",
                label=f"slope {fit_exponent:.2f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def fit_loglog_slope(points: list[tuple[float, float]]) -> float:
    """Least-squares slope of log y against log x."""
    xs = [math.log(x) for x, y in points if x > 0 and y > 0]
    ys = [math.log(y) for x, y in points if x > 0 and y > 0]
    n = len(xs)
    if n < 2:
        return 0.0
    mx = sum(xs) / n
    my = sum(ys) / n
    denom = sum((x - mx) ** 2 for x in xs)
    if denom == 0:
        return 0.0
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / denom
