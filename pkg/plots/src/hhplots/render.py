"""Threshold and device-comparison figures from benchmark outputs.

Consumes only the documented interfaces: the sweep CSV (header
``distance,basis,decoder,noise,p,shots,failures,declared_failures,ler,
ci_low,ci_high,seed``), the sweep summary JSON (crossover estimate), and
device-evaluation summary JSON files (median/min/max placement spread).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

REQUIRED_COLUMNS = {"distance", "decoder", "p", "ler", "ci_low", "ci_high"}


@dataclass
class PlotSpec:
    csv_paths: list[str] = field(default_factory=list)
    device_json_paths: list[str] = field(default_factory=list)
    summary_path: str | None = None
    out_path: str = "figure.png"
    title: str | None = None


def read_rows(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = REQUIRED_COLUMNS - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        return list(reader)


def render_threshold(spec: PlotSpec):
    """Log-log logical-error-rate figure; returns the matplotlib figure.

    One series per (distance, decoder) with vertical confidence bars, an
    optional crossover marker from the summary JSON, and one point with a
    min-max horizontal bar per device-evaluation JSON.
    """
    rows: list[dict] = []
    for path in spec.csv_paths:
        rows.extend(read_rows(path))
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    series: dict[tuple, list] = {}
    for row in rows:
        key = (int(row["distance"]), row["decoder"])
        series.setdefault(key, []).append(row)
    for (distance, decoder), points in sorted(series.items()):
        points.sort(key=lambda r: float(r["p"]))
        p = [float(r["p"]) for r in points]
        ler = [float(r["ler"]) for r in points]
        low = [max(float(r["ler"]) - float(r["ci_low"]), 0.0) for r in points]
        high = [max(float(r["ci_high"]) - float(r["ler"]), 0.0) for r in points]
        ax.errorbar(
            p,
            ler,
            yerr=[low, high],
            marker="o",
            markersize=3.5,
            capsize=2,
            linewidth=1.2,
            label=f"d={distance} ({decoder})",
        )
    if spec.summary_path:
        with open(spec.summary_path) as fh:
            summary = json.load(fh)
        cross = (summary.get("crossover") or {}).get("p")
        if cross is not None:
            ax.axvline(cross, color="grey", linestyle="--", linewidth=1.0,
                       label=f"crossover {cross:.1e}")
    for path in spec.device_json_paths:
        with open(path) as fh:
            doc = json.load(fh)
        x = doc["mean_error_median"]
        xerr = [[x - doc["mean_error_min"]], [doc["mean_error_max"] - x]]
        yerr = [[max(doc["ler"] - doc["ci_low"], 0.0)],
                [max(doc["ci_high"] - doc["ler"], 0.0)]]
        ax.errorbar([x], [max(doc["ler"], 1e-7)], xerr=xerr, yerr=yerr,
                    marker="s", markersize=5, capsize=3, linestyle="none",
                    label=f"{doc['device']} d={doc['distance']}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("physical error rate p")
    ax.set_ylabel("logical error rate")
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, which="both", alpha=0.25)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def save(fig, out_path: str) -> None:
    # strip metadata so identical inputs give identical bytes
    fig.savefig(out_path, dpi=150, metadata={"Software": None})
    plt.close(fig)
