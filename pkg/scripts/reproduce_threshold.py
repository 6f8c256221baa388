#!/usr/bin/env python3
"""Reproduce the matching-decoder threshold experiment (X-basis memory).

Sweeps d in {3, 5} over p in [2e-4, 2e-3], writes sweep.csv / sweep.json
into --outdir, and prints the crossover estimate.  With the plots package
installed, also renders threshold.png.
"""

import argparse
import json
import shutil
import subprocess
import sys
from pathlib import Path

from heavyhex.bench import SweepConfig, rows_to_csv, threshold_sweep

import numpy as np


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--outdir", default="results/threshold")
    ap.add_argument("--shots", type=int, default=100_000)
    ap.add_argument("--points", type=int, default=8)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = SweepConfig(
        distances=[3, 5],
        p_values=[float(p) for p in np.geomspace(2e-4, 2e-3, args.points)],
        shots=args.shots,
        decoder="mwpm",
        basis="memx",
        seed=args.seed,
    )
    rows, summary = threshold_sweep(
        cfg, progress=lambda r: print(f"d={r.distance} p={r.p:.2e} ler={r.ler:.3e}")
    )
    (outdir / "sweep.csv").write_text(rows_to_csv(rows))
    (outdir / "sweep.json").write_text(json.dumps(summary, indent=1))
    print("crossover:", summary["crossover"])

    if shutil.which("plot-threshold"):
        subprocess.run(
            ["plot-threshold", "--csv", str(outdir / "sweep.csv"),
             "--summary", str(outdir / "sweep.json"),
             "--out", str(outdir / "threshold.png")],
            check=True,
        )
        print("figure:", outdir / "threshold.png")
    return 0


if __name__ == "__main__":
    sys.exit(main())
