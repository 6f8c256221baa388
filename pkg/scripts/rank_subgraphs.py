#!/usr/bin/env python3
"""Generate synthetic devices, rank code placements, and run device points."""

import argparse
import subprocess
import sys
from pathlib import Path


def sh(*cmd):
    print("+", " ".join(map(str, cmd)))
    subprocess.run([sys.executable, "-m", "heavyhex.cli", *map(str, cmd)],
                   check=True)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--outdir", default="results/devices")
    ap.add_argument("--shots", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for n in (127, 433):
        cal = outdir / f"device_{n}.json"
        sh("make-synthetic-device", "--qubits", n, "--seed", args.seed, "--out", cal)
        sh("subgraph-rank", "--calibration", cal, "--d", 3,
           "--out", outdir / f"rank_{n}_d3.csv")
    for d in (3, 5):
        sh("eval", "--decoder", "mwpm", "--d", d,
           "--calibration", outdir / "device_127.json",
           "--shots", args.shots, "--seed", args.seed,
           "--out", outdir / f"eval_127_d{d}.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
