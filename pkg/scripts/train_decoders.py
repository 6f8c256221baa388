#!/usr/bin/env python3
"""Train the d=3 and d=5 network decoders used by the benchmarks."""

import argparse
import subprocess
import sys
from pathlib import Path


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--outdir", default="results/models")
    ap.add_argument("--p", type=float, default=1e-3)
    ap.add_argument("--basis", default="memx")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    budgets = {3: (1_200_000, 25), 5: (2_000_000, 25)}
    for d, (count, epochs) in budgets.items():
        out = outdir / f"mlp_d{d}.json"
        cmd = [sys.executable, "-m", "heavyhex.cli", "train",
               "--d", str(d), "--p", str(args.p), "--count", str(count),
               "--basis", args.basis, "--epochs", str(epochs),
               "--seed", str(args.seed + d), "--out", str(out)]
        print("+", " ".join(cmd))
        subprocess.run(cmd, check=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
