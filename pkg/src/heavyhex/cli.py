"""Command-line entry points for the heavy-hex workbench.

Subcommands: gen-data, train, eval, sweep, subgraph-rank, influence-weights,
make-synthetic-device.  Every command takes --seed; outputs are byte-stable
for a fixed configuration and seed.  Exit codes: 0 success, 2 usage error,
1 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np


def _parse_p_values(spec: str) -> list[float]:
    if ":" in spec:
        start, stop, count = spec.split(":")
        values = np.geomspace(float(start), float(stop), int(count))
        return [float(v) for v in values]
    return [float(v) for v in spec.split(",")]


def _parse_distances(spec: str) -> list[int]:
    return [int(v) for v in spec.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heavyhex",
        description="heavy-hex subsystem-code memory benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="write a decoder training set (JSON lines)")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--cycles", type=int, default=None)
    p.add_argument("--basis", choices=["memz", "memx"], default="memx")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train a dense network decoder")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=float, default=1e-3)
    p.add_argument("--count", type=int, default=1_000_000)
    p.add_argument("--data", default=None, help="JSON-lines training set; generated on the fly when omitted")
    p.add_argument("--basis", choices=["memz", "memx"], default="memx")
    p.add_argument("--epochs", type=int, default=12)
    p.add_argument("--batch", type=int, default=256)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="logical error rate at a single point")
    p.add_argument("--decoder", choices=["mwpm", "ann"], required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--calibration", default=None)
    p.add_argument("--placement", default="median", help="median|best|worst|<index>")
    p.add_argument("--basis", choices=["memz", "memx"], default="memx")
    p.add_argument("--shots", type=int, default=10_000)
    p.add_argument("--cycles", type=int, default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--max-resamples", type=int, default=100)
    p.add_argument("--probit", type=float, default=None,
                   help="probit level (default 0.975 uniform, 0.95 device)")
    p.add_argument("--unit-weights", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("sweep", help="threshold sweep over (distance, p)")
    p.add_argument("--decoder", choices=["mwpm", "ann"], required=True)
    p.add_argument("--distances", required=True, help="comma list, e.g. 3,5")
    p.add_argument("--p", required=True,
                   help="start:stop:count (geometric) or comma list")
    p.add_argument("--shots", type=int, default=10_000)
    p.add_argument("--basis", choices=["memz", "memx"], default="memx")
    p.add_argument("--cycles", type=int, default=None)
    p.add_argument("--model", action="append", default=[],
                   help="d:path, repeatable (ann decoding)")
    p.add_argument("--max-resamples", type=int, default=100)
    p.add_argument("--probit", type=float, default=0.975)
    p.add_argument("--unit-weights", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV path")
    p.add_argument("--summary", default=None, help="summary JSON path")

    p = sub.add_parser("subgraph-rank", help="rank code placements on a device")
    p.add_argument("--calibration", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--weights", default=None,
                   help="five comma values: 1q,init,idle,readout,2q")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="CSV path (stdout otherwise)")

    p = sub.add_parser("influence-weights",
                       help="re-derive ranking weights by simulation")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--p", type=float, default=2e-3)
    p.add_argument("--shots", type=int, default=1_000_000)
    p.add_argument("--basis", choices=["memz", "memx"], default="memx")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("make-synthetic-device",
                       help="write a synthetic heavy-hex calibration file")
    p.add_argument("--qubits", type=int, choices=[127, 433], required=True)
    p.add_argument("--uniform-rate", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    return parser


def _cmd_gen_data(args) -> int:
    from . import build_code, uniform_model
    from .ann import iter_examples, write_jsonl

    code = build_code(args.d)
    rng = np.random.default_rng(args.seed)
    n = write_jsonl(
        args.out,
        iter_examples(code, uniform_model(args.p), args.count, args.cycles,
                      rng, args.basis),
    )
    print(f"wrote {n} examples to {args.out}", file=sys.stderr)
    return 0


def _cmd_train(args) -> int:
    from . import build_code, uniform_model
    from .ann import TrainConfig, collect_dataset, init_mlp, read_jsonl, save_mlp, train

    code = build_code(args.d)
    if args.data:
        x, y, basis = read_jsonl(args.data)
    else:
        rng = np.random.default_rng([args.seed, 1])
        x, y = collect_dataset(code, uniform_model(args.p), args.count,
                               None, rng, args.basis)
        basis = args.basis
    mlp = init_mlp(args.d, args.seed)
    hyper = TrainConfig(epochs=args.epochs, batch=args.batch, lr=args.lr)
    mlp, trace = train(mlp, (x, y), hyper, np.random.default_rng([args.seed, 2]))
    mlp.config.update(
        {
            "d": args.d,
            "basis": basis,
            "training_p": args.p,
            "examples": len(x),
            "epochs": args.epochs,
            "batch": args.batch,
            "lr": args.lr,
            "optimizer": "adam(b1=0.9,b2=0.999)",
            "seed": args.seed,
            "final_loss": trace[-1],
        }
    )
    save_mlp(mlp, args.out)
    print(f"trained on {len(x)} examples; loss {trace[0]:.5f} -> {trace[-1]:.5f}; "
          f"saved {args.out}", file=sys.stderr)
    return 0


def _cmd_eval(args, parser) -> int:
    from . import build_code, uniform_model
    from .ann import load_mlp
    from .bench import evaluate_device, logical_error_rate
    from .layout import load_calibration

    mlp = None
    if args.decoder == "ann":
        if not args.model:
            parser.error("--model is required with --decoder ann")
        mlp = load_mlp(args.model)
    if args.calibration:
        cal = load_calibration(args.calibration)
        probit = args.probit if args.probit is not None else 0.95
        row, summary = evaluate_device(
            cal, args.d, decoder=args.decoder, basis=args.basis,
            shots=args.shots, seed=args.seed,
            placement_policy=args.placement, probit_level=probit, mlp=mlp,
            max_resamples=args.max_resamples,
        )
        out = json.dumps(summary, indent=1)
    else:
        if args.p is None:
            parser.error("--p is required without --calibration")
        probit = args.probit if args.probit is not None else 0.975
        code = build_code(args.d)
        row = logical_error_rate(
            code, uniform_model(args.p), p_label=args.p,
            decoder=args.decoder, basis=args.basis, shots=args.shots,
            seed=args.seed, cycles=args.cycles, probit_level=probit,
            unit_weights=args.unit_weights, mlp=mlp,
            max_resamples=args.max_resamples,
        )
        out = json.dumps(row.__dict__, indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out + "\n")
    print(out)
    return 0


def _cmd_sweep(args, parser) -> int:
    from .ann import load_mlp
    from .bench import SweepConfig, rows_to_csv, threshold_sweep

    models = {}
    for spec in args.model:
        dstr, _, path = spec.partition(":")
        if not path:
            parser.error(f"--model expects d:path, got {spec!r}")
        models[int(dstr)] = load_mlp(path)
    distances = _parse_distances(args.distances)
    if args.decoder == "ann" and any(d not in models for d in distances):
        parser.error("--model d:path required for every distance with ann")
    config = SweepConfig(
        distances=distances,
        p_values=_parse_p_values(args.p),
        shots=args.shots,
        decoder=args.decoder,
        basis=args.basis,
        seed=args.seed,
        cycles=args.cycles,
        probit_level=args.probit,
        unit_weights=args.unit_weights,
        models=models,
        max_resamples=args.max_resamples,
    )
    rows, summary = threshold_sweep(
        config,
        progress=lambda r: print(
            f"d={r.distance} p={r.p:.6g} ler={r.ler:.6g}", file=sys.stderr
        ),
    )
    with open(args.out, "w") as fh:
        fh.write(rows_to_csv(rows))
    if args.summary:
        with open(args.summary, "w") as fh:
            json.dump(summary, fh, indent=1)
    cross = summary["crossover"]
    print(f"crossover: {cross['p']} ({cross['reason']})", file=sys.stderr)
    return 0


def _cmd_subgraph_rank(args) -> int:
    from .layout import InfluenceWeights, load_calibration, rank_placements

    cal = load_calibration(args.calibration)
    weights = InfluenceWeights()
    if args.weights:
        vals = [float(v) for v in args.weights.split(",")]
        if len(vals) != 5:
            raise ValueError("--weights needs five comma-separated values")
        weights = InfluenceWeights(*vals)
    placements = rank_placements(cal, args.d, weights)
    lines = ["placement_id,anchor_qubit,score,mean_1q,mean_init,mean_idle,"
             "mean_readout,mean_2q"]
    for i, pl in enumerate(placements):
        rates = pl.mean_rates(cal)
        lines.append(
            f"{i},{pl.anchor_qubit},{pl.score},{rates['1q']},{rates['init']},"
            f"{rates['idle']},{rates['readout']},{rates['2q']}"
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if placements:
        scores = sorted(p.score for p in placements)
        print(
            f"{len(placements)} placements; score min/median/max = "
            f"{scores[0]:.6g}/{scores[(len(scores) - 1) // 2]:.6g}/{scores[-1]:.6g}",
            file=sys.stderr,
        )
    else:
        print("no placements", file=sys.stderr)
    return 0


def _cmd_influence_weights(args) -> int:
    from . import build_code
    from .layout import estimate_influence_weights

    code = build_code(args.d)
    weights, rates = estimate_influence_weights(
        code, args.p, args.shots, seed=args.seed, basis=args.basis
    )
    doc = {
        "d": args.d,
        "base_p": args.p,
        "shots": args.shots,
        "basis": args.basis,
        "seed": args.seed,
        "weights": weights.as_dict(),
        "logical_error_rates": rates,
    }
    out = json.dumps(doc, indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out + "\n")
    print(out)
    return 0


def _cmd_make_synthetic_device(args) -> int:
    from .layout import make_synthetic_device

    cal = make_synthetic_device(args.out, args.qubits, args.seed,
                                args.uniform_rate)
    print(
        f"wrote {args.out}: {len(cal.qubits)} qubits, "
        f"{len(cal.couplings)} couplings",
        file=sys.stderr,
    )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen-data":
            return _cmd_gen_data(args)
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "eval":
            return _cmd_eval(args, parser)
        if args.command == "sweep":
            return _cmd_sweep(args, parser)
        if args.command == "subgraph-rank":
            return _cmd_subgraph_rank(args)
        if args.command == "influence-weights":
            return _cmd_influence_weights(args)
        if args.command == "make-synthetic-device":
            return _cmd_make_synthetic_device(args)
        parser.error(f"unknown command {args.command!r}")
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
