"""Logical-error-rate estimation, threshold sweeps, and device evaluation.

Failure counting follows the operational success criterion: a shot fails if
the decoded correction composed with the accumulated error flips the tracked
logical operator or leaves a nonzero syndrome in the measured sector (for the
neural decoder, declared resampling cutoffs also count as failures and are
reported separately).  Confidence intervals are normal-approximation binomial
intervals with a configurable probit multiplier, clamped to [0, 1].

All randomness is derived from the row seed with a fixed internal batch size,
so a sweep re-run with the same configuration is byte-identical.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .ann import Mlp, decode_ann_batch, encode_batch, forward, syndrome_matrix
from .code import HeavyHexCode, build_code
from .mwpm import DetectorGraph, build_detector_graph, decode_defects
from .noise import NoiseModel, uniform_model
from .sim import Basis, compile_experiment, run_batch

BATCH_SHOTS = 20_000


# -- vectorized success checking ----------------------------------------------


class _SectorCheck:
    """Cached matrices for the measured-sector residual test."""

    def __init__(self, code: HeavyHexCode, basis: Basis):
        if basis is Basis.MemZ:
            ops = code.z_stabilizers
            self.h = code.z_check_matrix()
            self.log_vec = _mask_vector(code.logical_z.z, code.n_data)
            self.masks = [op.z for op in ops]
            self.log_mask = code.logical_z.z
        else:
            ops = code.x_stabilizers
            self.h = code.x_check_matrix()
            self.log_vec = _mask_vector(code.logical_x.x, code.n_data)
            self.masks = [op.x for op in ops]
            self.log_mask = code.logical_x.x

    def success(self, resid_bits: np.ndarray) -> np.ndarray:
        syn = (resid_bits @ self.h.T) % 2
        logpar = (resid_bits @ self.log_vec) % 2
        return (~syn.any(axis=1)) & (logpar == 0)


def _mask_vector(mask: int, n: int) -> np.ndarray:
    return np.array([(mask >> q) & 1 for q in range(n)], dtype=np.uint8)


def _graph_node_index(graph: DetectorGraph):
    rows = np.array([r for (_s, r) in graph.detectors])
    cols = np.array([graph.family_cols[s] for (s, _r) in graph.detectors])
    return rows, cols


def _int_to_bits(value: int, n: int) -> np.ndarray:
    raw = np.frombuffer(value.to_bytes((n + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n]


def mwpm_failures_batched(code, exp, graph: DetectorGraph, record):
    """Failure count for one batch under matching decoding."""
    check = _SectorCheck(code, exp.basis)
    rows, cols = _graph_node_index(graph)
    ev_nodes = record.detection_events[:, rows, cols]
    true_sector = record.true_x if exp.basis is Basis.MemZ else record.true_z
    resid = true_sector.copy()
    nontrivial = np.flatnonzero(ev_nodes.any(axis=1))
    for i in nontrivial:
        defects = list(np.flatnonzero(ev_nodes[i]))
        corr = decode_defects(graph, defects)
        mask = corr.x_bits if exp.basis is Basis.MemZ else corr.z_bits
        if mask:
            resid[i] ^= _int_to_bits(mask, code.n_data)
    ok = check.success(resid)
    return int((~ok).sum()), ok


def ann_failures_batched(code, exp, mlp: Mlp, record, max_resamples, rng):
    """(failures, declared_failures) for one batch under the neural decoder.

    Consistency is checked against the final reconstructed values of the
    measured sector's stabilizer family; accepted corrections satisfy them
    exactly by construction.
    """
    check = _SectorCheck(code, exp.basis)
    x, _labels = encode_batch(exp, record)
    probs = forward(mlp, x)
    fam = list(code.z_family if exp.basis is Basis.MemZ else code.x_family)
    s_total = code.n_stabilizers
    target_cols = [(exp.cycles - 1) * s_total + s for s in fam]
    targets = x[:, target_cols].astype(np.uint8)
    mat = syndrome_matrix(code, fam)
    corrections, declared = decode_ann_batch(mat, probs, targets, max_resamples, rng)
    corr_sector = corrections[:, 0::2] if exp.basis is Basis.MemZ else corrections[:, 1::2]
    true_sector = record.true_x if exp.basis is Basis.MemZ else record.true_z
    ok = check.success(true_sector ^ corr_sector) & ~declared
    return int((~ok).sum()), int(declared.sum()), ok


# -- sweep configuration and rows ---------------------------------------------


@dataclass
class SweepConfig:
    distances: list[int]
    p_values: list[float]
    shots: int = 10_000
    decoder: str = "mwpm"  # "mwpm" | "ann"
    basis: str = "memx"
    seed: int = 0
    cycles: int | None = None  # defaults to d
    probit_level: float = 0.975
    unit_weights: bool = False
    models: dict[int, Mlp] = field(default_factory=dict)
    max_resamples: int = 100

    def validate(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if any(b <= a for a, b in zip(self.p_values, self.p_values[1:])):
            raise ValueError("p_values must be strictly increasing")
        if self.decoder not in ("mwpm", "ann"):
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.decoder == "ann":
            missing = [d for d in self.distances if d not in self.models]
            if missing:
                raise ValueError(f"no ANN model for distances {missing}")


@dataclass
class SweepRow:
    distance: int
    basis: str
    decoder: str
    noise: str
    p: float
    shots: int
    failures: int
    declared_failures: int
    ler: float
    ci_low: float
    ci_high: float
    seed: int


CSV_HEADER = (
    "distance,basis,decoder,noise,p,shots,failures,declared_failures,"
    "ler,ci_low,ci_high,seed"
)


def row_to_csv(row: SweepRow) -> str:
    return ",".join(
        str(v)
        for v in (
            row.distance,
            row.basis,
            row.decoder,
            row.noise,
            row.p,
            row.shots,
            row.failures,
            row.declared_failures,
            row.ler,
            row.ci_low,
            row.ci_high,
            row.seed,
        )
    )


def rows_to_csv(rows) -> str:
    return "\n".join([CSV_HEADER] + [row_to_csv(r) for r in rows]) + "\n"


def binomial_ci(failures: int, shots: int, probit_level: float):
    p_hat = failures / shots
    z = float(ndtri(probit_level))
    half = z * math.sqrt(p_hat * (1.0 - p_hat) / shots)
    return max(0.0, p_hat - half), min(1.0, p_hat + half)


def logical_error_rate(
    code: HeavyHexCode,
    model: NoiseModel,
    *,
    p_label: float,
    noise_label: str = "uniform",
    decoder: str = "mwpm",
    basis: str = "memx",
    shots: int = 10_000,
    seed: int = 0,
    cycles: int | None = None,
    probit_level: float = 0.975,
    unit_weights: bool = False,
    mlp: Mlp | None = None,
    max_resamples: int = 100,
) -> SweepRow:
    """Estimate one sweep point: run shots, decode, count failures."""
    exp = compile_experiment(code, None, cycles, basis)
    graph = None
    if decoder == "mwpm":
        graph = build_detector_graph(
            code, None, model, cycles, basis, unit_weights=unit_weights
        )
    elif mlp is None:
        raise ValueError("ann decoding requires a trained model")
    rng = np.random.default_rng([seed, code.d])
    failures = 0
    declared = 0
    remaining = shots
    while remaining > 0:
        n = min(remaining, BATCH_SHOTS)
        record = run_batch(exp, model, n, rng)
        if decoder == "mwpm":
            f, _ = mwpm_failures_batched(code, exp, graph, record)
            failures += f
        else:
            f, d_cnt, _ = ann_failures_batched(
                code, exp, mlp, record, max_resamples, rng
            )
            failures += f
            declared += d_cnt
        remaining -= n
    ler = failures / shots
    lo, hi = binomial_ci(failures, shots, probit_level)
    return SweepRow(
        distance=code.d,
        basis=Basis(str(basis).lower()).value,
        decoder=decoder,
        noise=noise_label,
        p=p_label,
        shots=shots,
        failures=failures,
        declared_failures=declared,
        ler=ler,
        ci_low=lo,
        ci_high=hi,
        seed=seed,
    )


def threshold_sweep(config: SweepConfig, progress=None):
    """Rows for every (distance, p) plus a crossover estimate summary."""
    config.validate()
    t0 = time.time()
    rows = []
    codes = {d: build_code(d) for d in config.distances}
    for d in sorted(config.distances):
        for i, p in enumerate(config.p_values):
            row = logical_error_rate(
                codes[d],
                uniform_model(p),
                p_label=p,
                decoder=config.decoder,
                basis=config.basis,
                shots=config.shots,
                seed=config.seed + i,
                cycles=config.cycles,
                probit_level=config.probit_level,
                unit_weights=config.unit_weights,
                mlp=config.models.get(d),
                max_resamples=config.max_resamples,
            )
            rows.append(row)
            if progress:
                progress(row)
    summary = {
        "decoder": config.decoder,
        "basis": config.basis,
        "distances": sorted(config.distances),
        "p_values": list(config.p_values),
        "shots": config.shots,
        "seed": config.seed,
        "weighting": "unit" if config.unit_weights else "probability",
        "crossover": crossover_estimate(rows, config.distances),
        "runtime_s": round(time.time() - t0, 3),
    }
    return rows, summary


def crossover_estimate(rows, distances):
    """Crossing point of the two lowest-distance curves, from log-log linear
    interpolation; absent (None) when the curves never cross in range."""
    ds = sorted(set(distances))
    if len(ds) < 2:
        return {"p": None, "distances": ds, "reason": "needs two distances"}
    d1, d2 = ds[0], ds[1]
    curve = {}
    for row in rows:
        if row.distance in (d1, d2):
            curve.setdefault(row.p, {})[row.distance] = row.ler
    ps = sorted(p for p, c in curve.items() if d1 in c and d2 in c)
    pts = [
        (p, curve[p][d1], curve[p][d2])
        for p in ps
        if curve[p][d1] > 0 and curve[p][d2] > 0
    ]
    if len(pts) < 2:
        return {"p": None, "distances": [d1, d2], "reason": "insufficient data"}
    diffs = [
        (math.log(p), math.log(l2) - math.log(l1)) for p, l1, l2 in pts
    ]
    for (xa, da), (xb, db) in zip(diffs, diffs[1:]):
        if da <= 0 < db:
            t = -da / (db - da) if db != da else 0.0
            return {
                "p": math.exp(xa + t * (xb - xa)),
                "distances": [d1, d2],
                "reason": "ok",
            }
    return {"p": None, "distances": [d1, d2], "reason": "no crossing in range"}


# -- device-model evaluation ---------------------------------------------------


def evaluate_device(
    cal,
    d: int,
    *,
    decoder: str = "mwpm",
    basis: str = "memx",
    shots: int = 10_000,
    seed: int = 0,
    placement_policy: str = "median",
    probit_level: float = 0.95,
    mlp: Mlp | None = None,
    max_resamples: int = 100,
    weights=None,
):
    """One benchmark point on a calibrated device (Fig-3-style output).

    Ranks every placement with the heuristic, evaluates the one selected by
    ``placement_policy`` (median/best/worst by score), and reports the spread
    of placement scores and mean physical error rates for the horizontal bar.
    """
    from .layout import InfluenceWeights, rank_placements
    from .noise import device_model

    weights = weights or InfluenceWeights()
    code = build_code(d)
    placements = rank_placements(cal, d, weights, code=code)
    if not placements:
        raise ValueError(f"device {cal.device_name} admits no d={d} placement")
    if placement_policy == "best":
        chosen = placements[0]
    elif placement_policy == "worst":
        chosen = placements[-1]
    elif placement_policy == "median":
        chosen = placements[(len(placements) - 1) // 2]
    else:
        chosen = placements[int(placement_policy)]
    model = device_model(cal, chosen)
    row = logical_error_rate(
        code,
        model,
        p_label=chosen.mean_physical_error(cal),
        noise_label=cal.device_name,
        decoder=decoder,
        basis=basis,
        shots=shots,
        seed=seed,
        probit_level=probit_level,
        mlp=mlp,
        max_resamples=max_resamples,
    )
    mean_errors = [p.mean_physical_error(cal) for p in placements]
    scores = [p.score for p in placements]
    summary = {
        "device": cal.device_name,
        "distance": d,
        "decoder": decoder,
        "basis": row.basis,
        "placements": len(placements),
        "placement_policy": placement_policy,
        "score_min": min(scores),
        "score_median": sorted(scores)[(len(scores) - 1) // 2],
        "score_max": max(scores),
        "mean_error_min": min(mean_errors),
        "mean_error_median": sorted(mean_errors)[(len(mean_errors) - 1) // 2],
        "mean_error_max": max(mean_errors),
        "ler": row.ler,
        "ci_low": row.ci_low,
        "ci_high": row.ci_high,
        "shots": row.shots,
        "seed": seed,
    }
    return row, summary
