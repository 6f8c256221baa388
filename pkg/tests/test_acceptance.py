"""Acceptance suite: one test per criterion, at the stated scale.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one pass/fail line
per criterion.  The full run takes roughly an hour on a laptop-class machine
(threshold sweeps and the influence-weight estimate dominate); the decoder
networks are trained once and cached under tests/_artifacts/.
"""

import math
import time

import numpy as np
import pytest

import heavyhex as hh
from heavyhex.ann import gradient_check, mlp_layer_sizes, Mlp
from heavyhex.bench import (
    SweepConfig,
    crossover_estimate,
    logical_error_rate,
    rows_to_csv,
    threshold_sweep,
)
from heavyhex.code import stabilizer_count
from heavyhex.layout import (
    enumerate_placements,
    estimate_influence_weights,
    parse_calibration,
    synthetic_device_doc,
)
from heavyhex.mwpm import (
    blossom_pairing,
    build_detector_graph,
    decode,
    dp_pairing,
    fault_signatures,
)
from heavyhex.noise import uniform_model
from heavyhex.pauli import PauliFrame, compose
from heavyhex.sim import compile_experiment, correction_succeeds

from test_mwpm import brute_force_pairing


def report(criterion, ok, detail):
    print(f"[acceptance] {criterion} {'PASS' if ok else 'FAIL'}: {detail}",
          flush=True)
    assert ok, f"{criterion}: {detail}"


def test_a1_structure_formulas():
    t0 = time.time()
    for d in (3, 5, 7, 9, 11):
        code = hh.build_code(d, with_schedule=False)
        n_stabs = len(code.z_stabilizers) + len(code.x_stabilizers)
        assert n_stabs == (d * d + 2 * d - 3) // 2 == stabilizer_count(d)
        sizes = mlp_layer_sizes(d)
        assert sizes[0] == d * stabilizer_count(d)
        assert sizes[3] == 2 * d * d
    report("A1", time.time() - t0 < 1.0,
           f"structure formulas exact for d in 3..11 ({time.time()-t0:.2f}s)")


def test_a2_algebraic_invariants():
    t0 = time.time()
    for d in (3, 5, 7, 9, 11):
        code = hh.build_code(d, with_schedule=False)
        stabs = code.stabilizers
        for i in range(len(stabs)):
            for j in range(i + 1, len(stabs)):
                assert stabs[i].commutes_with(stabs[j])
        for g in code.z_gauges + code.x_gauges:
            for s in stabs:
                assert g.commutes_with(s)
            assert g.commutes_with(code.logical_x)
            assert g.commutes_with(code.logical_z)
        assert not code.logical_x.commutes_with(code.logical_z)
        for s, members in enumerate(code.z_stab_constituents):
            acc = 0
            for g in members:
                acc ^= code.z_gauges[g].z
            assert acc == code.z_stabilizers[s].z
        for s, members in enumerate(code.x_stab_constituents):
            acc = 0
            for g in members:
                acc ^= code.x_gauges[g].x
            assert acc == code.x_stabilizers[s].x
    elapsed = time.time() - t0
    report("A2", elapsed < 10.0, f"commutation and gauge algebra exact (d<=11, {elapsed:.1f}s)")


def test_a3_single_fault_exhaustion():
    """Every single fault yields <= 2 detectors per family and decodes to a
    successful correction, exhaustively for d in {3, 5} at both bases.

    Known limitation, documented in the decisions ledger: at d=3 (only), both
    bulk plaquettes are adjacent to the top and the bottom lattice boundary,
    so a flag/measure-relay hook (a vertical X pair from a single ancilla
    fault) shares its detector signature with a single data error near the
    opposite boundary while lying in a different logical class.  Matching
    without flag readout cannot correct both classes, so the minority class
    fails; the original construction resolves exactly this with flag-
    conditioned decoding, which the detector contract here excludes.
    """
    t0 = time.time()
    failures = {}
    for d in (3, 5):
        code = hh.build_code(d)
        model = uniform_model(1e-3)
        for basis in ("memz", "memx"):
            exp = compile_experiment(code, cycles=d, basis=basis)
            grel = build_detector_graph(code, None, model, d, basis)
            gopp = build_detector_graph(
                code, None, model, d, basis,
                family="X" if basis == "memz" else "Z",
            )
            n = code.n_data
            bad = 0
            total = 0
            for loc_id, kind, value, frac, z_ev, x_ev, px, pz in fault_signatures(exp):
                total += 1
                ev_rel, ev_opp = (z_ev, x_ev) if basis == "memz" else (x_ev, z_ev)
                assert len(ev_rel) <= 2 and len(ev_opp) <= 2
                crel = decode(grel, ev_rel) if ev_rel else PauliFrame.identity(n)
                copp = decode(gopp, ev_opp) if ev_opp else PauliFrame.identity(n)
                corr = compose(crel, copp)
                if not correction_succeeds(code, PauliFrame(n, px, pz), corr, basis):
                    bad += 1
            failures[(d, basis)] = (bad, total)
    elapsed = time.time() - t0
    detail = ", ".join(
        f"d={d} {b}: {bad}/{total} fail" for (d, b), (bad, total) in failures.items()
    )
    ok = all(bad == 0 for bad, _ in failures.values()) and elapsed < 300
    report("A3", ok, f"{detail} ({elapsed:.0f}s)")


def test_a4_matching_optimality_oracle():
    t0 = time.time()
    rng = np.random.default_rng(44)
    graphs = []
    for d in (3, 5):
        code = hh.build_code(d)
        model = uniform_model(1e-3)
        for basis in ("memz", "memx"):
            graphs.append(build_detector_graph(code, None, model, d, basis))
    checked = 0
    while checked < 1000:
        graph = graphs[checked % len(graphs)]
        dist, _ = graph.ensure_paths()
        k = int(rng.integers(1, 9))
        defects = list(rng.choice(graph.n_nodes, size=k, replace=False))

        def pair_cost(i, j, dd=dist, df=defects):
            return dd[df[i], df[j]]

        def boundary_cost(i, dd=dist, df=defects, b=graph.n_nodes):
            return dd[df[i], b]

        want = brute_force_pairing(k, pair_cost, boundary_cost)
        got_dp, _ = dp_pairing(k, pair_cost, boundary_cost)
        got_bl, _ = blossom_pairing(k, pair_cost, boundary_cost)
        assert got_dp == pytest.approx(want, rel=1e-9), (k, defects)
        assert got_bl == pytest.approx(want, rel=1e-9), (k, defects)
        checked += 1
    elapsed = time.time() - t0
    report("A4", elapsed < 60,
           f"dp and blossom equal factorial-search minimum on 1000 defect sets ({elapsed:.0f}s)")


def test_a5_mwpm_threshold_reproduction():
    t0 = time.time()
    p_values = [float(p) for p in np.geomspace(2e-4, 2e-3, 8)]
    cfg = SweepConfig(distances=[3, 5], p_values=p_values, shots=100_000,
                      decoder="mwpm", basis="memx", seed=42)
    rows, summary = threshold_sweep(cfg)
    cross = summary["crossover"]["p"]
    elapsed = time.time() - t0
    (ARTIFACTS := __import__("pathlib").Path(__file__).parent / "_artifacts").mkdir(exist_ok=True)
    (ARTIFACTS / "a5_sweep.csv").write_text(rows_to_csv(rows))
    import json

    (ARTIFACTS / "a5_summary.json").write_text(json.dumps(summary, indent=1))
    ok = cross is not None and 3e-4 <= cross <= 1.5e-3 and elapsed < 7200
    report("A5", ok,
           f"memx crossover {cross if cross is None else f'{cross:.2e}'} "
           f"target [3e-4, 1.5e-3], reference ~7e-4 ({elapsed:.0f}s)")


def test_a6_gradient_correctness():
    t0 = time.time()
    rng = np.random.default_rng(66)
    worst = 0.0
    for _ in range(100):
        sizes = [int(rng.integers(2, 7)) for _ in range(4)]
        weights = [rng.normal(scale=0.8, size=(sizes[i + 1], sizes[i]))
                   for i in range(3)]
        biases = [rng.normal(scale=0.4, size=sizes[i + 1]) for i in range(3)]
        mlp = Mlp(sizes, weights, biases)
        x = rng.integers(0, 2, sizes[0]).astype(float)
        y = rng.integers(0, 2, sizes[3]).astype(float)
        worst = max(worst, gradient_check(mlp, (x, y), 1e-5))
    elapsed = time.time() - t0
    report("A6", worst <= 1e-4 and elapsed < 60,
           f"max relative gradient error {worst:.2e} over 100 networks ({elapsed:.0f}s)")


def test_a7_ann_competitiveness(trained_mlp_d3, trained_mlp_d5):
    t0 = time.time()
    code3 = hh.build_code(3)
    model = uniform_model(1e-3)
    row_mwpm = logical_error_rate(code3, model, p_label=1e-3, basis="memx",
                                  shots=100_000, seed=71)
    row_ann = logical_error_rate(code3, model, p_label=1e-3, decoder="ann",
                                 mlp=trained_mlp_d3, basis="memx",
                                 shots=100_000, seed=71)
    ratio = row_ann.ler / row_mwpm.ler if row_mwpm.ler else math.inf

    # exact consistency of accepted corrections on a fresh batch
    from heavyhex.ann import decode_ann_batch, encode_batch, forward, syndrome_matrix
    from heavyhex.sim import run_batch

    exp = compile_experiment(code3, cycles=3, basis="memx")
    record = run_batch(exp, model, 20_000, np.random.default_rng(72))
    x, _ = encode_batch(exp, record)
    fam = list(code3.x_family)
    mat = syndrome_matrix(code3, fam)
    s_total = code3.n_stabilizers
    targets = x[:, [(exp.cycles - 1) * s_total + s for s in fam]].astype(np.uint8)
    corrections, declared = decode_ann_batch(
        mat, forward(trained_mlp_d3, x), targets, 100, np.random.default_rng(73)
    )
    syn = (corrections[~declared] @ mat.T) % 2
    consistent = bool((syn == targets[~declared]).all())

    # distance-3/5 crossover of the trained networks within the target window
    p_values = [2e-4, 3.2e-4, 5e-4, 8e-4, 1.2e-3, 1.5e-3]
    cfg = SweepConfig(distances=[3, 5], p_values=p_values, shots=50_000,
                      decoder="ann", basis="memx", seed=77,
                      models={3: trained_mlp_d3, 5: trained_mlp_d5})
    rows, summary = threshold_sweep(cfg)
    cross = summary["crossover"]["p"]
    elapsed = time.time() - t0
    ok = (
        ratio <= 1.5
        and consistent
        and cross is not None
        and 2e-4 <= cross <= 1.5e-3
        and elapsed < 9000
    )
    report(
        "A7",
        ok,
        f"ann/mwpm ratio {ratio:.2f} (<= 1.5), accepted corrections consistent: "
        f"{consistent}, ann crossover "
        f"{cross if cross is None else f'{cross:.2e}'} in [2e-4, 1.5e-3] "
        f"({elapsed:.0f}s)",
    )


def test_a8_influence_weight_ordering():
    """Influence-weight table reproduction at the stated scale.

    Known limitation, documented in the decisions ledger: with idle noise on
    every explicit Idle event (the stated design), idle locations outnumber
    readout locations roughly tenfold and strike data qubits directly, so the
    idle influence exceeds both readout and two-qubit influence; readout
    errors are intrinsically time-like protected.  The three weak sources
    (1q, init, readout) also sit within statistical noise of one another at
    this scale.  What reproduces robustly: the two-qubit source is by far the
    strongest gate-level source, and idle/two-qubit dominate the weak sources
    by one to two orders of magnitude.
    """
    t0 = time.time()
    code = hh.build_code(3)
    weights, rates = estimate_influence_weights(code, 2e-3, 1_000_000,
                                                seed=88, basis="memx")
    w = weights.as_dict()
    ordering = w["1q"] < w["init"] < w["idle"] < w["readout"] < w["2q"]
    magnitude = 33.0 <= w["2q"] <= 300.0
    elapsed = time.time() - t0
    detail = (
        f"weights 1q=1, init={w['init']:.1f}, idle={w['idle']:.1f}, "
        f"readout={w['readout']:.1f}, 2q={w['2q']:.1f}; ordering={ordering}, "
        f"w_2q in [33,300]={magnitude} ({elapsed:.0f}s)"
    )
    report("A8", ordering and magnitude and elapsed < 3600, detail)


def test_a9_placement_capacity():
    t0 = time.time()
    cal127 = parse_calibration(synthetic_device_doc(127, seed=9))
    cal433 = parse_calibration(synthetic_device_doc(433, seed=9))
    ok = (
        len(enumerate_placements(cal127, 7)) >= 1
        and enumerate_placements(cal127, 9) == []
        and len(enumerate_placements(cal433, 13)) >= 1
    )
    elapsed = time.time() - t0
    report("A9", ok and elapsed < 60,
           f"127-qubit device holds d=7 not d=9; 433-qubit holds d=13 ({elapsed:.1f}s)")


def test_a10_cli_determinism(tmp_path):
    from heavyhex.cli import main

    args = ["sweep", "--decoder", "mwpm", "--distances", "3",
            "--p", "5e-4,1e-3,2e-3", "--shots", "2000", "--basis", "memx",
            "--seed", "1234", "--out", None]
    outs = []
    for name in ("one.csv", "two.csv"):
        args[-1] = str(tmp_path / name)
        assert main(args) == 0
        outs.append((tmp_path / name).read_bytes())
    ok = outs[0] == outs[1]
    report("A10", ok, "repeated CLI invocation produced byte-identical CSV")
