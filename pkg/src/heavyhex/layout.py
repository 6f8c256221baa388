"""Heavy-hex device graphs: calibration files, code placements, ranking.

A device is described by a calibration JSON file:

    {"device_name": ..., "qubits": [{"id", "sq_error", "init_error",
     "idle_error", "readout_error"}, ...], "couplings": [{"a", "b",
     "twoq_error"}, ...]}

Placements are injective, edge-preserving embeddings of the distance-d code
coupling graph into the device graph, found by anchored backtracking and
deduplicated by image set.  Placements are scored by a weighted sum of the
mean error rates of the mapped qubits and couplings (lower is better); the
default influence weights can be re-derived by single-source simulation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .code import HeavyHexCode, build_code
from .mwpm import build_detector_graph
from .noise import single_source_model, SOURCES


@dataclass(frozen=True)
class QubitCalibration:
    id: int
    sq_error: float
    init_error: float
    idle_error: float
    readout_error: float


@dataclass
class DeviceCalibration:
    device_name: str
    qubits: dict[int, QubitCalibration]
    couplings: dict[tuple[int, int], float]

    def neighbours(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {q: set() for q in self.qubits}
        for a, b in self.couplings:
            adj[a].add(b)
            adj[b].add(a)
        return adj


@dataclass
class SubgraphPlacement:
    mapping: dict[int, int]  # code qubit index -> device qubit id
    code_couplings: list[tuple[int, int]]
    score: float | None = None

    @property
    def image(self) -> frozenset:
        return frozenset(self.mapping.values())

    @property
    def anchor_qubit(self) -> int:
        return min(self.mapping.values())

    def mean_rates(self, cal: DeviceCalibration) -> dict[str, float]:
        qs = [cal.qubits[d] for d in self.mapping.values()]
        pairs = [
            (min(self.mapping[a], self.mapping[b]), max(self.mapping[a], self.mapping[b]))
            for a, b in self.code_couplings
        ]
        return {
            "1q": float(np.mean([q.sq_error for q in qs])),
            "init": float(np.mean([q.init_error for q in qs])),
            "idle": float(np.mean([q.idle_error for q in qs])),
            "readout": float(np.mean([q.readout_error for q in qs])),
            "2q": float(np.mean([cal.couplings[p] for p in pairs])),
        }

    def mean_physical_error(self, cal: DeviceCalibration) -> float:
        rates = self.mean_rates(cal)
        return float(np.mean(list(rates.values())))


@dataclass(frozen=True)
class InfluenceWeights:
    w_1q: float = 1.0
    w_init: float = 17.0
    w_idle: float = 41.0
    w_readout: float = 65.0
    w_2q: float = 100.0

    def as_dict(self) -> dict[str, float]:
        return {
            "1q": self.w_1q,
            "init": self.w_init,
            "idle": self.w_idle,
            "readout": self.w_readout,
            "2q": self.w_2q,
        }


def load_calibration(path) -> DeviceCalibration:
    with open(path) as fh:
        doc = json.load(fh)
    return parse_calibration(doc)


def parse_calibration(doc: dict) -> DeviceCalibration:
    qubits = {}
    for entry in doc["qubits"]:
        for key in ("sq_error", "init_error", "idle_error", "readout_error"):
            rate = entry[key]
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"qubit {entry['id']}: {key}={rate} outside [0, 1]")
        qubits[int(entry["id"])] = QubitCalibration(
            id=int(entry["id"]),
            sq_error=entry["sq_error"],
            init_error=entry["init_error"],
            idle_error=entry["idle_error"],
            readout_error=entry["readout_error"],
        )
    couplings = {}
    degree: dict[int, int] = {}
    for entry in doc["couplings"]:
        a, b = int(entry["a"]), int(entry["b"])
        if a not in qubits or b not in qubits:
            raise ValueError(f"coupling ({a},{b}) references unknown qubit")
        rate = entry["twoq_error"]
        if not 0.0 <= rate <= 1.0:
            raise ValueError(f"coupling ({a},{b}): twoq_error={rate} outside [0, 1]")
        couplings[(min(a, b), max(a, b))] = rate
        degree[a] = degree.get(a, 0) + 1
        degree[b] = degree.get(b, 0) + 1
    for q, deg in degree.items():
        if deg > 3:
            raise ValueError(f"qubit {q} has degree {deg} > 3 (not heavy-hex)")
    return DeviceCalibration(
        device_name=doc.get("device_name", "unknown"),
        qubits=qubits,
        couplings=couplings,
    )


# -- synthetic devices -------------------------------------------------------


def synthetic_device_doc(
    n_qubits: int, seed: int = 0, uniform_rate: float | None = None
) -> dict:
    """Synthetic heavy-hex calibration with 127 or 433 qubits.

    The lattice is the coupling pattern of the largest code it must hold
    (d=7 or d=13), enriched with the boundary bridges that let smaller codes
    nest inside it, padded with a tail chain to the advertised qubit count.
    """
    if n_qubits == 127:
        dd = 7
    elif n_qubits == 433:
        dd = 13
    else:
        raise ValueError("synthetic devices come in 127- and 433-qubit sizes")
    nodes: dict[tuple, int] = {}
    edges: set[tuple[int, int]] = set()

    def node(key):
        if key not in nodes:
            nodes[key] = len(nodes)
        return nodes[key]

    def connect(a, b):
        edges.add((min(a, b), max(a, b)))

    # row r (one per code column) is a path of 2*dd-1 qubits
    for r in range(dd):
        prev = None
        for pos in range(2 * dd - 1):
            cur = node(("q", r, pos))
            if prev is not None:
                connect(prev, cur)
            prev = cur
    # bridges between adjacent rows; gap g sits between rows g and g+1
    for g in range(dd - 1):
        positions = set()
        if g % 2 == 0:  # code column pair (g+1, g+2) with odd first column
            positions.add(0)
            positions.update(p for p in range(3, 2 * dd - 1, 4))
        else:
            positions.update(p for p in range(1, 2 * dd - 1, 4))
            positions.add(2 * dd - 2)
            # extra boundary bridges so nested smaller codes can close their
            # bottom row pairs (positions 2d-2 for d < dd)
            positions.update((4, 8) if dd == 7 else (4, 8, 12))
        for pos in sorted(positions):
            b = node(("bridge", g, pos))
            connect(node(("q", g, pos)), b)
            connect(node(("q", g + 1, pos)), b)
    # tail chain to reach the advertised size
    count = len(nodes)
    if count > n_qubits:
        raise RuntimeError(f"lattice already larger than requested: {count}")
    prev = node(("q", dd - 1, 2 * dd - 2))
    for t in range(n_qubits - count):
        cur = node(("tail", t))
        connect(prev, cur)
        prev = cur

    rng = np.random.default_rng(seed)

    def rate(mean):
        if uniform_rate is not None:
            return uniform_rate
        return float(np.clip(mean * rng.lognormal(0.0, 0.35), 1e-6, 0.5))

    qubits = [
        {
            "id": idx,
            "sq_error": rate(3e-4),
            "init_error": rate(2e-3),
            "idle_error": rate(1.5e-3),
            "readout_error": rate(1.2e-2),
        }
        for idx in sorted(nodes.values())
    ]
    couplings = [
        {"a": a, "b": b, "twoq_error": rate(8e-3)} for a, b in sorted(edges)
    ]
    return {
        "device_name": f"synthetic-hh-{n_qubits}",
        "qubits": qubits,
        "couplings": couplings,
    }


def make_synthetic_device(path, n_qubits: int, seed: int = 0, uniform_rate=None):
    doc = synthetic_device_doc(n_qubits, seed, uniform_rate)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
    return parse_calibration(doc)


# -- placement enumeration ---------------------------------------------------


def code_coupling_graph(code: HeavyHexCode):
    adj: dict[int, set[int]] = {q.index: set() for q in code.qubits}
    for a, b in code.couplings:
        adj[a].add(b)
        adj[b].add(a)
    return adj


def enumerate_placements(
    cal: DeviceCalibration, d: int, code: HeavyHexCode | None = None
) -> list[SubgraphPlacement]:
    """All edge-preserving injective embeddings of the distance-d code graph,
    deduplicated by image set, sorted by smallest device qubit id."""
    code = code or build_code(d)
    code_adj = code_coupling_graph(code)
    n_code = len(code_adj)
    if n_code > len(cal.qubits):
        return []
    dev_adj = cal.neighbours()
    dev_degree = {q: len(v) for q, v in dev_adj.items()}

    # visit order: BFS so every node after the first touches a mapped one
    root = max(code_adj, key=lambda q: len(code_adj[q]))
    order = [root]
    seen = {root}
    frontier = [root]
    while frontier:
        nxt = []
        for u in frontier:
            for v in sorted(code_adj[u]):
                if v not in seen:
                    seen.add(v)
                    order.append(v)
                    nxt.append(v)
        frontier = nxt
    mapped_neighbours = [
        [v for v in code_adj[u] if v in set(order[:i])] for i, u in enumerate(order)
    ]

    images = {}
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def extend(i):
        if i == n_code:
            image = frozenset(mapping.values())
            if image not in images:
                images[image] = dict(mapping)
            return
        u = order[i]
        deg_u = len(code_adj[u])
        anchors = mapped_neighbours[i]
        if anchors:
            candidates = set(dev_adj[mapping[anchors[0]]])
            for a in anchors[1:]:
                candidates &= dev_adj[mapping[a]]
        else:
            candidates = set(cal.qubits)
        for cand in sorted(candidates):
            if cand in used or dev_degree[cand] < deg_u:
                continue
            mapping[u] = cand
            used.add(cand)
            extend(i + 1)
            del mapping[u]
            used.discard(cand)

    extend(0)
    placements = [
        SubgraphPlacement(mapping=m, code_couplings=sorted(code.couplings))
        for m in images.values()
    ]
    placements.sort(key=lambda p: (p.anchor_qubit, sorted(p.image)))
    return placements


def score_placement(
    placement: SubgraphPlacement,
    cal: DeviceCalibration,
    weights: InfluenceWeights = InfluenceWeights(),
) -> float:
    """Weighted mean-rate score; lower is better."""
    rates = placement.mean_rates(cal)
    w = weights.as_dict()
    score = sum(w[k] * rates[k] for k in rates)
    placement.score = score
    return score


def rank_placements(cal, d, weights=InfluenceWeights(), code=None):
    placements = enumerate_placements(cal, d, code)
    for p in placements:
        score_placement(p, cal, weights)
    placements.sort(key=lambda p: (p.score, p.anchor_qubit))
    return placements


# -- influence weights from single-source simulation -------------------------


def estimate_influence_weights(
    code: HeavyHexCode,
    base_p: float,
    shots: int,
    seed: int = 0,
    basis="memx",
    cycles: int | None = None,
) -> tuple[InfluenceWeights, dict[str, float]]:
    """Re-derive the per-source logical-error influence by simulation.

    Runs matched-decoder memory experiments with one error source active at a
    time and normalizes each source's logical error rate by the single-qubit
    gate source's rate.  Returns the weights and the raw rates.
    """
    from .bench import mwpm_failures_batched  # local import, avoids a cycle

    if not 0.0 < base_p <= 0.05:
        raise ValueError("base_p must be in (0, 0.05]")
    if shots < 10**5:
        raise ValueError("shots must be at least 1e5 for a stable estimate")
    from .sim import compile_experiment, run_batch

    rates: dict[str, float] = {}
    for idx, source in enumerate(SOURCES):
        model = single_source_model(source, base_p)
        exp = compile_experiment(code, None, cycles, basis)
        graph = build_detector_graph(code, None, model, cycles, basis)
        rng = np.random.default_rng([seed, idx])
        failures = 0
        remaining = shots
        while remaining > 0:
            n = min(remaining, 20_000)
            record = run_batch(exp, model, n, rng)
            failures += mwpm_failures_batched(code, exp, graph, record)[0]
            remaining -= n
        rates[source] = failures / shots
    if rates["1q"] == 0.0:
        raise RuntimeError(
            "zero failures for the single-qubit-gate reference source; "
            "increase shots or base_p"
        )
    ref = rates["1q"]
    weights = InfluenceWeights(
        w_1q=1.0,
        w_init=rates["init"] / ref,
        w_idle=rates["idle"] / ref,
        w_readout=rates["readout"] / ref,
        w_2q=rates["2q"] / ref,
    )
    return weights, rates
