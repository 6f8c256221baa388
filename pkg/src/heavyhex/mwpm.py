"""Detector graphs and minimum-weight perfect-matching decoding.

The graph for one stabilizer family is built by exhaustive single-fault
enumeration: every fault location and fault value is propagated through the
schedule, and the detection events it produces in that family (at most two,
or the construction aborts) define an edge.  Faults sharing a detector
signature are grouped; the edge weight is -ln of their total probability and
the payload is the data-error contribution of the first (lowest location id)
representative, restricted to the error sector the family detects.

Node naming follows the stabilizer families: an ``XChains`` graph carries the
Bacon-Shor column-pair (X-type) detectors and decodes Z-error chains, a
``ZChains`` graph carries the plaquette/edge (Z-type) detectors and decodes X
errors.  One extra boundary node absorbs odd defects.

Decoding computes all-pairs shortest paths once per graph (deterministic
Dijkstra, ties broken by node index), then solves an exact minimum-weight
pairing of the fired detectors: bitmask dynamic programming up to 14 defects,
networkx's blossom implementation beyond.  XORing the path payloads of the
matched pairs yields the correction.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .code import HeavyHexCode
from .noise import (
    ONE_QUBIT_PAULIS,
    TWO_QUBIT_PAULIS,
    Fault,
    FaultPattern,
    NoiseModel,
)
from .pauli import PauliFrame
from .sim import Basis, CompiledExperiment, compile_experiment, run_with_faults

BOUNDARY = -1

_DP_MAX_DEFECTS = 14


@dataclass
class DetectorGraph:
    chains: str  # "XChains" | "ZChains" (stabilizer family of the detectors)
    basis: Basis
    cycles: int
    n_data: int
    detectors: list[tuple[int, int]]  # (family-local stabilizer, event round)
    node_of: dict[tuple[int, int], int]
    # (u, v) with u < v or (u, BOUNDARY): [weight, probability, payload mask]
    edges: dict[tuple[int, int], list]
    family_cols: np.ndarray  # columns of this family in the syndrome order
    _paths: "tuple | None" = field(default=None, repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.detectors)

    def ensure_paths(self):
        """All-pairs shortest paths (distance and accumulated payload)."""
        if self._paths is not None:
            return self._paths
        n = self.n_nodes
        adj: list[list[tuple[int, float, int]]] = [[] for _ in range(n + 1)]
        bidx = n  # boundary lives at index n internally
        for (u, v), (w, _p, pay) in self.edges.items():
            a = u if u != BOUNDARY else bidx
            b = v if v != BOUNDARY else bidx
            adj[a].append((b, w, pay))
            adj[b].append((a, w, pay))
        for rows in adj:
            rows.sort()
        dist = np.full((n + 1, n + 1), np.inf)
        payload = [[0] * (n + 1) for _ in range(n + 1)]
        for src in range(n + 1):
            dist_row = dist[src]
            pay_row = payload[src]
            dist_row[src] = 0.0
            done = [False] * (n + 1)
            heap = [(0.0, src)]
            while heap:
                d, u = heapq.heappop(heap)
                if done[u]:
                    continue
                done[u] = True
                for v, w, pay in adj[u]:
                    nd = d + w
                    if nd < dist_row[v]:
                        dist_row[v] = nd
                        pay_row[v] = pay_row[u] ^ pay
                        heapq.heappush(heap, (nd, v))
        self._paths = (dist, payload)
        return self._paths

    def is_connected_through_boundary(self) -> bool:
        dist, _ = self.ensure_paths()
        return bool(np.isfinite(dist[self.n_nodes, : self.n_nodes]).all())

    def to_json(self) -> str:
        doc = {
            "chains": self.chains,
            "basis": self.basis.value,
            "cycles": self.cycles,
            "detectors": [list(d) for d in self.detectors],
            "edges": [
                {
                    "nodes": [u, v],
                    "weight": w,
                    "probability": p,
                    "payload": [q for q in range(self.n_data) if (pay >> q) & 1],
                }
                for (u, v), (w, p, pay) in sorted(self.edges.items())
            ],
        }
        return json.dumps(doc, indent=1)


def _signature_values(loc):
    if loc.kind == "readout":
        return (("flip", 1.0),)
    if loc.kind == "2q":
        return tuple((lbl, 1.0 / 15.0) for lbl in TWO_QUBIT_PAULIS)
    return tuple((lbl, 1.0 / 3.0) for lbl in ONE_QUBIT_PAULIS)


def fault_signatures(exp: CompiledExperiment) -> list:
    """Propagate every (location, value) single fault once.

    Returns a list of (loc_id, kind, value, fraction, z_events, x_events,
    payload_x, payload_z) with events as family-local (stab, round) tuples.
    Cached on the code object: signatures depend only on the circuit, not on
    the noise rates.
    """
    cache = getattr(exp.code, "_signature_cache", None)
    if cache is None:
        cache = {}
        exp.code._signature_cache = cache
    key = (exp.cycles, exp.basis)
    if key in cache:
        return cache[key]
    code = exp.code
    z_cols = np.array(list(code.z_family))
    x_cols = np.array(list(code.x_family))
    table = []
    for loc in exp.locations:
        for value, fraction in _signature_values(loc):
            rec = run_with_faults(exp, FaultPattern([Fault(loc, value)]))
            ev = rec.detection_events
            z_ev = tuple(
                (int(s), int(r)) for r, s in zip(*np.nonzero(ev[:, z_cols]))
            )
            x_ev = tuple(
                (int(s), int(r)) for r, s in zip(*np.nonzero(ev[:, x_cols]))
            )
            if not z_ev and not x_ev and rec.true_frame.is_identity():
                continue
            table.append(
                (
                    loc.loc_id,
                    loc.kind,
                    value,
                    fraction,
                    z_ev,
                    x_ev,
                    rec.true_frame.x_bits,
                    rec.true_frame.z_bits,
                )
            )
    cache[key] = table
    return table


def build_detector_graph(
    code: HeavyHexCode,
    schedule,
    model: NoiseModel,
    cycles: int | None,
    basis,
    family: str | None = None,
    unit_weights: bool = False,
) -> DetectorGraph:
    """Detector graph for one stabilizer family under the given noise model.

    ``family`` is "X" or "Z"; by default the family that detects the errors
    corrupting the memory basis (X memory -> "X", Z memory -> "Z").
    """
    exp = compile_experiment(code, schedule, cycles, basis)
    basis = exp.basis
    if family is None:
        family = "Z" if basis is Basis.MemZ else "X"
    if family not in ("X", "Z"):
        raise ValueError("family must be 'X' or 'Z'")
    chains = family + "Chains"
    is_basis_family = (family == "Z") == (basis is Basis.MemZ)
    cycles = exp.cycles
    n_fam = len(code.z_stabilizers if family == "Z" else code.x_stabilizers)
    rounds = range(cycles + 1) if is_basis_family else range(1, cycles)

    detectors = [(s, r) for r in rounds for s in range(n_fam)]
    node_of = {d: i for i, d in enumerate(detectors)}
    family_cols = np.array(
        list(code.z_family if family == "Z" else code.x_family)
    )

    # payload equivalence class of a fault, within one detector signature:
    # the family syndrome of its data error plus its logical parity (two
    # payloads are interchangeable corrections iff these coincide)
    if family == "Z":
        fam_ops = [op.z for op in code.z_stabilizers]
        log_mask = code.logical_z.z
    else:
        fam_ops = [op.x for op in code.x_stabilizers]
        log_mask = code.logical_x.x

    def payload_class(payload: int) -> tuple:
        bits = tuple((payload & m).bit_count() & 1 for m in fam_ops)
        return bits, (payload & log_mask).bit_count() & 1

    # key -> {class: [prob, payload]}
    grouped: dict[tuple[int, int], dict] = {}
    for loc_id, kind, value, fraction, z_ev, x_ev, pay_x, pay_z in fault_signatures(exp):
        events = z_ev if family == "Z" else x_ev
        if not events:
            continue
        loc = exp.locations[loc_id]
        prob = model.rate_for(loc) * fraction
        if prob <= 0.0:
            continue
        if len(events) > 2:
            raise RuntimeError(
                f"schedule bug: fault {value!r} at location {loc} fires "
                f"{len(events)} detectors in family {family}: {events}"
            )
        nodes = sorted(node_of[e] for e in events)
        key = (nodes[0], nodes[1]) if len(nodes) == 2 else (nodes[0], BOUNDARY)
        payload = pay_x if family == "Z" else pay_z
        classes = grouped.setdefault(key, {})
        entry = classes.setdefault(payload_class(payload), [0.0, payload])
        entry[0] += prob
    # edge weight reflects the total firing probability; the payload comes
    # from the most probable error class (signatures are class-degenerate
    # only next to the lattice boundary, where hook and data errors collide)
    edges: dict[tuple[int, int], list] = {}
    for key, classes in grouped.items():
        total = sum(p for p, _ in classes.values())
        best = max(classes.values(), key=lambda e: e[0])
        weight = 1.0 if unit_weights else -math.log(min(total, 1.0 - 1e-12))
        edges[key] = [weight, total, best[1]]
    return DetectorGraph(
        chains=chains,
        basis=basis,
        cycles=cycles,
        n_data=code.n_data,
        detectors=detectors,
        node_of=node_of,
        edges=edges,
        family_cols=family_cols,
    )


def dp_pairing(k: int, pair_cost, boundary_cost):
    """Exact minimum-weight pairing of k defects (boundary allowed) by
    bitmask dynamic programming over defect subsets."""
    full = (1 << k) - 1
    cost = [math.inf] * (full + 1)
    choice: list = [None] * (full + 1)
    cost[0] = 0.0
    for mask in range(1, full + 1):
        i = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << i)
        best = cost[rest] + boundary_cost(i)
        best_choice = ("boundary", i, rest)
        m = rest
        while m:
            j = (m & -m).bit_length() - 1
            m ^= 1 << j
            c = cost[rest ^ (1 << j)] + pair_cost(i, j)
            if c < best:
                best = c
                best_choice = ("pair", i, j, rest ^ (1 << j))
        cost[mask] = best
        choice[mask] = best_choice
    if not math.isfinite(cost[full]):
        raise RuntimeError("matching infeasible: defects unreachable")
    result = []
    mask = full
    while mask:
        ch = choice[mask]
        if ch[0] == "boundary":
            result.append(("boundary", ch[1]))
            mask = ch[2]
        else:
            result.append(("pair", ch[1], ch[2]))
            mask = ch[3]
    return cost[full], result


def blossom_pairing(k: int, pair_cost, boundary_cost):
    """Exact pairing via networkx's blossom maximum-weight matching, using
    one virtual boundary copy per defect."""
    import networkx as nx

    g = nx.Graph()
    big = 0.0
    costs = {}
    for i in range(k):
        for j in range(i + 1, k):
            c = pair_cost(i, j)
            if math.isfinite(c):
                costs[(i, j)] = c
                big = max(big, c)
        c = boundary_cost(i)
        if math.isfinite(c):
            costs[(i, k + i)] = c
            big = max(big, c)
    big = big * k + 1.0
    for (a, b), c in sorted(costs.items()):
        g.add_edge(a, b, weight=big - c)
    for i in range(k):
        for j in range(i + 1, k):
            g.add_edge(k + i, k + j, weight=big)
    mate = nx.max_weight_matching(g, maxcardinality=True)
    total = 0.0
    result = []
    for a, b in mate:
        a, b = min(a, b), max(a, b)
        if a < k and b < k:
            result.append(("pair", a, b))
            total += costs[(a, b)]
        elif a < k <= b:
            result.append(("boundary", a))
            total += costs[(a, b)]
    if 2 * len([r for r in result if r[0] == "pair"]) + len(
        [r for r in result if r[0] == "boundary"]
    ) != k:
        raise RuntimeError("matching infeasible: odd defects without boundary")
    return total, result


def decode(graph: DetectorGraph, events) -> PauliFrame:
    """Minimum-weight perfect-matching correction for a set of fired
    detectors.  ``events`` is either the full detection-event matrix or an
    iterable of (family-local stabilizer, round) pairs."""
    if isinstance(events, np.ndarray):
        sub = events[:, graph.family_cols]
        defects = [
            graph.node_of[(int(s), int(r))] for r, s in zip(*np.nonzero(sub))
        ]
    else:
        defects = [graph.node_of[tuple(e)] for e in events]
    return decode_defects(graph, defects)


def decode_defects(graph: DetectorGraph, defects: list[int]) -> PauliFrame:
    n_data = graph.n_data
    if not defects:
        return PauliFrame.identity(n_data)
    dist, payload = graph.ensure_paths()
    b = graph.n_nodes
    k = len(defects)

    def pair_cost(i, j):
        return dist[defects[i], defects[j]]

    def boundary_cost(i):
        return dist[defects[i], b]

    if k == 1:
        matches = [("boundary", 0)]
    elif k == 2:
        if pair_cost(0, 1) <= boundary_cost(0) + boundary_cost(1):
            matches = [("pair", 0, 1)]
        else:
            matches = [("boundary", 0), ("boundary", 1)]
    elif k <= _DP_MAX_DEFECTS:
        _, matches = dp_pairing(k, pair_cost, boundary_cost)
    else:
        _, matches = blossom_pairing(k, pair_cost, boundary_cost)

    acc = 0
    for m in matches:
        if m[0] == "pair":
            acc ^= payload[defects[m[1]]][defects[m[2]]]
        else:
            acc ^= payload[defects[m[1]]][b]
    if graph.chains == "ZChains":
        return PauliFrame(n_data, acc, 0)
    return PauliFrame(n_data, 0, acc)
