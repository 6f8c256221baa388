"""Pauli-frame memory experiments on the heavy-hex code.

A memory experiment initializes all data qubits in the memory basis, runs the
gauge-measurement schedule for a number of cycles (default d), then measures
every data qubit transversally in the memory basis.  Errors are tracked as a
Pauli frame relative to the noiseless reference run, whose measurement
outcomes are fixed to +1; a fault flips an outcome iff the propagated frame
anticommutes with the measured observable.  At the stabilizer level this
reproduces the physical detector statistics exactly (individual
opposite-basis gauge outcomes are random on hardware, but only their products
and cycle-to-cycle changes carry information, and those are frame-exact).

Classical readout flips of the final data measurement are folded into the
returned ``true_frame`` as memory-basis-flipping Paulis, so decoders and the
success criterion see exactly the error the readout saw.

Noise placement: initialisation and readout noise attach to every init and
measurement; single-qubit gate noise attaches to the basis-change gates
hiding inside X-basis initialisation and readout (ancilla or data); CNOT
noise to every CNOT; idle noise to every explicit Idle event.

Detection events, shape (cycles+1, n_stabilizers):

* basis-type family: row 0 compares cycle 1 to its deterministic value, rows
  1..C-1 are consecutive-cycle differences, and row C compares the stabilizers
  reconstructed from the final data readout against the last measured cycle;
* opposite-type family: consecutive-cycle differences only (rows 1..C-1).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .code import HeavyHexCode
from .noise import (
    TWO_QUBIT_PAULIS,
    FaultLocation,
    FaultPattern,
    NoiseModel,
    sample_faults,
)
from .pauli import PauliFrame, compose, parity
from .schedule import Cnot, Idle, InitAncilla, MeasureAncilla, MeasurementSchedule


class Basis(Enum):
    MemZ = "memz"
    MemX = "memx"


def _as_basis(basis) -> Basis:
    if isinstance(basis, Basis):
        return basis
    return Basis(str(basis).lower())


# two-qubit Pauli label -> (x_control, z_control, x_target, z_target)
_PAIR_BITS = {}
for _label in TWO_QUBIT_PAULIS:
    _bits = []
    for _ch in _label:
        _bits += {"I": [0, 0], "X": [1, 0], "Y": [1, 1], "Z": [0, 1]}[_ch]
    _PAIR_BITS[_label] = tuple(_bits)
_PAIR_XC = np.array([_PAIR_BITS[p][0] for p in TWO_QUBIT_PAULIS], dtype=np.uint8)
_PAIR_ZC = np.array([_PAIR_BITS[p][1] for p in TWO_QUBIT_PAULIS], dtype=np.uint8)
_PAIR_XT = np.array([_PAIR_BITS[p][2] for p in TWO_QUBIT_PAULIS], dtype=np.uint8)
_PAIR_ZT = np.array([_PAIR_BITS[p][3] for p in TWO_QUBIT_PAULIS], dtype=np.uint8)

_ONEQ_X = np.array([1, 1, 0], dtype=np.uint8)  # X, Y, Z
_ONEQ_Z = np.array([0, 1, 1], dtype=np.uint8)


@dataclass
class _StepOps:
    """One timestep, compiled: inits, then CNOTs, then measurements, idles."""

    init_qubits: list[int]
    init_bases: list[str]
    init_locs: list[int]
    init_oneq_locs: list[int | None]
    cnots: list[tuple[int, int, int]]  # control, target, loc
    meas: list[tuple]  # (qubit, basis, readout_loc, oneq_loc, kind, key)
    idle_qubits: list[int]
    idle_locs: list[int]


@dataclass
class CompiledExperiment:
    code: HeavyHexCode
    basis: Basis
    cycles: int
    n_qubits: int
    steps: list[_StepOps]
    locations: list[FaultLocation]
    n_gauges: int

    @property
    def n_data(self) -> int:
        return self.code.n_data


def compile_experiment(
    code: HeavyHexCode,
    schedule: MeasurementSchedule | None = None,
    cycles: int | None = None,
    basis=Basis.MemZ,
) -> CompiledExperiment:
    basis = _as_basis(basis)
    schedule = schedule or code.schedule
    if schedule is None:
        raise ValueError("code has no schedule attached")
    cycles = code.d if cycles is None else cycles
    if cycles < 1:
        raise ValueError("cycles must be >= 1")

    locations: list[FaultLocation] = []
    steps: list[_StepOps] = []
    data_basis = "Z" if basis is Basis.MemZ else "X"

    def new_loc(kind, step, qubits) -> int:
        locations.append(FaultLocation(len(locations), kind, step, tuple(qubits)))
        return locations[-1].loc_id

    def blank() -> _StepOps:
        return _StepOps([], [], [], [], [], [], [], [])

    step_no = 0

    # data initialisation (an X-basis preparation carries the basis-change
    # gate, hence a 1q location)
    ops = blank()
    for q in range(code.n_data):
        ops.init_qubits.append(q)
        ops.init_bases.append(data_basis)
        ops.init_locs.append(new_loc("init", step_no, (q,)))
        ops.init_oneq_locs.append(
            new_loc("1q", step_no, (q,)) if data_basis == "X" else None
        )
    for q in range(code.n_data, code.n_qubits):
        ops.idle_qubits.append(q)
        ops.idle_locs.append(new_loc("idle", step_no, (q,)))
    steps.append(ops)
    step_no += 1

    for cycle in range(cycles):
        for sched_step in schedule.steps:
            ops = blank()
            for ev in sched_step:
                if isinstance(ev, InitAncilla):
                    ops.init_qubits.append(ev.qubit)
                    ops.init_bases.append(ev.basis)
                    ops.init_locs.append(new_loc("init", step_no, (ev.qubit,)))
                    ops.init_oneq_locs.append(
                        new_loc("1q", step_no, (ev.qubit,))
                        if ev.basis == "X"
                        else None
                    )
                elif isinstance(ev, Cnot):
                    loc = new_loc("2q", step_no, (ev.control, ev.target))
                    ops.cnots.append((ev.control, ev.target, loc))
                elif isinstance(ev, MeasureAncilla):
                    oneq = (
                        new_loc("1q", step_no, (ev.qubit,))
                        if ev.basis == "X"
                        else None
                    )
                    rloc = new_loc("readout", step_no, (ev.qubit,))
                    kind = "flag" if ev.gauge is None else "gauge"
                    key = None if ev.gauge is None else (cycle, ev.gauge)
                    ops.meas.append((ev.qubit, ev.basis, rloc, oneq, kind, key))
                else:
                    ops.idle_qubits.append(ev.qubit)
                    ops.idle_locs.append(new_loc("idle", step_no, (ev.qubit,)))
            steps.append(ops)
            step_no += 1

    # final transversal data measurement (X-basis readout carries the
    # basis-change gate)
    ops = blank()
    for q in range(code.n_data):
        oneq = new_loc("1q", step_no, (q,)) if data_basis == "X" else None
        rloc = new_loc("readout", step_no, (q,))
        ops.meas.append((q, data_basis, rloc, oneq, "data", q))
    for q in range(code.n_data, code.n_qubits):
        ops.idle_qubits.append(q)
        ops.idle_locs.append(new_loc("idle", step_no, (q,)))
    steps.append(ops)

    return CompiledExperiment(
        code=code,
        basis=basis,
        cycles=cycles,
        n_qubits=code.n_qubits,
        steps=steps,
        locations=locations,
        n_gauges=schedule.n_gauges,
    )


@dataclass
class ShotRecord:
    basis: Basis
    gauge_outcomes: np.ndarray  # (cycles, n_gauges)
    stabilizer_outcomes: np.ndarray  # (cycles, n_stabilizers)
    detection_events: np.ndarray  # (cycles + 1, n_stabilizers)
    final_data_readout: np.ndarray  # (n_data,)
    true_frame: PauliFrame


@dataclass
class BatchRecord:
    basis: Basis
    gauge_outcomes: np.ndarray  # (B, cycles, n_gauges)
    stabilizer_outcomes: np.ndarray
    detection_events: np.ndarray
    final_data_readout: np.ndarray
    true_x: np.ndarray  # (B, n_data)
    true_z: np.ndarray

    @property
    def shots(self) -> int:
        return self.gauge_outcomes.shape[0]

    def shot(self, i: int) -> ShotRecord:
        n = self.true_x.shape[1]
        x = int("".join(str(b) for b in self.true_x[i, ::-1]), 2)
        z = int("".join(str(b) for b in self.true_z[i, ::-1]), 2)
        return ShotRecord(
            basis=self.basis,
            gauge_outcomes=self.gauge_outcomes[i],
            stabilizer_outcomes=self.stabilizer_outcomes[i],
            detection_events=self.detection_events[i],
            final_data_readout=self.final_data_readout[i],
            true_frame=PauliFrame(n, x, z),
        )


class _Derivers:
    """Cached check matrices for outcome derivation."""

    def __init__(self, exp: CompiledExperiment):
        code = exp.code
        self.g2s = code.gauge_to_stab_matrix()
        if exp.basis is Basis.MemZ:
            self.recon_mat = code.z_check_matrix()
            self.basis_cols = np.array(list(code.z_family))
        else:
            self.recon_mat = code.x_check_matrix()
            self.basis_cols = np.array(list(code.x_family))


def _derivers(exp: CompiledExperiment) -> _Derivers:
    cache = getattr(exp.code, "_derivers_cache", None)
    if cache is None:
        cache = {}
        exp.code._derivers_cache = cache
    if exp.basis not in cache:
        cache[exp.basis] = _Derivers(exp)
    return cache[exp.basis]


def derive_outputs(exp: CompiledExperiment, gauge_out, data_out):
    """Stabilizer outcomes and detection events from raw outcomes (batched)."""
    der = _derivers(exp)
    c = exp.cycles
    stab = np.einsum("bcg,sg->bcs", gauge_out, der.g2s, dtype=np.int32) % 2
    stab = stab.astype(np.uint8)
    recon = (data_out @ der.recon_mat.T) % 2  # (B, n_basis_stabs)
    n_stab = stab.shape[2]
    events = np.zeros((stab.shape[0], c + 1, n_stab), dtype=np.uint8)
    cols = der.basis_cols
    events[:, 0, cols] = stab[:, 0, cols]
    if c > 1:
        events[:, 1:c, :] = stab[:, 1:, :] ^ stab[:, :-1, :]
    events[:, c, cols] = recon ^ stab[:, c - 1, cols]
    return stab, events


def run_with_faults(exp: CompiledExperiment, pattern: FaultPattern) -> ShotRecord:
    """Deterministic single-shot propagation of an explicit fault pattern."""
    faults = pattern.by_location() if isinstance(pattern, FaultPattern) else dict(pattern)
    x = z = 0
    code = exp.code
    gauge_out = np.zeros((exp.cycles, exp.n_gauges), dtype=np.uint8)
    data_out = np.zeros(code.n_data, dtype=np.uint8)
    memz = exp.basis is Basis.MemZ

    def apply_1q(q, label):
        nonlocal x, z
        if label in ("X", "Y"):
            x ^= 1 << q
        if label in ("Z", "Y"):
            z ^= 1 << q

    for ops in exp.steps:
        for q, _b, loc, oneq in zip(
            ops.init_qubits, ops.init_bases, ops.init_locs, ops.init_oneq_locs
        ):
            x &= ~(1 << q)
            z &= ~(1 << q)
            if loc in faults:
                apply_1q(q, faults[loc])
            if oneq is not None and oneq in faults:
                apply_1q(q, faults[oneq])
        for c, t, loc in ops.cnots:
            if (x >> c) & 1:
                x ^= 1 << t
            if (z >> t) & 1:
                z ^= 1 << c
            if loc in faults:
                label = faults[loc]
                bc = _PAIR_BITS[label]
                x ^= bc[0] << c
                z ^= bc[1] << c
                x ^= bc[2] << t
                z ^= bc[3] << t
        for q, basis, rloc, oneq, kind, key in ops.meas:
            if oneq is not None and oneq in faults:
                apply_1q(q, faults[oneq])
            flip = 1 if rloc in faults else 0
            if kind == "data":
                # fold the classical readout flip into the frame
                if memz:
                    x ^= flip << q
                    data_out[key] = (x >> q) & 1
                else:
                    z ^= flip << q
                    data_out[key] = (z >> q) & 1
            elif kind == "gauge":
                bit = (x >> q) & 1 if basis == "Z" else (z >> q) & 1
                cycle, g = key
                gauge_out[cycle, g] = bit ^ flip
        for q, loc in zip(ops.idle_qubits, ops.idle_locs):
            if loc in faults:
                apply_1q(q, faults[loc])

    data_mask = (1 << code.n_data) - 1
    true_frame = PauliFrame(code.n_data, x & data_mask, z & data_mask)
    stab, events = derive_outputs(exp, gauge_out[None], data_out[None])
    return ShotRecord(
        basis=exp.basis,
        gauge_outcomes=gauge_out,
        stabilizer_outcomes=stab[0],
        detection_events=events[0],
        final_data_readout=data_out,
        true_frame=true_frame,
    )


def run_memory(
    code: HeavyHexCode,
    schedule: MeasurementSchedule | None,
    model: NoiseModel,
    cycles: int | None,
    basis,
    rng: np.random.Generator,
) -> ShotRecord:
    """Sample one fault pattern and run one memory experiment."""
    exp = compile_experiment(code, schedule, cycles, basis)
    pattern = sample_faults(exp, model, rng)
    return run_with_faults(exp, pattern)


def run_batch(
    exp: CompiledExperiment,
    model: NoiseModel,
    shots: int,
    rng: np.random.Generator,
    forced: FaultPattern | None = None,
) -> BatchRecord:
    """Vectorized batch of independent memory experiments.

    ``forced`` injects the given fault pattern into every shot on top of the
    sampled noise (useful for deterministic fault studies and tests).
    """
    b = shots
    q_n = exp.n_qubits
    forced_map = forced.by_location() if forced is not None else {}
    x = np.zeros((b, q_n), dtype=np.uint8)
    z = np.zeros((b, q_n), dtype=np.uint8)
    gauge_out = np.zeros((b, exp.cycles, exp.n_gauges), dtype=np.uint8)
    data_out = np.zeros((b, exp.code.n_data), dtype=np.uint8)
    memz = exp.basis is Basis.MemZ
    locs = exp.locations

    def pauli_faults(qubits, loc_ids):
        """Uniform {X,Y,Z} faults on a list of qubits, plus forced faults."""
        if not qubits:
            return
        ps = np.asarray([model.rate_for(locs[l]) for l in loc_ids])
        live = ps > 0
        if live.any():
            qs = np.asarray(qubits)[live]
            occ = rng.random((b, len(qs))) < ps[live][None, :]
            if occ.any():
                kinds = rng.integers(0, 3, size=(b, len(qs)), dtype=np.int8)
                x[:, qs] ^= (occ & (_ONEQ_X[kinds] == 1)).astype(np.uint8)
                z[:, qs] ^= (occ & (_ONEQ_Z[kinds] == 1)).astype(np.uint8)
        if forced_map:
            for q, l in zip(qubits, loc_ids):
                label = forced_map.get(l)
                if label is not None:
                    if label in ("X", "Y"):
                        x[:, q] ^= 1
                    if label in ("Z", "Y"):
                        z[:, q] ^= 1

    for ops in exp.steps:
        if ops.init_qubits:
            qs = np.asarray(ops.init_qubits)
            x[:, qs] = 0
            z[:, qs] = 0
            pauli_faults(ops.init_qubits, ops.init_locs)
            oneq_qs = [
                q for q, l in zip(ops.init_qubits, ops.init_oneq_locs) if l is not None
            ]
            oneq_ls = [l for l in ops.init_oneq_locs if l is not None]
            pauli_faults(oneq_qs, oneq_ls)
        for c, t, loc in ops.cnots:
            x[:, t] ^= x[:, c]
            z[:, c] ^= z[:, t]
            p = model.rate_for(locs[loc])
            if p > 0:
                occ = rng.random(b) < p
                if occ.any():
                    kinds = rng.integers(0, 15, size=b, dtype=np.int8)
                    x[:, c] ^= (occ & (_PAIR_XC[kinds] == 1)).astype(np.uint8)
                    z[:, c] ^= (occ & (_PAIR_ZC[kinds] == 1)).astype(np.uint8)
                    x[:, t] ^= (occ & (_PAIR_XT[kinds] == 1)).astype(np.uint8)
                    z[:, t] ^= (occ & (_PAIR_ZT[kinds] == 1)).astype(np.uint8)
            if loc in forced_map:
                bits = _PAIR_BITS[forced_map[loc]]
                x[:, c] ^= bits[0]
                z[:, c] ^= bits[1]
                x[:, t] ^= bits[2]
                z[:, t] ^= bits[3]
        if ops.meas:
            oneq_qs = [m[0] for m in ops.meas if m[3] is not None]
            oneq_ls = [m[3] for m in ops.meas if m[3] is not None]
            pauli_faults(oneq_qs, oneq_ls)
            for q, basis, rloc, _oneq, kind, key in ops.meas:
                if kind == "flag":
                    continue  # flag outcomes are not used downstream
                p = model.rate_for(locs[rloc])
                flips = (
                    (rng.random(b) < p).astype(np.uint8)
                    if p > 0
                    else np.zeros(b, dtype=np.uint8)
                )
                if rloc in forced_map:
                    flips ^= 1
                if kind == "data":
                    if memz:
                        x[:, q] ^= flips
                        data_out[:, key] = x[:, q]
                    else:
                        z[:, q] ^= flips
                        data_out[:, key] = z[:, q]
                else:
                    bit = x[:, q] if basis == "Z" else z[:, q]
                    cycle, g = key
                    gauge_out[:, cycle, g] = bit ^ flips
        if ops.idle_qubits:
            pauli_faults(ops.idle_qubits, ops.idle_locs)

    stab, events = derive_outputs(exp, gauge_out, data_out)
    n_data = exp.code.n_data
    return BatchRecord(
        basis=exp.basis,
        gauge_outcomes=gauge_out,
        stabilizer_outcomes=stab,
        detection_events=events,
        final_data_readout=data_out,
        true_x=x[:, :n_data].copy(),
        true_z=z[:, :n_data].copy(),
    )


def correction_succeeds(
    code: HeavyHexCode, true_frame: PauliFrame, correction: PauliFrame, basis
) -> bool:
    """Operational E_c E in G test for the measured sector.

    The residual's error components that flip the memory-basis readout (X
    components for Z memory, Z components for X memory) must lie in the gauge
    group: zero syndrome against the detecting stabilizer family and even
    overlap with the tracked logical representative.  Components of the
    unmeasured sector act trivially on the readout and are ignored.
    """
    basis = _as_basis(basis)
    r = compose(true_frame, correction)
    if basis is Basis.MemZ:
        residual = r.x_bits
        checks = code.z_stabilizers
        logical = code.logical_z
        log_mask = logical.z
        for op in checks:
            if parity(op.z & residual):
                return False
    else:
        residual = r.z_bits
        checks = code.x_stabilizers
        logical = code.logical_x
        log_mask = logical.x
        for op in checks:
            if parity(op.x & residual):
                return False
    return parity(log_mask & residual) == 0


def logical_outcome(code: HeavyHexCode, record: ShotRecord, correction: PauliFrame) -> int:
    """Decoded logical readout: data parity over the logical support XOR the
    correction parity (0 = the initialized value was preserved)."""
    basis = record.basis
    if basis is Basis.MemZ:
        mask = code.logical_z.z
        corr = correction.x_bits
    else:
        mask = code.logical_x.x
        corr = correction.z_bits
    out = 0
    for q in range(code.n_data):
        if (mask >> q) & 1:
            out ^= int(record.final_data_readout[q])
    return out ^ parity(mask & corr)
