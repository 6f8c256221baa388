"""Circuit-level Pauli noise: five error sources and fault sampling.

Sources and their channels:

* ``1q``   - single-qubit gate error.  The only explicit single-qubit gates
             are the basis changes hiding inside X-basis initialisation and
             readout, so those events carry the 1q locations.  Fault: uniform
             over {X, Y, Z}.
* ``2q``   - CNOT error.  Fault: uniform over the 15 two-qubit Paulis
             excluding I(x)I, applied after the gate.
* ``init`` - state initialisation error: uniform {X, Y, Z} after a perfect
             reset.
* ``idle`` - uniform {X, Y, Z} on every qubit with an explicit Idle event.
* ``readout`` - classical flip of a measurement outcome.

A uniform model sets all five rates to the same p at every location; a device
model copies per-qubit / per-coupling rates from a calibration file through a
sub-graph placement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .schedule import Cnot, Idle, InitAncilla, MeasureAncilla, MeasurementSchedule

SOURCES = ("1q", "init", "idle", "readout", "2q")

# canonical order for the 15 non-identity two-qubit Pauli pairs
TWO_QUBIT_PAULIS = tuple(
    a + b for a in "IXYZ" for b in "IXYZ" if a + b != "II"
)
ONE_QUBIT_PAULIS = ("X", "Y", "Z")


def _check_rate(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    return float(p)


@dataclass
class NoiseModel:
    """Per-source fault rates; scalars broadcast to every location."""

    p_1q: float | dict[int, float] = 0.0
    p_2q: float | dict[tuple[int, int], float] = 0.0
    p_init: float | dict[int, float] = 0.0
    p_idle: float | dict[int, float] = 0.0
    p_readout: float | dict[int, float] = 0.0

    def _qubit_rate(self, table, q: int) -> float:
        if isinstance(table, dict):
            if q not in table:
                raise KeyError(f"no rate for qubit {q}")
            return table[q]
        return table

    def rate_1q(self, q: int) -> float:
        return self._qubit_rate(self.p_1q, q)

    def rate_init(self, q: int) -> float:
        return self._qubit_rate(self.p_init, q)

    def rate_idle(self, q: int) -> float:
        return self._qubit_rate(self.p_idle, q)

    def rate_readout(self, q: int) -> float:
        return self._qubit_rate(self.p_readout, q)

    def rate_2q(self, a: int, b: int) -> float:
        if isinstance(self.p_2q, dict):
            key = (min(a, b), max(a, b))
            if key not in self.p_2q:
                raise KeyError(f"no rate for coupling {key}")
            return self.p_2q[key]
        return self.p_2q

    def rate_for(self, loc: "FaultLocation") -> float:
        if loc.kind == "1q":
            return self.rate_1q(loc.qubits[0])
        if loc.kind == "init":
            return self.rate_init(loc.qubits[0])
        if loc.kind == "idle":
            return self.rate_idle(loc.qubits[0])
        if loc.kind == "readout":
            return self.rate_readout(loc.qubits[0])
        return self.rate_2q(*loc.qubits)


def uniform_model(p: float) -> NoiseModel:
    """All five error sources at rate ``p`` at every location."""
    p = _check_rate(p)
    return NoiseModel(p_1q=p, p_2q=p, p_init=p, p_idle=p, p_readout=p)


def single_source_model(source: str, p: float) -> NoiseModel:
    """Only one error source active, at rate ``p``; the rest are zero."""
    if source not in SOURCES:
        raise ValueError(f"unknown source {source!r}, expected one of {SOURCES}")
    p = _check_rate(p)
    model = NoiseModel()
    setattr(model, f"p_{source}", p)
    return model


def device_model(cal, placement) -> NoiseModel:
    """Per-location rates copied from a calibrated device via a placement.

    ``cal`` is a :class:`heavyhex.layout.DeviceCalibration`; ``placement``
    maps every code qubit index to a device qubit id.
    """
    mapping = placement.mapping
    p_1q, p_init, p_idle, p_readout = {}, {}, {}, {}
    for q_code, q_dev in mapping.items():
        if q_dev not in cal.qubits:
            raise KeyError(f"device qubit {q_dev} missing from calibration")
        entry = cal.qubits[q_dev]
        p_1q[q_code] = entry.sq_error
        p_init[q_code] = entry.init_error
        p_idle[q_code] = entry.idle_error
        p_readout[q_code] = entry.readout_error
    p_2q = {}
    for a, b in placement.code_couplings:
        dev_pair = (min(mapping[a], mapping[b]), max(mapping[a], mapping[b]))
        if dev_pair not in cal.couplings:
            raise KeyError(f"device coupling {dev_pair} missing from calibration")
        p_2q[(min(a, b), max(a, b))] = cal.couplings[dev_pair]
    return NoiseModel(p_1q=p_1q, p_2q=p_2q, p_init=p_init, p_idle=p_idle,
                      p_readout=p_readout)


@dataclass(frozen=True)
class FaultLocation:
    loc_id: int
    kind: str  # "1q" | "2q" | "init" | "idle" | "readout"
    step: int
    qubits: tuple[int, ...]


@dataclass(frozen=True)
class Fault:
    """One sampled fault: a Pauli label, or "flip" for readout locations."""

    location: FaultLocation
    value: str


@dataclass
class FaultPattern:
    faults: list[Fault] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.faults)

    def by_location(self) -> dict[int, str]:
        return {f.location.loc_id: f.value for f in self.faults}


def schedule_locations(schedule: MeasurementSchedule) -> list[FaultLocation]:
    """Fault locations of one bare cycle (no data init/readout wrapper)."""
    locs: list[FaultLocation] = []

    def add(kind, step, qubits):
        locs.append(FaultLocation(len(locs), kind, step, tuple(qubits)))

    for t, step in enumerate(schedule.steps):
        for ev in step:
            if isinstance(ev, InitAncilla):
                add("init", t, (ev.qubit,))
                if ev.basis == "X":
                    add("1q", t, (ev.qubit,))
            elif isinstance(ev, Cnot):
                add("2q", t, (ev.control, ev.target))
            elif isinstance(ev, MeasureAncilla):
                if ev.basis == "X":
                    add("1q", t, (ev.qubit,))
                add("readout", t, (ev.qubit,))
            elif isinstance(ev, Idle):
                add("idle", t, (ev.qubit,))
    return locs


def sample_faults(target, model: NoiseModel, rng: np.random.Generator) -> FaultPattern:
    """Draw one fault pattern; deterministic given the generator state.

    ``target`` is a MeasurementSchedule, a list of FaultLocation, or any
    object with a ``locations`` attribute (e.g. a compiled experiment).
    """
    if isinstance(target, MeasurementSchedule):
        locations = schedule_locations(target)
    elif hasattr(target, "locations"):
        locations = target.locations
    else:
        locations = target

    pattern = FaultPattern()
    for loc in locations:
        p = model.rate_for(loc)
        if p <= 0.0:
            continue
        if rng.random() >= p:
            continue
        if loc.kind == "readout":
            value = "flip"
        elif loc.kind == "2q":
            value = TWO_QUBIT_PAULIS[rng.integers(0, 15)]
        else:
            value = ONE_QUBIT_PAULIS[rng.integers(0, 3)]
        pattern.faults.append(Fault(loc, value))
    return pattern
