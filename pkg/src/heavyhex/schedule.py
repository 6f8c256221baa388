"""Cyclic gauge-measurement schedule for the heavy-hex code.

One cycle measures every Z gauge and every X gauge exactly once:

* Z sub-round (4 timesteps): every flag qubit is reset to |0>, receives a CNOT
  from each of its two data neighbours (upper row first), and is read out in
  the Z basis, giving the vertical-pair gauge outcome.
* X sub-round (10 timesteps): each weight-4 gauge uses its degree-2 measure
  qubit in |+> as CNOT control, relayed through the two adjacent flag qubits
  onto the four data qubits; the measure qubit is read out in the X basis and
  the flags in Z (deterministically 0 without faults).  Weight-2 boundary
  gauges use their measure qubit directly with two CNOTs.  Weight-4 circuits
  run in two staggered waves (odd grid row, then even) so that no data qubit
  is touched twice in one timestep; the boundary pairs fill the opposite wave.

Qubits with no event in a timestep carry an explicit Idle event.  Correctness
of the circuits (every gauge outcome +1 on a fresh memory state of the
matching basis, flags deterministic) is exercised against a stabilizer
tableau in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

from .code import HeavyHexCode


@dataclass(frozen=True)
class InitAncilla:
    qubit: int
    basis: str  # "Z" -> |0>, "X" -> |+>


@dataclass(frozen=True)
class Cnot:
    control: int
    target: int


@dataclass(frozen=True)
class MeasureAncilla:
    qubit: int
    basis: str
    gauge: int | None = None  # global gauge index (Z gauges first), None = flag


@dataclass(frozen=True)
class Idle:
    qubit: int


Event = InitAncilla | Cnot | MeasureAncilla | Idle


@dataclass
class MeasurementSchedule:
    n_qubits: int
    steps: list[list[Event]]
    n_gauges: int

    @property
    def cycle_length(self) -> int:
        return len(self.steps)

    def validate(self) -> None:
        for t, step in enumerate(self.steps):
            seen: set[int] = set()
            for ev in step:
                qubits = (
                    (ev.control, ev.target) if isinstance(ev, Cnot) else (ev.qubit,)
                )
                for q in qubits:
                    if q in seen:
                        raise ValueError(f"qubit {q} used twice in timestep {t}")
                    seen.add(q)
        gauges = [
            ev.gauge
            for step in self.steps
            for ev in step
            if isinstance(ev, MeasureAncilla) and ev.gauge is not None
        ]
        if sorted(gauges) != list(range(self.n_gauges)):
            raise ValueError("cycle does not measure every gauge exactly once")

    def to_doc(self) -> list[list[dict]]:
        out = []
        for step in self.steps:
            row = []
            for ev in step:
                if isinstance(ev, InitAncilla):
                    row.append({"init": ev.qubit, "basis": ev.basis})
                elif isinstance(ev, Cnot):
                    row.append({"cnot": [ev.control, ev.target]})
                elif isinstance(ev, MeasureAncilla):
                    row.append(
                        {"measure": ev.qubit, "basis": ev.basis, "gauge": ev.gauge}
                    )
                else:
                    row.append({"idle": ev.qubit})
            out.append(row)
        return out


def _pad_with_idles(steps: list[list[Event]], n_qubits: int) -> list[list[Event]]:
    padded = []
    for step in steps:
        busy: set[int] = set()
        for ev in step:
            if isinstance(ev, Cnot):
                busy.update((ev.control, ev.target))
            else:
                busy.add(ev.qubit)
        idles: list[Event] = [Idle(q) for q in range(n_qubits) if q not in busy]
        padded.append(list(step) + idles)
    return padded


def build_schedule(code: HeavyHexCode) -> MeasurementSchedule:
    d = code.d
    n_zg = len(code.z_gauges)

    def dq(i, j):
        return code.data_index(i, j)

    # Z sub-round
    z_init: list[Event] = []
    z_up: list[Event] = []
    z_down: list[Event] = []
    z_meas: list[Event] = []
    g = 0
    for i in range(1, d):
        for j in range(1, d + 1):
            flag = code.flag_of_zgauge[g]
            z_init.append(InitAncilla(flag, "Z"))
            z_up.append(Cnot(dq(i, j), flag))
            z_down.append(Cnot(dq(i + 1, j), flag))
            z_meas.append(MeasureAncilla(flag, "Z", gauge=g))
            g += 1

    # X sub-round: slots 1..8 between init and measurement
    x_init: list[Event] = []
    x_meas: list[Event] = []
    slots: list[list[Event]] = [[] for _ in range(8)]
    for gx, meta in enumerate(code.x_gauge_meta):
        mq = code.measure_of_xgauge[gx]
        gauge_id = n_zg + gx
        x_init.append(InitAncilla(mq, "X"))
        x_meas.append(MeasureAncilla(mq, "X", gauge=gauge_id))
        if meta[0] == "w4":
            _, i, j = meta
            f_l, f_r = code.flags_of_xgauge[gx]
            x_init.append(InitAncilla(f_l, "Z"))
            x_init.append(InitAncilla(f_r, "Z"))
            x_meas.append(MeasureAncilla(f_l, "Z"))
            x_meas.append(MeasureAncilla(f_r, "Z"))
            base = 0 if i % 2 == 1 else 3  # odd rows first, even rows offset
            q_tl, q_bl = dq(i, j), dq(i + 1, j)
            q_tr, q_br = dq(i, j + 1), dq(i + 1, j + 1)
            slots[base + 0].append(Cnot(mq, f_l))
            slots[base + 1].append(Cnot(f_l, q_tl))
            slots[base + 1].append(Cnot(mq, f_r))
            slots[base + 2].append(Cnot(f_l, q_bl))
            slots[base + 2].append(Cnot(f_r, q_tr))
            slots[base + 3].append(Cnot(mq, f_l))
            slots[base + 3].append(Cnot(f_r, q_br))
            slots[base + 4].append(Cnot(mq, f_r))
        elif meta[0] == "top":
            m = meta[1]
            slots[4].append(Cnot(mq, dq(1, 2 * m - 1)))
            slots[5].append(Cnot(mq, dq(1, 2 * m)))
        else:
            m = meta[1]
            slots[1].append(Cnot(mq, dq(d, 2 * m)))
            slots[2].append(Cnot(mq, dq(d, 2 * m + 1)))

    steps = [z_init, z_up, z_down, z_meas, x_init, *slots, x_meas]
    steps = _pad_with_idles(steps, code.n_qubits)
    sched = MeasurementSchedule(
        n_qubits=code.n_qubits,
        steps=steps,
        n_gauges=len(code.z_gauges) + len(code.x_gauges),
    )
    sched.validate()
    return sched
