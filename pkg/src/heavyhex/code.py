"""Adjusted heavy-hexagonal subsystem code of odd distance d.

Data qubits live on a d x d grid (row i, column j, both 1-based).  Generators:

* X stabilizers: Bacon-Shor style column-pair products, one per adjacent
  column pair (j, j+1), j = 1..d-1.
* Z stabilizers: weight-4 plaquettes at (i, j) with i, j <= d-1 and i+j even,
  plus weight-2 edge pairs Z(2m,1)Z(2m+1,1) on the left column and
  Z(2m-1,d)Z(2m,d) on the right column.
* Z gauges: vertical pairs Z(i,j)Z(i+1,j).
* X gauges: weight-4 squares at (i, j) with i+j odd, plus weight-2 row pairs
  X(1,2m-1)X(1,2m) along the top and X(d,2m)X(d,2m+1) along the bottom.

Each Z stabilizer is the product of its one or two constituent Z gauges; each
X stabilizer is the product of the X gauges supported inside its column pair.

Ancillas: a "flag" qubit sits on every vertical edge between data qubits (it
measures the Z gauge there and flags the X gauge circuit), a degree-2
"measure" qubit sits between the two flags of every weight-4 X gauge, and one
measure qubit sits on the horizontal edge of every weight-2 X gauge.  The
resulting coupling graph has maximum degree 3 (heavy-hex).

The syndrome bit order used everywhere is: all Z stabilizers (bulk plaquettes
row-major, then left edges, then right edges), then all X stabilizers by
column pair.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .pauli import PauliFrame, PauliOperator, parity


class Role(Enum):
    DATA = "data"
    FLAG = "flag"
    MEASURE = "measure"


@dataclass(frozen=True)
class QubitId:
    index: int
    role: Role
    coord: tuple[float, float]


@dataclass
class HeavyHexCode:
    d: int
    qubits: list[QubitId]
    data_qubits: list[QubitId]
    x_stabilizers: list[PauliOperator]
    z_stabilizers: list[PauliOperator]
    x_gauges: list[PauliOperator]
    z_gauges: list[PauliOperator]
    logical_x: PauliOperator
    logical_z: PauliOperator
    # gauge indices (into z_gauges / x_gauges) whose product is each stabilizer
    z_stab_constituents: list[tuple[int, ...]]
    x_stab_constituents: list[tuple[int, ...]]
    # ancilla bookkeeping: these index into `qubits`
    flag_of_zgauge: list[int]
    measure_of_xgauge: list[int]
    flags_of_xgauge: list[tuple[int, ...]]
    # ("w4", i, j) | ("top", m) | ("bot", m) per X gauge, in x_gauges order
    x_gauge_meta: list[tuple]
    couplings: set[tuple[int, int]]
    schedule: "object | None" = field(default=None, repr=False)

    # -- sizes ---------------------------------------------------------------

    @property
    def n_data(self) -> int:
        return self.d * self.d

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    @property
    def stabilizers(self) -> list[PauliOperator]:
        """All stabilizer generators in syndrome order (Z family, X family)."""
        return self.z_stabilizers + self.x_stabilizers

    @property
    def n_stabilizers(self) -> int:
        return len(self.z_stabilizers) + len(self.x_stabilizers)

    @property
    def z_family(self) -> range:
        """Syndrome indices of the Z-type stabilizers."""
        return range(len(self.z_stabilizers))

    @property
    def x_family(self) -> range:
        """Syndrome indices of the X-type stabilizers."""
        n_z = len(self.z_stabilizers)
        return range(n_z, n_z + len(self.x_stabilizers))

    @property
    def gauges(self) -> list[PauliOperator]:
        """All gauge generators in outcome order (Z gauges, then X gauges)."""
        return self.z_gauges + self.x_gauges

    def data_index(self, i: int, j: int) -> int:
        if not (1 <= i <= self.d and 1 <= j <= self.d):
            raise ValueError(f"data coordinate ({i},{j}) outside grid")
        return (i - 1) * self.d + (j - 1)

    # -- check matrices (numpy views used by the simulator and decoders) -----

    def z_check_matrix(self) -> np.ndarray:
        """Rows: Z stabilizers; columns: data qubits (acts on X error bits)."""
        return _support_matrix(self.z_stabilizers, self.n_data, "z")

    def x_check_matrix(self) -> np.ndarray:
        """Rows: X stabilizers; columns: data qubits (acts on Z error bits)."""
        return _support_matrix(self.x_stabilizers, self.n_data, "x")

    def gauge_to_stab_matrix(self) -> np.ndarray:
        """Binary matrix S x G: stabilizer row = XOR of constituent gauges."""
        n_g = len(self.z_gauges) + len(self.x_gauges)
        mat = np.zeros((self.n_stabilizers, n_g), dtype=np.uint8)
        for s, gs in enumerate(self.z_stab_constituents):
            for g in gs:
                mat[s, g] = 1
        off = len(self.z_stabilizers)
        g_off = len(self.z_gauges)
        for s, gs in enumerate(self.x_stab_constituents):
            for g in gs:
                mat[off + s, g_off + g] = 1
        return mat

    def to_json(self) -> str:
        doc = {
            "distance": self.d,
            "qubits": [
                {"index": q.index, "role": q.role.value, "coord": list(q.coord)}
                for q in self.qubits
            ],
            "couplings": sorted(list(c) for c in self.couplings),
            "z_stabilizers": [_sparse(op) for op in self.z_stabilizers],
            "x_stabilizers": [_sparse(op) for op in self.x_stabilizers],
            "z_gauges": [_sparse(op) for op in self.z_gauges],
            "x_gauges": [_sparse(op) for op in self.x_gauges],
            "logical_x": _sparse(self.logical_x),
            "logical_z": _sparse(self.logical_z),
        }
        if self.schedule is not None:
            doc["schedule"] = self.schedule.to_doc()
        return json.dumps(doc, indent=1)


def _sparse(op: PauliOperator) -> list[list]:
    return [[q, p] for q, p in sorted(op.support.items())]


def _support_matrix(ops: list[PauliOperator], n: int, kind: str) -> np.ndarray:
    mat = np.zeros((len(ops), n), dtype=np.uint8)
    for r, op in enumerate(ops):
        mask = op.z if kind == "z" else op.x
        for q in range(n):
            mat[r, q] = (mask >> q) & 1
    return mat


def stabilizer_count(d: int) -> int:
    """Stabilizer generators measured per cycle: (d^2 + 2d - 3) / 2."""
    return (d * d + 2 * d - 3) // 2


def build_code(d: int, with_schedule: bool = True) -> HeavyHexCode:
    """Construct the adjusted heavy-hex code of odd distance ``3 <= d <= 13``."""
    if d % 2 == 0 or not 3 <= d <= 13:
        raise ValueError(f"distance must be odd and within [3, 13], got {d}")

    n_data = d * d

    def dq(i, j):
        return (i - 1) * d + (j - 1)

    def zop(*coords):
        return PauliOperator.from_support(n_data, {dq(i, j): "Z" for i, j in coords})

    def xop(*coords):
        return PauliOperator.from_support(n_data, {dq(i, j): "X" for i, j in coords})

    # gauge generators
    z_gauges = []
    z_gauge_index = {}
    for i in range(1, d):
        for j in range(1, d + 1):
            z_gauge_index[(i, j)] = len(z_gauges)
            z_gauges.append(zop((i, j), (i + 1, j)))

    x_gauges = []
    x_gauge_meta = []  # ("w4", i, j) | ("top", m) | ("bot", m)
    for i in range(1, d):
        for j in range(1, d):
            if (i + j) % 2 == 1:
                x_gauge_meta.append(("w4", i, j))
                x_gauges.append(xop((i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)))
    for m in range(1, (d - 1) // 2 + 1):
        x_gauge_meta.append(("top", m))
        x_gauges.append(xop((1, 2 * m - 1), (1, 2 * m)))
    for m in range(1, (d - 1) // 2 + 1):
        x_gauge_meta.append(("bot", m))
        x_gauges.append(xop((d, 2 * m), (d, 2 * m + 1)))

    # Z stabilizers: bulk plaquettes, then left/right edge pairs
    z_stabilizers = []
    z_stab_constituents = []
    for i in range(1, d):
        for j in range(1, d):
            if (i + j) % 2 == 0:
                z_stabilizers.append(
                    zop((i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1))
                )
                z_stab_constituents.append(
                    (z_gauge_index[(i, j)], z_gauge_index[(i, j + 1)])
                )
    for m in range(1, (d - 1) // 2 + 1):
        z_stabilizers.append(zop((2 * m, 1), (2 * m + 1, 1)))
        z_stab_constituents.append((z_gauge_index[(2 * m, 1)],))
    for m in range(1, (d - 1) // 2 + 1):
        z_stabilizers.append(zop((2 * m - 1, d), (2 * m, d)))
        z_stab_constituents.append((z_gauge_index[(2 * m - 1, d)],))

    # X stabilizers: column-pair products of the X gauges inside the pair
    x_stabilizers = []
    x_stab_constituents = []
    for j in range(1, d):
        x_stabilizers.append(
            xop(*[(i, jj) for i in range(1, d + 1) for jj in (j, j + 1)])
        )
        members = []
        for g, meta in enumerate(x_gauge_meta):
            if meta[0] == "w4" and meta[2] == j:
                members.append(g)
            elif meta[0] == "top" and j == 2 * meta[1] - 1:
                members.append(g)
            elif meta[0] == "bot" and j == 2 * meta[1]:
                members.append(g)
        x_stab_constituents.append(tuple(members))

    logical_x = xop(*[(i, 1) for i in range(1, d + 1)])
    logical_z = zop(*[(1, j) for j in range(1, d + 1)])

    # qubit register: data, flags, weight-4 measures, top measures, bottom
    qubits = []
    for i in range(1, d + 1):
        for j in range(1, d + 1):
            qubits.append(QubitId(len(qubits), Role.DATA, (float(i), float(j))))
    flag_index = {}
    for i in range(1, d):
        for j in range(1, d + 1):
            flag_index[(i, j)] = len(qubits)
            qubits.append(QubitId(len(qubits), Role.FLAG, (i + 0.5, float(j))))
    measure_of_xgauge = []
    flags_of_xgauge = []
    for meta in x_gauge_meta:
        idx = len(qubits)
        if meta[0] == "w4":
            _, i, j = meta
            qubits.append(QubitId(idx, Role.MEASURE, (i + 0.5, j + 0.5)))
            measure_of_xgauge.append(idx)
            flags_of_xgauge.append((flag_index[(i, j)], flag_index[(i, j + 1)]))
        elif meta[0] == "top":
            m = meta[1]
            qubits.append(QubitId(idx, Role.MEASURE, (1.0, 2 * m - 0.5)))
            measure_of_xgauge.append(idx)
            flags_of_xgauge.append(())
        else:
            m = meta[1]
            qubits.append(QubitId(idx, Role.MEASURE, (float(d), 2 * m + 0.5)))
            measure_of_xgauge.append(idx)
            flags_of_xgauge.append(())

    flag_of_zgauge = [flag_index[(i, j)] for i in range(1, d) for j in range(1, d + 1)]

    couplings = set()

    def couple(a, b):
        couplings.add((min(a, b), max(a, b)))

    for i in range(1, d):
        for j in range(1, d + 1):
            couple(dq(i, j), flag_index[(i, j)])
            couple(dq(i + 1, j), flag_index[(i, j)])
    for g, meta in enumerate(x_gauge_meta):
        mq = measure_of_xgauge[g]
        if meta[0] == "w4":
            for f in flags_of_xgauge[g]:
                couple(mq, f)
        elif meta[0] == "top":
            m = meta[1]
            couple(mq, dq(1, 2 * m - 1))
            couple(mq, dq(1, 2 * m))
        else:
            m = meta[1]
            couple(mq, dq(d, 2 * m))
            couple(mq, dq(d, 2 * m + 1))

    code = HeavyHexCode(
        d=d,
        qubits=qubits,
        data_qubits=qubits[:n_data],
        x_stabilizers=x_stabilizers,
        z_stabilizers=z_stabilizers,
        x_gauges=x_gauges,
        z_gauges=z_gauges,
        logical_x=logical_x,
        logical_z=logical_z,
        z_stab_constituents=z_stab_constituents,
        x_stab_constituents=x_stab_constituents,
        flag_of_zgauge=flag_of_zgauge,
        measure_of_xgauge=measure_of_xgauge,
        flags_of_xgauge=flags_of_xgauge,
        x_gauge_meta=x_gauge_meta,
        couplings=couplings,
    )
    if with_schedule:
        from .schedule import build_schedule

        code.schedule = build_schedule(code)
    return code


def static_syndrome(code: HeavyHexCode, frame: PauliFrame) -> np.ndarray:
    """Stabilizer syndrome bits of a data-qubit error frame.

    Bit k is 1 iff the frame anticommutes with stabilizer generator k
    (eigenvalue -1 maps to 1, +1 maps to 0).  Order: Z family, then X family.
    """
    if frame.n != code.n_data:
        raise ValueError(
            f"frame acts on {frame.n} qubits, expected data register of size "
            f"{code.n_data}"
        )
    bits = np.zeros(code.n_stabilizers, dtype=np.uint8)
    for k, op in enumerate(code.z_stabilizers):
        bits[k] = parity(op.z & frame.x_bits)
    off = len(code.z_stabilizers)
    for k, op in enumerate(code.x_stabilizers):
        bits[off + k] = parity(op.x & frame.z_bits)
    return bits


def eigenvalues_to_bits(eigenvalues) -> np.ndarray:
    """Map measured stabilizer eigenvalues (+1/-1) to syndrome bits (0/1)."""
    out = np.zeros(len(eigenvalues), dtype=np.uint8)
    for k, e in enumerate(eigenvalues):
        if e not in (1, -1):
            raise ValueError(f"eigenvalue must be +1 or -1, got {e}")
        out[k] = 1 if e == -1 else 0
    return out
