"""Phase-free Pauli operators and error frames.

Operators are tracked modulo global phase, so a Pauli on one qubit is just a
pair of bits (x, z) with Y = X.Z.  Multi-qubit operators and accumulated error
frames are bit masks over a register; composition is bitwise XOR, which gives
X^2 = Y^2 = Z^2 = I and X.Z = Y for free.
"""

from __future__ import annotations

from dataclasses import dataclass

_PAULI_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_PAULI = {(1, 0): "X", (1, 1): "Y", (0, 1): "Z"}


def parity(mask: int) -> int:
    return mask.bit_count() & 1


@dataclass(frozen=True)
class PauliOperator:
    """Immutable n-qubit Pauli, stored as x/z support masks."""

    n: int
    x: int = 0
    z: int = 0

    @classmethod
    def from_support(cls, n: int, support: dict[int, str]) -> "PauliOperator":
        x = z = 0
        for q, p in support.items():
            if not 0 <= q < n:
                raise ValueError(f"qubit {q} outside register of size {n}")
            xb, zb = _PAULI_BITS[p]
            x |= xb << q
            z |= zb << q
        return cls(n, x, z)

    @property
    def support(self) -> dict[int, str]:
        out = {}
        for q in range(self.n):
            key = ((self.x >> q) & 1, (self.z >> q) & 1)
            if key != (0, 0):
                out[q] = _BITS_PAULI[key]
        return out

    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def commutes_with(self, other: "PauliOperator") -> bool:
        if self.n != other.n:
            raise ValueError("operators act on different registers")
        return (parity(self.x & other.z) ^ parity(self.z & other.x)) == 0


@dataclass(frozen=True)
class PauliFrame:
    """Accumulated X/Z error record over a register of ``n`` qubits.

    ``x_bits`` marks qubits carrying an X component (X or Y), ``z_bits`` a Z
    component (Z or Y).
    """

    n: int
    x_bits: int = 0
    z_bits: int = 0

    @classmethod
    def identity(cls, n: int) -> "PauliFrame":
        return cls(n, 0, 0)

    @classmethod
    def from_support(cls, n: int, support: dict[int, str]) -> "PauliFrame":
        op = PauliOperator.from_support(n, support)
        return cls(n, op.x, op.z)

    @classmethod
    def from_operator(cls, op: PauliOperator) -> "PauliFrame":
        return cls(op.n, op.x, op.z)

    @property
    def support(self) -> dict[int, str]:
        return PauliOperator(self.n, self.x_bits, self.z_bits).support

    def is_identity(self) -> bool:
        return self.x_bits == 0 and self.z_bits == 0

    def weight(self) -> int:
        return (self.x_bits | self.z_bits).bit_count()

    def anticommutes_with(self, op: PauliOperator) -> bool:
        if self.n != op.n:
            raise ValueError("frame and operator act on different registers")
        return (parity(self.x_bits & op.z) ^ parity(self.z_bits & op.x)) == 1


def compose(a: PauliFrame, b: PauliFrame) -> PauliFrame:
    """Phase-free product of two frames on the same register."""
    if a.n != b.n:
        raise ValueError(f"register mismatch: {a.n} != {b.n}")
    return PauliFrame(a.n, a.x_bits ^ b.x_bits, a.z_bits ^ b.z_bits)
