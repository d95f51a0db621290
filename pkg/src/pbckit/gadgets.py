"""T-gadgetization: Clifford+T circuits to adaptive Clifford circuits.

Every T becomes one fresh magic qubit, one CX into it, one Z measurement
producing an outcome bit, and an S on the data qubit fired by that bit.
T-dagger uses the adjoint pattern: the conditioned correction is S-dagger,
fired when the gadget outcome is 0.

Conditional gates carry a parity condition over outcome bits with an
optional inversion, which is also what the measurement-pattern pipeline
needs for outcome-dependent basis changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .circuits import Circuit, CircuitError
from .pauli import CliffordGate

__all__ = [
    "Measure",
    "Conditional",
    "AdaptiveCliffordCircuit",
    "gadgetize",
    "serialize_adaptive",
    "parse_adaptive",
]


@dataclass(frozen=True)
class Measure:
    """Z-basis measurement of one qubit, outcome stored under ``bit``."""

    qubit: int
    bit: str


@dataclass(frozen=True)
class Conditional:
    """Gate applied when XOR of the control bits (xor ``invert``) is 1.

    An empty bit tuple with ``invert=True`` is an unconditional gate kept in
    conditional form so outcome-independent basis fixes stay uniform.
    """

    gate: CliffordGate
    bits: tuple[str, ...]
    invert: bool = False

    def fires(self, outcomes: dict[str, int]) -> bool:
        parity = 0
        for b in self.bits:
            parity ^= outcomes[b]
        return bool(parity ^ self.invert)


@dataclass
class AdaptiveCliffordCircuit:
    """Clifford circuit with measurements and classically-controlled gates.

    Qubits [0, num_data) form the stabilizer (data) register; qubits
    [num_data, num_data + magic_count) form the magic register, one qubit
    per gadgetized T, in program order.
    """

    num_data: int
    magic_count: int
    instructions: list = field(default_factory=list)
    readout_bits: dict[int, str] = field(default_factory=dict)  # data qubit -> bit
    name: str = ""

    @property
    def num_qubits(self) -> int:
        return self.num_data + self.magic_count

    def gate(self, kind: str, *qubits: int):
        self.instructions.append(CliffordGate(kind, qubits))

    def measure(self, qubit: int, bit: str):
        self.instructions.append(Measure(qubit, bit))

    def conditional(self, kind: str, qubit: int, bits: tuple[str, ...], invert: bool = False):
        self.instructions.append(Conditional(CliffordGate(kind, (qubit,)), bits, invert))

    def measurements(self) -> list[tuple[int, Measure]]:
        return [(i, ins) for i, ins in enumerate(self.instructions) if isinstance(ins, Measure)]


_GATE_MAP = {"h": "H", "s": "S", "sdg": "S_dagger", "cx": "CX", "cz": "CZ"}


def gadgetize(circ: Circuit) -> AdaptiveCliffordCircuit:
    """Replace each T/T-dagger with its gadget on a fresh magic qubit.

    Clifford instructions pass through unchanged; circuits without T gates
    come out with an empty magic register.
    """
    t_count = sum(1 for ins in circ.instructions if ins.name in ("t", "tdg"))
    out = AdaptiveCliffordCircuit(circ.num_qubits, t_count, name=circ.name)
    gadget = 0
    for ins in circ.instructions:
        if ins.name in _GATE_MAP:
            out.gate(_GATE_MAP[ins.name], *ins.qubits)
        elif ins.name == "measure":
            q = ins.qubits[0]
            bit = f"r{q}"
            out.readout_bits[q] = bit
            out.measure(q, bit)
        elif ins.name in ("t", "tdg"):
            q = ins.qubits[0]
            magic = circ.num_qubits + gadget
            bit = f"m{gadget}"
            out.gate("CX", q, magic)
            out.measure(magic, bit)
            if ins.name == "t":
                out.conditional("S", q, (bit,))
            else:
                out.conditional("S_dagger", q, (bit,), invert=True)
            gadget += 1
        else:  # pragma: no cover
            raise CircuitError(f"unexpected instruction {ins.name!r}")
    return out


# -- text form --------------------------------------------------------------

_KIND_TO_TEXT = {"H": "h", "S": "s", "S_dagger": "sdg", "CX": "cx", "CZ": "cz", "X": "x", "Z": "z"}
_TEXT_TO_KIND = {v: k for k, v in _KIND_TO_TEXT.items()}


def serialize_adaptive(ac: AdaptiveCliffordCircuit) -> str:
    lines = [f"qubits {ac.num_data}", f"magic {ac.magic_count}"]
    for ins in ac.instructions:
        if isinstance(ins, CliffordGate):
            lines.append(f"{_KIND_TO_TEXT[ins.kind]} {' '.join(map(str, ins.qubits))}")
        elif isinstance(ins, Measure):
            lines.append(f"measure {ins.qubit} -> {ins.bit}")
        else:
            marker = "@!" if ins.invert else "@"
            bits = " ".join(ins.bits)
            lines.append(
                f"c-{_KIND_TO_TEXT[ins.gate.kind]} {ins.gate.qubits[0]} {marker} {bits}".rstrip()
            )
    return "\n".join(lines) + "\n"


def parse_adaptive(text: str) -> AdaptiveCliffordCircuit:
    num_data = magic = None
    ac = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if num_data is None:
            if parts[0] != "qubits":
                raise CircuitError(f"line {lineno}: expected 'qubits <n>'")
            num_data = int(parts[1])
            continue
        if magic is None:
            if parts[0] != "magic":
                raise CircuitError(f"line {lineno}: expected 'magic <t>'")
            magic = int(parts[1])
            ac = AdaptiveCliffordCircuit(num_data, magic)
            continue
        if parts[0] == "measure":
            if len(parts) != 4 or parts[2] != "->":
                raise CircuitError(f"line {lineno}: expected 'measure <q> -> <bit>'")
            q, bit = int(parts[1]), parts[3]
            ac.measure(q, bit)
            if q < num_data:
                ac.readout_bits[q] = bit
        elif parts[0].startswith("c-"):
            kind = _TEXT_TO_KIND.get(parts[0][2:])
            if kind is None:
                raise CircuitError(f"line {lineno}: unknown conditional gate {parts[0]!r}")
            qubit = int(parts[1])
            if parts[2] not in ("@", "@!"):
                raise CircuitError(f"line {lineno}: expected '@' or '@!' control marker")
            ac.conditional(kind, qubit, tuple(parts[3:]), invert=parts[2] == "@!")
        else:
            kind = _TEXT_TO_KIND.get(parts[0])
            if kind is None:
                raise CircuitError(f"line {lineno}: unknown mnemonic {parts[0]!r}")
            ac.gate(kind, *(int(p) for p in parts[1:]))
    if ac is None:
        raise CircuitError("missing 'qubits'/'magic' header")
    return ac
