"""Clifford+T circuit IR: parsing, metrics, and random-circuit generation.

The text form is a minimal line dialect, one instruction per line::

    qubits 3
    h 0
    cx 0 1        # control target
    t 1
    measure 1

Mnemonics: h, s, sdg, t, tdg, cx, cz, measure.  ``#`` starts a comment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Instruction",
    "Circuit",
    "CircuitMetrics",
    "CircuitError",
    "parse",
    "serialize",
    "metrics",
    "generate_random_family2",
]

_ONE_QUBIT = ("h", "s", "sdg", "t", "tdg", "measure")
_TWO_QUBIT = ("cx", "cz")


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Instruction:
    name: str
    qubits: tuple[int, ...]

    def __str__(self):
        return f"{self.name} {' '.join(str(q) for q in self.qubits)}"


@dataclass
class Circuit:
    num_qubits: int
    instructions: list[Instruction] = field(default_factory=list)
    name: str = ""

    def append(self, name: str, *qubits: int):
        self.instructions.append(_checked(Instruction(name, qubits), self.num_qubits))

    def t_positions(self) -> list[int]:
        return [i for i, ins in enumerate(self.instructions) if ins.name in ("t", "tdg")]

    def measured_qubits(self) -> list[int]:
        return sorted(ins.qubits[0] for ins in self.instructions if ins.name == "measure")


@dataclass(frozen=True)
class CircuitMetrics:
    n: int
    t: int
    c1: int
    c2: int
    w: int
    d_L: int


def _checked(ins: Instruction, n: int) -> Instruction:
    if ins.name in _ONE_QUBIT:
        if len(ins.qubits) != 1:
            raise CircuitError(f"{ins.name} takes one qubit")
    elif ins.name in _TWO_QUBIT:
        if len(ins.qubits) != 2 or ins.qubits[0] == ins.qubits[1]:
            raise CircuitError(f"{ins.name} takes two distinct qubits")
    else:
        raise CircuitError(f"unknown mnemonic {ins.name!r}")
    for q in ins.qubits:
        if not 0 <= q < n:
            raise CircuitError(f"qubit {q} out of range for {n} qubits")
    return ins


def parse(text: str) -> Circuit:
    """Parse the line format; raises CircuitError with a line number."""
    circ: Circuit | None = None
    measured: set[int] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if circ is None:
            if parts[0] != "qubits" or len(parts) != 2 or not parts[1].isdigit():
                raise CircuitError(f"line {lineno}: expected 'qubits <n>' header")
            circ = Circuit(int(parts[1]))
            if circ.num_qubits < 1:
                raise CircuitError(f"line {lineno}: need at least one qubit")
            continue
        name = parts[0]
        try:
            qubits = tuple(int(p) for p in parts[1:])
        except ValueError:
            raise CircuitError(f"line {lineno}: bad qubit operand in {line!r}") from None
        try:
            ins = _checked(Instruction(name, qubits), circ.num_qubits)
        except CircuitError as exc:
            raise CircuitError(f"line {lineno}: {exc}") from None
        for q in qubits:
            if q in measured:
                raise CircuitError(f"line {lineno}: qubit {q} used after its measurement")
        if name == "measure":
            measured.add(qubits[0])
        circ.instructions.append(ins)
    if circ is None:
        raise CircuitError("empty input: missing 'qubits <n>' header")
    return circ


def serialize(circ: Circuit) -> str:
    lines = [f"qubits {circ.num_qubits}"]
    if circ.name:
        lines.insert(0, f"# {circ.name}")
    lines.extend(str(ins) for ins in circ.instructions)
    return "\n".join(lines) + "\n"


def metrics(circ: Circuit) -> CircuitMetrics:
    """Gate counts plus logical depth via ASAP layering.

    d_L counts unitary layers only; the terminal measurements form one
    implicit extra layer that is excluded.
    """
    t = c1 = c2 = w = 0
    ready = [0] * circ.num_qubits  # earliest free layer per qubit
    depth = 0
    for ins in circ.instructions:
        if ins.name == "measure":
            w += 1
            continue
        if ins.name in ("t", "tdg"):
            t += 1
        elif ins.name in ("h", "s", "sdg"):
            c1 += 1
        else:
            c2 += 1
        layer = 1 + max(ready[q] for q in ins.qubits)
        for q in ins.qubits:
            ready[q] = layer
        depth = max(depth, layer)
    return CircuitMetrics(n=circ.num_qubits, t=t, c1=c1, c2=c2, w=w, d_L=depth)


def generate_random_family2(n: int, target_t: int, seed: int, gate_budget: int | None = None) -> Circuit:
    """Random Clifford+T circuit with an exact T count.

    Gates are drawn i.i.d. from {H, S, CX, T} with probabilities
    {(1-p)/3, (1-p)/3, (1-p)/3, p} and p = target_t / budget (budget
    defaults to 10*n).  Drawing continues until exactly ``target_t`` T
    gates have come out; T is then removed from the pool for the remaining
    tail of the budget.  CX operands are uniform over ordered distinct
    pairs, and every qubit is measured at the end.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if target_t < 0:
        raise ValueError("target_t must be non-negative")
    budget = 10 * n if gate_budget is None else gate_budget
    if budget < target_t:
        raise ValueError("gate budget smaller than target T count")
    p = target_t / budget if budget else 0.0
    rng = np.random.default_rng(seed)
    circ = Circuit(n, name=f"family2 n={n} t={target_t} seed={seed} budget={budget}")

    def draw_clifford():
        kind = rng.integers(3)
        if kind == 0:
            circ.append("h", int(rng.integers(n)))
        elif kind == 1:
            circ.append("s", int(rng.integers(n)))
        else:
            a = int(rng.integers(n))
            b = int(rng.integers(n - 1))
            if b >= a:
                b += 1
            circ.append("cx", a, b)

    emitted_t = 0
    draws = 0
    while emitted_t < target_t:
        draws += 1
        if rng.random() < p:
            circ.append("t", int(rng.integers(n)))
            emitted_t += 1
        else:
            draw_clifford()
    for _ in range(max(0, budget - draws)):
        draw_clifford()
    for q in range(n):
        circ.append("measure", q)
    return circ
