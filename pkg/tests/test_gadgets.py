import itertools

import pytest

from pbckit.circuits import generate_random_family2, metrics, parse
from pbckit.gadgets import (
    AdaptiveCliffordCircuit,
    Conditional,
    Measure,
    gadgetize,
    parse_adaptive,
    serialize_adaptive,
)
from pbckit.pauli import CliffordGate

from adaptive_oracle import adaptive_output_distribution
from oracles import circuit_output_distribution, tvd


def test_single_t_gadget_structure():
    ac = gadgetize(parse("qubits 1\nt 0\nmeasure 0"))
    assert ac.num_data == 1 and ac.magic_count == 1
    kinds = [type(i).__name__ for i in ac.instructions]
    assert kinds == ["CliffordGate", "Measure", "Conditional", "Measure"]
    cx, mz, cond, _ = ac.instructions
    assert cx == CliffordGate("CX", (0, 1))
    assert mz == Measure(1, "m0")
    assert cond.gate == CliffordGate("S", (0,)) and cond.bits == ("m0",) and not cond.invert


def test_tdg_gadget_uses_inverted_sdg():
    ac = gadgetize(parse("qubits 1\ntdg 0\nmeasure 0"))
    cond = ac.instructions[2]
    assert cond.gate == CliffordGate("S_dagger", (0,)) and cond.invert


def test_clifford_only_passthrough():
    circ = parse("qubits 2\nh 0\ncx 0 1\nmeasure 0\nmeasure 1")
    ac = gadgetize(circ)
    assert ac.magic_count == 0
    assert len(ac.instructions) == 4


def test_t_count_three():
    circ = parse("qubits 2\nt 0\nh 0\nt 1\nt 0\nmeasure 0\nmeasure 1")
    ac = gadgetize(circ)
    assert ac.magic_count == 3
    magic_measures = [i for i in ac.instructions if isinstance(i, Measure) and i.qubit >= 2]
    assert len(magic_measures) == 3
    conds = [i for i in ac.instructions if isinstance(i, Conditional)]
    assert len(conds) == 3 and all(c.gate.kind == "S" for c in conds)


def _equiv_check(text):
    circ = parse(text)
    want = circuit_output_distribution(circ)
    got = adaptive_output_distribution(gadgetize(circ))
    assert tvd(want, got) < 1e-10, f"gadgetized circuit deviates for {text!r}"


@pytest.mark.parametrize(
    "text",
    [
        "qubits 1\nt 0\nmeasure 0",
        "qubits 1\nh 0\nt 0\nh 0\nmeasure 0",
        "qubits 1\nh 0\ntdg 0\nh 0\nmeasure 0",
        "qubits 1\nh 0\nt 0\nt 0\nh 0\nmeasure 0",
        "qubits 2\nh 0\ncx 0 1\nt 1\nh 1\nmeasure 0\nmeasure 1",
        "qubits 2\nh 0\nt 0\ncx 0 1\ntdg 1\nh 0\nmeasure 0\nmeasure 1",
        "qubits 2\nh 0\nh 1\ncz 0 1\nt 0\ntdg 1\nh 1\nmeasure 0\nmeasure 1",
        "qubits 3\nh 0\ncx 0 1\ncx 1 2\nt 2\nh 2\nmeasure 0\nmeasure 1\nmeasure 2",
    ],
)
def test_gadgetized_distribution_matches_statevector(text):
    _equiv_check(text)


@pytest.mark.parametrize("seed", range(4))
def test_gadgetized_random_circuits(seed):
    circ = generate_random_family2(3, 3, seed=seed, gate_budget=12)
    want = circuit_output_distribution(circ)
    got = adaptive_output_distribution(gadgetize(circ))
    assert tvd(want, got) < 1e-10


def test_adaptive_roundtrip():
    ac = gadgetize(parse("qubits 2\nt 0\nh 1\ncx 0 1\ntdg 1\nmeasure 0\nmeasure 1"))
    text = serialize_adaptive(ac)
    back = parse_adaptive(text)
    assert serialize_adaptive(back) == text
    assert back.num_data == ac.num_data and back.magic_count == ac.magic_count
    assert back.instructions == ac.instructions
