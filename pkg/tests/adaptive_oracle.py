"""Dense branch-enumerating simulator for adaptive Clifford circuits.

Used to check gadgetized circuits and the measurement-pattern pipeline
against exact quantum mechanics: every measurement-outcome branch is
followed analytically with its amplitude, magic qubits start in the
T state, and the readout distribution is accumulated over branches.
"""

from __future__ import annotations

import numpy as np

from pbckit.gadgets import AdaptiveCliffordCircuit, Conditional, Measure
from pbckit.pauli import CliffordGate

from oracles import T_STATE, dense_gate


def _initial_state(ac: AdaptiveCliffordCircuit) -> np.ndarray:
    state = np.array([1.0], dtype=complex)
    zero = np.array([1.0, 0.0], dtype=complex)
    for q in range(ac.num_qubits):
        part = zero if q < ac.num_data else T_STATE
        state = np.kron(part, state)
    return state


def adaptive_output_distribution(ac: AdaptiveCliffordCircuit) -> dict[str, float]:
    """Exact distribution over the readout bits (data qubits, index order)."""
    n = ac.num_qubits
    readout_qubits = sorted(ac.readout_bits)
    dist: dict[str, float] = {}

    def project(state, qubit, outcome):
        idx = np.arange(state.size)
        mask = ((idx >> qubit) & 1) == outcome
        branch = np.where(mask, state, 0.0)
        p = float(np.vdot(branch, branch).real)
        return branch, p

    def walk(state, prob, i, outcomes):
        if prob < 1e-14:
            return
        while i < len(ac.instructions):
            ins = ac.instructions[i]
            if isinstance(ins, CliffordGate):
                state = dense_gate(ins, n) @ state
            elif isinstance(ins, Conditional):
                if ins.fires(outcomes):
                    state = dense_gate(ins.gate, n) @ state
            else:
                break
            i += 1
        if i == len(ac.instructions):
            key = "".join(str(outcomes[ac.readout_bits[q]]) for q in readout_qubits)
            dist[key] = dist.get(key, 0.0) + prob
            return
        ins = ac.instructions[i]
        assert isinstance(ins, Measure)
        for outcome in (0, 1):
            branch, p = project(state, ins.qubit, outcome)
            if p < 1e-14:
                continue
            walk(branch / np.sqrt(p), prob * p, i + 1, {**outcomes, ins.bit: outcome})

    walk(_initial_state(ac), 1.0, 0, {})
    return dist
