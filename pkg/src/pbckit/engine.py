"""Adaptive-Pauli-measurement execution of gadgetized Clifford circuits.

Each measurement of the adaptive circuit is pulled to the circuit front
(backward through gates, resolved conditionals, and previously introduced
V-unitaries, oldest V first) and classified against the initial-state
record:

* anticommuting: outcome is a classical coin; the measurement is dropped
  and replaced by a V-unitary built from the first anticommuting witness;
* dependent: the operator lies in the group generated by the initial
  stabilizers and earlier quantum measurements, so its outcome is inferred
  over GF(2) with exact phase bookkeeping;
* quantum: the operator is new; only its magic-register restriction is
  handed to an outcome backend and recorded.

One shot produces one :class:`PbcProgram` with per-step classification,
dependency sets, layers, and weight statistics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import __version__ as _version
from .gadgets import AdaptiveCliffordCircuit, Conditional, Measure
from .gf2 import Gf2Basis
from .greedy import GreedyConfig, choose_measurement
from .pauli import (
    CliffordGate,
    PauliOperator,
    VUnitary,
    commutes,
    conjugate_by_gate,
    conjugate_by_v,
    format_pauli,
    multiply,
    weight,
)

__all__ = [
    "EngineError",
    "UnresolvedBitError",
    "PbcStep",
    "PbcProgram",
    "PbcFrame",
    "DummyBackend",
    "StatevectorBackend",
    "make_backend",
    "classify",
    "run_shot",
    "run_shots",
    "assign_layers",
    "program_to_json",
]

CASE_ANTICOMMUTING = "anticommuting"
CASE_DEPENDENT = "dependent"
CASE_QUANTUM = "quantum"


class EngineError(RuntimeError):
    pass


class UnresolvedBitError(EngineError):
    """A conditional gate mattered before its control bit was measured."""


# -- outcome backends --------------------------------------------------------


class DummyBackend:
    """Uniform-coin outcome source; ``fixed_path`` forces every bit to 0.

    Valid for weight/depth statistics, not for output distributions.
    """

    name = "dummy"

    def __init__(self, magic_count: int, rng: np.random.Generator, fixed_path: bool = False):
        self.magic_count = magic_count
        self.rng = rng
        self.fixed_path = fixed_path
        if fixed_path:
            self.name = "fixed-path"

    def coin(self) -> int:
        return 0 if self.fixed_path else int(self.rng.integers(2))

    def measure(self, p_magic: PauliOperator) -> int:
        return 0 if self.fixed_path else int(self.rng.integers(2))


class StatevectorBackend:
    """Projective Pauli measurements on t magic-state qubits.

    Keeps 2^t amplitudes starting from the tensor power of
    (|0> + e^{i pi/4}|1>)/sqrt(2).
    """

    name = "statevector"
    DEFAULT_CAP = 20

    def __init__(self, magic_count: int, rng: np.random.Generator, cap: int = DEFAULT_CAP):
        if magic_count > cap:
            raise EngineError(f"statevector backend capped at {cap} magic qubits")
        self.magic_count = magic_count
        self.rng = rng
        single = np.array([1.0, np.exp(1j * np.pi / 4)], dtype=complex) / np.sqrt(2)
        state = np.array([1.0], dtype=complex)
        for _ in range(magic_count):
            state = np.kron(single, state)  # qubit k = bit k of the index
        self.state = state
        self._measured: list[PauliOperator] = []

    def coin(self) -> int:
        return int(self.rng.integers(2))

    def _apply(self, p: PauliOperator) -> np.ndarray:
        u = (p.phase_exp + (p.x & p.z).bit_count()) & 3
        idx = np.arange(self.state.size, dtype=np.uint64)
        src = idx ^ np.uint64(p.x)
        signs = 1.0 - 2.0 * (np.bitwise_count(src & np.uint64(p.z)).astype(np.int64) & 1)
        return (1j**u) * signs * self.state[src]

    def measure(self, p_magic: PauliOperator) -> int:
        if not p_magic.is_hermitian:
            raise EngineError("backend asked to measure a non-Hermitian operator")
        if p_magic.is_identity_body:
            raise EngineError("backend asked to measure the identity")
        for prev in self._measured:
            if not commutes(prev, p_magic):
                raise EngineError("backend asked to measure an incompatible operator")
        applied = self._apply(p_magic)
        branch0 = (self.state + applied) / 2.0
        p0 = float(np.vdot(branch0, branch0).real)
        if p0 > 1.0 - 1e-12:
            outcome = 0
        elif p0 < 1e-12:
            outcome = 1
        else:
            outcome = 0 if self.rng.random() < p0 else 1
        branch = branch0 if outcome == 0 else (self.state - applied) / 2.0
        self.state = branch / np.linalg.norm(branch)
        self._measured.append(p_magic if outcome == 0 else p_magic.negated())
        return outcome


def make_backend(kind: str, magic_count: int, rng: np.random.Generator):
    if kind == "dummy":
        return DummyBackend(magic_count, rng)
    if kind == "fixed-path":
        return DummyBackend(magic_count, rng, fixed_path=True)
    if kind == "statevector":
        return StatevectorBackend(magic_count, rng)
    raise ValueError(f"unknown backend {kind!r}")


# -- program records ---------------------------------------------------------


@dataclass
class PbcStep:
    step_id: int
    source: tuple[str, int]  # ("gadget", i) or ("readout", qubit)
    bit: str
    pauli_full: PauliOperator
    pauli_magic: PauliOperator
    case: str
    outcome: int
    depends_on: frozenset[int]
    weight_magic: int
    measured_pauli_magic: PauliOperator | None = None  # after greedy substitution
    weight_measured: int | None = None
    candidate_evals: int = 0
    layer: int = 0
    # anticommuting case only: the V-unitary constituents
    witness: PauliOperator | None = None
    witness_sigma: int = 0
    witness_step: int | None = None


@dataclass
class PbcProgram:
    num_data: int
    magic_count: int
    steps: list[PbcStep]
    sample: str
    d_pbc: int
    layering_sensitive_to_dependent: bool
    manifest: dict = field(default_factory=dict)

    @property
    def quantum_steps(self) -> list[PbcStep]:
        return [s for s in self.steps if s.case == CASE_QUANTUM]

    @property
    def r(self) -> int:
        return len(self.quantum_steps)

    def mean_magic_weight(self, measured: bool = True) -> float:
        qs = self.quantum_steps
        if not qs:
            return 0.0
        if measured:
            return sum(s.weight_measured if s.weight_measured is not None else s.weight_magic for s in qs) / len(qs)
        return sum(s.weight_magic for s in qs) / len(qs)

    @property
    def candidate_evals(self) -> int:
        return sum(s.candidate_evals for s in self.steps)


# -- the frame ---------------------------------------------------------------


class PbcFrame:
    """Mutable record of one shot: measured operators, V stack, outcomes."""

    def __init__(self, ac: AdaptiveCliffordCircuit):
        self.num_data = ac.num_data
        self.magic_count = ac.magic_count
        self.n = ac.num_qubits
        self.data_mask = (1 << ac.num_data) - 1
        self.magic_mask = ((1 << ac.magic_count) - 1) << ac.num_data
        self.measured: list[PauliOperator] = []  # reduced, identity on data register
        self.measured_sigma: list[int] = []
        self.measured_step: list[int] = []
        self.magic_ops: list[PauliOperator] = []  # restrictions to the magic register
        self.basis = Gf2Basis()
        self.v_stack: list[tuple[VUnitary, int | None, int]] = []  # (V, witness step, coin step)
        self.outcomes: dict[str, int] = {}
        self.bit_step: dict[str, int] = {}

    def magic_restriction(self, p: PauliOperator) -> PauliOperator:
        t = max(self.magic_count, 1)
        return p.restricted(self.magic_mask, num_qubits=t, shift=self.num_data)

    def _symplectic_row(self, magic: PauliOperator) -> int:
        return magic.x | (magic.z << self.magic_count)

    def reduce_by_stabilizers(self, p: PauliOperator) -> PauliOperator:
        """Cancel the data-register Z content against the initial stabilizers."""
        z_data = p.z & self.data_mask
        if not z_data:
            return p
        return multiply(p, PauliOperator(self.n, 0, 0, z_data))


def classify(frame: PbcFrame, p: PauliOperator):
    """Sort a front-propagated operator into one of the three cases.

    Returns one of::

        (CASE_ANTICOMMUTING, witness op, witness sigma, witness step or None)
        (CASE_DEPENDENT, inferred outcome, subset step ids, reduced op)
        (CASE_QUANTUM, reduced op, magic restriction)
    """
    if not p.is_hermitian:
        raise EngineError(f"classify expects a Hermitian operator, got {format_pauli(p)}")
    x_data = p.x & frame.data_mask
    if x_data:
        q = (x_data & -x_data).bit_length() - 1
        witness = PauliOperator(frame.n, 0, 0, 1 << q)
        return (CASE_ANTICOMMUTING, witness, 0, None)
    for idx, m in enumerate(frame.measured):
        if not commutes(p, m):
            return (CASE_ANTICOMMUTING, m, frame.measured_sigma[idx], frame.measured_step[idx])
    reduced = frame.reduce_by_stabilizers(p)
    magic = frame.magic_restriction(reduced)
    subset = frame.basis.decompose(frame._symplectic_row(magic))
    if subset is None:
        return (CASE_QUANTUM, reduced, magic)
    prod = PauliOperator(magic.num_qubits, 0, 0, 0)
    sigma = 0
    for j in subset:
        prod = multiply(prod, frame.magic_ops[j])
        sigma ^= frame.measured_sigma[j]
    if (prod.x, prod.z) != (magic.x, magic.z):
        raise EngineError("GF(2) decomposition inconsistent with operator algebra")
    gamma = ((magic.phase_exp - prod.phase_exp) & 3) >> 1
    if (magic.phase_exp - prod.phase_exp) & 1:
        raise EngineError("dependent operator differs by a non-real phase")
    return (CASE_DEPENDENT, sigma ^ gamma, [frame.measured_step[j] for j in subset], reduced)


# -- back-propagation --------------------------------------------------------


def _pull_to_front(ac: AdaptiveCliffordCircuit, pos: int, qubit: int, fired: tuple, cache: dict):
    """Conjugate Z_qubit backward through the instruction prefix.

    ``fired`` holds, for each conditional before ``pos`` in order, True /
    False / None (None = control bit not yet resolved).  Returns the
    arriving operator and the indices (into ``fired``) of conditionals
    whose firing state influenced it.  Cacheable: the result depends only
    on (pos, fired).
    """
    key = (pos, qubit, fired)
    hit = cache.get(key)
    if hit is not None:
        return hit
    p = PauliOperator(ac.num_qubits, 0, 0, 1 << qubit)
    mattered: list[int] = []
    cond_idx = len(fired)
    for ins in reversed(ac.instructions[:pos]):
        if isinstance(ins, Measure):
            continue
        if isinstance(ins, Conditional):
            cond_idx -= 1
            test = conjugate_by_gate(p, ins.gate, "backward")
            if test == p:
                continue
            state = fired[cond_idx]
            if state is None:
                raise UnresolvedBitError(
                    f"conditional on {ins.bits} matters before its controls are measured"
                )
            mattered.append(cond_idx)
            if state:
                p = test
        else:
            p = conjugate_by_gate(p, ins, "backward")
    result = (p, tuple(mattered))
    cache[key] = result
    return result


def _apply_v_stack(frame: PbcFrame, p: PauliOperator):
    """Push an arriving operator through the V stack, oldest V first.

    Collects the step ids whose outcomes entered the operator (the two
    sigma phases of any V that rewrote it into witness*dropped*R form).
    """
    deps: set[int] = set()
    for v, witness_step, coin_step in frame.v_stack:
        com_first = commutes(p, v.first)
        com_second = commutes(p, v.second)
        if com_first and com_second:
            continue
        p = conjugate_by_v(p, v, "backward")
        if com_first != com_second:  # sigma-dependent rewrite
            if witness_step is not None:
                deps.add(witness_step)
            deps.add(coin_step)
    return p, deps


# -- shot execution ----------------------------------------------------------


def _conditional_indices(ac: AdaptiveCliffordCircuit) -> list[int]:
    return [i for i, ins in enumerate(ac.instructions) if isinstance(ins, Conditional)]


def run_shot(
    ac: AdaptiveCliffordCircuit,
    backend,
    greedy: GreedyConfig | None = None,
    rng: np.random.Generator | None = None,
    processing: list[int] | None = None,
    cache: dict | None = None,
    manifest: dict | None = None,
) -> PbcProgram:
    """Execute one shot of the adaptive-measurement procedure.

    ``processing`` optionally overrides the order in which measurement
    instructions are handled (indices into ``ac.instructions``); the
    default is circuit order, which the gadget structure always permits.
    """
    greedy = greedy or GreedyConfig()
    cache = {} if cache is None else cache
    rng = rng if rng is not None else np.random.default_rng(0)
    frame = PbcFrame(ac)
    cond_positions = _conditional_indices(ac)
    cond_of_pos = {pos: k for k, pos in enumerate(cond_positions)}

    measure_positions = [i for i, ins in enumerate(ac.instructions) if isinstance(ins, Measure)]
    if processing is None:
        processing = measure_positions
    else:
        if sorted(processing) != measure_positions:
            raise EngineError("processing order must cover each measurement exactly once")

    steps: list[PbcStep] = []
    for pos in processing:
        ins = ac.instructions[pos]
        step_id = len(steps)
        fired = []
        for cpos in cond_positions:
            if cpos >= pos:
                break
            cond = ac.instructions[cpos]
            try:
                fired.append(cond.fires(frame.outcomes))
            except KeyError:
                fired.append(None)
        fired = tuple(fired)

        arrived, mattered = _pull_to_front(ac, pos, ins.qubit, fired, cache)
        deps: set[int] = set()
        for k in mattered:
            for bit in ac.instructions[cond_positions[k]].bits:
                deps.add(frame.bit_step[bit])
        arrived, v_deps = _apply_v_stack(frame, arrived)
        deps |= v_deps

        source = ("gadget", ins.qubit - ac.num_data) if ins.qubit >= ac.num_data else ("readout", ins.qubit)
        verdict = classify(frame, arrived)
        case = verdict[0]
        magic_restr = frame.magic_restriction(arrived)
        w_magic = weight(magic_restr)
        measured_magic = None
        w_measured = None
        evals = 0
        witness = None
        w_sigma = 0
        w_step = None

        if case == CASE_ANTICOMMUTING:
            _, witness, w_sigma, w_step = verdict
            outcome = backend.coin()
            frame.v_stack.append(
                (VUnitary(witness, arrived, w_sigma, outcome), w_step, step_id)
            )
            if w_step is not None:
                deps.add(w_step)
        elif case == CASE_DEPENDENT:
            _, outcome, subset_steps, _reduced = verdict
            deps.update(subset_steps)
        else:
            _, reduced, magic = verdict
            chosen, evals, used_steps = choose_measurement(
                frame.magic_ops, frame.measured_sigma, magic, greedy, rng
            )
            deps.update(frame.measured_step[j] for j in used_steps)
            outcome = backend.measure(chosen)
            measured_magic = chosen
            w_measured = weight(chosen)
            if len(frame.measured) >= frame.magic_count:
                raise EngineError("more quantum measurements than magic qubits")
            frame.basis.add(frame._symplectic_row(magic))
            frame.measured.append(reduced)
            frame.measured_sigma.append(outcome)
            frame.measured_step.append(step_id)
            frame.magic_ops.append(magic)

        frame.outcomes[ins.bit] = outcome
        frame.bit_step[ins.bit] = step_id
        steps.append(
            PbcStep(
                step_id=step_id,
                source=source,
                bit=ins.bit,
                pauli_full=arrived,
                pauli_magic=magic_restr,
                case=case,
                outcome=outcome,
                depends_on=frozenset(deps),
                weight_magic=w_magic,
                measured_pauli_magic=measured_magic,
                weight_measured=w_measured,
                candidate_evals=evals,
                witness=witness,
                witness_sigma=w_sigma,
                witness_step=w_step,
            )
        )

    d_pbc, sensitive = assign_layers(steps)
    sample = "".join(
        str(frame.outcomes[ac.readout_bits[q]]) for q in sorted(ac.readout_bits)
    )
    return PbcProgram(
        num_data=ac.num_data,
        magic_count=ac.magic_count,
        steps=steps,
        sample=sample,
        d_pbc=d_pbc,
        layering_sensitive_to_dependent=sensitive,
        manifest=dict(manifest or {}),
    )


def assign_layers(steps: list[PbcStep]) -> tuple[int, bool]:
    """Assign layers in place; returns (d_PBC, dependent-step sensitivity).

    A step's layer is one more than the deepest quantum step its outcome
    or form depends on, transitively through classical steps.  Only
    quantum steps count toward depth.  The sensitivity flag reports
    whether depth would differ if dependencies mediated by dependent
    (inferred) steps were dropped.
    """

    def depth_with(propagate_dependent: bool) -> tuple[int, dict[int, int]]:
        reach: dict[int, frozenset[int]] = {}
        layers: dict[int, int] = {}
        depth = 0
        for s in steps:
            acc: set[int] = set()
            for d in s.depends_on:
                dep = steps[d]
                if dep.case == CASE_QUANTUM:
                    acc.add(d)
                elif dep.case == CASE_DEPENDENT and not propagate_dependent:
                    continue
                else:
                    acc |= reach[d]
            reach[s.step_id] = frozenset(acc)
            layer = 1 + max((layers[d] for d in acc), default=0)
            layers[s.step_id] = layer
            if s.case == CASE_QUANTUM:
                depth = max(depth, layer)
        return depth, layers

    d_pbc, layers = depth_with(True)
    d_strict, _ = depth_with(False)
    for s in steps:
        s.layer = layers[s.step_id]
    return d_pbc, d_pbc != d_strict


def run_shots(
    ac: AdaptiveCliffordCircuit,
    backend_kind: str,
    shots: int,
    seed: int,
    greedy: GreedyConfig | None = None,
    processing: list[int] | None = None,
    manifest: dict | None = None,
) -> list[PbcProgram]:
    """Independent shots with per-shot derived seeds (base_seed, index)."""
    cache: dict = {}
    programs = []
    for shot in range(shots):
        rng = np.random.default_rng([seed, shot])
        backend = make_backend(backend_kind, ac.magic_count, rng)
        programs.append(
            run_shot(ac, backend, greedy=greedy, rng=rng, processing=processing, cache=cache, manifest=manifest)
        )
    return programs


# -- serialization -----------------------------------------------------------

SCHEMA_VERSION = 1


def step_to_dict(s: PbcStep) -> dict:
    d = {
        "id": s.step_id,
        "source": list(s.source),
        "bit": s.bit,
        "pauli": format_pauli(s.pauli_full),
        "pauli_magic": format_pauli(s.pauli_magic),
        "case": s.case,
        "outcome": s.outcome,
        "depends_on": sorted(s.depends_on),
        "layer": s.layer,
        "weight_magic": s.weight_magic,
    }
    if s.measured_pauli_magic is not None:
        d["measured_pauli_magic"] = format_pauli(s.measured_pauli_magic)
        d["weight_measured"] = s.weight_measured
    if s.candidate_evals:
        d["candidate_evals"] = s.candidate_evals
    if s.witness is not None:
        d["witness"] = format_pauli(s.witness)
        d["witness_sigma"] = s.witness_sigma
        if s.witness_step is not None:
            d["witness_step"] = s.witness_step
    return d


def program_to_dict(p: PbcProgram) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "model": "pbc",
        "tool_version": _version,
        "manifest": p.manifest,
        "num_data": p.num_data,
        "magic_count": p.magic_count,
        "steps": [step_to_dict(s) for s in p.steps],
        "sample": p.sample,
        "stats": {
            "r": p.r,
            "d_pbc": p.d_pbc,
            "mean_magic_weight": p.mean_magic_weight(measured=True),
            "mean_magic_weight_original": p.mean_magic_weight(measured=False),
            "candidate_evals": p.candidate_evals,
            "layering_sensitive_to_dependent": p.layering_sensitive_to_dependent,
        },
    }


def program_to_json(p: PbcProgram) -> str:
    return json.dumps(program_to_dict(p), sort_keys=True, indent=1) + "\n"
