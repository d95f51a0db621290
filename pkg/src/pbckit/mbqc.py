"""Measurement-pattern pre-compilation and its closed-form oracles.

A measurement pattern is a t-vertex graph with a layer partition and
per-qubit outcome-dependency sets: qubit k is measured along +pi/4 when
the parity f_k of the referenced earlier outcomes is 0, along -pi/4 when
it is 1.  As a circuit this is graph-state preparation followed, per
qubit, by an effective T-dagger or T, then H, then a Z measurement; the
gadgetized form ends up with corrections S^(m_k) and S-dagger fired on
f_k = 0.

Three processing orders interleave gadget measurements (GM) and readout
measurements (RO) during back-propagation:

* o1: GM_1, RO_1, GM_2, RO_2, ...        (positional weight bounds)
* o2: all GMs, then ROs layer by layer   (depth equals the pattern depth)
* o3: per layer, its GMs then its ROs    (weight-depth trade-off)

The closed forms give, for every gadget coin string, the exact operators
the engine must discover, phase included; bound reports check the
positional, average, block, and depth guarantees and fail hard on any
violation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuits import Circuit
from .engine import (
    CASE_ANTICOMMUTING,
    CASE_QUANTUM,
    EngineError,
    PbcProgram,
    make_backend,
    run_shot,
)
from .gadgets import AdaptiveCliffordCircuit, Measure
from .greedy import GreedyConfig
from .pauli import CliffordGate, PauliOperator, conjugate_by_gate, format_pauli, multiply

__all__ = [
    "MeasurementPattern",
    "PatternError",
    "BoundViolation",
    "BoundReport",
    "PROCESSING_ORDERS",
    "parse_pattern",
    "serialize_pattern",
    "generate_random_pattern",
    "pattern_to_circuit",
    "pattern_to_adaptive",
    "processing_sequence",
    "single_layer_oracle",
    "layered_oracle_b1",
    "first_layer_oracle_b2",
    "oracle_to_initial_frame",
    "run_pattern_shot",
    "run_pattern_pbc",
]

PROCESSING_ORDERS = ("o1", "o2", "o3")


class PatternError(ValueError):
    pass


class BoundViolation(AssertionError):
    """A proved weight or depth guarantee failed on a concrete run."""


@dataclass
class MeasurementPattern:
    """Graph adjacency, layer partition, and outcome-dependency sets.

    Qubits are 0-based and numbered consecutively by layer, so no qubit
    depends on a higher-numbered outcome.  ``deps[k]`` is the set of
    qubits (in strictly earlier layers) whose readout outcomes decide the
    measurement sign of qubit k.
    """

    t: int
    edges: frozenset[tuple[int, int]]
    layer_sizes: tuple[int, ...]
    deps: dict[int, frozenset[int]]

    def __post_init__(self):
        if sum(self.layer_sizes) != self.t or any(k < 1 for k in self.layer_sizes):
            raise PatternError("layer sizes must be positive and sum to t")
        for a, b in self.edges:
            if not (0 <= a < b < self.t):
                raise PatternError(f"bad edge ({a}, {b})")
        starts = self.layer_starts()
        for k, dep in self.deps.items():
            layer = self.layer_of(k)
            for j in dep:
                if not 0 <= j < self.t or self.layer_of(j) >= layer:
                    raise PatternError(f"dep of qubit {k} on {j} breaks layer order")

    @property
    def depth(self) -> int:
        return len(self.layer_sizes)

    def layer_starts(self) -> list[int]:
        starts, acc = [], 0
        for k in self.layer_sizes:
            starts.append(acc)
            acc += k
        return starts

    def layer_members(self, i: int) -> range:
        start = self.layer_starts()[i]
        return range(start, start + self.layer_sizes[i])

    def layer_of(self, qubit: int) -> int:
        acc = 0
        for i, k in enumerate(self.layer_sizes):
            acc += k
            if qubit < acc:
                return i
        raise PatternError(f"qubit {qubit} out of range")

    def neighbors(self, qubit: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == qubit:
                out.append(b)
            elif b == qubit:
                out.append(a)
        return sorted(out)

    def dep_set(self, qubit: int) -> frozenset[int]:
        return self.deps.get(qubit, frozenset())


# -- text form ---------------------------------------------------------------


def parse_pattern(text: str) -> MeasurementPattern:
    """Pattern file: ``t <int>``, ``layers k1 k2 ..``, ``edge a b`` and
    ``dep k j1 j2 ..`` lines, qubits 1-based."""
    t = None
    layers: tuple[int, ...] | None = None
    edges: set[tuple[int, int]] = set()
    deps: dict[int, frozenset[int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "t":
                t = int(parts[1])
            elif parts[0] == "layers":
                layers = tuple(int(p) for p in parts[1:])
            elif parts[0] == "edge":
                a, b = sorted((int(parts[1]) - 1, int(parts[2]) - 1))
                edges.add((a, b))
            elif parts[0] == "dep":
                deps[int(parts[1]) - 1] = frozenset(int(p) - 1 for p in parts[2:])
            else:
                raise PatternError(f"line {lineno}: unknown keyword {parts[0]!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, PatternError):
                raise
            raise PatternError(f"line {lineno}: malformed {line!r}") from None
    if t is None:
        raise PatternError("missing 't <int>' line")
    if layers is None:
        layers = (t,)
    return MeasurementPattern(t=t, edges=frozenset(edges), layer_sizes=layers, deps=deps)


def serialize_pattern(p: MeasurementPattern) -> str:
    lines = [f"t {p.t}", "layers " + " ".join(str(k) for k in p.layer_sizes)]
    for a, b in sorted(p.edges):
        lines.append(f"edge {a + 1} {b + 1}")
    for k in sorted(p.deps):
        if p.deps[k]:
            lines.append(f"dep {k + 1} " + " ".join(str(j + 1) for j in sorted(p.deps[k])))
    return "\n".join(lines) + "\n"


def generate_random_pattern(
    t: int,
    d_1w: int,
    edge_prob: float,
    seed: int,
    dep_prob: float = 0.3,
) -> MeasurementPattern:
    """Random layered pattern with all layer sizes >= 1.

    Every qubit beyond the first layer depends on at least one qubit of
    the immediately preceding layer, so the declared layering is tight
    and the pattern depth is realized by the dependency structure.
    """
    if not 1 <= d_1w <= t:
        raise PatternError("need 1 <= d_1w <= t")
    rng = np.random.default_rng(seed)
    if d_1w == 1:
        sizes = (t,)
    else:
        cuts = np.sort(rng.choice(t - 1, size=d_1w - 1, replace=False)) + 1
        bounds = [0, *cuts.tolist(), t]
        sizes = tuple(bounds[i + 1] - bounds[i] for i in range(d_1w))
    edges = frozenset(
        (a, b) for a in range(t) for b in range(a + 1, t) if rng.random() < edge_prob
    )
    pattern = MeasurementPattern(t=t, edges=edges, layer_sizes=sizes, deps={})
    deps: dict[int, frozenset[int]] = {}
    starts = pattern.layer_starts()
    for i in range(1, d_1w):
        prev = list(range(starts[i - 1], starts[i - 1] + sizes[i - 1]))
        earlier = list(range(starts[i]))
        for k in pattern.layer_members(i):
            chosen = {int(rng.choice(prev))}
            chosen.update(j for j in earlier if rng.random() < dep_prob)
            deps[k] = frozenset(chosen)
    return MeasurementPattern(t=t, edges=edges, layer_sizes=sizes, deps=deps)


# -- circuit construction ------------------------------------------------------


def pattern_to_circuit(p: MeasurementPattern) -> Circuit:
    """Static Clifford+T skeleton of the pattern (all signs taken as +pi/4).

    Graph-state preparation, then per qubit in layer order the effective
    basis gate (tdg for the f=0 branch), H, and a Z readout.  Patterns
    with outcome dependencies need :func:`pattern_to_adaptive`, since a
    plain circuit cannot host the run-time sign choice.
    """
    circ = Circuit(p.t, name=f"pattern t={p.t} layers={','.join(map(str, p.layer_sizes))}")
    for q in range(p.t):
        circ.append("h", q)
    for a, b in sorted(p.edges):
        circ.append("cz", a, b)
    for i in range(p.depth):
        for k in p.layer_members(i):
            circ.append("tdg", k)
            circ.append("h", k)
            circ.append("measure", k)
    return circ


def pattern_to_adaptive(p: MeasurementPattern) -> AdaptiveCliffordCircuit:
    """Gadgetized adaptive form with outcome-dependent basis corrections.

    Qubit k's block is CX into magic qubit t+k, the gadget measurement
    m_k, an S fired by m_k, an S-dagger fired when the dependency parity
    f_k is 0, then H and the readout s_k.  Together the two conditionals
    realize (S-dagger)^(m XOR 1) on the f=0 branch and S^m on the f=1
    branch, i.e. effective T-dagger and T gadgets respectively.
    """
    ac = AdaptiveCliffordCircuit(p.t, p.t, name=f"pattern t={p.t}")
    for q in range(p.t):
        ac.gate("H", q)
    for a, b in sorted(p.edges):
        ac.gate("CZ", a, b)
    for i in range(p.depth):
        for k in p.layer_members(i):
            ac.gate("CX", k, p.t + k)
            ac.measure(p.t + k, f"m{k}")
            ac.conditional("S", k, (f"m{k}",))
            ac.conditional("S_dagger", k, tuple(f"s{j}" for j in sorted(p.dep_set(k))), invert=True)
            ac.gate("H", k)
            ac.measure(k, f"s{k}")
            ac.readout_bits[k] = f"s{k}"
    return ac


def processing_sequence(p: MeasurementPattern, ac: AdaptiveCliffordCircuit, order: str) -> list[int]:
    """Instruction indices of the measurements in the requested order."""
    if order not in PROCESSING_ORDERS:
        raise ValueError(f"unknown processing order {order!r}; expected one of {PROCESSING_ORDERS}")
    gm = {}
    ro = {}
    for pos, ins in enumerate(ac.instructions):
        if isinstance(ins, Measure):
            if ins.qubit >= p.t:
                gm[ins.qubit - p.t] = pos
            else:
                ro[ins.qubit] = pos
    if order == "o1":
        seq = []
        for k in range(p.t):
            seq.extend((gm[k], ro[k]))
        return seq
    if order == "o2":
        seq = [gm[k] for k in range(p.t)]
        for i in range(p.depth):
            seq.extend(ro[k] for k in p.layer_members(i))
        return seq
    seq = []
    for i in range(p.depth):
        seq.extend(gm[k] for k in p.layer_members(i))
        seq.extend(ro[k] for k in p.layer_members(i))
    return seq


# -- closed-form oracles -------------------------------------------------------
#
# All oracle operators live on 2t qubits (data register 0..t-1, magic
# register t..2t-1) in the graph-state frame; conjugate them backward
# through the preparation gates to land in the engine's all-zeros frame.


def _graph_generator(p: MeasurementPattern, i: int) -> PauliOperator:
    factors = {i: "X"}
    for j in p.neighbors(i):
        factors[j] = "Z"
    return _embed(p, factors)


def _embed(p: MeasurementPattern, factors: dict[int, str], sign: int = 0) -> PauliOperator:
    from .pauli import from_label

    return from_label(2 * p.t, factors, sign=sign)


def _r_factor(p: MeasurementPattern, i: int, m: list[int], members: set[int]) -> PauliOperator:
    """(-1)^(sum of m over N(i) in members) * prod G_b * prod Z_{t+b}."""
    sign = sum(m[a] for a in p.neighbors(i) if a in members) % 2
    acc = _embed(p, {}, sign=sign)
    for b in p.neighbors(i):
        if b in members:
            acc = multiply(acc, _graph_generator(p, b))
            acc = multiply(acc, _embed(p, {p.t + b: "Z"}))
    return acc


def single_layer_oracle(p: MeasurementPattern, m: list[int]) -> list[PauliOperator]:
    """Readout operators of a single-layer pattern for gadget coins ``m``.

    For m_i = 0 the operator is R_i Y_{t+i}; otherwise G_i R_i X_{t+i},
    with R_i collecting the neighborhood generators, magic-register Zs,
    and the coin-dependent sign.
    """
    if p.depth != 1:
        raise PatternError("single-layer oracle needs a single-layer pattern")
    return layered_oracle_b1(p, m, [0] * p.t)


def layered_oracle_b1(p: MeasurementPattern, m: list[int], f: list[int]) -> list[PauliOperator]:
    """Readout operators when every gadget is processed first.

    The selector is m_i XOR f_i; f values are the dependency parities
    realized by the run being checked.
    """
    if len(m) != p.t or len(f) != p.t:
        raise PatternError("need one m bit and one f bit per qubit")
    everyone = set(range(p.t))
    out = []
    for i in range(p.t):
        r_i = _r_factor(p, i, m, everyone)
        if (m[i] ^ f[i]) == 0:
            op = multiply(r_i, _embed(p, {p.t + i: "Y"}))
        else:
            op = multiply(multiply(_graph_generator(p, i), r_i), _embed(p, {p.t + i: "X"}))
        out.append(op)
    return out


def first_layer_oracle_b2(p: MeasurementPattern, m: list[int], a_set: set[int]) -> list[PauliOperator]:
    """First-layer readout operators under per-layer processing.

    ``a_set`` holds the gadget indices identified as anticommuting (the
    ones that produced V unitaries); products run over the neighborhood
    intersected with it, and the m_i = 0 branch keeps a bare Z on each
    neighbor outside it.
    """
    out = []
    for i in p.layer_members(0):
        r_i = _r_factor(p, i, m, set(a_set))
        if m[i] == 0:
            tail = {p.t + i: "Y"}
            for c in p.neighbors(i):
                if c not in a_set:
                    tail[c] = "Z"
            op = multiply(r_i, _embed(p, tail))
        else:
            tail = {i: "X", p.t + i: "X"}
            for c in p.neighbors(i):
                if c in a_set:
                    tail[c] = "Z"
            op = multiply(r_i, _embed(p, tail))
        out.append(op)
    return out


def oracle_to_initial_frame(p: MeasurementPattern, op: PauliOperator) -> PauliOperator:
    """Pull a graph-frame operator backward through the preparation gates."""
    for a, b in sorted(p.edges, reverse=True):
        op = conjugate_by_gate(op, CliffordGate("CZ", (a, b)), "backward")
    for q in range(p.t):
        op = conjugate_by_gate(op, CliffordGate("H", (q,)), "backward")
    return op


# -- bound-checked execution ---------------------------------------------------


@dataclass
class BoundReport:
    order: str
    t: int
    d_1w: int
    layer_sizes: tuple[int, ...]
    d_pbc: int
    entries: list[dict] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)
    mean_quantum_weight: float = 0.0
    corollary_bound: float = 0.0

    def ok(self) -> bool:
        return not self.violations


def run_pattern_shot(
    p: MeasurementPattern,
    order: str,
    backend,
    rng,
    greedy: GreedyConfig | None = None,
    cache: dict | None = None,
    ac: AdaptiveCliffordCircuit | None = None,
) -> tuple[PbcProgram, BoundReport]:
    ac = ac if ac is not None else pattern_to_adaptive(p)
    seq = processing_sequence(p, ac, order)
    program = run_shot(ac, backend, greedy=greedy, rng=rng, processing=seq, cache=cache)
    report = check_bounds(p, order, program)
    return program, report


def check_bounds(p: MeasurementPattern, order: str, program: PbcProgram) -> BoundReport:
    """Evaluate the weight/depth guarantees of the processing order.

    Raises :class:`BoundViolation` with the offending step when a
    guarantee fails; the report carries one entry per processed operator.
    """
    t = p.t
    prefix = [0] * p.depth
    acc = 0
    for i, k in enumerate(p.layer_sizes):
        acc += k
        prefix[i] = acc
    report = BoundReport(
        order=order,
        t=t,
        d_1w=p.depth,
        layer_sizes=p.layer_sizes,
        d_pbc=program.d_pbc,
        corollary_bound=3 * t / 4 + 0.5,
    )
    for position, step in enumerate(program.steps, start=1):
        if order == "o1":
            bound = (position + 1) // 2
        elif order == "o2":
            bound = t
        else:
            # gadget and readout sources both carry the pattern qubit index
            bound = prefix[p.layer_of(step.source[1])]
        entry = {
            "position": position,
            "source": step.source,
            "case": step.case,
            "weight_magic": step.weight_magic,
            "bound": bound,
            "pauli_magic": format_pauli(step.pauli_magic),
        }
        report.entries.append(entry)
        if step.weight_magic > bound:
            report.violations.append(
                f"step {position} ({step.source}) weight {step.weight_magic} exceeds bound {bound}"
            )
    quantum = program.quantum_steps
    if quantum:
        report.mean_quantum_weight = sum(s.weight_magic for s in quantum) / len(quantum)
    if order == "o1" and report.mean_quantum_weight > report.corollary_bound + 1e-12:
        report.violations.append(
            f"average quantum weight {report.mean_quantum_weight} exceeds {report.corollary_bound}"
        )
    if order == "o2" and program.d_pbc != p.depth:
        report.violations.append(f"depth {program.d_pbc} != pattern depth {p.depth}")
    if order == "o3" and program.d_pbc > min(2 * p.depth - 1, t):
        report.violations.append(
            f"depth {program.d_pbc} exceeds min(2*{p.depth}-1, {t})"
        )
    if program.r > t:
        report.violations.append(f"{program.r} quantum measurements on {t} magic qubits")
    if not report.ok():
        raise BoundViolation("; ".join(report.violations))
    return report


def run_pattern_pbc(
    p: MeasurementPattern,
    order: str,
    backend_kind: str,
    shots: int,
    seed: int,
    greedy: GreedyConfig | None = None,
) -> list[tuple[PbcProgram, BoundReport]]:
    """Bound-checked shots of the pattern under a processing order."""
    ac = pattern_to_adaptive(p)
    cache: dict = {}
    results = []
    for shot in range(shots):
        rng = np.random.default_rng([seed, shot])
        backend = make_backend(backend_kind, ac.magic_count, rng)
        results.append(
            run_pattern_shot(p, order, backend, rng, greedy=greedy, cache=cache, ac=ac)
        )
    return results


def gadget_coins(program: PbcProgram, t: int) -> list[int]:
    """The m-bit string of a run, indexed by pattern qubit."""
    m = [0] * t
    for step in program.steps:
        if step.source[0] == "gadget":
            m[step.source[1]] = step.outcome
    return m


def dependency_parities(p: MeasurementPattern, program: PbcProgram) -> list[int]:
    """The realized f values, from the recorded readout outcomes."""
    s = {step.source[1]: step.outcome for step in program.steps if step.source[0] == "readout"}
    f = [0] * p.t
    for k in range(p.t):
        f[k] = sum(s[j] for j in p.dep_set(k)) % 2
    return f


def anticommuting_first_layer(p: MeasurementPattern, program: PbcProgram) -> set[int]:
    """Gadget indices of the first layer that produced V unitaries."""
    members = set(p.layer_members(0))
    out = set()
    for step in program.steps:
        if step.source[0] == "gadget" and step.source[1] in members:
            if step.case == CASE_ANTICOMMUTING:
                out.add(step.source[1])
    return out
