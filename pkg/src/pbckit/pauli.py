"""Exact n-qubit Pauli algebra in symplectic (bit-vector) form.

A :class:`PauliOperator` is ``i**phase_exp * prod_q sigma_q`` where the
single-qubit factor on qubit ``q`` is read off two bit vectors::

    x=0,z=0 -> I      x=1,z=0 -> X      x=0,z=1 -> Z      x=1,z=1 -> Y

The Y factor carries its ``i`` implicitly (Y = i*X*Z), so Hermitian
operators are exactly those with ``phase_exp`` in {0, 2}.  Bit vectors are
packed into Python integers (bit q = qubit q); weight and commutation are
single popcounts, which keeps the greedy search inner loop cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "PauliOperator",
    "CliffordGate",
    "VUnitary",
    "identity",
    "from_label",
    "multiply",
    "commutes",
    "weight",
    "conjugate_by_gate",
    "conjugate_by_v",
    "parse_pauli",
    "format_pauli",
]

_LETTER_TO_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_TO_LETTER = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}

# Single-qubit Clifford gate kinds. T is deliberately absent: it is not a
# Clifford gate and lives only in the circuit IR.
GATE_KINDS_1Q = ("H", "S", "S_dagger", "X", "Z")
GATE_KINDS_2Q = ("CX", "CZ")


class PauliOperator:
    """Immutable Pauli operator with exact phase.

    Attributes:
        num_qubits: number of tensor factors.
        phase_exp: exponent of i, mod 4.
        x: packed X bits (bit q set iff qubit q carries X or Y).
        z: packed Z bits (bit q set iff qubit q carries Z or Y).
    """

    __slots__ = ("num_qubits", "phase_exp", "x", "z")

    def __init__(self, num_qubits: int, phase_exp: int, x: int, z: int):
        if num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        mask = (1 << num_qubits) - 1
        if (x | z) & ~mask:
            raise ValueError("bit vector exceeds num_qubits")
        object.__setattr__(self, "num_qubits", num_qubits)
        object.__setattr__(self, "phase_exp", phase_exp & 3)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)

    def __setattr__(self, name, value):
        raise AttributeError("PauliOperator is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, PauliOperator)
            and self.num_qubits == other.num_qubits
            and self.phase_exp == other.phase_exp
            and self.x == other.x
            and self.z == other.z
        )

    def __hash__(self):
        return hash((self.num_qubits, self.phase_exp, self.x, self.z))

    def __repr__(self):
        return f"PauliOperator({format_pauli(self)!r}, n={self.num_qubits})"

    # -- structure queries ------------------------------------------------

    @property
    def is_hermitian(self) -> bool:
        return self.phase_exp in (0, 2)

    @property
    def sign_bit(self) -> int:
        """0 for +, 1 for -.  Only meaningful for Hermitian operators."""
        if not self.is_hermitian:
            raise ValueError("sign of a non-Hermitian operator is undefined")
        return self.phase_exp >> 1

    @property
    def is_identity_body(self) -> bool:
        """True when every tensor factor is I (any phase)."""
        return self.x == 0 and self.z == 0

    def letter(self, q: int) -> str:
        return _BITS_TO_LETTER[(self.x >> q) & 1, (self.z >> q) & 1]

    def support_mask(self) -> int:
        return self.x | self.z

    def restricted(self, mask: int, num_qubits: int | None = None, shift: int = 0) -> "PauliOperator":
        """Tensor factors inside ``mask``, shifted down by ``shift`` qubits.

        The phase is carried over unchanged; callers restrict only after any
        factors outside the mask have been cancelled exactly.
        """
        n = num_qubits if num_qubits is not None else self.num_qubits
        return PauliOperator(n, self.phase_exp, (self.x & mask) >> shift, (self.z & mask) >> shift)

    def with_phase(self, phase_exp: int) -> "PauliOperator":
        return PauliOperator(self.num_qubits, phase_exp, self.x, self.z)

    def negated(self) -> "PauliOperator":
        return PauliOperator(self.num_qubits, self.phase_exp + 2, self.x, self.z)


def identity(num_qubits: int) -> PauliOperator:
    return PauliOperator(num_qubits, 0, 0, 0)


def from_label(num_qubits: int, factors: dict[int, str], sign: int = 0) -> PauliOperator:
    """Build an operator from {qubit: letter}; ``sign`` is 0 (+) or 1 (-)."""
    x = z = 0
    for q, letter in factors.items():
        if not 0 <= q < num_qubits:
            raise ValueError(f"qubit {q} out of range")
        xb, zb = _LETTER_TO_BITS[letter]
        x |= xb << q
        z |= zb << q
    return PauliOperator(num_qubits, 2 * sign, x, z)


def _require_same_size(a: PauliOperator, b: PauliOperator):
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"operator sizes differ: {a.num_qubits} vs {b.num_qubits}")


def multiply(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Operator product a*b with exact phase."""
    _require_same_size(a, b)
    x = a.x ^ b.x
    z = a.z ^ b.z
    # Per qubit, in XZ normal form: i^{xa*za} i^{xb*zb} (-1)^{za*xb} i^{-x*z}.
    g = (
        (a.x & a.z).bit_count()
        + (b.x & b.z).bit_count()
        + 2 * (a.z & b.x).bit_count()
        - (x & z).bit_count()
    )
    return PauliOperator(a.num_qubits, a.phase_exp + b.phase_exp + g, x, z)


def multiply_all(ops, num_qubits: int) -> PauliOperator:
    acc = identity(num_qubits)
    for op in ops:
        acc = multiply(acc, op)
    return acc


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    """True iff the symplectic inner product of a and b is even."""
    _require_same_size(a, b)
    return ((a.x & b.z).bit_count() + (a.z & b.x).bit_count()) % 2 == 0


def weight(p: PauliOperator, restriction: range | None = None) -> int:
    """Number of non-identity factors, optionally within a qubit range."""
    support = p.x | p.z
    if restriction is None:
        return support.bit_count()
    if restriction.start < 0 or restriction.stop > p.num_qubits:
        raise ValueError("restriction outside operator")
    mask = ((1 << (restriction.stop - restriction.start)) - 1) << restriction.start
    return (support & mask).bit_count()


@dataclass(frozen=True)
class CliffordGate:
    """Elementary Clifford gate: one of H, S, S_dagger, X, Z, CX, CZ."""

    kind: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        if self.kind in GATE_KINDS_1Q:
            if len(self.qubits) != 1:
                raise ValueError(f"{self.kind} takes one qubit")
        elif self.kind in GATE_KINDS_2Q:
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError(f"{self.kind} takes two distinct qubits")
        else:
            raise ValueError(f"unknown Clifford gate kind {self.kind!r}")

    def inverse(self) -> "CliffordGate":
        if self.kind == "S":
            return CliffordGate("S_dagger", self.qubits)
        if self.kind == "S_dagger":
            return CliffordGate("S", self.qubits)
        return self


def conjugate_by_gate(p: PauliOperator, gate: CliffordGate, direction: str = "backward") -> PauliOperator:
    """Heisenberg update of ``p`` through an elementary Clifford gate.

    ``backward`` returns g† p g (pulling a later measurement toward the
    start of a circuit); ``forward`` returns g p g†.
    """
    if direction == "forward":
        return conjugate_by_gate(p, gate.inverse(), "backward")
    if direction != "backward":
        raise ValueError("direction must be 'forward' or 'backward'")

    kind = gate.kind
    n = p.num_qubits
    x, z, pe = p.x, p.z, p.phase_exp

    if kind == "H":
        (q,) = gate.qubits
        bx, bz = (x >> q) & 1, (z >> q) & 1
        pe += 2 * (bx & bz)  # Y -> -Y
        x ^= (bx ^ bz) << q  # swap the two bits
        z ^= (bx ^ bz) << q
    elif kind == "S":
        (q,) = gate.qubits
        bx, bz = (x >> q) & 1, (z >> q) & 1
        pe += 2 * (bx & (bz ^ 1))  # X -> -Y
        z ^= bx << q
    elif kind == "S_dagger":
        (q,) = gate.qubits
        bx, bz = (x >> q) & 1, (z >> q) & 1
        pe += 2 * (bx & bz)  # Y -> -X
        z ^= bx << q
    elif kind == "X":
        (q,) = gate.qubits
        pe += 2 * ((z >> q) & 1)  # Z,Y pick up a sign
    elif kind == "Z":
        (q,) = gate.qubits
        pe += 2 * ((x >> q) & 1)  # X,Y pick up a sign
    elif kind == "CX":
        c, t = gate.qubits
        xc, zc = (x >> c) & 1, (z >> c) & 1
        xt, zt = (x >> t) & 1, (z >> t) & 1
        nzc, nxt = zc ^ zt, xt ^ xc
        pe += (xc * zc + xt * zt) - (xc * nzc + nxt * zt)
        z ^= (zc ^ nzc) << c
        x ^= (xt ^ nxt) << t
    elif kind == "CZ":
        a, b = gate.qubits
        xa, za = (x >> a) & 1, (z >> a) & 1
        xb, zb = (x >> b) & 1, (z >> b) & 1
        nza, nzb = za ^ xb, zb ^ xa
        pe += 2 * (xa & xb) + (xa * za + xb * zb) - (xa * nza + xb * nzb)
        z ^= (za ^ nza) << a
        z ^= (zb ^ nzb) << b
    else:  # pragma: no cover - guarded by CliffordGate
        raise ValueError(kind)
    return PauliOperator(n, pe, x, z)


@dataclass(frozen=True)
class VUnitary:
    """Clifford ((-1)^{sigma_first} first + (-1)^{sigma_second} second)/sqrt(2).

    ``first`` is the previously fixed anti-commuting operator (a stabilizer
    or an earlier measurement); ``second`` is the measurement it replaces.
    Both must be Hermitian and anti-commute, which makes V Hermitian and
    involutory, so backward and forward conjugation coincide.
    """

    first: PauliOperator
    second: PauliOperator
    sigma_first: int
    sigma_second: int

    def __post_init__(self):
        _require_same_size(self.first, self.second)
        if not (self.first.is_hermitian and self.second.is_hermitian):
            raise ValueError("V requires Hermitian constituents")
        if commutes(self.first, self.second):
            raise ValueError("V requires anti-commuting constituents")


def conjugate_by_v(r: PauliOperator, v: VUnitary, direction: str = "backward") -> PauliOperator:
    """Conjugate ``r`` through a V-unitary (V r V, since V = V† = V^{-1}).

    Four commutation cases against (first=Q, second=P), with
    alpha = (-1)^{sigma_first + sigma_second}:

    * commutes with both           -> r
    * commutes with P, anti with Q -> alpha * Q * P * r
    * anti with P, commutes with Q -> -alpha * Q * P * r
    * anti with both               -> -r
    """
    if direction not in ("backward", "forward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    _require_same_size(r, v.first)
    com_q = commutes(r, v.first)
    com_p = commutes(r, v.second)
    if com_q and com_p:
        return r
    if not com_q and not com_p:
        return r.negated()
    alpha = (v.sigma_first + v.sigma_second) & 1
    out = multiply(multiply(v.first, v.second), r)
    if com_p:  # commutes with the dropped measurement, anti with the witness
        return out.with_phase(out.phase_exp + 2 * alpha)
    return out.with_phase(out.phase_exp + 2 * alpha + 2)


# -- text form ------------------------------------------------------------


def format_pauli(p: PauliOperator) -> str:
    """Render as sign + per-qubit letters with 1-based subscripts.

    Hermitian operators print as e.g. ``-X1Y3Z4`` (identity: ``+I``);
    non-Hermitian phases print with an explicit ``i``/``-i`` prefix.
    """
    prefix = {0: "+", 1: "i", 2: "-", 3: "-i"}[p.phase_exp]
    parts = []
    for q in range(p.num_qubits):
        letter = p.letter(q)
        if letter != "I":
            parts.append(f"{letter}{q + 1}")
    return prefix + ("".join(parts) if parts else "I")


def parse_pauli(text: str, num_qubits: int) -> PauliOperator:
    """Inverse of :func:`format_pauli`; round-trips losslessly."""
    s = text.strip()
    phase_exp = 0
    if s.startswith("-i"):
        phase_exp, s = 3, s[2:]
    elif s.startswith("i"):
        phase_exp, s = 1, s[1:]
    elif s.startswith("-"):
        phase_exp, s = 2, s[1:]
    elif s.startswith("+"):
        s = s[1:]
    if s == "I":
        return PauliOperator(num_qubits, phase_exp, 0, 0)
    x = z = 0
    i = 0
    while i < len(s):
        letter = s[i]
        if letter not in "XYZ":
            raise ValueError(f"bad Pauli letter {letter!r} in {text!r}")
        i += 1
        j = i
        while j < len(s) and s[j].isdigit():
            j += 1
        if j == i:
            raise ValueError(f"missing qubit index after {letter!r} in {text!r}")
        q = int(s[i:j]) - 1
        if not 0 <= q < num_qubits:
            raise ValueError(f"qubit index {q + 1} out of range in {text!r}")
        if (x | z) >> q & 1:
            raise ValueError(f"duplicate qubit {q + 1} in {text!r}")
        xb, zb = _LETTER_TO_BITS[letter]
        x |= xb << q
        z |= zb << q
        i = j
    return PauliOperator(num_qubits, phase_exp, x, z)
