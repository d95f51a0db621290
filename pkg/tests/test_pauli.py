import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbckit.pauli import (
    CliffordGate,
    PauliOperator,
    VUnitary,
    commutes,
    conjugate_by_gate,
    conjugate_by_v,
    format_pauli,
    from_label,
    identity,
    multiply,
    parse_pauli,
    weight,
)

from oracles import all_paulis, dense_gate, dense_pauli, dense_v, mats_equal


def test_multiply_x_times_z_is_minus_i_y():
    x1 = from_label(1, {0: "X"})
    z1 = from_label(1, {0: "Z"})
    prod = multiply(x1, z1)
    assert prod.phase_exp == 3 and prod.letter(0) == "Y"
    assert mats_equal(dense_pauli(prod), dense_pauli(x1) @ dense_pauli(z1))


def test_multiply_identity_and_involution():
    p = parse_pauli("-X1Y3Z4", 4)
    assert multiply(identity(4), p) == p
    xx = from_label(2, {0: "X", 1: "X"})
    assert multiply(xx, xx) == identity(2)


def test_multiply_size_mismatch():
    with pytest.raises(ValueError):
        multiply(identity(2), identity(3))


def test_commutes_examples():
    assert not commutes(from_label(1, {0: "X"}), from_label(1, {0: "Z"}))
    assert commutes(from_label(2, {0: "X", 1: "X"}), from_label(2, {0: "Z", 1: "Z"}))
    a = parse_pauli("+X1Y3Z4", 4)
    b = parse_pauli("+Z1Z3", 4)
    # oracle: dense commutator
    da, db = dense_pauli(a), dense_pauli(b)
    assert mats_equal(da @ db, db @ da)
    assert commutes(a, b)


def test_weight_examples():
    p = parse_pauli("+X1Y3Z4", 4)
    assert weight(p) == 3
    assert weight(identity(5)) == 0
    zz = from_label(4, {0: "Z", 1: "Z"})
    assert weight(zz, range(1, 4)) == 1


def test_weight_restriction_bounds():
    with pytest.raises(ValueError):
        weight(identity(2), range(0, 3))


def test_conjugate_examples():
    # Z on a gadget qubit pulled backward through CX(control=0, target=2)
    z2 = from_label(3, {2: "Z"})
    out = conjugate_by_gate(z2, CliffordGate("CX", (0, 2)))
    assert out == from_label(3, {0: "Z", 2: "Z"})
    # Hadamard exchange
    assert conjugate_by_gate(from_label(1, {0: "X"}), CliffordGate("H", (0,))) == from_label(1, {0: "Z"})
    # backward S: X -> -Y
    out = conjugate_by_gate(from_label(1, {0: "X"}), CliffordGate("S", (0,)))
    assert out == from_label(1, {0: "Y"}, sign=1)


def _gates_on(n):
    for q in range(n):
        for kind in ("H", "S", "S_dagger", "X", "Z"):
            yield CliffordGate(kind, (q,))
    for a in range(n):
        for b in range(n):
            if a != b:
                yield CliffordGate("CX", (a, b))
                yield CliffordGate("CZ", (a, b))


@pytest.mark.parametrize("n", [1, 2])
def test_conjugation_matches_dense_exhaustively(n):
    for gate in _gates_on(n):
        gd = dense_gate(gate, n)
        for p in all_paulis(n):
            back = conjugate_by_gate(p, gate, "backward")
            assert mats_equal(dense_pauli(back), gd.conj().T @ dense_pauli(p) @ gd)
            fwd = conjugate_by_gate(p, gate, "forward")
            assert mats_equal(dense_pauli(fwd), gd @ dense_pauli(p) @ gd.conj().T)
            # round trip
            assert conjugate_by_gate(back, gate, "forward") == p


@pytest.mark.parametrize("n", [1, 2])
def test_multiply_matches_dense_exhaustively(n):
    ops = list(all_paulis(n))
    for a in ops:
        da = dense_pauli(a)
        for b in ops:
            prod = multiply(a, b)
            assert mats_equal(dense_pauli(prod), da @ dense_pauli(b))
            assert commutes(a, b) == mats_equal(da @ dense_pauli(b), dense_pauli(b) @ da)


def test_multiply_matches_dense_sampled_3q():
    rng = np.random.default_rng(7)
    ops = list(all_paulis(3, phases=(0, 1, 2, 3)))
    idx = rng.integers(0, len(ops), size=(4000, 2))
    for i, j in idx:
        a, b = ops[i], ops[j]
        prod = multiply(a, b)
        assert mats_equal(dense_pauli(prod), dense_pauli(a) @ dense_pauli(b))


def test_hermitian_commute_xor_anticommute():
    ops = [p for p in all_paulis(2, phases=(0, 2))]
    for a in ops:
        for b in ops:
            ab, ba = multiply(a, b), multiply(b, a)
            if commutes(a, b):
                assert ab == ba
            else:
                assert ab == ba.negated()


def test_conjugation_weight_changes():
    for gate in _gates_on(2):
        for p in all_paulis(2, phases=(0,)):
            w0, w1 = weight(p), weight(conjugate_by_gate(p, gate))
            if len(gate.qubits) == 1:
                assert w0 == w1
            else:
                assert abs(w0 - w1) <= 1


# -- V-unitary conjugation --------------------------------------------------


def _v_cases_2q():
    q = from_label(2, {0: "Z"})
    p = from_label(2, {0: "X", 1: "Z"})
    for sq in (0, 1):
        for sp in (0, 1):
            yield VUnitary(first=q, second=p, sigma_first=sq, sigma_second=sp)


def test_conjugate_by_v_all_cases_match_dense():
    for v in _v_cases_2q():
        vd = dense_v(v)
        assert mats_equal(vd @ vd, np.eye(4))  # involution
        for r in all_paulis(2, phases=(0, 2)):
            out = conjugate_by_v(r, v)
            assert mats_equal(dense_pauli(out), vd.conj().T @ dense_pauli(r) @ vd)
            # backward then forward restores the original
            assert conjugate_by_v(out, v, "forward") == r


def test_conjugate_by_v_case_forms():
    q = from_label(2, {0: "Z"})
    p = from_label(2, {0: "X", 1: "Z"})
    v = VUnitary(first=q, second=p, sigma_first=0, sigma_second=1)
    # commutes with both -> unchanged
    r = from_label(2, {1: "Z"})
    assert conjugate_by_v(r, v) == r
    # anti-commutes with both -> negated
    r = from_label(2, {0: "Y", 1: "Z"})
    assert not commutes(r, q) and not commutes(r, p)
    assert conjugate_by_v(r, v) == r.negated()
    # commutes with second only -> alpha * first * second * r
    r = from_label(2, {0: "X", 1: "Z"})
    assert commutes(r, p) and not commutes(r, q)
    expect = multiply(multiply(q, p), r)
    alpha = (v.sigma_first + v.sigma_second) & 1
    assert conjugate_by_v(r, v) == expect.with_phase(expect.phase_exp + 2 * alpha)


def test_v_requires_anticommuting_hermitian():
    with pytest.raises(ValueError):
        VUnitary(from_label(1, {0: "Z"}), from_label(1, {0: "Z"}), 0, 0)
    with pytest.raises(ValueError):
        VUnitary(from_label(1, {0: "Z"}).with_phase(1), from_label(1, {0: "X"}), 0, 0)


# -- text round trip ---------------------------------------------------------


@given(
    st.integers(min_value=1, max_value=8).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.integers(min_value=0, max_value=3),
            st.integers(min_value=0, max_value=(1 << n) - 1),
            st.integers(min_value=0, max_value=(1 << n) - 1),
        )
    )
)
@settings(max_examples=300, deadline=None)
def test_parse_format_roundtrip(args):
    n, phase, x, z = args
    p = PauliOperator(n, phase, x, z)
    assert parse_pauli(format_pauli(p), n) == p


def test_parse_rejects_garbage():
    for bad in ("W1", "X0", "X9", "X1X1", "X"):
        with pytest.raises(ValueError):
            parse_pauli(bad, 4)
