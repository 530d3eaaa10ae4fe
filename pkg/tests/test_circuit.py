import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stateprep.circuit import (
    Circuit,
    CircuitBuilder,
    Gate,
    Kind,
    Register,
    concat,
    depth,
    emit,
    invert,
    parse,
)
from stateprep.errors import ValidationError
from stateprep.sim import run_dense, unitary_dense

ONE_QUBIT = [Kind.X, Kind.H, Kind.S, Kind.SDG]
ROT = [Kind.RZ, Kind.RY, Kind.PHASE]


@st.composite
def gates(draw, width):
    kind = draw(st.sampled_from(list(Kind)))
    if kind is Kind.CNOT:
        c, t = draw(st.lists(st.integers(0, width - 1), min_size=2, max_size=2, unique=True))
        return Gate(kind, (c, t))
    q = draw(st.integers(0, width - 1))
    if kind in ROT:
        a = draw(st.floats(-10, 10, allow_nan=False, allow_infinity=False))
        return Gate(kind, (q,), a)
    return Gate(kind, (q,))


@st.composite
def circuits(draw, max_width=6, max_size=40):
    width = draw(st.integers(2, max_width))
    gs = draw(st.lists(gates(width), max_size=max_size))
    return Circuit(width, tuple(gs))


def random_circuit(rng, width, size):
    gs = []
    for _ in range(size):
        kind = Kind(int(rng.integers(len(Kind))))
        if kind is Kind.CNOT:
            c, t = rng.choice(width, 2, replace=False)
            gs.append(Gate(kind, (c, t)))
        elif kind in ROT:
            gs.append(Gate(kind, (int(rng.integers(width)),), float(rng.uniform(-4, 4))))
        else:
            gs.append(Gate(kind, (int(rng.integers(width)),)))
    return Circuit(width, tuple(gs))


# gate validation


def test_cnot_needs_two_distinct_qubits():
    with pytest.raises(ValidationError):
        Gate(Kind.CNOT, (1, 1))
    with pytest.raises(ValidationError):
        Gate(Kind.CNOT, (1,))


def test_rotation_angle_must_be_finite():
    with pytest.raises(ValidationError):
        Gate(Kind.RZ, (0,), math.nan)
    with pytest.raises(ValidationError):
        Gate(Kind.PHASE, (0,), math.inf)
    with pytest.raises(ValidationError):
        Gate(Kind.RY, (0,))
    with pytest.raises(ValidationError):
        Gate(Kind.H, (0,), 0.3)


def test_gate_beyond_width_rejected():
    with pytest.raises(ValidationError):
        Circuit(2, (Gate(Kind.X, (2,)),))


def test_registers_tile_a_prefix():
    Circuit(4, (), (Register("a", 0, 2, "input"), Register("b", 2, 3, "copy")))
    with pytest.raises(ValidationError):
        Circuit(4, (), (Register("a", 1, 2, "input"),))
    with pytest.raises(ValidationError):
        Circuit(2, (), (Register("a", 0, 3, "input"),))
    with pytest.raises(ValidationError):
        Register("a", 0, 1, "scratchpad")


# depth


def test_depth_of_empty_circuit():
    rep = depth(Circuit(3))
    assert (rep.depth, rep.size, rep.cnot_count) == (0, 0, 0)


def test_depth_of_disjoint_cnots():
    c = Circuit(4, (Gate(Kind.CNOT, (0, 1)), Gate(Kind.CNOT, (2, 3))))
    rep = depth(c)
    assert (rep.depth, rep.size, rep.cnot_count) == (1, 2, 2)


def test_depth_counts_shared_qubit_as_serial():
    c = Circuit(3, (Gate(Kind.CNOT, (0, 1)), Gate(Kind.CNOT, (1, 2)), Gate(Kind.X, (0,))))
    assert depth(c).depth == 2


@given(gates(4), gates(4))
def test_two_gates_share_a_layer_iff_disjoint(g1, g2):
    d = depth(Circuit(4, (g1, g2))).depth
    assert (d == 1) == (not set(g1.qubits) & set(g2.qubits))


@settings(max_examples=60, deadline=None)
@given(circuits())
def test_depth_report_invariants(c):
    rep = depth(c)
    assert rep.depth <= rep.size
    assert rep.cnot_count <= rep.size
    inv = depth(invert(c))
    assert (inv.depth, inv.size) == (rep.depth, rep.size)


def test_per_stage_runs():
    b = CircuitBuilder(3)
    with b.stage("copy"):
        b.cx(0, 1)
        b.cx(0, 2)
    with b.stage("rotate"):
        b.p(0.1, 1)
        b.p(0.2, 2)
    rep = depth(b.build())
    assert rep.per_stage == (("copy", 2, 2), ("rotate", 1, 2))


# invert


def test_invert_examples():
    assert invert(Circuit(2, (Gate(Kind.CNOT, (0, 1)),))).gates == (Gate(Kind.CNOT, (0, 1)),)
    assert invert(Circuit(3, (Gate(Kind.PHASE, (2,), 0.4),))).gates == (
        Gate(Kind.PHASE, (2,), -0.4),
    )
    assert Gate(Kind.S, (0,)).inverse() == Gate(Kind.SDG, (0,))


def test_invert_round_trip_on_all_basis_inputs():
    rng = np.random.default_rng(11)
    c = random_circuit(rng, 6, 50)
    both = concat(c, invert(c))
    out = run_dense(both, np.eye(64, dtype=complex))
    assert np.abs(out - np.eye(64)).max() <= 1e-10


@settings(max_examples=30, deadline=None)
@given(circuits(max_width=4, max_size=20))
def test_invert_is_the_adjoint(c):
    u = unitary_dense(c)
    v = unitary_dense(invert(c))
    assert np.allclose(v, u.conj().T, atol=1e-10)


# builder


def test_builder_registers_and_tdg():
    b = CircuitBuilder()
    xs = b.add_register("x", 2, "input")
    b.add_register("anc", 1, "ancilla")
    b.t(xs[0])
    b.tdg(xs[1])
    c = b.build()
    assert c.num_qubits == 3
    assert c.register("anc").qubits == range(2, 3)
    assert c.gates[0].angle == pytest.approx(math.pi / 4)
    assert c.gates[1].angle == pytest.approx(-math.pi / 4)


def test_extend_remaps_and_keeps_inner_labels():
    inner = CircuitBuilder(2)
    with inner.stage("inner"):
        inner.cx(0, 1)
    inner = inner.build()
    b = CircuitBuilder(4)
    b.extend(inner, [3, 2])
    with b.stage("outer"):
        b.extend(inner, [0, 1])
    c = b.build()
    assert c.gates == (Gate(Kind.CNOT, (3, 2)), Gate(Kind.CNOT, (0, 1)))
    assert c.stages == ("inner", "outer")


# emit / parse


def test_emit_json_example():
    c = Circuit(2, (Gate(Kind.CNOT, (0, 1)),))
    assert emit(c, "json") == '{"n":2,"gates":[["cx",0,1]]}'


def test_emit_qasm_example():
    c = Circuit(1, (Gate(Kind.PHASE, (0,), 0.5),))
    assert emit(c, "qasm") == "p(0.5) q[0];\n"


def test_emit_unknown_format():
    with pytest.raises(ValidationError):
        emit(Circuit(1), "quil")


def test_qasm_names():
    b = CircuitBuilder(2)
    b.cx(0, 1)
    b.x(0)
    b.h(0)
    b.s(0)
    b.sdg(0)
    b.rz(0.1, 0)
    b.ry(0.2, 1)
    b.p(0.3, 1)
    names = [line.split()[0].split("(")[0] for line in emit(b.build(), "qasm").splitlines()]
    assert names == ["cx", "x", "h", "s", "sdg", "rz", "ry", "p"]


def test_emit_parse_emit_is_byte_identical_on_100_circuits():
    rng = np.random.default_rng(5)
    for i in range(100):
        c = random_circuit(rng, int(rng.integers(2, 9)), int(rng.integers(0, 60)))
        for fmt in ("json", "qasm"):
            text = emit(c, fmt)
            assert emit(parse(text, c.num_qubits), fmt) == text


@settings(max_examples=60, deadline=None)
@given(circuits())
def test_json_round_trip_is_structural(c):
    back = parse(emit(c, "json"))
    assert back == c


def test_json_round_trip_keeps_registers_and_stages():
    b = CircuitBuilder()
    b.add_register("x", 2, "input")
    b.add_register("a", 1, "ancilla")
    with b.stage("s1"):
        b.cx(0, 2)
    b.h(1)
    c = b.build()
    back = parse(emit(c, "json"))
    assert back.registers == c.registers
    assert back.stages == c.stages


def test_parse_skips_qasm_header():
    text = 'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[5];\ncx q[0],q[1];\n'
    c = parse(text)
    assert c.num_qubits == 5
    assert c.gates == (Gate(Kind.CNOT, (0, 1)),)


def test_parse_rejects_garbage():
    with pytest.raises(ValidationError):
        parse("frobnicate q[0];")
    with pytest.raises(ValidationError):
        parse('{"n": 2}')
