"""Gate and circuit representation, depth metrics, inversion, serialization."""

from __future__ import annotations

import contextlib
import json
import math
import re
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import _kernels
from .errors import ValidationError


class Kind(IntEnum):
    CNOT = _kernels.CNOT
    X = _kernels.X
    H = _kernels.H
    S = _kernels.S
    SDG = _kernels.SDG
    RZ = _kernels.RZ
    RY = _kernels.RY
    PHASE = _kernels.PHASE


ROTATIONS = frozenset({Kind.RZ, Kind.RY, Kind.PHASE})
NAMES = {
    Kind.CNOT: "cx",
    Kind.X: "x",
    Kind.H: "h",
    Kind.S: "s",
    Kind.SDG: "sdg",
    Kind.RZ: "rz",
    Kind.RY: "ry",
    Kind.PHASE: "p",
}
KIND_BY_NAME = {v: k for k, v in NAMES.items()}
REGISTER_ROLES = frozenset({"input", "copy", "phase", "control", "target", "ancilla"})


@dataclass(frozen=True)
class Gate:
    kind: Kind
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        want = 2 if kind is Kind.CNOT else 1
        if len(qubits) != want:
            raise ValidationError(f"{NAMES[kind]} takes {want} qubit(s), got {qubits}")
        if want == 2 and qubits[0] == qubits[1]:
            raise ValidationError(f"cx control and target coincide: {qubits}")
        if any(q < 0 for q in qubits):
            raise ValidationError(f"negative qubit index in {qubits}")
        if kind in ROTATIONS:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValidationError(f"{NAMES[kind]} needs a finite angle, got {self.angle}")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValidationError(f"{NAMES[kind]} takes no angle")

    def inverse(self) -> "Gate":
        if self.kind is Kind.S:
            return Gate(Kind.SDG, self.qubits)
        if self.kind is Kind.SDG:
            return Gate(Kind.S, self.qubits)
        if self.kind in ROTATIONS:
            return Gate(self.kind, self.qubits, -self.angle)
        return self

    def remap(self, qubit_map: Sequence[int] | Mapping[int, int]) -> "Gate":
        return Gate(self.kind, tuple(qubit_map[q] for q in self.qubits), self.angle)

    def __str__(self) -> str:
        return _qasm_line(self)


@dataclass(frozen=True)
class Register:
    name: str
    start: int
    stop: int
    role: str

    def __post_init__(self):
        if self.role not in REGISTER_ROLES:
            raise ValidationError(f"unknown register role {self.role!r}")
        if not 0 <= self.start <= self.stop:
            raise ValidationError(f"bad register range [{self.start},{self.stop})")

    @property
    def qubits(self) -> range:
        return range(self.start, self.stop)

    def __len__(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class Circuit:
    """An immutable gate list over ``num_qubits`` wires.

    ``stages`` is either empty or holds one label (possibly ``None``) per gate.
    """

    num_qubits: int
    gates: tuple[Gate, ...] = ()
    registers: tuple[Register, ...] = ()
    stages: tuple[str | None, ...] = ()
    _arrays: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "registers", tuple(self.registers))
        stages = tuple(self.stages)
        if stages and all(s is None for s in stages):
            stages = ()
        object.__setattr__(self, "stages", stages)
        if self.num_qubits < 0:
            raise ValidationError("num_qubits must be non-negative")
        for g in self.gates:
            if max(g.qubits) >= self.num_qubits:
                raise ValidationError(f"gate {g} exceeds width {self.num_qubits}")
        if stages and len(stages) != len(self.gates):
            raise ValidationError("stage labels must match the gate count")
        regs = sorted(self.registers, key=lambda r: r.start)
        pos = 0
        for r in regs:
            if r.start != pos:
                raise ValidationError("registers must tile a prefix of the qubits")
            pos = r.stop
        if pos > self.num_qubits:
            raise ValidationError("registers exceed the circuit width")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates)

    def stage_of(self, index: int) -> str | None:
        return self.stages[index] if self.stages else None

    def register(self, name: str) -> Register:
        for r in self.registers:
            if r.name == name:
                return r
        raise KeyError(name)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Columnar (kind, q0, q1, angle) arrays for the kernels; q1 = -1 if unused."""
        if not self._arrays:
            n = len(self.gates)
            kinds = np.empty(n, dtype=np.int64)
            q0 = np.empty(n, dtype=np.int64)
            q1 = np.full(n, -1, dtype=np.int64)
            ang = np.zeros(n, dtype=np.float64)
            for i, g in enumerate(self.gates):
                kinds[i] = int(g.kind)
                q0[i] = g.qubits[0]
                if len(g.qubits) == 2:
                    q1[i] = g.qubits[1]
                if g.angle is not None:
                    ang[i] = g.angle
            self._arrays.append((kinds, q0, q1, ang))
        return self._arrays[0]

    def count(self, kind: Kind) -> int:
        return sum(1 for g in self.gates if g.kind is kind)


class CircuitBuilder:
    """Mutable accumulator for a :class:`Circuit`."""

    def __init__(self, num_qubits: int = 0):
        self.num_qubits = num_qubits
        self._gates: list[Gate] = []
        self._stages: list[str | None] = []
        self._registers: list[Register] = []
        self._stage: str | None = None

    def __len__(self) -> int:
        return len(self._gates)

    def add_register(self, name: str, size: int, role: str) -> range:
        start = self._registers[-1].stop if self._registers else 0
        reg = Register(name, start, start + size, role)
        self._registers.append(reg)
        self.num_qubits = max(self.num_qubits, reg.stop)
        return reg.qubits

    @contextlib.contextmanager
    def stage(self, label: str | None):
        prev = self._stage
        self._stage = label
        try:
            yield self
        finally:
            self._stage = prev

    def append(self, gate: Gate, stage: str | None = None) -> None:
        self._gates.append(gate)
        self._stages.append(self._stage if self._stage is not None else stage)

    def cx(self, control: int, target: int) -> None:
        self.append(Gate(Kind.CNOT, (control, target)))

    def x(self, q: int) -> None:
        self.append(Gate(Kind.X, (q,)))

    def h(self, q: int) -> None:
        self.append(Gate(Kind.H, (q,)))

    def s(self, q: int) -> None:
        self.append(Gate(Kind.S, (q,)))

    def sdg(self, q: int) -> None:
        self.append(Gate(Kind.SDG, (q,)))

    def rz(self, theta: float, q: int) -> None:
        self.append(Gate(Kind.RZ, (q,), theta))

    def ry(self, theta: float, q: int) -> None:
        self.append(Gate(Kind.RY, (q,), theta))

    def p(self, theta: float, q: int) -> None:
        self.append(Gate(Kind.PHASE, (q,), theta))

    def t(self, q: int) -> None:
        self.p(math.pi / 4, q)

    def tdg(self, q: int) -> None:
        self.p(-math.pi / 4, q)

    def extend(
        self,
        sub: Circuit | Iterable[Gate],
        qubit_map: Sequence[int] | Mapping[int, int] | None = None,
    ) -> None:
        """Append gates of ``sub``, optionally relabelling its qubits.

        Inner stage labels survive unless this builder is inside a stage block.
        """
        if isinstance(sub, Circuit):
            labels = sub.stages or (None,) * len(sub.gates)
            gates = sub.gates
        else:
            gates = tuple(sub)
            labels = (None,) * len(gates)
        for g, lab in zip(gates, labels):
            self.append(g if qubit_map is None else g.remap(qubit_map), lab)

    def build(self) -> Circuit:
        width = self.num_qubits
        if self._gates:
            width = max(width, 1 + max(max(g.qubits) for g in self._gates))
        return Circuit(width, tuple(self._gates), tuple(self._registers), tuple(self._stages))


# ---------------------------------------------------------------------------
# metrics


@dataclass(frozen=True)
class DepthReport:
    depth: int
    size: int
    cnot_count: int
    per_stage: tuple[tuple[str, int, int], ...] = ()


def _layered_depth(circuit: Circuit, lo: int = 0, hi: int | None = None) -> int:
    kinds, q0, q1, _ = circuit.arrays()
    return _kernels.asap_depth(q0[lo:hi], q1[lo:hi], max(circuit.num_qubits, 1))


def depth(circuit: Circuit) -> DepthReport:
    """ASAP-layered depth plus size and CNOT count.

    ``per_stage`` lists each maximal run of equally labelled gates with its
    own standalone depth and size.
    """
    per_stage = []
    if circuit.stages:
        start = 0
        labels = circuit.stages
        for i in range(1, len(labels) + 1):
            if i == len(labels) or labels[i] != labels[start]:
                lab = labels[start] if labels[start] is not None else "-"
                per_stage.append((lab, _layered_depth(circuit, start, i), i - start))
                start = i
    return DepthReport(
        depth=_layered_depth(circuit),
        size=len(circuit.gates),
        cnot_count=circuit.count(Kind.CNOT),
        per_stage=tuple(per_stage),
    )


def invert(circuit: Circuit) -> Circuit:
    gates = tuple(g.inverse() for g in reversed(circuit.gates))
    stages = tuple(reversed(circuit.stages))
    return Circuit(circuit.num_qubits, gates, circuit.registers, stages)


def concat(*circuits: Circuit) -> Circuit:
    b = CircuitBuilder(max((c.num_qubits for c in circuits), default=0))
    for c in circuits:
        b.extend(c)
    return b.build()


# ---------------------------------------------------------------------------
# serialization


def _fmt_angle(a: float) -> str:
    return repr(float(a))


def _qasm_line(g: Gate) -> str:
    name = NAMES[g.kind]
    args = ",".join(f"q[{q}]" for q in g.qubits)
    if g.angle is not None:
        return f"{name}({_fmt_angle(g.angle)}) {args};"
    return f"{name} {args};"


def _stage_runs(stages: Sequence[str | None]) -> list:
    runs: list = []
    for lab in stages:
        if runs and runs[-1][0] == lab:
            runs[-1][1] += 1
        else:
            runs.append([lab, 1])
    return runs


def emit(circuit: Circuit, fmt: str = "json") -> str:
    """Serialize to ``json`` or ``qasm`` text (deterministic)."""
    if fmt == "json":
        gates = []
        for g in circuit.gates:
            item: list = [NAMES[g.kind], *g.qubits]
            if g.angle is not None:
                item.append(g.angle)
            gates.append(item)
        doc: dict = {"n": circuit.num_qubits, "gates": gates}
        if circuit.registers:
            doc["registers"] = [[r.name, r.start, r.stop, r.role] for r in circuit.registers]
        if circuit.stages:
            doc["stages"] = _stage_runs(circuit.stages)
        return json.dumps(doc, separators=(",", ":"))
    if fmt in ("qasm", "qasm_text"):
        return "".join(_qasm_line(g) + "\n" for g in circuit.gates)
    raise ValidationError(f"unknown format {fmt!r}")


_QASM_RE = re.compile(r"^(\w+)(?:\(([^)]*)\))?\s+(.+);$")


def _make_gate(name: str, qubits: Sequence[int], angle: float | None) -> Gate:
    if name not in KIND_BY_NAME:
        raise ValidationError(f"unknown gate name {name!r}")
    return Gate(KIND_BY_NAME[name], tuple(qubits), angle)


def parse(text: str, num_qubits: int | None = None) -> Circuit:
    """Inverse of :func:`emit`; the format is sniffed from the first character."""
    text = text.strip()
    if text.startswith("{"):
        try:
            doc = json.loads(text)
            gates = []
            for item in doc["gates"]:
                name = item[0]
                rest = item[1:]
                if KIND_BY_NAME.get(name) in ROTATIONS:
                    gates.append(_make_gate(name, rest[:-1], rest[-1]))
                else:
                    gates.append(_make_gate(name, rest, None))
            regs = tuple(Register(*r) for r in doc.get("registers", ()))
            stages: list = []
            for lab, cnt in doc.get("stages", ()):
                stages.extend([lab] * cnt)
            return Circuit(int(doc["n"]), tuple(gates), regs, tuple(stages))
        except (KeyError, TypeError, IndexError, json.JSONDecodeError) as exc:
            raise ValidationError(f"malformed circuit json: {exc}") from exc
    gates = []
    width = 0
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("//") or line.startswith("OPENQASM"):
            continue
        if line.startswith("include") or line.startswith("qreg"):
            m = re.match(r"qreg\s+\w+\[(\d+)\];", line)
            if m:
                width = max(width, int(m.group(1)))
            continue
        m = _QASM_RE.match(line)
        if not m:
            raise ValidationError(f"cannot parse qasm line {line!r}")
        name, ang, args = m.groups()
        qubits = [int(q) for q in re.findall(r"\[(\d+)\]", args)]
        gates.append(_make_gate(name, qubits, float(ang) if ang is not None else None))
    if gates:
        width = max(width, 1 + max(max(g.qubits) for g in gates))
    if num_qubits is not None:
        width = max(width, num_qubits)
    return Circuit(width, tuple(gates))
