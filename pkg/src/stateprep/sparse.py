"""Sparse targets: relabelling permutations and s-sparse state preparation.

A state with s nonzero amplitudes is prepared densely on ceil(log2 s)
qubits, indexed by rank in the sorted support, and then relabelled onto
the real support strings with two permutation circuits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import Circuit, CircuitBuilder
from .errors import ValidationError
from .primitives import emit_fanout, emit_mcx, emit_parity_fanin
from .qsp import prepare_state

NORM_TOL = 1e-10


@dataclass(frozen=True)
class SparseTarget:
    n: int
    entries: tuple[tuple[int, complex], ...]

    def __post_init__(self):
        idx = [k for k, _ in self.entries]
        if not idx:
            raise ValidationError("a sparse target needs at least one entry")
        if len(set(idx)) != len(idx):
            raise ValidationError("duplicate basis strings in sparse target")
        for k in idx:
            if k < 0 or k >> self.n:
                raise ValidationError(f"index {k} does not fit in {self.n} bits")
        norm = math.sqrt(sum(abs(a) ** 2 for _, a in self.entries))
        if abs(norm - 1) > NORM_TOL:
            raise ValidationError(f"sparse target must have unit norm, got {norm!r}")

    @classmethod
    def from_strings(cls, items: Sequence[tuple[str, complex]]) -> "SparseTarget":
        widths = {len(s) for s, _ in items}
        if len(widths) != 1:
            raise ValidationError("all basis strings must have the same length")
        n = widths.pop()
        entries = []
        for s, a in items:
            if set(s) - {"0", "1"}:
                raise ValidationError(f"not a bit string: {s!r}")
            entries.append((int(s, 2), complex(a)))
        return cls(n, tuple(entries))

    @property
    def s(self) -> int:
        return len(self.entries)

    def as_dict(self) -> dict[int, complex]:
        return dict(self.entries)


def _bits(x: int, width: int) -> list[int]:
    return [(x >> (width - 1 - i)) & 1 for i in range(width)]


def emit_perm(
    b: CircuitBuilder,
    s1: Sequence[int],
    s2: Sequence[int],
    xq: Sequence[int],
    yq: Sequence[int],
    ancillas: Sequence[int] = (),
) -> None:
    """|x(i)>|z> -> |x(i)>|z ^ y(i)> for the pairs (s1[i], s2[i]).

    With g = floor(m / 2 n1) gadget regions, entries are handled g at a time:
    each region copies x, raises a flag when the copy equals x(i), and the
    flags are folded into the output bits before being uncomputed.
    """
    xq, yq = list(xq), list(yq)
    n1, n2 = len(xq), len(yq)
    if len(s1) != len(s2):
        raise ValidationError("S1 and S2 must have the same length")
    if len(set(s1)) != len(s1) or len(set(s2)) != len(s2):
        raise ValidationError("duplicate strings in S1 or S2")
    ancillas = list(ancillas)
    g = len(ancillas) // (2 * n1) if n1 else 0
    pairs = [(x, y) for x, y in zip(s1, s2) if y]
    if g == 0:
        for x, y in pairs:
            flips = [xq[i] for i, bit in enumerate(_bits(x, n1)) if not bit]
            for q in flips:
                b.x(q)
            for j, bit in enumerate(_bits(y, n2)):
                if bit:
                    spare = [q for q in xq + yq + ancillas if q not in xq and q != yq[j]]
                    emit_mcx(b, xq, yq[j], spare)
            for q in flips:
                b.x(q)
        return
    regions = []
    for r in range(g):
        base = ancillas[r * 2 * n1 : (r + 1) * 2 * n1]
        regions.append((base[:n1], base[n1], base[n1 + 1 :]))
    for start in range(0, len(pairs), g):
        group = pairs[start : start + g]
        used = regions[: len(group)]
        copy_targets = [q for reg in used for q in reg[0]]
        fan = CircuitBuilder()
        emit_fanout(fan, xq, len(group), copy_targets, "interleaved")
        fan = fan.build()
        copies = [reg[0] for reg in used]
        compute = CircuitBuilder()
        for (x, _), reg, cp in zip(group, used, copies):
            flips = [cp[i] for i, bit in enumerate(_bits(x, n1)) if not bit]
            for q in flips:
                compute.x(q)
            emit_mcx(compute, cp, reg[1], reg[2])
            for q in flips:
                compute.x(q)
        compute = compute.build()
        b.extend(fan)
        b.extend(compute)
        for j in range(n2):
            flags = [reg[1] for (_, y), reg in zip(group, used) if _bits(y, n2)[j]]
            emit_parity_fanin(b, flags, yq[j])
        for gate in reversed(compute.gates):
            b.append(gate.inverse())
        for gate in reversed(fan.gates):
            b.append(gate.inverse())


def perm_circuit(s1: Sequence, s2: Sequence, m: int = 0) -> Circuit:
    """Registers: x on [0,n1), y on [n1,n1+n2), m ancillas after.

    S1 and S2 are bit strings; the register widths are their lengths.
    """
    s1s = [str(x) for x in s1]
    s2s = [str(y) for y in s2]
    n1 = len(s1s[0]) if s1s else 0
    n2 = len(s2s[0]) if s2s else 0
    if any(len(x) != n1 for x in s1s) or any(len(y) != n2 for y in s2s):
        raise ValidationError("strings within S1 and within S2 must share a width")
    b = CircuitBuilder()
    b.add_register("x", n1, "input")
    b.add_register("y", n2, "target")
    if m:
        b.add_register("ancilla", m, "ancilla")
    emit_perm(
        b,
        [int(x, 2) for x in s1s],
        [int(y, 2) for y in s2s],
        range(n1),
        range(n1, n1 + n2),
        range(n1 + n2, n1 + n2 + m),
    )
    return b.build()


def prepare_sparse(target: SparseTarget, m: int = 0) -> Circuit:
    """Circuit whose first n qubits end in the sparse target, all others in |0>."""
    n, s = target.n, target.s
    entries = sorted(target.entries)
    if s == 1:
        b = CircuitBuilder()
        b.add_register("input", n, "input")
        for q, bit in enumerate(_bits(entries[0][0], n)):
            if bit:
                b.x(q)
        return b.build()
    n_small = max(1, (s - 1).bit_length())
    if n_small > n:
        raise ValidationError("support larger than the register")
    b = CircuitBuilder()
    b.add_register("input", n, "input")
    if m >= 3 * n:
        b.add_register("scratch", n, "ancilla")
        b.add_register("ancilla", m - n, "ancilla")
        width = n + m
    else:
        b.add_register("scratch", n, "ancilla")
        width = 2 * n
    r1 = list(range(n))
    x = r1[:n_small]
    r2 = list(range(n, 2 * n))
    extra = list(range(2 * n, width))

    dense = np.zeros(1 << n_small, dtype=complex)
    for i, (_, a) in enumerate(entries):
        dense[i] = a
    free = r1[n_small:] + r2 + extra
    sub, _, _ = prepare_state(dense, len(free))
    with b.stage("dense"):
        b.extend(sub, x + free[: sub.num_qubits - n_small])
    ranks = list(range(s))
    strings = [k for k, _ in entries]
    clean = r1[n_small:] + extra
    with b.stage("relabel"):
        emit_perm(b, ranks, strings, x, r2, clean)
    with b.stage("unrank"):
        emit_perm(b, strings, ranks, r2, x, clean)
    with b.stage("move"):
        for q in range(n):
            b.cx(r2[q], r1[q])
        for q in range(n):
            b.cx(r1[q], r2[q])
    return b.build()
