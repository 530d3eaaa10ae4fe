"""Reusable gadgets: fan-out copies, parity fan-in, phase-parity, MCX, CNOT networks.

Each gadget has an ``emit_*`` form that appends into a :class:`CircuitBuilder`
and a public form that returns a standalone :class:`Circuit`.
"""

from __future__ import annotations

import math
from typing import Sequence

from .circuit import Circuit, CircuitBuilder
from .errors import ValidationError
from .gf2 import BitMatrix, BitVector


def _distinct(*groups: Sequence[int]) -> None:
    seen: set[int] = set()
    for g in groups:
        for q in g:
            if q in seen:
                raise ValidationError(f"qubit {q} appears in more than one role")
            seen.add(q)


def _standalone(b: CircuitBuilder) -> Circuit:
    return b.build()


# ---------------------------------------------------------------------------
# fan-out


def copy_targets(
    n_sources: int, copies: int, targets: Sequence[int], layout: str = "blocked"
) -> list[list[int]]:
    """Per-source list of target qubits under the given layout."""
    if len(targets) != n_sources * copies:
        raise ValidationError(f"need {n_sources * copies} targets, got {len(targets)}")
    if layout == "blocked":
        return [list(targets[i * copies : (i + 1) * copies]) for i in range(n_sources)]
    if layout == "interleaved":
        return [[targets[q * n_sources + i] for q in range(copies)] for i in range(n_sources)]
    raise ValidationError(f"unknown layout {layout!r}")


def emit_fanout(
    b: CircuitBuilder,
    sources: Sequence[int],
    copies: int,
    targets: Sequence[int],
    layout: str = "blocked",
) -> None:
    """Doubling tree: each round every current holder copies into one fresh target."""
    _distinct(sources, targets)
    per = copy_targets(len(sources), copies, targets, layout)
    holders = [[] for _ in sources]
    done = [0] * len(sources)
    while any(d < copies for d in done):
        moves = []
        for i, src in enumerate(sources):
            for h in holders[i] + [src]:
                if done[i] == copies:
                    break
                moves.append((i, h, per[i][done[i]]))
                done[i] += 1
        for i, h, tgt in moves:
            b.cx(h, tgt)
        for i, _, tgt in moves:
            holders[i].append(tgt)


def fanout_copy(
    sources: Sequence[int], copies_per_source: int, targets: Sequence[int], layout: str = "blocked"
) -> Circuit:
    b = CircuitBuilder()
    emit_fanout(b, sources, copies_per_source, targets, layout)
    return _standalone(b)


# ---------------------------------------------------------------------------
# parity


def emit_parity_fanin(b: CircuitBuilder, controls: Sequence[int], target: int) -> None:
    """target ^= XOR(controls) via a balanced fold, CNOT, and unfold."""
    if target in controls:
        raise ValidationError("target must not be a control")
    _distinct(controls)
    if not controls:
        return
    layers = []
    level = list(controls)
    while len(level) > 1:
        pairs = [(level[i + 1], level[i]) for i in range(0, len(level) - 1, 2)]
        layers.append(pairs)
        level = level[0::2]
    for pairs in layers:
        for c, t in pairs:
            b.cx(c, t)
    b.cx(level[0], target)
    for pairs in reversed(layers):
        for c, t in pairs:
            b.cx(c, t)


def parity_fanin(controls: Sequence[int], target: int) -> Circuit:
    b = CircuitBuilder(target + 1)
    emit_parity_fanin(b, controls, target)
    return _standalone(b)


def mask_qubits(s: int | BitVector, qubits: Sequence[int]) -> list[int]:
    """Qubits selected by mask ``s`` (bit i from the left picks qubits[i])."""
    bits = s.bits if isinstance(s, BitVector) else int(s)
    n = len(qubits)
    return [qubits[i] for i in range(n) if (bits >> (n - 1 - i)) & 1]


def emit_phase_parity(
    b: CircuitBuilder,
    s: int | BitVector,
    alpha: float,
    qubits: Sequence[int],
    ancilla: int | None = None,
) -> None:
    """|x> -> e^{i alpha <s,x>} |x>; with ``ancilla`` the parity lands there."""
    sel = mask_qubits(s, qubits)
    if not sel:
        raise ValidationError("phase_parity needs a nonzero mask")
    if len(sel) == 1:
        b.p(alpha, sel[0])
        return
    if ancilla is not None:
        emit_parity_fanin(b, sel, ancilla)
        b.p(alpha, ancilla)
        emit_parity_fanin(b, sel, ancilla)
        return
    pivot = sel[-1]  # lowest set bit of s
    rest = sel[:-1]
    emit_parity_fanin(b, rest, pivot)
    b.p(alpha, pivot)
    emit_parity_fanin(b, rest, pivot)


def phase_parity(
    s: int | BitVector,
    alpha: float,
    use_ancilla: bool = False,
    ancilla: int | None = None,
    n: int | None = None,
) -> Circuit:
    if isinstance(s, BitVector):
        n = s.len
    if n is None:
        raise ValidationError("give the width n for an integer mask")
    if use_ancilla and ancilla is None:
        raise ValidationError("use_ancilla requires an ancilla index")
    b = CircuitBuilder(n + (1 if use_ancilla else 0))
    emit_phase_parity(b, s, alpha, range(n), ancilla if use_ancilla else None)
    return _standalone(b)


# ---------------------------------------------------------------------------
# Toffoli and multi-controlled X


def emit_toffoli(b: CircuitBuilder, a: int, c: int, t: int) -> None:
    """Exact Toffoli in 15 gates (6 CNOTs)."""
    _distinct((a, c, t))
    b.h(t)
    b.cx(c, t)
    b.tdg(t)
    b.cx(a, t)
    b.t(t)
    b.cx(c, t)
    b.tdg(t)
    b.cx(a, t)
    b.t(c)
    b.t(t)
    b.h(t)
    b.cx(a, c)
    b.t(a)
    b.tdg(c)
    b.cx(a, c)


def _emit_cphase(b: CircuitBuilder, c: int, t: int, phi: float) -> None:
    b.p(phi / 2, c)
    b.p(phi / 2, t)
    b.cx(c, t)
    b.p(-phi / 2, t)
    b.cx(c, t)


def _emit_mcphase(b: CircuitBuilder, controls: list[int], t: int, phi: float) -> None:
    """Phase e^{i phi} when all controls and t are 1, without spare qubits."""
    if not controls:
        b.p(phi, t)
        return
    *rest, last = controls
    if not rest:
        _emit_cphase(b, last, t, phi)
        return
    _emit_cphase(b, last, t, phi / 2)
    emit_mcx(b, rest, last, [t])
    _emit_cphase(b, last, t, -phi / 2)
    emit_mcx(b, rest, last, [t])
    _emit_mcphase(b, rest, t, phi / 2)


def _emit_ladder(b: CircuitBuilder, c: list[int], t: int, a: list[int]) -> None:
    k = len(c)

    def top():
        emit_toffoli(b, c[k - 1], a[k - 3], t)

    def down():
        for j in range(k - 3, 0, -1):
            emit_toffoli(b, c[j + 1], a[j - 1], a[j])

    def up():
        for j in range(1, k - 2):
            emit_toffoli(b, c[j + 1], a[j - 1], a[j])

    def base():
        emit_toffoli(b, c[0], c[1], a[0])

    for _ in range(2):
        top()
        down()
        base()
        up()


def emit_mcx(
    b: CircuitBuilder, controls: Sequence[int], target: int, borrowed: Sequence[int] = ()
) -> None:
    """Flip ``target`` iff all controls are 1; borrowed qubits may hold any value."""
    controls = list(controls)
    borrowed = list(borrowed)
    _distinct(controls, [target], borrowed)
    k = len(controls)
    if k == 0:
        b.x(target)
    elif k == 1:
        b.cx(controls[0], target)
    elif k == 2:
        emit_toffoli(b, controls[0], controls[1], target)
    elif len(borrowed) >= k - 2:
        _emit_ladder(b, controls, target, borrowed[: k - 2])
    elif borrowed:
        k1 = (k + 1) // 2
        c1, c2 = controls[:k1], controls[k1:]
        spare = borrowed[0]
        for _ in range(2):
            emit_mcx(b, c1, spare, c2 + [target])
            emit_mcx(b, c2 + [spare], target, c1)
    else:
        b.h(target)
        _emit_mcphase(b, controls, target, math.pi)
        b.h(target)


def mcx(controls: Sequence[int], target: int, borrowed: Sequence[int] = ()) -> Circuit:
    b = CircuitBuilder(1 + max([target, *controls, *borrowed]))
    emit_mcx(b, controls, target, borrowed)
    return _standalone(b)


def emit_swap(b: CircuitBuilder, p: int, q: int) -> None:
    b.cx(p, q)
    b.cx(q, p)
    b.cx(p, q)


# ---------------------------------------------------------------------------
# linear reversible maps


def cnot_ops(m: BitMatrix) -> list[tuple[int, int]]:
    """(control, target) pairs, in time order, realizing |x> -> |Mx>.

    Gauss-Jordan reduces M to I with row ops row_t ^= row_c; the same ops
    read backwards build M from the identity.
    """
    from .gf2 import invert

    invert(m)  # raises SingularMatrix
    n = m.rows
    rows = list(m.data)
    ops: list[tuple[int, int]] = []
    for col in range(n):
        mask = 1 << (n - 1 - col)
        if not rows[col] & mask:
            piv = next(r for r in range(col + 1, n) if rows[r] & mask)
            rows[col] ^= rows[piv]
            ops.append((piv, col))
        for r in range(n):
            if r != col and rows[r] & mask:
                rows[r] ^= rows[col]
                ops.append((col, r))
    return ops[::-1]


def emit_cnot_network(b: CircuitBuilder, m: BitMatrix, qubits: Sequence[int]) -> None:
    if len(qubits) != m.rows:
        raise ValidationError("qubit list must match the matrix size")
    for c, t in cnot_ops(m):
        b.cx(qubits[c], qubits[t])


def cnot_network(m: BitMatrix) -> Circuit:
    b = CircuitBuilder(m.rows)
    emit_cnot_network(b, m, range(m.rows))
    return _standalone(b)
