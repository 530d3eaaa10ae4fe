"""Diagonal unitaries |x> -> e^{i theta(x)} |x> from their alpha coefficients.

Two constructions:

* ``synth_diag_ancilla``: copy and phase registers of m/2 qubits each.  The
  phase register walks the rows of a :class:`GrayTable` so that every
  nonzero mask s is visited once and rotated by alpha_s.
* ``synth_diag_no_ancilla``: the target half of the input walks a sequence
  of full-rank linear maps (a :class:`SuffixCover`), the control half drives
  a Gray walk per target qubit, and the all-zero-suffix strings recurse on
  the control half.

Masks are MSB-first over the given input qubits: bit 1 (leftmost) is
``inputs[0]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .angles import alphas_from_thetas, canonical_phases, num_bits
from .circuit import Circuit, CircuitBuilder, Gate, Kind, invert
from .errors import RegimeError, ValidationError
from .gf2 import BitMatrix, invert as gf2_invert
from .graycode import (
    FkFamily,
    GrayTable,
    SuffixCover,
    fk_families,
    gray_table,
    independent_cover,
    ruler,
)
from .primitives import emit_cnot_network, emit_fanout

ZERO_ANGLE = 1e-12

STAGE_PREFIX_COPY = "prefix-copy"
STAGE_GRAY_INITIAL = "gray-initial"
STAGE_SUFFIX_COPY = "suffix-copy"
STAGE_GRAY_PATH = "gray-path"
STAGE_INVERSE = "inverse"
ANCILLA_STAGES = (
    STAGE_PREFIX_COPY,
    STAGE_GRAY_INITIAL,
    STAGE_SUFFIX_COPY,
    STAGE_GRAY_PATH,
    STAGE_INVERSE,
)


def _as_alpha(alpha, n: int | None = None) -> np.ndarray:
    a = np.asarray(alpha, dtype=np.float64)
    width = num_bits(len(a), "alpha vector")
    if n is not None and width != n:
        raise ValidationError(f"alpha has width {width}, expected {n}")
    return a


def _rotate(b: CircuitBuilder, angle: float, q: int, force: bool) -> None:
    if force or abs(angle) > ZERO_ANGLE:
        b.p(float(angle), q)


@dataclass(frozen=True)
class DiagPlan:
    n: int
    m_used: int
    mode: str
    t: int = 0

    @property
    def r_c(self) -> int:
        return (self.n + 1) // 2

    @property
    def r_t(self) -> int:
        return self.n // 2


def plan_ancilla(n: int, m: int) -> DiagPlan:
    """Ancillas actually used: the largest even value <= min(m, max(2n, 2^n/n))."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    if m < 2:
        raise RegimeError(f"the copy/phase construction needs m >= 2, got {m}")
    cap = max(2 * n, (1 << n) // n)
    m_used = min(m, cap)
    m_used -= m_used % 2
    half = m_used // 2
    t = min(half.bit_length() - 1, n - 1)
    return DiagPlan(n, m_used, "ancilla", t)


# ---------------------------------------------------------------------------
# construction with copy and phase registers


def _gray_initial(
    b: CircuitBuilder, table: GrayTable, inputs, copies, phase, b1: int
) -> None:
    """phase[j] ^= <prefix_j, x> using b1 interleaved copies of x_1..x_t."""
    t, ell = table.t, table.ell
    if t == 0:
        return
    per_step = t * b1
    for start in range(0, ell, per_step):
        for r in range(t):
            for i in range(t):
                blk = (i + r) % t
                lo = start + blk * b1
                rows = [
                    j for j in range(lo, min(lo + b1, ell)) if (j >> i) & 1
                ]
                for q, j in enumerate(rows):
                    b.cx(copies[q * t + i], phase[j])


def emit_diag_ancilla(
    b: CircuitBuilder,
    alpha,
    inputs: Sequence[int],
    ancillas: Sequence[int],
    force_emit: bool = False,
) -> DiagPlan:
    """Append the five-stage circuit; ``ancillas`` must start and end in |0>."""
    inputs = list(inputs)
    n = len(inputs)
    a = _as_alpha(alpha, n)
    if n == 1:
        _rotate(b, a[1], inputs[0], force_emit)
        return DiagPlan(1, 0, "ancilla", 0)
    plan = plan_ancilla(n, len(ancillas))
    half = plan.m_used // 2
    copies = list(ancillas[:half])
    phase = list(ancillas[half : 2 * half])
    t = plan.t
    table = gray_table(n, t)
    ell = table.ell
    width = n - t
    b1 = half // t if t else 0
    b2 = half // width

    copy1 = CircuitBuilder()
    if t:
        emit_fanout(copy1, inputs[:t], b1, copies[: t * b1], "interleaved")
    copy1 = copy1.build()
    u1 = CircuitBuilder()
    _gray_initial(u1, table, inputs, copies, phase, b1)
    u1 = u1.build()
    copy2 = CircuitBuilder()
    if b2:
        emit_fanout(copy2, inputs[t:], b2, copies[: width * b2], "interleaved")
    copy2 = copy2.build()

    with b.stage(STAGE_PREFIX_COPY):
        b.extend(copy1)
    with b.stage(STAGE_GRAY_INITIAL):
        b.extend(u1)
        for j in range(ell):
            s = table.entries[j][0]
            if s:
                _rotate(b, a[s], phase[j], force_emit)
    with b.stage(STAGE_SUFFIX_COPY):
        b.extend(invert(copy1))
        b.extend(copy2)

    holders = []
    for u in range(width):
        holders.append([copies[q * width + u] for q in range(b2)] + [inputs[t + u]])
    gray_cnots: list[Gate] = []
    with b.stage(STAGE_GRAY_PATH):
        for k in range(1, table.columns):
            used: dict[int, int] = {}
            for j in range(ell):
                f = table.flip_index[j][k - 1]
                u = f - t - 1
                slot = used.get(u, 0)
                used[u] = slot + 1
                src = holders[u][slot % len(holders[u])]
                g = Gate(Kind.CNOT, (src, phase[j]))
                gray_cnots.append(g)
                b.append(g)
            for j in range(ell):
                _rotate(b, a[table.entries[j][k]], phase[j], force_emit)
    with b.stage(STAGE_INVERSE):
        b.extend(reversed(gray_cnots))
        b.extend(invert(copy2))
        b.extend(copy1)
        b.extend(invert(u1))
        b.extend(invert(copy1))
    return plan


def synth_diag_ancilla(alpha, n: int, m: int, force_emit: bool = False) -> Circuit:
    """Circuit on n + m_used qubits: input, copy (m_used/2), phase (m_used/2)."""
    plan = plan_ancilla(n, m)
    half = plan.m_used // 2 if n > 1 else 0
    b = CircuitBuilder()
    b.add_register("input", n, "input")
    if half:
        b.add_register("copy", half, "copy")
        b.add_register("phase", half, "phase")
    emit_diag_ancilla(b, alpha, range(n), range(n, n + 2 * half), force_emit)
    return b.build()


# ---------------------------------------------------------------------------
# construction without ancillas


def _emit_small(b: CircuitBuilder, a: np.ndarray, qubits: Sequence[int], force: bool) -> None:
    if len(qubits) == 1:
        _rotate(b, a[1], qubits[0], force)
        return
    q0, q1 = qubits
    _rotate(b, a[1], q1, force)
    _rotate(b, a[2], q0, force)
    if force or abs(a[3]) > ZERO_ANGLE:
        b.cx(q0, q1)
        b.p(float(a[3]), q1)
        b.cx(q0, q1)


def _matrix_step(cover: SuffixCover, k: int) -> BitMatrix:
    """T-hat_k times the inverse of T-hat_{k-1} (1-based k, T-hat_0 = I)."""
    cur = cover.matrix(k - 1)
    if k == 1:
        return cur
    return cur @ gf2_invert(cover.matrix(k - 2))


def emit_gk(
    b: CircuitBuilder,
    k: int,
    cover: SuffixCover,
    fk: FkFamily,
    alpha: np.ndarray,
    qubits: Sequence[int],
    force: bool = False,
) -> None:
    """Generate stage then Gray path stage for the 1-based stage index k."""
    if not 1 <= k <= cover.ell:
        raise ValidationError(f"stage {k} outside [1, {cover.ell}]")
    r_c, r_t = fk.r_c, fk.r_t
    ctrl = list(qubits[:r_c])
    tgt = list(qubits[r_c:])
    with b.stage("generate"):
        emit_cnot_network(b, _matrix_step(cover, k), tgt)
    suffixes = cover.sets[k - 1]
    fires = [fk.first.get(s) == k for s in suffixes]
    with b.stage("gray-path"):
        for i, s in enumerate(suffixes):
            if fires[i]:
                _rotate(b, alpha[s], tgt[i], force)
        cur = [0] * r_t
        for p in range(2, (1 << r_c) + 1):
            for i in range(r_t):
                h = ((ruler(p - 1) + i - 1) % r_c) + 1
                b.cx(ctrl[h - 1], tgt[i])
                cur[i] ^= 1 << (r_c - h)
            for i, s in enumerate(suffixes):
                if fires[i]:
                    _rotate(b, alpha[(cur[i] << r_t) | s], tgt[i], force)
        for i in range(r_t):
            h = r_c - cur[i].bit_length() + 1
            b.cx(ctrl[h - 1], tgt[i])


def build_Gk(k: int, cover: SuffixCover, fk: FkFamily, alpha) -> Circuit:
    a = _as_alpha(alpha, fk.n)
    b = CircuitBuilder(fk.n)
    emit_gk(b, k, cover, fk, a, range(fk.n), force=False)
    return b.build()


def build_reset(cover: SuffixCover) -> Circuit:
    b = CircuitBuilder(cover.r_t)
    emit_cnot_network(b, gf2_invert(cover.matrix(cover.ell - 1)), range(cover.r_t))
    return b.build()


_COVERS: dict[int, SuffixCover] = {}


def cached_cover(r_t: int) -> SuffixCover:
    if r_t not in _COVERS:
        _COVERS[r_t] = independent_cover(r_t)
    return _COVERS[r_t]


def emit_diag_no_ancilla(
    b: CircuitBuilder, alpha, qubits: Sequence[int], force_emit: bool = False
) -> None:
    qubits = list(qubits)
    n = len(qubits)
    a = _as_alpha(alpha, n)
    if n <= 2:
        with b.stage("base"):
            _emit_small(b, a, qubits, force_emit)
        return
    r_c, r_t = (n + 1) // 2, n // 2
    cover = cached_cover(r_t)
    fk = fk_families(cover, r_c)
    for k in range(1, cover.ell + 1):
        emit_gk(b, k, cover, fk, a, qubits, force_emit)
    with b.stage("reset"):
        emit_cnot_network(b, gf2_invert(cover.matrix(cover.ell - 1)), qubits[r_c:])
    sub = a[:: 1 << r_t]
    emit_diag_no_ancilla(b, sub, qubits[:r_c], force_emit)


def synth_diag_no_ancilla(alpha, n: int, force_emit: bool = False) -> Circuit:
    b = CircuitBuilder()
    b.add_register("control", (n + 1) // 2 if n > 2 else n, "control")
    if n > 2:
        b.add_register("target", n // 2, "target")
    emit_diag_no_ancilla(b, alpha, range(n), force_emit)
    return b.build()


# ---------------------------------------------------------------------------
# convenience over phase vectors


def emit_diagonal(
    b: CircuitBuilder,
    theta,
    inputs: Sequence[int],
    ancillas: Sequence[int] = (),
    force_emit: bool = False,
) -> float:
    """Append diag(e^{i theta}) on ``inputs``; returns the global phase theta[0]."""
    th, g = canonical_phases(theta)
    if not force_emit and np.all(np.abs(th) <= ZERO_ANGLE):
        return g
    a = alphas_from_thetas(th)
    if len(ancillas) >= 2 and len(inputs) >= 2:
        emit_diag_ancilla(b, a, inputs, ancillas, force_emit)
    else:
        emit_diag_no_ancilla(b, a, inputs, force_emit)
    return g


def synth_diag(theta, m: int = 0, force_emit: bool = False) -> tuple[Circuit, float]:
    """Diagonal from raw phases; dispatches on the ancilla budget.

    Returns the circuit and the dropped global phase theta[0].
    """
    th = np.asarray(theta, dtype=np.float64)
    n = num_bits(len(th), "phase vector")
    th0, g = canonical_phases(th)
    a = alphas_from_thetas(th0)
    if m >= 2 and n >= 2:
        return synth_diag_ancilla(a, n, m, force_emit), g
    return synth_diag_no_ancilla(a, n, force_emit), g
