"""State preparation: UCG pipeline, unary loader + encoding transform, dispatch.

The UCG pipeline prepares v level by level: level j rotates qubit j-1
conditioned on qubits 0..j-2, and each uniformly controlled gate is
realized by two diagonals around an H/S sandwich on the target.  With a
large ancilla budget the first t levels are replaced by a unary loader on
2^t wires followed by a unary-to-binary transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .angles import (
    amplitude_tree,
    check_unit,
    num_bits,
    prefix_norms,
    reduce_angle,
    ucg_diagonals_from_params,
    ucg_to_diagonals,
    zyz,
)
from .circuit import Circuit, CircuitBuilder, DepthReport, depth
from .diag import emit_diagonal, plan_ancilla
from .errors import RegimeError, ValidationError
from .primitives import emit_fanout, emit_mcx, emit_parity_fanin, emit_toffoli

STRATEGIES = ("auto", "ucg", "hybrid", "no_ancilla")


@dataclass(frozen=True)
class RegimeDecision:
    chosen: str
    t: int
    rationale: str
    m_used: int = 0


def _ceil_log2(x: int) -> int:
    return max(0, (x - 1).bit_length())


def hybrid_width(m: int, n: int) -> int:
    """Prefix width t = min(floor(log2(m/3)), n); 0 if m < 3."""
    if m < 3:
        return 0
    return min((m // 3).bit_length() - 1, n)


def _hybrid_ancillas(n: int, m: int, t: int) -> int:
    m_ucg = plan_ancilla(n, m).m_used if t < n else 0
    return max(3 * (1 << t) - t, m_ucg)


def decide_regime(n: int, m: int, strategy: str = "auto") -> RegimeDecision:
    strategy = strategy.replace("-", "_")
    if strategy not in STRATEGIES:
        raise ValidationError(f"unknown strategy {strategy!r}")
    t = hybrid_width(m, n)
    if strategy == "no_ancilla":
        return RegimeDecision("no_ancilla", 0, "requested", 0)
    if strategy == "ucg":
        if m < 2:
            raise RegimeError(f"ucg with ancillas needs m >= 2, got {m}")
        return RegimeDecision("ucg_ancilla", 0, "requested", plan_ancilla(n, m).m_used)
    if strategy == "hybrid":
        if t < 2:
            raise RegimeError(f"hybrid needs m >= 12 (t >= 2), got m={m}")
        return RegimeDecision("hybrid", t, "requested", _hybrid_ancillas(n, m, t))
    if m < 2 * n or n < 2:
        return RegimeDecision("no_ancilla", 0, f"m={m} < 2n={2 * n}", 0)
    threshold = max(2, n - 2 * _ceil_log2(n))
    if t >= threshold:
        return RegimeDecision(
            "hybrid", t, f"floor(log2(m/3))={t} >= {threshold}", _hybrid_ancillas(n, m, t)
        )
    return RegimeDecision(
        "ucg_ancilla", 0, f"2n <= m and t={t} < {threshold}", plan_ancilla(n, m).m_used
    )


# ---------------------------------------------------------------------------
# global phase and UCG levels


def emit_global_phase(b: CircuitBuilder, phi: float, q: int) -> None:
    """e^{i phi} as Phase(2 phi) Rz(-2 phi) on one qubit."""
    phi = reduce_angle(phi)
    if abs(phi) <= 1e-15:
        return
    with b.stage("global-phase"):
        b.p(2 * phi, q)
        b.rz(-2 * phi, q)


def emit_ucg(
    b: CircuitBuilder,
    params: np.ndarray,
    qubits: Sequence[int],
    ancillas: Sequence[int] = (),
    force_emit: bool = False,
) -> float:
    """Append one uniformly controlled gate; target is qubits[-1]. Returns its global phase."""
    d = ucg_diagonals_from_params(params)
    tgt = qubits[-1]
    phase = d.global_phase
    phase += emit_diagonal(b, d.a6.theta, qubits, ancillas, force_emit)
    with b.stage("ucg-basis"):
        b.sdg(tgt)
        b.h(tgt)
    phase += emit_diagonal(b, d.a4.theta, qubits, ancillas, force_emit)
    with b.stage("ucg-basis"):
        b.h(tgt)
        b.s(tgt)
    phase += emit_diagonal(b, d.a1.theta + d.a2.theta, qubits, ancillas, force_emit)
    return phase


def ucg_circuit(level_unitaries, j: int | None = None, m: int = 0) -> Circuit:
    """V_j = diag(U_1..U_{2^{j-1}}) on qubits 0..j-1, using up to m ancillas after them."""
    us = list(level_unitaries)
    jj = num_bits(len(us), "level") + 1
    if j is not None and j != jj:
        raise ValidationError(f"level {j} needs {1 << (j - 1)} unitaries, got {len(us)}")
    params = np.array([tuple(zyz(u)) for u in us], dtype=np.float64)
    m_used = plan_ancilla(jj, m).m_used if m >= 2 and jj >= 2 else 0
    b = CircuitBuilder()
    b.add_register("input", jj, "input")
    if m_used:
        b.add_register("ancilla", m_used, "ancilla")
    g = emit_ucg(b, params, list(range(jj)), list(range(jj, jj + m_used)))
    emit_global_phase(b, g, 0)
    return b.build()


# ---------------------------------------------------------------------------
# unary loader


def emit_unary_loader(b: CircuitBuilder, v, wires: Sequence[int]) -> None:
    """|0...0> -> sum_k v_k |e_k> on 2^t wires (binary splitting tree)."""
    v = np.asarray(v, dtype=complex)
    if len(wires) != len(v):
        raise ValidationError("need one wire per amplitude")
    mag = np.abs(v)
    with b.stage("unary-load"):
        b.x(wires[0])
        span = len(v)
        while span > 1:
            half = span // 2
            for w in range(0, len(v), span):
                left = float(np.linalg.norm(mag[w : w + half]))
                right = float(np.linalg.norm(mag[w + half : w + span]))
                if right <= 1e-15:
                    continue
                theta = math.atan2(right, left)
                a, c = wires[w], wires[w + half]
                b.ry(theta, c)
                b.cx(a, c)
                b.ry(-theta, c)
                b.cx(a, c)
                b.cx(c, a)
            span = half
        for k, amp in enumerate(v):
            if abs(amp) > 1e-15:
                ph = float(np.angle(amp))
                if abs(ph) > 1e-15:
                    b.p(ph, wires[k])


def unary_qsp(v) -> Circuit:
    v = np.asarray(v, dtype=complex)
    num_bits(len(v), "state")
    check_unit(v)
    b = CircuitBuilder()
    b.add_register("unary", len(v), "input")
    emit_unary_loader(b, v, range(len(v)))
    return b.build()


# ---------------------------------------------------------------------------
# unary -> binary


def binary_scratch(k: int) -> int:
    """Clean qubits used by :func:`_unary_to_binary` for a k-bit output."""
    size = 1 << k
    return max((k - 1) * size, (size - 1) * k + size * max(0, k - 2))


def _unary_to_binary(
    b: CircuitBuilder, unary: list[int], out: list[int], pool: list[int]
) -> None:
    """|e_s>|0> -> |0>|s> for k = len(out) bits; ``pool`` is clean scratch."""
    k = len(out)
    size = len(unary)
    if k == 0:
        b.x(unary[0])  # a one-wire unary register is always |1>
        return
    # k copies of the unary register, one parity per output bit
    flat = pool[: (k - 1) * size]
    reg = [unary] + [flat[c * size : (c + 1) * size] for c in range(k - 1)]
    if k > 1:
        emit_fanout(b, unary, k - 1, flat, "interleaved")
    for j in range(k):
        sel = [reg[j][s] for s in range(size) if (s >> (k - 1 - j)) & 1]
        emit_parity_fanin(b, sel, out[j])
    if k > 1:
        _emit_unfan(b, unary, k - 1, flat, "interleaved")
    # one copy of the binary register per wire, then an equality test per wire
    rest = pool[: (size - 1) * k]
    zc = [out] + [rest[c * k : (c + 1) * k] for c in range(size - 1)]
    spare = pool[(size - 1) * k :]
    emit_fanout(b, out, size - 1, rest, "interleaved")
    need = max(0, k - 2)
    for s in range(size):
        if len(spare) >= need * (s + 1):
            borrowed = spare[need * s : need * (s + 1)]
        else:
            borrowed = [q for q in unary if q != unary[s]][:need]
        flips = [zc[s][i] for i in range(k) if not (s >> (k - 1 - i)) & 1]
        for q in flips:
            b.x(q)
        emit_mcx(b, zc[s], unary[s], borrowed)
        for q in flips:
            b.x(q)
    _emit_unfan(b, out, size - 1, rest, "interleaved")


def _emit_unfan(b, sources, copies, targets, layout="blocked"):
    sub = CircuitBuilder()
    emit_fanout(sub, sources, copies, targets, layout)
    for g in reversed(sub.build().gates):
        b.append(g.inverse())


def emit_encoding_transform(b: CircuitBuilder, t: int, qubits: Sequence[int]) -> None:
    """|e_i> on qubits[0:2^t] (rest zero) -> |i> MSB-first on qubits[0:t]."""
    if t < 1:
        raise ValidationError("encoding transform needs t >= 1")
    size = 1 << t
    if len(qubits) < 3 * size:
        raise ValidationError(f"need {3 * size} qubits, got {len(qubits)}")
    qubits = list(qubits)
    a = qubits[:size]
    bb = qubits[size : 3 * size]
    hi, lo = (t + 1) // 2, t // 2
    ns, nu = 1 << hi, 1 << lo
    b1 = bb[:ns]
    b2 = bb[ns : ns + nu]
    with b.stage("enc-split"):
        for s in range(ns):
            emit_parity_fanin(b, [a[s * nu + u] for u in range(nu)], b1[s])
        for u in range(nu):
            emit_parity_fanin(b, [a[s * nu + u] for s in range(ns)], b2[u])
    with b.stage("enc-clear"):
        rest = bb[ns + nu :]
        c1 = rest[: ns * (nu - 1)]
        c2 = rest[ns * (nu - 1) : ns * (nu - 1) + nu * (ns - 1)]
        if nu > 1:
            emit_fanout(b, b1, nu - 1, c1, "blocked")
        if ns > 1:
            emit_fanout(b, b2, ns - 1, c2, "blocked")
        for s in range(ns):
            for u in range(nu):
                p = b1[s] if u == 0 else c1[s * (nu - 1) + u - 1]
                q = b2[u] if s == 0 else c2[u * (ns - 1) + s - 1]
                emit_toffoli(b, p, q, a[s * nu + u])
        if ns > 1:
            _emit_unfan(b, b2, ns - 1, c2)
        if nu > 1:
            _emit_unfan(b, b1, nu - 1, c1)
    with b.stage("enc-binary"):
        pool = a[t:] + bb[ns + nu :]
        need_s = binary_scratch(hi)
        _unary_to_binary(b, b1, a[:hi], pool[:need_s])
        _unary_to_binary(b, b2, a[hi:t], pool[need_s:])


def encoding_transform(t: int) -> Circuit:
    b = CircuitBuilder()
    b.add_register("unary", 1 << t, "input")
    b.add_register("work", 2 << t, "ancilla")
    emit_encoding_transform(b, t, range(3 << t))
    return b.build()


# ---------------------------------------------------------------------------
# full pipelines


def _emit_ucg_levels(
    b: CircuitBuilder,
    tree,
    first: int,
    n: int,
    ancillas: Sequence[int],
    force_emit: bool,
) -> float:
    phase = 0.0
    for j in range(first, n + 1):
        with b.stage(None):
            phase += emit_ucg(b, tree.params[j - 1], list(range(j)), ancillas, force_emit)
    return phase


def hybrid_qsp(v, m: int, force_emit: bool = False) -> Circuit:
    """Unary loader + transform for the first t qubits, UCG levels for the rest."""
    v = np.asarray(v, dtype=complex)
    n = num_bits(len(v), "state")
    check_unit(v)
    t = hybrid_width(m, n)
    if t < 2:
        raise RegimeError(f"hybrid needs t = floor(log2(m/3)) >= 2, got m={m}")
    work = 3 * (1 << t)
    m_ucg = plan_ancilla(n, m).m_used if t < n else 0
    n_anc = max(work - t, m_ucg)
    b = CircuitBuilder()
    b.add_register("input", n, "input")
    b.add_register("ancilla", n_anc, "ancilla")
    anc = list(range(n, n + n_anc))
    local = list(range(t)) + anc[: work - t]
    prefix = v if t == n else prefix_norms(v, t)
    emit_unary_loader(b, prefix, local[: 1 << t])
    emit_encoding_transform(b, t, local)
    if t < n:
        tree = amplitude_tree(v, first_level=t + 1)
        phase = _emit_ucg_levels(b, tree, t + 1, n, anc[:m_ucg], force_emit)
        emit_global_phase(b, phase, 0)
    return b.build()


def _prepare_ucg(v, n: int, m_used: int, force_emit: bool) -> Circuit:
    b = CircuitBuilder()
    b.add_register("input", n, "input")
    if m_used:
        b.add_register("ancilla", m_used, "ancilla")
    tree = amplitude_tree(v)
    anc = list(range(n, n + m_used))
    phase = _emit_ucg_levels(b, tree, 1, n, anc, force_emit)
    emit_global_phase(b, phase, 0)
    return b.build()


def prepare_state(
    v, m: int = 0, strategy: str = "auto", force_emit: bool = False
) -> tuple[Circuit, RegimeDecision, DepthReport]:
    """Circuit mapping |0> to |v> (ancillas back to |0>), its regime, and metrics."""
    v = np.asarray(v, dtype=complex)
    n = num_bits(len(v), "state")
    check_unit(v)
    if m < 0:
        raise ValidationError("ancilla budget must be non-negative")
    if n == 0:
        raise ValidationError("state must have at least 2 amplitudes")
    dec = decide_regime(n, m, strategy)
    if dec.chosen == "hybrid":
        circ = hybrid_qsp(v, m, force_emit)
    elif dec.chosen == "ucg_ancilla":
        circ = _prepare_ucg(v, n, dec.m_used, force_emit)
    else:
        circ = _prepare_ucg(v, n, 0, force_emit)
    return circ, dec, depth(circ)
