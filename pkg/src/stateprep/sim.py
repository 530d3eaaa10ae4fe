"""Verification engines: sparse statevector, basis phase tracker, dense reference.

Basis-index convention: qubit 0 is the most significant bit, so on a
``w``-qubit register the index of a basis state is sum_q b_q 2^(w-1-q).
Sparse keys store qubit q in word q // 64 at bit q % 64 instead, which is
independent of the register width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .circuit import Circuit, Kind
from .errors import SupportExceeded, ValidationError

PRUNE = 1e-14
DENSE_MAX_QUBITS = 24
NORM_DRIFT_TOL = 1e-8


def _words(width: int) -> int:
    return max(1, (width + 63) // 64)


@dataclass
class SparseState:
    """Finitely supported state; ``keys[i]`` packs the bits of basis state i."""

    n: int
    keys: np.ndarray
    amps: np.ndarray
    max_support: int = 0
    norm_drift: float = 0.0
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        self.keys = np.ascontiguousarray(self.keys, dtype=np.uint64).reshape(-1, _words(self.n))
        self.amps = np.ascontiguousarray(self.amps, dtype=np.complex128).ravel()
        if self.keys.shape[0] != self.amps.shape[0]:
            raise ValidationError("keys and amplitudes differ in length")
        self.max_support = max(self.max_support, len(self.amps))

    @property
    def support(self) -> int:
        return len(self.amps)

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amps, self.amps).real))

    @classmethod
    def basis(cls, n: int, bits: int | str = 0) -> "SparseState":
        if isinstance(bits, str):
            bits = int(bits, 2) if bits else 0
            return cls.from_amplitudes(n, {bits: 1.0})
        return cls.from_amplitudes(n, {int(bits): 1.0})

    @classmethod
    def from_amplitudes(
        cls, n: int, amps: Mapping[int, complex], n_in: int | None = None
    ) -> "SparseState":
        """Basis indices are MSB-first over the first ``n_in`` qubits (default all)."""
        n_in = n if n_in is None else n_in
        items = [(k, complex(a)) for k, a in amps.items() if a != 0]
        keys = np.zeros((len(items), _words(n)), dtype=np.uint64)
        for r, (k, _) in enumerate(items):
            if k < 0 or k >> n_in:
                raise ValidationError(f"index {k} does not fit in {n_in} qubits")
            for q in range(n_in):
                if (k >> (n_in - 1 - q)) & 1:
                    keys[r, q >> 6] |= np.uint64(1 << (q & 63))
        return cls(n, keys, np.array([a for _, a in items], dtype=complex))

    @classmethod
    def from_vector(cls, v, width: int | None = None) -> "SparseState":
        """Embed a dense vector on the first log2(len v) qubits of ``width``."""
        v = np.asarray(v, dtype=complex)
        n_in = int(len(v)).bit_length() - 1
        width = n_in if width is None else width
        nz = np.flatnonzero(np.abs(v) > 0)
        return cls.from_amplitudes(width, {int(k): v[k] for k in nz}, n_in)

    def index_of(self, row: int, qubits: Sequence[int] | None = None) -> int:
        """MSB-first integer of the chosen qubits (default all) in basis row ``row``."""
        qubits = range(self.n) if qubits is None else qubits
        key = self.keys[row]
        out = 0
        for q in qubits:
            out = (out << 1) | int((key[q >> 6] >> np.uint64(q & 63)) & np.uint64(1))
        return out

    def to_dict(self, qubits: Sequence[int] | None = None) -> dict[int, complex]:
        out: dict[int, complex] = {}
        for r in range(self.support):
            k = self.index_of(r, qubits)
            out[k] = out.get(k, 0) + complex(self.amps[r])
        return out

    def to_vector(self) -> np.ndarray:
        if self.n > DENSE_MAX_QUBITS:
            raise ValidationError(f"dense export capped at {DENSE_MAX_QUBITS} qubits")
        v = np.zeros(1 << self.n, dtype=complex)
        for k, a in self.to_dict().items():
            v[k] += a
        return v

    def split(self, n_in: int) -> tuple[dict[int, complex], float]:
        """Amplitudes with qubits >= n_in all zero, and the mass elsewhere."""
        clean: dict[int, complex] = {}
        leaked = 0.0
        for r in range(self.support):
            full = self.keys[r]
            hi = 0
            for w in range(full.shape[0]):
                word = int(full[w])
                if w == n_in >> 6:
                    word >>= n_in & 63
                elif w < n_in >> 6:
                    word = 0
                hi |= word
            a = complex(self.amps[r])
            if hi:
                leaked += abs(a) ** 2
            else:
                k = self.index_of(r, range(n_in))
                clean[k] = clean.get(k, 0) + a
        return clean, leaked


def run_sparse(
    circuit: Circuit,
    init: SparseState | None = None,
    cap: int = 0,
    prune: float = PRUNE,
    backend: str | None = None,
) -> SparseState:
    """Apply ``circuit`` gate by gate; raises :class:`SupportExceeded` past ``cap``."""
    if init is None:
        init = SparseState.basis(circuit.num_qubits, 0)
    if init.n != circuit.num_qubits:
        raise ValidationError(f"state width {init.n} != circuit width {circuit.num_qubits}")
    kinds, q0, q1, ang = circuit.arrays()
    run = _pick(backend, _kernels.sparse_run_numba, _kernels.sparse_run_numpy, _kernels.sparse_run)
    keys, amps, sup, viol, drift = run(kinds, q0, q1, ang, init.keys, init.amps, cap, prune)
    if viol >= 0:
        raise SupportExceeded(viol, sup, cap)
    if drift > NORM_DRIFT_TOL and abs(init.norm() - 1) < NORM_DRIFT_TOL:
        raise ValidationError(f"norm drifted by {drift:.3g} during simulation")
    return SparseState(circuit.num_qubits, keys, amps, max(sup, init.max_support), drift)


def _pick(backend, nb, npy, default):
    if backend is None:
        return default
    if backend == "numba":
        return nb
    if backend == "numpy":
        return npy
    raise ValidationError(f"unknown backend {backend!r}")


# ---------------------------------------------------------------------------
# phase tracker


@dataclass(frozen=True)
class PhaseTrack:
    bits: int
    phase: float


TRACKABLE = frozenset({Kind.CNOT, Kind.X, Kind.PHASE, Kind.RZ})


def _check_trackable(circuit: Circuit) -> None:
    for i, g in enumerate(circuit.gates):
        if g.kind not in TRACKABLE:
            raise ValidationError(f"gate {i} ({g}) is not a CNOT/X/Phase/Rz gate")


def basis_bits(xs: Iterable[int], n_in: int, width: int) -> np.ndarray:
    """Rows of qubit bits for inputs x (MSB-first on the first n_in qubits)."""
    xs = list(xs)
    bits = np.zeros((len(xs), width), dtype=np.uint8)
    arr = np.array(xs, dtype=object)
    for q in range(n_in):
        bits[:, q] = [(int(x) >> (n_in - 1 - q)) & 1 for x in arr]
    return bits


def bits_to_ints(bits: np.ndarray) -> list[int]:
    out = []
    for row in bits:
        v = 0
        for b in row.tolist():
            v = (v << 1) | b
        out.append(v)
    return out


def track_batch(
    circuit: Circuit, bits: np.ndarray, backend: str | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Classical propagation of many basis inputs; phases reduced into (-pi, pi]."""
    _check_trackable(circuit)
    kinds, q0, q1, ang = circuit.arrays()
    fn = _pick(
        backend, _kernels.track_phases_numba, _kernels.track_phases_numpy, _kernels.track_phases
    )
    out, phase = fn(kinds, q0, q1, ang, np.ascontiguousarray(bits, dtype=np.uint8))
    return out, np.pi - np.mod(np.pi - phase, 2 * np.pi)


def run_phase_tracker(circuit: Circuit, x: int, n_in: int | None = None) -> PhaseTrack:
    """Track one basis input; ``x`` is MSB-first over the first ``n_in`` qubits."""
    width = circuit.num_qubits
    n_in = width if n_in is None else n_in
    out, phase = track_batch(circuit, basis_bits([x], n_in, width))
    return PhaseTrack(bits_to_ints(out)[0], float(phase[0]))


def phase_error(a, b) -> np.ndarray:
    """Distance between phases modulo 2 pi."""
    d = np.mod(np.asarray(a) - np.asarray(b) + np.pi, 2 * np.pi) - np.pi
    return np.abs(d)


# ---------------------------------------------------------------------------
# dense reference


def _gate_matrix(kind: Kind, angle: float | None) -> np.ndarray:
    if kind is Kind.X:
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if kind is Kind.H:
        return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    if kind is Kind.S:
        return np.diag([1, 1j])
    if kind is Kind.SDG:
        return np.diag([1, -1j])
    if kind is Kind.RZ:
        return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])
    if kind is Kind.RY:
        c, s = math.cos(angle / 2), math.sin(angle / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind is Kind.PHASE:
        return np.diag([1, np.exp(1j * angle)])
    raise ValidationError(f"no 2x2 matrix for {kind}")


def run_dense(circuit: Circuit, state=None) -> np.ndarray:
    """Apply to a dense state; a 2-D input is a batch of states (rows)."""
    n = circuit.num_qubits
    if n > DENSE_MAX_QUBITS:
        raise ValidationError(f"dense simulation capped at {DENSE_MAX_QUBITS} qubits")
    if state is None:
        state = np.zeros(1 << n, dtype=complex)
        state[0] = 1
    state = np.asarray(state, dtype=complex)
    batched = state.ndim == 2
    psi = state.reshape((-1,) + (2,) * n).copy()
    for g in circuit.gates:
        if g.kind is Kind.CNOT:
            c, t = g.qubits
            idx = [slice(None)] * (n + 1)
            idx[c + 1] = 1
            sub = psi[tuple(idx)]
            t_ax = t if t < c else t - 1
            psi[tuple(idx)] = np.flip(sub, axis=t_ax + 1)
        else:
            q = g.qubits[0] + 1
            psi = np.moveaxis(np.tensordot(_gate_matrix(g.kind, g.angle), psi, axes=([1], [q])), 0, q)
    out = psi.reshape(state.shape if batched else (1 << n,))
    return out


def unitary_dense(circuit: Circuit) -> np.ndarray:
    size = 1 << circuit.num_qubits
    cols = run_dense(circuit, np.eye(size, dtype=complex))
    return cols.T


# ---------------------------------------------------------------------------
# fidelity


def _as_dict(s) -> dict:
    if isinstance(s, SparseState):
        out: dict = {}
        for r in range(s.support):
            k = s.keys[r].tobytes()
            out[k] = out.get(k, 0) + complex(s.amps[r])
        return out
    raise ValidationError("fidelity expects SparseState or dense arrays")


def fidelity(a, b) -> float:
    """|<a|b>| for two SparseStates or two dense vectors of equal width."""
    if isinstance(a, SparseState) and isinstance(b, SparseState):
        if a.n != b.n:
            raise ValidationError(f"width mismatch {a.n} vs {b.n}")
        da, db = _as_dict(a), _as_dict(b)
        ip = sum(np.conj(amp) * db[k] for k, amp in da.items() if k in db)
        return float(min(1.0, abs(ip)))
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.shape != b.shape:
        raise ValidationError(f"width mismatch {a.shape} vs {b.shape}")
    return float(min(1.0, abs(np.vdot(a, b))))


def dict_fidelity(target: Mapping[int, complex], got: Mapping[int, complex]) -> float:
    ip = sum(np.conj(a) * got.get(k, 0) for k, a in target.items())
    return float(min(1.0, abs(ip)))
