"""Hot loops used by the simulators and the angle solver.

Every kernel exists twice: a numba-compiled version and a pure-numpy
version.  The numba path is used by default; set the environment variable
``STATEPREP_PURE_NUMPY=1`` before import to force the numpy path (also used
automatically when numba is not importable).  Both paths are exposed under
explicit names so tests and the benchmark can compare them directly.

Gate kinds are small integers shared with :mod:`stateprep.circuit`.
Sparse-state keys are packed little-endian words: qubit ``q`` lives in word
``q // 64`` at bit ``q % 64``.
"""

from __future__ import annotations

import math
import os

import numpy as np

CNOT, X, H, S, SDG, RZ, RY, PHASE = range(8)

_FLAG = os.environ.get("STATEPREP_PURE_NUMPY", "").strip().lower()
PURE_NUMPY_REQUESTED = _FLAG in ("1", "true", "yes", "on")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not PURE_NUMPY_REQUESTED


def _njit(fn):
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True)(fn)


# ---------------------------------------------------------------------------
# Walsh-Hadamard transform


def fwht_numpy(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform, returned as a new array."""
    a = np.array(a, dtype=np.float64, copy=True)
    size = a.shape[0]
    h = 1
    while h < size:
        view = a.reshape(-1, 2, h)
        lo = view[:, 0, :].copy()
        hi = view[:, 1, :]
        view[:, 0, :] += hi
        view[:, 1, :] = lo - hi
        h *= 2
    return a


@_njit
def _fwht_inplace(a):
    size = a.shape[0]
    h = 1
    while h < size:
        for i in range(0, size, 2 * h):
            for j in range(i, i + h):
                x = a[j]
                y = a[j + h]
                a[j] = x + y
                a[j + h] = x - y
        h *= 2


def fwht_numba(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.float64, copy=True)
    _fwht_inplace(out)
    return out


# ---------------------------------------------------------------------------
# ASAP layering


def asap_depth_numpy(q0: np.ndarray, q1: np.ndarray, num_qubits: int) -> int:
    level = [0] * num_qubits
    depth = 0
    for a, b in zip(q0.tolist(), q1.tolist()):
        if b < 0:
            d = level[a] + 1
            level[a] = d
        else:
            d = max(level[a], level[b]) + 1
            level[a] = d
            level[b] = d
        if d > depth:
            depth = d
    return depth


@_njit
def _asap_depth_nb(q0, q1, num_qubits):
    level = np.zeros(num_qubits, dtype=np.int64)
    depth = 0
    for g in range(q0.shape[0]):
        a = q0[g]
        b = q1[g]
        if b < 0:
            d = level[a] + 1
            level[a] = d
        else:
            d = max(level[a], level[b]) + 1
            level[a] = d
            level[b] = d
        if d > depth:
            depth = d
    return depth


def asap_depth_numba(q0: np.ndarray, q1: np.ndarray, num_qubits: int) -> int:
    return int(_asap_depth_nb(q0, q1, num_qubits))


# ---------------------------------------------------------------------------
# Phase tracking of basis inputs through CNOT/X/Phase/Rz circuits


def track_phases_numpy(kinds, q0, q1, angles, bits):
    """Propagate a batch of basis inputs; ``bits`` is (batch, qubits) uint8.

    Returns (bits_out, phases).  Phases are accumulated but not reduced.
    """
    bits = np.array(bits, dtype=np.uint8, copy=True)
    phase = np.zeros(bits.shape[0], dtype=np.float64)
    for k, a, b, th in zip(kinds.tolist(), q0.tolist(), q1.tolist(), angles.tolist()):
        if k == CNOT:
            bits[:, b] ^= bits[:, a]
        elif k == X:
            bits[:, a] ^= 1
        elif k == PHASE:
            phase += th * bits[:, a]
        elif k == RZ:
            phase += th * (bits[:, a] - 0.5)
        else:
            raise ValueError(f"gate kind {k} is not trackable")
    return bits, phase


@_njit
def _track_phases_nb(kinds, q0, q1, angles, bits, phase):
    for g in range(kinds.shape[0]):
        k = kinds[g]
        a = q0[g]
        if k == CNOT:
            b = q1[g]
            for r in range(bits.shape[0]):
                bits[r, b] ^= bits[r, a]
        elif k == X:
            for r in range(bits.shape[0]):
                bits[r, a] ^= 1
        elif k == PHASE:
            th = angles[g]
            for r in range(bits.shape[0]):
                if bits[r, a]:
                    phase[r] += th
        elif k == RZ:
            half = 0.5 * angles[g]
            for r in range(bits.shape[0]):
                if bits[r, a]:
                    phase[r] += half
                else:
                    phase[r] -= half
        else:
            return g
    return -1


def track_phases_numba(kinds, q0, q1, angles, bits):
    bits = np.array(bits, dtype=np.uint8, copy=True)
    phase = np.zeros(bits.shape[0], dtype=np.float64)
    bad = _track_phases_nb(kinds, q0, q1, angles, bits, phase)
    if bad >= 0:
        raise ValueError(f"gate kind {int(kinds[bad])} is not trackable")
    return bits, phase


# ---------------------------------------------------------------------------
# Sparse statevector evolution


def _diag_factors(kind: int, theta: float) -> tuple[complex, complex]:
    if kind == S:
        return 1.0, 1j
    if kind == SDG:
        return 1.0, -1j
    if kind == PHASE:
        return 1.0, complex(math.cos(theta), math.sin(theta))
    # RZ
    return (
        complex(math.cos(theta / 2), -math.sin(theta / 2)),
        complex(math.cos(theta / 2), math.sin(theta / 2)),
    )


def _branch_matrix(kind: int, theta: float) -> tuple[float, float, float, float]:
    if kind == H:
        r = 1.0 / math.sqrt(2.0)
        return r, r, r, -r
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return c, -s, s, c


def sparse_run_numpy(kinds, q0, q1, angles, keys, amps, cap, prune):
    """Apply a gate list to a sparse state.

    Returns (keys, amps, max_support, first_violation, max_norm_drift).
    ``first_violation`` is the index of the first gate after which the
    support exceeded ``cap`` (or -1; ``cap <= 0`` disables the check).
    """
    keys = np.array(keys, dtype=np.uint64, copy=True)
    amps = np.array(amps, dtype=np.complex128, copy=True)
    max_sup = keys.shape[0]
    violation = -1
    drift = 0.0
    one = np.uint64(1)
    for g, (k, a, b, th) in enumerate(
        zip(kinds.tolist(), q0.tolist(), q1.tolist(), angles.tolist())
    ):
        wa, ba = a >> 6, np.uint64(a & 63)
        if k == CNOT:
            wb, bb = b >> 6, np.uint64(b & 63)
            ctrl = (keys[:, wa] >> ba) & one
            keys[:, wb] ^= ctrl << bb
        elif k == X:
            keys[:, wa] ^= one << ba
        elif k in (S, SDG, PHASE, RZ):
            f0, f1 = _diag_factors(k, th)
            bit = ((keys[:, wa] >> ba) & one).astype(bool)
            amps = amps * np.where(bit, f1, f0)
        else:
            m00, m01, m10, m11 = _branch_matrix(k, th)
            bit = ((keys[:, wa] >> ba) & one).astype(bool)
            base = keys.copy()
            base[:, wa] &= ~(one << ba)
            base = np.ascontiguousarray(base)
            view = base.view(np.dtype((np.void, 8 * base.shape[1]))).ravel()
            _, first, inverse = np.unique(view, return_index=True, return_inverse=True)
            groups = first.shape[0]
            a0 = np.zeros(groups, dtype=np.complex128)
            a1 = np.zeros(groups, dtype=np.complex128)
            np.add.at(a0, inverse[~bit], amps[~bit])
            np.add.at(a1, inverse[bit], amps[bit])
            out0 = m00 * a0 + m01 * a1
            out1 = m10 * a0 + m11 * a1
            gbase = base[first]
            k1 = gbase.copy()
            k1[:, wa] |= one << ba
            keys = np.concatenate([gbase, k1])
            amps = np.concatenate([out0, out1])
            keep = np.abs(amps) > prune
            keys = keys[keep]
            amps = amps[keep]
            drift = max(drift, abs(float(np.vdot(amps, amps).real) - 1.0))
        n_now = keys.shape[0]
        if n_now > max_sup:
            max_sup = n_now
        if cap > 0 and n_now > cap and violation < 0:
            violation = g
    return keys, amps, max_sup, violation, drift


@_njit
def _key_hash(row, skip_word, skip_mask):
    h = np.uint64(14695981039346656037)
    prime = np.uint64(1099511628211)
    for w in range(row.shape[0]):
        v = row[w]
        if w == skip_word:
            v = v & ~skip_mask
        h = (h ^ v) * prime
        h = h ^ (h >> np.uint64(29))
    return h


@_njit
def _same_base(keys, i, j, skip_word, skip_mask):
    for w in range(keys.shape[1]):
        x = keys[i, w]
        y = keys[j, w]
        if w == skip_word:
            x = x & ~skip_mask
            y = y & ~skip_mask
        if x != y:
            return False
    return True


@_njit
def _sparse_run_nb(kinds, q0, q1, angles, keys, amps, cap, prune):
    one = np.uint64(1)
    n = keys.shape[0]
    width = keys.shape[1]
    max_sup = n
    violation = -1
    drift = 0.0
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for g in range(kinds.shape[0]):
        k = kinds[g]
        a = q0[g]
        wa = a >> 6
        ma = one << np.uint64(a & 63)
        if k == CNOT:
            b = q1[g]
            wb = b >> 6
            mb = one << np.uint64(b & 63)
            for r in range(n):
                if keys[r, wa] & ma:
                    keys[r, wb] ^= mb
        elif k == X:
            for r in range(n):
                keys[r, wa] ^= ma
        elif k == S or k == SDG or k == PHASE or k == RZ:
            th = angles[g]
            if k == S:
                f0 = 1.0 + 0.0j
                f1 = 0.0 + 1.0j
            elif k == SDG:
                f0 = 1.0 + 0.0j
                f1 = 0.0 - 1.0j
            elif k == PHASE:
                f0 = 1.0 + 0.0j
                f1 = complex(math.cos(th), math.sin(th))
            else:
                f0 = complex(math.cos(th / 2), -math.sin(th / 2))
                f1 = complex(math.cos(th / 2), math.sin(th / 2))
            for r in range(n):
                if keys[r, wa] & ma:
                    amps[r] *= f1
                else:
                    amps[r] *= f0
        else:
            if k == H:
                m00 = inv_sqrt2
                m01 = inv_sqrt2
                m10 = inv_sqrt2
                m11 = -inv_sqrt2
            else:
                c = math.cos(angles[g] / 2)
                s = math.sin(angles[g] / 2)
                m00 = c
                m01 = -s
                m10 = s
                m11 = c
            hashes = np.empty(n, dtype=np.uint64)
            for r in range(n):
                hashes[r] = _key_hash(keys[r], wa, ma)
            order = np.argsort(hashes)
            new_keys = np.empty((2 * n, width), dtype=np.uint64)
            new_amps = np.empty(2 * n, dtype=np.complex128)
            used = np.zeros(n, dtype=np.bool_)
            out = 0
            start = 0
            while start < n:
                stop = start + 1
                while stop < n and hashes[order[stop]] == hashes[order[start]]:
                    stop += 1
                for p in range(start, stop):
                    i = order[p]
                    if used[i]:
                        continue
                    used[i] = True
                    a0 = 0.0 + 0.0j
                    a1 = 0.0 + 0.0j
                    if keys[i, wa] & ma:
                        a1 += amps[i]
                    else:
                        a0 += amps[i]
                    for p2 in range(p + 1, stop):
                        j = order[p2]
                        if not used[j] and _same_base(keys, i, j, wa, ma):
                            used[j] = True
                            if keys[j, wa] & ma:
                                a1 += amps[j]
                            else:
                                a0 += amps[j]
                    o0 = m00 * a0 + m01 * a1
                    o1 = m10 * a0 + m11 * a1
                    if abs(o0) > prune:
                        for w in range(width):
                            new_keys[out, w] = keys[i, w]
                        new_keys[out, wa] &= ~ma
                        new_amps[out] = o0
                        out += 1
                    if abs(o1) > prune:
                        for w in range(width):
                            new_keys[out, w] = keys[i, w]
                        new_keys[out, wa] |= ma
                        new_amps[out] = o1
                        out += 1
                start = stop
            keys = new_keys[:out].copy()
            amps = new_amps[:out].copy()
            n = out
            norm = 0.0
            for r in range(n):
                norm += amps[r].real * amps[r].real + amps[r].imag * amps[r].imag
            if abs(norm - 1.0) > drift:
                drift = abs(norm - 1.0)
        if n > max_sup:
            max_sup = n
        if cap > 0 and n > cap and violation < 0:
            violation = g
    return keys, amps, max_sup, violation, drift


def sparse_run_numba(kinds, q0, q1, angles, keys, amps, cap, prune):
    keys = np.array(keys, dtype=np.uint64, copy=True)
    amps = np.array(amps, dtype=np.complex128, copy=True)
    k, a, sup, viol, drift = _sparse_run_nb(
        kinds, q0, q1, angles, keys, amps, int(cap), float(prune)
    )
    return k, a, int(sup), int(viol), float(drift)


# ---------------------------------------------------------------------------
# dispatch

if USE_NUMBA:
    fwht = fwht_numba
    asap_depth = asap_depth_numba
    track_phases = track_phases_numba
    sparse_run = sparse_run_numba
else:
    fwht = fwht_numpy
    asap_depth = asap_depth_numpy
    track_phases = track_phases_numpy
    sparse_run = sparse_run_numpy


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
