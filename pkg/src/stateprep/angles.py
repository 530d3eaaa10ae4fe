"""Classical preprocessing: amplitude trees, ZYZ angles, UCG diagonals, alphas.

Conventions: qubit 0 is the most significant bit of a basis index, so the
amplitude tree's level j acts on qubit j-1 with qubits 0..j-2 as controls.
A diagonal on j qubits is stored as its 2^j phases theta(x), with x read
MSB-first over those qubits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .errors import ValidationError

NORM_TOL = 1e-10
UNITARY_TOL = 1e-10


def reduce_angle(x):
    """Map angles into (-pi, pi]; works on scalars and arrays."""
    y = np.pi - np.mod(np.pi - np.asarray(x, dtype=np.float64), 2 * np.pi)
    return float(y) if np.ndim(y) == 0 else y


def num_bits(length: int, what: str = "vector") -> int:
    n = int(length).bit_length() - 1
    if length < 1 or (1 << n) != length:
        raise ValidationError(f"{what} length {length} is not a power of two")
    return n


def check_unit(v: np.ndarray, tol: float = NORM_TOL) -> None:
    norm = float(np.linalg.norm(v))
    if not math.isfinite(norm) or abs(norm - 1.0) > tol:
        raise ValidationError(f"state must have unit norm, got {norm!r}")


# ---------------------------------------------------------------------------
# phase vector <-> alpha vector


@dataclass(frozen=True)
class PhaseVector:
    """Phases theta(x) of a diagonal on ``n`` qubits, theta[0] == 0."""

    theta: np.ndarray

    @property
    def n(self) -> int:
        return num_bits(len(self.theta), "phase vector")

    def is_zero(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(reduce_angle(self.theta)) <= tol))


def canonical_phases(theta: Sequence[float]) -> tuple[np.ndarray, float]:
    """Split theta into (theta - theta[0], theta[0])."""
    th = np.asarray(theta, dtype=np.float64)
    return th - th[0], float(th[0])


def alphas_from_thetas(theta) -> np.ndarray:
    """Solve sum_s alpha_s <s,x> = theta(x) for all x, with alpha_0 = 0.

    The inner-product matrix on nonzero indices is (J - W)/2 where W is the
    Walsh-Hadamard matrix, so alpha = -2^{1-n} W theta away from index 0.
    """
    th = np.asarray(theta.theta if isinstance(theta, PhaseVector) else theta, dtype=np.float64)
    n = num_bits(len(th), "phase vector")
    if abs(th[0]) > 1e-12:
        raise ValidationError("theta[0] must be 0; canonicalize first")
    alpha = _kernels.fwht(th) * (-(2.0 ** (1 - n)))
    alpha[0] = 0.0
    return alpha


def thetas_from_alphas(alpha) -> np.ndarray:
    """Forward sum theta(x) = sum_s alpha_s <s,x>."""
    a = np.asarray(alpha, dtype=np.float64)
    num_bits(len(a), "alpha vector")
    return (a.sum() - _kernels.fwht(a)) / 2.0


def thetas_bruteforce(alpha) -> np.ndarray:
    """O(4^n) reference for :func:`thetas_from_alphas`."""
    a = np.asarray(alpha, dtype=np.float64)
    size = len(a)
    out = np.zeros(size)
    for x in range(size):
        out[x] = sum(a[s] for s in range(size) if bin(s & x).count("1") & 1)
    return out


# ---------------------------------------------------------------------------
# single-qubit ZYZ


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


S_MAT = np.diag([1, 1j])
H_MAT = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


class ZYZ(NamedTuple):
    alpha: float
    beta: float
    gamma: float
    delta: float

    def matrix(self) -> np.ndarray:
        """e^{i alpha} Rz(beta) S H Rz(gamma) H S^dag Rz(delta)."""
        mid = S_MAT @ H_MAT @ rz(self.gamma) @ H_MAT @ S_MAT.conj().T
        return np.exp(1j * self.alpha) * (rz(self.beta) @ mid @ rz(self.delta))


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    return u.shape == (2, 2) and np.allclose(u.conj().T @ u, np.eye(2), atol=tol, rtol=0)


def zyz(u) -> ZYZ:
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u):
        raise ValidationError("zyz needs a 2x2 unitary")
    alpha = float(np.angle(np.linalg.det(u))) / 2
    su = u * np.exp(-1j * alpha)
    a, b = su[0, 0], su[1, 0]
    gamma = 2 * math.atan2(abs(b), abs(a))
    if abs(b) < 1e-14:
        beta, delta = -2 * float(np.angle(a)), 0.0
    elif abs(a) < 1e-14:
        beta, delta = 2 * float(np.angle(b)), 0.0
    else:
        pa, pb = float(np.angle(a)), float(np.angle(b))
        beta, delta = pb - pa, -pa - pb
    return ZYZ(alpha, beta, gamma, delta)


# ---------------------------------------------------------------------------
# amplitude tree


@dataclass(frozen=True)
class AmplitudeTree:
    """``params[j-1]`` holds one (alpha, beta, gamma, delta) row per control value.

    Node unitaries are e^{i alpha} Rz(beta) Ry(gamma) with delta = 0, so each
    maps |0> to the normalized pair of child values.
    """

    n: int
    params: tuple[np.ndarray, ...]

    def unitaries(self, j: int) -> np.ndarray:
        """Stacked 2x2 node unitaries of level j (1-based)."""
        p = self.params[j - 1]
        out = np.empty((len(p), 2, 2), dtype=complex)
        for i, row in enumerate(p):
            out[i] = ZYZ(*row).matrix()
        return out

    @property
    def levels(self) -> list[np.ndarray]:
        return [self.unitaries(j) for j in range(1, self.n + 1)]


def prefix_norms(v: np.ndarray, t: int) -> np.ndarray:
    """Norms of the 2^t blocks of v selected by its first t index bits."""
    n = num_bits(len(v))
    block = np.abs(np.asarray(v).reshape(1 << t, 1 << (n - t))) ** 2
    return np.sqrt(block.sum(axis=1))


def amplitude_tree(v, first_level: int = 1) -> AmplitudeTree:
    """Per-node rotations taking |0^n> to v.

    ``first_level`` > 1 skips the top levels (used when a prefix register is
    prepared some other way); their params are left empty.
    """
    v = np.asarray(v, dtype=complex)
    n = num_bits(len(v), "state")
    check_unit(v)
    params = []
    for j in range(1, n + 1):
        if j < first_level:
            params.append(np.zeros((0, 4)))
            continue
        if j < n:
            kids = prefix_norms(v, j).astype(complex)
        else:
            kids = v
        left, right = kids[0::2], kids[1::2]
        rows = np.zeros((len(left), 4))
        for c, (a, b) in enumerate(zip(left, right)):
            r = math.hypot(abs(a), abs(b))
            if r < 1e-15:
                continue
            gamma = 2 * math.atan2(abs(b), abs(a))
            p0 = float(np.angle(a)) if abs(a) > 1e-15 else 0.0
            p1 = float(np.angle(b)) if abs(b) > 1e-15 else 0.0
            if abs(a) <= 1e-15:
                p0 = p1
            if abs(b) <= 1e-15:
                p1 = p0
            rows[c] = ((p0 + p1) / 2, p1 - p0, gamma, 0.0)
        params.append(rows)
    return AmplitudeTree(n, tuple(params))


def apply_tree_dense(tree: AmplitudeTree) -> np.ndarray:
    """Reference: apply V_n ... V_1 to |0^n> with dense block-diagonal matrices."""
    n = tree.n
    state = np.zeros(1 << n, dtype=complex)
    state[0] = 1
    for j in range(1, n + 1):
        us = tree.unitaries(j)
        blocks = np.zeros((1 << j, 1 << j), dtype=complex)
        for c, u in enumerate(us):
            blocks[2 * c : 2 * c + 2, 2 * c : 2 * c + 2] = u
        op = np.kron(blocks, np.eye(1 << (n - j)))
        state = op @ state
    return state


# ---------------------------------------------------------------------------
# uniformly controlled gate -> diagonals


class UCGDiagonals(NamedTuple):
    a1: PhaseVector
    a2: PhaseVector
    a4: PhaseVector
    a6: PhaseVector
    global_phase: float


def _spread(values: np.ndarray, sign: bool) -> np.ndarray:
    """theta(c,b) = values[c] (sign=False) or -/+ values[c]/2 by b (sign=True)."""
    out = np.empty(2 * len(values))
    if sign:
        out[0::2] = -values / 2
        out[1::2] = values / 2
    else:
        out[0::2] = values
        out[1::2] = values
    return out


def ucg_diagonals_from_params(params: np.ndarray) -> UCGDiagonals:
    """Diagonals for the UCG whose node c has ZYZ row params[c]."""
    p = np.asarray(params, dtype=np.float64).reshape(-1, 4)
    phase = 0.0
    vecs = []
    for th in (
        _spread(p[:, 0], False),
        _spread(p[:, 1], True),
        _spread(p[:, 2], True),
        _spread(p[:, 3], True),
    ):
        th, g = canonical_phases(th)
        phase += g
        vecs.append(PhaseVector(th))
    return UCGDiagonals(*vecs, global_phase=phase)


def ucg_to_diagonals(level) -> UCGDiagonals:
    """Factor diag(U_1..U_k) as A1 A2 (I x SH) A4 (I x HS^dag) A6 times a global phase."""
    params = np.array([tuple(zyz(u)) for u in level], dtype=np.float64)
    return ucg_diagonals_from_params(params)


def ucg_dense(level) -> np.ndarray:
    us = list(level)
    out = np.zeros((2 * len(us), 2 * len(us)), dtype=complex)
    for c, u in enumerate(us):
        out[2 * c : 2 * c + 2, 2 * c : 2 * c + 2] = u
    return out


def diagonals_dense(d: UCGDiagonals) -> np.ndarray:
    """Dense product of the six factors (and the global phase)."""
    k = len(d.a1.theta) // 2
    e = lambda pv: np.diag(np.exp(1j * pv.theta))  # noqa: E731
    sh = np.kron(np.eye(k), S_MAT @ H_MAT)
    hs = np.kron(np.eye(k), H_MAT @ S_MAT.conj().T)
    return np.exp(1j * d.global_phase) * (e(d.a1) @ e(d.a2) @ sh @ e(d.a4) @ hs @ e(d.a6))
