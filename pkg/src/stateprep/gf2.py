"""Dense GF(2) vectors and matrices packed into Python integers.

Bit order follows the rest of the package: position ``i`` of a length-``L``
vector is bit ``L-1-i`` of the packed integer, so ``str(v)`` reads the
positions left to right and ``int(v)`` is the usual MSB-first value.
Row XOR is a single big-int operation, which is fast enough for the few
thousand bits we ever need.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import SingularMatrix, ValidationError


def popcount(x: int) -> int:
    return bin(x).count("1")


def dot(s: int, x: int) -> int:
    """Inner product <s,x> over GF(2) of two packed masks."""
    return popcount(s & x) & 1


@dataclass(frozen=True)
class BitVector:
    len: int
    bits: int = 0

    def __post_init__(self):
        if self.len < 0:
            raise ValidationError("length must be non-negative")
        if self.bits < 0 or self.bits >> self.len:
            raise ValidationError(f"bits {self.bits} do not fit in {self.len} positions")

    @classmethod
    def from_str(cls, s: str) -> "BitVector":
        if s and set(s) - {"0", "1"}:
            raise ValidationError(f"not a bit string: {s!r}")
        return cls(len(s), int(s, 2) if s else 0)

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "BitVector":
        return cls.from_str("".join("1" if b else "0" for b in bits))

    @classmethod
    def unit(cls, length: int, i: int) -> "BitVector":
        """e_i with a 0-based position."""
        if not 0 <= i < length:
            raise IndexError(i)
        return cls(length, 1 << (length - 1 - i))

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.len:
            raise IndexError(i)
        return (self.bits >> (self.len - 1 - i)) & 1

    def __len__(self) -> int:
        return self.len

    def __int__(self) -> int:
        return self.bits

    def __str__(self) -> str:
        return format(self.bits, f"0{self.len}b") if self.len else ""

    def __xor__(self, other: "BitVector") -> "BitVector":
        self._check(other)
        return BitVector(self.len, self.bits ^ other.bits)

    def dot(self, other: "BitVector") -> int:
        self._check(other)
        return dot(self.bits, other.bits)

    def weight(self) -> int:
        return popcount(self.bits)

    def _check(self, other: "BitVector") -> None:
        if other.len != self.len:
            raise ValidationError(f"length mismatch {self.len} vs {other.len}")


@dataclass(frozen=True)
class BitMatrix:
    """Row-major GF(2) matrix; each row is a packed ``cols``-bit integer."""

    rows: int
    cols: int
    data: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "data", tuple(int(r) for r in self.data))
        if len(self.data) != self.rows:
            raise ValidationError("row count does not match data")
        for r in self.data:
            if r < 0 or r >> self.cols:
                raise ValidationError(f"row {r} does not fit in {self.cols} columns")

    @classmethod
    def from_rows(cls, rows: Iterable, cols: int | None = None) -> "BitMatrix":
        """Build from bit strings, bit lists, BitVectors or packed ints (ints need ``cols``)."""
        packed = []
        width = cols
        for r in rows:
            if isinstance(r, str):
                v = BitVector.from_str(r)
            elif isinstance(r, BitVector):
                v = r
            elif isinstance(r, int):
                if cols is None:
                    raise ValidationError("packed integer rows need an explicit column count")
                v = BitVector(cols, r)
            else:
                v = BitVector.from_bits(list(r))
            if width is None:
                width = v.len
            elif v.len != width:
                raise ValidationError("ragged rows")
            packed.append(v.bits)
        return cls(len(packed), width or 0, tuple(packed))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, n, tuple(1 << (n - 1 - i) for i in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, (0,) * rows)

    @classmethod
    def random(cls, rows: int, cols: int, rng: random.Random) -> "BitMatrix":
        return cls(rows, cols, tuple(rng.getrandbits(cols) if cols else 0 for _ in range(rows)))

    @classmethod
    def random_invertible(cls, n: int, rng: random.Random) -> "BitMatrix":
        while True:
            m = cls.random(n, n, rng)
            if m.rank() == n:
                return m

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(ij)
        return (self.data[i] >> (self.cols - 1 - j)) & 1

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self.data[i])

    def __str__(self) -> str:
        return "\n".join(format(r, f"0{self.cols}b") for r in self.data)

    def rank(self) -> int:
        return len(_echelon(list(self.data)))

    def transpose(self) -> "BitMatrix":
        out = []
        for j in range(self.cols):
            shift = self.cols - 1 - j
            v = 0
            for r in self.data:
                v = (v << 1) | ((r >> shift) & 1)
            out.append(v)
        return BitMatrix(self.cols, self.rows, tuple(out))

    def mat_vec(self, v: BitVector | int) -> BitVector:
        bits = v.bits if isinstance(v, BitVector) else int(v)
        if isinstance(v, BitVector) and v.len != self.cols:
            raise ValidationError(f"vector length {v.len} != {self.cols} columns")
        out = 0
        for r in self.data:
            out = (out << 1) | dot(r, bits)
        return BitVector(self.rows, out)

    def __matmul__(self, other: "BitMatrix") -> "BitMatrix":
        if self.cols != other.rows:
            raise ValidationError("inner dimensions differ")
        out = []
        for r in self.data:
            acc = 0
            for j in range(self.cols):
                if (r >> (self.cols - 1 - j)) & 1:
                    acc ^= other.data[j]
            out.append(acc)
        return BitMatrix(self.rows, other.cols, tuple(out))

    def invert(self) -> "BitMatrix":
        return invert(self)


def _echelon(rows: list[int]) -> list[int]:
    """Reduced basis of the row space, keyed by leading bit."""
    basis: dict[int, int] = {}
    for r in rows:
        while r:
            lead = r.bit_length() - 1
            if lead in basis:
                r ^= basis[lead]
            else:
                basis[lead] = r
                break
    return list(basis.values())


def rank(m: BitMatrix) -> int:
    return m.rank()


def is_independent(vectors: Iterable[int]) -> bool:
    vs = list(vectors)
    return len(_echelon(vs)) == len(vs)


def invert(m: BitMatrix) -> BitMatrix:
    """Gauss-Jordan inverse; raises :class:`SingularMatrix`."""
    if m.rows != m.cols:
        raise ValidationError("only square matrices are invertible")
    n = m.rows
    a = list(m.data)
    inv = list(BitMatrix.identity(n).data)
    for col in range(n):
        mask = 1 << (n - 1 - col)
        piv = next((r for r in range(col, n) if a[r] & mask), None)
        if piv is None:
            raise SingularMatrix(f"matrix is singular (no pivot in column {col})")
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        for r in range(n):
            if r != col and a[r] & mask:
                a[r] ^= a[col]
                inv[r] ^= inv[col]
    return BitMatrix(n, n, tuple(inv))


def mat_vec(m: BitMatrix, v: BitVector) -> BitVector:
    return m.mat_vec(v)
