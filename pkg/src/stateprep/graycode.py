"""Gray codes, the row/column string partition, and the suffix cover.

Bit positions are 1-based in the public API (bit 1 is the leftmost
character, i.e. the MSB of the packed integer), which keeps the flip
schedules readable next to the usual 1,2,1,3,... ruler sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .errors import RegimeError, ValidationError
from .gf2 import BitMatrix, BitVector, is_independent


def ruler(i: int) -> int:
    """One plus the exponent of 2 in ``i``."""
    if i < 1:
        raise ValidationError(f"ruler is defined for i >= 1, got {i}")
    return (i & -i).bit_length()


def gray_flips(k: int, n: int) -> list[int]:
    """1-based bit flipped at each of the 2^n - 1 steps of the (k,n) code."""
    if not 1 <= k <= n:
        raise ValidationError(f"start bit {k} outside [1, {n}]")
    return [((k + ruler(i) - 2) % n) + 1 for i in range(1, 1 << n)]


def gray_ints(k: int, n: int) -> list[int]:
    out = [0]
    for f in gray_flips(k, n):
        out.append(out[-1] ^ (1 << (n - f)))
    return out


def gray_cycle(k: int, n: int) -> list[BitVector]:
    return [BitVector(n, v) for v in gray_ints(k, n)]


# ---------------------------------------------------------------------------
# 2-D partition of {0,1}^n


@dataclass(frozen=True)
class GrayTable:
    """``entries[j][k]`` is the n-bit mask in row j, column k (both 0-based).

    ``flip_index[j][k]`` is the 1-based bit on which columns k and k+1 of
    row j differ.
    """

    n: int
    t: int
    ell: int
    entries: tuple[tuple[int, ...], ...]
    flip_index: tuple[tuple[int, ...], ...]
    start_bits: tuple[int, ...]

    @property
    def columns(self) -> int:
        return 1 << (self.n - self.t)

    def entry(self, j: int, k: int) -> BitVector:
        return BitVector(self.n, self.entries[j][k])

    def prefix(self, j: int) -> int:
        return self.entries[j][0]

    def flip_counts(self, k: int) -> dict[int, int]:
        counts: dict[int, int] = {}
        for row in self.flip_index:
            counts[row[k]] = counts.get(row[k], 0) + 1
        return counts


def prefix_mask(n: int, t: int, j: int) -> int:
    """Row j's prefix: bit x_i (1-based, i <= t) is bit i-1 of j."""
    mask = 0
    for i in range(1, t + 1):
        if (j >> (i - 1)) & 1:
            mask |= 1 << (n - i)
    return mask


def gray_table(n: int, t: int) -> GrayTable:
    """Partition for a prefix width ``t`` with ``0 <= t < n``.

    Rows are split into n-t contiguous groups; group g walks its suffix with
    the (g+1, n-t) Gray code, so each column step spreads the flips over
    distinct suffix bits.
    """
    if not 0 <= t < n:
        raise ValidationError(f"prefix width {t} must lie in [0, {n})")
    ell = 1 << t
    width = n - t
    rows = []
    flips = []
    starts = []
    for j in range(ell):
        start = (j * width) // ell + 1
        pre = prefix_mask(n, t, j)
        row = [pre | s for s in gray_ints(start, width)]
        rows.append(tuple(row))
        flips.append(tuple(t + f for f in gray_flips(start, width)))
        starts.append(start)
    return GrayTable(n, t, ell, tuple(rows), tuple(flips), tuple(starts))


def table_prefix_width(n: int, m: int) -> int:
    """t = floor(log2(m/2)) for an even ancilla count m >= 2, capped at n-1."""
    m -= m % 2
    if m < 2:
        raise RegimeError(f"need at least 2 ancillas, got {m}")
    return min((m // 2).bit_length() - 1, n - 1)


def build_gray_table(n: int, m: int) -> GrayTable:
    """Table for the copy/phase-register construction with ``m`` ancillas.

    The nominal regime is 2n <= m <= 2^n/n, which is empty for n < 7, so any
    even m >= 2 is accepted and t is capped at n-1.
    """
    if n < 2:
        raise RegimeError(f"need n >= 2 for a prefix/suffix split, got {n}")
    return gray_table(n, table_prefix_width(n, m))


# ---------------------------------------------------------------------------
# linearly independent cover of nonzero suffixes


@dataclass(frozen=True)
class SuffixCover:
    """``sets[k]`` is an ordered full-rank list of r_t-bit masks (bit 1 = MSB)."""

    r_t: int
    sets: tuple[tuple[int, ...], ...]

    @property
    def ell(self) -> int:
        return len(self.sets)

    def matrix(self, k: int) -> BitMatrix:
        """T-hat for the 0-based stage k: rows are the members of set k."""
        return BitMatrix(self.r_t, self.r_t, self.sets[k])

    def first_index(self) -> dict[int, int]:
        """1-based index of the first set containing each nonzero suffix."""
        first: dict[int, int] = {}
        for k, members in enumerate(self.sets, start=1):
            for s in members:
                first.setdefault(s, k)
        return first


def _parity_check_syndrome(x: int, r: int) -> int:
    """H x where column i of H is the binary form of i (1 <= i <= r)."""
    syn = 0
    for i in range(1, r + 1):
        if (x >> (r - i)) & 1:
            syn ^= i
    return syn


def _extend_to_basis(vectors: list[int], r: int) -> list[int]:
    out = list(vectors)
    for v in range(1, 1 << r):
        if len(out) == r:
            break
        if is_independent(out + [v]):
            out.append(v)
    return out


def independent_cover(r_t: int) -> SuffixCover:
    """Cover {0,1}^r_t minus zero by full-rank r_t-element sets.

    Built from the solutions of Hx in {0, 1...1} for the parity-check matrix
    H, each solution x contributing the neighbourhood {x ^ e_i}.  Sets that
    add no new suffix are dropped.
    """
    if r_t < 1:
        raise ValidationError("suffix width must be >= 1")
    r = r_t
    kk = r.bit_length()  # ceil(log2(r+1))
    ones = (1 << kk) - 1
    units = [1 << (r - i) for i in range(1, r + 1)]
    sols = [x for x in range(1 << r) if _parity_check_syndrome(x, r) in (0, ones)]
    candidates = [tuple(units)]
    for x in sols:
        if x == 0:
            continue
        nbhd = [x ^ e for e in units]
        s0: list[int] = []
        for v in nbhd:
            if len(s0) == r - 1:
                break
            if v and is_independent(s0 + [v]):
                s0.append(v)
        s1 = [v for v in nbhd if v and v not in s0]
        s1.append(x)
        candidates.append(tuple(_extend_to_basis(s0, r)))
        candidates.append(tuple(_extend_to_basis(s1, r)))
    sets = []
    seen: set[int] = set()
    for c in candidates:
        if not set(c) <= seen:
            sets.append(c)
            seen.update(c)
    return SuffixCover(r, tuple(sets))


def cover_bound(r_t: int) -> float:
    return 2 ** (r_t + 2) / (r_t + 1) - 1


# ---------------------------------------------------------------------------
# first-appearance families


@dataclass(frozen=True)
class FkFamily:
    """Membership of n-bit strings c.t (c on r_c bits, t on r_t bits) in F_k."""

    r_c: int
    r_t: int
    first: dict

    @property
    def n(self) -> int:
        return self.r_c + self.r_t

    def stage_of(self, s: int) -> int | None:
        """1-based stage where string ``s`` fires, or None for zero suffixes."""
        return self.first.get(s & ((1 << self.r_t) - 1))

    def contains(self, s: int, k: int) -> bool:
        return self.stage_of(s) == k

    def members(self, k: int) -> Iterator[int]:
        suffixes = sorted(t for t, kk in self.first.items() if kk == k)
        for c in range(1 << self.r_c):
            for t in suffixes:
                yield (c << self.r_t) | t


def fk_families(cover: SuffixCover, r_c: int) -> FkFamily:
    return FkFamily(r_c, cover.r_t, cover.first_index())
