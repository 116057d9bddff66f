"""
Dense GF(2) linear algebra on bit-packed rows.

Each row is a Python ``int`` whose bit ``j`` holds column ``j``; XOR of two
rows is a single word-parallel ``^``.  Matrices carry row and column labels
so callers can slice by node identity instead of by position.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np


def _bits_to_int(bits: Iterable[int]) -> int:
    value = 0
    for j, b in enumerate(bits):
        if b & 1:
            value |= 1 << j
    return value


def _int_to_bits(value: int, ncols: int) -> list[int]:
    return [(value >> j) & 1 for j in range(ncols)]


@dataclass(frozen=True)
class Gf2Matrix:
    """Binary matrix with labelled axes.

    ``rows`` holds one packed integer per row.  Labels default to positional
    indices when not supplied.
    """

    rows: tuple[int, ...]
    ncols: int
    row_labels: tuple[Hashable, ...] = field(default=())
    col_labels: tuple[Hashable, ...] = field(default=())

    def __post_init__(self):
        rows = tuple(int(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if not self.row_labels:
            object.__setattr__(self, "row_labels", tuple(range(len(rows))))
        if not self.col_labels:
            object.__setattr__(self, "col_labels", tuple(range(self.ncols)))
        if len(self.row_labels) != len(rows):
            raise ValueError(
                f"{len(self.row_labels)} row labels for {len(rows)} rows")
        if len(self.col_labels) != self.ncols:
            raise ValueError(
                f"{len(self.col_labels)} column labels for {self.ncols} columns")
        if len(set(self.row_labels)) != len(self.row_labels):
            raise ValueError("duplicate row labels")
        if len(set(self.col_labels)) != len(self.col_labels):
            raise ValueError("duplicate column labels")
        limit = 1 << self.ncols
        for r in rows:
            if r < 0 or r >= limit:
                raise ValueError(f"row value {r:#x} does not fit in {self.ncols} columns")

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), self.ncols)

    @classmethod
    def from_array(cls, array, row_labels: Sequence = (), col_labels: Sequence = ()) -> "Gf2Matrix":
        """Build from any 2-D array-like of 0/1 entries (values taken mod 2)."""
        a = np.asarray(array, dtype=np.int64)
        if a.ndim == 1 and a.size == 0:
            a = a.reshape(0, len(col_labels))
        if a.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {a.shape}")
        rows = tuple(_bits_to_int(row % 2) for row in a)
        return cls(rows, a.shape[1], tuple(row_labels), tuple(col_labels))

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "Gf2Matrix":
        return cls((0,) * nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> "Gf2Matrix":
        return cls(tuple(1 << i for i in range(n)), n)

    def to_array(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.uint8)
        for i, r in enumerate(self.rows):
            out[i] = _int_to_bits(r, self.ncols)
        return out

    def __getitem__(self, index: tuple[int, int]) -> int:
        i, j = index
        if not 0 <= j < self.ncols:
            raise IndexError(f"column {j} out of range")
        return (self.rows[i] >> j) & 1

    def row_index(self, label) -> int:
        return self.row_labels.index(label)

    def col_index(self, label) -> int:
        return self.col_labels.index(label)

    def transpose(self) -> "Gf2Matrix":
        cols = []
        for j in range(self.ncols):
            v = 0
            for i, r in enumerate(self.rows):
                if (r >> j) & 1:
                    v |= 1 << i
            cols.append(v)
        return Gf2Matrix(tuple(cols), self.nrows, self.col_labels, self.row_labels)

    @property
    def T(self) -> "Gf2Matrix":
        return self.transpose()

    def submatrix(self, row_labels: Sequence, col_labels: Sequence) -> "Gf2Matrix":
        """Restrict to the given labels, in the given order."""
        ridx = [self.row_index(lbl) for lbl in row_labels]
        cidx = [self.col_index(lbl) for lbl in col_labels]
        rows = []
        for i in ridx:
            r = self.rows[i]
            v = 0
            for out_j, j in enumerate(cidx):
                if (r >> j) & 1:
                    v |= 1 << out_j
            rows.append(v)
        return Gf2Matrix(tuple(rows), len(cidx), tuple(row_labels), tuple(col_labels))

    def matmul(self, other: "Gf2Matrix") -> "Gf2Matrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch: {self.shape} @ {other.shape}")
        out = []
        for r in self.rows:
            acc = 0
            j = 0
            while r:
                if r & 1:
                    acc ^= other.rows[j]
                r >>= 1
                j += 1
            out.append(acc)
        return Gf2Matrix(tuple(out), other.ncols, self.row_labels, other.col_labels)

    def __matmul__(self, other: "Gf2Matrix") -> "Gf2Matrix":
        return self.matmul(other)

    def vecmul(self, vector: Sequence[int]) -> list[int]:
        """Row vector times matrix: ``vector @ self`` over GF(2)."""
        if len(vector) != self.nrows:
            raise ValueError(f"vector of length {len(vector)} for {self.nrows} rows")
        acc = 0
        for bit, r in zip(vector, self.rows):
            if bit & 1:
                acc ^= r
        return _int_to_bits(acc, self.ncols)


def rank(m: Gf2Matrix) -> int:
    """GF(2) rank by elimination on the lowest set bit of each row."""
    pivots: dict[int, int] = {}
    for r in m.rows:
        while r:
            low = r & -r
            p = pivots.get(low)
            if p is None:
                pivots[low] = r
                break
            r ^= p
    return len(pivots)


def solve_row_membership(m: Gf2Matrix, target: Sequence[int] | int) -> frozenset[int] | None:
    """Find a set of row indices whose XOR equals ``target``.

    ``target`` is either a 0/1 sequence of length ``m.ncols`` or an already
    packed integer.  Returns ``None`` when ``target`` is outside the row
    space.  With full row rank the returned set is the unique solution.
    """
    if isinstance(target, (int, np.integer)):
        t = int(target)
        if t < 0 or t >= 1 << m.ncols:
            raise ValueError(f"packed target does not fit in {m.ncols} columns")
    else:
        if len(target) != m.ncols:
            raise ValueError(f"target of length {len(target)} for {m.ncols} columns")
        t = _bits_to_int(target)

    # pivot bit -> (reduced row, mask of original rows combined into it)
    basis: dict[int, tuple[int, int]] = {}
    for i, r in enumerate(m.rows):
        combo = 1 << i
        while r:
            low = r & -r
            hit = basis.get(low)
            if hit is None:
                basis[low] = (r, combo)
                break
            r ^= hit[0]
            combo ^= hit[1]

    combo = 0
    while t:
        low = t & -t
        hit = basis.get(low)
        if hit is None:
            return None
        t ^= hit[0]
        combo ^= hit[1]
    return frozenset(i for i in range(m.nrows) if (combo >> i) & 1)


def row_sum(m: Gf2Matrix, rows: Iterable[int]) -> list[int]:
    """XOR of the selected rows as a 0/1 list; the empty selection gives zeros."""
    acc = 0
    for i in rows:
        if not 0 <= i < m.nrows:
            raise IndexError(f"row {i} out of range for {m.nrows} rows")
        acc ^= m.rows[i]
    return _int_to_bits(acc, m.ncols)


def inverse(m: Gf2Matrix) -> Gf2Matrix:
    """Inverse of a square full-rank matrix; labels are swapped."""
    n = m.nrows
    if m.ncols != n:
        raise ValueError(f"matrix is not square: {m.shape}")
    aug = [(r, 1 << i) for i, r in enumerate(m.rows)]
    for col in range(n):
        bit = 1 << col
        piv = next((i for i in range(col, n) if aug[i][0] & bit), None)
        if piv is None:
            raise ValueError("matrix is singular over GF(2)")
        aug[col], aug[piv] = aug[piv], aug[col]
        pr, pc = aug[col]
        for i in range(n):
            if i != col and aug[i][0] & bit:
                aug[i] = (aug[i][0] ^ pr, aug[i][1] ^ pc)
    return Gf2Matrix(tuple(c for _, c in aug), n, m.col_labels, m.row_labels)
