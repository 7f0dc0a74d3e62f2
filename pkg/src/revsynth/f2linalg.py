"""GF(2) matrices as integer bitsets, and CNOT-network synthesis.

A vector of length n is an int; entry 1 is the most significant bit (see
:mod:`revsynth.bits`).  A :class:`BitMatrix` is a tuple of such column ints.
"""

from __future__ import annotations

import functools
import math

from .circuit import Circuit, Gate
from .errors import SingularMatrix


def _transpose(vecs, length):
    """Rows of the matrix whose columns are ``vecs`` (each ``length`` bits)."""
    k = len(vecs)
    out = [0] * length
    for j, v in enumerate(vecs):
        colbit = 1 << (k - 1 - j)
        while v:
            low = v & -v
            out[length - low.bit_length()] |= colbit
            v ^= low
    return out


class BitMatrix:
    """``nrows`` x ``len(cols)`` matrix over GF(2), stored by column."""

    __slots__ = ("nrows", "cols")

    def __init__(self, nrows, cols):
        cols = tuple(int(c) for c in cols)
        limit = 1 << nrows
        for c in cols:
            if not 0 <= c < limit:
                raise ValueError(f"column {c} does not fit in {nrows} rows")
        self.nrows = nrows
        self.cols = cols

    @classmethod
    def identity(cls, n):
        return cls(n, [1 << (n - 1 - j) for j in range(n)])

    @classmethod
    def from_rows(cls, rows):
        """Build from rows given as '0'/'1' strings or 0/1 sequences."""
        rows = [[int(ch) for ch in r] for r in rows]
        if not rows:
            return cls(0, [])
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        packed = [int("".join(map(str, r)), 2) if ncols else 0 for r in rows]
        return cls(len(rows), _transpose(packed, ncols))

    @classmethod
    def from_row_ints(cls, rows, ncols):
        return cls(len(rows), _transpose(list(rows), ncols))

    @property
    def ncols(self):
        return len(self.cols)

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def rows(self):
        """Row ints; entry (i, j) is bit ``ncols - 1 - j`` of row ``i``."""
        return _transpose(list(self.cols), self.nrows)

    def __getitem__(self, ij):
        i, j = ij
        return (self.cols[j] >> (self.nrows - 1 - i)) & 1

    def transpose(self):
        return BitMatrix(self.ncols, self.rows())

    def apply(self, x):
        """``M @ x`` for a vector given as an int of ``ncols`` bits."""
        out = 0
        k = self.ncols
        for j, c in enumerate(self.cols):
            if (x >> (k - 1 - j)) & 1:
                out ^= c
        return out

    def __matmul__(self, other):
        if isinstance(other, BitMatrix):
            if other.nrows != self.ncols:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            return BitMatrix(self.nrows, [self.apply(c) for c in other.cols])
        return self.apply(other)

    def __eq__(self, other):
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.nrows == other.nrows and self.cols == other.cols

    def __hash__(self):
        return hash((self.nrows, self.cols))

    def to_text(self):
        width = self.ncols
        return "\n".join(format(r, f"0{width}b") if width else "" for r in self.rows())

    def __repr__(self):
        return f"BitMatrix({self.nrows}x{self.ncols})\n{self.to_text()}"


def rank(M):
    t = SpanTracker()
    for c in M.cols:
        t.insert(c)
    return t.size


def invert(M):
    """Inverse over GF(2) by Gauss-Jordan on row bitsets."""
    n = M.nrows
    if M.ncols != n:
        raise ValueError(f"cannot invert non-square {M.shape} matrix")
    rows = M.rows()
    inv = [1 << (n - 1 - i) for i in range(n)]
    for col in range(n):
        bitc = 1 << (n - 1 - col)
        pivot = next((r for r in range(col, n) if rows[r] & bitc), None)
        if pivot is None:
            raise SingularMatrix(f"matrix is singular (rank < {n})")
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            inv[col], inv[pivot] = inv[pivot], inv[col]
        rc, ic = rows[col], inv[col]
        for r in range(n):
            if r != col and rows[r] & bitc:
                rows[r] ^= rc
                inv[r] ^= ic
    return BitMatrix.from_row_ints(inv, n)


class SpanTracker:
    """Incremental XOR basis keyed by leading bit.

    Membership and insertion cost O(size) XORs.
    """

    __slots__ = ("basis", "size")

    def __init__(self, vectors=()):
        self.basis = {}
        self.size = 0
        for v in vectors:
            self.insert(v)

    def reduce(self, v):
        basis = self.basis
        while v:
            b = basis.get(v.bit_length() - 1)
            if b is None:
                return v
            v ^= b
        return 0

    def contains(self, v):
        return self.reduce(v) == 0

    __contains__ = contains

    def insert(self, v):
        """Add ``v``; returns False (and changes nothing) if it was dependent."""
        r = self.reduce(v)
        if not r:
            return False
        self.basis[r.bit_length() - 1] = r
        self.size += 1
        return True

    def smallest_outside(self):
        """Smallest positive integer whose vector is not in the span.

        Every integer below 2**j is in the span when bits 0..j-1 are all
        leading bits of the basis, and 2**j never is when j is not one.
        """
        j = 0
        while j in self.basis:
            j += 1
        return 1 << j

    def copy(self):
        t = SpanTracker()
        t.basis = dict(self.basis)
        t.size = self.size
        return t


def span_contains(t, v):
    return t.contains(v)


# -- CNOT synthesis -------------------------------------------------------------


def default_section_size(n):
    return max(1, round(math.log2(n) / 2)) if n > 1 else 1


@functools.lru_cache(maxsize=None)
def _cnot(control, target):
    # gates are immutable, so one shared object per (control, target) is safe
    return Gate.trusted(target, frozenset((control,)))


def _ops_to_circuit(n, ops):
    return Circuit.trusted(n, tuple(_cnot(c + 1, t + 1) for c, t in ops))


def _lower_reduce(rows, n, section):
    """Row-reduce an invertible matrix to unit upper-triangular form.

    Works section by section: rows repeating a sub-row pattern within the
    current column block are cleared with one XOR before the per-column
    elimination.  Returns ops ``(c, t)`` meaning ``row_t ^= row_c`` (0-based).
    """
    ops = []
    for start in range(0, n, section):
        stop = min(start + section, n)
        mask = 0
        for c in range(start, stop):
            mask |= 1 << (n - 1 - c)
        seen = {}
        for r in range(start, n):
            p = rows[r] & mask
            if not p:
                continue
            first = seen.get(p)
            if first is None:
                seen[p] = r
            else:
                rows[r] ^= rows[first]
                ops.append((first, r))
        for col in range(start, stop):
            bitc = 1 << (n - 1 - col)
            has_diag = bool(rows[col] & bitc)
            for r in range(col + 1, n):
                if rows[r] & bitc:
                    if not has_diag:
                        rows[col] ^= rows[r]
                        ops.append((r, col))
                        has_diag = True
                    rows[r] ^= rows[col]
                    ops.append((col, r))
            if not has_diag:
                raise SingularMatrix("matrix is singular")
    return ops


def pmh_synthesize(M, section_size=None):
    """CNOT circuit computing ``x -> M x`` by partitioned elimination.

    Uses O(n**2 / log n) gates for large n.  ``section_size`` defaults to
    :func:`default_section_size`.
    """
    n = M.nrows
    if M.ncols != n:
        raise ValueError(f"cannot synthesize non-square {M.shape} matrix")
    if section_size is None:
        section_size = default_section_size(n)
    if section_size < 1:
        raise ValueError("section_size must be >= 1")
    rows = M.rows()
    lower = _lower_reduce(rows, n, section_size)
    # rows is now unit upper triangular; reduce its transpose to I
    upper = _lower_reduce(_transpose(rows, n), n, section_size)
    # M = L_1..L_k (U_k^T..U_1^T): apply U^T ops forward, then L ops backward
    ops = [(t, c) for c, t in upper] + lower[::-1]
    return _ops_to_circuit(n, ops)


def gaussian_synthesize(M):
    """CNOT circuit for ``x -> M x`` by plain elimination (below then above
    the diagonal)."""
    n = M.nrows
    if M.ncols != n:
        raise ValueError(f"cannot synthesize non-square {M.shape} matrix")
    rows = M.rows()
    ops = []
    for col in range(n):
        bitc = 1 << (n - 1 - col)
        if not rows[col] & bitc:
            pivot = next((r for r in range(col + 1, n) if rows[r] & bitc), None)
            if pivot is None:
                raise SingularMatrix("matrix is singular")
            rows[col] ^= rows[pivot]
            ops.append((pivot, col))
        for r in range(col + 1, n):
            if rows[r] & bitc:
                rows[r] ^= rows[col]
                ops.append((col, r))
    for col in range(n - 1, -1, -1):
        bitc = 1 << (n - 1 - col)
        for r in range(col):
            if rows[r] & bitc:
                rows[r] ^= rows[col]
                ops.append((col, r))
    return _ops_to_circuit(n, ops[::-1])


def random_invertible(n, rng):
    """Uniform random invertible n x n matrix (rejection sampling).

    ``rng`` is a :class:`numpy.random.Generator`.
    """
    mask = (1 << n) - 1
    nbytes = (n + 7) // 8
    while True:
        M = BitMatrix(n, [int.from_bytes(rng.bytes(nbytes), "big") & mask for _ in range(n)])
        if rank(M) == n:
            return M
