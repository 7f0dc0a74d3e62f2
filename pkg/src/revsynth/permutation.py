"""Reversible functions as permutations of ``range(2**n)``."""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, NotABijection, ParseError, TooWide, WidthMismatch

MAX_WIDTH = 28


@dataclass(frozen=True)
class Support:
    """Inputs moved by a permutation, sorted ascending."""

    moved: tuple

    def __len__(self):
        return len(self.moved)

    def __iter__(self):
        return iter(self.moved)

    def __contains__(self, i):
        k = bisect.bisect_left(self.moved, i)
        return k < len(self.moved) and self.moved[k] == i


class Permutation:
    """A bijection on n-bit integers stored as a dense image table.

    ``P.images[i]`` is ``f(i)``. Instances are immutable; the image array is
    marked read-only.
    """

    __slots__ = ("n", "images")

    def __init__(self, n, images):
        # unchecked; use from_images for validated construction
        self.n = n
        arr = np.asarray(images, dtype=np.int64)
        if arr.flags.writeable:
            arr = arr.copy()
            arr.flags.writeable = False
        self.images = arr

    @classmethod
    def from_images(cls, n, images):
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ValueError(f"wire count must be a positive integer, got {n!r}")
        if n > MAX_WIDTH:
            raise TooWide(f"n={n} exceeds the dense-table cap of {MAX_WIDTH}")
        size = 1 << n
        arr = np.array(images, dtype=np.int64).reshape(-1)
        if arr.shape[0] != size:
            raise LengthMismatch(f"expected {size} images for n={n}, got {arr.shape[0]}")
        if arr.min() < 0 or arr.max() >= size:
            bad = int(arr[(arr < 0) | (arr >= size)][0])
            raise NotABijection(f"image {bad} out of range [0, {size})")
        seen = np.zeros(size, dtype=bool)
        seen[arr] = True
        if not seen.all():
            missing = int(np.flatnonzero(~seen)[0])
            raise NotABijection(f"duplicate image; {missing} is never hit")
        return cls(int(n), arr)

    @classmethod
    def identity(cls, n):
        if n > MAX_WIDTH:
            raise TooWide(f"n={n} exceeds the dense-table cap of {MAX_WIDTH}")
        return cls(n, np.arange(1 << n, dtype=np.int64))

    @classmethod
    def from_transpositions(cls, n, swaps):
        """Product of transpositions; the first listed acts first."""
        img = np.arange(1 << n, dtype=np.int64)
        inv = img.copy()
        for a, b in swaps:
            xa, xb = inv[a], inv[b]
            img[xa], img[xb] = b, a
            inv[a], inv[b] = xb, xa
        return cls(n, img)

    def __call__(self, i):
        return int(self.images[i])

    def __len__(self):
        return self.images.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.images, other.images)

    def __hash__(self):
        return hash((self.n, self.images.tobytes()))

    def __repr__(self):
        if self.n <= 4:
            return f"Permutation(n={self.n}, images={self.images.tolist()})"
        return f"Permutation(n={self.n}, |support|={len(self.support())})"

    def is_identity(self):
        return bool(np.array_equal(self.images, np.arange(len(self))))

    def tolist(self):
        return self.images.tolist()

    def support(self):
        return support(self)


def support(P):
    """Sorted set of ``i`` with ``P(i) != i``."""
    moved = np.flatnonzero(P.images != np.arange(len(P)))
    return Support(tuple(moved.tolist()))


def compose(A, B):
    """``A∘B``: apply ``B`` first, so ``compose(Q, P)`` is the matrix product QP."""
    if A.n != B.n:
        raise WidthMismatch(f"cannot compose n={A.n} with n={B.n}")
    return Permutation(A.n, A.images[B.images])


def inverse(P):
    inv = np.empty_like(P.images)
    inv[P.images] = np.arange(len(P), dtype=np.int64)
    return Permutation(P.n, inv)


def random_permutation(n, rng):
    """Uniform permutation of ``range(2**n)`` by Fisher-Yates.

    ``rng`` is a :class:`numpy.random.PCG64` bit generator (or a seed for one).
    Only the raw 64-bit stream is consumed, so the result is identical on every
    platform and numpy version that keeps PCG64's output fixed.
    """
    if not isinstance(rng, np.random.PCG64):
        rng = np.random.PCG64(rng)
    size = 1 << n
    img = list(range(size))
    for i in range(size - 1, 0, -1):
        j = _bounded(rng, i + 1)
        img[i], img[j] = img[j], img[i]
    return Permutation(n, img)


def _bounded(bitgen, bound):
    # rejection sampling keeps the draw exactly uniform
    limit = (1 << 64) - ((1 << 64) % bound)
    while True:
        r = int(bitgen.random_raw())
        if r < limit:
            return r % bound


# -- truth-table text format ------------------------------------------------


def format_truth_table(P):
    lines = [f"n {P.n}"]
    lines.extend(str(v) for v in P.images.tolist())
    return "\n".join(lines) + "\n"


def parse_truth_table(text):
    """Parse the ``n <n>`` + one-image-per-line format, or a ``perm:`` line."""
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            entries.append((lineno, line))
    if not entries:
        raise ParseError("empty truth table", 1)

    lineno, first = entries[0]
    if first.startswith("perm:"):
        if len(entries) > 1:
            raise ParseError("unexpected content after perm: line", entries[1][0])
        try:
            images = [int(tok) for tok in first[len("perm:"):].split()]
        except ValueError as exc:
            raise ParseError(f"bad image value ({exc})", lineno) from None
        size = len(images)
        if size < 2 or size & (size - 1):
            raise ParseError(f"image count {size} is not a power of two >= 2", lineno)
        n = size.bit_length() - 1
    else:
        head = first.split()
        if len(head) != 2 or head[0] != "n":
            raise ParseError("expected header 'n <wires>'", lineno)
        try:
            n = int(head[1])
        except ValueError:
            raise ParseError(f"bad wire count {head[1]!r}", lineno) from None
        if n < 1:
            raise ParseError("wire count must be >= 1", lineno)
        if n > MAX_WIDTH:
            raise TooWide(f"n={n} exceeds the dense-table cap of {MAX_WIDTH}")
        body = entries[1:]
        size = 1 << n
        if len(body) != size:
            where = body[-1][0] + 1 if body else lineno + 1
            raise ParseError(f"expected {size} image lines for n={n}, found {len(body)}", where)
        images = []
        for ln, tok in body:
            try:
                images.append(int(tok))
            except ValueError:
                raise ParseError(f"bad image value {tok!r}", ln) from None
    try:
        return Permutation.from_images(n, images)
    except (NotABijection, LengthMismatch) as exc:
        raise ParseError(str(exc), lineno) from None
