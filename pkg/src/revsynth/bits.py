"""Integer <-> bit-vector conversion.

Wire/index 1 is the most significant bit: ``x = sum(a_j * 2**(n - j))``.
Every conversion in the package goes through these helpers.
"""


def wire_mask(j, n):
    """Mask of wire ``j`` (1-based) in an ``n``-bit integer."""
    return 1 << (n - j)


def bit(x, j, n):
    return (x >> (n - j)) & 1


def to_bits(x, n):
    """``x`` as a list ``[a_1, ..., a_n]``, a_1 most significant."""
    if not 0 <= x < (1 << n):
        raise ValueError(f"{x} does not fit in {n} bits")
    return [(x >> (n - j)) & 1 for j in range(1, n + 1)]


def from_bits(bits):
    x = 0
    for b in bits:
        x = (x << 1) | (1 if b else 0)
    return x


def set_wires(x, n):
    """1-based wire indices whose bit is 1, ascending."""
    return [j for j in range(1, n + 1) if (x >> (n - j)) & 1]


def basis_value(t, n):
    """Integer whose vector is the unit vector e_t."""
    return 1 << (n - t)
