"""Mixed-polarity multi-controlled NOT circuits.

Wires are numbered 1..n with wire 1 the most significant bit of a basis
state.  A circuit applies its gates in list order.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from .bits import wire_mask
from .errors import ParseError, TooWide, WireOutOfRange
from .permutation import Permutation

SIMULATE_MAX_WIDTH = 24


@dataclass(frozen=True, slots=True)
class Gate:
    """NOT on ``target``, fired when every positive control is 1 and every
    negative control is 0."""

    target: int
    pos: frozenset = frozenset()
    neg: frozenset = frozenset()

    def __post_init__(self):
        if not isinstance(self.pos, frozenset):
            object.__setattr__(self, "pos", frozenset(self.pos))
        if not isinstance(self.neg, frozenset):
            object.__setattr__(self, "neg", frozenset(self.neg))
        if self.target in self.pos or self.target in self.neg:
            raise ValueError(f"target q{self.target} is also a control")
        if self.pos & self.neg:
            raise ValueError(f"wires {sorted(self.pos & self.neg)} are both positive and negative controls")

    @classmethod
    def trusted(cls, target, pos, neg=frozenset()):
        """Construct without validation; ``pos``/``neg`` must be frozensets."""
        g = object.__new__(cls)
        object.__setattr__(g, "target", target)
        object.__setattr__(g, "pos", pos)
        object.__setattr__(g, "neg", neg)
        return g

    @property
    def num_controls(self):
        return len(self.pos) + len(self.neg)

    def wires(self):
        return {self.target} | self.pos | self.neg

    def fits(self, n):
        return all(1 <= w <= n for w in self.wires())

    def apply(self, x, n):
        """Image of basis state ``x`` under this gate."""
        for c in self.pos:
            if not (x >> (n - c)) & 1:
                return x
        for c in self.neg:
            if (x >> (n - c)) & 1:
                return x
        return x ^ wire_mask(self.target, n)

    def __str__(self):
        ctrls = sorted([(c, "q") for c in self.pos] + [(c, "-q") for c in self.neg])
        return " ".join(["t", f"q{self.target}"] + [f"{p}{c}" for c, p in ctrls])


def NOT(target):
    return Gate(target)


def CNOT(control, target):
    return Gate(target, frozenset((control,)))


def toffoli(c1, c2, target):
    return Gate(target, frozenset((c1, c2)))


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: tuple = ()

    def __post_init__(self):
        if not isinstance(self.gates, tuple):
            object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if not g.fits(self.n):
                raise WireOutOfRange(f"gate '{g}' does not fit in {self.n} wires")

    @classmethod
    def trusted(cls, n, gates):
        """Construct without re-checking that every gate fits."""
        c = object.__new__(cls)
        object.__setattr__(c, "n", n)
        object.__setattr__(c, "gates", tuple(gates))
        return c

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __add__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        if other.n != self.n:
            raise WireOutOfRange(f"cannot concatenate {self.n}-wire and {other.n}-wire circuits")
        return Circuit(self.n, self.gates + other.gates)

    def inverse(self):
        return inverse(self)

    def apply(self, x):
        """Image of a single basis state; no 2**n table needed."""
        for g in self.gates:
            x = g.apply(x, self.n)
        return x


def concat(n, parts):
    """Concatenate circuits without re-validating every gate."""
    gates = []
    for p in parts:
        if p.n != n:
            raise WireOutOfRange(f"cannot concatenate {p.n}-wire circuit into {n} wires")
        gates.extend(p.gates)
    return Circuit.trusted(n, gates)


def inverse(C):
    # every gate is its own inverse
    return Circuit.trusted(C.n, C.gates[::-1])


def simulate(C):
    """Permutation computed by ``C`` on all ``2**n`` basis states.

    Bit-sliced: each wire holds one big integer whose bit ``x`` is that wire's
    value in basis state ``x``, so a gate costs a handful of wide AND/XORs.
    """
    n = C.n
    if n > SIMULATE_MAX_WIDTH:
        raise TooWide(f"cannot simulate n={n} > {SIMULATE_MAX_WIDTH}")
    size = 1 << n
    nbytes = (size + 7) // 8
    states = np.arange(size, dtype=np.int64)
    wire = [0] * (n + 1)
    for j in range(1, n + 1):
        bits = ((states >> (n - j)) & 1).astype(np.uint8)
        wire[j] = int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")
    full = (1 << size) - 1
    for g in C.gates:
        cond = full
        for c in g.pos:
            cond &= wire[c]
        for c in g.neg:
            cond &= ~wire[c]
        wire[g.target] ^= cond
    images = np.zeros(size, dtype=np.int64)
    for j in range(1, n + 1):
        raw = np.frombuffer(wire[j].to_bytes(nbytes, "little"), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="little")[:size].astype(np.int64)
        images |= bits << (n - j)
    return Permutation(n, images)


def evaluate(C, inputs):
    """Images of the given basis states, for any width.

    Bit-sliced over the batch like :func:`simulate`, so it handles circuits
    too wide for a full table.
    """
    n = C.n
    xs = [int(x) for x in inputs]
    if not xs:
        return []
    wire = [0] * (n + 1)
    for k, x in enumerate(xs):
        for j in range(1, n + 1):
            if (x >> (n - j)) & 1:
                wire[j] |= 1 << k
    full = (1 << len(xs)) - 1
    for g in C.gates:
        cond = full
        for c in g.pos:
            cond &= wire[c]
        for c in g.neg:
            cond &= ~wire[c]
        wire[g.target] ^= cond
    out = [0] * len(xs)
    for j in range(1, n + 1):
        w = wire[j]
        mask = 1 << (n - j)
        while w:
            low = w & -w
            out[low.bit_length() - 1] |= mask
            w ^= low
    return out


# -- cost model ---------------------------------------------------------------


@dataclass(frozen=True)
class CostModel:
    """Elementary-gate cost of a mixed-polarity C^mNOT on ``n`` wires.

    ``mct_small_slope`` selects between the 12m-22 and 14m-22 forms for
    3 <= m <= n//2.  ``mct_full_factor`` scales the n**2 cost of C^(n-1)NOT.
    """

    toffoli_cost: int = 15
    mct_small_slope: int = 12
    mct_full_factor: int = 1
    neg_control_surcharge: int = 2
    not_cost: int = 1
    cnot_cost: int = 1

    def mct_small(self, m):
        return self.mct_small_slope * m - 22

    def mct_large(self, m):
        return 24 * m - 40

    def mct_full(self, n):
        return self.mct_full_factor * n * n

    def base_cost(self, m, n):
        if m < 0 or m > n - 1:
            raise ValueError(f"C^{m}NOT does not fit in {n} wires")
        if m == 0:
            return self.not_cost
        if m == 1:
            return self.cnot_cost
        if m == 2:
            return self.toffoli_cost
        if m == n - 1:
            return self.mct_full(n)
        if m <= n // 2:
            return self.mct_small(m)
        return self.mct_large(m)

    def gate_cost(self, gate, n):
        return self.base_cost(gate.num_controls, n) + self.neg_control_surcharge * len(gate.neg)

    @classmethod
    def named(cls, mct="12m22", toffoli=15):
        slopes = {"12m22": 12, "14m22": 14}
        if mct not in slopes:
            raise ValueError(f"unknown MCT cost form {mct!r}; choose from {sorted(slopes)}")
        return cls(toffoli_cost=toffoli, mct_small_slope=slopes[mct])


DEFAULT_COST_MODEL = CostModel()


def elementary_cost(C, model=DEFAULT_COST_MODEL):
    n = C.n
    total = 0
    memo = {}  # gate objects are heavily shared between a stage and its inverse
    for g in C.gates:
        c = memo.get(id(g))
        if c is None:
            c = memo[id(g)] = model.gate_cost(g, n)
        total += c
    return total


def shared_control_savings(C, model=DEFAULT_COST_MODEL):
    """Cost saved by realising each run of k>=2 consecutive Toffolis with a
    common control pair as 2k-2 CNOTs plus one Toffoli."""
    saved = 0
    run_key, run_len = None, 0
    for g in list(C.gates) + [None]:
        key = None
        if g is not None and len(g.pos) == 2 and not g.neg:
            key = g.pos
        if key is not None and key == run_key:
            run_len += 1
            continue
        if run_len >= 2:
            plain = run_len * model.toffoli_cost
            shared = (2 * run_len - 2) * model.cnot_cost + model.toffoli_cost
            saved += max(0, plain - shared)
        run_key, run_len = key, (1 if key is not None else 0)
    return saved


def gate_class(gate):
    m = gate.num_controls
    name = {0: "NOT", 1: "CNOT", 2: "Toffoli"}.get(m, f"C{m}NOT")
    return name if not gate.neg else f"{name}(neg)"


def histogram(C):
    """Gate counts keyed by class name, e.g. ``CNOT`` or ``C6NOT(neg)``."""
    return Counter(gate_class(g) for g in C.gates)


# -- text format --------------------------------------------------------------


def emit(C):
    lines = [f"# width {C.n}"]
    lines.extend(str(g) for g in C.gates)
    return "\n".join(lines) + "\n"


def _wire(tok, n, lineno):
    body = tok[1:] if tok.startswith("q") else tok
    try:
        w = int(body)
    except ValueError:
        raise ParseError(f"bad wire token {tok!r}", lineno) from None
    if not 1 <= w <= n:
        raise WireOutOfRange(f"line {lineno}: wire {w} outside 1..{n}")
    return w


def parse(text):
    n = None
    gates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "width":
                if n is not None:
                    raise ParseError("duplicate width header", lineno)
                try:
                    n = int(parts[1])
                except ValueError:
                    raise ParseError(f"bad width {parts[1]!r}", lineno) from None
                if n < 1:
                    raise ParseError("width must be >= 1", lineno)
            continue
        if n is None:
            raise ParseError("gate before '# width <n>' header", lineno)
        toks = line.split()
        if toks[0] != "t" or len(toks) < 2:
            raise ParseError(f"expected 't <target> <controls>...', got {line!r}", lineno)
        target = _wire(toks[1], n, lineno)
        pos, neg = set(), set()
        for tok in toks[2:]:
            if tok.startswith("-"):
                w = _wire(tok[1:], n, lineno)
                bucket = neg
            else:
                w = _wire(tok, n, lineno)
                bucket = pos
            if w == target or w in pos or w in neg:
                raise ParseError(f"wire q{w} used twice in one gate", lineno)
            bucket.add(w)
        gates.append(Gate(target, frozenset(pos), frozenset(neg)))
    if n is None:
        raise ParseError("missing '# width <n>' header", 1)
    return Circuit(n, tuple(gates))


# -- synthesis report -----------------------------------------------------------


@dataclass
class SynthReport:
    iterations: int = 0
    pairs_per_iteration: list = field(default_factory=list)
    gate_count: int = 0
    elementary_estimate: int = 0
    support_initial: int = 0
    support_after_reduction: int = 0
    phase_breakdown: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))
