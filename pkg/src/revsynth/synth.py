"""Ancilla-free synthesis of reversible functions into MCT circuits.

Pipeline: clear ``f(0)`` with NOT gates, then repeatedly peel off batches of
support elements with one involution ``Q = Pe^-1 Pmap^-1 T Pmap Pe`` per
batch (``T`` is a single multi-controlled NOT swapping all mapped pairs at
once), and finish the small residual either with transpositions or with the
distinct-pair variant of the same batching.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

from .bits import basis_value, bit, set_wires, wire_mask
from .circuit import (
    DEFAULT_COST_MODEL,
    CNOT,
    NOT,
    Circuit,
    CostModel,
    Gate,
    SynthReport,
    concat,
    elementary_cost,
    inverse,
    shared_control_savings,
    simulate,
    toffoli,
)
from .errors import (
    DuplicateValues,
    EqualValues,
    InsufficientPairs,
    PatternOverlap,
    TooWide,
    ZeroValue,
)
from .f2linalg import BitMatrix, SpanTracker, invert, pmh_synthesize
from .permutation import MAX_WIDTH, Permutation

REST_STRATEGIES = ("naive", "improved")


@dataclass
class PairSelection:
    """Pairs ``(a_t, f(a_t))`` chosen for one batch.

    ``U`` and ``V`` are only filled by the independent selection; they are
    already augmented to n x n.  ``fillers`` holds ``(column, value)`` for
    each U column that replaced a dependent ``f(a_t)`` (columns 1-based).
    """

    pairs: list
    fillers: list = field(default_factory=list)
    augmentation: list = field(default_factory=list)
    U: BitMatrix | None = None
    V: BitMatrix | None = None

    @property
    def values(self):
        return [v for pair in self.pairs for v in pair]


@dataclass(frozen=True)
class SynthOptions:
    rest_strategy: str = "improved"
    cost_model: CostModel = DEFAULT_COST_MODEL
    pmh_section: int | None = None
    # CNOT instead of Toffoli in the greedy Pe when a set bit above t exists
    greedy_prefer_cnot: bool = True
    # simulate every Q stage and check it swaps exactly the selected pairs
    check_stages: bool = False

    def __post_init__(self):
        if self.rest_strategy not in REST_STRATEGIES:
            raise ValueError(f"rest_strategy must be one of {REST_STRATEGIES}, got {self.rest_strategy!r}")


class _State:
    """Mutable working copy of a permutation: images, inverse, sorted support."""

    __slots__ = ("n", "f", "finv", "moved")

    def __init__(self, P):
        self.n = P.n
        self.f = P.images.tolist()
        finv = [0] * len(self.f)
        for i, x in enumerate(self.f):
            finv[x] = i
        self.finv = finv
        self.moved = [i for i, x in enumerate(self.f) if i != x]

    def swap_values(self, a, b):
        """P <- (a b) o P."""
        f, finv = self.f, self.finv
        xa, xb = finv[a], finv[b]
        f[xa], f[xb] = b, a
        finv[a], finv[b] = xb, xa
        for z in (xa, xb):
            if f[z] == z:
                k = bisect.bisect_left(self.moved, z)
                if k < len(self.moved) and self.moved[k] == z:
                    del self.moved[k]

    def permutation(self):
        return Permutation(self.n, self.f)


# -- building blocks ------------------------------------------------------------


def fix_zero(P):
    """NOT gates T with ``(T o P)(0) = 0``; returns ``(T, T o P)``."""
    n = P.n
    v = P(0)
    T = Circuit(n, tuple(NOT(j) for j in set_wires(v, n)))
    if not v:
        return T, P
    return T, Permutation(n, P.images ^ v)


def transposition_circuit(a, b, n):
    """Circuit swapping basis states ``a`` and ``b`` and fixing all others."""
    if a == b:
        raise EqualValues(f"cannot swap {a} with itself")
    size = 1 << n
    if not (0 <= a < size and 0 <= b < size):
        raise ValueError(f"values must lie in [0, {size})")
    diff = a ^ b
    pivot = n - diff.bit_length() + 1  # smallest wire index where a and b differ
    fan = [CNOT(pivot, s) for s in set_wires(diff, n) if s != pivot]
    a_fanned = a ^ (diff ^ wire_mask(pivot, n)) if bit(a, pivot, n) else a
    others = [w for w in range(1, n + 1) if w != pivot]
    pos = frozenset(w for w in others if bit(a_fanned, w, n))
    neg = frozenset(w for w in others if not bit(a_fanned, w, n))
    return Circuit(n, tuple(fan) + (Gate(pivot, pos, neg),) + tuple(fan[::-1]))


def _pattern_gate(target, code, m, n):
    """C^mNOT on ``target`` firing when the last m wires read ``code``."""
    block = n - m
    pos = frozenset(block + k for k in range(1, m + 1) if (code >> (m - k)) & 1)
    neg = frozenset(block + k for k in range(1, m + 1) if not (code >> (m - k)) & 1)
    return Gate(target, pos, neg)


def _pmap_entry(i, m, n):
    # e_i -> |1 0..0>|i-1>_m for a wire i outside the last-m block
    code = i - 1
    gates = [CNOT(i, 1)]
    gates += [CNOT(i, n - m + k) for k in range(1, m + 1) if (code >> (m - k)) & 1]
    gates.append(_pattern_gate(i, code, m, n))
    return gates


def main_swap(m, n):
    """C^(n-m)NOT on the last wire, controlled on the first n-m wires reading
    ``10...0``."""
    if not 1 <= m <= n - 2:
        raise ValueError(f"main swap needs 1 <= m <= n-2, got m={m}, n={n}")
    return Gate(n, frozenset((1,)), frozenset(range(2, n - m + 1)))


def build_Pmap(m, n):
    """Maps e_i to y_i = |10..0>|i-1>_m for i = 1..2**m."""
    if (1 << m) >= n - m:
        raise PatternOverlap(f"2**{m} >= n - m = {n - m}")
    gates = []
    for i in range(2, (1 << m) + 1):
        gates += _pmap_entry(i, m, n)
    return Circuit(n, tuple(gates))


def _extended_ok(m, n):
    k = 1 << m
    if m < 1 or m > n - 2 or k > n:
        return False
    return k <= n - m or k - (n - m) + 1 <= n - m


def build_Pmap_extended(m, n):
    """``build_Pmap`` that also covers 2**m > n-m.

    Basis vectors sitting inside the last-m block are first marked with wire
    1 and a free helper wire, rewritten to their code with Toffolis on that
    control pair, and then the helper wire is cleared by a C^mNOT.
    """
    if not _extended_ok(m, n):
        raise PatternOverlap(f"no room to map 2**{m} basis vectors on {n} wires")
    k = 1 << m
    block = n - m
    gates = []
    over = k - block
    if over > 0:
        for i in range(1, over + 1):
            t = block + i
            gates += [CNOT(t, 1), CNOT(t, i + 1)]
        for i in range(1, over + 1):
            t = block + i
            diff = (1 << (m - i)) ^ (t - 1)
            gates += [toffoli(1, i + 1, block + j) for j in range(1, m + 1) if (diff >> (m - j)) & 1]
            gates.append(_pattern_gate(i + 1, t - 1, m, n))
    for i in range(2, min(k, block) + 1):
        gates += _pmap_entry(i, m, n)
    return Circuit(n, tuple(gates))


# -- pair selection -------------------------------------------------------------


def _select_independent(state, count):
    n, f = state.n, state.f
    tracker = SpanTracker()
    ucols, vcols, pairs, fillers = [], [], [], []
    for i in state.moved:
        if len(pairs) == count:
            break
        x = f[i]
        if tracker.contains(i) or tracker.contains(x):
            continue
        pairs.append((i, x))
        vcols += [i, x]
        tracker.insert(i)
        ucols.append(i)
        if tracker.insert(x):
            ucols.append(x)
        else:
            z = tracker.smallest_outside()
            tracker.insert(z)
            ucols.append(z)
            fillers.append((len(ucols), z))
    if len(pairs) < count:
        raise InsufficientPairs(f"found {len(pairs)} of {count} independent pairs")
    augmentation = []
    while tracker.size < n:
        z = tracker.smallest_outside()
        tracker.insert(z)
        augmentation.append(z)
    ucols += augmentation
    vcols += augmentation
    return PairSelection(pairs, fillers, augmentation, BitMatrix(n, ucols), BitMatrix(n, vcols))


def select_pairs_independent(P, m):
    """Pick ``2**(m-1)`` pairs scanning the support upward, keeping each new
    ``a`` and ``f(a)`` outside the span of the U columns chosen so far."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return _select_independent(_State(P), 1 << (m - 1))


def _select_distinct(state, count):
    f = state.f
    used = set()
    pairs = []
    for i in state.moved:
        if len(pairs) == count:
            break
        x = f[i]
        if i in used or x in used:
            continue
        pairs.append((i, x))
        used.update((i, x))
    if len(pairs) < count:
        raise InsufficientPairs(f"found {len(pairs)} of {count} disjoint pairs")
    return PairSelection(pairs)


def select_pairs_distinct(P, m):
    if m < 1:
        raise ValueError("m must be >= 1")
    return _select_distinct(_State(P), 1 << (m - 1))


# -- Pe -------------------------------------------------------------------------


@dataclass
class PeStages:
    R1: BitMatrix
    V1: BitMatrix  # R1 @ V
    toffolis: list
    V2: BitMatrix  # V1 after the Toffoli fix-up, unit upper triangular
    R2: BitMatrix


def pe_stages(sel):
    U, V = sel.U, sel.V
    n = U.nrows
    R1 = invert(U)
    V1 = R1 @ V
    cols = list(V1.cols)
    toffolis = []
    for t in range(4, 2 * len(sel.pairs) + 1, 2):
        c = cols[t - 1]
        if bit(c, t, n):
            continue
        if not bit(c, t - 1, n):
            raise AssertionError(f"column {t} of R1 V lacks the expected entry {t - 1}")
        t_low = next(j for j in range(1, t - 1) if bit(c, j, n))
        g = toffoli(t_low, t - 1, t)
        toffolis.append(g)
        cols = [g.apply(v, n) for v in cols]
    V2 = BitMatrix(n, cols)
    R2 = invert(V2)
    return PeStages(R1, V1, toffolis, V2, R2)


def build_Pe(sel, section_size=None):
    """Circuit sending ``a_t`` to e_(2t-1) and ``f(a_t)`` to e_(2t)."""
    st = pe_stages(sel)
    n = sel.U.nrows
    return concat(n, [
        pmh_synthesize(st.R1, section_size),
        Circuit(n, tuple(st.toffolis)),
        pmh_synthesize(st.R2, section_size),
    ])


def build_Pe_greedy(values, n, prefer_cnot=True):
    """Send ``values[t-1]`` to e_t one value at a time.

    When bit t of the current image is 0 it is set first: by a CNOT from a set
    bit above t when one exists (``prefer_cnot``), otherwise by a Toffoli on
    the two lowest set bits; with ``prefer_cnot=False`` the Toffoli is used
    whenever two or more bits are set.  CNOTs from wire t then clear the rest.
    Neither step disturbs the unit vectors e_1..e_(t-1) already produced.
    """
    if len(set(values)) != len(values):
        raise DuplicateValues("values must be distinct")
    if any(v == 0 for v in values):
        raise ZeroValue("0 cannot be mapped to a unit vector")
    if len(values) > n:
        raise ValueError(f"{len(values)} values do not fit in {n} unit vectors")
    cur = list(values)
    gates = []
    for t in range(1, len(values) + 1):
        v = cur[t - 1]
        step = []
        if not bit(v, t, n):
            ones = set_wires(v, n)
            above = [w for w in ones if w > t]
            if len(ones) == 1 or (prefer_cnot and above):
                step.append(CNOT(above[0], t))
            else:
                step.append(toffoli(ones[0], ones[1], t))
            v = step[0].apply(v, n)
        step += [CNOT(t, s) for s in set_wires(v, n) if s != t]
        for g in step:
            cur = [g.apply(x, n) for x in cur]
        gates += step
    return Circuit(n, tuple(gates))


# -- main loop ------------------------------------------------------------------


def independent_m(n):
    return int(math.floor(math.log2(n))) - 1


def _check_q(q, pairs):
    Q = simulate(q)
    expect = list(range(1 << q.n))
    for a, b in pairs:
        expect[a], expect[b] = b, a
    if Q.tolist() != expect:
        raise AssertionError(f"Q stage does not swap exactly {pairs}")


def _reduce(state, opts):
    n = state.n
    m = independent_m(n)
    count = 1 << (m - 1)
    pmap = build_Pmap(m, n)
    middle = concat(n, [pmap, Circuit(n, (main_swap(m, n),)), inverse(pmap)])
    qs, pairs_per = [], []
    while True:
        try:
            sel = _select_independent(state, count)
        except InsufficientPairs:
            break
        pe = build_Pe(sel, opts.pmh_section)
        q = concat(n, [pe, middle, inverse(pe)])
        if opts.check_stages:
            _check_q(q, sel.pairs)
        for a, b in sel.pairs:
            state.swap_values(a, b)
        qs.append(q)
        pairs_per.append(len(sel.pairs))
    return qs, pairs_per


def reduce_support(P, opts=None):
    """Shrink the support of ``P`` (which must fix 0) below 2**(n/2-1).

    Returns ``(qs, residual, info)``: the batch circuits in generation order,
    the residual permutation ``Q_d...Q_1 P`` and a dict with ``iterations``
    and ``pairs_per_iteration``.
    """
    opts = opts or SynthOptions()
    if P(0) != 0:
        raise ValueError("reduce_support needs P(0) = 0; apply fix_zero first")
    if P.n < 4:
        return [], P, {"iterations": 0, "pairs_per_iteration": []}
    state = _State(P)
    qs, pairs_per = _reduce(state, opts)
    return qs, state.permutation(), {"iterations": len(qs), "pairs_per_iteration": pairs_per}


def _rest_naive(state):
    n = state.n
    parts = []
    while state.moved:
        i = state.moved[0]
        j = state.f[i]
        parts.append(transposition_circuit(i, j, n))
        state.swap_values(i, j)
    return concat(n, parts[::-1])


def rest_naive(P_r):
    """Transposition-by-transposition circuit simulating ``P_r``."""
    return _rest_naive(_State(P_r))


def improved_start_m(n):
    m = int(math.floor(math.log2(n))) if n > 1 else 0
    while m >= 2 and not _extended_ok(m, n):
        m -= 1
    return m


def _rest_improved(state, opts):
    n = state.n
    m = improved_start_m(n)
    qs = []
    middles = {}
    while m >= 2 and state.moved:
        try:
            sel = _select_distinct(state, 1 << (m - 1))
        except InsufficientPairs:
            m -= 1
            continue
        if m not in middles:
            pmap = build_Pmap_extended(m, n)
            middles[m] = concat(n, [pmap, Circuit(n, (main_swap(m, n),)), inverse(pmap)])
        pe = build_Pe_greedy(sel.values, n, opts.greedy_prefer_cnot)
        q = concat(n, [pe, middles[m], inverse(pe)])
        if opts.check_stages:
            _check_q(q, sel.pairs)
        for a, b in sel.pairs:
            state.swap_values(a, b)
        qs.append(q)
    # a single-pair batch is a transposition; finish with the direct circuit
    tail = _rest_naive(state)
    return concat(n, [tail] + qs[::-1])


def rest_improved(P_r, opts=None):
    """Batched rest-part circuit simulating ``P_r`` (which must fix 0)."""
    if P_r(0) != 0:
        raise ValueError("rest_improved needs P_r(0) = 0")
    return _rest_improved(_State(P_r), opts or SynthOptions())


def _phase(C, model):
    return {"gates": len(C), "elementary": elementary_cost(C, model)}


def synthesize(P, opts=None):
    """Circuit ``C`` with ``simulate(C) == P`` plus a :class:`SynthReport`.

    Gate order is ``[rest, Q_d, ..., Q_1, fix-zero NOTs]``.
    """
    opts = opts or SynthOptions()
    n = P.n
    if n > MAX_WIDTH:
        raise TooWide(f"n={n} exceeds {MAX_WIDTH}")
    model = opts.cost_model
    t0, P0 = fix_zero(P)
    state = _State(P0)
    support_initial = len(state.moved)
    if n >= 4:
        qs, pairs_per = _reduce(state, opts)
    else:
        qs, pairs_per = [], []
    support_after = len(state.moved)
    if opts.rest_strategy == "improved" and n >= 4:
        rest = _rest_improved(state, opts)
    else:
        rest = _rest_naive(state)
    reduce_part = concat(n, qs[::-1])
    circuit = concat(n, [rest, reduce_part, t0])

    phases = {
        "fix_zero": _phase(t0, model),
        "reduce_support": _phase(reduce_part, model),
        "rest": _phase(rest, model),
    }
    phases["rest"]["strategy"] = opts.rest_strategy
    phases["rest"]["shared_control_savings"] = shared_control_savings(rest, model)
    report = SynthReport(
        iterations=len(qs),
        pairs_per_iteration=pairs_per,
        gate_count=len(circuit),
        # cost is additive over concatenation
        elementary_estimate=sum(p["elementary"] for p in phases.values()),
        support_initial=support_initial,
        support_after_reduction=support_after,
        phase_breakdown=phases,
    )
    return circuit, report


__all__ = [
    "PairSelection",
    "PeStages",
    "SynthOptions",
    "basis_value",
    "build_Pe",
    "build_Pe_greedy",
    "build_Pmap",
    "build_Pmap_extended",
    "fix_zero",
    "improved_start_m",
    "independent_m",
    "main_swap",
    "pe_stages",
    "reduce_support",
    "rest_improved",
    "rest_naive",
    "select_pairs_distinct",
    "select_pairs_independent",
    "synthesize",
    "transposition_circuit",
]
