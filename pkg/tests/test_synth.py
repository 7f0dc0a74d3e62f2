import math

import numpy as np
import pytest

from conftest import random_support_perm
from revsynth.circuit import CNOT, NOT, Circuit, Gate, elementary_cost, emit, parse, simulate, toffoli
from revsynth.errors import DuplicateValues, EqualValues, InsufficientPairs, PatternOverlap, ZeroValue
from revsynth.f2linalg import BitMatrix
from revsynth.permutation import Permutation, compose, random_permutation, support
from revsynth.synth import (
    SynthOptions,
    build_Pe,
    build_Pe_greedy,
    build_Pmap,
    build_Pmap_extended,
    fix_zero,
    independent_m,
    main_swap,
    pe_stages,
    reduce_support,
    rest_improved,
    rest_naive,
    select_pairs_distinct,
    select_pairs_independent,
    synthesize,
    transposition_circuit,
)

CHECKED = SynthOptions(check_stages=True)


def e(t, n):
    return 1 << (n - t)


def y(i, m, n):
    # |1 0..0>_{n-m} |i-1>_m
    return (1 << (n - 1)) | (i - 1)


def swap_table(n, pairs):
    out = list(range(1 << n))
    for a, b in pairs:
        out[a], out[b] = b, a
    return out


def full_width_gates(C):
    return sum(1 for g in C.gates if g.num_controls == C.n - 1)


# -- fix_zero --------------------------------------------------------------------


def test_fix_zero_noop(example_perm):
    T, P = fix_zero(example_perm)
    assert len(T) == 0 and P == example_perm


def test_fix_zero_sets_bits():
    P = Permutation.from_transpositions(3, [(0, 5)])
    T, P2 = fix_zero(P)
    assert T.gates == (NOT(1), NOT(3))
    assert P2(0) == 0
    assert P2 == compose(simulate(T), P)


def test_fix_zero_all_bits():
    P = Permutation.from_transpositions(8, [(0, 255)])
    T, P2 = fix_zero(P)
    assert len(T) == 8 and P2(0) == 0


# -- transpositions --------------------------------------------------------------


def test_transposition_distance_one():
    C = transposition_circuit(6, 7, 3)
    assert C.gates == (Gate(3, {1, 2}),)


def test_transposition_1_6():
    C = transposition_circuit(1, 6, 3)
    assert C.gates[:2] == (CNOT(1, 2), CNOT(1, 3))
    assert C.gates[2].target == 1 and C.gates[2].num_controls == 2
    assert C.gates[3:] == (CNOT(1, 3), CNOT(1, 2))
    assert simulate(C).tolist() == swap_table(3, [(1, 6)])


def test_transposition_n8():
    assert simulate(transposition_circuit(1, 3, 8)).tolist() == swap_table(8, [(1, 3)])


@pytest.mark.parametrize("n", [1, 2, 4, 5])
def test_transposition_exhaustive(n):
    for a in range(1 << n):
        for b in range(a + 1, 1 << n):
            assert simulate(transposition_circuit(a, b, n)).tolist() == swap_table(n, [(a, b)])


def test_transposition_equal_values():
    with pytest.raises(EqualValues):
        transposition_circuit(3, 3, 4)


# -- independent selection and Pe ------------------------------------------------------


def test_select_worked_example(example_perm):
    sel = select_pairs_independent(example_perm, 2)
    assert sel.pairs == [(1, 3), (4, 6)]
    assert sel.fillers == [(4, 8)]
    assert sel.augmentation == [16, 32, 64, 128]
    assert sel.U == BitMatrix(8, [1, 3, 4, 8, 16, 32, 64, 128])
    assert sel.V == BitMatrix(8, [1, 3, 4, 6, 16, 32, 64, 128])


def test_pe_stages_worked_example(example_perm):
    st = pe_stages(select_pairs_independent(example_perm, 2))
    assert st.V1 == BitMatrix.from_rows([
        "10010000", "01010000", "00110000", "00000000",
        "00001000", "00000100", "00000010", "00000001",
    ])
    assert st.V1.cols[3] == e(1, 8) | e(2, 8) | e(3, 8)
    assert st.toffolis == [toffoli(1, 3, 4)]
    assert st.V2.cols[3] == 0b11110000
    assert all(st.V2[i, i] for i in range(8))
    assert st.R2 @ st.V2 == BitMatrix.identity(8)


def test_select_identity_fails():
    with pytest.raises(InsufficientPairs):
        select_pairs_independent(Permutation.identity(6), 2)


@pytest.mark.parametrize("n", [8, 10])
def test_select_independent_above_threshold(n):
    rng = np.random.default_rng(n)
    m = independent_m(n)
    threshold = 2 ** (n // 2 - 1)
    for _ in range(100):
        k = int(rng.integers(threshold + 1, 1 << n))
        P = random_support_perm(n, k, rng)
        sel = select_pairs_independent(P, m)
        assert len(sel.pairs) == 1 << (m - 1)
        vals = sel.values
        assert len(set(vals)) == len(vals)
        assert all(P(a) == b for a, b in sel.pairs)
        # U is an invertible matrix whose first column is a_1
        assert sel.U.cols[0] == sel.pairs[0][0]
        assert sorted(simulate(build_Pe(sel)).tolist()) == list(range(1 << n))


def test_pe_without_dependent_columns():
    P = Permutation.from_transpositions(8, [(1, 2), (4, 8)])
    sel = select_pairs_independent(P, 2)
    assert sel.fillers == []
    assert pe_stages(sel).toffolis == []
    C = build_Pe(sel)
    assert all(g.num_controls == 1 for g in C.gates)


def test_pe_random_n10():
    n = 10
    for seed in range(5):
        _, P = fix_zero(random_permutation(n, np.random.PCG64(seed)))
        sel = select_pairs_independent(P, independent_m(n))
        S = simulate(build_Pe(sel))
        for t, (a, b) in enumerate(sel.pairs, start=1):
            assert S(a) == e(2 * t - 1, n)
            assert S(b) == e(2 * t, n)


# -- Pmap and main swap ----------------------------------------------------------


def test_pmap_worked_example():
    n, m = 8, 2
    C = build_Pmap(m, n)
    S = simulate(C)
    assert S(e(1, n)) == e(1, n)
    for i in range(1, 5):
        assert S(e(i, n)) == y(i, m, n)
    assert S(e(2, n)) == 0b10000001
    assert C.gates[:3] == (CNOT(2, 1), CNOT(2, 8), Gate(2, {8}, {7}))
    assert C.gates[3:6] == (CNOT(3, 1), CNOT(3, 7), Gate(3, {7}, {8}))


def test_pmap_m1_n4():
    C = build_Pmap(1, 4)
    assert len(C) == 3
    S = simulate(C)
    assert S(0b0100) == 0b1001
    assert S(0b1000) == 0b1000
    assert sorted(S.tolist()) == list(range(16))


def test_pmap_overlap():
    with pytest.raises(PatternOverlap):
        build_Pmap(3, 8)


def test_pmap_extended_same_when_room():
    assert build_Pmap_extended(2, 8) == build_Pmap(2, 8)


def test_pmap_extended_n8_m3():
    n, m = 8, 3
    C = build_Pmap_extended(m, n)
    S = simulate(C)
    for t in range(1, 9):
        assert S(e(t, n)) == y(t, m, n)
    assert S(e(6, n)) == 0b10000101
    assert toffoli(1, 2, 8) in C.gates
    assert Gate(2, {6, 8}, {7}) in C.gates


def test_pmap_extended_e6_path():
    # the gates touching e6's path: mark, rewrite code, clear helper
    n = 8
    v = Circuit(n, (CNOT(6, 1), CNOT(6, 2))).apply(e(6, n))
    assert v == 0b11000100
    v = toffoli(1, 2, 8).apply(v, n)
    assert v == 0b11000101
    assert Gate(2, {6, 8}, {7}).apply(v, n) == 0b10000101


@pytest.mark.parametrize("n", range(4, 13))
def test_pmap_extended_all_widths(n):
    from revsynth.synth import improved_start_m

    m = improved_start_m(n)
    while m >= 1:
        S = simulate(build_Pmap_extended(m, n))
        for t in range(1, (1 << m) + 1):
            assert S(e(t, n)) == y(t, m, n)
        m -= 1


def test_main_swap_instances():
    g = main_swap(2, 8)
    assert g.target == 8 and g.pos == {1} and g.neg == {2, 3, 4, 5, 6}
    assert g.num_controls == 6
    g = main_swap(1, 4)
    assert g.target == 4 and g.pos == {1} and g.neg == {2, 3}


def test_main_swap_n5_m2():
    S = simulate(Circuit(5, (main_swap(2, 5),)))
    assert S.tolist() == swap_table(5, [(16, 17), (18, 19)])


# -- reduce_support ----------------------------------------------------------------


def test_reduce_identity():
    qs, R, info = reduce_support(Permutation.identity(8))
    assert qs == [] and R.is_identity() and info["iterations"] == 0


def test_reduce_example_first_round(example_perm):
    qs, R, info = reduce_support(example_perm, CHECKED)
    Q1 = simulate(qs[0])
    assert Q1.tolist() == swap_table(8, [(1, 3), (4, 6)])
    QP = compose(Q1, example_perm)
    assert [x for x in range(256) if QP(x) == x] == [0, 1, 4]
    assert len(support(QP)) == 253
    # the emitted text form simulates to the same involution
    assert simulate(parse(emit(qs[0]))) == Q1


def test_reduce_residual_and_monotone(example_perm):
    n = 8
    qs, R, info = reduce_support(example_perm)
    assert len(support(R)) <= 2 ** (n // 2 - 1)
    assert info["iterations"] == len(qs) <= 8 * 2 ** n / n
    P, size = example_perm, 255
    for q, pairs in zip(qs, info["pairs_per_iteration"]):
        Q = simulate(q)
        assert compose(Q, Q).is_identity()
        assert len(support(Q)) == 2 * pairs
        P = compose(Q, P)
        new = len(support(P))
        assert new <= size - pairs
        size = new
    assert P == R


def test_reduce_random_n10():
    _, P = fix_zero(random_permutation(10, np.random.PCG64(7)))
    _, R, _ = reduce_support(P)
    assert len(support(R)) <= 16


def test_reduce_requires_fixed_zero():
    with pytest.raises(ValueError):
        reduce_support(Permutation.from_transpositions(4, [(0, 1)]))


# -- naive rest ---------------------------------------------------------------------


def test_rest_naive_identity():
    assert len(rest_naive(Permutation.identity(5))) == 0


def test_rest_naive_single_transposition():
    C = rest_naive(Permutation.from_transpositions(3, [(6, 7)]))
    assert C == transposition_circuit(6, 7, 3)


def test_rest_naive_support_10():
    rng = np.random.default_rng(10)
    P = random_support_perm(8, 10, rng)
    C = rest_naive(P)
    assert simulate(C) == P
    assert full_width_gates(C) <= 10


# -- distinct selection and greedy Pe --------------------------------------------------


def test_select_distinct_three_cycle():
    P = Permutation.from_images(2, [0, 2, 3, 1])
    assert select_pairs_distinct(P, 1).pairs == [(1, 2)]


def test_select_distinct_identity():
    with pytest.raises(InsufficientPairs):
        select_pairs_distinct(Permutation.identity(4), 1)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_select_distinct_at_bound(m):
    rng = np.random.default_rng(m)
    k = 3 * 2 ** (m - 1) - 2
    for _ in range(200):
        P = random_support_perm(8, k, rng)
        sel = select_pairs_distinct(P, m)
        assert len(sel.pairs) == 2 ** (m - 1)
        assert len(set(sel.values)) == 2 ** m


def test_pe_greedy_identity_values():
    assert len(build_Pe_greedy([e(1, 5), e(2, 5)], 5)) == 0


def test_pe_greedy_single_literal_rule():
    C = build_Pe_greedy([3], 4, prefer_cnot=False)
    assert C.gates == (toffoli(3, 4, 1), CNOT(1, 3), CNOT(1, 4))
    assert toffoli(3, 4, 1).apply(0b0011, 4) == 0b1011
    S = simulate(C)
    assert S(3) == 0b1000
    assert sorted(S.tolist()) == list(range(16))


def test_pe_greedy_single_default_rule():
    C = build_Pe_greedy([3], 4)
    assert C.gates == (CNOT(3, 1), CNOT(1, 3), CNOT(1, 4))
    assert simulate(C)(3) == 0b1000


@pytest.mark.parametrize("prefer_cnot", [True, False])
def test_pe_greedy_random(prefer_cnot):
    n, m = 10, 3
    rng = np.random.default_rng(99)
    for _ in range(20):
        vals = [int(v) for v in rng.choice(np.arange(1, 1 << n), size=2 ** m, replace=False)]
        C = build_Pe_greedy(vals, n, prefer_cnot)
        assert len(C) <= 2 ** m * (n + 1)
        S = simulate(C)
        for t, v in enumerate(vals, start=1):
            assert S(v) == e(t, n)


def test_pe_greedy_errors():
    with pytest.raises(DuplicateValues):
        build_Pe_greedy([3, 3], 4)
    with pytest.raises(ZeroValue):
        build_Pe_greedy([0, 3], 4)


# -- improved rest ------------------------------------------------------------------


def test_rest_improved_identity():
    assert len(rest_improved(Permutation.identity(8))) == 0


def test_rest_improved_support16_n10():
    rng = np.random.default_rng(16)
    P = random_support_perm(10, 16, rng)
    C = rest_improved(P, CHECKED)
    assert simulate(C) == P


def test_rest_improved_cost_crossover():
    # At n=10 a batch costs more than the transpositions it replaces
    # (the main swap alone is a C^7NOT); from n=12 on batching pays off.
    rng = np.random.default_rng(16)
    P10 = random_support_perm(10, 16, rng)
    assert elementary_cost(rest_improved(P10)) >= elementary_cost(rest_naive(P10))
    P12 = random_support_perm(12, 32, rng)
    C = rest_improved(P12)
    assert simulate(C) == P12
    assert elementary_cost(C) < elementary_cost(rest_naive(P12))


def test_rest_improved_three_cycle_endgame():
    P = Permutation.from_images(10, [0] + [2, 3, 1] + list(range(4, 1024)))
    C = rest_improved(P)
    assert simulate(C) == P
    assert full_width_gates(C) <= 2


@pytest.mark.parametrize("n", range(4, 12))
def test_rest_improved_random_supports(n):
    rng = np.random.default_rng(n)
    for k in (2, 3, 5, 9, 2 ** (n // 2 - 1) if n >= 6 else 4):
        P = random_support_perm(n, k, rng)
        assert simulate(rest_improved(P, CHECKED)) == P


# -- end to end ---------------------------------------------------------------------


@pytest.mark.parametrize("n", range(1, 7))
def test_synthesize_identity(n):
    C, report = synthesize(Permutation.identity(n))
    assert len(C) == 0 and report.elementary_estimate == 0


@pytest.mark.parametrize("strategy", ["naive", "improved"])
def test_synthesize_example_function(example_perm, strategy):
    C, report = synthesize(example_perm, SynthOptions(rest_strategy=strategy, check_stages=True))
    assert simulate(C) == example_perm
    assert report.pairs_per_iteration[0] == 2
    assert report.support_initial == 255
    assert report.support_after_reduction <= 8
    assert report.elementary_estimate == elementary_cost(C)
    assert report.gate_count == len(C)


@pytest.mark.parametrize("strategy", ["naive", "improved"])
def test_synthesize_random_small(strategy):
    for n in range(3, 11):
        for trial in range(25 if n < 9 else 5):
            P = random_permutation(n, np.random.PCG64(1000 * n + trial))
            C, _ = synthesize(P, SynthOptions(rest_strategy=strategy))
            assert simulate(C) == P, (n, trial)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_synthesize_tiny_uses_transpositions(n):
    for seed in range(10):
        P = random_permutation(n, np.random.PCG64(seed))
        C, report = synthesize(P)
        assert report.iterations == 0
        assert simulate(C) == P


def test_synthesize_is_pure(example_perm):
    a, ra = synthesize(example_perm)
    b, rb = synthesize(example_perm)
    assert emit(a) == emit(b) and ra == rb


def test_options_validation():
    with pytest.raises(ValueError):
        SynthOptions(rest_strategy="fast")


def test_phase_breakdown_sums(example_perm):
    _, report = synthesize(example_perm)
    phases = report.phase_breakdown
    assert sum(p["elementary"] for p in phases.values()) == report.elementary_estimate
    assert sum(p["gates"] for p in phases.values()) == report.gate_count
    assert phases["rest"]["strategy"] == "improved"
    assert phases["rest"]["shared_control_savings"] >= 0
