"""``revsynth`` command line: synth, verify, bench, cost."""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import time
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from . import circuit as circ
from .errors import ParseError, RevSynthError, TooWide, WireOutOfRange
from .permutation import MAX_WIDTH, parse_truth_table, random_permutation
from .synth import SynthOptions, synthesize

VERIFY_MAX_WIDTH = 20
BENCH_VERIFY_MAX_WIDTH = 14

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISMATCH = 2
EXIT_WIDTH = 3


@dataclass
class BenchRecord:
    n: int
    trial: int
    strategy: str
    gate_count: int
    elementary_estimate: int
    iterations: int
    wall_time_ms: float
    verified: bool


def _err(msg):
    print(f"revsynth: {msg}", file=sys.stderr)


def _cost_model(args):
    return circ.CostModel.named(args.model_mct, args.model_toffoli)


def _read_truth_table(path):
    return parse_truth_table(Path(path).read_text())


def _read_circuit(path):
    return circ.parse(Path(path).read_text())


def first_mismatch(C, P):
    """Smallest input where ``C`` and ``P`` disagree, or None."""
    S = circ.simulate(C)
    bad = np.flatnonzero(S.images != P.images)
    if bad.size == 0:
        return None
    x = int(bad[0])
    return x, int(S.images[x]), int(P.images[x])


def cmd_synth(args):
    try:
        P = _read_truth_table(args.input)
    except TooWide as exc:
        _err(str(exc))
        return EXIT_WIDTH
    except (ParseError, OSError) as exc:
        _err(f"{args.input}: {exc}")
        return EXIT_ERROR
    if args.verify and P.n > VERIFY_MAX_WIDTH:
        _err(f"--verify refused: n={P.n} exceeds the verification cap of {VERIFY_MAX_WIDTH}")
        return EXIT_WIDTH
    opts = SynthOptions(rest_strategy=args.rest, cost_model=_cost_model(args), pmh_section=args.pmh_section)
    C, report = synthesize(P, opts)
    if args.verify:
        bad = first_mismatch(C, P)
        if bad is not None:
            x, got, want = bad
            _err(f"verification failed at input {x}: circuit gives {got}, expected {want}")
            return EXIT_MISMATCH
    out = Path(args.output)
    out.write_text(circ.emit(C))
    report_path = Path(args.report) if args.report else out.with_name(out.name + ".json")
    report_path.write_text(report.to_json())
    status = "verified" if args.verify else "unverified"
    print(f"n={P.n} gates={report.gate_count} elementary={report.elementary_estimate} "
          f"iterations={report.iterations} ({status})")
    return EXIT_OK


def cmd_verify(args):
    try:
        C = _read_circuit(args.circuit)
        P = _read_truth_table(args.truthtable)
    except TooWide as exc:
        _err(str(exc))
        return EXIT_WIDTH
    except (ParseError, WireOutOfRange, OSError) as exc:
        _err(str(exc))
        return EXIT_ERROR
    if C.n != P.n:
        _err(f"width mismatch: circuit has {C.n} wires, truth table {P.n}")
        return EXIT_MISMATCH
    if C.n > VERIFY_MAX_WIDTH:
        _err(f"n={C.n} exceeds the verification cap of {VERIFY_MAX_WIDTH}")
        return EXIT_WIDTH
    bad = first_mismatch(C, P)
    if bad is not None:
        x, got, want = bad
        print(f"MISMATCH at input {x}: circuit gives {got}, expected {want}")
        return EXIT_MISMATCH
    print(f"OK: circuit realizes the truth table on all {1 << C.n} inputs")
    return EXIT_OK


def parse_n_range(text):
    """'8', '3-6', '3..6' or '8,10,12'."""
    text = text.strip()
    if "," in text:
        return [int(t) for t in text.split(",")]
    for sep in ("..", "-", ":"):
        if sep in text:
            lo, hi = text.split(sep, 1)
            return list(range(int(lo), int(hi) + 1))
    return [int(text)]


def bench_seed(seed, n, trial):
    return np.random.PCG64(np.random.SeedSequence([seed, n, trial]))


def run_bench(ns, trials, seed, strategies, model, pmh_section=None, timing=False):
    """Rows in (n, trial, strategy) order; raises AssertionError on a failed check."""
    rows = []
    for n in ns:
        for trial in range(trials):
            P = random_permutation(n, bench_seed(seed, n, trial))
            for strategy in strategies:
                opts = SynthOptions(rest_strategy=strategy, cost_model=model, pmh_section=pmh_section)
                t0 = time.perf_counter()
                C, report = synthesize(P, opts)
                elapsed = (time.perf_counter() - t0) * 1000.0
                verified = False
                if n <= BENCH_VERIFY_MAX_WIDTH:
                    if circ.simulate(C) != P:
                        raise AssertionError(f"verification failed for n={n} trial={trial} strategy={strategy}")
                    verified = True
                rows.append((BenchRecord(
                    n=n, trial=trial, strategy=strategy,
                    gate_count=report.gate_count,
                    elementary_estimate=report.elementary_estimate,
                    iterations=report.iterations,
                    wall_time_ms=round(elapsed, 3) if timing else 0.0,
                    verified=verified,
                ), report))
    return rows


def fit_constant(records):
    """Least-squares c in cost ~ c * 2**n * n / log2(n) (n >= 2 only)."""
    num = den = 0.0
    for r in records:
        if r.n < 2:
            continue
        g = (1 << r.n) * r.n / math.log2(r.n)
        num += r.elementary_estimate * g
        den += g * g
    return num / den if den else float("nan")


def format_csv(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f.name for f in fields(BenchRecord)])
    for r in records:
        w.writerow(astuple(r))
    return buf.getvalue()


def cmd_bench(args):
    try:
        ns = parse_n_range(args.n)
    except ValueError:
        _err(f"bad --n range {args.n!r}")
        return EXIT_ERROR
    if not ns or min(ns) < 1 or max(ns) > MAX_WIDTH:
        _err(f"--n must lie within 1..{MAX_WIDTH}")
        return EXIT_WIDTH
    strategies = ["naive", "improved"] if args.rest == "both" else [args.rest]
    try:
        rows = run_bench(ns, args.trials, args.seed, strategies, _cost_model(args),
                         args.pmh_section, args.timing)
    except AssertionError as exc:
        _err(str(exc))
        return EXIT_ERROR
    records = [r for r, _ in rows]
    text = format_csv(records)
    if args.csv:
        Path(args.csv).write_text(text)
    else:
        sys.stdout.write(text)
    for strategy in strategies:
        sel = [r for r in records if r.strategy == strategy]
        print(f"# strategy={strategy} rows={len(sel)} verified={sum(r.verified for r in sel)} "
              f"fit c={fit_constant(sel):.4f} (elementary ~ c*2^n*n/log2(n))")
    if len(strategies) == 2:
        for n in ns:
            totals = {s: sum(rep.phase_breakdown["rest"]["elementary"]
                             for r, rep in rows if r.n == n and r.strategy == s) for s in strategies}
            print(f"# rest-phase elementary n={n}: naive={totals['naive']} improved={totals['improved']}")
    return EXIT_OK


def cmd_cost(args):
    try:
        C = _read_circuit(args.circuit)
    except (ParseError, WireOutOfRange, OSError) as exc:
        _err(str(exc))
        return EXIT_ERROR
    model = _cost_model(args)
    hist = circ.histogram(C)
    per_class = {}
    for g in C.gates:
        k = circ.gate_class(g)
        per_class[k] = per_class.get(k, 0) + model.gate_cost(g, C.n)

    def order(name):
        m = {"NOT": 0, "CNOT": 1, "Toffoli": 2}.get(name.split("(")[0])
        if m is None:
            m = int(name.split("(")[0][1:-3])
        return (m, name)

    print(f"width {C.n}, {len(C)} gates")
    for name in sorted(hist, key=order):
        print(f"{name:>14} {hist[name]:8d} gates {per_class[name]:10d} elementary")
    print(f"elementary_estimate {circ.elementary_cost(C, model)}")
    return EXIT_OK


def _add_model_flags(p):
    p.add_argument("--model-toffoli", type=int, default=15, help="elementary cost of a Toffoli (default 15)")
    p.add_argument("--model-mct", choices=["12m22", "14m22"], default="12m22",
                   help="cost form for C^mNOT with 3 <= m <= n/2")


def build_parser():
    parser = argparse.ArgumentParser(prog="revsynth", description="Ancilla-free reversible circuit synthesis.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a truth table into a circuit file")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--rest", choices=["naive", "improved"], default="improved")
    p.add_argument("--verify", action="store_true", help="simulate the result and fail on mismatch")
    p.add_argument("--report", help="JSON report path (default: OUTPUT.json)")
    p.add_argument("--pmh-section", type=int, default=None)
    _add_model_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("verify", help="check a circuit against a truth table")
    p.add_argument("circuit")
    p.add_argument("truthtable")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="synthesize seeded random permutations and write CSV")
    p.add_argument("--n", required=True, help="wire counts: 8, 3-6, 3..6 or 8,10")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rest", choices=["naive", "improved", "both"], default="improved")
    p.add_argument("--csv", help="output path (default: stdout)")
    p.add_argument("--timing", action="store_true",
                   help="record wall_time_ms (otherwise 0 so output is reproducible)")
    p.add_argument("--pmh-section", type=int, default=None)
    _add_model_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("cost", help="gate histogram and elementary-gate estimate")
    p.add_argument("circuit")
    _add_model_flags(p)
    p.set_defaults(func=cmd_cost)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RevSynthError as exc:
        _err(str(exc))
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
