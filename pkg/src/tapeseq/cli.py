"""Command-line entry point: generate, solve, evaluate, bench and online."""

from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import policies
from .exact import TooLarge, solve_exact
from .instances import FAMILIES, Instance, InstanceSpec, format_instance, generate, read_instance
from .online import response_metrics, simulate_ari, simulate_online_fifo
from .stochastic import common_scale, expected_objective, fptas_solve, solve_weighted
from .tape import EmptyRequests, IncompletePlan, InvalidInstance, evaluate_sequence

# KB per second at 360 MB/s
READ_SPEED_KB = 360_000
DEFAULT_EXACT_CAP = 400
METHODS = ("fifo", "fiff", "ssf", "fifila", "lfl", "exact", "slts", "fptas")
BENCH_POLICIES = ("fifo", "fiff", "fifila", "lfl", "exact")
RESULT_HEADER = [
    "instance", "family", "n", "p", "sigma", "policy", "total_units",
    "avg_per_request_units", "avg_seconds", "runtime_ms", "ratio_vs_exact",
]
TRACE_HEADER = ["file", "release", "service_time", "response", "adjusted"]
FIFO_MODELS = {
    "pass-through": policies.fifo_pass_through_totals,
    "strict": policies.fifo_shuffle_totals,
}


def fmt_decimal(x, places: int = 6) -> str:
    """Exact half-even rounding of a rational to a fixed number of decimals."""
    x = Fraction(x)
    scaled = round(x * 10**places)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10**places)
    return f"{sign}{whole}.{frac:0{places}d}"


def fmt_units(x) -> str:
    """Integers as they are, other rationals with six decimals."""
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else fmt_decimal(x)


def to_seconds(units) -> Fraction:
    return Fraction(units) / READ_SPEED_KB


@dataclass
class Outcome:
    sequence: tuple[int, ...]
    value: Fraction
    runtime_ms: float


def run_method(inst: Instance, method: str, epsilon: float = 0.5, exact_cap: int = DEFAULT_EXACT_CAP) -> Outcome:
    tape, requests = inst.tape, inst.requests
    start = time.perf_counter()
    if method == "fifo":
        seq = policies.fifo(tape, requests, inst.arrival_order())
    elif method == "fiff":
        seq = policies.fiff(requests)
    elif method == "ssf":
        seq = policies.ssf(tape, requests)
    elif method == "fifila":
        seq = policies.fifila(requests)
    elif method == "lfl":
        seq = policies.lfl(tape, requests)
    elif method == "exact":
        if inst.n > exact_cap:
            raise TooLarge(f"exact refuses n = {inst.n} above the cap of {exact_cap} (see --exact-cap)")
        seq = solve_exact(tape, requests).sequence
    elif method == "slts":
        profile = inst.profile()
        seq = solve_weighted(tape, profile, scale=common_scale(profile)).sequence
    elif method == "fptas":
        seq = fptas_solve(tape, inst.profile(), Fraction(str(epsilon))).sequence
    else:
        raise ValueError(f"unknown method {method!r}")
    elapsed = (time.perf_counter() - start) * 1000
    if method in ("slts", "fptas"):
        value = expected_objective(tape, inst.profile(), seq)
    else:
        value = Fraction(evaluate_sequence(tape, requests, seq).total)
    return Outcome(tuple(seq), value, elapsed)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tapeseq", description="Sequencing read requests on a linear tape.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a generated instance")
    g.add_argument("--family", choices=FAMILIES, required=True)
    g.add_argument("--n", type=int, default=100)
    g.add_argument("--mu", type=float, default=13.04)
    g.add_argument("--sigma", type=float, default=2.38)
    g.add_argument("--p", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--tiles", type=int, default=15)
    g.add_argument("--files-per-tile", type=int, default=12)
    g.add_argument("--bands", default="4,5", help="comma-separated 1-based band indices (landsat)")
    g.add_argument("--cloud-threshold", type=float, default=30.0)
    g.add_argument("--out", help="output path (default: standard output)")

    s = sub.add_parser("solve", help="sequence one instance")
    s.add_argument("instance")
    s.add_argument("--method", choices=METHODS, required=True)
    s.add_argument("--epsilon", type=float, default=0.5)
    s.add_argument("--exact-cap", type=int, default=DEFAULT_EXACT_CAP)

    e = sub.add_parser("evaluate", help="evaluate a given sequence")
    e.add_argument("instance")
    e.add_argument("--sequence", required=True, help="comma-separated file ids")

    b = sub.add_parser("bench", help="run a benchmark sweep and write CSV")
    b.add_argument("--family", choices=("lognormal", "equal"), default="lognormal")
    b.add_argument("--n", default="100", help="comma-separated file counts")
    b.add_argument("--p", default="1.0", help="comma-separated request probabilities")
    b.add_argument("--sigma", default="2.38", help="comma-separated sigmas")
    b.add_argument("--mu", type=float, default=13.04)
    b.add_argument("--reps", type=int, default=10)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--fifo-samples", type=int, default=1000)
    b.add_argument(
        "--fifo-model", choices=tuple(FIFO_MODELS), default="pass-through",
        help="pass-through: requested files crossed while moving right are read on the way; "
        "strict: every file waits for its turn in arrival order",
    )
    b.add_argument("--policies", default=",".join(BENCH_POLICIES))
    b.add_argument("--exact-cap", type=int, default=DEFAULT_EXACT_CAP)
    b.add_argument("--no-timing", action="store_true", help="leave runtime_ms empty for byte-stable output")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out", help="CSV path (default: standard output)")

    o = sub.add_parser("online", help="simulate an online instance and write a trace CSV")
    o.add_argument("instance")
    o.add_argument("--policy", choices=("ari", "fifo"), default="ari")
    o.add_argument("--alpha", type=int, default=2)
    o.add_argument("--out", help="trace CSV path (default: standard output)")
    return parser


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _write(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_generate(args) -> int:
    spec = InstanceSpec(
        args.family, n=args.n, mu=args.mu, sigma=args.sigma, p=args.p, seed=args.seed,
        tiles=args.tiles, files_per_tile=args.files_per_tile, bands=tuple(_ints(args.bands)),
        cloud_threshold=args.cloud_threshold,
    )
    _write(format_instance(generate(spec)), args.out)
    return 0


def cmd_solve(args) -> int:
    inst = read_instance(args.instance)
    out = run_method(inst, args.method, args.epsilon, args.exact_cap)
    m = inst.requests.m if args.method not in ("slts", "fptas") else inst.profile().q0
    avg = out.value / m if m else Fraction(0)
    print("sequence:", " ".join(map(str, out.sequence)))
    print("total:", fmt_units(out.value))
    print("avg_per_request:", fmt_decimal(avg))
    print("avg_seconds:", fmt_decimal(to_seconds(avg)))
    print("runtime_ms:", f"{out.runtime_ms:.3f}")
    return 0


def cmd_evaluate(args) -> int:
    inst = read_instance(args.instance)
    ev = evaluate_sequence(inst.tape, inst.requests, _ints(args.sequence))
    print("responses:", " ".join(map(str, ev.responses)))
    print("total:", ev.total)
    return 0


@dataclass(frozen=True)
class BenchCell:
    family: str
    n: int
    p: float
    sigma: float
    mu: float
    rep: int
    seed: int

    @property
    def instance_id(self) -> str:
        return f"{self.family}-n{self.n}-p{self.p:g}-s{self.sigma:g}-r{self.rep:03d}"


def _bench_cell(cell: BenchCell, names: list[str], fifo_samples: int, exact_cap: int, timing: bool, fifo_model: str):
    inst = generate(InstanceSpec(cell.family, n=cell.n, mu=cell.mu, sigma=cell.sigma, p=cell.p, seed=cell.seed))
    m = inst.requests.m
    results: dict[str, tuple[Fraction, float] | str] = {}
    for name in names:
        try:
            if name == "fifo":
                start = time.perf_counter()
                rng = np.random.default_rng(cell.seed)
                totals = FIFO_MODELS[fifo_model](inst.tape, inst.requests, fifo_samples, rng)
                ms = (time.perf_counter() - start) * 1000
                results[name] = (Fraction(int(totals.sum()), len(totals)), ms)
            else:
                if name == "exact" and cell.n > exact_cap:
                    continue
                out = run_method(inst, name, exact_cap=exact_cap)
                results[name] = (out.value, out.runtime_ms)
        except Exception as exc:  # recorded per row, the sweep continues
            results[name] = f"{type(exc).__name__}: {exc}"
    exact = results.get("exact")
    rows = []
    for name, res in results.items():
        row = [cell.instance_id, cell.family, str(cell.n), f"{cell.p:g}", f"{cell.sigma:g}", name]
        if isinstance(res, str):
            rows.append((row + [""] * 5, res))
            continue
        total, ms = res
        avg = total / m
        ratio = fmt_decimal(total / exact[0]) if isinstance(exact, tuple) and exact[0] else ""
        row += [
            fmt_units(total), fmt_decimal(avg), fmt_decimal(to_seconds(avg)),
            f"{ms:.3f}" if timing else "", ratio,
        ]
        rows.append((row, None))
    return rows


def bench_rows(cells: list[BenchCell], names, fifo_samples, exact_cap, timing=True, jobs=1, fifo_model="pass-through"):
    args = [(c, list(names), fifo_samples, exact_cap, timing, fifo_model) for c in cells]
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_bench_cell, *zip(*args)))
    else:
        chunks = [_bench_cell(*a) for a in args]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r[0][0], r[0][5]))
    return rows


def cmd_bench(args) -> int:
    names = [x.strip() for x in args.policies.split(",") if x.strip()]
    unknown = set(names) - set(METHODS)
    if unknown:
        raise InvalidInstance(f"unknown policies {sorted(unknown)}")
    cells = [
        BenchCell(args.family, n, p, sigma, args.mu, rep, args.seed + rep)
        for n in _ints(args.n)
        for p in _floats(args.p)
        for sigma in _floats(args.sigma)
        for rep in range(args.reps)
    ]
    rows = bench_rows(cells, names, args.fifo_samples, args.exact_cap, not args.no_timing, args.jobs, args.fifo_model)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_HEADER)
    failed = 0
    for row, error in rows:
        writer.writerow(row)
        if error:
            failed += 1
            print(f"{row[0]} {row[5]}: {error}", file=sys.stderr)
    _write(buf.getvalue(), args.out)
    return 1 if failed else 0


def cmd_online(args) -> int:
    inst = read_instance(args.instance)
    if not inst.is_online:
        raise InvalidInstance("the instance has no release times")
    online = inst.online()
    trace = simulate_ari(online, args.alpha) if args.policy == "ari" else simulate_online_fifo(online)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for r in trace.records:
        writer.writerow([r.file, r.release, r.service_time, r.response, r.adjusted])
    _write(buf.getvalue(), args.out)
    summary = response_metrics(trace)
    stream = sys.stdout if args.out else sys.stderr
    print(f"requests: {summary.count}", file=stream)
    print(f"total_response: {summary.total_response}", file=stream)
    print(f"total_adjusted: {summary.total_adjusted}", file=stream)
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "evaluate": cmd_evaluate,
    "bench": cmd_bench,
    "online": cmd_online,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (InvalidInstance, IncompletePlan, EmptyRequests, TooLarge, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
