"""Command-line entry point: ``rftfl {solve,eval,oracle,gen,bench}``.

solve/eval/oracle print one JSON object per line (a run record). Wall-clock
timings are only included with ``--timings`` so that records stay
byte-identical across repeated runs.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from pathlib import Path

from .backup_alpha import DEFAULT_CANDIDATE_CAP
from .costs import as_facility_set, cost_alpha_rftfl, cost_ufl
from .graph import (
    TREE_FAMILIES,
    Instance,
    InstanceFormatError,
    all_pairs_distances,
    generate_corpus,
    generate_random_instance,
    generate_tree_instance,
    read_instance,
    serialize_instance,
    write_instance,
)
from .oracle import ALPHA_MAX, exact_alpha_rftfl, exact_ufl
from .pipeline import Stage1Solver, solve_alpha_rftfl, solve_rftfl, solve_ufl

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2

BENCH_COLUMNS = [
    "instance",
    "n",
    "m",
    "alpha",
    "alg_cost",
    "oracle_cost",
    "ratio",
    "certified_bound",
    "stage1",
    "runtime_ms",
]


class InputError(Exception):
    pass


def _num(x):
    if x is None or not math.isfinite(x):
        return None
    return int(x) if float(x).is_integer() else float(x)


def ratio_of(alg: float, opt: float) -> float | None:
    if opt is None or not math.isfinite(opt) or not math.isfinite(alg):
        return None
    if opt == 0:
        return 1.0 if alg == 0 else math.inf
    return alg / opt


def _load(path) -> Instance:
    try:
        return read_instance(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except (InstanceFormatError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _oracle(inst, dist, alpha):
    if alpha == 0:
        return exact_ufl(inst, dist)
    return exact_alpha_rftfl(inst, dist, alpha, max_n=16 if alpha == 1 else 14)


def _solve(inst, dist, alpha, s1, cap):
    if alpha == 0:
        return solve_ufl(inst, dist, s1)
    if alpha == 1:
        return solve_rftfl(inst, dist, s1)
    return solve_alpha_rftfl(inst, dist, s1, alpha, cap)


def _emit(record: dict) -> None:
    sys.stdout.write(json.dumps(record, separators=(",", ":")) + "\n")


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    dist = all_pairs_distances(inst)
    s1 = Stage1Solver(args.stage1, seed=args.seed)
    try:
        report = _solve(inst, dist, args.alpha, s1, args.cap)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    alg = report.cost.total
    record = {
        "instance": Path(args.instance).stem,
        "command": "solve",
        "alpha": args.alpha,
        "stage1": s1.kind,
        "seed": args.seed,
        "cap": args.cap,
        "feasible": report.feasible,
        "set": list(report.final),
        "r1": list(report.r1),
        "r2": list(report.r2),
        "cost": {k: _num(v) if k != "worst_failure" else v for k, v in report.cost.as_dict().items()},
        "alg_cost": _num(alg),
        "oracle_cost": None,
        "ratio": None,
        "certified_bound": report.certified_ratio,
        "heuristic": report.heuristic,
    }
    if args.with_oracle:
        opt = _oracle(inst, dist, args.alpha).best_cost
        record["oracle_cost"] = _num(opt)
        record["ratio"] = ratio_of(alg, opt)
    if args.timings:
        record["timings"] = {k: round(v, 6) for k, v in report.timings.items()}
    _emit(record)
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_eval(args) -> int:
    inst = _load(args.instance)
    try:
        members = as_facility_set((int(tok) for tok in args.set.split(",") if tok.strip()), inst.n)
    except ValueError as exc:
        raise InputError(f"bad --set {args.set!r}: {exc}") from None
    if not members:
        raise InputError("--set must name at least one node")
    dist = all_pairs_distances(inst)
    if args.alpha == 0:
        cost = cost_ufl(inst, dist, members)
    else:
        cost = cost_alpha_rftfl(inst, dist, members, args.alpha)
    _emit(
        {
            "instance": Path(args.instance).stem,
            "command": "eval",
            "alpha": args.alpha,
            "set": list(members),
            "feasible": cost.feasible,
            "facility": _num(cost.facility),
            "ship": _num(cost.ship),
            "backup": _num(cost.backup),
            "total": _num(cost.total),
            "worst_failure": list(cost.worst_failure),
        }
    )
    return EXIT_OK if cost.feasible else EXIT_INFEASIBLE


def cmd_oracle(args) -> int:
    inst = _load(args.instance)
    dist = all_pairs_distances(inst)
    try:
        res = _oracle(inst, dist, args.alpha)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _emit(
        {
            "instance": Path(args.instance).stem,
            "command": "oracle",
            "alpha": args.alpha,
            "feasible": res.feasible,
            "set": list(res.best_set or ()),
            "oracle_cost": _num(res.best_cost),
            "sets_examined": res.sets_examined,
        }
    )
    return EXIT_OK if res.feasible else EXIT_INFEASIBLE


def _write_or_print(inst: Instance, out) -> None:
    if out:
        write_instance(inst, out)
    else:
        sys.stdout.write(serialize_instance(inst))


def cmd_gen(args) -> int:
    try:
        if args.kind == "tree":
            _write_or_print(generate_tree_instance(args.family, args.n, args.range, args.seed), args.out)
        elif args.kind == "random":
            inst = generate_random_instance(args.n, args.density, args.max_length, args.max_demand, args.max_cost, args.seed)
            _write_or_print(inst, args.out)
        else:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            for i, inst in enumerate(generate_corpus(args.count, args.seed, args.n_min, args.n_max)):
                write_instance(inst, out / f"inst_{i:04d}.txt")
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return EXIT_OK


def bench_rows(corpus_dir, alpha: int, stage1: str, seed: int = 0, cap: int = DEFAULT_CANDIDATE_CAP, oracle_max_n: int = 12):
    paths = sorted(Path(corpus_dir).glob("*.txt"))
    if not paths:
        raise InputError(f"no *.txt instances in {corpus_dir}")
    s1 = Stage1Solver(stage1, seed=seed)
    rows = []
    for path in paths:
        inst = _load(path)
        dist = all_pairs_distances(inst)
        t0 = time.perf_counter()
        report = _solve(inst, dist, alpha, s1, cap)
        runtime_ms = (time.perf_counter() - t0) * 1e3
        opt = None
        if inst.n <= oracle_max_n and inst.n >= alpha + 1:
            opt = _oracle(inst, dist, alpha).best_cost
        ratio = ratio_of(report.cost.total, opt)
        rows.append(
            {
                "instance": path.stem,
                "n": inst.n,
                "m": len(inst.edges),
                "alpha": alpha,
                "alg_cost": _num(report.cost.total),
                "oracle_cost": _num(opt),
                "ratio": ratio,
                "certified_bound": report.certified_ratio,
                "stage1": s1.kind,
                "runtime_ms": round(runtime_ms, 3),
            }
        )
    return rows


def cmd_bench(args) -> int:
    rows = bench_rows(args.corpus, args.alpha, args.stage1, args.seed, args.cap, args.oracle_max_n)
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: "" if v is None else (f"{v:.6g}" if k == "ratio" else v) for k, v in row.items()})
    finally:
        if fh is not sys.stdout:
            fh.close()
    bad = [r for r in rows if r["ratio"] is not None and r["ratio"] > r["certified_bound"]]
    if bad:
        print(f"{len(bad)} instance(s) exceed the certified bound", file=sys.stderr)
    return EXIT_OK


def _alpha(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("alpha must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rftfl", description="Robust fault-tolerant facility location toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the three-stage approximation")
    p.add_argument("instance")
    p.add_argument("--alpha", type=_alpha, default=1, help="failures to tolerate; 0 means plain UFL")
    p.add_argument("--stage1", default="exact", choices=["exact", "exact_bruteforce", "local_search"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=DEFAULT_CANDIDATE_CAP)
    p.add_argument("--with-oracle", action="store_true", help="also compute the exact optimum")
    p.add_argument("--timings", action="store_true", help="include per-stage wall-clock times")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("eval", help="cost breakdown of a given facility set")
    p.add_argument("instance")
    p.add_argument("--set", required=True, help="comma-separated node ids")
    p.add_argument("--alpha", type=_alpha, default=1)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("oracle", help="exact optimum by enumeration")
    p.add_argument("instance")
    p.add_argument("--alpha", type=_alpha, default=1, choices=range(ALPHA_MAX + 1), metavar="ALPHA")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="generate instances")
    p.add_argument("kind", choices=["tree", "random", "corpus"])
    p.add_argument("--family", choices=TREE_FAMILIES, default=TREE_FAMILIES[0])
    p.add_argument("-n", type=int, default=8)
    p.add_argument("--range", type=int, default=9, help="value range for tree families")
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--max-length", type=int, default=10)
    p.add_argument("--max-demand", type=int, default=10)
    p.add_argument("--max-cost", type=int, default=20)
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--n-min", type=int, default=4)
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", help="output file (directory for 'corpus'); stdout if omitted")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="solve every instance of a corpus and write a CSV")
    p.add_argument("corpus")
    p.add_argument("--alpha", type=_alpha, default=1)
    p.add_argument("--stage1", default="exact", choices=["exact", "exact_bruteforce", "local_search"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=DEFAULT_CANDIDATE_CAP)
    p.add_argument("--oracle-max-n", type=int, default=12)
    p.add_argument("--out", help="CSV path; stdout if omitted")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "gen" and args.kind == "corpus" and not args.out:
        parser.error("gen corpus needs --out DIR")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
