"""Command-line entry point: ``ucsp solve | analyze | gen | bench``.

Exit codes: 0 satisfiable / success, 1 not found or unsatisfiable, 2 usage
or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import secrets
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import analysis
from .be import extended_be
from .formula import ParseError, parse_instance_with_solution, serialize_instance
from .generate import BLOCKER_MODES, CapExceeded, brute_force_solve, generate_unique
from .hybrid import HybridConfig, default_cutoff, solve_hybrid
from .ppsz import solve_ppsz
from .work import SolveResult, Status, Work

EXIT_OK, EXIT_NOT_FOUND, EXIT_USAGE = 0, 1, 2
ALGOS = ("ppsz", "be", "hybrid", "brute")
JOBS_ENV = "UCSP_JOBS"


class UsageError(Exception):
    pass


def read_config(path: str) -> Dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment.  Dashes in keys become underscores."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ucsp", description="Unique (k,2)-CSP solver laboratory")
    p.add_argument("--config", help="key=value file supplying defaults for the subcommand")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one instance file")
    s.add_argument("instance")
    s.add_argument("--algo", choices=ALGOS, default="hybrid")
    s.add_argument("--t", type=float, default=None, help="PPSZ cutoff (hybrid)")
    s.add_argument("--D", type=int, default=1, help="implication depth")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--budget", type=int, default=100_000, help="max iterations (ppsz, be)")
    s.add_argument("--exponent", type=float, default=None, help="restart budget exponent (hybrid)")
    s.add_argument("--mix", action="store_true", help="alternate with plain PPSZ (hybrid)")
    s.add_argument("--wallclock", type=float, default=None, help="seconds (hybrid)")
    s.add_argument("--jobs", type=int, default=_default_jobs())
    s.add_argument("--format", choices=("text", "json"), default="text")
    s.add_argument("--output", default=None)

    a = sub.add_parser("analyze", help="running-time exponents")
    a.add_argument("--k", type=int, nargs="+", default=[5, 6, 7])
    a.add_argument("--t", type=float, default=None)
    a.add_argument("--partition", default=None, help="comma-separated parts, e.g. 3,2")
    a.add_argument("--objective", choices=("cost", "tilde_cost"), default="cost")
    a.add_argument("--optimize-t", action="store_true")
    a.add_argument("--table1", action="store_true", help="the per-algorithm comparison table")
    a.add_argument("--format", choices=("text", "csv", "json"), default="text")
    a.add_argument("--output", default=None)

    g = sub.add_parser("gen", help="write planted unique instances")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--blockers", choices=BLOCKER_MODES, default="random")
    g.add_argument("--out", default=".", help="output directory")

    b = sub.add_parser("bench", help="solver matrix over a corpus")
    b.add_argument("paths", nargs="*", help="instance files or directories")
    b.add_argument("--ladder", default=None, help="generate instances for n in LO..HI instead")
    b.add_argument("--k", type=int, default=5, help="domain size for --ladder")
    b.add_argument("--count", type=int, default=5, help="instances per n for --ladder")
    b.add_argument("--blockers", choices=BLOCKER_MODES, default="random")
    b.add_argument("--algos", default="hybrid", help="comma-separated subset of " + ",".join(ALGOS))
    b.add_argument("--t", default=None, help="comma-separated cutoffs for hybrid")
    b.add_argument("--D", type=int, default=1)
    b.add_argument("--budget", type=int, default=100_000)
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--jobs", type=int, default=_default_jobs())
    b.add_argument("--format", choices=("text", "csv", "json"), default="text")
    b.add_argument("--output", default=None)
    return p


# -- solving ---------------------------------------------------------------


def run_solver(f, algo: str, seed: int, t: Optional[float] = None, D: int = 1,
               budget: int = 100_000, exponent: Optional[float] = None,
               mix: bool = False, wallclock: Optional[float] = None, jobs: int = 1) -> SolveResult:
    rng = random.Random(seed)
    if algo == "brute":
        sol = brute_force_solve(f)
        return SolveResult(Status.SAT if sol is not None else Status.UNSAT, sol, 1)
    if algo == "ppsz":
        return solve_ppsz(f, D, rng, budget)
    if algo == "be":
        work = Work()
        for i in range(1, budget + 1):
            res = extended_be(f, rng, work)
            if res.status is not Status.NOT_FOUND:
                res.iterations = i
                return res
        return SolveResult(Status.NOT_FOUND, None, budget, work)
    if algo == "hybrid":
        k = max((bin(m).count("1") for m in f.domains.values()), default=1)
        cfg = HybridConfig(
            t=default_cutoff(k) if t is None else t, D=D, k=k,
            restart_budget_exponent=exponent, mix=mix,
        )
        return solve_hybrid(f, cfg, rng, wallclock=wallclock, jobs=jobs)
    raise UsageError(f"unknown algorithm {algo!r}")


def _result_record(res: SolveResult, seed: int, algo: str) -> dict:
    sol = res.assignment
    return {
        "algo": algo,
        "status": res.status.value,
        "assignment": None if sol is None else [sol[x] for x in sorted(sol)],
        "iterations": res.iterations,
        "settlements": res.work.settlements,
        "nodes": res.work.nodes,
        "work": res.work.total,
        "seed": seed,
    }


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    try:
        f, _ = parse_instance_with_solution(Path(args.instance).read_bytes())
    except OSError as exc:
        raise UsageError(str(exc)) from None
    seed = args.seed if args.seed is not None else secrets.randbits(32)
    try:
        res = run_solver(f, args.algo, seed, args.t, args.D, args.budget,
                         args.exponent, args.mix, args.wallclock, args.jobs)
    except CapExceeded as exc:
        raise UsageError(str(exc)) from None
    rec = _result_record(res, seed, args.algo)
    if args.format == "json":
        text = json.dumps(rec) + "\n"
    else:
        lines = [f"status {rec['status'].replace('_', ' ')}"]
        if rec["assignment"] is not None:
            lines.append("assignment " + " ".join(map(str, rec["assignment"])))
        lines += [
            f"iterations {rec['iterations']}",
            f"work {rec['work']} (settlements {rec['settlements']}, nodes {rec['nodes']})",
            f"seed {seed}",
        ]
        text = "\n".join(lines) + "\n"
    _emit(text, args.output)
    return EXIT_OK if res.found else EXIT_NOT_FOUND


# -- analysis --------------------------------------------------------------


def _analysis_rows(args) -> List[dict]:
    rows = []

    def row(k, strategy, value, t=None, partition=""):
        rows.append({
            "k": str(k), "strategy": strategy,
            "t": "" if t is None else analysis.fmt6(t), "partition": partition,
            "value_logk": analysis.fmt6(value), "base": analysis.fmt6(k**value),
        })

    fn = analysis.cost if args.objective == "cost" else analysis.tilde_cost
    for k in args.k:
        if args.optimize_t:
            t, v = analysis.optimize_t(k, args.objective)
            row(k, args.objective, v, t)
        elif args.partition:
            part = analysis.Partition.parse(args.partition)
            t = args.t if args.t is not None else default_cutoff(k)
            row(k, "hybrid_partition", analysis.star3(k, t, part), t, str(part))
        elif args.t is not None:
            row(k, args.objective, fn(k, args.t), args.t)
        else:
            rows.extend(analysis.report_rows([analysis.analyze(k)]))
    return rows


def cmd_analyze(args) -> int:
    try:
        if args.table1:
            ks = args.k if args.k != [5, 6, 7] else [3, 4, 5, 6, 7]
            reports = [analysis.analyze(k) for k in ks]
            if args.format == "text":
                text = analysis.table1_text(reports)
            else:
                text = _format_rows(analysis.report_rows(reports), args.format)
        else:
            text = _format_rows(_analysis_rows(args), args.format)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(text, args.output)
    return EXIT_OK


def _format_rows(rows: List[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    if not rows:
        return ""
    cols = list(rows[0])
    if fmt == "csv":
        import csv
        import io

        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()
    widths = {c: max(len(c), *(len(str(r[c])) for r in rows)) for c in cols}
    lines = ["  ".join(c.ljust(widths[c]) for c in cols)]
    lines += ["  ".join(str(r[c]).ljust(widths[c]) for c in cols) for r in rows]
    return "\n".join(line.rstrip() for line in lines) + "\n"


# -- corpus ----------------------------------------------------------------


def cmd_gen(args) -> int:
    seed = args.seed if args.seed is not None else secrets.randbits(32)
    rng = random.Random(seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        for i in range(args.count):
            inst = generate_unique(args.n, args.k, args.blockers, rng)
            path = out / f"ucsp_n{args.n}_k{args.k}_{i:04d}.txt"
            path.write_bytes(serialize_instance(inst.formula, inst.planted))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"wrote {args.count} instances to {out} (seed {seed})")
    return EXIT_OK


def _bench_cell(task):
    idx, name, n, text, algo, t, D, budget, seed = task
    f, _ = parse_instance_with_solution(text)
    res = run_solver(f, algo, seed, t, D, budget)
    return idx, {"instance": name, "n": n, "algo": algo, "t": "" if t is None else t,
                 "status": res.status.value, "iterations": res.iterations, "work": res.work.total}


def _bench_corpus(args, rng) -> List[tuple]:
    items = []
    if args.ladder:
        lo, _, hi = args.ladder.partition("..")
        for n in range(int(lo), int(hi) + 1):
            for i in range(args.count):
                inst = generate_unique(n, args.k, args.blockers, rng)
                items.append((f"n{n}_{i}", n, serialize_instance(inst.formula, inst.planted)))
        return items
    files = []
    for p in map(Path, args.paths):
        files += sorted(p.iterdir()) if p.is_dir() else [p]
    for path in files:
        text = path.read_bytes()
        f, _ = parse_instance_with_solution(text)
        items.append((path.name, f.n, text))
    return items


def cmd_bench(args) -> int:
    seed = args.seed if args.seed is not None else secrets.randbits(32)
    rng = random.Random(seed)
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    for a in algos:
        if a not in ALGOS:
            raise UsageError(f"unknown algorithm {a!r}")
    cutoffs = [None] if args.t is None else [float(x) for x in args.t.split(",")]
    if not args.paths and not args.ladder:
        raise UsageError("bench needs instance paths or --ladder")
    try:
        corpus = _bench_corpus(args, rng)
    except (OSError, ParseError) as exc:
        raise UsageError(str(exc)) from None
    tasks = []
    for name, n, text in corpus:
        for algo in algos:
            for t in cutoffs if algo == "hybrid" else [None]:
                tasks.append((len(tasks), name, n, text, algo, t, args.D, args.budget,
                              rng.getrandbits(32)))
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            cells = list(pool.map(_bench_cell, tasks))
    else:
        cells = [_bench_cell(task) for task in tasks]
    rows = [r for _, r in sorted(cells, key=lambda c: c[0])]
    summary = bench_summary(rows)
    if args.format == "json":
        text = json.dumps({"seed": seed, "runs": rows, "summary": summary}, indent=2) + "\n"
    elif args.format == "csv":
        text = _format_rows(summary, "csv")
    else:
        text = _format_rows(summary, "text") + f"seed {seed}\n"
    _emit(text, args.output)
    return EXIT_OK


def bench_summary(rows: Sequence[dict]) -> List[dict]:
    """Median iterations and work per (algo, t, n); solved counts alongside."""
    groups: Dict[tuple, List[dict]] = {}
    for r in rows:
        groups.setdefault((r["algo"], str(r["t"]), r["n"]), []).append(r)
    out = []
    for (algo, t, n), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])):
        out.append({
            "algo": algo, "t": t, "n": n, "runs": len(rs),
            "solved": sum(r["status"] == "sat" for r in rs),
            "median_iterations": statistics.median(r["iterations"] for r in rs),
            "median_work": statistics.median(r["work"] for r in rs),
        })
    return out


COMMANDS = {"solve": cmd_solve, "analyze": cmd_analyze, "gen": cmd_gen, "bench": cmd_bench}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        pre, _ = parser.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if pre.config:
            defaults = read_config(pre.config)
            subparser = parser._subparsers._group_actions[0].choices[pre.command]
            known = {a.dest: a for a in subparser._actions}
            unknown = set(defaults) - set(known)
            if unknown:
                raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
            subparser.set_defaults(**{
                key: _coerce(known[key], value) for key, value in defaults.items()
            })
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return EXIT_USAGE if exc.code else EXIT_OK
        return COMMANDS[args.command](args)
    except (UsageError, ParseError) as exc:
        print(f"ucsp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _coerce(action, value: str):
    if isinstance(action, argparse._StoreTrueAction):
        return value.lower() in ("1", "true", "yes", "on")
    if action.nargs in ("+", "*"):
        return [action.type(v) if action.type else v for v in value.replace(",", " ").split()]
    return action.type(value) if action.type else value


if __name__ == "__main__":
    sys.exit(main())
