"""Command-line interface: ``generate``, ``run``, ``exact`` and ``bench``.

Exit codes: 0 success, 2 promise violation, 3 algorithm-reported failure,
4 configuration or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import sys
import time

import numpy as np

from . import fas, rankaggr, sinkfind, toposort
from .exceptions import AlgorithmFailure, ConfigError, PromiseViolation
from .graphcore import (Digraph, Tournament, count_back_edges, exact_min_fas,
                        is_acyclic_tournament)
from .streamgen import (gen_dno, gen_plantdag, gen_tou, random_ordering,
                        read_edgelist, stream_of, write_edgelist)

log = logging.getLogger("digraphstream")

EXIT_OK, EXIT_PROMISE, EXIT_FAILURE, EXIT_CONFIG = 0, 2, 3, 4

BENCH_COLUMNS = ["algorithm", "n", "p", "q", "eps", "c", "trials", "success_rate",
                 "mean_ratio", "stored_items_p50", "stored_items_p95", "passes"]

# algorithm id -> (instance family, default generator)
ALGORITHMS = {
    "fas-sketch": ("tournament", "dno"),
    "kwiksort": ("tournament", "dno"),
    "degree-order": ("tournament", "dno"),
    "sink-multipass": ("tournament", "dyes"),
    "sink-onepass": ("tournament", "dyes"),
    "topo-tournament": ("tournament", "dyes"),
    "topo-plantdag": ("plantdag", "plantdag"),
    "topo-largeq": ("plantdag", "plantdag"),
    "topo-smallq": ("plantdag", "plantdag"),
    "topo-tr": ("plantdag", "plantdag"),
    "shortpath": ("shortpath", "shortpath"),
    "rank-sketch": ("rankings", "rankings"),
    "rank-pick": ("rankings", "rankings"),
}


def trial_seeds(seed: int, trial: int) -> tuple[int, int]:
    """Independent (instance, algorithm) seeds for one trial."""
    a, b = np.random.SeedSequence([seed, trial]).generate_state(2, np.uint64)
    return int(a >> np.uint64(1)), int(b >> np.uint64(1))


# ----------------------------------------------------------------------------
# instances

def make_instance(kind: str, args, seed: int):
    """Generate one instance of ``kind`` from CLI parameters."""
    n = args.n
    if n is None:
        raise ConfigError("--n is required to generate an instance")
    if kind in ("tou", "dyes"):
        pi = random_ordering(n, seed)
        return {"graph": gen_tou(pi), "order": pi}
    if kind == "dno":
        return {"graph": gen_dno(n, seed), "order": None}
    if kind == "plantdag":
        q = _need(args.q, "--q")
        inst = gen_plantdag(n, q, seed)
        return {"graph": inst.graph, "order": inst.hidden_order, "q": q}
    if kind == "rankings":
        k = args.k or 5
        return {"rankings": rankaggr.gen_rankings(n, k, seed), "n": n}
    if kind == "shortpath":
        p = args.p or 3
        g, s, t = toposort.gen_shortpath_instance(n, 2 * p + 2, reachable=not args.unreachable,
                                                  seed=seed)
        return {"graph": g, "source": s, "target": t, "reachable": not args.unreachable}
    raise ConfigError(f"unknown generator {kind!r}")


def load_instance(path: str, family: str, args) -> dict:
    if family == "rankings":
        rs = rankaggr.read_rankings(path)
        return {"rankings": rs, "n": rs.n}
    n, edges, order = read_edgelist(path)
    if family == "tournament":
        try:
            g = Tournament.from_edges(n, edges)
        except ValueError as exc:
            raise PromiseViolation(f"input is not a tournament: {exc}") from None
    else:
        g = Digraph(n, edges)
    inst = {"graph": g, "order": order}
    if family == "plantdag":
        inst["q"] = _need(args.q, "--q")
    if family == "shortpath":
        inst["source"] = _need(args.source, "--source")
        inst["target"] = _need(args.target, "--target")
        inst["reachable"] = None
    return inst


def _need(value, flag):
    if value is None:
        raise ConfigError(f"{flag} is required")
    return value


# ----------------------------------------------------------------------------
# one trial

def run_trial(algorithm: str, inst: dict, args, seed: int) -> dict:
    """Run ``algorithm`` once; returns the JSON record fields (without wall time)."""
    rec: dict = {"algorithm": algorithm, "seed": seed}
    if algorithm.startswith("rank-"):
        return _run_rank(algorithm, inst, args, seed, rec)
    g = inst["graph"]
    n = g.n
    rec["n"] = n
    if algorithm == "fas-sketch":
        res = fas.fas_one_pass_sketch(stream_of(g), args.eps, seed, enum_cap=args.enum_cap,
                                      c_sketch=args.c_sketch)
        return _fas_record(rec, res, g, args)
    if algorithm == "kwiksort":
        p = args.p or 2
        res = fas.fas_kwiksort_stream(stream_of(g, pass_budget=p), p, args.c, seed)
        return _fas_record(rec, res, g, args)
    if algorithm == "degree-order":
        return _fas_record(rec, fas.fas_degree_order(stream_of(g)), g, args)
    if algorithm in ("sink-multipass", "sink-onepass"):
        if algorithm == "sink-multipass":
            p = args.p or 2
            res = sinkfind.sink_multipass(stream_of(g, pass_budget=2 * p - 1), p, seed)
        else:
            consts = sinkfind.FULL_CONSTANTS if args.constants == "full" else sinkfind.SCALED_CONSTANTS
            res = sinkfind.sink_random_order_onepass(
                stream_of(g, policy="fixed-random-shuffle", seed=seed), consts, seed)
        rec["vertex"] = res.vertex
        truth = int(np.flatnonzero(g.out_degrees() == 0)[0]) if (g.out_degrees() == 0).any() else None
        rec["success"] = None if truth is None else res.vertex == truth
        rec.update(res.meter)
        return rec
    if algorithm == "topo-tournament":
        res = toposort.toposort_tournament(stream_of(g))
        return _topo_record(rec, res, g, inst.get("order"))
    if algorithm in ("topo-plantdag", "topo-largeq", "topo-smallq"):
        q = inst["q"]
        if algorithm == "topo-smallq" or (algorithm == "topo-plantdag" and not toposort.use_largeq(n, q)):
            res = toposort.toposort_plantdag_smallq(stream_of(g, pass_budget=2), q, args.c_win)
            branch = "smallq"
        else:
            s = stream_of(g, pass_budget=toposort.largeq_pass_budget(n))
            res = toposort.toposort_plantdag_largeq(s, q, args.c_piv, seed)
            branch = "largeq"
        rec["branch"] = branch
        rec["q"] = q
        for key in ("phases", "max_u"):
            if key in res.diagnostics:
                rec[key] = res.diagnostics[key]
        return _topo_record(rec, res, g, inst.get("order"))
    if algorithm == "topo-tr":
        res = toposort.transitive_reduction_toposort(
            stream_of(g, policy="fixed-random-shuffle", seed=seed))
        rec["peak_retained"] = res.diagnostics["peak_retained"]
        return _topo_record(rec, res, g, inst.get("order"))
    if algorithm == "shortpath":
        p = args.p or 3
        s = stream_of(g, policy="per-pass-random-shuffle", pass_budget=p, seed=seed)
        out = toposort.shortpath_dag_random_order(s, p, inst["source"], inst["target"])
        rec["result"] = out
        rec["success"] = None if inst["reachable"] is None else out == inst["reachable"]
        rec.update(s.meter.snapshot())
        return rec
    raise ConfigError(f"unknown algorithm {algorithm!r}")


def _fas_record(rec, res, g, args):
    rec["ordering"] = res.ordering.tolist()
    rec["estimated_cost"] = res.estimated_cost
    rec["exact_cost"] = count_back_edges(g, res.ordering)
    if g.n <= args.oracle_cap:
        beta, _ = exact_min_fas(g, cap=args.oracle_cap)
        rec["beta"] = beta
        rec["ratio"] = _ratio(rec["exact_cost"], beta)
    rec.update(res.meter)
    return rec


def _topo_record(rec, res, g, order):
    rec["ordering"] = res.ordering.tolist()
    rec["exact_cost"] = count_back_edges(g, res.ordering)
    rec["success"] = res.ordering == order if order is not None else rec["exact_cost"] == 0
    rec.update(res.meter)
    return rec


def _run_rank(algorithm, inst, args, seed, rec):
    rs = inst["rankings"]
    if not isinstance(rs, rankaggr.RankingStream):
        rs = rankaggr.RankingStream(inst["n"], len(rs), orderings=rs)
    rec["n"] = rs.n
    rec["k"] = rs.k
    sigmas = rs.to_orderings()
    if algorithm == "rank-sketch":
        res = rankaggr.rank_aggr_sketch(rs, args.eps, seed, enum_cap=args.enum_cap,
                                        c_sketch=args.c_sketch)
        pi = res.ordering
        rec["estimated_cost"] = res.estimated_cost
        rec.update(res.meter)
    else:
        pi = rankaggr.rank_aggr_pick_random(sigmas, seed)
        rec["passes_used"] = 1
    rec["ordering"] = pi.tolist()
    rec["exact_cost"] = rankaggr.aggr_cost(pi, sigmas)
    if rs.n <= args.oracle_cap:
        _, best = rankaggr.rank_aggr_exact(sigmas, cap=args.oracle_cap)
        rec["beta"] = best
        rec["ratio"] = _ratio(rec["exact_cost"], best)
    return rec


# ----------------------------------------------------------------------------
# output

def _emit(args, records: list[dict], columns: list[str] | None = None):
    if args.format == "csv":
        cols = columns or sorted({k for r in records for k in r})
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in records:
            w.writerow({k: _csv_cell(r.get(k)) for k in cols})
        text = buf.getvalue()
    else:
        text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_cell(v):
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return ""
    if isinstance(v, list):
        return " ".join(map(str, v))
    return v


def summarize(algorithm: str, records: list[dict]) -> dict:
    """Aggregate trial records: success rate, ratio of summed costs, item quantiles."""
    ok = [r["success"] for r in records if r.get("success") is not None]
    failures = sum(1 for r in records if "error" in r)
    with_beta = [r for r in records if r.get("beta") is not None and "error" not in r]
    total_beta = sum(r["beta"] for r in with_beta)
    items = [r["stored_items_peak"] for r in records if r.get("stored_items_peak") is not None]
    passes = [r["passes_used"] for r in records if r.get("passes_used") is not None]
    if failures and not ok:
        ok = [False] * failures
    elif failures:
        ok = ok + [False] * failures
    return {
        "summary": True,
        "algorithm": algorithm,
        "trials": len(records),
        "failures": failures,
        "success_rate": (sum(ok) / len(ok)) if ok else None,
        "mean_ratio": _ratio(sum(r["exact_cost"] for r in with_beta), total_beta) if with_beta else None,
        "stored_items_p50": float(np.percentile(items, 50)) if items else None,
        "stored_items_p95": float(np.percentile(items, 95)) if items else None,
        "passes": max(passes) if passes else None,
    }


def _ratio(cost, beta):
    """``cost / beta``, with 0/0 read as an exact answer."""
    if beta:
        return cost / beta
    return 1.0 if cost == 0 else None


def _trials(algorithm: str, args, instance_source):
    """Run ``args.trials`` trials, recording algorithm failures instead of raising."""
    records = []
    for trial in range(args.trials):
        inst_seed, algo_seed = trial_seeds(args.seed, trial)
        inst = instance_source(inst_seed)
        start = time.perf_counter()
        try:
            rec = run_trial(algorithm, inst, args, algo_seed)
        except AlgorithmFailure as exc:
            rec = {"algorithm": algorithm, "seed": algo_seed, "error": str(exc),
                   "error_type": type(exc).__name__, "success": False}
        rec["trial"] = trial
        rec["wall_time"] = round(time.perf_counter() - start, 6)
        records.append(rec)
    return records


# ----------------------------------------------------------------------------
# subcommands

def cmd_generate(args) -> int:
    kind = args.kind
    inst = make_instance(kind, args, args.seed)
    if kind == "rankings":
        rankaggr.write_rankings(args.out or sys.stdout, args.n, inst["rankings"])
        return EXIT_OK
    g = inst["graph"]
    order = inst.get("order")
    write_edgelist(args.out or sys.stdout, g.n, g.edges(), order)
    truth = {}
    if order is not None:
        truth["order"] = order.tolist()
        if isinstance(g, Tournament):
            truth["sink"] = int(order.order[-1])
    if kind == "shortpath":
        truth.update(source=inst["source"], target=inst["target"], reachable=inst["reachable"])
    if truth and args.out:
        with open(args.out + ".truth.json", "w") as fh:
            json.dump(truth, fh, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


def cmd_run(args) -> int:
    algorithm = args.algorithm
    family, default_gen = ALGORITHMS[algorithm]
    _validate(algorithm, args)
    if args.input:
        fixed = load_instance(args.input, family, args)
        source = lambda _seed: fixed  # noqa: E731
    else:
        gen = args.gen or default_gen
        source = lambda s: make_instance(gen, args, s)  # noqa: E731
    records = _trials(algorithm, args, source)
    records.append(summarize(algorithm, records))
    _emit(args, records)
    return EXIT_FAILURE if any("error" in r for r in records) else EXIT_OK


def cmd_exact(args) -> int:
    if args.rankings:
        rs = rankaggr.read_rankings(args.input) if args.input else rankaggr.RankingStream(
            args.n, args.k or 5, orderings=make_instance("rankings", args, args.seed)["rankings"])
        pi, cost = rankaggr.rank_aggr_exact(rs.to_orderings(), cap=args.cap)
        rec = {"n": rs.n, "k": rs.k, "cost": cost, "ordering": pi.tolist()}
    else:
        if args.input:
            n, edges, _ = read_edgelist(args.input)
            try:
                t = Tournament.from_edges(n, edges)
            except ValueError as exc:
                raise PromiseViolation(f"input is not a tournament: {exc}") from None
        else:
            t = make_instance(args.gen or "dno", args, args.seed)["graph"]
        beta, pi = exact_min_fas(t, cap=args.cap)
        rec = {"n": t.n, "beta": beta, "ordering": pi.tolist(),
               "acyclic": bool(is_acyclic_tournament(t))}
    _emit(args, [rec])
    return EXIT_OK


def bench_grid(args):
    """Deterministic sweep order: algorithm, n, p, q, eps, c (each as given)."""
    axes = [args.algorithm, args.n_values, args.p or [None], args.q or [None],
            args.eps_values or [None], args.c_values or [None]]
    return list(itertools.product(*axes))


def cmd_bench(args) -> int:
    rows = []
    for algorithm, n, p, q, eps, c in bench_grid(args):
        if algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {algorithm!r}")
        family, gen = ALGORITHMS[algorithm]
        sub = argparse.Namespace(**vars(args))
        sub.n, sub.p, sub.q = n, p, q
        sub.eps = eps if eps is not None else args.eps
        sub.c = c if c is not None else args.c
        _validate(algorithm, sub)
        records = _trials(algorithm, sub, lambda s: make_instance(gen, sub, s))
        summ = summarize(algorithm, records)
        rows.append({"algorithm": algorithm, "n": n, "p": p, "q": q, "eps": eps, "c": c,
                     "trials": args.trials, **{k: summ[k] for k in BENCH_COLUMNS[7:]}})
    bench_args = argparse.Namespace(**vars(args))
    bench_args.format = "csv" if args.format is None else args.format
    if bench_args.format == "csv":
        _emit(bench_args, rows, BENCH_COLUMNS)
    else:
        _emit(bench_args, rows)
    return EXIT_OK


def _validate(algorithm: str, args):
    """Check parameters against the algorithm's preconditions before any stream opens."""
    if args.trials < 0:
        raise ConfigError("--trials must be non-negative")
    if algorithm in ("fas-sketch", "rank-sketch") and not 0 < args.eps < 1:
        raise ConfigError("--eps must lie in (0, 1)")
    if algorithm in ("fas-sketch", "rank-sketch") and args.n is not None and args.n > args.enum_cap:
        raise ConfigError(f"n={args.n} exceeds --enum-cap={args.enum_cap}")
    if algorithm.startswith("topo-") and algorithm not in ("topo-tournament", "topo-tr"):
        if args.q is None and not getattr(args, "input", None):
            raise ConfigError("--q is required for planted-DAG sorting")
    if args.p is not None and args.p < 1:
        raise ConfigError("--p must be at least 1")


# ----------------------------------------------------------------------------
# parser

def _add_algorithm_args(ap: argparse.ArgumentParser, sweep: bool = False):
    """Algorithm parameters; in a sweep, ``--p``, ``--eps`` and ``--c`` take lists."""
    if sweep:
        ap.add_argument("--p", type=int, nargs="*", default=[])
        ap.add_argument("--eps", dest="eps_values", type=float, nargs="*", default=[])
        ap.add_argument("--c", dest="c_values", type=float, nargs="*", default=[])
    else:
        ap.add_argument("--p", type=int, help="passes (kwiksort, sink-multipass, shortpath)")
        ap.add_argument("--eps", type=float, default=0.2)
        ap.add_argument("--c", type=float, default=4.0, help="KwikSort group-size constant")
    ap.add_argument("--c-sketch", type=float, default=fas.DEFAULT_C_SKETCH)
    ap.add_argument("--c-piv", type=float, default=4.0)
    ap.add_argument("--c-win", type=float, default=4.0)
    ap.add_argument("--constants", choices=["scaled", "full"], default="scaled",
                    help="one-pass sink constants")
    ap.add_argument("--enum-cap", type=int, default=10)
    ap.add_argument("--oracle-cap", type=int, default=12,
                    help="largest n for which the exact optimum is computed")
    ap.add_argument("--trials", type=int, default=1)
    ap.add_argument("--source", type=int)
    ap.add_argument("--target", type=int)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output path (default stdout)")
    common.add_argument("--format", choices=["json", "csv"], default=argparse.SUPPRESS)

    inst = argparse.ArgumentParser(add_help=False)
    inst.add_argument("--n", type=int)
    inst.add_argument("--q", type=float)
    inst.add_argument("--k", type=int, help="number of input rankings")
    inst.add_argument("--unreachable", action="store_true",
                      help="shortpath instances: drop one path edge")

    parser = argparse.ArgumentParser(
        prog="digraphstream",
        description="Streaming digraph algorithms: generators, runs, exact oracles, sweeps.")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--out", default=None, help="output path (default stdout)")
    parser.add_argument("--format", choices=["json", "csv"], default=None)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common, inst], help="write an instance file")
    g.add_argument("kind", choices=["tou", "dyes", "dno", "plantdag", "rankings", "shortpath"])
    g.add_argument("--p", type=int, default=3, help="shortpath: path length is 2p+2")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", parents=[common, inst], help="run an algorithm")
    _add_algorithm_args(r)
    r.add_argument("algorithm", choices=sorted(ALGORITHMS))
    r.add_argument("--input", help="instance file (edge list or rankings)")
    r.add_argument("--gen", choices=["tou", "dyes", "dno", "plantdag", "rankings", "shortpath"],
                   help="generator used when no --input is given")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("exact", parents=[common, inst], help="exact optimum for small n")
    e.add_argument("--input")
    e.add_argument("--gen", choices=["tou", "dyes", "dno"])
    e.add_argument("--rankings", action="store_true", help="treat the instance as rankings")
    e.add_argument("--cap", type=int, default=20)
    e.set_defaults(func=cmd_exact)

    b = sub.add_parser("bench", parents=[common], help="parameter sweep to CSV")
    _add_algorithm_args(b, sweep=True)
    b.add_argument("--algorithm", nargs="*", default=[])
    b.add_argument("--n", dest="n_values", type=int, nargs="*", default=[])
    b.add_argument("--q", type=float, nargs="*", default=[])
    b.add_argument("--k", type=int, default=5)
    b.set_defaults(func=cmd_bench, unreachable=False, input=None, eps=0.2, c=4.0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.format is None and args.command != "bench":
        args.format = "json"
    try:
        return args.func(args)
    except PromiseViolation as exc:
        log.error("promise violation: %s", exc)
        return EXIT_PROMISE
    except AlgorithmFailure as exc:
        log.error("algorithm failure: %s", exc)
        return EXIT_FAILURE
    except (ConfigError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
