"""Command-line front end.

Subcommands:
    select      run selection algorithms over (k, d, repetition) sweeps -> CSV
    evaluate    measure the spread of an assignment file
    oracle      exact spread / optimum / curvature on tiny inputs
    ztest       two-proportion z statistic
    sample-aps  draw a uniform AP sample and write one id per line

Exit codes: 0 success, 2 configuration error, 3 data error, 4 a budget or
timeout produced only partial output.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import bench
from .bench import EXIT_BUDGET, EXIT_CONFIG, EXIT_DATA, EXIT_OK, ExperimentConfig
from .graphs import (GraphValidationError, EdgeListParseError, build_instance,
                     load_edge_list, read_ap_file, select_random_aps)
from .oracle import (OracleBudget, OracleBudgetExceeded, curvature_gamma_max,
                     exact_optimum, exact_spread)
from .seeding import NS_AP_SAMPLE, substream


def _add_graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--weight-mode", default="weighted-cascade-ic",
                   choices=["explicit", "weighted-cascade-ic", "uniform-ic",
                            "weighted-cascade-lt"])
    p.add_argument("--p", type=float, default=None, help="probability for uniform-ic")
    p.add_argument("--undirected", action="store_true",
                   help="expand each input edge into both directions")
    p.add_argument("--model", default="ic", choices=["ic", "lt"])


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cim")
    sub = ap.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("select", help="run selection sweeps, emit CSV")
    _add_graph_args(ps)
    group = ps.add_mutually_exclusive_group()
    group.add_argument("--ap-file", help="file with one AP id per line")
    group.add_argument("--ap-fraction", type=_float_list, default=[0.05],
                       help="comma list of AP fractions d/n")
    ps.add_argument("--k", type=_int_list, default=[10], help="comma list of capacities")
    ps.add_argument("--algos", type=lambda s: s.split(","),
                    default=["degree", "rr-opim-plus"],
                    help=f"comma list from: {', '.join(bench.ALGORITHMS)}")
    ps.add_argument("--epsilon", type=float, default=0.1)
    ps.add_argument("--delta", type=float, default=None, help="default 1/n")
    ps.add_argument("--r", type=int, default=10_000, help="MC trials per evaluation")
    ps.add_argument("--reps", type=int, default=1)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    ps.add_argument("--manifest", default=None, help="run-manifest JSON path")
    ps.add_argument("--report", default=None,
                    help="JSON-lines path for per-iteration bound reports")
    ps.add_argument("--timeout", type=float, default=None,
                    help="per-cell budget in seconds; slower algorithms are dropped")
    ps.add_argument("--workers", type=int, default=1)
    ps.add_argument("--local-rr-theta", type=int, default=10_000)
    ps.add_argument("--no-timing", action="store_true",
                    help="write ms=0 so CSV output is byte-reproducible")

    pe = sub.add_parser("evaluate", help="spread of an assignment file")
    _add_graph_args(pe)
    pe.add_argument("--ap-file", required=True)
    pe.add_argument("--k", type=int, required=True)
    pe.add_argument("--assignment", required=True, help="file of 'ap_id seed_id' lines")
    pe.add_argument("--r", type=int, default=10_000)
    pe.add_argument("--seed", type=int, default=0)
    pe.add_argument("--workers", type=int, default=1)

    po = sub.add_parser("oracle", help="exact values on tiny inputs")
    _add_graph_args(po)
    po.add_argument("--ap-file", required=True)
    po.add_argument("--k", type=int, required=True)
    po.add_argument("--op", required=True, choices=["spread", "optimum", "curvature"])
    po.add_argument("--seeds", type=_int_list, default=None,
                    help="seed node ids (external) for --op spread")
    po.add_argument("--max-prob-edges", type=int, default=20)
    po.add_argument("--max-assignments", type=int, default=10**6)

    pz = sub.add_parser("ztest", help="two-proportion z statistic")
    pz.add_argument("--engaged-t", type=int, required=True)
    pz.add_argument("--pop-t", type=int, required=True)
    pz.add_argument("--engaged-c", type=int, required=True)
    pz.add_argument("--pop-c", type=int, required=True)

    pa = sub.add_parser("sample-aps", help="uniform AP sample")
    pa.add_argument("--graph", required=True)
    pa.add_argument("--fraction", type=float, required=True)
    pa.add_argument("--seed", type=int, default=0)
    pa.add_argument("--out", default="-")

    return ap


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)


def _cmd_select(args) -> int:
    cfg = ExperimentConfig(
        graph_path=args.graph, weight_mode=args.weight_mode, p_uniform=args.p,
        directed=not args.undirected, model=args.model, ap_file=args.ap_file,
        ap_fractions=args.ap_fraction, k_list=args.k, algorithms=args.algos,
        epsilon=args.epsilon, delta=args.delta, mc_trials=args.r,
        repetitions=args.reps, seed=args.seed, timeout=args.timeout,
        workers=args.workers, local_rr_theta=args.local_rr_theta,
        no_timing=args.no_timing)
    try:
        cfg.validate()
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sink = open(args.report, "w", encoding="utf-8") if args.report else None
    try:
        records, manifest = bench.run_select(cfg, report_sink=sink)
    finally:
        if sink is not None:
            sink.close()
    _write(args.out, bench.emit_csv(records))
    if args.manifest:
        _write(args.manifest, bench.manifest_json(manifest))
    return EXIT_BUDGET if manifest["timeouts"] else EXIT_OK


def _cmd_evaluate(args) -> int:
    g = load_edge_list(args.graph, args.weight_mode, p=args.p,
                       directed=not args.undirected)
    aps = read_ap_file(args.ap_file, g)
    pairs = bench.read_assignment_pairs(args.assignment)
    est = bench.evaluate_assignment(g, args.model, aps, args.k, pairs,
                                    r=args.r, seed=args.seed, workers=args.workers)
    print(json.dumps({"mean": est.mean, "stderr": est.stderr, "trials": est.trials}))
    return EXIT_OK


def _cmd_oracle(args) -> int:
    g = load_edge_list(args.graph, args.weight_mode, p=args.p,
                       directed=not args.undirected)
    aps = read_ap_file(args.ap_file, g)
    inst = build_instance(g, aps, args.k)
    budget = OracleBudget(max_probabilistic_edges=args.max_prob_edges,
                          max_assignments=args.max_assignments)
    if args.op == "spread":
        if args.seeds is None:
            print("config error: --op spread requires --seeds", file=sys.stderr)
            return EXIT_CONFIG
        seeds = [inst.pp.internal(s) for s in args.seeds]
        value = exact_spread(inst.pp, args.model, seeds, budget)
        print(json.dumps({"spread": value}))
    elif args.op == "optimum":
        sa, value = exact_optimum(inst, args.model, budget)
        print(json.dumps({"optimum": value,
                          "assignment": sa.to_external_pairs(inst)}))
    else:
        res = curvature_gamma_max(inst, args.model, budget)
        print(json.dumps({"gamma_max": res.value,
                          "guarantee": 1.0 / (1.0 + res.value),
                          "skipped_edges": [[inst.g.external(u), inst.pp.external(v)]
                                            for u, v in res.skipped]}))
    return EXIT_OK


def _cmd_ztest(args) -> int:
    z = bench.z_score(args.engaged_t, args.pop_t, args.engaged_c, args.pop_c)
    print(json.dumps({"z": z}))
    return EXIT_OK


def _cmd_sample_aps(args) -> int:
    g = load_edge_list(args.graph, "uniform-ic", p=0.0)
    aps = select_random_aps(g, args.fraction, substream(args.seed, NS_AP_SAMPLE))
    text = "".join(f"{g.external(v)}\n" for v in sorted(aps))
    _write(args.out, text)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"select": _cmd_select, "evaluate": _cmd_evaluate,
                "oracle": _cmd_oracle, "ztest": _cmd_ztest,
                "sample-aps": _cmd_sample_aps}
    try:
        return handlers[args.command](args)
    except (EdgeListParseError, GraphValidationError, OracleBudgetExceeded,
            FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
