"""Experiment orchestration: selection sweeps, evaluation, statistics, CSV.

One result row per (algorithm, k, d, repetition) cell. The AP sample for a
cell depends only on the repetition and d, so every algorithm in a cell sees
the same query, and the Monte-Carlo evaluation of each cell reuses one trial
substream across algorithms for a tighter comparison.
"""

from __future__ import annotations

import io
import json
import math
import time
from dataclasses import dataclass, field, asdict

from . import __version__
from .diffusion import SpreadEstimate, mc_spread
from .graphs import (Graph, GraphValidationError, Instance, SeedAssignment,
                     build_instance, load_edge_list, read_ap_file,
                     select_random_aps)
from .opim import OpimParams, run as opim_run
from .rrsets import RRCollection
from .seeding import (NS_AP_SAMPLE, NS_LOCAL_RR, NS_MC_EVAL, NS_SELECT,
                      child_seed, substream)
from .selectors import McGainOracle, local_topk, mg_greedy, rr_greedy

CSV_HEADER = "graph,algo,k,d,rep,spread,stderr,seeds,ms,ratio"

ALGORITHMS = ("degree", "pagerank", "local-rr-greedy", "mg-greedy", "rr-greedy",
              "rr-opim-plus", "rr-opim", "mg-opim")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_BUDGET = 4


@dataclass
class ExperimentConfig:
    graph_path: str
    weight_mode: str = "weighted-cascade-ic"
    p_uniform: float | None = None
    directed: bool = True
    model: str = "ic"
    ap_file: str | None = None
    ap_fractions: list[float] = field(default_factory=lambda: [0.05])
    k_list: list[int] = field(default_factory=lambda: [10])
    algorithms: list[str] = field(default_factory=lambda: ["degree", "rr-opim-plus"])
    epsilon: float = 0.1
    delta: float | None = None  # None -> 1/n of the loaded graph
    mc_trials: int = 10_000
    repetitions: int = 1
    seed: int = 0
    timeout: float | None = None  # seconds per cell; slower algos are dropped
    workers: int = 1
    local_rr_theta: int = 10_000
    no_timing: bool = False  # emit ms=0 for byte-reproducible CSV

    def validate(self) -> None:
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {algo!r}; known: {', '.join(ALGORITHMS)}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.mc_trials < 1:
            raise ValueError("mc trials must be >= 1")


@dataclass(frozen=True)
class ResultRecord:
    graph: str
    algo: str
    k: int
    d: float
    rep: int
    spread: float
    stderr: float
    seeds: int
    ms: int
    ratio: float | None

    def to_csv_row(self) -> str:
        ratio = "" if self.ratio is None else repr(self.ratio)
        return (f"{self.graph},{self.algo},{self.k},{self.d!r},{self.rep},"
                f"{self.spread!r},{self.stderr!r},{self.seeds},{self.ms},{ratio}")


def emit_csv(records: list[ResultRecord]) -> str:
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for rec in records:
        out.write(rec.to_csv_row() + "\n")
    return out.getvalue()


def parse_csv(text: str) -> list[ResultRecord]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("bad CSV header")
    records = []
    for ln in lines[1:]:
        g, algo, k, d, rep, spread, stderr, seeds, ms, ratio = ln.split(",")
        records.append(ResultRecord(
            graph=g, algo=algo, k=int(k), d=float(d), rep=int(rep),
            spread=float(spread), stderr=float(stderr), seeds=int(seeds),
            ms=int(ms), ratio=None if ratio == "" else float(ratio)))
    return records


def z_score(engaged_t: int, pop_t: int, engaged_c: int, pop_c: int) -> float:
    """Two-proportion z statistic for an engagement A/B comparison."""
    if pop_t <= 0 or pop_c <= 0:
        raise ValueError("populations must be positive")
    if engaged_t > pop_t or engaged_c > pop_c or engaged_t < 0 or engaged_c < 0:
        raise ValueError("engaged counts must lie in [0, population]")
    p_t = engaged_t / pop_t
    p_c = engaged_c / pop_c
    num = p_t - p_c
    if num == 0.0:
        return 0.0
    var = p_t * (1.0 - p_t) / pop_t + p_c * (1.0 - p_c) / pop_c
    if var == 0.0:
        return math.copysign(math.inf, num)
    return num / math.sqrt(var)


def load_graph(cfg: ExperimentConfig) -> Graph:
    return load_edge_list(cfg.graph_path, cfg.weight_mode, p=cfg.p_uniform,
                          directed=cfg.directed)


def run_algorithm(name: str, inst: Instance, model: str, cfg: ExperimentConfig,
                  cell_seed: int):
    """Run one registered selector; returns (assignment, ratio, bound report)."""
    if name in ("degree", "pagerank"):
        return local_topk(inst, name), None, None
    if name == "local-rr-greedy":
        coll = RRCollection(inst.pp, model, child_seed(cell_seed, NS_LOCAL_RR))
        coll.extend(cfg.local_rr_theta)
        return local_topk(inst, name, coll=coll), None, None
    if name in ("mg-greedy", "rr-greedy"):
        oracle = McGainOracle(inst.pp, model, r=cfg.mc_trials,
                              seed=child_seed(cell_seed, NS_SELECT),
                              workers=cfg.workers)
        selector = mg_greedy if name == "mg-greedy" else rr_greedy
        return selector(inst, oracle), None, None
    if name in ("rr-opim-plus", "rr-opim", "mg-opim"):
        delta = cfg.delta if cfg.delta is not None else 1.0 / inst.g.n
        params = OpimParams(epsilon=cfg.epsilon, delta=delta, variant=name,
                            seed=child_seed(cell_seed, NS_SELECT))
        sa, report = opim_run(inst, model, params)
        return sa, report.achieved_ratio, report
    raise ValueError(f"unknown algorithm {name!r}")


def run_select(cfg: ExperimentConfig, report_sink=None,
               ) -> tuple[list[ResultRecord], dict]:
    """The full sweep; returns records plus a replayable manifest."""
    cfg.validate()
    g = load_graph(cfg)
    name = str(cfg.graph_path).rsplit("/", 1)[-1]
    manifest: dict = {
        "config": {k: v for k, v in asdict(cfg).items()},
        "graph": {"name": name, "n": g.n, "m": g.m,
                  "self_loops_dropped": g.self_loops_dropped,
                  "duplicate_edges": g.duplicate_edges},
        "version": __version__,
        "timeouts": [],
    }
    if cfg.ap_file is not None:
        fixed_aps = read_ap_file(cfg.ap_file, g)
        d_values: list[tuple[int, float, set | None]] = [(0, len(fixed_aps) / g.n, fixed_aps)]
    else:
        d_values = [(i, f, None) for i, f in enumerate(cfg.ap_fractions)]

    records: list[ResultRecord] = []
    dropped: set[str] = set()
    for rep in range(cfg.repetitions):
        for d_idx, d, fixed in d_values:
            if fixed is None:
                aps = select_random_aps(g, d, substream(cfg.seed, NS_AP_SAMPLE, rep, d_idx))
            else:
                aps = fixed
            for k in cfg.k_list:
                inst = build_instance(g, aps, k)
                eval_rng = child_seed(cfg.seed, NS_MC_EVAL, rep, d_idx, k)
                for algo_idx, algo in enumerate(cfg.algorithms):
                    if algo in dropped:
                        continue
                    cell_seed = child_seed(cfg.seed, NS_SELECT, rep, d_idx, k, algo_idx)
                    t0 = time.perf_counter()
                    sa, ratio, bound_report = run_algorithm(algo, inst, cfg.model, cfg, cell_seed)
                    elapsed = time.perf_counter() - t0
                    if cfg.timeout is not None and elapsed > cfg.timeout:
                        dropped.add(algo)
                        manifest["timeouts"].append(
                            {"algo": algo, "k": k, "d": d, "rep": rep,
                             "elapsed_s": round(elapsed, 3)})
                        continue
                    seeds = sa.distinct_seeds()
                    est = mc_spread(inst.pp, cfg.model, seeds, cfg.mc_trials,
                                    eval_rng, workers=cfg.workers)
                    ms = 0 if cfg.no_timing else int(elapsed * 1000)
                    records.append(ResultRecord(
                        graph=name, algo=algo, k=k, d=d, rep=rep,
                        spread=est.mean, stderr=est.stderr, seeds=len(seeds),
                        ms=ms, ratio=ratio))
                    if report_sink is not None and bound_report is not None:
                        report_sink.write(bound_report.to_json_lines(
                            graph=name, algo=algo, k=k, d=d, rep=rep))
    return records, manifest


def evaluate_assignment(g: Graph, model: str, aps: set[int], k: int,
                        pairs: list[tuple[int, int]], r: int, seed: int,
                        workers: int = 1) -> SpreadEstimate:
    """Validate an external (ap, seed) pair list, then measure its spread."""
    inst = build_instance(g, aps, k)
    sa = SeedAssignment()
    for ap_ext, seed_ext in pairs:
        u = g.internal(ap_ext)
        try:
            v = inst.pp.internal(seed_ext)
        except GraphValidationError:
            raise GraphValidationError(
                f"AP {ap_ext}: seed {seed_ext} is not a passive participant")
        sa.add(u, v)
    inst.validate_assignment(sa)
    return mc_spread(inst.pp, model, sa.distinct_seeds(), r,
                     child_seed(seed, NS_MC_EVAL), workers=workers)


def read_assignment_pairs(path) -> list[tuple[int, int]]:
    pairs = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphValidationError(f"line {lineno}: expected 'ap_id seed_id'")
            pairs.append((int(parts[0]), int(parts[1])))
    return pairs


def manifest_json(manifest: dict) -> str:
    return json.dumps(manifest, sort_keys=True, indent=2) + "\n"
