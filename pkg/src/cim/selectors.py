"""Matroid-constrained greedy seed selection and local baselines.

Two greedy strategies over a pluggable marginal-gain oracle:

* mg_greedy picks the globally best AP->candidate edge each step and retires
  an AP's candidates once its capacity is filled.
* rr_greedy visits live APs round-robin, each picking the best edge from its
  own candidate space, committing immediately so later picks in the same
  round see earlier ones.

Both use CELF lazy evaluation: cached gains are stale-stamped and only
re-evaluated when popped, which is sound because gains never grow as the
selection grows. Ties break by higher gain, then lower AP id, then lower
candidate node id, so runs are exactly reproducible.

Zero-gain candidates stay selectable: an AP's list is filled to capacity
even when a candidate is already seeded through another AP, and the distinct
seed count is reported separately.
"""

from __future__ import annotations

import heapq

import numpy as np

from .diffusion import mc_spread
from .graphs import Graph, Instance, SeedAssignment
from .oracle import ExactEvaluator
from .rrsets import RRCollection
from .seeding import child_seed


class ExactGainOracle:
    """Marginal exact spread; for oracle-solvable instances only."""

    def __init__(self, evaluator: ExactEvaluator):
        self.ev = evaluator
        self.nodes: set[int] = set()
        self.base = 0.0
        self.version = 0

    def gain(self, v: int) -> float:
        if v in self.nodes:
            return 0.0
        return self.ev.spread(self.nodes | {v}) - self.base

    def commit(self, v: int) -> None:
        self.nodes.add(v)
        self.base = self.ev.spread(self.nodes)
        self.version += 1


class McGainOracle:
    """Marginal spread by Monte-Carlo re-simulation.

    All gain evaluations between two commits share one trial substream
    (common random numbers), which cancels most of the noise out of the
    comparison between candidates.
    """

    def __init__(self, g: Graph, model: str, r: int = 10_000, seed: int = 0,
                 workers: int = 1):
        self.g = g
        self.model = model
        self.r = r
        self.seed = seed
        self.workers = workers
        self.nodes: set[int] = set()
        self.version = 0
        self._base = 0.0

    def _estimate(self, nodes) -> float:
        if not nodes:
            return 0.0
        rng = child_seed(self.seed, self.version)
        return mc_spread(self.g, self.model, nodes, self.r, rng, self.workers).mean

    def gain(self, v: int) -> float:
        if v in self.nodes:
            return 0.0
        return self._estimate(self.nodes | {v}) - self._base

    def commit(self, v: int) -> None:
        self.nodes.add(v)
        self.version += 1
        self._base = self._estimate(self.nodes)


class CoverageGainOracle:
    """Marginal RR-set coverage; gains are integer counts."""

    def __init__(self, coll: RRCollection):
        self.coll = coll
        coll.reset_coverage()
        self.nodes: set[int] = set()
        self.version = 0

    def gain(self, v: int) -> float:
        return self.coll.peek_marginal(v)

    def commit(self, v: int) -> None:
        self.coll.commit(v)
        self.nodes.add(v)
        self.version += 1

    @property
    def covered(self) -> int:
        return self.coll.covered_count


def _pop_fresh(heap, oracle):
    """Pop entries, re-evaluating stale gains, until the top is current.

    Returns (gain, ap, node) or None when the heap empties. Entries are
    (-gain, ap, node, stamp); a stamp older than oracle.version triggers
    re-evaluation and reinsertion before anything is selected.
    """
    while heap:
        neg, ap, node, stamp = heapq.heappop(heap)
        if stamp == oracle.version:
            return -neg, ap, node
        heapq.heappush(heap, (-oracle.gain(node), ap, node, oracle.version))
    return None


def mg_greedy(inst: Instance, oracle, lazy: bool = True) -> SeedAssignment:
    """Global argmax greedy under the per-AP capacity matroid."""
    sa = SeedAssignment()
    if inst.k == 0:
        return sa
    taken = {u: 0 for u in inst.ap_list}
    if lazy:
        heap = [(-oracle.gain(v), u, v, oracle.version)
                for u in inst.ap_list for v in inst.candidates[u]]
        heapq.heapify(heap)
        while heap:
            neg, u, v, stamp = heapq.heappop(heap)
            if taken[u] >= inst.k:
                continue  # AP already full; its queued edges just drain away
            if stamp != oracle.version:
                heapq.heappush(heap, (-oracle.gain(v), u, v, oracle.version))
                continue
            sa.add(u, v)
            oracle.commit(v)
            taken[u] += 1
    else:
        pool = [(u, v) for u in inst.ap_list for v in inst.candidates[u]]
        while pool:
            best = min(pool, key=lambda e: (-oracle.gain(e[1]), e[0], e[1]))
            u, v = best
            sa.add(u, v)
            oracle.commit(v)
            taken[u] += 1
            if taken[u] >= inst.k:
                pool = [e for e in pool if e[0] != u]
            else:
                pool.remove(best)
    return sa


def rr_greedy(inst: Instance, oracle, lazy: bool = True) -> SeedAssignment:
    """Round-robin greedy: each live AP takes its best remaining candidate."""
    sa = SeedAssignment()
    if inst.k == 0:
        return sa
    heaps = {}
    remaining = {}
    for u in inst.ap_list:
        if inst.candidates[u]:
            heaps[u] = [(-oracle.gain(v), u, v, oracle.version)
                        for v in inst.candidates[u]]
            heapq.heapify(heaps[u])
            remaining[u] = list(inst.candidates[u])
    live = [u for u in inst.ap_list if u in heaps]
    taken = {u: 0 for u in live}
    while live:
        still = []
        for u in live:
            if lazy:
                got = _pop_fresh(heaps[u], oracle)
                if got is None:
                    continue
                _, _, v = got
            else:
                v = min(remaining[u], key=lambda c: (-oracle.gain(c), c))
                remaining[u].remove(v)
            sa.add(u, v)
            oracle.commit(v)
            taken[u] += 1
            exhausted = (len(heaps[u]) == 0) if lazy else (len(remaining[u]) == 0)
            if taken[u] < inst.k and not exhausted:
                still.append(u)
        live = still
    return sa


def pagerank(g: Graph, damping: float = 0.85, tol: float = 1e-8,
             max_iter: int = 100) -> np.ndarray:
    """Power iteration with uniform teleport; dangling mass redistributed."""
    n = g.n
    if n == 0:
        return np.zeros(0)
    src, dst, _ = g.edge_arrays()
    out_deg = np.zeros(n)
    np.add.at(out_deg, src, 1.0)
    dangling = out_deg == 0
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        contrib = np.where(dangling, 0.0, x / np.maximum(out_deg, 1.0))
        nxt = np.zeros(n)
        np.add.at(nxt, dst, contrib[src])
        nxt = (1.0 - damping) / n + damping * (nxt + x[dangling].sum() / n)
        if np.abs(nxt - x).sum() < tol:
            return nxt
        x = nxt
    return x


def local_topk(inst: Instance, score: str, *, coll: RRCollection | None = None,
               score_on: str = "pp") -> SeedAssignment:
    """Per-AP independent top-k ranking (the local baseline family).

    Scores: "degree" (out-degree), "pagerank", or "local-rr-greedy" (greedy
    coverage restricted to each AP's own candidates on a shared collection,
    coverage state reset per AP). Scoring runs on the PP subgraph by default;
    score_on="full" ranks by the candidate's standing in the whole graph.
    Ties go to the lower node id. Overlapping picks across APs are expected.
    """
    sa = SeedAssignment()
    if inst.k == 0:
        return sa
    if score in ("degree", "pagerank"):
        if score_on == "pp":
            scores = (pagerank(inst.pp) if score == "pagerank"
                      else np.array([inst.pp.out_degree(v) for v in range(inst.pp.n)], dtype=float))
            value = lambda v: scores[v]
        elif score_on == "full":
            g_scores = (pagerank(inst.g) if score == "pagerank"
                        else np.array([inst.g.out_degree(v) for v in range(inst.g.n)], dtype=float))
            value = lambda v: g_scores[inst.g_node_of(v)]
        else:
            raise ValueError(f"unknown score_on {score_on!r}")
        for u in inst.ap_list:
            ranked = sorted(inst.candidates[u], key=lambda v: (-value(v), v))
            for v in ranked[:inst.k]:
                sa.add(u, v)
        return sa
    if score == "local-rr-greedy":
        if coll is None:
            raise ValueError("local-rr-greedy requires an RR collection")
        for u in inst.ap_list:
            coll.reset_coverage()
            chosen: list[int] = []
            pool = list(inst.candidates[u])
            while pool and len(chosen) < inst.k:
                v = min(pool, key=lambda c: (-coll.peek_marginal(c), c))
                pool.remove(v)
                coll.commit(v)
                chosen.append(v)
            for v in chosen:
                sa.add(u, v)
        return sa
    raise ValueError(f"unknown local score {score!r}")
