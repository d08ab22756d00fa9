"""Forward diffusion under independent-cascade and linear-threshold models.

`simulate_once` runs a single trial and returns the final active set.
`mc_spread` averages the active-set size over r independent trials; it
switches to a vectorized implementation on small graphs (<= 64 nodes), where
whole blocks of trials are propagated as boolean matrices, and falls back to
a frontier BFS per trial otherwise. Trials are grouped into fixed-size blocks
with one RNG substream per block, so estimates are identical no matter how
many workers process the blocks.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graphs import Graph, GraphValidationError
from .seeding import entropy_of

MODELS = ("ic", "lt")
DENSE_NODE_LIMIT = 64
TRIAL_BLOCK = 4096


@dataclass(frozen=True)
class SpreadEstimate:
    mean: float
    trials: int
    stderr: float


def check_model(g: Graph, model: str) -> None:
    if model not in MODELS:
        raise GraphValidationError(f"unknown diffusion model {model!r}")
    if model == "lt":
        g.validate_lt()


def _check_seeds(g: Graph, seeds) -> list[int]:
    out = sorted(set(int(s) for s in seeds))
    for s in out:
        if not (0 <= s < g.n):
            raise GraphValidationError(f"seed id {s} out of range (n={g.n})")
    return out


def simulate_once(g: Graph, model: str, seeds, rand: random.Random,
                  edge_test_log: list | None = None) -> set[int]:
    """One diffusion trial; returns the final active set (seeds included).

    IC: every newly activated node gets one chance per out-edge, so each
    edge's coin is flipped at most once per trial. LT: node thresholds are
    drawn once at the start of the trial; a node activates when the summed
    weight of its activated in-neighbors exceeds its threshold. The frontier
    is FIFO; the final set does not depend on processing order.
    """
    check_model(g, model)
    seed_list = _check_seeds(g, seeds)
    active = bytearray(g.n)
    frontier = []
    for s in seed_list:
        active[s] = 1
        frontier.append(s)
    result = set(seed_list)

    if model == "ic":
        while frontier:
            nxt = []
            for u in frontier:
                for v, p in g.fwd[u]:
                    if active[v]:
                        continue
                    if edge_test_log is not None:
                        edge_test_log.append((u, v))
                    if rand.random() < p:
                        active[v] = 1
                        nxt.append(v)
                        result.add(v)
            frontier = nxt
    else:
        thresholds = [rand.random() for _ in range(g.n)]
        weight_in = [0.0] * g.n
        while frontier:
            nxt = []
            for u in frontier:
                for v, w in g.fwd[u]:
                    if active[v]:
                        continue
                    weight_in[v] += w
                    if weight_in[v] > thresholds[v]:
                        active[v] = 1
                        nxt.append(v)
                        result.add(v)
            frontier = nxt
    return result


# -- sparse per-trial kernels (size only, no set construction) --------------

def _ic_trial_size(fwd, n: int, seed_list, rand: random.Random) -> int:
    active = bytearray(n)
    frontier = list(seed_list)
    for s in frontier:
        active[s] = 1
    count = len(frontier)
    rnd = rand.random
    while frontier:
        nxt = []
        for u in frontier:
            for v, p in fwd[u]:
                if not active[v] and rnd() < p:
                    active[v] = 1
                    nxt.append(v)
        count += len(nxt)
        frontier = nxt
    return count


def _lt_trial_size(fwd, n: int, seed_list, rand: random.Random) -> int:
    active = bytearray(n)
    thresholds = [-1.0] * n  # sampled lazily on first incoming weight
    weight_in = [0.0] * n
    frontier = list(seed_list)
    for s in frontier:
        active[s] = 1
    count = len(frontier)
    rnd = rand.random
    while frontier:
        nxt = []
        for u in frontier:
            for v, w in fwd[u]:
                if active[v]:
                    continue
                if thresholds[v] < 0.0:
                    thresholds[v] = rnd()
                weight_in[v] += w
                if weight_in[v] > thresholds[v]:
                    active[v] = 1
                    nxt.append(v)
        count += len(nxt)
        frontier = nxt
    return count


# -- dense vectorized kernels (n <= 64): all trials of a block at once ------

def _dense_block_ic(g: Graph, seed_mask: np.ndarray, block: int,
                    rng: np.random.Generator) -> np.ndarray:
    src, dst, val = g.edge_arrays()
    live = rng.random((block, len(src))) < val
    active = np.broadcast_to(seed_mask, (block, g.n)).copy()
    while True:
        hits = active[:, src] & live
        new_active = active.copy()
        for j in range(len(src)):
            np.logical_or(new_active[:, dst[j]], hits[:, j], out=new_active[:, dst[j]])
        if np.array_equal(new_active, active):
            return active.sum(axis=1)
        active = new_active


def _dense_block_lt(g: Graph, seed_mask: np.ndarray, block: int,
                    rng: np.random.Generator) -> np.ndarray:
    w = np.zeros((g.n, g.n))
    for s, d, v in g.edges:
        w[s, d] = v
    thresholds = rng.random((block, g.n))
    active = np.broadcast_to(seed_mask, (block, g.n)).copy()
    while True:
        phi = active.astype(np.float64) @ w
        new_active = active | (phi > thresholds)
        if np.array_equal(new_active, active):
            return active.sum(axis=1)
        active = new_active


# -- block orchestration -----------------------------------------------------

_WORKER_STATE: dict = {}


def _init_worker(g: Graph, model: str, seed_list: list[int]):
    _WORKER_STATE["args"] = (g, model, seed_list)


def _run_block_worker(task):
    entropy, index, block = task
    g, model, seed_list = _WORKER_STATE["args"]
    return _run_block(g, model, seed_list, entropy, index, block)


def _run_block(g: Graph, model: str, seed_list, entropy: int, index: int,
               block: int) -> tuple[float, float]:
    ss = np.random.SeedSequence(entropy, spawn_key=(index,))
    if g.n <= DENSE_NODE_LIMIT:
        rng = np.random.Generator(np.random.PCG64(ss))
        seed_mask = np.zeros(g.n, dtype=bool)
        seed_mask[seed_list] = True
        kernel = _dense_block_ic if model == "ic" else _dense_block_lt
        sizes = kernel(g, seed_mask, block, rng)
        return float(sizes.sum()), float((sizes.astype(np.float64) ** 2).sum())
    rand = random.Random(int(ss.generate_state(1, np.uint64)[0]))
    kernel = _ic_trial_size if model == "ic" else _lt_trial_size
    total = 0.0
    total_sq = 0.0
    for _ in range(block):
        size = kernel(g.fwd, g.n, seed_list, rand)
        total += size
        total_sq += size * size
    return total, total_sq


def mc_spread(g: Graph, model: str, seeds, r: int, rng, workers: int = 1) -> SpreadEstimate:
    """Monte-Carlo spread: mean active-set size over r trials.

    `rng` is an int seed or a numpy Generator. stderr uses the unbiased
    sample variance. Results depend only on the derived entropy and r,
    not on the worker count.
    """
    if r < 1:
        raise GraphValidationError("trial count r must be >= 1")
    check_model(g, model)
    seed_list = _check_seeds(g, seeds)
    if not seed_list:
        return SpreadEstimate(0.0, r, 0.0)

    entropy = entropy_of(rng)
    blocks = [(entropy, i, min(TRIAL_BLOCK, r - i * TRIAL_BLOCK))
              for i in range((r + TRIAL_BLOCK - 1) // TRIAL_BLOCK)]

    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(g, model, seed_list)) as pool:
            parts = list(pool.map(_run_block_worker, blocks))
    else:
        parts = [_run_block(g, model, seed_list, entropy, i, b) for _, i, b in blocks]

    total = 0.0
    total_sq = 0.0
    for s, s2 in parts:  # fixed block order => reproducible float sums
        total += s
        total_sq += s2
    mean = total / r
    if r > 1:
        var = max(0.0, (total_sq - total * total / r) / (r - 1))
        stderr = math.sqrt(var / r)
    else:
        stderr = 0.0
    return SpreadEstimate(mean, r, stderr)
