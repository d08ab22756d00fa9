"""Brute-force ground truth for tiny instances.

Spread under either diffusion model equals an expectation over "live-edge"
worlds: IC keeps each edge independently with its probability; LT is
equivalent to every node independently keeping at most one incoming edge
(edge (u,v) with probability w_uv, none with 1 - sum of weights). On graphs
small enough to enumerate every world, spread, the optimal assignment, and
the curvature bound are all computed exactly.

Enumeration is strictly budgeted and aborts loudly rather than approximate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .diffusion import check_model
from .graphs import Graph, Instance, SeedAssignment


class OracleBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleBudget:
    max_probabilistic_edges: int = 20   # caps worlds at 2**this
    max_assignments: int = 10**6

    @property
    def max_worlds(self) -> int:
        return 1 << self.max_probabilistic_edges


@dataclass
class CurvatureResult:
    """Curvature upper bound in [0,1]; `skipped` lists zero-spread candidate
    edges excluded from the minimum (their ratio is undefined)."""

    value: float
    skipped: list[tuple[int, int]] = field(default_factory=list)
    ratios: dict[tuple[int, int], float] = field(default_factory=dict)


def _reach_masks(n: int, fwd_sets: list[int]) -> list[int]:
    """Per-node reachability bitmask over a fixed edge set (adjacency bitmasks)."""
    reach = [(1 << v) | fwd_sets[v] for v in range(n)]
    changed = True
    while changed:
        changed = False
        for v in range(n):
            m = reach[v]
            acc = m
            rest = m & ~(1 << v)
            while rest:
                low = rest & -rest
                acc |= reach[low.bit_length() - 1]
                rest ^= low
            if acc != m:
                reach[v] = acc
                changed = True
    return reach


class ExactEvaluator:
    """Exact spread on one graph/model pair, reusable across many seed sets.

    Worlds are enumerated once; each stores its probability and a per-node
    reachability bitmask, so a spread query is a vectorized popcount.
    """

    def __init__(self, g: Graph, model: str, budget: OracleBudget = OracleBudget()):
        check_model(g, model)
        if g.n > 64:
            raise OracleBudgetExceeded(f"exact evaluation limited to 64 nodes, got {g.n}")
        self.g = g
        self.model = model
        self.budget = budget
        probs, masks = (self._ic_worlds() if model == "ic" else self._lt_worlds())
        self._probs = np.asarray(probs, dtype=np.float64)
        self._reach = np.asarray(masks, dtype=np.uint64)
        self._cache: dict[frozenset, float] = {}

    def _ic_worlds(self):
        base = [0] * self.g.n
        frac = []
        for s, d, p in self.g.edges:
            if p >= 1.0:
                base[s] |= 1 << d
            elif p > 0.0:
                frac.append((s, d, p))
        if len(frac) > self.budget.max_probabilistic_edges:
            raise OracleBudgetExceeded(
                f"{len(frac)} probabilistic edges exceed budget "
                f"{self.budget.max_probabilistic_edges}")
        probs, masks = [], []
        for bits in range(1 << len(frac)):
            fwd = list(base)
            pr = 1.0
            for j, (s, d, p) in enumerate(frac):
                if bits >> j & 1:
                    fwd[s] |= 1 << d
                    pr *= p
                else:
                    pr *= 1.0 - p
            probs.append(pr)
            masks.append(_reach_masks(self.g.n, fwd))
        return probs, masks

    def _lt_worlds(self):
        # Per-node choice lists: (in-neighbor or None, probability), zero prob pruned.
        choices = []
        world_count = 1
        for v in range(self.g.n):
            opts = [(u, w) for u, w in self.g.rev[v] if w > 0.0]
            none_p = 1.0 - sum(w for _, w in opts)
            if none_p > 1e-12:
                opts.append((None, none_p))
            choices.append(opts if opts else [(None, 1.0)])
            world_count *= len(choices[-1])
            if world_count > self.budget.max_worlds:
                raise OracleBudgetExceeded(
                    f"LT world count exceeds budget 2**{self.budget.max_probabilistic_edges}")
        probs, masks = [], []
        for combo in itertools.product(*choices):
            fwd = [0] * self.g.n
            pr = 1.0
            for v, (u, w) in enumerate(combo):
                pr *= w
                if u is not None:
                    fwd[u] |= 1 << v
            probs.append(pr)
            masks.append(_reach_masks(self.g.n, fwd))
        return probs, masks

    def spread(self, seeds) -> float:
        key = frozenset(int(s) for s in seeds)
        got = self._cache.get(key)
        if got is not None:
            return got
        if not key:
            self._cache[key] = 0.0
            return 0.0
        cols = self._reach[:, sorted(key)]
        union = np.bitwise_or.reduce(cols, axis=1)
        value = float(self._probs @ np.bitwise_count(union).astype(np.float64))
        self._cache[key] = value
        return value


def exact_spread(g: Graph, model: str, seeds, budget: OracleBudget = OracleBudget()) -> float:
    return ExactEvaluator(g, model, budget).spread(seeds)


def _feasible_combos(inst: Instance):
    """Per-AP candidate combinations at full capacity min(k, |C_u|)."""
    per_ap = []
    for u in inst.ap_list:
        cand = inst.candidates[u]
        take = min(inst.k, len(cand))
        per_ap.append([(u, combo) for combo in itertools.combinations(cand, take)])
    return per_ap


def exact_optimum(inst: Instance, model: str,
                  budget: OracleBudget = OracleBudget()) -> tuple[SeedAssignment, float]:
    """Exhaustive search over matroid-feasible assignments.

    Spread is monotone, so only full assignments (min(k, |C_u|) seeds per AP)
    need checking. Ties break toward the lexicographically smallest distinct
    seed set.
    """
    per_ap = _feasible_combos(inst)
    total = 1
    for opts in per_ap:
        total *= len(opts)
        if total > budget.max_assignments:
            raise OracleBudgetExceeded(
                f"assignment count exceeds budget {budget.max_assignments}")
    ev = ExactEvaluator(inst.pp, model, budget)
    best_value = -1.0
    best_key = None
    best_assignment = None
    for combo in itertools.product(*per_ap):
        nodes = frozenset(v for _, chosen in combo for v in chosen)
        value = ev.spread(nodes)
        key = tuple(sorted(nodes))
        if value > best_value or (value == best_value and key < best_key):
            best_value = value
            best_key = key
            best_assignment = combo
    sa = SeedAssignment()
    for u, chosen in best_assignment:
        for v in chosen:
            sa.add(u, v)
    return sa, best_value


def curvature_gamma_max(inst: Instance, model: str,
                        budget: OracleBudget = OracleBudget()) -> CurvatureResult:
    """Upper bound on the curvature of the spread over the candidate edges.

    gamma_max = 1 - min_e (sigma(C) - sigma(C \\ {e})) / sigma({e}), with
    sigma evaluated on the distinct node sets the edge sets induce. Candidate
    edges whose singleton spread is zero are skipped and reported.
    """
    edges = [(u, v) for u in inst.ap_list for v in inst.candidates[u]]
    ev = ExactEvaluator(inst.pp, model, budget)
    all_nodes = frozenset(v for _, v in edges)
    sigma_all = ev.spread(all_nodes)
    ratios: dict[tuple[int, int], float] = {}
    skipped: list[tuple[int, int]] = []
    for e in edges:
        single = ev.spread({e[1]})
        if single == 0.0:
            skipped.append(e)
            continue
        rest = frozenset(v for other, v in edges if other != e[0] or v != e[1])
        ratios[e] = (sigma_all - ev.spread(rest)) / single
    if ratios:
        value = 1.0 - min(ratios.values())
    else:
        # No informative edge: fall back to the worst case when candidates
        # exist, 0 for an empty candidate space.
        value = 1.0 if edges else 0.0
    value = min(1.0, max(0.0, value))
    return CurvatureResult(value=value, skipped=skipped, ratios=ratios)
