"""Reverse-reachable set sampling and incremental coverage bookkeeping.

An RR set is drawn by picking a uniform root and collecting every node that
reaches it in a sampled live-edge subgraph: a reverse BFS with per-edge coin
flips under IC, a reverse random walk that keeps at most one incoming edge
per node under LT. n_p * coverage(S) / theta is then an unbiased spread
estimator for any seed set S.

RRCollection keeps an inverted node -> set-id index plus per-node counters of
*uncovered* sets, so greedy selection reads marginal gains in O(1) and pays
only for the sets a commit newly covers.
"""

from __future__ import annotations

import random
import struct
from dataclasses import dataclass

from .diffusion import check_model
from .graphs import Graph

RR_MAGIC = b"CIMR1"


class RRMemoryBudgetExceeded(RuntimeError):
    def __init__(self, theta: int, stored: int, budget: int):
        super().__init__(
            f"RR collection memory budget exceeded: {stored} stored members "
            f"(~{stored * 8} bytes > {budget}) after {theta} sets")
        self.theta = theta
        self.stored_members = stored
        self.budget_bytes = budget


@dataclass(frozen=True)
class RRSet:
    root: int
    members: tuple[int, ...]  # sorted, includes root


def sample_rr_set(g: Graph, model: str, rand: random.Random) -> RRSet:
    """One RR set on g; the root is uniform over all nodes (isolated included)."""
    root = rand.randrange(g.n)
    if model == "ic":
        visited = {root}
        frontier = [root]
        while frontier:
            nxt = []
            for v in frontier:
                for u, p in g.rev[v]:
                    if u not in visited and rand.random() < p:
                        visited.add(u)
                        nxt.append(u)
            frontier = nxt
        return RRSet(root, tuple(sorted(visited)))
    # LT: walk backwards, each node keeping at most one live in-edge.
    visited = {root}
    cur = root
    while True:
        x = rand.random()
        chosen = None
        for u, w in g.rev[cur]:
            x -= w
            if x < 0.0:
                chosen = u
                break
        if chosen is None or chosen in visited:
            return RRSet(root, tuple(sorted(visited)))
        visited.add(chosen)
        cur = chosen


class RRCollection:
    """A growing bag of RR sets with coverage state for greedy selection.

    The collection owns an RNG stream derived from its seed: the same seed
    and the same sequence of extend() counts reproduce the same sets.
    Coverage state (covered flags, per-node uncovered counters) is mutable
    and reset via reset_coverage(); everything else is append-only.
    """

    def __init__(self, g: Graph, model: str, seed: int,
                 member_budget_bytes: int | None = None):
        check_model(g, model)
        if g.n < 1:
            raise ValueError("cannot sample RR sets on an empty graph")
        self.g = g
        self.model = model
        self.member_budget_bytes = member_budget_bytes
        self._rand = random.Random(seed)
        self.sets: list[tuple[int, ...]] = []
        self.roots: list[int] = []
        self.index: list[list[int]] = [[] for _ in range(g.n)]
        self._stored_members = 0
        self.covered = bytearray()
        self.counter = [0] * g.n
        self.covered_count = 0

    @property
    def theta(self) -> int:
        return len(self.sets)

    def extend(self, count: int) -> None:
        """Append `count` fresh independent RR sets; existing sets untouched."""
        if count < 0:
            raise ValueError("count must be >= 0")
        for _ in range(count):
            rr = sample_rr_set(self.g, self.model, self._rand)
            sid = len(self.sets)
            self.sets.append(rr.members)
            self.roots.append(rr.root)
            self.covered.append(0)
            for v in rr.members:
                self.index[v].append(sid)
                self.counter[v] += 1
            self._stored_members += len(rr.members)
            if (self.member_budget_bytes is not None
                    and self._stored_members * 8 > self.member_budget_bytes):
                raise RRMemoryBudgetExceeded(self.theta, self._stored_members,
                                             self.member_budget_bytes)

    def coverage(self, nodes) -> int:
        """Number of sets hit by `nodes`, independent of commit state."""
        hit = bytearray(self.theta)
        total = 0
        for v in nodes:
            for sid in self.index[v]:
                if not hit[sid]:
                    hit[sid] = 1
                    total += 1
        return total

    def reset_coverage(self) -> None:
        self.covered = bytearray(self.theta)
        self.counter = [len(ids) for ids in self.index]
        self.covered_count = 0

    def peek_marginal(self, v: int) -> int:
        """Uncovered sets containing v; the marginal coverage of adding v."""
        return self.counter[v]

    def commit(self, v: int) -> None:
        """Mark every set containing v covered; update all member counters."""
        covered = self.covered
        counter = self.counter
        for sid in self.index[v]:
            if covered[sid]:
                continue
            covered[sid] = 1
            self.covered_count += 1
            for u in self.sets[sid]:
                counter[u] -= 1

    def dump(self, path) -> None:
        roots = self.roots
        lengths = [len(s) for s in self.sets]
        with open(path, "wb") as f:
            f.write(RR_MAGIC)
            f.write(struct.pack("<QQQ", self.g.n, self.theta, sum(lengths)))
            f.write(struct.pack(f"<{self.theta}Q", *roots))
            f.write(struct.pack(f"<{self.theta}Q", *lengths))
            for s in self.sets:
                f.write(struct.pack(f"<{len(s)}Q", *s))

    @classmethod
    def load(cls, path, g: Graph, model: str = "ic") -> "RRCollection":
        with open(path, "rb") as f:
            magic = f.read(5)
            if magic != RR_MAGIC:
                raise ValueError(f"bad RR dump magic {magic!r}")
            n, theta, total = struct.unpack("<QQQ", f.read(24))
            if n != g.n:
                raise ValueError(f"RR dump node count {n} != graph {g.n}")
            roots = struct.unpack(f"<{theta}Q", f.read(8 * theta))
            lengths = struct.unpack(f"<{theta}Q", f.read(8 * theta))
            coll = cls(g, model, seed=0)
            for sid in range(theta):
                members = struct.unpack(f"<{lengths[sid]}Q", f.read(8 * lengths[sid]))
                coll.sets.append(tuple(int(v) for v in members))
                coll.roots.append(int(roots[sid]))
                coll.covered.append(0)
                for v in members:
                    coll.index[v].append(sid)
                    coll.counter[v] += 1
                coll._stored_members += lengths[sid]
        return coll
