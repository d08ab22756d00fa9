"""Directed weighted graphs, problem instances, and seed assignments.

A Graph stores one value per directed edge: an activation probability
(IC-style models) or an influence weight (LT-style models). Node ids are
dense internally; a remap table preserves the external ids of the input.

An Instance fixes the active-participant (AP) set A and capacity k, induces
the passive-participant subgraph P (all nodes outside A and all edges with
both endpoints outside A), and materializes each AP's candidate space: its
out-neighbors that are not themselves APs.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field

import numpy as np

GRAPH_MAGIC = b"CIMG1"
LT_SLACK = 1e-9

WEIGHT_MODES = ("explicit", "weighted-cascade-ic", "uniform-ic", "weighted-cascade-lt")


class EdgeListParseError(ValueError):
    """Malformed edge-list input; carries the offending line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class GraphValidationError(ValueError):
    pass


class Graph:
    """Immutable directed graph with one float value per edge.

    Attributes:
        n: node count (dense internal ids 0..n-1).
        edges: list of (src, dst, value) in deterministic load order.
        fwd: fwd[u] = list of (v, value) out-edges.
        rev: rev[v] = list of (u, value) in-edges.
        ext_ids: internal id -> external id.
        self_loops_dropped / duplicate_edges: ingestion counters.
    """

    def __init__(self, n: int, edges: list[tuple[int, int, float]], ext_ids: list[int],
                 self_loops_dropped: int = 0, duplicate_edges: int = 0):
        self.n = n
        self.edges = edges
        self.ext_ids = ext_ids
        self._int_of_ext = {e: i for i, e in enumerate(ext_ids)}
        self.self_loops_dropped = self_loops_dropped
        self.duplicate_edges = duplicate_edges
        self.fwd: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        self.rev: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for s, d, v in edges:
            self.fwd[s].append((d, v))
            self.rev[d].append((s, v))
        self._arrays = None

    @property
    def m(self) -> int:
        return len(self.edges)

    def external(self, node: int) -> int:
        return self.ext_ids[node]

    def internal(self, ext_id: int) -> int:
        try:
            return self._int_of_ext[ext_id]
        except KeyError:
            raise GraphValidationError(f"unknown node id {ext_id}") from None

    def out_degree(self, node: int) -> int:
        return len(self.fwd[node])

    def in_degree(self, node: int) -> int:
        return len(self.rev[node])

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(src, dst, value) as numpy arrays, built once on demand."""
        if self._arrays is None:
            if self.edges:
                src, dst, val = zip(*self.edges)
            else:
                src, dst, val = (), (), ()
            self._arrays = (np.asarray(src, dtype=np.int64),
                            np.asarray(dst, dtype=np.int64),
                            np.asarray(val, dtype=np.float64))
        return self._arrays

    def validate_lt(self) -> None:
        """Check per-node incoming weight sums; raises naming the first bad node."""
        for v in range(self.n):
            total = sum(w for _, w in self.rev[v])
            if total > 1.0 + LT_SLACK:
                raise GraphValidationError(
                    f"node {self.external(v)}: incoming weight sum {total:.6g} exceeds 1")

    def to_edge_list_text(self) -> str:
        lines = [f"n={self.n}"]
        for s, d, v in self.edges:
            lines.append(f"{self.external(s)} {self.external(d)} {v!r}")
        return "\n".join(lines) + "\n"

    def save_binary(self, path) -> None:
        """Adjacency cache: magic, LE-u64 counts, CSR offsets/targets, values, ext ids."""
        order = sorted(range(len(self.edges)), key=lambda i: (self.edges[i][0], i))
        offsets = np.zeros(self.n + 1, dtype="<u8")
        for s, _, _ in self.edges:
            offsets[s + 1] += 1
        np.cumsum(offsets, out=offsets)
        dst = np.asarray([self.edges[i][1] for i in order], dtype="<u8")
        val = np.asarray([self.edges[i][2] for i in order], dtype="<f8")
        ext = np.asarray(self.ext_ids, dtype="<u8")
        with open(path, "wb") as f:
            f.write(GRAPH_MAGIC)
            f.write(struct.pack("<QQQQ", self.n, self.m,
                                self.self_loops_dropped, self.duplicate_edges))
            offsets.tofile(f)
            dst.tofile(f)
            val.tofile(f)
            ext.tofile(f)

    @classmethod
    def load_binary(cls, path) -> "Graph":
        with open(path, "rb") as f:
            magic = f.read(5)
            if magic != GRAPH_MAGIC:
                raise GraphValidationError(f"bad graph cache magic {magic!r}")
            n, m, loops, dups = struct.unpack("<QQQQ", f.read(32))
            offsets = np.fromfile(f, dtype="<u8", count=n + 1)
            dst = np.fromfile(f, dtype="<u8", count=m)
            val = np.fromfile(f, dtype="<f8", count=m)
            ext = np.fromfile(f, dtype="<u8", count=n)
        edges = []
        for s in range(n):
            for j in range(int(offsets[s]), int(offsets[s + 1])):
                edges.append((s, int(dst[j]), float(val[j])))
        return cls(int(n), edges, [int(e) for e in ext],
                   self_loops_dropped=int(loops), duplicate_edges=int(dups))

    @classmethod
    def from_edges(cls, raw_edges, *, mode: str = "explicit", p: float | None = None,
                   directed: bool = True, n: int | None = None) -> "Graph":
        """Build from (src, dst) or (src, dst, value) tuples with external ids."""
        triples = []
        for e in raw_edges:
            if len(e) == 2:
                triples.append((int(e[0]), int(e[1]), None))
            else:
                triples.append((int(e[0]), int(e[1]), float(e[2])))
        return _assemble(triples, mode=mode, p=p, directed=directed, declared_n=n)


def _assemble(triples: list[tuple[int, int, float | None]], *, mode: str,
              p: float | None, directed: bool, declared_n: int | None) -> Graph:
    if mode not in WEIGHT_MODES:
        raise GraphValidationError(f"unknown weight mode {mode!r}")
    if mode == "uniform-ic":
        if p is None or not (0.0 <= p <= 1.0):
            raise GraphValidationError("uniform-ic requires a probability p in [0,1]")
    # External -> internal mapping: identity under a declared node count,
    # first-appearance order otherwise.
    if declared_n is not None:
        ext_ids = list(range(declared_n))
        int_of = {e: e for e in ext_ids}
    else:
        ext_ids = []
        int_of = {}

    def intern(ext: int) -> int:
        got = int_of.get(ext)
        if got is None:
            if declared_n is not None:
                raise GraphValidationError(
                    f"node id {ext} out of declared range n={declared_n}")
            got = len(ext_ids)
            int_of[ext] = got
            ext_ids.append(ext)
        return got

    dedup: dict[tuple[int, int], float | None] = {}
    self_loops = 0
    dups = 0
    for s_ext, d_ext, v in triples:
        if s_ext < 0 or d_ext < 0:
            raise GraphValidationError(f"negative node id in edge ({s_ext}, {d_ext})")
        if s_ext == d_ext:
            self_loops += 1
            continue
        s, d = intern(s_ext), intern(d_ext)
        pairs = ((s, d),) if directed else ((s, d), (d, s))
        for key in pairs:
            if key in dedup:
                dups += 1
            dedup[key] = v  # keep the last occurrence

    n = len(ext_ids)
    edges: list[tuple[int, int, float]] = []
    if mode == "explicit":
        for (s, d), v in dedup.items():
            if v is None:
                raise GraphValidationError(f"edge ({ext_ids[s]}, {ext_ids[d]}) has no value")
            if not (0.0 <= v <= 1.0):
                raise GraphValidationError(
                    f"edge ({ext_ids[s]}, {ext_ids[d]}) value {v} outside [0,1]")
            edges.append((s, d, v))
    elif mode == "uniform-ic":
        edges = [(s, d, float(p)) for (s, d) in dedup]
    else:  # weighted cascade: value = 1 / in-degree of the target
        indeg = [0] * n
        for (_, d) in dedup:
            indeg[d] += 1
        edges = [(s, d, 1.0 / indeg[d]) for (s, d) in dedup]

    # Canonical (src, dst) order keeps adjacency iteration identical no matter
    # whether the graph came from text, tuples, or the binary cache.
    edges.sort()
    g = Graph(n, edges, ext_ids, self_loops_dropped=self_loops, duplicate_edges=dups)
    if mode == "weighted-cascade-lt":
        g.validate_lt()
    return g


def load_edge_list(source, mode: str, *, p: float | None = None,
                   directed: bool = True) -> Graph:
    """Parse "src dst [value]" lines into a Graph.

    '#'-prefixed lines are comments; an optional "n=<N>" header declares the
    node-id space 0..N-1 (so trailing isolated nodes exist). Undirected input
    emits both directions of every edge. Weight modes: "explicit" keeps the
    third column, "uniform-ic" sets every value to p, and the two
    weighted-cascade modes set each edge value to 1/in-degree of its target.

    `source` may be bytes (content), a str with newlines (content), a path,
    or an open text/binary stream.
    """
    if isinstance(source, bytes):
        stream = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str) and "\n" in source:
        stream = io.StringIO(source)
    elif hasattr(source, "read"):
        stream = source
    else:
        stream = open(source, "r", encoding="utf-8")

    declared_n = None
    triples: list[tuple[int, int, float | None]] = []
    try:
        for lineno, raw in enumerate(stream, start=1):
            if isinstance(raw, bytes):
                raw = raw.decode("utf-8")
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("n="):
                try:
                    declared_n = int(line[2:])
                except ValueError:
                    raise EdgeListParseError(lineno, f"bad node-count header {line!r}")
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise EdgeListParseError(lineno, f"expected 'src dst [value]', got {line!r}")
            try:
                s, d = int(parts[0]), int(parts[1])
                v = float(parts[2]) if len(parts) == 3 else None
            except ValueError:
                raise EdgeListParseError(lineno, f"non-numeric field in {line!r}")
            if s < 0 or d < 0:
                raise EdgeListParseError(lineno, f"negative node id in {line!r}")
            triples.append((s, d, v))
    finally:
        if stream is not source:
            stream.close()
    return _assemble(triples, mode=mode, p=p, directed=directed, declared_n=declared_n)


def read_ap_file(path, g: Graph) -> set[int]:
    """AP file: one external node id per line; returns internal ids."""
    aps = set()
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            aps.add(g.internal(int(line)))
    return aps


@dataclass
class SeedAssignment:
    """Ordered per-AP seed lists; AP keys are graph ids, seeds are P ids."""

    lists: dict[int, list[int]] = field(default_factory=dict)

    def add(self, ap: int, seed: int) -> None:
        self.lists.setdefault(ap, []).append(seed)

    def distinct_seeds(self) -> set[int]:
        out: set[int] = set()
        for seeds in self.lists.values():
            out.update(seeds)
        return out

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in sorted(self.lists) for v in self.lists[u]]

    def size(self) -> int:
        return sum(len(s) for s in self.lists.values())

    def to_external_pairs(self, inst: "Instance") -> list[tuple[int, int]]:
        return [(inst.g.external(u), inst.pp.external(v)) for u, v in self.edges()]


class Instance:
    """A CIM query: graph, AP set, capacity, induced PP subgraph, candidates.

    Candidate lists hold P-internal node ids in ascending order; the
    partition-matroid ground set is the AP->candidate edge set.
    """

    def __init__(self, g: Graph, aps: set[int], k: int):
        if k < 0:
            raise GraphValidationError("capacity k must be >= 0")
        for u in aps:
            if not (0 <= u < g.n):
                raise GraphValidationError(f"AP id {u} not in graph")
        self.g = g
        self.aps = frozenset(aps)
        self.ap_list = sorted(aps)
        self.k = k

        keep = [v for v in range(g.n) if v not in self.aps]
        self._pp_of_g = {v: i for i, v in enumerate(keep)}
        self._g_of_pp = keep
        pp_edges = [(self._pp_of_g[s], self._pp_of_g[d], v)
                    for s, d, v in g.edges if s not in self.aps and d not in self.aps]
        self.pp = Graph(len(keep), pp_edges, [g.external(v) for v in keep])

        self.candidates: dict[int, list[int]] = {}
        for u in self.ap_list:
            cand = {self._pp_of_g[v] for v, _ in g.fwd[u] if v not in self.aps}
            self.candidates[u] = sorted(cand)
        self.candidate_edge_count = sum(len(c) for c in self.candidates.values())

    def pp_node_of(self, g_node: int) -> int:
        return self._pp_of_g[g_node]

    def g_node_of(self, pp_node: int) -> int:
        return self._g_of_pp[pp_node]

    def candidate_nodes(self) -> list[int]:
        """Distinct candidate PP nodes, ascending."""
        out: set[int] = set()
        for c in self.candidates.values():
            out.update(c)
        return sorted(out)

    def validate_assignment(self, sa: SeedAssignment) -> None:
        for u, seeds in sa.lists.items():
            if u not in self.aps:
                raise GraphValidationError(f"AP {self.g.external(u)} not in the AP set")
            if len(seeds) > self.k:
                raise GraphValidationError(
                    f"AP {self.g.external(u)}: {len(seeds)} seeds exceed capacity {self.k}")
            if len(set(seeds)) != len(seeds):
                raise GraphValidationError(f"AP {self.g.external(u)}: duplicate seed")
            cand = set(self.candidates.get(u, ()))
            for v in seeds:
                if v not in cand:
                    raise GraphValidationError(
                        f"AP {self.g.external(u)}: seed {self.pp.external(v)} is not a candidate")


def build_instance(g: Graph, aps: set[int], k: int) -> Instance:
    return Instance(g, aps, k)


def select_random_aps(g: Graph, fraction: float, rng) -> set[int]:
    """Sample floor(fraction * n) distinct nodes uniformly; deterministic per seed."""
    if not (0.0 < fraction <= 1.0):
        raise GraphValidationError(f"AP fraction {fraction} outside (0, 1]")
    count = int(fraction * g.n)
    if count < 1:
        raise GraphValidationError(f"fraction {fraction} selects no nodes (n={g.n})")
    if isinstance(rng, (int, np.integer)):
        rng = np.random.Generator(np.random.PCG64(int(rng)))
    chosen = rng.choice(g.n, size=count, replace=False)
    return {int(v) for v in chosen}
