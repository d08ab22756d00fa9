"""Synthetic benchmark graphs: uniform random directed edges, no repeats."""

from __future__ import annotations

import numpy as np

from .graphs import Graph


def random_edge_set(n: int, m: int, seed: int) -> list[tuple[int, int]]:
    """m distinct directed (u, v) pairs, u != v, uniform over all such pairs."""
    if m > n * (n - 1):
        raise ValueError("too many edges for a simple directed graph")
    rng = np.random.Generator(np.random.PCG64(seed))
    seen: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []
    while len(edges) < m:
        batch = rng.integers(0, n, size=(2 * (m - len(edges)) + 16, 2))
        for u, v in batch:
            if u == v:
                continue
            e = (int(u), int(v))
            if e in seen:
                continue
            seen.add(e)
            edges.append(e)
            if len(edges) == m:
                break
    return edges


def random_graph(n: int, m: int, seed: int, mode: str = "weighted-cascade-ic",
                 p: float | None = None) -> Graph:
    return Graph.from_edges(random_edge_set(n, m, seed), mode=mode, p=p, n=n)


def write_edge_list(path, n: int, edges: list[tuple[int, int]]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"n={n}\n")
        for u, v in edges:
            f.write(f"{u} {v}\n")
