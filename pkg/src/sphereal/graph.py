"""Threshold graph over kept points and its connected components.

Edges join kept points whose geodesic angle is strictly below eta; the
boundary case angle == eta is NOT an edge.  Component ids are renumbered
0..count-1 in order of each component's smallest member index, so the
partition is deterministic regardless of edge scan order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = ["AngleGraph", "build_components", "components_oracle"]


@dataclass
class AngleGraph:
    """Component partition of the kept points at threshold eta."""

    node_ids: np.ndarray  # original sample indices of the kept points
    eta: float
    component_of: np.ndarray  # component id per node, aligned with node_ids
    component_count: int

    def members(self, component: int) -> np.ndarray:
        """Original sample indices belonging to one component."""
        return self.node_ids[self.component_of == component]

    def partition(self) -> list[frozenset[int]]:
        """Components as frozensets of original indices (for comparisons)."""
        return [
            frozenset(self.members(c).tolist()) for c in range(self.component_count)
        ]


class _UnionFind:
    """Union by size with path compression (plain lists: the edge scan is a
    tight scalar loop and list indexing beats numpy scalar indexing)."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size

    def find(self, i: int) -> int:
        parent = self.parent
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def _validate(angles: np.ndarray, kept_mask, eta: float) -> tuple[np.ndarray, np.ndarray]:
    angles = np.asarray(angles, dtype=np.float64)
    if angles.ndim != 2 or angles.shape[0] != angles.shape[1]:
        raise ParameterError("angle matrix must be square")
    kept = np.asarray(kept_mask, dtype=bool)
    if kept.shape != (angles.shape[0],):
        raise ParameterError("kept_mask length must match the angle matrix")
    if not (0.0 < eta < np.pi):
        raise ParameterError(f"eta must lie in (0, pi), got {eta}")
    node_ids = np.flatnonzero(kept)
    if node_ids.size == 0:
        raise ParameterError("no kept nodes to build a graph over")
    return angles, node_ids


def _renumber(node_ids: np.ndarray, raw_labels: np.ndarray) -> tuple[np.ndarray, int]:
    """Map arbitrary component labels to contiguous ids ordered by smallest member."""
    order: dict[int, int] = {}
    for label in raw_labels:  # node_ids ascending, so first sight = smallest member
        if label not in order:
            order[label] = len(order)
    component_of = np.fromiter((order[l] for l in raw_labels), dtype=np.int64)
    return component_of, len(order)


def build_components(angles, kept_mask, eta: float) -> AngleGraph:
    """Union-find components of the strict-eta threshold graph on kept points."""
    angles, node_ids = _validate(angles, kept_mask, eta)
    sub = angles[np.ix_(node_ids, node_ids)]
    uf = _UnionFind(node_ids.size)
    ii, jj = np.nonzero(np.triu(sub < eta, k=1))
    for a, b in zip(ii.tolist(), jj.tolist()):
        uf.union(a, b)
    raw = np.fromiter((uf.find(i) for i in range(node_ids.size)), dtype=np.int64)
    component_of, count = _renumber(node_ids, raw)
    return AngleGraph(node_ids=node_ids, eta=float(eta), component_of=component_of,
                      component_count=count)


def components_oracle(angles, kept_mask, eta: float) -> AngleGraph:
    """Exhaustive breadth-first reference with no union-find (test oracle)."""
    angles, node_ids = _validate(angles, kept_mask, eta)
    sub = angles[np.ix_(node_ids, node_ids)]
    n = node_ids.size
    raw = np.full(n, -1, dtype=np.int64)
    next_label = 0
    for start in range(n):
        if raw[start] >= 0:
            continue
        queue = deque([start])
        raw[start] = next_label
        while queue:
            u = queue.popleft()
            for v in range(n):
                if v != u and raw[v] < 0 and sub[u, v] < eta:
                    raw[v] = next_label
                    queue.append(v)
        next_label += 1
    component_of, count = _renumber(node_ids, raw)
    return AngleGraph(node_ids=node_ids, eta=float(eta), component_of=component_of,
                      component_count=count)
