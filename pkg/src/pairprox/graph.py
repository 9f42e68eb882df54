"""Immutable undirected simple graph and the neighbourhood primitives
(walk counts, masked shortest paths) the proximity indices are built from."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import InputError


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph over dense ids ``0..num_nodes-1``.

    Adjacency is stored in CSR form: the neighbours of ``u`` are
    ``indices[indptr[u]:indptr[u + 1]]``, strictly ascending.
    """

    num_nodes: int
    indptr: np.ndarray
    indices: np.ndarray

    @property
    def num_edges(self) -> int:
        return int(self.indices.size // 2)

    @property
    def adjacency(self) -> list[np.ndarray]:
        return [self.neighbors(u) for u in range(self.num_nodes)]

    def neighbors(self, u: int) -> np.ndarray:
        self._check(u)
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def degree(self, u: int) -> int:
        self._check(u)
        return int(self.indptr[u + 1] - self.indptr[u])

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.diff(self.indptr)
        d.flags.writeable = False
        return d

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.size and nb[i] == v)

    def edges(self) -> np.ndarray:
        """Canonical ``(u, v)`` rows with ``u < v``, lexicographically sorted."""
        rows = np.repeat(np.arange(self.num_nodes), self.degrees)
        keep = rows < self.indices
        return np.stack([rows[keep], self.indices[keep]], axis=1)

    @cached_property
    def adjacency_matrix(self) -> sp.csr_matrix:
        data = np.ones(self.indices.size, dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.num_nodes,) * 2)

    @cached_property
    def neighbor_sets(self) -> list[frozenset]:
        return [frozenset(self.neighbors(u).tolist()) for u in range(self.num_nodes)]

    @cached_property
    def neighbor_lists(self) -> list[list[int]]:
        return [self.neighbors(u).tolist() for u in range(self.num_nodes)]

    def _check(self, u: int) -> None:
        if not 0 <= u < self.num_nodes:
            raise InputError(f"node id {u} out of range [0, {self.num_nodes})")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.num_nodes == other.num_nodes
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def __hash__(self):
        return hash((self.num_nodes, self.indices.tobytes()))

    def __getstate__(self):
        # cached views are rebuilt lazily on the other side of a pickle
        return {"num_nodes": self.num_nodes, "indptr": self.indptr, "indices": self.indices}

    def __setstate__(self, state):
        object.__setattr__(self, "num_nodes", state["num_nodes"])
        object.__setattr__(self, "indptr", state["indptr"])
        object.__setattr__(self, "indices", state["indices"])


def build_graph(num_nodes: int, edges: Iterable[Sequence[int]]) -> Graph:
    """Build a graph, dropping self-loops and collapsing duplicate or
    reversed edges into one undirected edge."""
    if num_nodes < 0:
        raise InputError(f"num_nodes must be non-negative, got {num_nodes}")
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError(f"edges must be (u, v) pairs, got shape {arr.shape}")
    bad = np.flatnonzero((arr < 0).any(axis=1) | (arr >= num_nodes).any(axis=1))
    if bad.size:
        i = int(bad[0])
        raise InputError(
            f"edge #{i} ({arr[i, 0]}, {arr[i, 1]}) has a node id outside [0, {num_nodes})")
    arr = arr[arr[:, 0] != arr[:, 1]]
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    und = np.unique(np.stack([lo, hi], axis=1), axis=0) if arr.size else arr
    src = np.concatenate([und[:, 0], und[:, 1]])
    dst = np.concatenate([und[:, 1], und[:, 0]])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=num_nodes), out=indptr[1:])
    indices = dst.astype(np.int64)
    indptr.flags.writeable = False
    indices.flags.writeable = False
    return Graph(num_nodes, indptr, indices)


def neighbors(g: Graph, u: int) -> np.ndarray:
    return g.neighbors(u)


def degree(g: Graph, u: int) -> int:
    return g.degree(u)


def _distinct(g: Graph, u: int, v: int) -> None:
    g._check(u)
    g._check(v)
    if u == v:
        raise InputError(f"pair indices are defined on distinct nodes, got ({u}, {v})")


def walk_count(g: Graph, u: int, v: int, k: int) -> int:
    """Number of length-``k`` walks from ``u`` to ``v`` (``k`` in {2, 3})."""
    _distinct(g, u, v)
    nu = g.neighbor_sets[u]
    if k == 2:
        return len(nu & g.neighbor_sets[v])
    if k == 3:
        nv = g.neighbor_sets[v]
        return sum(len(g.neighbor_sets[a] & nv) for a in nu)
    raise InputError(f"walk length must be 2 or 3, got {k}")


def distance_excluding_direct_edge(g: Graph, u: int, v: int) -> int:
    """Hop distance between ``u`` and ``v`` with the edge ``(u, v)`` masked.

    Disconnected pairs get ``g.num_nodes``, which exceeds every real distance.
    """
    _distinct(g, u, v)
    return _masked_distance(g.neighbor_lists, g.num_nodes, u, v)


def _masked_distance(adj: list[list[int]], n: int, u: int, v: int) -> int:
    # bidirectional BFS, expanding the smaller frontier one full level at a time
    side = [{u}, {v}]
    frontier = [[u], [v]]
    depth = [0, 0]
    while frontier[0] and frontier[1]:
        s = 0 if len(frontier[0]) <= len(frontier[1]) else 1
        mine, other = side[s], side[1 - s]
        nxt = []
        hit = False
        for x in frontier[s]:
            for y in adj[x]:
                if (x == u and y == v) or (x == v and y == u):
                    continue
                if y in mine:
                    continue
                if y in other:
                    hit = True
                mine.add(y)
                nxt.append(y)
        depth[s] += 1
        if hit:
            return depth[0] + depth[1]
        frontier[s] = nxt
    return n


def read_edge_list(path, columns: int = 2) -> list[tuple]:
    """Parse a tab-separated edge list; ``#`` lines are comments.

    Returns raw rows with integer fields. Malformed lines raise
    :class:`InputError` naming the line number.
    """
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t") if "\t" in line else line.split()
            if len(parts) < columns:
                raise InputError(f"{path}:{lineno}: expected {columns} fields, got {len(parts)}")
            try:
                rows.append(tuple(int(p) for p in parts[:columns]))
            except ValueError:
                raise InputError(f"{path}:{lineno}: non-integer field in {line!r}") from None
    return rows


def write_edge_list(path, edges: Iterable[Sequence[int]]) -> None:
    with open(path, "w") as fh:
        for e in edges:
            fh.write("\t".join(str(int(x)) for x in e) + "\n")


def build_remap(external_ids: Iterable[int]) -> dict[int, int]:
    """Dense 0-based ids assigned in ascending order of external id."""
    return {ext: i for i, ext in enumerate(sorted(set(external_ids)))}


def write_remap(path, remap: dict[int, int]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["external_id", "internal_id"])
        for ext, internal in sorted(remap.items(), key=lambda kv: kv[1]):
            w.writerow([ext, internal])


def read_remap(path) -> dict[int, int]:
    with open(path, newline="") as fh:
        r = csv.DictReader(fh)
        return {int(row["external_id"]): int(row["internal_id"]) for row in r}


def load_graph(path, num_nodes: int | None = None) -> Graph:
    """Read an edge-list file whose ids are already dense."""
    rows = read_edge_list(Path(path))
    if num_nodes is None:
        num_nodes = 1 + max((max(r) for r in rows), default=-1)
    try:
        return build_graph(num_nodes, rows)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None
