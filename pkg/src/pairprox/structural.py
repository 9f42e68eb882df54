"""Structural proximity indices for node pairs.

Scalar functions (``jaccard``, ``salton`` ...) work on one pair through
neighbour sets; :func:`structural_matrix` computes whole batches with sparse
matrix products and is what feature assembly uses.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import InputError
from .graph import Graph, _distinct, _masked_distance, distance_excluding_direct_edge, walk_count
from .parallel import map_chunks

STRUCTURAL_NAMES = (
    "graph_distance", "path2", "path3", "adamic_adar",
    "jaccard", "salton", "sorensen",
    "jaccard3", "salton3", "sorensen3",
)

# reduced set used for very large graphs (no 3-walk indices)
REDUCED_NAMES = ("graph_distance", "path2", "adamic_adar", "jaccard", "salton", "sorensen")


def _numerator(g: Graph, u: int, v: int, order: int) -> int:
    if order not in (2, 3):
        raise InputError(f"order must be 2 or 3, got {order}")
    return walk_count(g, u, v, order)


def jaccard(g: Graph, u: int, v: int, order: int = 2) -> float:
    """Common walks of length ``order`` over the size of the 1-hop union."""
    num = _numerator(g, u, v, order)
    union = len(g.neighbor_sets[u] | g.neighbor_sets[v])
    return num / union if union else 0.0


def salton(g: Graph, u: int, v: int, order: int = 2) -> float:
    num = _numerator(g, u, v, order)
    ku, kv = g.degree(u), g.degree(v)
    if ku == 0 or kv == 0:
        return 0.0
    return num / math.sqrt(ku * kv)


def sorensen(g: Graph, u: int, v: int, order: int = 2) -> float:
    num = _numerator(g, u, v, order)
    s = g.degree(u) + g.degree(v)
    return 2.0 * num / s if s else 0.0


def adamic_adar(g: Graph, u: int, v: int) -> float:
    """Sum of ``1 / ln(deg(w))`` over common neighbours ``w``."""
    _distinct(g, u, v)
    common = sorted(g.neighbor_sets[u] & g.neighbor_sets[v])
    # a common neighbour of two distinct nodes always has degree >= 2
    return float(sum(1.0 / math.log(g.degree(w)) for w in common))


def structural_vector(g: Graph, u: int, v: int) -> np.ndarray:
    """The ten indices for one pair, in :data:`STRUCTURAL_NAMES` order."""
    return np.array([
        distance_excluding_direct_edge(g, u, v),
        walk_count(g, u, v, 2),
        walk_count(g, u, v, 3),
        adamic_adar(g, u, v),
        jaccard(g, u, v, 2),
        salton(g, u, v, 2),
        sorensen(g, u, v, 2),
        jaccard(g, u, v, 3),
        salton(g, u, v, 3),
        sorensen(g, u, v, 3),
    ], dtype=np.float64)


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num, dtype=np.float64)
    nz = den > 0
    out[nz] = num[nz] / den[nz]
    return out


def _rowdot(a: sp.csr_matrix, b: sp.csr_matrix) -> np.ndarray:
    return np.asarray(a.multiply(b).sum(axis=1)).ravel()


def _structural_block(g: Graph, pairs: np.ndarray, names: tuple[str, ...],
                      mask_direct_edge: bool = False) -> np.ndarray:
    us, vs = pairs[:, 0], pairs[:, 1]
    A = g.adjacency_matrix
    deg = g.degrees.astype(np.float64)
    Au, Av = A[us], A[vs]
    cols = {}
    cn = _rowdot(Au, Av)
    cols["path2"] = cn
    ku, kv = deg[us], deg[vs]
    # with the pair's own edge removed, common neighbours and their degrees
    # are unchanged; endpoint degrees drop by one and so do length-3 walks
    # through the edge (ku + kv - 1 of them)
    direct = np.asarray(A[us, vs]).ravel().astype(np.float64) if mask_direct_edge else 0.0
    walks_through = direct * (ku + kv - 1)
    ku, kv = ku - direct, kv - direct
    union = ku + kv - cn
    cols["jaccard"] = _safe_div(cn, union)
    cols["salton"] = _safe_div(cn, np.sqrt(ku * kv))
    cols["sorensen"] = _safe_div(2.0 * cn, ku + kv)
    inv_log = np.zeros_like(deg)
    many = deg > 1
    inv_log[many] = 1.0 / np.log(deg[many])
    cols["adamic_adar"] = _rowdot(Au @ sp.diags(inv_log), Av)
    if any(n.endswith("3") for n in names):
        l3 = _rowdot(Au @ A, Av) - walks_through
        cols["path3"] = l3
        cols["jaccard3"] = _safe_div(l3, union)
        cols["salton3"] = _safe_div(l3, np.sqrt(ku * kv))
        cols["sorensen3"] = _safe_div(2.0 * l3, ku + kv)
    if "graph_distance" in names:
        adj = g.neighbor_lists
        dist = np.empty(len(pairs), dtype=np.float64)
        for i, (u, v) in enumerate(pairs.tolist()):
            dist[i] = 2 if cn[i] > 0 else _masked_distance(adj, g.num_nodes, u, v)
        cols["graph_distance"] = dist
    return np.column_stack([cols[n] for n in names]) if len(pairs) else np.zeros((0, len(names)))


def structural_matrix(g: Graph, pairs, names: Sequence[str] = STRUCTURAL_NAMES,
                      workers: int = 1, mask_direct_edge: bool = False) -> np.ndarray:
    """Index values for a batch of pairs, one row per pair in input order.

    By default an existing edge (u, v) is kept for every index except the
    graph distance. ``mask_direct_edge`` instead scores each pair as if its
    own edge were absent, which removes the gap between training positives
    (edges of the observed graph) and held-out positives (non-edges).

    Work is split into contiguous chunks across ``workers`` processes; the
    result does not depend on the worker count.
    """
    names = tuple(names)
    unknown = set(names) - set(STRUCTURAL_NAMES)
    if unknown:
        raise InputError(f"unknown structural index names: {sorted(unknown)}")
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if pairs.size:
        if (pairs < 0).any() or (pairs >= g.num_nodes).any():
            raise InputError("pair contains a node id outside the graph")
        same = np.flatnonzero(pairs[:, 0] == pairs[:, 1])
        if same.size:
            raise InputError(f"pair #{same[0]} repeats node {pairs[same[0], 0]}")
    return map_chunks(_structural_block, g, pairs, names, mask_direct_edge, workers=workers,
                      width=len(names))
