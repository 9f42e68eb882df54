"""Small synthetic datasets for tests and demos.

Nothing here is used by the pipeline itself; the generators only make it
possible to exercise every stage without downloading a benchmark.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .domain import NodeAttributes, write_block_csv, write_classes_csv
from .graph import Graph, build_graph, write_edge_list
from .temporal import TemporalGraph, write_temporal_edges


def random_graph(n: int, p: float, seed: int = 0) -> Graph:
    """Erdos-Renyi graph on ``n`` nodes."""
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, k=1)
    keep = rng.random(len(iu[0])) < p
    return build_graph(n, np.stack([iu[0][keep], iu[1][keep]], axis=1))


def attributed_sbm(n: int = 200, num_classes: int = 4, dims: int = 32, p_in: float = 0.08,
                   p_out: float = 0.005, flip: float = 0.1, seed: int = 0) -> tuple[Graph, NodeAttributes]:
    """Homophilic stochastic block model with class-correlated binary
    attributes: each class owns a random prototype bit vector and nodes copy
    it with each bit flipped with probability ``flip``."""
    rng = np.random.default_rng(seed)
    classes = rng.integers(0, num_classes, size=n)
    same = classes[:, None] == classes[None, :]
    prob = np.where(same, p_in, p_out)
    draw = rng.random((n, n)) < prob
    u, v = np.nonzero(np.triu(draw, k=1))
    g = build_graph(n, np.stack([u, v], axis=1))
    protos = (rng.random((num_classes, dims)) < 0.3).astype(np.int8)
    noise = rng.random((n, dims)) < flip
    bits = np.where(noise, 1 - protos[classes], protos[classes]).astype(np.int8)
    return g, NodeAttributes(binary_block=bits, class_block=classes, num_classes=num_classes)


def random_temporal(n: int, records: int, years=(1980, 2019), max_weight: int = 3,
                    seed: int = 0) -> TemporalGraph:
    """Uniformly random collaboration records (repeats allowed)."""
    rng = np.random.default_rng(seed)
    u = rng.integers(0, n, size=records)
    v = (u + rng.integers(1, n, size=records)) % n
    y = rng.integers(years[0], years[1] + 1, size=records)
    w = rng.integers(1, max_weight + 1, size=records)
    return TemporalGraph.from_records(n, np.stack([u, v, y, w], axis=1).tolist())


def clustered_temporal(n: int = 120, groups: int = 6, records: int = 1500, years=(1995, 2019),
                       p_in: float = 0.9, dims: int = 8, seed: int = 0) -> tuple[TemporalGraph, np.ndarray]:
    """Collaboration records concentrated inside groups, with group-level
    real embeddings, so that the learned scorer has something to find."""
    rng = np.random.default_rng(seed)
    group = rng.integers(0, groups, size=n)
    members = [np.flatnonzero(group == k) for k in range(groups)]
    rows = []
    for _ in range(records):
        u = int(rng.integers(n))
        pool = members[group[u]] if rng.random() < p_in else np.arange(n)
        v = int(rng.choice(pool))
        if v == u:
            continue
        rows.append((u, v, int(rng.integers(years[0], years[1] + 1)), int(rng.integers(1, 4))))
    centers = rng.normal(size=(groups, dims))
    emb = centers[group] + 0.3 * rng.normal(size=(n, dims))
    return TemporalGraph.from_records(n, rows), emb


def write_static_dataset(directory, g: Graph, attrs: NodeAttributes, id_offset: int = 0) -> dict:
    """Write an edge list plus attribute CSVs using external ids
    ``internal + id_offset``; returns the config path fields."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    ext = np.arange(g.num_nodes) + id_offset
    write_edge_list(d / "edges.tsv", ext[g.edges()])
    out = {"edges": str(d / "edges.tsv")}
    if attrs.binary_block is not None:
        write_block_csv(d / "attributes.csv", attrs.binary_block, ext)
        out["attributes"] = str(d / "attributes.csv")
    if attrs.class_block is not None:
        write_classes_csv(d / "classes.csv", attrs.class_block, ext)
        out["classes"] = str(d / "classes.csv")
    if attrs.real_block is not None:
        write_block_csv(d / "real.csv", attrs.real_block, ext)
        out["real_attributes"] = str(d / "real.csv")
    return out


def write_temporal_dataset(directory, tg: TemporalGraph, embeddings: np.ndarray) -> dict:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_temporal_edges(d / "edges.tsv", tg)
    write_block_csv(d / "real.csv", embeddings, np.arange(tg.num_nodes))
    return {"edges": str(d / "edges.tsv"), "real_attributes": str(d / "real.csv"), "temporal": True}
