"""Ranking metrics, run aggregation and graph diagnostics."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.stats import rankdata

from .errors import InputError, MetricError
from .graph import Graph


def auc(scores, labels) -> float:
    """Mann-Whitney AUC: share of (positive, negative) pairs ordered
    correctly, ties counting one half."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise InputError(f"{scores.size} scores for {labels.size} labels")
    pos = labels == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise MetricError("AUC needs both positive and negative labels")
    ranks = rankdata(scores)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def hits_at_k(pos_scores, neg_scores, k: int) -> float:
    """Fraction of positives scoring strictly above the ``k``-th best negative."""
    pos = np.asarray(pos_scores, dtype=np.float64).ravel()
    neg = np.asarray(neg_scores, dtype=np.float64).ravel()
    if k < 1 or k > neg.size:
        raise InputError(f"k must lie in [1, {neg.size}], got {k}")
    if pos.size == 0:
        raise MetricError("Hits@K needs at least one positive")
    kth = np.partition(neg, neg.size - k)[neg.size - k]
    return float(np.mean(pos > kth))


def parse_metric(name: str) -> tuple[str, Optional[int]]:
    """``"auc"`` or ``"hits@K"`` into ``(kind, k)``."""
    s = name.strip().lower()
    if s == "auc":
        return "auc", None
    if s.startswith("hits@"):
        try:
            k = int(s[5:])
        except ValueError:
            raise InputError(f"bad Hits@K metric {name!r}") from None
        if k < 1:
            raise InputError(f"bad Hits@K metric {name!r}")
        return "hits", k
    raise InputError(f"unknown metric {name!r}; expected 'auc' or 'hits@K'")


def evaluate(metric: str, scores, labels) -> float:
    kind, k = parse_metric(metric)
    scores, labels = np.asarray(scores), np.asarray(labels)
    if kind == "auc":
        return auc(scores, labels)
    return hits_at_k(scores[labels == 1], scores[labels == 0], k)


def transitivity_ratio(g: Graph) -> float:
    """Among unordered pairs with at least one common neighbour, the share
    that are themselves adjacent."""
    A = g.adjacency_matrix
    A2 = sp.triu(A @ A, k=1).tocsr()
    A2.eliminate_zeros()
    qualifying = A2.nnz
    if qualifying == 0:
        raise MetricError("no node pair shares a common neighbour; transitivity is undefined")
    linked = sp.triu(A, k=1).multiply(A2 > 0).nnz
    return linked / qualifying


def node_homophily(g: Graph, classes, include_isolated: bool = False) -> float:
    """Mean over nodes of the same-class share of neighbours.

    Isolated nodes are skipped unless ``include_isolated``, which scores them 0.
    """
    c = _classes(g, classes)
    deg = g.degrees
    rows = np.repeat(np.arange(g.num_nodes), deg)
    same = np.bincount(rows, weights=(c[rows] == c[g.indices]), minlength=g.num_nodes)
    has = deg > 0
    if include_isolated:
        if g.num_nodes == 0:
            raise MetricError("node homophily is undefined on an empty graph")
        ratio = np.zeros(g.num_nodes)
        ratio[has] = same[has] / deg[has]
        return float(ratio.mean())
    if not has.any():
        raise MetricError("node homophily is undefined when every node is isolated")
    return float(np.mean(same[has] / deg[has]))


def edge_homophily(g: Graph, classes) -> float:
    c = _classes(g, classes)
    e = g.edges()
    if len(e) == 0:
        raise MetricError("edge homophily is undefined on a graph without edges")
    return float(np.mean(c[e[:, 0]] == c[e[:, 1]]))


def _classes(g: Graph, classes) -> np.ndarray:
    c = np.asarray(classes)
    if c.shape != (g.num_nodes,):
        raise InputError(f"need one class per node ({g.num_nodes}), got shape {c.shape}")
    return c


@dataclass
class EvalReport:
    metric: str
    per_seed: list[float]
    mean: float
    std: float
    seeds: list[int] = field(default_factory=list)
    k: Optional[int] = None
    dataset: str = ""
    preset: str = ""
    run_id: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["k"] is None:
            d.pop("k")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def aggregate(values: Sequence[float], metric: str = "auc", seeds: Sequence[int] = (),
              dataset: str = "", preset: str = "", run_id: str = "") -> EvalReport:
    """Mean and population standard deviation of per-seed metric values."""
    vals = [float(v) for v in values]
    if not vals:
        raise InputError("cannot aggregate an empty list of runs")
    arr = np.sort(np.asarray(vals))
    mean = float(np.mean(arr))
    std = float(np.sqrt(np.mean((arr - mean) ** 2)))
    _, k = parse_metric(metric)
    return EvalReport(metric, vals, mean, std, list(seeds), k, dataset, preset, run_id)


def run_id(config: dict) -> str:
    """Short content hash of a configuration."""
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha1(blob).hexdigest()[:12]
