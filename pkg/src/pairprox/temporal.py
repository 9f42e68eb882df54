"""Year-annotated weighted collaboration graphs and their windowed indices.

A :class:`TemporalGraph` holds one record per (pair, year) with a positive
collaboration count.  Every index is computed on a *windowed view*: the
records whose year falls inside an inclusive ``(first, last)`` range.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .domain import common_embedding, cosine_distance, l1_distance
from .errors import ConfigError, InputError
from .graph import Graph, _masked_distance, build_graph, read_edge_list
from .parallel import map_chunks

log = logging.getLogger(__name__)

Window = tuple[int, int]


@dataclass(frozen=True)
class CollabWindows:
    """Year ranges used by the collaboration indices (inclusive bounds)."""

    all_years: Window = (1963, 2017)
    recent: Window = (2007, 2017)
    short: Window = (2012, 2017)
    label_years: tuple[int, ...] = tuple(range(2007, 2017))
    career_cutoff: int = 1985

    def names(self) -> tuple[str, ...]:
        return COLLAB_BASE_NAMES + tuple(f"la_{y}" for y in self.label_years)


COLLAB = CollabWindows()

COLLAB_BASE_NAMES = (
    "oldest_u", "oldest_v", "newest_u", "newest_v",
    "w_all", "w_10", "w_5", "cc_all", "cc_10", "cc_5",
    "pref_attach", "w_adamic_adar", "w_jaccard", "w_salton", "graph_distance_10",
    "common_embedding", "l1_distance", "cosine_distance",
)


@dataclass(frozen=True)
class _View:
    weights: dict          # (a, b) with a < b -> summed weight
    graph: Graph
    activity: np.ndarray   # per-node summed weight


@dataclass(frozen=True, eq=False)
class TemporalGraph:
    num_nodes: int
    u: np.ndarray
    v: np.ndarray
    year: np.ndarray
    weight: np.ndarray
    _views: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.int64)
        v = np.asarray(self.v, dtype=np.int64)
        year = np.asarray(self.year, dtype=np.int64)
        weight = np.asarray(self.weight, dtype=np.int64)
        if not (u.shape == v.shape == year.shape == weight.shape) or u.ndim != 1:
            raise InputError("temporal record columns must be 1-D with equal length")
        if u.size:
            if (u == v).any():
                i = int(np.flatnonzero(u == v)[0])
                raise InputError(f"record #{i} is a self-loop on node {u[i]}")
            if min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= self.num_nodes:
                raise InputError(f"record node id outside [0, {self.num_nodes})")
            if (weight <= 0).any():
                raise InputError("record weights must be positive counts")
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        for name, arr in (("u", lo), ("v", hi), ("year", year), ("weight", weight)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def from_records(cls, num_nodes: int, records: Sequence[Sequence[int]]) -> "TemporalGraph":
        arr = np.asarray(records, dtype=np.int64).reshape(-1, 4)
        return cls(num_nodes, arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3])

    def records(self) -> list[tuple[int, int, int, int]]:
        return list(zip(self.u.tolist(), self.v.tolist(), self.year.tolist(), self.weight.tolist()))

    def restrict(self, last_year: int) -> "TemporalGraph":
        keep = self.year <= last_year
        return TemporalGraph(self.num_nodes, self.u[keep], self.v[keep],
                             self.year[keep], self.weight[keep])

    def pairs_in_year(self, year: int) -> np.ndarray:
        keep = self.year == year
        return np.unique(np.stack([self.u[keep], self.v[keep]], axis=1), axis=0)

    def view(self, window: Window) -> _View:
        window = _check_window(window)
        if window not in self._views:
            keep = (self.year >= window[0]) & (self.year <= window[1])
            weights: dict = defaultdict(int)
            for a, b, w in zip(self.u[keep].tolist(), self.v[keep].tolist(), self.weight[keep].tolist()):
                weights[(a, b)] += w
            weights = dict(weights)
            act = np.zeros(self.num_nodes, dtype=np.int64)
            np.add.at(act, self.u[keep], self.weight[keep])
            np.add.at(act, self.v[keep], self.weight[keep])
            self._views[window] = _View(weights, build_graph(self.num_nodes, list(weights)), act)
        return self._views[window]

    @property
    def _pair_years(self) -> dict:
        if "pair_years" not in self._views:
            py = defaultdict(set)
            for a, b, y in zip(self.u.tolist(), self.v.tolist(), self.year.tolist()):
                py[(a, b)].add(y)
            self._views["pair_years"] = dict(py)
        return self._views["pair_years"]

    @property
    def _career(self) -> tuple[np.ndarray, np.ndarray]:
        if "career" not in self._views:
            first = np.full(self.num_nodes, np.iinfo(np.int64).max)
            last = np.full(self.num_nodes, np.iinfo(np.int64).min)
            np.minimum.at(first, self.u, self.year)
            np.minimum.at(first, self.v, self.year)
            np.maximum.at(last, self.u, self.year)
            np.maximum.at(last, self.v, self.year)
            self._views["career"] = (first, last)
        return self._views["career"]

    def __getstate__(self):
        return {k: getattr(self, k) for k in ("num_nodes", "u", "v", "year", "weight")}

    def __setstate__(self, state):
        for k, val in state.items():
            object.__setattr__(self, k, val)
        object.__setattr__(self, "_views", {})


def _check_window(window) -> Window:
    a, b = int(window[0]), int(window[1])
    if a > b:
        raise InputError(f"window ({a}, {b}) is empty or inverted")
    return a, b


def _key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


def _distinct(tg: TemporalGraph, u: int, v: int) -> None:
    for x in (u, v):
        if not 0 <= x < tg.num_nodes:
            raise InputError(f"node id {x} out of range [0, {tg.num_nodes})")
    if u == v:
        raise InputError(f"pair indices are defined on distinct nodes, got ({u}, {v})")


def windowed_weight_sum(tg: TemporalGraph, u: int, v: int, window: Window) -> int:
    _distinct(tg, u, v)
    return tg.view(window).weights.get(_key(u, v), 0)


def activity(tg: TemporalGraph, u: int, window: Window = COLLAB.recent) -> int:
    """Total collaboration weight of ``u`` with all its partners in ``window``."""
    if not 0 <= u < tg.num_nodes:
        raise InputError(f"node id {u} out of range [0, {tg.num_nodes})")
    return int(tg.view(window).activity[u])


def preferential_attachment(tg: TemporalGraph, u: int, v: int,
                            window: Window = COLLAB.recent) -> int:
    _distinct(tg, u, v)
    act = tg.view(window).activity
    return int(act[u]) * int(act[v])


def weighted_indices(tg: TemporalGraph, u: int, v: int,
                     window: Window = COLLAB.recent) -> tuple[float, float, float]:
    """Weighted Adamic-Adar, Jaccard and Salton on the windowed graph."""
    _distinct(tg, u, v)
    view = tg.view(window)
    W, act = view.weights, view.activity
    nu, nv = view.graph.neighbor_sets[u], view.graph.neighbor_sets[v]
    common = sorted(nu & nv)

    def through(z):
        return W.get(_key(u, z), 0) + W.get(_key(z, v), 0)

    aa = sum(1.0 / math.log(act[z]) for z in common if act[z] > 1)
    num = sum(through(z) for z in common)
    den = sum(through(x) for x in sorted(nu | nv))
    jac = num / den if den else 0.0
    sal_den = math.sqrt(float(act[u]) * float(act[v]))
    sal = num / sal_den if sal_den else 0.0
    return float(aa), float(jac), float(sal)


def windowed_common_collaborators(tg: TemporalGraph, u: int, v: int, window: Window) -> int:
    _distinct(tg, u, v)
    g = tg.view(window).graph
    return len(g.neighbor_sets[u] & g.neighbor_sets[v])


def career_span_flags(tg: TemporalGraph, u: int, cutoff: int = COLLAB.career_cutoff,
                      strict: bool = True) -> tuple[int, int]:
    """``(oldest, newest)`` flags: 0 if that year is before ``cutoff``, else 1.

    A node without any record raises unless ``strict`` is false, in which case
    it gets ``(1, 1)`` and a warning is logged.
    """
    if not 0 <= u < tg.num_nodes:
        raise InputError(f"node id {u} out of range [0, {tg.num_nodes})")
    first, last = tg._career
    if first[u] > last[u]:
        if strict:
            raise ConfigError(f"node {u} has no collaboration records")
        log.warning("node %d has no collaboration records; career flags set to (1, 1)", u)
        return 1, 1
    return int(first[u] >= cutoff), int(last[u] >= cutoff)


def yearwise_labels(tg: TemporalGraph, u: int, v: int,
                    years: Sequence[int] = COLLAB.label_years) -> np.ndarray:
    _distinct(tg, u, v)
    present = tg._pair_years.get(_key(u, v), set())
    return np.array([1.0 if y in present else 0.0 for y in years])


def collab_vector(tg: TemporalGraph, embeddings: np.ndarray | None, u: int, v: int,
                  windows: CollabWindows = COLLAB, strict: bool = True) -> dict[str, float]:
    """All collaboration indices for one pair, keyed by canonical name."""
    if embeddings is None:
        raise ConfigError("collaboration profile requires a real-valued embedding block")
    _distinct(tg, u, v)
    fu = career_span_flags(tg, u, windows.career_cutoff, strict)
    fv = career_span_flags(tg, v, windows.career_cutoff, strict)
    recent = tg.view(windows.recent)
    vals = [
        fu[0], fv[0], fu[1], fv[1],
        windowed_weight_sum(tg, u, v, windows.all_years),
        windowed_weight_sum(tg, u, v, windows.recent),
        windowed_weight_sum(tg, u, v, windows.short),
        windowed_common_collaborators(tg, u, v, windows.all_years),
        windowed_common_collaborators(tg, u, v, windows.recent),
        windowed_common_collaborators(tg, u, v, windows.short),
        preferential_attachment(tg, u, v, windows.recent),
        *weighted_indices(tg, u, v, windows.recent),
        _masked_distance(recent.graph.neighbor_lists, tg.num_nodes, u, v),
        common_embedding(embeddings[u], embeddings[v]),
        l1_distance(embeddings[u], embeddings[v]),
        cosine_distance(embeddings[u], embeddings[v]),
        *yearwise_labels(tg, u, v, windows.label_years),
    ]
    return dict(zip(windows.names(), (float(x) for x in vals)))


def _collab_block(state, pairs: np.ndarray) -> np.ndarray:
    tg, emb, windows = state
    rows = [list(collab_vector(tg, emb, u, v, windows, strict=False).values())
            for u, v in pairs.tolist()]
    return np.array(rows, dtype=np.float64).reshape(len(pairs), len(windows.names()))


def collab_matrix(tg: TemporalGraph, embeddings: np.ndarray, pairs,
                  windows: CollabWindows = COLLAB, workers: int = 1) -> np.ndarray:
    if embeddings is None:
        raise ConfigError("collaboration profile requires a real-valued embedding block")
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return map_chunks(_collab_block, (tg, np.asarray(embeddings, dtype=np.float64), windows),
                      pairs, workers=workers, width=len(windows.names()))


def read_temporal_edges(path, remap: dict[int, int] | None = None,
                        num_nodes: int | None = None) -> TemporalGraph:
    """Read ``u<TAB>v<TAB>year<TAB>weight`` lines."""
    rows = read_edge_list(path, columns=4)
    if remap is not None:
        try:
            rows = [(remap[a], remap[b], y, w) for a, b, y, w in rows]
        except KeyError as exc:
            raise InputError(f"{path}: node id {exc.args[0]} missing from id map") from None
    if num_nodes is None:
        num_nodes = 1 + max((max(r[0], r[1]) for r in rows), default=-1)
    return TemporalGraph.from_records(num_nodes, rows)


def write_temporal_edges(path, tg: TemporalGraph) -> None:
    with open(path, "w") as fh:
        for a, b, y, w in tg.records():
            fh.write(f"{a}\t{b}\t{y}\t{w}\n")
