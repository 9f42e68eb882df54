"""Transductive edge splits, negative sampling and pair-feature assembly."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np

from .domain import (DomainProfile, NodeAttributes, domain_matrix, read_block_csv,
                     read_classes_csv, read_csv_ids)
from .errors import ConfigError, InputError
from .graph import Graph, build_graph, build_remap, read_edge_list, write_edge_list
from .structural import REDUCED_NAMES, STRUCTURAL_NAMES, structural_matrix
from .temporal import COLLAB, CollabWindows, TemporalGraph, collab_matrix, read_temporal_edges

SPLITS = ("train", "valid", "test")


@dataclass
class DatasetSplit:
    train_pos: np.ndarray
    valid_pos: np.ndarray
    test_pos: np.ndarray
    train_neg: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), np.int64))
    valid_neg: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), np.int64))
    test_neg: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), np.int64))
    seed: int = 0
    ratios: tuple[float, float, float] = (0.85, 0.05, 0.10)

    def pos(self, name: str) -> np.ndarray:
        return getattr(self, f"{name}_pos")

    def neg(self, name: str) -> np.ndarray:
        return getattr(self, f"{name}_neg")

    def all_positives(self) -> np.ndarray:
        return np.vstack([self.train_pos, self.valid_pos, self.test_pos])

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        for name in SPLITS:
            write_edge_list(d / f"{name}_pos.tsv", self.pos(name))
            write_edge_list(d / f"{name}_neg.tsv", self.neg(name))

    @classmethod
    def load(cls, directory, seed: int = 0, ratios=(0.85, 0.05, 0.10)) -> "DatasetSplit":
        d = Path(directory)
        arrs = {}
        for name in SPLITS:
            for kind in ("pos", "neg"):
                rows = read_edge_list(d / f"{name}_{kind}.tsv")
                arrs[f"{name}_{kind}"] = np.asarray(rows, dtype=np.int64).reshape(-1, 2)
        return cls(**arrs, seed=seed, ratios=tuple(ratios))


def _canonical(edges) -> np.ndarray:
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return np.stack([arr.min(axis=1), arr.max(axis=1)], axis=1)


def largest_remainder(total: int, ratios: Sequence[float]) -> list[int]:
    """Integer sizes summing to ``total``; leftover units go to the largest
    fractional parts, earlier entries winning ties."""
    exact = [Fraction(str(r)) * total for r in ratios]
    sizes = [math.floor(x) for x in exact]
    rest = total - sum(sizes)
    order = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - sizes[i]), i))
    for i in order[:rest]:
        sizes[i] += 1
    return sizes


def _check_ratios(ratios) -> tuple[float, float, float]:
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"split ratios must be three positive fractions summing to 1, got {ratios}")
    return ratios


def split_edges(edges, ratios=(0.85, 0.05, 0.10), seed: int = 0) -> DatasetSplit:
    """Seeded uniform partition of the edges into train/valid/test positives."""
    ratios = _check_ratios(ratios)
    edges = _canonical(edges)
    if len(edges) < 3:
        raise InputError(f"need at least 3 edges to split, got {len(edges)}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    perm = edges[rng.permutation(len(edges))]
    a, b, _ = largest_remainder(len(edges), ratios)
    return DatasetSplit(perm[:a], perm[a:a + b], perm[a + b:], seed=seed, ratios=ratios)


def sample_negatives(num_nodes: int, forbidden, count: int, seed: int = 0) -> np.ndarray:
    """Uniformly sample ``count`` distinct unordered non-pairs ``(u < v)``."""
    forb = {tuple(e) for e in _canonical(forbidden).tolist() if e[0] != e[1]}
    total = num_nodes * (num_nodes - 1) // 2
    available = total - len(forb)
    if count < 0:
        raise InputError(f"count must be non-negative, got {count}")
    if count > available:
        raise InputError(
            f"cannot draw {count} negative pairs; at most {available} non-edges are available")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    if count == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if 2 * count > available:
        iu, iv = np.triu_indices(num_nodes, k=1)
        cand = np.stack([iu, iv], axis=1)
        if forb:
            f = np.array(sorted(forb), dtype=np.int64)
            keep = ~np.isin(iu * num_nodes + iv, f[:, 0] * num_nodes + f[:, 1])
            cand = cand[keep]
        return cand[rng.permutation(len(cand))[:count]].astype(np.int64)
    chosen: dict[tuple[int, int], None] = {}
    while len(chosen) < count:
        batch = rng.integers(0, num_nodes, size=(2 * (count - len(chosen)) + 16, 2))
        for a, b in batch.tolist():
            if a == b:
                continue
            key = (a, b) if a < b else (b, a)
            if key in forb or key in chosen:
                continue
            chosen[key] = None
            if len(chosen) == count:
                break
    return np.array(list(chosen), dtype=np.int64)


def add_negatives(split: DatasetSplit, num_nodes: int, exclude: str = "all",
                  seed: Optional[int] = None) -> DatasetSplit:
    """Fill count-matched negatives for each split.

    ``exclude="all"`` forbids every positive of every split (and keeps the
    three negative sets disjoint); ``"split"`` only forbids the split's own
    positives.
    """
    seed = split.seed if seed is None else seed
    counts = [len(split.pos(n)) for n in SPLITS]
    if exclude == "all":
        neg = sample_negatives(num_nodes, split.all_positives(), sum(counts), seed)
        a, b = counts[0], counts[0] + counts[1]
        split.train_neg, split.valid_neg, split.test_neg = neg[:a], neg[a:b], neg[b:]
    elif exclude == "split":
        for i, name in enumerate(SPLITS):
            setattr(split, f"{name}_neg",
                    sample_negatives(num_nodes, split.pos(name), counts[i], seed * 3 + i))
    else:
        raise ConfigError(f"negative exclusion must be 'all' or 'split', got {exclude!r}")
    return split


def make_split(graph: Graph, ratios=(0.85, 0.05, 0.10), seed: int = 0,
               exclude: str = "all") -> DatasetSplit:
    split = split_edges(graph.edges(), ratios, seed)
    return add_negatives(split, graph.num_nodes, exclude)


def temporal_split(tg: TemporalGraph, train_end: int = 2017, valid_year: int = 2018,
                   test_year: int = 2019, seed: int = 0) -> tuple[DatasetSplit, TemporalGraph]:
    """Year-based split: records up to ``train_end`` train, the pairs of
    ``valid_year`` validate and those of ``test_year`` test."""
    if not train_end < valid_year <= test_year:
        raise ConfigError("temporal split years must satisfy train_end < valid_year <= test_year")
    train_tg = tg.restrict(train_end)
    train_pos = np.unique(np.stack([train_tg.u, train_tg.v], axis=1), axis=0)
    split = DatasetSplit(train_pos, tg.pairs_in_year(valid_year), tg.pairs_in_year(test_year),
                         seed=seed, ratios=(0.0, 0.0, 0.0))
    everything = np.unique(np.stack([tg.u, tg.v], axis=1), axis=0)
    counts = [len(split.pos(n)) for n in SPLITS]
    neg = sample_negatives(tg.num_nodes, everything, sum(counts), seed)
    a, b = counts[0], counts[0] + counts[1]
    split.train_neg, split.valid_neg, split.test_neg = neg[:a], neg[a:b], neg[b:]
    return split, train_tg


@dataclass(frozen=True)
class FeatureProfile:
    """Full pair-feature layout: which structural indices plus which domain
    (or collaboration) indices.

    ``kind`` is one of ``binary``, ``ppa``, ``real`` or ``collab``.
    """

    kind: str = "binary"
    common_zeros: bool = False
    common_embedding: bool = False
    embedding_ones_only: bool = False
    windows: CollabWindows = COLLAB
    mask_direct_edge: bool = False

    KINDS = ("binary", "ppa", "real", "collab")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigError(f"unknown profile {self.kind!r}; expected one of {self.KINDS}")

    @property
    def structural_names(self) -> tuple[str, ...]:
        return {"ppa": REDUCED_NAMES, "collab": ()}.get(self.kind, STRUCTURAL_NAMES)

    @property
    def domain(self) -> Optional[DomainProfile]:
        if self.kind == "collab":
            return None
        return DomainProfile(self.kind, self.common_zeros, self.common_embedding,
                             self.embedding_ones_only)

    def domain_names(self, attrs: NodeAttributes) -> tuple[str, ...]:
        if self.kind == "collab":
            if attrs is None or attrs.real_block is None:
                raise ConfigError("profile 'collab' requires the real_block attribute block")
            return self.windows.names()
        if attrs is None:
            raise ConfigError(f"profile {self.kind!r} requires node attributes")
        return self.domain.names(attrs)

    def names(self, attrs: NodeAttributes) -> tuple[str, ...]:
        return self.structural_names + self.domain_names(attrs)


@dataclass(frozen=True)
class PairFeatureRow:
    u: int
    v: int
    label: int
    values: dict


@dataclass
class FeatureTable:
    pairs: np.ndarray
    labels: np.ndarray
    values: np.ndarray
    names: tuple[str, ...]

    def __len__(self):
        return len(self.pairs)

    def rows(self) -> Iterator[PairFeatureRow]:
        for (u, v), y, vals in zip(self.pairs.tolist(), self.labels.tolist(), self.values.tolist()):
            yield PairFeatureRow(u, v, y, dict(zip(self.names, vals)))

    def columns(self, names: Sequence[str]) -> np.ndarray:
        idx = [self.names.index(n) for n in names]
        return self.values[:, idx]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(("u", "v", "label") + tuple(self.names)) + "\n")
            for (u, v), y, vals in zip(self.pairs.tolist(), self.labels.tolist(), self.values.tolist()):
                fh.write(f"{u},{v},{y}," + ",".join(repr(x) for x in vals) + "\n")

    @classmethod
    def from_csv(cls, path) -> "FeatureTable":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header[:3] != ["u", "v", "label"]:
                raise InputError(f"{path}: header must start with u,v,label")
            rows = [r for r in reader if r]
        arr = np.array(rows, dtype=np.float64).reshape(len(rows), len(header))
        return cls(arr[:, :2].astype(np.int64), arr[:, 2].astype(np.int64), arr[:, 3:],
                   tuple(header[3:]))


def _edge_keys(pairs: np.ndarray, n: int) -> np.ndarray:
    p = _canonical(pairs)
    return p[:, 0] * n + p[:, 1]


def assemble(graph_observed: Optional[Graph], attrs: Optional[NodeAttributes], split: DatasetSplit,
             profile: FeatureProfile = FeatureProfile(), workers: int = 1,
             temporal: Optional[TemporalGraph] = None,
             test_graph: Optional[Graph] = None) -> dict[str, FeatureTable]:
    """Labelled feature tables for train, valid and test.

    Structural indices use ``graph_observed`` (built from the training
    positives only); ``test_graph`` optionally replaces it for the test split
    but must still not contain any test positive. The collaboration profile
    uses ``temporal`` (training records) instead of a static graph.
    """
    names = profile.names(attrs)
    if profile.kind == "collab":
        if temporal is None:
            raise ConfigError("profile 'collab' requires a temporal graph")
    else:
        if graph_observed is None:
            raise ConfigError("an observed graph is required")
        if attrs is not None and attrs.num_nodes != graph_observed.num_nodes:
            raise ConfigError(
                f"attributes cover {attrs.num_nodes} nodes but the graph has {graph_observed.num_nodes}")
        _check_hidden(graph_observed, split.valid_pos, "validation")
        _check_hidden(graph_observed, split.test_pos, "test")
        if test_graph is not None:
            _check_hidden(test_graph, split.test_pos, "test")
    out = {}
    for name in SPLITS:
        pos, neg = split.pos(name), split.neg(name)
        pairs = np.vstack([pos, neg]).astype(np.int64).reshape(-1, 2)
        labels = np.concatenate([np.ones(len(pos), np.int64), np.zeros(len(neg), np.int64)])
        if profile.kind == "collab":
            values = collab_matrix(temporal, attrs.real_block, pairs, profile.windows, workers)
        else:
            g = test_graph if (name == "test" and test_graph is not None) else graph_observed
            blocks = [structural_matrix(g, pairs, profile.structural_names, workers,
                                        profile.mask_direct_edge),
                      domain_matrix(attrs, pairs, profile.domain, workers)]
            values = np.hstack(blocks)
        out[name] = FeatureTable(pairs, labels, values, names)
    return out


def _check_hidden(g: Graph, pos: np.ndarray, label: str) -> None:
    if not len(pos):
        return
    present = np.isin(_edge_keys(pos, g.num_nodes), _edge_keys(g.edges(), g.num_nodes))
    if present.any():
        u, v = _canonical(pos)[np.flatnonzero(present)[0]]
        raise ConfigError(f"{label} positive ({u}, {v}) is an edge of the featurization graph")


@dataclass
class Dataset:
    graph: Graph
    attrs: Optional[NodeAttributes]
    remap: dict[int, int]
    temporal: Optional[TemporalGraph] = None
    name: str = "dataset"


def load_dataset(edges, binary=None, classes=None, real=None, temporal: bool = False,
                 num_classes: Optional[int] = None, name: str = "dataset") -> Dataset:
    """Read an edge list plus optional attribute files, remapping external
    ids to dense internal ids (ascending external order)."""
    edges = Path(edges)
    raw = read_edge_list(edges, columns=4 if temporal else 2)
    ids = [x for r in raw for x in r[:2]]
    for p in (binary, classes, real):
        if p is not None:
            ids += read_csv_ids(p)
    remap = build_remap(ids)
    n = len(remap)
    tg = None
    if temporal:
        tg = read_temporal_edges(edges, remap, n)
        g = build_graph(n, np.stack([tg.u, tg.v], axis=1))
    else:
        g = build_graph(n, [(remap[a], remap[b]) for a, b in raw])
    blocks = {}
    if binary is not None:
        blocks["binary_block"] = read_block_csv(binary, remap, n)
    if classes is not None:
        blocks["class_block"] = read_classes_csv(classes, remap, n)
    if real is not None:
        blocks["real_block"] = read_block_csv(real, remap, n)
    attrs = NodeAttributes(**blocks, num_classes=num_classes) if blocks else None
    return Dataset(g, attrs, remap, tg, name)
