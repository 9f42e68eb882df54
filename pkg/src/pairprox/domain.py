"""Attribute-space proximity indices and the schema-driven domain vector."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, InputError
from .parallel import map_chunks


@dataclass(frozen=True)
class NodeAttributes:
    """Per-node attribute blocks; any subset may be present, but not none.

    ``binary_block`` is ``(n, d_b)`` with 0/1 entries, ``class_block`` a
    length-``n`` label vector in ``0..num_classes-1`` and ``real_block`` an
    ``(n, d_r)`` finite real matrix.
    """

    binary_block: Optional[np.ndarray] = None
    class_block: Optional[np.ndarray] = None
    real_block: Optional[np.ndarray] = None
    num_classes: Optional[int] = None

    def __post_init__(self):
        blocks = {"binary_block": self.binary_block, "class_block": self.class_block,
                  "real_block": self.real_block}
        present = {k: v for k, v in blocks.items() if v is not None}
        if not present:
            raise ConfigError("NodeAttributes needs at least one attribute block")
        rows = {k: len(v) for k, v in present.items()}
        if len(set(rows.values())) > 1:
            raise ConfigError(f"attribute blocks disagree on node count: {rows}")
        if self.binary_block is not None:
            b = np.asarray(self.binary_block)
            if b.ndim != 2 or not np.isin(b, (0, 1)).all():
                raise InputError("binary_block must be a 2-D matrix of 0/1 entries")
            object.__setattr__(self, "binary_block", b.astype(np.int8))
        if self.class_block is not None:
            c = np.asarray(self.class_block)
            if c.ndim != 1 or (c.size and (c.min() < 0 or not np.all(c == np.round(c)))):
                raise InputError("class_block must be a vector of non-negative integer labels")
            c = c.astype(np.int64)
            m = self.num_classes if self.num_classes is not None else int(c.max(initial=-1)) + 1
            if c.size and c.max() >= m:
                raise InputError(f"class label {c.max()} >= num_classes {m}")
            object.__setattr__(self, "class_block", c)
            object.__setattr__(self, "num_classes", int(m))
        if self.real_block is not None:
            r = np.asarray(self.real_block, dtype=np.float64)
            if r.ndim != 2 or not np.isfinite(r).all():
                raise InputError("real_block must be a 2-D matrix of finite values")
            object.__setattr__(self, "real_block", r)

    @property
    def num_nodes(self) -> int:
        for b in (self.binary_block, self.class_block, self.real_block):
            if b is not None:
                return len(b)
        return 0


def _same_length(x, y):
    x, y = np.asarray(x), np.asarray(y)
    if x.shape != y.shape or x.ndim != 1:
        raise InputError(f"attribute vectors must be 1-D with equal length, got {x.shape} and {y.shape}")
    return x, y


def common_digits(x_u, x_v) -> int:
    x_u, x_v = _same_length(x_u, x_v)
    return int(np.count_nonzero((x_u == 1) & (x_v == 1)))


def norm_common_digits(x_u, x_v) -> float:
    """Shared ones over positions where either vector has a one."""
    x_u, x_v = _same_length(x_u, x_v)
    either = np.count_nonzero((x_u == 1) | (x_v == 1))
    return common_digits(x_u, x_v) / either if either else 0.0


def common_zeros(x_u, x_v) -> int:
    x_u, x_v = _same_length(x_u, x_v)
    return int(np.count_nonzero((x_u == 0) & (x_v == 0)))


def class_identifier(s: int, t: int, m: int) -> np.ndarray:
    if not (0 <= s < m and 0 <= t < m):
        raise InputError(f"class labels ({s}, {t}) must lie in [0, {m})")
    out = np.zeros(m, dtype=np.float64)
    out[s] = out[t] = 1.0
    return out


def common_class(s: int, t: int) -> int:
    return int(s == t)


def l1_distance(x_u, x_v) -> float:
    x_u, x_v = _same_length(x_u, x_v)
    return float(np.abs(x_u.astype(np.float64) - x_v).sum())


def cosine_distance(x_u, x_v) -> float:
    """Cosine of the angle between the vectors; 0 when either has zero norm.

    Named "distance" for consistency with the feature name, but larger means
    more similar.
    """
    x_u, x_v = _same_length(x_u, x_v)
    x_u = x_u.astype(np.float64)
    nu, nv = np.linalg.norm(x_u), np.linalg.norm(x_v)
    if nu == 0 or nv == 0:
        return 0.0
    return float(np.dot(x_u, x_v) / (nu * nv))


def common_embedding(x_u, x_v, ones_only: bool = False) -> int:
    """Coordinates with exactly equal values (or, with ``ones_only``, shared ones)."""
    x_u, x_v = _same_length(x_u, x_v)
    eq = x_u == x_v
    if ones_only:
        eq &= x_u == 1
    return int(np.count_nonzero(eq))


@dataclass(frozen=True)
class DomainProfile:
    """Selects which domain indices make up a dataset's feature layout.

    kind:
        ``"binary"`` -- common digits, normalised common digits, common class
        and an ``m``-wide class identifier (needs binary and class blocks);
        ``"ppa"`` -- sorted vanilla class pair plus common class (class block);
        ``"real"`` -- L1 and cosine on the real block.
    """

    kind: str = "binary"
    common_zeros: bool = False
    common_embedding: bool = False
    embedding_ones_only: bool = False

    KINDS = ("binary", "ppa", "real")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigError(f"unknown domain profile {self.kind!r}; expected one of {self.KINDS}")

    def required_blocks(self) -> tuple[str, ...]:
        return {"binary": ("binary_block", "class_block"),
                "ppa": ("class_block",),
                "real": ("real_block",)}[self.kind]

    def check(self, attrs: NodeAttributes) -> None:
        for block in self.required_blocks():
            if getattr(attrs, block) is None:
                raise ConfigError(f"profile {self.kind!r} requires the {block} attribute block")

    def names(self, attrs: NodeAttributes) -> tuple[str, ...]:
        self.check(attrs)
        if self.kind == "binary":
            names = ["common_digits", "norm_common_digits"]
            if self.common_zeros:
                names.append("common_zeros")
            names.append("common_class")
            names += [f"class_id_{i}" for i in range(attrs.num_classes)]
        elif self.kind == "ppa":
            names = ["vclass_lo", "vclass_hi", "common_class"]
        else:
            names = ["l1_distance", "cosine_distance"]
            if self.common_embedding:
                names.append("common_embedding")
        return tuple(names)


def domain_vector(attrs: NodeAttributes, u: int, v: int,
                  profile: DomainProfile = DomainProfile()) -> dict[str, float]:
    """Named domain indices for one pair, laid out by ``profile``."""
    names = profile.names(attrs)
    n = attrs.num_nodes
    if not (0 <= u < n and 0 <= v < n):
        raise InputError(f"pair ({u}, {v}) outside [0, {n})")
    out = {}
    if profile.kind == "binary":
        xu, xv = attrs.binary_block[u], attrs.binary_block[v]
        s, t = int(attrs.class_block[u]), int(attrs.class_block[v])
        out["common_digits"] = common_digits(xu, xv)
        out["norm_common_digits"] = norm_common_digits(xu, xv)
        if profile.common_zeros:
            out["common_zeros"] = common_zeros(xu, xv)
        out["common_class"] = common_class(s, t)
        for i, bit in enumerate(class_identifier(s, t, attrs.num_classes)):
            out[f"class_id_{i}"] = bit
    elif profile.kind == "ppa":
        s, t = sorted((int(attrs.class_block[u]), int(attrs.class_block[v])))
        out.update(vclass_lo=s, vclass_hi=t, common_class=common_class(s, t))
    else:
        xu, xv = attrs.real_block[u], attrs.real_block[v]
        out["l1_distance"] = l1_distance(xu, xv)
        out["cosine_distance"] = cosine_distance(xu, xv)
        if profile.common_embedding:
            out["common_embedding"] = common_embedding(xu, xv, profile.embedding_ones_only)
    return {k: float(out[k]) for k in names}


def _domain_block(attrs: NodeAttributes, pairs: np.ndarray, profile: DomainProfile) -> np.ndarray:
    us, vs = pairs[:, 0], pairs[:, 1]
    cols = []
    if profile.kind == "binary":
        B = attrs.binary_block.astype(bool)
        bu, bv = B[us], B[vs]
        both = np.count_nonzero(bu & bv, axis=1).astype(np.float64)
        either = np.count_nonzero(bu | bv, axis=1).astype(np.float64)
        cols += [both, np.divide(both, either, out=np.zeros_like(both), where=either > 0)]
        if profile.common_zeros:
            cols.append(np.count_nonzero(~bu & ~bv, axis=1).astype(np.float64))
        cu, cv = attrs.class_block[us], attrs.class_block[vs]
        cols.append((cu == cv).astype(np.float64))
        ci = np.zeros((len(pairs), attrs.num_classes))
        rows = np.arange(len(pairs))
        ci[rows, cu] = 1.0
        ci[rows, cv] = 1.0
        cols += list(ci.T)
    elif profile.kind == "ppa":
        cu, cv = attrs.class_block[us], attrs.class_block[vs]
        cols += [np.minimum(cu, cv), np.maximum(cu, cv), (cu == cv)]
    else:
        R = attrs.real_block
        ru, rv = R[us], R[vs]
        cols.append(np.abs(ru - rv).sum(axis=1))
        nu, nv = np.linalg.norm(ru, axis=1), np.linalg.norm(rv, axis=1)
        den = nu * nv
        dot = np.einsum("ij,ij->i", ru, rv)
        cols.append(np.divide(dot, den, out=np.zeros_like(dot), where=den > 0))
        if profile.common_embedding:
            eq = ru == rv
            if profile.embedding_ones_only:
                eq &= ru == 1
            cols.append(np.count_nonzero(eq, axis=1))
    if not len(pairs):
        return np.zeros((0, len(profile.names(attrs))))
    return np.column_stack([np.asarray(c, dtype=np.float64) for c in cols])


def domain_matrix(attrs: NodeAttributes, pairs, profile: DomainProfile = DomainProfile(),
                  workers: int = 1) -> np.ndarray:
    """Batch version of :func:`domain_vector`, rows in input order."""
    names = profile.names(attrs)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if pairs.size and ((pairs < 0).any() or (pairs >= attrs.num_nodes).any()):
        raise InputError("pair contains a node id outside the attribute blocks")
    return map_chunks(_domain_block, attrs, pairs, profile, workers=workers, width=len(names))


def feature_count(num_classes: int) -> int:
    """Total pair-feature length for the default binary profile."""
    return 13 + num_classes


def read_block_csv(path, remap: dict[int, int], num_nodes: int, dtype=np.float64) -> np.ndarray:
    """Read a headered ``node_id,f0..f{d-1}`` CSV into an ``(n, d)`` matrix."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "node_id":
            raise InputError(f"{path}: first column header must be 'node_id'")
        d = len(header) - 1
        out = np.zeros((num_nodes, d), dtype=dtype)
        seen = np.zeros(num_nodes, dtype=bool)
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != d + 1:
                raise InputError(f"{path}:{lineno}: expected {d + 1} fields, got {len(row)}")
            try:
                ext = int(row[0])
                vals = [float(x) for x in row[1:]]
            except ValueError:
                raise InputError(f"{path}:{lineno}: non-numeric field") from None
            if ext not in remap:
                raise InputError(f"{path}:{lineno}: unknown node id {ext}")
            out[remap[ext]] = vals
            seen[remap[ext]] = True
    if not seen.all():
        missing = int(np.flatnonzero(~seen)[0])
        raise InputError(f"{path}: no attribute row for internal node {missing}")
    return out


def read_classes_csv(path, remap: dict[int, int], num_nodes: int) -> np.ndarray:
    labels = np.full(num_nodes, -1, dtype=np.int64)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or [h.strip() for h in header[:2]] != ["node_id", "class"]:
            raise InputError(f"{path}: header must be 'node_id,class'")
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            try:
                ext, label = int(row[0]), int(row[1])
            except (ValueError, IndexError):
                raise InputError(f"{path}:{lineno}: expected integer node_id,class") from None
            if ext not in remap:
                raise InputError(f"{path}:{lineno}: unknown node id {ext}")
            labels[remap[ext]] = label
    if (labels < 0).any():
        raise InputError(f"{path}: missing or negative class for internal node {int(np.argmin(labels))}")
    return labels


def read_csv_ids(path) -> list[int]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        return [int(row[0]) for row in reader if row]


def write_block_csv(path, block: np.ndarray, external_ids: Sequence[int]) -> None:
    block = np.asarray(block)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id"] + [f"f{i}" for i in range(block.shape[1])])
        for ext, row in zip(external_ids, block):
            w.writerow([ext] + [repr(x.item()) if isinstance(x, np.floating) else int(x) for x in row])


def write_classes_csv(path, labels, external_ids: Sequence[int]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id", "class"])
        for ext, c in zip(external_ids, labels):
            w.writerow([ext, int(c)])


__all__ = [
    "NodeAttributes", "DomainProfile", "common_digits", "norm_common_digits", "common_zeros",
    "class_identifier", "common_class", "l1_distance", "cosine_distance", "common_embedding",
    "domain_vector", "domain_matrix", "feature_count",
]
