"""Second-order gradient-boosted regression trees with exact greedy splits.

Each round fits one depth-limited tree to the gradient and Hessian of the
loss, choosing splits that maximise

    gain = 1/2 * (G_L^2 / (H_L + lambda) + G_R^2 / (H_R + lambda) - G^2 / (H + lambda))

over every distinct threshold of every sampled feature, and sets leaf values
to ``-learning_rate * G / (H + lambda)``.  Rows with ``x <= threshold`` (and
missing values) go left.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit

from .errors import ConfigError, InputError, TrainingError

OBJECTIVES = ("logistic", "pairwise_rank")

# relative tolerance under which two split gains are treated as equal
_TIE = 1e-12


@dataclass(frozen=True)
class Hyperparams:
    max_depth: int = 5
    n_estimators: int = 1000
    learning_rate: float = 0.05
    reg_lambda: float = 10.0
    subsample: float = 1.0
    colsample_bytree: float = 1.0
    objective: str = "logistic"
    seed: int = 0
    min_child_weight: float = 1.0

    def __post_init__(self):
        if self.max_depth < 1:
            raise ConfigError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.n_estimators < 0:
            raise ConfigError(f"n_estimators must be >= 0, got {self.n_estimators}")
        if not 0 < self.learning_rate <= 1:
            raise ConfigError(f"learning_rate must lie in (0, 1], got {self.learning_rate}")
        if not (0 < self.subsample <= 1 and 0 < self.colsample_bytree <= 1):
            raise ConfigError("subsample and colsample_bytree must lie in (0, 1]")
        if self.reg_lambda < 0 or self.min_child_weight < 0:
            raise ConfigError("reg_lambda and min_child_weight must be non-negative")
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")

    def with_overrides(self, **kw) -> "Hyperparams":
        aliases = {"lambda": "reg_lambda", "colsample": "colsample_bytree", "depth": "max_depth",
                   "lr": "learning_rate", "n_trees": "n_estimators"}
        kw = {aliases.get(k, k): v for k, v in kw.items()}
        unknown = set(kw) - set(asdict(self))
        if unknown:
            raise ConfigError(f"unknown hyperparameters: {sorted(unknown)}")
        return replace(self, **kw)


PRESETS = {
    "auc": Hyperparams(max_depth=5, n_estimators=1000, learning_rate=0.05, reg_lambda=10.0),
    "hits20": Hyperparams(max_depth=5, n_estimators=1000, learning_rate=0.1, reg_lambda=1.0,
                          colsample_bytree=1.0),
    "hits50": Hyperparams(max_depth=11, n_estimators=1000, learning_rate=0.5, reg_lambda=1.0),
    "hits100": Hyperparams(max_depth=5, n_estimators=1000, learning_rate=0.3, reg_lambda=1.0,
                           subsample=0.5, colsample_bytree=1.0),
}
PRESETS["auc_preset"] = PRESETS["auc"]
PRESETS["hits20_preset"] = PRESETS["hits20"]
PRESETS["hits50_preset"] = PRESETS["hits50"]
PRESETS["hits100_preset"] = PRESETS["hits100"]


def preset(name: str, **overrides) -> Hyperparams:
    try:
        hp = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return hp.with_overrides(**overrides) if overrides else hp


@dataclass
class Tree:
    feature: np.ndarray     # -1 marks a leaf
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray       # leaf output, learning rate already applied
    gain: np.ndarray
    cover: np.ndarray       # sum of Hessians reaching the node

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        while True:
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                return node
            r, n = rows[inner], node[inner]
            x = X[r, f[inner]]
            go_right = x > self.threshold[n]
            node[inner] = np.where(go_right, self.right[n], self.left[n])

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def depth(self) -> int:
        def rec(i):
            return 0 if self.feature[i] < 0 else 1 + max(rec(self.left[i]), rec(self.right[i]))
        return rec(0)

    def to_dict(self) -> dict:
        nodes = []
        for i in range(len(self.feature)):
            if self.feature[i] < 0:
                nodes.append({"id": i, "leaf": float(self.value[i]), "cover": float(self.cover[i])})
            else:
                nodes.append({"id": i, "feature": int(self.feature[i]),
                              "threshold": float(self.threshold[i]),
                              "left": int(self.left[i]), "right": int(self.right[i]),
                              "gain": float(self.gain[i]), "cover": float(self.cover[i])})
        return {"nodes": nodes}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        k = len(d["nodes"])
        t = cls(np.full(k, -1, np.int64), np.full(k, np.nan), np.full(k, -1, np.int64),
                np.full(k, -1, np.int64), np.zeros(k), np.zeros(k), np.zeros(k))
        for nd in d["nodes"]:
            i = nd["id"]
            t.cover[i] = nd["cover"]
            if "leaf" in nd:
                t.value[i] = nd["leaf"]
            else:
                t.feature[i], t.threshold[i] = nd["feature"], nd["threshold"]
                t.left[i], t.right[i], t.gain[i] = nd["left"], nd["right"], nd["gain"]
        return t


@dataclass
class GBDTModel:
    trees: list[Tree]
    learning_rate: float
    base_score: float
    feature_names: tuple[str, ...]
    hyperparams: Hyperparams = field(default_factory=Hyperparams)

    @property
    def num_features(self) -> int:
        return len(self.feature_names)

    def decision_function(self, X) -> np.ndarray:
        X = _as_matrix(X, allow_nan=True)
        if X.shape[1] != self.num_features:
            raise InputError(f"model expects {self.num_features} features, got {X.shape[1]}")
        margin = np.full(len(X), self.base_score)
        for t in self.trees:
            margin += t.predict(X)
        return margin

    def predict(self, X) -> np.ndarray:
        return expit(self.decision_function(X))

    def to_dict(self) -> dict:
        return {"format": "pairprox-gbdt/1", "base_score": float(self.base_score),
                "learning_rate": float(self.learning_rate),
                "feature_names": list(self.feature_names),
                "hyperparams": asdict(self.hyperparams),
                "trees": [t.to_dict() for t in self.trees]}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "GBDTModel":
        return cls([Tree.from_dict(t) for t in d["trees"]], d["learning_rate"], d["base_score"],
                   tuple(d["feature_names"]), Hyperparams(**d["hyperparams"]))

    @classmethod
    def loads(cls, s: str) -> "GBDTModel":
        return cls.from_dict(json.loads(s))


def _as_matrix(X, allow_nan: bool = False) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise InputError(f"feature matrix must be 2-D, got shape {X.shape}")
    bad = ~np.isfinite(X) if not allow_nan else np.isinf(X)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise InputError(f"non-finite feature value at row {r}, column {c}")
    return X


def logistic_grad_hess(margin: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Derivatives of the log-loss with respect to the margin."""
    p = expit(margin)
    return p - y, p * (1.0 - p)


def logloss(margin: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, margin) - y * margin


def pairwise_grad_hess(margin, y, rng) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of ``log(1 + exp(-(s_pos - s_neg)))`` over sampled pairs:
    every positive is matched with one random negative and vice versa."""
    pos, neg = np.flatnonzero(y == 1), np.flatnonzero(y == 0)
    pi = np.concatenate([pos, rng.choice(pos, size=len(neg))])
    ni = np.concatenate([rng.choice(neg, size=len(pos)), neg])
    p = expit(margin[pi] - margin[ni])
    w = np.maximum(p * (1.0 - p), 1e-16)
    g = np.zeros(len(y))
    h = np.zeros(len(y))
    np.add.at(g, pi, p - 1.0)
    np.add.at(g, ni, 1.0 - p)
    np.add.at(h, pi, w)
    np.add.at(h, ni, w)
    return g, h


def _node_candidates(x_sorted, slot, gs, hs, Gt, Ht, lam, mcw):
    """Split candidates for one feature from rows grouped by node and sorted
    by value inside each node. Returns (slot, gain, lo, hi) per candidate;
    the left side holds values <= lo, the right side values >= hi."""
    cg, ch = np.cumsum(gs), np.cumsum(hs)
    sizes = np.bincount(slot, minlength=len(Gt))
    GL = cg - _segment_base(cg, sizes)
    HL = ch - _segment_base(ch, sizes)
    valid = np.zeros(len(slot), dtype=bool)
    valid[:-1] = (slot[1:] == slot[:-1]) & (x_sorted[1:] > x_sorted[:-1])
    HR = Ht[slot] - HL
    valid &= (HL >= mcw) & (HR >= mcw)
    c = np.flatnonzero(valid)
    sc = slot[c]
    gl, hl = GL[c], HL[c]
    gr, hr = Gt[sc] - gl, Ht[sc] - hl
    gain = 0.5 * (gl ** 2 / (hl + lam) + gr ** 2 / (hr + lam) - Gt[sc] ** 2 / (Ht[sc] + lam))
    return sc, gain, x_sorted[c], x_sorted[c + 1]


def _segment_base(cum: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """Cumulative total before each row's segment, for contiguous segments."""
    ends = np.cumsum(sizes)
    starts = ends - sizes
    base = np.where(starts > 0, cum[np.maximum(starts - 1, 0)], 0.0)
    return np.repeat(base, sizes)


def _best_splits(XT, presorted, ranks, uniques, g, h, row_slot, rows_active, k, Gt, Ht,
                 cols, lam, mcw):
    """Best split per active node over the features in ``cols``.

    Returns ``(gain, feature, threshold)`` arrays of length ``k``; feature is
    -1 where no split has positive gain. Features with few distinct values
    aggregate gradients per (node, value) with ``bincount``; the others group
    their presorted rows by node with a stable sort.
    """
    best_gain = np.zeros(k)
    best_feat = np.full(k, -1, dtype=np.int64)
    best_thr = np.zeros(k)
    m = len(rows_active)
    if m < 2:
        return best_gain, best_feat, best_thr
    slot_a = row_slot[rows_active]
    g_a, h_a = g[rows_active], h[rows_active]
    key_t = np.int16 if k < 2**15 else np.int64
    for f in cols:
        u = len(uniques[f])
        if k * u <= 4 * m:
            key = slot_a * u + ranks[f][rows_active]
            cnt = np.bincount(key, minlength=k * u)
            present = np.flatnonzero(cnt)
            gs = np.bincount(key, weights=g_a, minlength=k * u)[present]
            hs = np.bincount(key, weights=h_a, minlength=k * u)[present]
            slot = present // u
            xs = uniques[f][present % u]
        else:
            order = presorted[f]
            s = row_slot[order]
            order = order[s >= 0]
            s = s[s >= 0]
            grp = np.argsort(s.astype(key_t), kind="stable")
            idx = order[grp]
            slot = s[grp]
            gs, hs, xs = g[idx], h[idx], XT[f, idx]
        sc, gn, lo, hi = _node_candidates(xs, slot, gs, hs, Gt, Ht, lam, mcw)
        if not len(sc):
            continue
        # gains equal up to rounding count as ties: lowest threshold wins here
        top = np.full(k, -np.inf)
        np.maximum.at(top, sc, gn)
        elig = np.flatnonzero(gn >= top[sc] - _TIE * np.maximum(1.0, np.abs(top[sc])))
        first = np.ones(len(elig), dtype=bool)
        first[1:] = sc[elig][1:] != sc[elig][:-1]
        w = elig[first]
        ws, wg = sc[w], gn[w]
        # and an earlier feature keeps the node unless this one is clearly better
        better = wg > best_gain[ws] + _TIE * np.maximum(1.0, np.abs(best_gain[ws]))
        ws, w = ws[better], w[better]
        best_gain[ws] = gn[w]
        best_feat[ws] = f
        mid = lo[w] + (hi[w] - lo[w]) / 2.0
        best_thr[ws] = np.where((mid >= lo[w]) & (mid < hi[w]), mid, lo[w])
    return best_gain, best_feat, best_thr


def _grow_tree(X, XT, presorted, ranks, uniques, g, h, rows, cols, hp: Hyperparams) -> Tree:
    lam, mcw = hp.reg_lambda, hp.min_child_weight
    n = len(X)
    node_of = np.full(n, -1, dtype=np.int64)
    node_of[rows] = 0
    feature, threshold, left, right, gain = [-1], [np.nan], [-1], [-1], [0.0]
    G = [float(g[rows].sum())]
    H = [float(h[rows].sum())]
    active = [0]
    for _ in range(hp.max_depth):
        if not active or not len(cols):
            break
        k = len(active)
        slot = np.full(len(feature), -1, dtype=np.int64)
        slot[active] = np.arange(k)
        Gt = np.array([G[a] for a in active])
        Ht = np.array([H[a] for a in active])
        row_slot = np.where(node_of >= 0, slot[np.maximum(node_of, 0)], -1)
        rows_active = np.flatnonzero(row_slot >= 0)
        best_gain, best_feat, best_thr = _best_splits(XT, presorted, ranks, uniques, g, h, row_slot,
                                                      rows_active, k, Gt, Ht, cols, lam, mcw)
        next_active = []
        for j, a in enumerate(active):
            f = best_feat[j]
            if f < 0:
                continue
            members = np.flatnonzero(node_of == a)
            go_left = ~(X[members, f] > best_thr[j])
            li, ri = len(feature), len(feature) + 1
            for _ in range(2):
                feature.append(-1)
                threshold.append(np.nan)
                left.append(-1)
                right.append(-1)
                gain.append(0.0)
            feature[a], threshold[a], left[a], right[a], gain[a] = int(f), float(best_thr[j]), li, ri, float(best_gain[j])
            lm, rm = members[go_left], members[~go_left]
            node_of[lm] = li
            node_of[rm] = ri
            G += [float(g[lm].sum()), float(g[rm].sum())]
            H += [float(h[lm].sum()), float(h[rm].sum())]
            next_active += [li, ri]
        active = next_active
    Ga, Ha = np.array(G), np.array(H)
    value = np.where(np.array(feature) < 0, -hp.learning_rate * Ga / (Ha + lam), 0.0)
    value = np.nan_to_num(value, nan=0.0, posinf=0.0, neginf=0.0)
    return Tree(np.array(feature, dtype=np.int64), np.array(threshold), np.array(left, dtype=np.int64),
                np.array(right, dtype=np.int64), value, np.array(gain), Ha)


def train(X, y, hp: Hyperparams = Hyperparams(),
          feature_names: Optional[Sequence[str]] = None) -> GBDTModel:
    """Fit ``hp.n_estimators`` boosting rounds. Deterministic for fixed
    inputs and ``hp.seed``."""
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.float64).ravel()
    if len(X) != len(y) or len(y) < 2:
        raise InputError(f"need at least 2 rows with matching labels, got X={len(X)}, y={len(y)}")
    if not np.isin(y, (0.0, 1.0)).all():
        raise InputError("labels must be 0 or 1")
    n, d = X.shape
    names = tuple(feature_names) if feature_names is not None else tuple(f"f{i}" for i in range(d))
    if len(names) != d:
        raise InputError(f"{len(names)} feature names for {d} columns")
    ybar = y.mean()
    if ybar in (0.0, 1.0):
        raise TrainingError("training labels contain a single class")
    base = float(np.log(ybar / (1.0 - ybar))) if hp.objective == "logistic" else 0.0
    rng = np.random.default_rng(hp.seed)
    XT = np.ascontiguousarray(X.T)
    presorted = np.argsort(XT, axis=1, kind="stable")
    uniques, ranks = [], []
    for f in range(d):
        uq, inv = np.unique(XT[f], return_inverse=True)
        uniques.append(uq)
        ranks.append(inv.ravel())
    margin = np.full(n, base)
    trees = []
    n_rows = max(1, int(round(hp.subsample * n)))
    n_cols = max(1, int(round(hp.colsample_bytree * d))) if d else 0
    for _ in range(hp.n_estimators):
        if hp.objective == "logistic":
            g, h = logistic_grad_hess(margin, y)
        else:
            g, h = pairwise_grad_hess(margin, y, rng)
        rows = np.arange(n) if n_rows == n else np.sort(rng.choice(n, n_rows, replace=False))
        cols = np.arange(d) if n_cols == d else np.sort(rng.choice(d, n_cols, replace=False))
        tree = _grow_tree(X, XT, presorted, ranks, uniques, g, h, rows, cols, hp)
        margin += tree.predict(X)
        trees.append(tree)
    return GBDTModel(trees, hp.learning_rate, base, names, hp)


def predict(model: GBDTModel, X) -> np.ndarray:
    return model.predict(X)


def feature_importance(model: GBDTModel) -> dict[str, float]:
    """Total split gain per feature, normalised to sum to 1 (all zeros when
    the ensemble never splits)."""
    total = np.zeros(model.num_features)
    for t in model.trees:
        inner = t.feature >= 0
        np.add.at(total, t.feature[inner], t.gain[inner])
    s = total.sum()
    if s > 0:
        total = total / s
    return dict(zip(model.feature_names, total.tolist()))


def write_importance_csv(path, importance: dict[str, float]) -> None:
    rows = sorted(importance.items(), key=lambda kv: (-kv[1], kv[0]))
    with open(path, "w") as fh:
        fh.write("name,weight\n")
        for name, w in rows:
            fh.write(f"{name},{w!r}\n")
