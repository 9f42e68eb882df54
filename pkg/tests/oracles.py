"""Brute-force reference implementations used only by the tests.

They share no code with the library: dense matrix powers, Python set
enumeration, scipy shortest paths on an explicitly masked matrix, and
quadratic pair counting for ranking metrics.
"""

import math
from itertools import combinations

import numpy as np
from scipy.sparse.csgraph import shortest_path


def dense_adjacency(n, edges):
    A = np.zeros((n, n), dtype=np.int64)
    for u, v in edges:
        if u != v:
            A[u, v] = A[v, u] = 1
    return A


def nbrs(A, u):
    return set(np.flatnonzero(A[u]).tolist())


def walks(A, u, v, k):
    return int(np.linalg.matrix_power(A, k)[u, v])


def masked_distance(A, u, v):
    M = A.astype(float).copy()
    M[u, v] = M[v, u] = 0
    d = shortest_path(M, unweighted=True, directed=False, indices=u)[v]
    return len(A) if math.isinf(d) else int(d)


def ratio(num, den):
    return 0.0 if den == 0 else num / den


def structural(A, u, v):
    Nu, Nv = nbrs(A, u), nbrs(A, v)
    common, union = Nu & Nv, Nu | Nv
    ku, kv = len(Nu), len(Nv)
    l3 = walks(A, u, v, 3)
    aa = sum(1.0 / math.log(len(nbrs(A, z))) for z in common if len(nbrs(A, z)) > 1)
    return [masked_distance(A, u, v), len(common), l3, aa,
            ratio(len(common), len(union)), ratio(len(common), math.sqrt(ku * kv)),
            ratio(2 * len(common), ku + kv), ratio(l3, len(union)),
            ratio(l3, math.sqrt(ku * kv)), ratio(2 * l3, ku + kv)]


def structural_without_edge(A, u, v):
    B = A.copy()
    B[u, v] = B[v, u] = 0
    return structural(B, u, v)


def auc_pairs(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return total / (len(pos) * len(neg))


def hits_rank(pos, neg, k):
    """A positive is a hit when fewer than k negatives score at least as high."""
    return sum(1 for p in pos if sum(1 for n in neg if n >= p) < k) / len(pos)


def transitivity(A):
    n = len(A)
    q = t = 0
    for u, v in combinations(range(n), 2):
        if nbrs(A, u) & nbrs(A, v):
            q += 1
            t += int(A[u, v])
    return t / q


def temporal_oracle(records, n, u, v, lo, hi):
    """Windowed quantities by filtering the raw records, then using static
    set logic on the filtered simple graph."""
    W = {}
    for a, b, y, w in records:
        if lo <= y <= hi:
            key = (min(a, b), max(a, b))
            W[key] = W.get(key, 0) + w
    def wt(a, b):
        return W.get((min(a, b), max(a, b)), 0)
    N = [set() for _ in range(n)]
    for a, b in W:
        N[a].add(b)
        N[b].add(a)
    return W, wt, N


def random_edges(rng, n, p):
    return [(i, j) for i, j in combinations(range(n), 2) if rng.random() < p]


def naive_tree(X, g, h, rows, depth, lam, mcw, lr):
    """Depth-first exact greedy regression tree; returns a predict function
    and the list of (feature, threshold) splits in pre-order."""
    splits = []

    def build(idx, d):
        G, H = g[idx].sum(), h[idx].sum()
        best = (0.0, None, None)
        if d < depth:
            for f in range(X.shape[1]):
                vals = sorted(set(X[idx, f].tolist()))
                for lo, hi in zip(vals[:-1], vals[1:]):
                    thr = lo + (hi - lo) / 2.0
                    left = idx[X[idx, f] <= thr]
                    right = idx[X[idx, f] > thr]
                    GL, HL, GR, HR = g[left].sum(), h[left].sum(), g[right].sum(), h[right].sum()
                    if HL < mcw or HR < mcw:
                        continue
                    gain = 0.5 * (GL**2 / (HL + lam) + GR**2 / (HR + lam) - G**2 / (H + lam))
                    if gain > best[0] + 1e-12 * max(1.0, abs(best[0])):
                        best = (gain, f, thr)
        if best[1] is None:
            value = -lr * G / (H + lam)
            return lambda x: value
        _, f, thr = best
        splits.append((f, thr))
        lt = build(idx[X[idx, f] <= thr], d + 1)
        rt = build(idx[X[idx, f] > thr], d + 1)
        return lambda x: lt(x) if x[f] <= thr else rt(x)

    fn = build(np.asarray(rows), 0)
    return (lambda Xq: np.array([fn(x) for x in Xq])), splits


def structural_all_pairs(A):
    """Oracle index rows for every ordered pair u != v, reusing one cube."""
    n = len(A)
    A3 = np.linalg.matrix_power(A, 3)
    N = [nbrs(A, u) for u in range(n)]
    deg = [len(x) for x in N]
    out = {}
    for u in range(n):
        for v in range(n):
            if u == v:
                continue
            common, union = N[u] & N[v], N[u] | N[v]
            ku, kv, l3 = deg[u], deg[v], int(A3[u, v])
            aa = sum(1.0 / math.log(deg[z]) for z in common if deg[z] > 1)
            out[(u, v)] = [masked_distance(A, u, v), len(common), l3, aa,
                           ratio(len(common), len(union)), ratio(len(common), math.sqrt(ku * kv)),
                           ratio(2 * len(common), ku + kv), ratio(l3, len(union)),
                           ratio(l3, math.sqrt(ku * kv)), ratio(2 * l3, ku + kv)]
    return out


def collab_oracle(records, n, emb, u, v, windows):
    """Every collaboration index for one pair by filtering records per window
    and applying static set logic."""
    def view(lo, hi):
        return temporal_oracle(records, n, u, v, lo, hi)

    rows = []
    years = {}
    for a, b, y, _ in records:
        years.setdefault(a, []).append(y)
        years.setdefault(b, []).append(y)
    flags = {}
    for x in (u, v):
        ys = years.get(x)
        flags[x] = (1, 1) if not ys else (int(min(ys) >= windows.career_cutoff),
                                          int(max(ys) >= windows.career_cutoff))
    rows += [flags[u][0], flags[v][0], flags[u][1], flags[v][1]]
    views = [view(*w) for w in (windows.all_years, windows.recent, windows.short)]
    rows += [wt(u, v) for _, wt, _ in views]
    rows += [len(N[u] & N[v]) for _, _, N in views]
    _, wt, N = views[1]
    act = [sum(wt(x, y) for y in N[x]) for x in range(n)]
    common = N[u] & N[v]
    num = sum(wt(u, z) + wt(z, v) for z in common)
    den = sum(wt(u, x) + wt(x, v) for x in N[u] | N[v])
    rows += [act[u] * act[v],
             sum(1 / math.log(act[z]) for z in common if act[z] > 1),
             ratio(num, den), ratio(num, math.sqrt(act[u] * act[v]))]
    A = np.zeros((n, n), dtype=np.int64)
    for x in range(n):
        for y in N[x]:
            A[x, y] = 1
    rows.append(masked_distance(A, u, v))
    eu, ev = emb[u], emb[v]
    nu, nv = math.sqrt(sum(a * a for a in eu)), math.sqrt(sum(b * b for b in ev))
    rows += [sum(1 for a, b in zip(eu, ev) if a == b), sum(abs(a - b) for a, b in zip(eu, ev)),
             0.0 if nu == 0 or nv == 0 else sum(a * b for a, b in zip(eu, ev)) / (nu * nv)]
    pair_years = {y for a, b, y, _ in records if {a, b} == {u, v}}
    rows += [float(y in pair_years) for y in windows.label_years]
    return rows
