"""Structural proximity indices on a five-node toy graph.

Run: python demos/01_structural_indices.py
"""

# %%
import numpy as np

from pairprox import build_graph
from pairprox.graph import distance_excluding_direct_edge, walk_count
from pairprox.structural import STRUCTURAL_NAMES, structural_matrix

# triangle 0-1-2 with a tail 2-3-4
g = build_graph(5, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4)])
print("nodes", g.num_nodes, "edges", g.num_edges)

# %% walks of length 2 and 3, and the distance with the pair's own edge masked
for u, v in [(0, 1), (0, 3), (1, 4)]:
    print((u, v), "L2", walk_count(g, u, v, 2), "L3", walk_count(g, u, v, 3),
          "D", distance_excluding_direct_edge(g, u, v))

# %% the full index row for every unordered pair; 0/0 ratios are reported as 0
pairs = [(u, v) for u in range(5) for v in range(u + 1, 5)]
X = structural_matrix(g, pairs)
np.set_printoptions(precision=3, suppress=True, linewidth=140)
print(" " * 8 + " ".join(f"{n[:9]:>9}" for n in STRUCTURAL_NAMES))
for (u, v), row in zip(pairs, X):
    print(f"({u}, {v}) ", " ".join(f"{x:9.3f}" for x in row))

# %% scoring a training pair as if its own edge were absent
X_masked = structural_matrix(g, [(0, 1)], mask_direct_edge=True)
print("(0, 1) kept  ", X[0])
print("(0, 1) masked", X_masked[0])
