"""Attribute-based indices and the windowed collaboration vector.

Run: python demos/02_domain_and_temporal.py
"""

# %%
import numpy as np

from pairprox.domain import NodeAttributes, domain_matrix, feature_count
from pairprox.temporal import COLLAB, TemporalGraph, collab_matrix

# three nodes with binary attributes and labels out of four classes
attrs = NodeAttributes(binary_block=np.array([[1, 0, 1, 1], [1, 1, 0, 1], [0, 0, 0, 1]]),
                       class_block=np.array([0, 0, 3]), num_classes=4)
D = domain_matrix(attrs, [(0, 1), (0, 2)])
print("domain rows per pair:", D.shape[1], "(static feature count", feature_count(4), "with structure)")
print(D)

# %% collaboration records (u, v, year, weight); windows are inclusive year ranges
records = [(0, 1, 1984, 1), (0, 1, 2010, 2), (1, 2, 2015, 1), (0, 2, 2016, 3), (2, 3, 2008, 1)]
tg = TemporalGraph.from_records(4, records)
emb = np.array([[1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
row = collab_matrix(tg, emb, [(0, 1)])[0]
for name, value in zip(COLLAB.names(), row):
    print(f"{name:>18} {value:g}")
