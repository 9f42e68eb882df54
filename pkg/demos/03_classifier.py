"""Boosted trees and the logistic baseline on a toy problem.

Run: python demos/03_classifier.py
"""

# %%
import numpy as np

from pairprox.gbdt import Hyperparams, feature_importance, train
from pairprox.logistic import train_logistic
from pairprox.metrics import auc, hits_at_k

rng = np.random.default_rng(0)
X = rng.normal(size=(2000, 5))
y = ((X[:, 0] * X[:, 1] > 0) ^ (rng.random(2000) < 0.1)).astype(int)   # xor-like, 10% noise
X_tr, y_tr, X_te, y_te = X[:1500], y[:1500], X[1500:], y[1500:]

# %% trees capture the interaction, a linear model cannot
model = train(X_tr, y_tr, Hyperparams(n_estimators=200, max_depth=3, learning_rate=0.1),
              feature_names=[f"x{i}" for i in range(5)])
lin = train_logistic(X_tr, y_tr)
s_tree, s_lin = model.decision_function(X_te), lin.decision_function(X_te)
print(f"AUC trees {auc(s_tree, y_te):.3f}  logistic {auc(s_lin, y_te):.3f}")
print(f"Hits@20 trees {hits_at_k(s_tree[y_te == 1], s_tree[y_te == 0], 20):.3f}")

# %% gain importances are normalised to sum to one
for name, w in sorted(feature_importance(model).items(), key=lambda kv: -kv[1]):
    print(f"{name} {w:.3f}")
