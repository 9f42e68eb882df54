"""L2-regularised logistic regression, used as a reference classifier."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit

from .errors import InputError, TrainingError
from .gbdt import _as_matrix


@dataclass
class LogisticModel:
    coef: np.ndarray
    intercept: float
    feature_names: tuple[str, ...]
    iterations: int = 0

    def decision_function(self, X) -> np.ndarray:
        X = _as_matrix(X)
        if X.shape[1] != len(self.coef):
            raise InputError(f"model expects {len(self.coef)} features, got {X.shape[1]}")
        return X @ self.coef + self.intercept

    def predict(self, X) -> np.ndarray:
        return expit(self.decision_function(X))

    def to_dict(self) -> dict:
        return {"format": "pairprox-logistic/1", "coef": self.coef.tolist(),
                "intercept": float(self.intercept), "feature_names": list(self.feature_names)}

    @classmethod
    def from_dict(cls, d: dict) -> "LogisticModel":
        return cls(np.asarray(d["coef"], dtype=np.float64), d["intercept"], tuple(d["feature_names"]))


def logistic_objective(params: np.ndarray, X: np.ndarray, y: np.ndarray,
                       l2: float) -> tuple[float, np.ndarray]:
    """Summed log-loss plus ``l2/2 * ||w||^2`` (intercept unpenalised) and its
    gradient. ``params`` is ``[w..., b]``."""
    w, b = params[:-1], params[-1]
    z = X @ w + b
    value = float(np.sum(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * w @ w)
    r = expit(z) - y
    grad = np.append(X.T @ r + l2 * w, r.sum())
    return value, grad


def train_logistic(X, y, l2: float = 1.0, seed: int = 0, tol: float = 1e-6,
                   max_iter: int = 200, feature_names: Optional[Sequence[str]] = None) -> LogisticModel:
    """Newton iterations until the gradient norm drops below ``tol``.

    The fit has no random component; ``seed`` is accepted for interface
    symmetry with the tree trainer.
    """
    del seed
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.float64).ravel()
    if len(X) != len(y):
        raise InputError(f"X has {len(X)} rows but y has {len(y)}")
    if y.size == 0 or y.min() == y.max():
        raise TrainingError("training labels contain a single class")
    n, d = X.shape
    # scale columns for conditioning; the penalty is applied in original units
    scale = np.abs(X).max(axis=0) if n else np.ones(d)
    scale[scale == 0] = 1.0
    Xs = X / scale
    pen = l2 / scale ** 2
    ybar = y.mean()
    params = np.zeros(d + 1)
    params[-1] = np.log(ybar / (1 - ybar))
    it = 0
    for it in range(1, max_iter + 1):
        w, b = params[:-1], params[-1]
        z = Xs @ w + b
        p = expit(z)
        r = p - y
        grad = np.append(Xs.T @ r + pen * w, r.sum())
        # convergence judged on the gradient in original units
        if np.linalg.norm(np.append(grad[:-1] * scale, grad[-1])) < tol:
            break
        s = p * (1 - p)
        Xa = np.hstack([Xs, np.ones((n, 1))])
        Hm = Xa.T @ (Xa * s[:, None])
        Hm[np.arange(d), np.arange(d)] += pen
        Hm[-1, -1] += 1e-12
        step = np.linalg.solve(Hm, grad)
        # backtracking keeps Newton monotone on badly scaled problems
        f0 = _obj(params, Xs, y, pen)
        t = 1.0
        while t > 1e-10 and _obj(params - t * step, Xs, y, pen) > f0 - 1e-4 * t * grad @ step:
            t *= 0.5
        params = params - t * step
    else:
        raise TrainingError(f"logistic fit did not converge in {max_iter} iterations")
    names = tuple(feature_names) if feature_names is not None else tuple(f"f{i}" for i in range(d))
    return LogisticModel(params[:-1] / scale, float(params[-1]), names, it)


def _obj(params, Xs, y, pen):
    w, b = params[:-1], params[-1]
    z = Xs @ w + b
    return float(np.sum(np.logaddexp(0.0, z) - y * z) + 0.5 * np.sum(pen * w * w))
