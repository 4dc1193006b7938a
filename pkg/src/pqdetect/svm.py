"""Soft-margin RBF support vector machine.

Binary machines are trained on the dual problem with sequential minimal
optimisation (second-order working-set selection, full kernel cache). Multi-
class prediction is one-vs-one majority voting.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numba
import numpy as np

from .features import NormalizationStats

TOL = 1e-3
MAX_ITER = 100_000
_TAU = 1e-12


@dataclass(frozen=True)
class SVMHyperparams:
    c: float
    gamma: float

    def __post_init__(self):
        if not (self.c > 0 and self.gamma > 0):
            raise ValueError(f"C and gamma must be positive, got {self}")


def rbf_kernel(x, y, gamma: float) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    d = x - y
    return float(np.exp(-gamma * np.dot(d, d)))


def sq_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, clipped at zero."""
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    d = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.maximum(d, 0.0)


def kernel_matrix(A, B, gamma: float) -> np.ndarray:
    return np.exp(-gamma * sq_distances(A, B))


@numba.njit(cache=True)
def _smo(K, y, C, tol, max_iter):
    n = y.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)
    it = 0
    converged = False
    while it < max_iter:
        # i: maximal violator in I_up
        gmax = -np.inf
        i = -1
        for t in range(n):
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                v = -y[t] * grad[t]
                if v > gmax:
                    gmax = v
                    i = t
        # j: second-order choice in I_low
        gmin = np.inf
        j = -1
        best = np.inf
        for t in range(n):
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                v = -y[t] * grad[t]
                if v < gmin:
                    gmin = v
                if i >= 0 and v < gmax:
                    b = gmax - v
                    a = K[i, i] + K[t, t] - 2.0 * K[i, t]
                    if a <= 0:
                        a = _TAU
                    obj = -(b * b) / a
                    if obj < best:
                        best = obj
                        j = t
        if i < 0 or j < 0 or gmax - gmin < tol:
            converged = True
            break

        yi = y[i]
        yj = y[j]
        a = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if a <= 0:
            a = _TAU
        ai_old = alpha[i]
        aj_old = alpha[j]
        if yi != yj:
            delta = (-grad[i] - grad[j]) / a
            diff = ai_old - aj_old
            ai = ai_old + delta
            aj = aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj = 0.0
                    ai = diff
            else:
                if ai < 0:
                    ai = 0.0
                    aj = -diff
            if diff > 0:
                if ai > C:
                    ai = C
                    aj = C - diff
            else:
                if aj > C:
                    aj = C
                    ai = C + diff
        else:
            delta = (grad[i] - grad[j]) / a
            s = ai_old + aj_old
            ai = ai_old - delta
            aj = aj_old + delta
            if s > C:
                if ai > C:
                    ai = C
                    aj = s - C
            else:
                if aj < 0:
                    aj = 0.0
                    ai = s
            if s > C:
                if aj > C:
                    aj = C
                    ai = s - C
            else:
                if ai < 0:
                    ai = 0.0
                    aj = s
        alpha[i] = ai
        alpha[j] = aj
        dai = ai - ai_old
        daj = aj - aj_old
        for t in range(n):
            grad[t] += y[t] * (yi * K[t, i] * dai + yj * K[t, j] * daj)
        it += 1

    # bias: mean over free vectors of y_i - sum_j alpha_j y_j K_ij = -y_i grad_i
    nfree = 0
    acc = 0.0
    ub = np.inf
    lb = -np.inf
    for t in range(n):
        v = -y[t] * grad[t]
        if 0 < alpha[t] < C:
            nfree += 1
            acc += v
        elif (y[t] > 0 and alpha[t] == 0) or (y[t] < 0 and alpha[t] == C):
            lb = max(lb, v)  # needs y f >= 1, so b >= v
        else:
            ub = min(ub, v)
    if nfree > 0:
        bias = acc / nfree
    elif np.isfinite(ub) and np.isfinite(lb):
        bias = 0.5 * (ub + lb)
    elif np.isfinite(ub):
        bias = ub
    else:
        bias = lb
    return alpha, bias, converged, it


@dataclass(frozen=True)
class BinarySVM:
    """Trained two-class machine; ``dual_coefs`` hold alpha_i * y_i."""

    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    hyperparams: SVMHyperparams
    converged: bool = True
    n_iter: int = 0

    def to_dict(self) -> dict:
        return {"support_vectors": self.support_vectors.tolist(),
                "dual_coefs": self.dual_coefs.tolist(),
                "bias": self.bias}


def dual_objective(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    """sum(alpha) - 1/2 (alpha*y)^T K (alpha*y), the quantity SMO maximises."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def solve_dual(K: np.ndarray, y: np.ndarray, c: float, tol: float = TOL,
               max_iter: int = MAX_ITER):
    """Run SMO on a precomputed kernel; returns ``(alpha, bias, converged, n_iter)``."""
    y = np.asarray(y, dtype=float)
    if not (np.any(y > 0) and np.any(y < 0)):
        raise ValueError("training data must contain both classes")
    return _smo(np.ascontiguousarray(K, dtype=float), y, float(c), float(tol), int(max_iter))


def train_binary(X, y, hp: SVMHyperparams, seed: int = 0, *, K: np.ndarray | None = None,
                 tol: float = TOL, max_iter: int = MAX_ITER) -> BinarySVM:
    """Train one machine on labels y in {-1, +1}.

    SMO here is deterministic, so ``seed`` only exists for interface
    symmetry with the randomised tuners. A run that hits ``max_iter`` is
    returned with ``converged=False``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise ValueError("binary labels must be -1 or +1")
    if K is None:
        K = kernel_matrix(X, X, hp.gamma)
    alpha, bias, converged, n_iter = solve_dual(K, y, hp.c, tol, max_iter)
    sv = alpha > 0
    return BinarySVM(support_vectors=X[sv], dual_coefs=(alpha * y)[sv], bias=float(bias),
                     hyperparams=hp, converged=bool(converged), n_iter=int(n_iter))


def decision_function(m: BinarySVM, s) -> np.ndarray | float:
    """sum_i coef_i K(sv_i, s) + b for one vector or a batch of rows."""
    s = np.asarray(s, dtype=float)
    single = s.ndim == 1
    S = np.atleast_2d(s)
    if m.support_vectors.shape[0] == 0:
        out = np.full(S.shape[0], m.bias)
    else:
        if S.shape[1] != m.support_vectors.shape[1]:
            raise ValueError("feature dimension does not match the model")
        out = kernel_matrix(S, m.support_vectors, m.hyperparams.gamma) @ m.dual_coefs + m.bias
    return float(out[0]) if single else out


@dataclass(frozen=True)
class SVMModel:
    """One-vs-one ensemble; ``machines[(a, b)]`` separates a (+1) from b (-1)."""

    classes: tuple[int, ...]
    machines: dict
    hyperparams: SVMHyperparams
    normalizer: NormalizationStats | None = None

    @property
    def converged(self) -> bool:
        return all(m.converged for m in self.machines.values())

    def to_json(self) -> str:
        return json.dumps({
            "hyperparams": {"c": self.hyperparams.c, "gamma": self.hyperparams.gamma},
            "classes": list(self.classes),
            "normalizer": None if self.normalizer is None else json.loads(self.normalizer.to_json()),
            "machines": [dict(class_pair=list(k), **m.to_dict()) for k, m in self.machines.items()],
        })

    @classmethod
    def from_json(cls, text: str) -> "SVMModel":
        d = json.loads(text)
        hp = SVMHyperparams(**d["hyperparams"])
        machines = {}
        for m in d["machines"]:
            sv = np.asarray(m["support_vectors"], dtype=float).reshape(len(m["dual_coefs"]), -1)
            machines[tuple(m["class_pair"])] = BinarySVM(
                sv, np.asarray(m["dual_coefs"], dtype=float), float(m["bias"]), hp)
        norm = d.get("normalizer")
        return cls(tuple(d["classes"]), machines, hp,
                   None if norm is None else NormalizationStats.from_dict(norm))


def _canonical_order(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    keys = [X[:, c] for c in range(X.shape[1] - 1, -1, -1)] + [y]
    return np.lexsort(keys)


def train_multiclass(X, y, hp: SVMHyperparams, seed: int = 0, *,
                     normalizer: NormalizationStats | None = None,
                     sqdist: np.ndarray | None = None,
                     tol: float = TOL, max_iter: int = MAX_ITER) -> SVMModel:
    """Train every pairwise machine.

    ``X`` must already be normalised; ``normalizer`` is only stored so the
    model can normalise raw vectors at prediction time. Rows are put in a
    canonical order first, so the result does not depend on input order.
    ``sqdist`` (pairwise squared distances of ``X``) lets repeated fits at
    different gamma skip recomputing distances.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=int)
    order = _canonical_order(X, y)
    X, y = X[order], y[order]
    D = sq_distances(X, X) if sqdist is None else sqdist[np.ix_(order, order)]
    K = np.exp(-hp.gamma * D)
    classes = tuple(int(c) for c in np.unique(y))
    if len(classes) < 2:
        raise ValueError("need at least two classes")
    machines = {}
    for a, b in itertools.combinations(classes, 2):
        idx = np.flatnonzero((y == a) | (y == b))
        yy = np.where(y[idx] == a, 1.0, -1.0)
        machines[(a, b)] = train_binary(X[idx], yy, hp, seed, K=K[np.ix_(idx, idx)],
                                        tol=tol, max_iter=max_iter)
    return SVMModel(classes, machines, hp, normalizer)


def _vote(model: SVMModel, Xn: np.ndarray) -> np.ndarray:
    n = Xn.shape[0]
    cls_index = {c: i for i, c in enumerate(model.classes)}
    votes = np.zeros((n, len(model.classes)))
    strength = np.zeros((n, len(model.classes)))
    for (a, b), m in model.machines.items():
        f = np.atleast_1d(decision_function(m, Xn))
        win_a = f > 0
        ia, ib = cls_index[a], cls_index[b]
        votes[:, ia] += win_a
        votes[:, ib] += ~win_a
        strength[:, ia] += np.where(win_a, np.abs(f), 0.0)
        strength[:, ib] += np.where(win_a, 0.0, np.abs(f))
    return votes, strength


def predict(model: SVMModel, s, *, normalized: bool = True) -> np.ndarray | int:
    """Majority vote over the pairwise machines.

    Ties go to the class with the largest summed |decision value| among its
    winning machines, then to the lowest class id. Pass ``normalized=False``
    to z-score raw feature vectors with the model's stored statistics.
    """
    s = np.asarray(s, dtype=float)
    single = s.ndim == 1
    Xn = np.atleast_2d(s)
    if not normalized:
        if model.normalizer is None:
            raise ValueError("model has no stored normalizer")
        Xn = (Xn - model.normalizer.means) / model.normalizer.stds
    votes, strength = _vote(model, Xn)
    out = np.empty(Xn.shape[0], dtype=int)
    for r in range(Xn.shape[0]):
        top = np.flatnonzero(votes[r] == votes[r].max())
        if top.size > 1:
            s_top = strength[r, top]
            top = top[s_top == s_top.max()]
        out[r] = model.classes[top[0]]
    return int(out[0]) if single else out


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are true classes, columns predicted classes."""

    counts: np.ndarray
    classes: tuple[int, ...] = field(default=tuple(range(1, 16)))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def correct(self) -> int:
        return int(np.trace(self.counts))

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    def per_class(self) -> dict:
        out = {}
        for i, c in enumerate(self.classes):
            tp = self.counts[i, i]
            col = self.counts[:, i].sum()
            row = self.counts[i, :].sum()
            out[c] = {"precision": float(tp / col) if col else 0.0,
                      "recall": float(tp / row) if row else 0.0}
        return out


def confusion(y_true, y_pred, classes=tuple(range(1, 16))) -> ConfusionMatrix:
    index = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=int)
    for t, p in zip(y_true, y_pred):
        counts[index[int(t)], index[int(p)]] += 1
    return ConfusionMatrix(counts, tuple(classes))


def evaluate(model: SVMModel, X, y, classes=tuple(range(1, 16))) -> ConfusionMatrix:
    """Confusion matrix of ``model`` on normalised test rows."""
    return confusion(y, predict(model, np.atleast_2d(X)), classes)
