"""RBF support vector machine trained with SMO.

Fits a binary machine on two overlapping blobs and checks the KKT
conditions, then a one-vs-one multiclass model on three blobs.

    python3 demos/04_svm_smo.py
"""

import numpy as np

from pqdetect import svm

rng = np.random.default_rng(0)
X = np.vstack([rng.normal(-1, 1, size=(40, 2)), rng.normal(1, 1, size=(40, 2))])
y = np.repeat([1.0, -1.0], 40)
hp = svm.SVMHyperparams(c=1.0, gamma=0.5)

K = svm.kernel_matrix(X, X, hp.gamma)
alpha, bias, converged, n_iter = svm.solve_dual(K, y, hp.c)
print(f"SMO: {n_iter} iterations, converged={converged}, dual objective "
      f"{svm.dual_objective(alpha, y, K):.6f}")

m = svm.train_binary(X, y, hp, K=K)
margin = y * svm.decision_function(m, X)
free = (alpha > 0) & (alpha < hp.c)
print(f"{len(m.dual_coefs)} support vectors, {free.sum()} free; "
      f"free margins within {np.abs(margin[free] - 1).max():.1e} of 1")
print(f"non-support vectors all have margin >= 1: {bool(np.all(margin[alpha == 0] >= 1 - 1e-3))}")

# Three classes, one-vs-one voting.
centres = np.array([[0, 0], [4, 0], [2, 3]])
X3 = np.vstack([c + rng.normal(size=(30, 2)) for c in centres])
y3 = np.repeat([1, 2, 3], 30)
model = svm.train_multiclass(X3, y3, svm.SVMHyperparams(10.0, 0.5))
cm = svm.evaluate(model, X3, y3, classes=(1, 2, 3))
print("training confusion matrix:\n", cm.counts, f"\naccuracy {cm.accuracy:.3f}")
