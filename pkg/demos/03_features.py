"""Contour features per class.

Extracts the four features (std and energy of the magnitude and frequency
contours) for 20 signals per class and prints class means, then shows the
z-score normaliser.

    python3 demos/03_features.py
"""

import numpy as np

from pqdetect.features import FEATURE_NAMES, feature_matrix, fit_normalizer, apply_normalizer
from pqdetect.models import DisturbanceClass, generate_dataset

signals = generate_dataset(20, master_seed=0)
X, y = feature_matrix(signals, freq_mode="normalized")

print(f"{'class':<30}" + "".join(f"{n:>12}" for n in FEATURE_NAMES))
for cls in DisturbanceClass:
    m = X[y == cls].mean(axis=0)
    print(f"{cls.label + ' ' + cls.name:<30}" + "".join(f"{v:12.4g}" for v in m))

# Interruption removes most of the fundamental, so its magnitude energy is
# well below that of a swell.
f2 = {c: X[y == c, 1].mean() for c in (DisturbanceClass.INTERRUPTION, DisturbanceClass.SWELL)}
print(f"mean f2: interruption {f2[DisturbanceClass.INTERRUPTION]:.1f}, "
      f"swell {f2[DisturbanceClass.SWELL]:.1f}")

stats = fit_normalizer(X)
Z = apply_normalizer(stats, X)
print("normalised column means", np.round(Z.mean(0), 12), "stds", np.round(Z.std(0), 12))
