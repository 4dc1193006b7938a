"""Contour features of an S-transform and z-score normalisation."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

from .models import DisturbanceClass, WaveformSignal
from .transform import STMatrix, WindowCoefficients, sogw_st

FEATURE_NAMES = ("f1", "f2", "f3", "f4")


@dataclass(frozen=True)
class FeatureVector:
    f1_std_mag: float
    f2_energy_mag: float
    f3_std_freq: float
    f4_energy_freq: float
    label: DisturbanceClass | None = None

    def as_array(self) -> np.ndarray:
        return np.array([self.f1_std_mag, self.f2_energy_mag,
                         self.f3_std_freq, self.f4_energy_freq])


def _peak_voice(st: STMatrix) -> np.ndarray:
    # np.argmax returns the first maximum, i.e. ties go to the lower voice.
    return 1 + np.argmax(np.abs(st.values[1:, :]), axis=0)


def magnitude_contour(st: STMatrix) -> np.ndarray:
    """Per time index, the largest |S| over voices k >= 1."""
    if st.values.shape[0] < 2:
        return np.zeros(st.n_samples)
    return np.abs(st.values[1:, :]).max(axis=0)


def frequency_contour(st: STMatrix) -> np.ndarray:
    """Per time index, the frequency (Hz) of the voice holding the largest |S|."""
    if st.values.shape[0] < 2:
        return np.zeros(st.n_samples)
    return st.voice_freqs_hz[_peak_voice(st)]


def phase_contour(st: STMatrix) -> np.ndarray:
    """Per time index, arg S at the peak-magnitude voice."""
    peak = _peak_voice(st)
    return np.angle(st.values[peak, np.arange(st.n_samples)])


def extract_features(st: STMatrix, label=None,
                     second: Literal["frequency", "phase"] = "frequency") -> FeatureVector:
    """Standard deviation and energy of the magnitude and frequency contours.

    ``second="phase"`` swaps the frequency contour for :func:`phase_contour`.
    """
    mag = magnitude_contour(st)
    other = frequency_contour(st) if second == "frequency" else phase_contour(st)
    return FeatureVector(
        f1_std_mag=float(np.std(mag)),
        f2_energy_mag=float(np.sum(mag * mag)),
        f3_std_freq=float(np.std(other)),
        f4_energy_freq=float(np.sum(other * other)),
        label=None if label is None else DisturbanceClass(label),
    )


def feature_matrix(signals: Iterable[WaveformSignal],
                   coeffs: WindowCoefficients = WindowCoefficients(),
                   freq_mode: str = "hz",
                   second: str = "frequency") -> tuple[np.ndarray, np.ndarray]:
    """Transform and featurise a batch; returns ``(X, y)`` with y the class ids."""
    rows, labels = [], []
    for sig in signals:
        fv = extract_features(sogw_st(sig, coeffs, freq_mode=freq_mode), sig.label, second)
        rows.append(fv.as_array())
        labels.append(int(sig.label))
    return np.array(rows).reshape(-1, 4), np.array(labels, dtype=int)


def _as_matrix(data) -> np.ndarray:
    if isinstance(data, FeatureVector):
        return data.as_array()
    if isinstance(data, Sequence) and data and isinstance(data[0], FeatureVector):
        return np.array([fv.as_array() for fv in data])
    return np.asarray(data, dtype=float)


@dataclass(frozen=True)
class NormalizationStats:
    means: np.ndarray
    stds: np.ndarray

    def to_json(self) -> str:
        return json.dumps({"means": self.means.tolist(), "stds": self.stds.tolist()})

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationStats":
        return cls(np.asarray(d["means"], dtype=float), np.asarray(d["stds"], dtype=float))


def fit_normalizer(train) -> NormalizationStats:
    """Per-feature mean and population std of the training rows."""
    X = np.atleast_2d(_as_matrix(train))
    if X.shape[0] == 0:
        raise ValueError("cannot fit a normalizer on an empty set")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    flat = np.flatnonzero(~(stds > 0))
    if flat.size:
        names = ", ".join(FEATURE_NAMES[i] if i < 4 else str(i) for i in flat)
        raise ValueError(f"feature column(s) {names} are constant over the training set")
    return NormalizationStats(means, stds)


def apply_normalizer(stats: NormalizationStats, data):
    """z-score ``data`` with training statistics.

    Accepts a FeatureVector (returns a FeatureVector) or an array of rows.
    """
    if isinstance(data, FeatureVector):
        z = (data.as_array() - stats.means) / stats.stds
        return FeatureVector(*z.tolist(), label=data.label)
    return (_as_matrix(data) - stats.means) / stats.stds
