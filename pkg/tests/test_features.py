import json

import numpy as np
import pytest

from pqdetect.features import (FeatureVector, NormalizationStats, apply_normalizer,
                               extract_features, feature_matrix, fit_normalizer,
                               frequency_contour, magnitude_contour, phase_contour)
from pqdetect.models import DisturbanceClass, generate_dataset, generate_signal
from pqdetect.transform import STMatrix, WindowCoefficients, sogw_st, stockwell


def _st(values, fs=8.0):
    values = np.asarray(values, dtype=complex)
    n = values.shape[1]
    return STMatrix(values, np.arange(values.shape[0]) * fs / n, fs, WindowCoefficients())


def test_contours_hand_computed():
    st = _st([[9, 9, 9, 9],        # voice 0 is ignored
              [1, 3, 2, 2j],
              [2, 1, 2, -1]])
    np.testing.assert_allclose(magnitude_contour(st), [2, 3, 2, 2])
    # column 2 ties between voices 1 and 2 and goes to the lower one
    np.testing.assert_allclose(frequency_contour(st), [4, 2, 2, 2])
    np.testing.assert_allclose(phase_contour(st), [0, 0, 0, np.pi / 2])


def test_features_hand_computed():
    st = _st([[0, 0, 0, 0], [1, 3, 2, 2j], [2, 1, 2, -1]])
    fv = extract_features(st, label=3)
    mag = np.array([2, 3, 2, 2.0])
    freq = np.array([4, 2, 2, 2.0])
    assert fv.f1_std_mag == pytest.approx(mag.std())
    assert fv.f2_energy_mag == pytest.approx(np.sum(mag ** 2))
    assert fv.f3_std_freq == pytest.approx(freq.std())
    assert fv.f4_energy_freq == pytest.approx(np.sum(freq ** 2))
    assert fv.label is DisturbanceClass.SAG_HARMONICS


def test_pure_sine_contour_is_flat():
    fv = extract_features(stockwell(generate_signal(DisturbanceClass.PURE_SINE)))
    assert fv.f3_std_freq == 0.0
    assert fv.f4_energy_freq == pytest.approx(640 * 50.0 ** 2)
    assert fv.f1_std_mag < 1e-3


def test_sag_lowers_magnitude_energy():
    sine = extract_features(sogw_st(generate_signal(DisturbanceClass.PURE_SINE),
                                    freq_mode="normalized"))
    ds = generate_dataset(5)
    sags = [s for s in ds if s.label is DisturbanceClass.SAG]
    for s in sags:
        fv = extract_features(sogw_st(s, freq_mode="normalized"))
        assert fv.f2_energy_mag < sine.f2_energy_mag
        assert fv.f1_std_mag > sine.f1_std_mag


def test_phase_variant_changes_second_pair():
    sig = generate_dataset(1)[1]
    st = sogw_st(sig, freq_mode="normalized")
    a = extract_features(st)
    b = extract_features(st, second="phase")
    assert (a.f1_std_mag, a.f2_energy_mag) == (b.f1_std_mag, b.f2_energy_mag)
    assert a.f3_std_freq != b.f3_std_freq


def test_feature_matrix_shapes():
    ds = generate_dataset(2)
    X, y = feature_matrix(ds, freq_mode="normalized")
    assert X.shape == (30, 4) and y.tolist() == [c for c in range(1, 16) for _ in range(2)]
    X0, y0 = feature_matrix([])
    assert X0.shape == (0, 4) and y0.size == 0


def test_normalizer_zscores(rng):
    X = rng.normal(3, 2, size=(50, 4))
    stats = fit_normalizer(X)
    Z = apply_normalizer(stats, X)
    np.testing.assert_allclose(Z.mean(0), 0, atol=1e-12)
    np.testing.assert_allclose(Z.std(0), 1, atol=1e-12)
    fv = FeatureVector(*X[0], label=1)
    z = apply_normalizer(stats, fv)
    np.testing.assert_allclose(z.as_array(), Z[0])
    assert z.label == fv.label


def test_normalizer_constant_column_named():
    X = np.ones((5, 4))
    X[:, 0] = np.arange(5)
    with pytest.raises(ValueError, match="f2, f3, f4"):
        fit_normalizer(X)
    with pytest.raises(ValueError):
        fit_normalizer(np.zeros((0, 4)))


def test_normalizer_json_round_trip(rng):
    stats = fit_normalizer(rng.normal(size=(10, 4)))
    back = NormalizationStats.from_dict(json.loads(stats.to_json()))
    np.testing.assert_array_equal(back.means, stats.means)
    np.testing.assert_array_equal(back.stds, stats.stds)


def test_literal_hz_default_window_is_flat():
    # With sigma in seconds at f in Hz the default window spans hundreds of
    # seconds, so every voice is constant along time.
    sig = generate_dataset(1)[1]
    fv = extract_features(sogw_st(sig, freq_mode="hz"))
    assert fv.f1_std_mag < 1e-9 and fv.f3_std_freq == 0.0
