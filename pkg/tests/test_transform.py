import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_force_st
from pqdetect.models import DisturbanceClass, SamplingGrid, generate_signal, sample_params
from pqdetect.transform import (STANDARD_ST, WindowCoefficients, inverse_check, sogw_st,
                                stockwell, time_window, voice_sigmas, window_sigma)

DEFAULT = WindowCoefficients()


def test_window_sigma_values():
    assert window_sigma(1.0) == pytest.approx(6 + 12 + 0.08)
    assert window_sigma(50.0, STANDARD_ST) == pytest.approx(1 / 50)
    # (0, 1, 0) is a constant width of one unit, not 1/f
    np.testing.assert_allclose(window_sigma(np.array([1.0, 50.0, 400.0]),
                                            WindowCoefficients(0, 1, 0)), 1.0)


def test_window_sigma_rejects_bad_input():
    with pytest.raises(ValueError):
        window_sigma(0.0)
    with pytest.raises(ValueError):
        window_sigma(10.0, WindowCoefficients(-1.0, 0.0, 0.0))


def test_time_window_has_unit_area():
    x = np.linspace(-1, 1, 200001)
    g = time_window(x, 50.0, STANDARD_ST)
    assert np.trapezoid(g, x) == pytest.approx(1.0, rel=1e-9)


def test_parse_coefficients():
    assert WindowCoefficients.parse("6,12,0.08") == DEFAULT
    with pytest.raises(ValueError):
        WindowCoefficients.parse("1,2")


def test_voice_sigmas_modes():
    s_hz = voice_sigmas(64, 3200.0, DEFAULT, "hz")
    assert s_hz[0] == pytest.approx(window_sigma(50.0))
    s_n = voice_sigmas(64, 3200.0, DEFAULT, "normalized")
    assert s_n[0] == pytest.approx((6 / 64 + 12 + 0.08 * 64) / 3200)
    with pytest.raises(ValueError):
        voice_sigmas(64, 3200.0, DEFAULT, "cycles")


def test_shape_and_voice_grid():
    st_ = sogw_st(generate_signal(DisturbanceClass.PURE_SINE))
    assert st_.values.shape == (321, 640)
    assert st_.voice_freqs_hz[10] == pytest.approx(50.0)


def test_row_zero_is_mean(rng):
    x = rng.normal(size=100) + 3
    st_ = sogw_st(x, DEFAULT, 1000.0)
    np.testing.assert_allclose(st_.values[0], x.mean())


def test_rejects_empty_and_bare_array_without_rate():
    with pytest.raises(ValueError):
        sogw_st(np.zeros(0), DEFAULT, 100.0)
    with pytest.raises(TypeError):
        sogw_st(np.zeros(8))


@pytest.mark.parametrize("coeffs,fs,mode,voices,span", [
    ((6, 12, 0.08), 3200.0, "normalized", None, 12.0),
    ((6, 12, 0.08), 64.0, "hz", None, 12.0),
    ((6, 12, 0.08), 3200.0, "hz", [1, 2, 3], 6.0),
    ((0, 1, 0), 3200.0, "hz", None, 12.0),
    ((0, 1, 0), 3200.0, "normalized", None, 12.0),
    ((0, 0, 1), 64.0, "hz", None, 12.0),
])
def test_matches_direct_sum(coeffs, fs, mode, voices, span, rng):
    x = rng.normal(size=64)
    ref = brute_force_st(x, fs, coeffs, mode, voices, span)
    got = sogw_st(x, WindowCoefficients(*coeffs), fs, mode).values
    rows = slice(None) if voices is None else [0] + voices
    np.testing.assert_allclose(got[rows], ref[rows], rtol=1e-6, atol=0)


@pytest.mark.parametrize("mode", ["hz", "normalized"])
def test_inverse_round_trip(mode, rng):
    for n in (63, 64, 128):
        x = rng.normal(size=n)
        rec = inverse_check(sogw_st(x, DEFAULT, 3200.0, mode))
        np.testing.assert_allclose(rec, x, rtol=0, atol=1e-12)


def test_linearity(rng):
    x, y = rng.normal(size=(2, 128))
    sx, sy = (sogw_st(v, DEFAULT, 3200.0, "normalized").values for v in (x, y))
    np.testing.assert_allclose(sogw_st(2 * x - y, DEFAULT, 3200.0, "normalized").values,
                               2 * sx - sy, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(shift=st.integers(0, 127), seed=st.integers(0, 10_000))
def test_circular_shift_moves_magnitude(shift, seed):
    x = np.random.default_rng(seed).normal(size=128)
    a = sogw_st(x, DEFAULT, 3200.0, "normalized").magnitude
    b = sogw_st(np.roll(x, shift), DEFAULT, 3200.0, "normalized").magnitude
    np.testing.assert_allclose(b, np.roll(a, shift, axis=1), atol=1e-12)


def test_pure_sine_peaks_at_fundamental_standard_st():
    sig = generate_signal(DisturbanceClass.PURE_SINE)
    mag = stockwell(sig).magnitude
    assert np.all(np.argmax(mag[1:, 64:-64], axis=0) + 1 == 10)
    # centre columns: the 1/f window resolves the amplitude of a unit sine as 1/2
    assert mag[10, 320] == pytest.approx(0.5, rel=1e-3)


def test_generated_classes_reconstruct():
    grid = SamplingGrid()
    for cls in DisturbanceClass:
        sig = generate_signal(cls, sample_params(cls, grid, int(cls)), grid)
        rec = inverse_check(sogw_st(sig))
        assert np.linalg.norm(rec - sig.samples) <= 1e-10 * np.linalg.norm(sig.samples)
